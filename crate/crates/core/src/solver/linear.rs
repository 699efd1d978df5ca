//! Exportable linear model equivalent to the assignment search, in CPLEX LP
//! text format, so results stay checkable against any third-party MILP
//! engine.
//!
//! Variables: b[m,n] node-manufacturer choice; u[m,r,j] manufacturer m used
//! in path j of flow r; f[x,r,j] combo x used in path j; F[x,r] combo x
//! used anywhere in flow r; pi[r] accumulated flow reward. The boolean
//! or/and couplings are linearized with standard bounds; only nodes that
//! appear in some path interior enter the model, since no other node can
//! influence a reward.

use std::fmt::Write as _;

use num::{Signed, ToPrimitive, Zero};

use crate::metric::{Assignment, Rational};
use crate::topology::NodeId;

use super::{Instance, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// b: node bought from manufacturer.
    NodeManufacturer { manufacturer: usize, node: usize },
    /// u: manufacturer used in a path.
    PathManufacturer { manufacturer: usize, flow: usize, path: usize },
    /// f: combo realized by a path.
    PathCombo { combo: u64, flow: usize, path: usize },
    /// F: combo realized anywhere in a flow.
    FlowCombo { combo: u64, flow: usize },
    /// pi: accumulated flow reward.
    FlowReward { flow: usize },
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Eq,
    Ge,
}

impl ConstraintOp {
    fn symbol(self) -> &'static str {
        match self {
            ConstraintOp::Le => "<=",
            ConstraintOp::Eq => "=",
            ConstraintOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(Rational, usize)>,
    pub op: ConstraintOp,
    pub rhs: Rational,
}

/// Linear maximization model over binary b/u/f/F and continuous pi.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Maximization objective terms.
    pub objective: Vec<(Rational, usize)>,
    /// Topology nodes included in the model (interior-support).
    pub nodes: Vec<NodeId>,
    num_manufacturers: usize,
    node_count: usize,
}

impl LinearModel {
    pub fn count_kind(&self, probe: fn(&VarRole) -> bool) -> usize {
        self.variables.iter().filter(|v| probe(&v.role)).count()
    }

    pub fn b_count(&self) -> usize {
        self.count_kind(|r| matches!(r, VarRole::NodeManufacturer { .. }))
    }

    pub fn u_count(&self) -> usize {
        self.count_kind(|r| matches!(r, VarRole::PathManufacturer { .. }))
    }

    pub fn f_count(&self) -> usize {
        self.count_kind(|r| matches!(r, VarRole::PathCombo { .. }))
    }

    pub fn flow_combo_count(&self) -> usize {
        self.count_kind(|r| matches!(r, VarRole::FlowCombo { .. }))
    }

    /// Variable values induced by an assignment: b from the assignment,
    /// u/f/F/pi propagated by their defining boolean/affine semantics.
    pub fn induced_values(
        &self,
        instance: &Instance,
        assignment: &Assignment,
    ) -> Result<Vec<Rational>, SolverError> {
        if assignment.node_count() != self.node_count
            || assignment.num_manufacturers() != self.num_manufacturers
        {
            return Err(SolverError::InvalidParams(
                "assignment does not match the model's instance".into(),
            ));
        }
        let one = Rational::from_integer(1);
        let zero = Rational::zero();
        let combo_of_path = |flow: usize, path: usize| -> u64 {
            let mut bits = 0u64;
            for &node in &instance.flow_paths[flow][path] {
                bits |= 1 << assignment.as_slice()[node];
            }
            bits
        };
        let values = self
            .variables
            .iter()
            .map(|var| match var.role {
                VarRole::NodeManufacturer { manufacturer, node } => {
                    if assignment.as_slice()[node] == manufacturer {
                        one.clone()
                    } else {
                        zero.clone()
                    }
                }
                VarRole::PathManufacturer { manufacturer, flow, path } => {
                    if combo_of_path(flow, path) & (1 << manufacturer) != 0 {
                        one.clone()
                    } else {
                        zero.clone()
                    }
                }
                VarRole::PathCombo { combo, flow, path } => {
                    if combo_of_path(flow, path) == combo {
                        one.clone()
                    } else {
                        zero.clone()
                    }
                }
                VarRole::FlowCombo { combo, flow } => {
                    let used = (0..instance.flow_paths[flow].len())
                        .any(|path| combo_of_path(flow, path) == combo);
                    if used {
                        one.clone()
                    } else {
                        zero.clone()
                    }
                }
                VarRole::FlowReward { flow } => {
                    let mut reward = Rational::zero();
                    for (bits, q) in instance.combo_universe() {
                        let used = (0..instance.flow_paths[flow].len())
                            .any(|path| combo_of_path(flow, path) == bits);
                        if used {
                            reward += q;
                        }
                    }
                    reward
                }
            })
            .collect();
        Ok(values)
    }

    /// Names of constraints the values violate (empty when feasible).
    pub fn violated_constraints(&self, values: &[Rational]) -> Vec<String> {
        let mut violated = Vec::new();
        for constraint in &self.constraints {
            let lhs = constraint
                .terms
                .iter()
                .fold(Rational::zero(), |acc, (coeff, var)| {
                    acc + coeff * &values[*var]
                });
            let ok = match constraint.op {
                ConstraintOp::Le => lhs <= constraint.rhs,
                ConstraintOp::Eq => lhs == constraint.rhs,
                ConstraintOp::Ge => lhs >= constraint.rhs,
            };
            if !ok {
                violated.push(constraint.name.clone());
            }
        }
        violated
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective
            .iter()
            .fold(Rational::zero(), |acc, (coeff, var)| {
                acc + coeff * &values[*var]
            })
    }

    /// Render as an LP-format document.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ PSD-maximizing manufacturer assignment\n");
        out.push_str("\\ combo ids encode manufacturer sets: bit i set <=> manufacturer i present\n");
        out.push_str("\\ b_m{m}_n{n} = 1 iff node n is bought from manufacturer m\n");
        out.push_str("\\ u_m{m}_r{r}_p{j} = OR of b over the path interior (bounded both ways)\n");
        out.push_str("\\ f_c{x}_r{r}_p{j} = AND of u / (1-u) literals selected by the combo bits\n");
        out.push_str("\\ F_c{x}_r{r} = OR of f over the flow's paths\n");
        out.push_str("\\ pi_r{r} = sum of combo rewards (1/|combo|) over realized combos\n");
        out.push_str("Maximize\n obj:");
        write_terms(&mut out, &self.objective, &self.variables);
        out.push_str("\nSubject To\n");
        for constraint in &self.constraints {
            write!(out, " {}:", constraint.name).unwrap();
            write_terms(&mut out, &constraint.terms, &self.variables);
            writeln!(
                out,
                " {} {}",
                constraint.op.symbol(),
                coefficient_string(&constraint.rhs)
            )
            .unwrap();
        }
        out.push_str("Bounds\n");
        for var in &self.variables {
            if var.kind == VarKind::Continuous {
                writeln!(out, " {} free", var.name).unwrap();
            }
        }
        out.push_str("Binary\n");
        for var in &self.variables {
            if var.kind == VarKind::Binary {
                writeln!(out, " {}", var.name).unwrap();
            }
        }
        out.push_str("End\n");
        out
    }
}

fn coefficient_string(value: &Rational) -> String {
    if value.is_integer() {
        value.to_integer().to_string()
    } else {
        // Shortest f64 round-trip form; plenty for LP interchange.
        value.to_f64().unwrap_or(f64::NAN).to_string()
    }
}

fn write_terms(out: &mut String, terms: &[(Rational, usize)], variables: &[Variable]) {
    for (i, (coeff, var)) in terms.iter().enumerate() {
        let magnitude = coefficient_string(&coeff.abs());
        let sign = if *coeff < Rational::zero() { "-" } else if i > 0 { "+" } else { "" };
        if sign.is_empty() {
            write!(out, " {} {}", magnitude, variables[*var].name).unwrap();
        } else {
            write!(out, " {} {} {}", sign, magnitude, variables[*var].name).unwrap();
        }
    }
}

/// Build the linear model for an instance.
pub fn export_linear_model(instance: &Instance) -> LinearModel {
    let m_count = instance.num_manufacturers();
    let combos = instance.combo_universe();
    let flow_count = instance.flow_paths.len();

    // Only interior-support nodes can influence any reward.
    let mut nodes: Vec<usize> = instance
        .flow_paths
        .iter()
        .flatten()
        .flatten()
        .copied()
        .collect();
    nodes.sort_unstable();
    nodes.dedup();

    let mut variables: Vec<Variable> = Vec::new();
    let var_index = |variables: &mut Vec<Variable>, name: String, kind: VarKind, role: VarRole| {
        variables.push(Variable { name, kind, role });
        variables.len() - 1
    };

    let mut b = vec![vec![usize::MAX; m_count]; instance.node_count()];
    for &node in &nodes {
        for m in 0..m_count {
            b[node][m] = var_index(
                &mut variables,
                format!("b_m{m}_n{node}"),
                VarKind::Binary,
                VarRole::NodeManufacturer { manufacturer: m, node },
            );
        }
    }
    let mut u = vec![Vec::new(); flow_count];
    let mut f = vec![Vec::new(); flow_count];
    for (flow, paths) in instance.flow_paths.iter().enumerate() {
        for path in 0..paths.len() {
            let mut u_row = Vec::with_capacity(m_count);
            for m in 0..m_count {
                u_row.push(var_index(
                    &mut variables,
                    format!("u_m{m}_r{flow}_p{path}"),
                    VarKind::Binary,
                    VarRole::PathManufacturer { manufacturer: m, flow, path },
                ));
            }
            u[flow].push(u_row);
            let mut f_row = Vec::with_capacity(combos.len());
            for (bits, _) in &combos {
                f_row.push(var_index(
                    &mut variables,
                    format!("f_c{bits}_r{flow}_p{path}"),
                    VarKind::Binary,
                    VarRole::PathCombo { combo: *bits, flow, path },
                ));
            }
            f[flow].push(f_row);
        }
    }
    let mut flow_combo = vec![Vec::new(); flow_count];
    let mut pi = Vec::with_capacity(flow_count);
    for flow in 0..flow_count {
        for (bits, _) in &combos {
            flow_combo[flow].push(var_index(
                &mut variables,
                format!("F_c{bits}_r{flow}"),
                VarKind::Binary,
                VarRole::FlowCombo { combo: *bits, flow },
            ));
        }
        pi.push(var_index(
            &mut variables,
            format!("pi_r{flow}"),
            VarKind::Continuous,
            VarRole::FlowReward { flow },
        ));
    }

    let one = Rational::from_integer(1);
    let neg_one = Rational::from_integer(-1);
    let mut constraints: Vec<Constraint> = Vec::new();

    // One node from one manufacturer only.
    for &node in &nodes {
        constraints.push(Constraint {
            name: format!("assign_n{node}"),
            terms: (0..m_count).map(|m| (one.clone(), b[node][m])).collect(),
            op: ConstraintOp::Eq,
            rhs: one.clone(),
        });
    }

    // u[m,r,j] = OR of b[m,n] over the path interior.
    for (flow, paths) in instance.flow_paths.iter().enumerate() {
        for (path, interior) in paths.iter().enumerate() {
            for m in 0..m_count {
                let u_var = u[flow][path][m];
                for &node in interior {
                    constraints.push(Constraint {
                        name: format!("u_lb_m{m}_r{flow}_p{path}_n{node}"),
                        terms: vec![(one.clone(), u_var), (neg_one.clone(), b[node][m])],
                        op: ConstraintOp::Ge,
                        rhs: Rational::zero(),
                    });
                }
                let mut terms = vec![(one.clone(), u_var)];
                terms.extend(interior.iter().map(|&node| (neg_one.clone(), b[node][m])));
                constraints.push(Constraint {
                    name: format!("u_ub_m{m}_r{flow}_p{path}"),
                    terms,
                    op: ConstraintOp::Le,
                    rhs: Rational::zero(),
                });
            }
        }
    }

    // f[x,r,j] = AND over literals (u when the combo bit is set, 1-u when
    // clear): f <= each literal; f >= sum(literals) - (|M|-1).
    for (flow, paths) in instance.flow_paths.iter().enumerate() {
        for path in 0..paths.len() {
            for (ci, (bits, _)) in combos.iter().enumerate() {
                let f_var = f[flow][path][ci];
                let mut ge_terms = vec![(one.clone(), f_var)];
                for m in 0..m_count {
                    let u_var = u[flow][path][m];
                    if bits & (1 << m) != 0 {
                        constraints.push(Constraint {
                            name: format!("f_le_c{bits}_r{flow}_p{path}_m{m}"),
                            terms: vec![(one.clone(), f_var), (neg_one.clone(), u_var)],
                            op: ConstraintOp::Le,
                            rhs: Rational::zero(),
                        });
                        ge_terms.push((neg_one.clone(), u_var));
                    } else {
                        constraints.push(Constraint {
                            name: format!("f_le_c{bits}_r{flow}_p{path}_m{m}"),
                            terms: vec![(one.clone(), f_var), (one.clone(), u_var)],
                            op: ConstraintOp::Le,
                            rhs: one.clone(),
                        });
                        ge_terms.push((one.clone(), u_var));
                    }
                }
                constraints.push(Constraint {
                    name: format!("f_ge_c{bits}_r{flow}_p{path}"),
                    terms: ge_terms,
                    op: ConstraintOp::Ge,
                    rhs: Rational::from_integer(1 - i128::from(bits.count_ones())),
                });
            }
        }
    }

    // F[x,r] = OR of f[x,r,j] over paths.
    for flow in 0..flow_count {
        let path_count = instance.flow_paths[flow].len();
        for (ci, (bits, _)) in combos.iter().enumerate() {
            let big_f = flow_combo[flow][ci];
            for path in 0..path_count {
                constraints.push(Constraint {
                    name: format!("F_lb_c{bits}_r{flow}_p{path}"),
                    terms: vec![(one.clone(), big_f), (neg_one.clone(), f[flow][path][ci])],
                    op: ConstraintOp::Ge,
                    rhs: Rational::zero(),
                });
            }
            let mut terms = vec![(one.clone(), big_f)];
            terms.extend((0..path_count).map(|path| (neg_one.clone(), f[flow][path][ci])));
            constraints.push(Constraint {
                name: format!("F_ub_c{bits}_r{flow}"),
                terms,
                op: ConstraintOp::Le,
                rhs: Rational::zero(),
            });
        }
    }

    // pi[r] = sum of combo rewards over realized combos.
    for flow in 0..flow_count {
        let mut terms = vec![(one.clone(), pi[flow])];
        for (ci, (_, q)) in combos.iter().enumerate() {
            terms.push((-q.clone(), flow_combo[flow][ci]));
        }
        constraints.push(Constraint {
            name: format!("pi_r{flow}"),
            terms,
            op: ConstraintOp::Eq,
            rhs: Rational::zero(),
        });
    }

    // Objective: sum over flows and combos of w_r * q_x * F[x,r].
    let mut objective = Vec::new();
    for flow in 0..flow_count {
        let weight = &instance.weights[flow];
        if weight.is_zero() {
            continue;
        }
        for (ci, (_, q)) in combos.iter().enumerate() {
            objective.push((weight * q, flow_combo[flow][ci]));
        }
    }

    LinearModel {
        variables,
        constraints,
        objective,
        nodes: nodes.into_iter().map(NodeId).collect(),
        num_manufacturers: m_count,
        node_count: instance.node_count(),
    }
}
