//! Deterministic sweep harness: run the optimizer and the centrality
//! baselines over a grid of (|M|, k) cells and emit plot-ready CSV plus one
//! assignment file per cell.
//!
//! Identical configurations (including the seed) produce byte-identical
//! outputs; cells run in parallel but results are reduced in grid order.

use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::failsim::{simulate_all, EvalMode, FailsimError, SuccessReport};
use crate::heuristics::{centrality_assignment, CentralityKind, HeuristicError};
use crate::metric::{decimal_string, Assignment, Rational};
use crate::solver::{
    solve_exact, solve_local, Instance, LocalSearchParams, OptimizationResult, SolveBudget,
    SolverError,
};
use crate::topology::{FlowSet, Topology};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Failsim(#[from] FailsimError),
    #[error("sweep needs at least one |M| value and one k value")]
    EmptyGrid,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which optimizer runs in each sweep cell.
#[derive(Debug, Clone, Copy)]
pub enum SolverChoice {
    Exact(SolveBudget),
    Local {
        restarts: u32,
        max_iterations: Option<u64>,
    },
}

impl SolverChoice {
    pub fn code(&self) -> &'static str {
        match self {
            SolverChoice::Exact(_) => "exact",
            SolverChoice::Local { .. } => "local",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub manufacturers: Vec<usize>,
    pub k_values: Vec<usize>,
    pub solver: SolverChoice,
    pub seed: u64,
    /// Failure-simulation mode for the success CSV.
    pub mode: EvalMode,
}

/// One (|M|, k) grid cell: the optimizer result, the centrality baselines
/// with their PSD scores, and the failure-simulation rows per method.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub num_manufacturers: usize,
    pub k: usize,
    pub solver_method: &'static str,
    pub result: OptimizationResult,
    pub heuristics: Vec<(CentralityKind, Assignment, Rational)>,
    /// `(method, reports)`; empty when |M| < 2.
    pub success: Vec<(String, Vec<SuccessReport>)>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub topology_name: String,
    pub cells: Vec<SweepCell>,
}

/// Stable per-cell seed derivation (splitmix-style) so cells are
/// independent of execution order.
pub fn derive_cell_seed(seed: u64, m: usize, k: usize) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(1 + m as u64))
        .wrapping_add(0xbf58476d1ce4e5b9u64.wrapping_mul(1 + k as u64));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Run one optimizer cell; shared by the sweep and the CLI optimize path.
pub fn optimize_cell(
    topology: &Topology,
    flows: &FlowSet,
    num_manufacturers: usize,
    k: usize,
    solver: &SolverChoice,
    seed: u64,
) -> Result<(Instance, OptimizationResult), ExperimentError> {
    let instance = Instance::build(topology.clone(), flows.clone(), num_manufacturers, k)?;
    let result = match solver {
        SolverChoice::Exact(budget) => solve_exact(&instance, budget)?,
        SolverChoice::Local {
            restarts,
            max_iterations,
        } => {
            let params = LocalSearchParams {
                restarts: *restarts,
                max_iterations: *max_iterations,
                seed,
            };
            solve_local(&instance, &params)?
        }
    };
    Ok((instance, result))
}

fn run_cell(
    topology: &Topology,
    flows: &FlowSet,
    config: &SweepConfig,
    num_manufacturers: usize,
    k: usize,
) -> Result<SweepCell, ExperimentError> {
    let cell_seed = derive_cell_seed(config.seed, num_manufacturers, k);
    let (instance, result) =
        optimize_cell(topology, flows, num_manufacturers, k, &config.solver, cell_seed)?;

    let mut heuristics = Vec::new();
    for kind in CentralityKind::ALL {
        // Skip metrics the topology cannot support (e.g. closeness on a
        // disconnected graph).
        if let Ok(assignment) = centrality_assignment(topology, kind, flows, num_manufacturers) {
            let objective = instance.evaluate(&assignment)?;
            let psd = instance.normalize(&objective);
            heuristics.push((kind, assignment, psd));
        }
    }

    let mut success = Vec::new();
    if num_manufacturers >= 2 {
        let sim_k = match config.mode {
            EvalMode::Residual => None,
            EvalMode::KPaths => Some(k),
        };
        success.push((
            config.solver.code().to_string(),
            simulate_all(topology, &result.assignment, flows, config.mode, sim_k)?,
        ));
        for (kind, assignment, _) in &heuristics {
            success.push((
                kind.code().to_string(),
                simulate_all(topology, assignment, flows, config.mode, sim_k)?,
            ));
        }
    }

    Ok(SweepCell {
        num_manufacturers,
        k,
        solver_method: config.solver.code(),
        result,
        heuristics,
        success,
    })
}

/// Run the full grid. Cells execute in parallel; the output is ordered by
/// (|M|, k) as configured.
pub fn run_sweep(
    topology: &Topology,
    flows: &FlowSet,
    config: &SweepConfig,
) -> Result<SweepOutput, ExperimentError> {
    if config.manufacturers.is_empty() || config.k_values.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let grid: Vec<(usize, usize)> = config
        .manufacturers
        .iter()
        .flat_map(|&m| config.k_values.iter().map(move |&k| (m, k)))
        .collect();
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&(m, k)| run_cell(topology, flows, config, m, k))
        .collect::<Result<_, _>>()?;
    Ok(SweepOutput {
        topology_name: topology.name().to_string(),
        cells,
    })
}

impl SweepOutput {
    /// Long-format PSD table: one row per (cell, method).
    pub fn psd_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([
                "topology",
                "num_manufacturers",
                "k",
                "method",
                "psd",
                "psd_exact",
            ])
            .expect("csv record");
        for cell in &self.cells {
            writer
                .write_record([
                    self.topology_name.as_str(),
                    &cell.num_manufacturers.to_string(),
                    &cell.k.to_string(),
                    cell.solver_method,
                    &decimal_string(&cell.result.psd, 6),
                    &cell.result.psd.to_string(),
                ])
                .expect("csv record");
            for (kind, _, psd) in &cell.heuristics {
                writer
                    .write_record([
                        self.topology_name.as_str(),
                        &cell.num_manufacturers.to_string(),
                        &cell.k.to_string(),
                        kind.code(),
                        &decimal_string(psd, 6),
                        &psd.to_string(),
                    ])
                    .expect("csv record");
            }
        }
        String::from_utf8(writer.into_inner().expect("csv bytes")).expect("csv utf8")
    }

    /// Long-format success table: one row per (cell, method, scenario).
    pub fn success_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([
                "topology",
                "num_manufacturers",
                "k",
                "method",
                "scenario",
                "mode",
                "flows_total",
                "flows_success",
                "pct_success",
                "pct_success_weighted",
            ])
            .expect("csv record");
        for cell in &self.cells {
            for (method, reports) in &cell.success {
                for report in reports {
                    writer
                        .write_record([
                            self.topology_name.as_str(),
                            &cell.num_manufacturers.to_string(),
                            &cell.k.to_string(),
                            method,
                            &report.scenario.label(),
                            report.mode.code(),
                            &report.flows_total.to_string(),
                            &report.flows_success.to_string(),
                            &format!("{:.4}", report.pct_success),
                            &format!("{:.4}", report.pct_success_weighted),
                        ])
                        .expect("csv record");
                }
            }
        }
        String::from_utf8(writer.into_inner().expect("csv bytes")).expect("csv utf8")
    }

    pub fn any_budget_exhausted(&self) -> bool {
        self.cells.iter().any(|c| c.result.budget_exhausted)
    }
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Write the sweep artifacts: one assignment and result file per cell plus
/// the two plot CSVs. Returns the written paths.
pub fn write_sweep_outputs(output: &SweepOutput, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for cell in &output.cells {
        let stem = format!("m{}_k{}", cell.num_manufacturers, cell.k);
        let assignment_path = dir.join(format!("assignment_{stem}.json"));
        write_atomic(
            &assignment_path,
            &cell.result.assignment.render(Some(&output.topology_name)),
        )?;
        written.push(assignment_path);
        let result_path = dir.join(format!("result_{stem}.json"));
        write_atomic(&result_path, &cell.result.render(&output.topology_name, cell.k))?;
        written.push(result_path);
    }
    let psd_path = dir.join("psd_vs_k.csv");
    write_atomic(&psd_path, &output.psd_csv())?;
    written.push(psd_path);
    let success_path = dir.join("success_vs_scenario.csv");
    write_atomic(&success_path, &output.success_csv())?;
    written.push(success_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::enumerate_flows;

    fn small_sweep_config() -> SweepConfig {
        SweepConfig {
            manufacturers: vec![2, 3],
            k_values: vec![2, 4],
            solver: SolverChoice::Exact(SolveBudget::default()),
            seed: 42,
            mode: EvalMode::Residual,
        }
    }

    #[test]
    fn sweep_grid_shape_and_order() {
        let topology = Topology::ring(5).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let output = run_sweep(&topology, &flows, &small_sweep_config()).unwrap();
        let grid: Vec<(usize, usize)> = output
            .cells
            .iter()
            .map(|c| (c.num_manufacturers, c.k))
            .collect();
        assert_eq!(grid, vec![(2, 2), (2, 4), (3, 2), (3, 4)]);
        for cell in &output.cells {
            assert_eq!(cell.heuristics.len(), 3);
            assert_eq!(cell.success.len(), 4);
        }
    }

    #[test]
    fn sweep_output_is_deterministic() {
        let topology = Topology::complete(5).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let config = SweepConfig {
            solver: SolverChoice::Local {
                restarts: 6,
                max_iterations: None,
            },
            ..small_sweep_config()
        };
        let a = run_sweep(&topology, &flows, &config).unwrap();
        let b = run_sweep(&topology, &flows, &config).unwrap();
        assert_eq!(a.psd_csv(), b.psd_csv());
        assert_eq!(a.success_csv(), b.success_csv());
    }

    #[test]
    fn sweep_files_on_disk() {
        let topology = Topology::ring(4).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let output = run_sweep(&topology, &flows, &small_sweep_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = write_sweep_outputs(&output, dir.path()).unwrap();
        // 4 cells x (assignment + result) + 2 CSVs.
        assert_eq!(written.len(), 10);
        let assignments = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .starts_with("assignment_")
            })
            .count();
        assert_eq!(assignments, 4);
    }

    #[test]
    fn empty_grid_rejected() {
        let topology = Topology::ring(4).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let config = SweepConfig {
            manufacturers: vec![],
            ..small_sweep_config()
        };
        assert!(matches!(
            run_sweep(&topology, &flows, &config),
            Err(ExperimentError::EmptyGrid)
        ));
    }
}
