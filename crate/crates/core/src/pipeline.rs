//! One full discretize-assemble-solve-measure run.

use alloc::vec::Vec;

use crate::assembly::{assemble_system, ManufacturedSolution, SaddleSystem};
use crate::error::Result;
use crate::solve::{compute_errors, multiplier_diagnostic, solve_saddle, ErrorReport, SolutionField};
use crate::spaces::{
    multiplier_spaces, ConstraintMap, Discretization, MultiplierMode, MultiplierSpaceHandle, VertexMode,
};
use crate::topology::{MultiPatchTopology, SideRef};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub degree: usize,
    pub levels: usize,
    pub vertex_mode: VertexMode,
    pub multiplier_mode: MultiplierMode,
    pub exact: ManufacturedSolution,
    /// Clamped sides; every boundary side when `None`.
    pub dirichlet: Option<Vec<SideRef>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            degree: 3,
            levels: 2,
            vertex_mode: VertexMode::C2,
            multiplier_mode: MultiplierMode::Merged,
            exact: ManufacturedSolution::CosCos,
            dirichlet: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub disc: Discretization,
    pub cmap: ConstraintMap,
    pub multipliers: Vec<MultiplierSpaceHandle>,
    pub system: SaddleSystem,
    pub solution: SolutionField,
    pub errors: ErrorReport,
    /// Relative multiplier discrepancy per interface.
    pub multiplier_discrepancy: Vec<f64>,
}

pub fn run(topology: &MultiPatchTopology, opts: &RunOptions) -> Result<RunResult> {
    let disc = Discretization::new(topology, opts.degree, opts.levels, opts.dirichlet.clone())?;
    let cmap = ConstraintMap::build(&disc, opts.vertex_mode)?;
    let multipliers = multiplier_spaces(&disc, opts.multiplier_mode)?;
    let system = assemble_system(&disc, &cmap, &multipliers, &opts.exact)?;
    let solution = solve_saddle(&system, &cmap)?;
    let errors = compute_errors(&disc, &solution.full, &opts.exact, cmap.reduced_dim)?;
    let multiplier_discrepancy = (0..multipliers.len())
        .map(|l| multiplier_diagnostic(&disc, &solution, &multipliers, &opts.exact, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunResult {
        disc,
        cmap,
        multipliers,
        system,
        solution,
        errors,
        multiplier_discrepancy,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(*v)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
