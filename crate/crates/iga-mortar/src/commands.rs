//! Drivers behind the `solve`, `converge` and `infsup` subcommands.

use std::path::Path;

use iga_mortar_core::assembly::ManufacturedSolution;
use iga_mortar_core::infsup::{degree_sweep, histogram, DegreeIndexing, HistogramBin, RandomMeshSpec, RandomStudy};
use iga_mortar_core::pipeline::{loglog_slope, run, RunOptions, RunResult};
use iga_mortar_core::solve::{sample_field, ErrorReport};
use iga_mortar_core::spaces::{MultiplierMode, VertexMode};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::geometry_file::{load_domain, Domain};
use crate::output::{self, Header, RateRow};

/// Environment variable capping the worker threads of parallel studies.
pub const THREADS_VAR: &str = "IGA_MORTAR_THREADS";

/// Last plotted degree of the published sweep.
pub const PUBLISHED_MAX_DEGREE: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub geometry: String,
    pub degree: usize,
    pub levels: usize,
    pub vertex_mode: VertexMode,
    pub multiplier_mode: MultiplierMode,
    pub exact: ManufacturedSolution,
    pub samples_per_element: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            geometry: "square2".into(),
            degree: 3,
            levels: 2,
            vertex_mode: VertexMode::C2,
            multiplier_mode: MultiplierMode::Merged,
            exact: ManufacturedSolution::CosCos,
            samples_per_element: 5,
        }
    }
}

impl SolveConfig {
    fn header(&self, command: &str) -> Header {
        Header::new(command)
            .with("geometry", &self.geometry)
            .with("degree", self.degree)
            .with("vertex-mode", self.vertex_mode.name())
            .with("multiplier", self.multiplier_mode.name())
            .with("exact", self.exact.name())
    }

    fn options(&self, domain: &Domain, levels: usize) -> RunOptions {
        RunOptions {
            degree: self.degree,
            levels,
            vertex_mode: self.vertex_mode,
            multiplier_mode: self.multiplier_mode,
            exact: self.exact,
            dirichlet: domain.dirichlet.clone(),
        }
    }
}

pub struct SolveReport {
    pub header: Header,
    pub result: RunResult,
}

impl SolveReport {
    pub fn csv(&self) -> String {
        output::convergence_csv(&self.header, &[self.result.errors])
    }
}

/// One pipeline run. With `out`, also writes `solution.csv`, `field.csv`
/// and one `field_patch<k>.vtk` per patch.
pub fn cmd_solve(cfg: &SolveConfig, out: Option<&Path>) -> Result<SolveReport> {
    let domain = load_domain(&cfg.geometry)?;
    let result = run(&domain.topology, &cfg.options(&domain, cfg.levels))?;
    let mut header = cfg
        .header("solve")
        .with("levels", cfg.levels)
        .with("samples", cfg.samples_per_element);
    let s = &result.solution;
    header.note(format!(
        "residual={} constraint_residual={} multiplier_rank={} augmented={}",
        output::num(s.residual),
        output::num(s.constraint_residual),
        s.multiplier_rank,
        s.augmented
    ));
    let report = SolveReport { header, result };
    if let Some(dir) = out {
        output::write_file(&dir.join("solution.csv"), &report.csv())?;
        let samples = sample_field(
            &report.result.disc,
            &report.result.solution.full,
            &cfg.exact,
            cfg.samples_per_element,
        )?;
        output::write_file(&dir.join("field.csv"), &output::field_csv(&report.header, &samples))?;
        for p in &samples {
            let path = dir.join(format!("field_patch{}.vtk", p.patch));
            output::write_file(&path, &output::field_vtk(&report.header, p))?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub solve: SolveConfig,
    pub first_level: usize,
    pub last_level: usize,
    pub reference_slopes: bool,
}

pub struct ConvergeReport {
    pub header: Header,
    pub rows: Vec<ErrorReport>,
    pub rates: Vec<RateRow>,
    /// Constraint residual of every run, in level order.
    pub constraint_residuals: Vec<f64>,
    /// Multiplier discrepancy per level and interface.
    pub multiplier_discrepancy: Vec<Vec<f64>>,
}

impl ConvergeReport {
    pub fn csv(&self) -> String {
        output::convergence_csv(&self.header, &self.rows)
    }

    pub fn rates_csv(&self) -> String {
        output::rates_csv(&self.header, &self.rates)
    }
}

/// Reference orders `p−1, p, p+1, p+1` for the broken H², H¹, L², L∞ errors.
pub fn reference_orders(degree: usize) -> [f64; 4] {
    let p = degree as f64;
    [p - 1.0, p, p + 1.0, p + 1.0]
}

type Measure = fn(&ErrorReport) -> f64;

/// Pairwise rates and the slope over the last three levels.
pub fn rate_rows(rows: &[ErrorReport], degree: usize, reference: bool) -> Vec<RateRow> {
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let norms: [(&str, Measure); 4] = [
        ("brokenH2", |r| r.broken_h2),
        ("H1", |r| r.h1),
        ("L2", |r| r.l2),
        ("Linf", |r| r.linf),
    ];
    let refs = reference_orders(degree);
    let tail = rows.len().saturating_sub(3);
    norms
        .iter()
        .zip(refs)
        .map(|(&(norm, f), order)| {
            let e: Vec<f64> = rows.iter().map(f).collect();
            let pairwise = e
                .windows(2)
                .zip(h.windows(2))
                .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
                .collect();
            RateRow {
                norm,
                pairwise,
                slope: loglog_slope(&h[tail..], &e[tail..]),
                reference: reference.then_some(order),
                flag: if degree == 2 && norm == "L2" {
                    "suboptimal-expected"
                } else {
                    ""
                },
            }
        })
        .collect()
}

/// Runs every level in `first_level..=last_level`. With `out`, writes
/// `convergence.csv` and `rates.csv`.
pub fn cmd_converge(cfg: &ConvergeConfig, out: Option<&Path>) -> Result<ConvergeReport> {
    if cfg.last_level < cfg.first_level + 2 {
        return Err(CliError::Config(format!(
            "a convergence study needs at least 3 levels, got {}..{}",
            cfg.first_level, cfg.last_level
        )));
    }
    let domain = load_domain(&cfg.solve.geometry)?;
    let mut rows = Vec::new();
    let mut constraint_residuals = Vec::new();
    let mut multiplier_discrepancy = Vec::new();
    for level in cfg.first_level..=cfg.last_level {
        let r = run(&domain.topology, &cfg.solve.options(&domain, level))?;
        rows.push(r.errors);
        constraint_residuals.push(r.solution.constraint_residual);
        multiplier_discrepancy.push(r.multiplier_discrepancy);
    }
    let header = cfg
        .solve
        .header("converge")
        .with("levels", format!("{}..{}", cfg.first_level, cfg.last_level))
        .with("reference-slopes", cfg.reference_slopes);
    let rates = rate_rows(&rows, cfg.solve.degree, cfg.reference_slopes);
    let report = ConvergeReport {
        header,
        rows,
        rates,
        constraint_residuals,
        multiplier_discrepancy,
    };
    if let Some(dir) = out {
        output::write_file(&dir.join("convergence.csv"), &report.csv())?;
        output::write_file(&dir.join("rates.csv"), &report.rates_csv())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfsupConfig {
    pub degrees: Vec<usize>,
    pub indexing: DegreeIndexing,
    pub random: bool,
    /// Plotted degree of the random study.
    pub degree: usize,
    pub mesh: RandomMeshSpec,
    pub bins: usize,
    pub range: (f64, f64),
    /// Worker threads; `None` reads the environment, `Some(1)` is serial.
    pub threads: Option<usize>,
}

impl Default for InfsupConfig {
    fn default() -> Self {
        InfsupConfig {
            degrees: (2..=PUBLISHED_MAX_DEGREE).collect(),
            indexing: DegreeIndexing::Primal,
            random: false,
            degree: 3,
            mesh: RandomMeshSpec::default(),
            bins: 22,
            range: (0.55, 0.66),
            threads: None,
        }
    }
}

pub enum InfsupReport {
    Sweep {
        header: Header,
        rows: Vec<(usize, f64)>,
    },
    Random {
        header: Header,
        study: RandomStudy,
        bins: Vec<HistogramBin>,
    },
}

impl InfsupReport {
    /// The sweep table, or the histogram of a random study.
    pub fn csv(&self) -> String {
        match self {
            InfsupReport::Sweep { header, rows } => output::sweep_csv(header, rows),
            InfsupReport::Random { header, bins, .. } => output::histogram_csv(header, bins),
        }
    }
}

/// Thread count from `IGA_MORTAR_THREADS`; 0 or unset lets rayon decide.
pub fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(|n| (n > 0).then_some(n))
            .map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a non-negative integer, got `{s}`"))),
    }
}

fn random_values(d: usize, spec: &RandomMeshSpec, threads: Option<usize>) -> Result<Vec<f64>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    // each trial owns its random stream; collecting in index order keeps
    // the output independent of scheduling
    let values = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| spec.trial(d, t))
            .collect::<iga_mortar_core::Result<Vec<f64>>>()
    })?;
    Ok(values)
}

/// Degree sweep on uniform meshes, or with `random` the perturbed-mesh
/// study. With `out`, writes `sweep.csv` or `histogram.csv` plus
/// `trials.csv`.
pub fn cmd_infsup(cfg: &InfsupConfig, out: Option<&Path>) -> Result<InfsupReport> {
    let report = if cfg.random {
        let d = cfg.indexing.space_degree(cfg.degree)?;
        if cfg.mesh.trials == 0 {
            return Err(CliError::Config("at least one trial is required".into()));
        }
        if cfg.range.0.partial_cmp(&cfg.range.1) != Some(std::cmp::Ordering::Less) || cfg.bins == 0 {
            return Err(CliError::Config("histogram needs lo < hi and at least one bin".into()));
        }
        let threads = match cfg.threads {
            Some(n) => Some(n),
            None => env_threads()?,
        };
        let study = RandomStudy::from_values(random_values(d, &cfg.mesh, threads)?);
        let bins = histogram(&study.values, cfg.range.0, cfg.range.1, cfg.bins);
        let mut header = Header::new("infsup")
            .with("random", true)
            .with("degree", cfg.degree)
            .with("indexing", cfg.indexing.name())
            .with("elements", cfg.mesh.elements)
            .with("amplitude", cfg.mesh.amplitude)
            .with("trials", cfg.mesh.trials)
            .with("seed", cfg.mesh.seed)
            .with("rng", "chacha8");
        header.note(format!(
            "min={} max={} mean={}",
            output::num(study.min),
            output::num(study.max),
            output::num(study.mean)
        ));
        let counted: usize = bins.iter().map(|b| b.count).sum();
        if counted < study.values.len() {
            header.note(format!(
                "{} values outside the histogram range",
                study.values.len() - counted
            ));
        }
        if let Some(dir) = out {
            output::write_file(&dir.join("trials.csv"), &output::trials_csv(&header, &study.values))?;
        }
        InfsupReport::Random { header, study, bins }
    } else {
        if cfg.degrees.is_empty() {
            return Err(CliError::Config("empty degree range".into()));
        }
        let rows = degree_sweep(&cfg.degrees, cfg.indexing)?;
        let list: Vec<String> = cfg.degrees.iter().map(|d| d.to_string()).collect();
        let mut header = Header::new("infsup")
            .with("degrees", list.join(";"))
            .with("indexing", cfg.indexing.name());
        for &(p, _) in rows.iter().filter(|(p, _)| *p > PUBLISHED_MAX_DEGREE) {
            header.note(format!(
                "degree {p} lies beyond the published range 2..{PUBLISHED_MAX_DEGREE}"
            ));
        }
        InfsupReport::Sweep { header, rows }
    };
    if let Some(dir) = out {
        let name = match report {
            InfsupReport::Sweep { .. } => "sweep.csv",
            InfsupReport::Random { .. } => "histogram.csv",
        };
        output::write_file(&dir.join(name), &report.csv())?;
    }
    Ok(report)
}
