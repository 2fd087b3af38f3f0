//! Batch experiment drivers: deterministic QoI convergence, Monte Carlo and
//! multilevel Monte Carlo convergence, sample tables with complexity fits,
//! cost-accuracy comparison and the piecewise-region validation.

use std::fmt;
use std::path::Path;

use polyuq_core::estimators::EstimatorError;
use polyuq_core::geometry::{GeometryError, MeshHierarchy};
use polyuq_core::stochastic::{CoefficientRegion, RandomCoefficient};
use polyuq_core::vem::VemError;
use polyuq_core::Point;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::OutputDir;

mod cost_accuracy;
mod estimator_runs;
mod qoi_convergence;
mod regions;
mod samples;

pub use cost_accuracy::{run_cost_accuracy, CostAccuracySummary, MatchedPoint};
pub use estimator_runs::{
    run_mc_convergence, run_mlmc_convergence, ConvergenceRow, EstimatorConvergenceSummary,
};
pub use qoi_convergence::{run_qoi_convergence, OrderFit, QoiConvergenceSummary};
pub use regions::{run_validate_regions, RegionsSummary};
pub use samples::{run_samples_table, SamplesSummary};

#[derive(Debug)]
pub enum ExperimentError {
    Config(crate::config::ConfigError),
    Geometry(GeometryError),
    Vem(VemError),
    Estimator(EstimatorError),
    MeshIo(crate::meshio::MeshIoError),
    Io(std::io::Error),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Geometry(e) => write!(f, "geometry: {e}"),
            Self::Vem(e) => write!(f, "solver: {e}"),
            Self::Estimator(e) => write!(f, "estimator: {e}"),
            Self::MeshIo(e) => write!(f, "mesh: {e}"),
            Self::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<crate::config::ConfigError> for ExperimentError {
    fn from(e: crate::config::ConfigError) -> Self {
        Self::Config(e)
    }
}
impl From<GeometryError> for ExperimentError {
    fn from(e: GeometryError) -> Self {
        Self::Geometry(e)
    }
}
impl From<VemError> for ExperimentError {
    fn from(e: VemError) -> Self {
        Self::Vem(e)
    }
}
impl From<EstimatorError> for ExperimentError {
    fn from(e: EstimatorError) -> Self {
        Self::Estimator(e)
    }
}
impl From<crate::meshio::MeshIoError> for ExperimentError {
    fn from(e: crate::meshio::MeshIoError) -> Self {
        Self::MeshIo(e)
    }
}
impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Whether a failure maps to the configuration exit code rather than the
/// numerical one.
pub fn is_config_failure(e: &ExperimentError) -> bool {
    matches!(e, ExperimentError::Config(_) | ExperimentError::Io(_))
}

/// Top-level summary returned by [`run`].
#[derive(Debug)]
pub enum RunSummary {
    Qoi(QoiConvergenceSummary),
    Mc(EstimatorConvergenceSummary),
    Mlmc(EstimatorConvergenceSummary),
    Samples(SamplesSummary),
    CostAccuracy(CostAccuracySummary),
    Regions(Vec<RegionsSummary>),
}

/// Runs the configured experiment, writing its tables under `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary, ExperimentError> {
    let dir = OutputDir::create(out)?;
    dir.write_manifest(
        config.experiment.name(),
        config.seed,
        config.hash(),
        config.threads,
        &[],
    )?;
    match config.experiment {
        Experiment::QoiConvergence => Ok(RunSummary::Qoi(run_qoi_convergence(config, &dir)?)),
        Experiment::McConvergence => Ok(RunSummary::Mc(run_mc_convergence(config, &dir)?)),
        Experiment::MlmcConvergence => Ok(RunSummary::Mlmc(run_mlmc_convergence(config, &dir)?)),
        Experiment::SamplesTable => Ok(RunSummary::Samples(run_samples_table(config, &dir)?)),
        Experiment::CostAccuracy => Ok(RunSummary::CostAccuracy(run_cost_accuracy(config, &dir)?)),
        Experiment::ValidateRegions => {
            Ok(RunSummary::Regions(run_validate_regions(config, &dir)?))
        }
    }
}

/// The oscillatory verification problem on the unit square: the exact
/// solution, its gradient, and the matching source for unit diffusion.
pub mod oscillatory {
    use polyuq_core::Point;
    use std::f64::consts::PI;

    pub fn exact(x: Point) -> f64 {
        (4.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin()
    }

    pub fn gradient(x: Point) -> [f64; 2] {
        let c = 4.0 * PI;
        [
            c * (c * x[0]).cos() * (c * x[1]).sin(),
            c * (c * x[0]).sin() * (c * x[1]).cos(),
        ]
    }

    pub fn source(x: Point) -> f64 {
        32.0 * PI * PI * exact(x)
    }

    /// `Q(u_ex)` for the unit weight: both sine factors integrate to zero
    /// over a whole number of periods.
    pub const QOI_EXACT: f64 = 0.0;
}

/// Builds the nested Cartesian hierarchy used by the estimator runs, with
/// `extra` levels on top of the requested maximum (for references).
pub fn build_hierarchy(
    config: &ExperimentConfig,
    extra: usize,
) -> Result<MeshHierarchy, ExperimentError> {
    let levels = config.levels.iter().copied().max().unwrap_or(1) + extra;
    Ok(MeshHierarchy::cartesian(
        levels,
        config.mesh_n0,
        config.domain,
    )?)
}

/// Stream tags for derived substreams, spreading runs and references apart.
pub fn run_tag(p: usize, level: usize, purpose: u64) -> u64 {
    (p as u64) << 32 | (level as u64) << 16 | purpose
}

pub const PURPOSE_ESTIMATE: u64 = 1;
pub const PURPOSE_REFERENCE: u64 = 2;
pub const PURPOSE_MC_ESTIMATE: u64 = 3;
pub const PURPOSE_MC_REFERENCE: u64 = 4;

/// The bundled seven-region geometry for the validation test on the
/// `(0, 4) x (0, 1)` strip: strata-like bands with lateral splits, all
/// edges on the quarter-unit lattice so every Cartesian level conforms.
pub fn bundled_regions(ranges: &[(f64, f64); 7]) -> Vec<CoefficientRegion> {
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| -> Vec<Point> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    };
    let polys = [
        rect(0.0, 0.0, 4.0, 0.25),
        rect(0.0, 0.25, 2.0, 0.5),
        rect(2.0, 0.25, 4.0, 0.5),
        rect(0.0, 0.5, 1.25, 0.75),
        rect(1.25, 0.5, 3.0, 0.75),
        rect(3.0, 0.5, 4.0, 0.75),
        rect(0.0, 0.75, 4.0, 1.0),
    ];
    polys
        .into_iter()
        .zip(ranges.iter())
        .map(|(polygon, &(lo, hi))| CoefficientRegion { polygon, lo, hi })
        .collect()
}

/// Region ranges of the two validation regimes: comparable diffusivity
/// everywhere, and a high-diffusivity seventh layer.
pub fn regime_ranges(regime: &str) -> Option<[(f64, f64); 7]> {
    match regime {
        "uniform" => Some([(1.0, 10.0); 7]),
        "hetero" => {
            let mut r = [(1.0, 2.0); 7];
            r[6] = (1.0, 100.0);
            Some(r)
        }
        _ => None,
    }
}

/// The benchmark random-coefficient model used by the stochastic
/// convergence experiments when the config does not override it.
pub fn model_or_benchmark(config: &ExperimentConfig) -> Result<RandomCoefficient, ExperimentError> {
    if config.model.is_some() {
        Ok(config.coefficient()?)
    } else {
        let model = RandomCoefficient::smooth_benchmark();
        model
            .validate()
            .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?;
        Ok(model)
    }
}
