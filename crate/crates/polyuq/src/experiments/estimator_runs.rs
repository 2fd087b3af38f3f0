//! Monte Carlo and multilevel Monte Carlo convergence studies on the
//! stochastic benchmark. Errors are measured against the multilevel
//! estimator on the next finer level with an independent seed; rates are
//! fitted in the mesh size and in the level.

use polyuq_core::estimators::{
    mc_estimate, mc_sample_count_with, mlmc_estimate, mlmc_sample_counts_with, EstimatorResult,
    StochasticProblem, Target, DEFAULT_SAMPLE_CAP,
};
use polyuq_core::fields::{restrict_to_fine, PiecewisePolyField};
use polyuq_core::geometry::MeshHierarchy;
use polyuq_core::stats::{fit_line, fit_loglog, LineFit};
use polyuq_core::stochastic::{RandomCoefficient, SampleStream};
use polyuq_core::vem::Projection;
use polyuq_core::Point;

use super::{
    build_hierarchy, model_or_benchmark, run_tag, ExperimentError, PURPOSE_ESTIMATE,
    PURPOSE_MC_ESTIMATE, PURPOSE_REFERENCE,
};
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, OutputDir};
use crate::threads::ThreadPool;

/// One estimator run of a convergence series.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub method: &'static str,
    pub target: &'static str,
    pub p: usize,
    /// 1-based maximum level of the run.
    pub max_level: usize,
    pub h: f64,
    pub total_samples: usize,
    pub cost_level_dofs: u64,
    pub cost_solve_dofs: u64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct SeriesFit {
    pub p: usize,
    pub target: &'static str,
    /// log error against log h fit.
    pub in_h: LineFit,
    /// ln error against the level (semilog decay rate; negative slope).
    pub in_level: LineFit,
}

#[derive(Debug, Clone)]
pub struct EstimatorConvergenceSummary {
    pub method: &'static str,
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<SeriesFit>,
    /// Per-level records, one row per (run, level).
    pub level_rows: Vec<Vec<String>>,
}

fn ones(_: Point) -> f64 {
    1.0
}

pub(super) fn problem(model: &RandomCoefficient) -> StochasticProblem<'_> {
    StochasticProblem {
        coefficient: model,
        source: &ones,
        qoi_weight: &ones,
    }
}

const LEVEL_HEADER: [&str; 10] = [
    "method", "p", "L", "level", "M", "N", "cost", "error_h1", "error_qoi", "var_level",
];

fn push_level_rows(
    rows: &mut Vec<Vec<String>>,
    method: &str,
    p: usize,
    max_level: usize,
    est: &EstimatorResult,
    error_h1: Option<f64>,
    error_qoi: Option<f64>,
) {
    for ls in &est.levels {
        rows.push(vec![
            method.to_string(),
            p.to_string(),
            max_level.to_string(),
            ls.level.to_string(),
            ls.samples.to_string(),
            ls.dofs.to_string(),
            est.cost_level_dofs.to_string(),
            error_h1.map(fmt_f64).unwrap_or_default(),
            error_qoi.map(fmt_f64).unwrap_or_default(),
            fmt_f64(ls.variance_h1),
        ]);
    }
}

/// Mesh sizes per 1-based level, in the configured convention.
pub(super) fn level_sizes(
    hierarchy: &MeshHierarchy,
    n: usize,
    config: &ExperimentConfig,
) -> Vec<f64> {
    let factor = if config.h_half_diagonal { 0.5 } else { 1.0 };
    (0..n).map(|l| factor * hierarchy.mesh_size(l)).collect()
}

/// The reference estimator: multilevel, formula counts, on level `l_ref`,
/// with a stream independent of every estimate.
#[allow(clippy::too_many_arguments)]
pub(super) fn mlmc_reference(
    model: &RandomCoefficient,
    hierarchy: &MeshHierarchy,
    p: usize,
    l_ref: usize,
    h_all: &[f64],
    target: Target,
    config: &ExperimentConfig,
    stream: &SampleStream,
    pool: &ThreadPool,
) -> Result<EstimatorResult, ExperimentError> {
    let alloc = mlmc_sample_counts_with(
        p,
        &h_all[..l_ref],
        config.epsilon,
        target,
        config.sample_multiplier,
        DEFAULT_SAMPLE_CAP,
    )?;
    let ref_stream = stream.derive(run_tag(p, l_ref, PURPOSE_REFERENCE));
    Ok(mlmc_estimate(
        &problem(model),
        hierarchy,
        p,
        &alloc.per_level,
        &ref_stream,
        target,
        config.solver_tol,
        pool,
    )?)
}

pub struct Series {
    pub rows: Vec<ConvergenceRow>,
    pub fit: SeriesFit,
    pub level_rows: Vec<Vec<String>>,
}

/// Field-error of an estimate on `level` against the reference field on
/// `l_ref`, in the broken H1 seminorm after restriction.
fn field_error(
    est: &PiecewisePolyField,
    level: usize,
    reference: &PiecewisePolyField,
    l_ref: usize,
    hierarchy: &MeshHierarchy,
) -> Result<f64, ExperimentError> {
    let lifted = restrict_to_fine(est, hierarchy, level - 1, l_ref - 1)
        .map_err(polyuq_core::estimators::EstimatorError::Field)?;
    let mut diff = lifted;
    diff.axpy(-1.0, reference)
        .map_err(polyuq_core::estimators::EstimatorError::Field)?;
    Ok(diff.broken_h1_seminorm())
}

/// Runs the MLMC series for one order and target over `levels`, measured
/// against `reference` on level `l_ref`.
#[allow(clippy::too_many_arguments)]
pub(super) fn mlmc_series(
    model: &RandomCoefficient,
    hierarchy: &MeshHierarchy,
    p: usize,
    levels: &[usize],
    h_all: &[f64],
    target: Target,
    reference: &EstimatorResult,
    l_ref: usize,
    config: &ExperimentConfig,
    stream: &SampleStream,
    pool: &ThreadPool,
) -> Result<Series, ExperimentError> {
    let prob = problem(model);
    let target_name = match target {
        Target::Solution(_) => "solution",
        Target::Qoi => "qoi",
    };
    let mut rows = Vec::new();
    let mut level_rows = Vec::new();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut ls = Vec::new();
    for &level in levels {
        let alloc = mlmc_sample_counts_with(
            p,
            &h_all[..level],
            config.epsilon,
            target,
            config.sample_multiplier,
            DEFAULT_SAMPLE_CAP,
        )?;
        let est_stream = stream.derive(run_tag(p, level, PURPOSE_ESTIMATE));
        let est = mlmc_estimate(
            &prob,
            hierarchy,
            p,
            &alloc.per_level,
            &est_stream,
            target,
            config.solver_tol,
            pool,
        )?;
        let error = match target {
            Target::Solution(_) => {
                field_error(&est.field, level, &reference.field, l_ref, hierarchy)?
            }
            Target::Qoi => (est.qoi.unwrap() - reference.qoi.unwrap()).abs(),
        };
        push_level_rows(
            &mut level_rows,
            "mlmc",
            p,
            level,
            &est,
            matches!(target, Target::Solution(_)).then_some(error),
            matches!(target, Target::Qoi).then_some(error),
        );
        rows.push(ConvergenceRow {
            method: "mlmc",
            target: target_name,
            p,
            max_level: level,
            h: h_all[level - 1],
            total_samples: alloc.per_level.iter().sum(),
            cost_level_dofs: est.cost_level_dofs,
            cost_solve_dofs: est.cost_solve_dofs,
            error,
        });
        hs.push(h_all[level - 1]);
        errs.push(error);
        ls.push(level as f64);
    }
    let in_h = fit_loglog(&hs, &errs);
    let ln_errs: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let in_level = fit_line(&ls, &ln_errs);
    Ok(Series {
        rows,
        fit: SeriesFit {
            p,
            target: target_name,
            in_h,
            in_level,
        },
        level_rows,
    })
}

/// Runs the single-level series over `levels` against the multilevel
/// reference on `l_ref` (the solution target).
#[allow(clippy::too_many_arguments)]
pub(super) fn mc_series(
    model: &RandomCoefficient,
    hierarchy: &MeshHierarchy,
    p: usize,
    levels: &[usize],
    h_all: &[f64],
    reference: &EstimatorResult,
    l_ref: usize,
    config: &ExperimentConfig,
    stream: &SampleStream,
    pool: &ThreadPool,
) -> Result<Series, ExperimentError> {
    let prob = problem(model);
    let target = Target::Solution(Projection::Energy);
    let mut rows = Vec::new();
    let mut level_rows = Vec::new();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut ls = Vec::new();
    for &level in levels {
        let m = mc_sample_count_with(
            p,
            h_all[level - 1],
            target,
            config.sample_multiplier,
            DEFAULT_SAMPLE_CAP,
        )?;
        let est_stream = stream.derive(run_tag(p, level, PURPOSE_MC_ESTIMATE));
        let est = mc_estimate(
            &prob,
            hierarchy.mesh(level - 1).clone(),
            p,
            m,
            &est_stream,
            target,
            config.solver_tol,
            pool,
        )?;
        let error = field_error(&est.field, level, &reference.field, l_ref, hierarchy)?;
        push_level_rows(&mut level_rows, "mc", p, level, &est, Some(error), None);
        rows.push(ConvergenceRow {
            method: "mc",
            target: "solution",
            p,
            max_level: level,
            h: h_all[level - 1],
            total_samples: m,
            cost_level_dofs: est.cost_level_dofs,
            cost_solve_dofs: est.cost_solve_dofs,
            error,
        });
        hs.push(h_all[level - 1]);
        errs.push(error);
        ls.push(level as f64);
    }
    let in_h = fit_loglog(&hs, &errs);
    let ln_errs: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let in_level = fit_line(&ls, &ln_errs);
    Ok(Series {
        rows,
        fit: SeriesFit {
            p,
            target: "solution",
            in_h,
            in_level,
        },
        level_rows,
    })
}

fn write_summary(
    out: &OutputDir,
    name: &str,
    summary: &EstimatorConvergenceSummary,
) -> Result<(), ExperimentError> {
    let rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.target.to_string(),
                r.p.to_string(),
                r.max_level.to_string(),
                fmt_f64(r.h),
                r.total_samples.to_string(),
                r.cost_level_dofs.to_string(),
                r.cost_solve_dofs.to_string(),
                fmt_f64(r.error),
            ]
        })
        .collect();
    out.write_table(
        name,
        &["method", "target", "p", "L", "h", "samples", "cost", "cost_both_solves", "error"],
        &rows,
    )?;
    out.write_table(&format!("{name}_levels"), &LEVEL_HEADER, &summary.level_rows)?;
    let fit_rows: Vec<Vec<String>> = summary
        .fits
        .iter()
        .map(|f| {
            vec![
                f.p.to_string(),
                f.target.to_string(),
                fmt_f64(f.in_h.slope),
                fmt_f64(f.in_h.r_squared),
                fmt_f64(f.in_level.slope),
            ]
        })
        .collect();
    out.write_table(
        &format!("{name}_slopes"),
        &["p", "target", "slope_h", "r2_h", "semilog_slope"],
        &fit_rows,
    )?;
    Ok(())
}

/// The multilevel convergence study: solution errors for every configured
/// order, QoI errors where the quartic allocation stays affordable (order
/// one).
pub fn run_mlmc_convergence(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<EstimatorConvergenceSummary, ExperimentError> {
    let model = model_or_benchmark(config)?;
    let hierarchy = build_hierarchy(config, 1)?;
    let stream = SampleStream::new(config.seed, 0x6d6c6d63); // "mlmc"
    let pool = ThreadPool::new(config.threads);
    let l_ref = config.levels.iter().copied().max().unwrap() + 1;
    let h_all = level_sizes(&hierarchy, l_ref, config);

    let mut summary = EstimatorConvergenceSummary {
        method: "mlmc",
        rows: Vec::new(),
        fits: Vec::new(),
        level_rows: Vec::new(),
    };
    for &p in &config.orders {
        let target = Target::Solution(Projection::Energy);
        let reference = mlmc_reference(
            &model, &hierarchy, p, l_ref, &h_all, target, config, &stream, &pool,
        )?;
        let series = mlmc_series(
            &model,
            &hierarchy,
            p,
            &config.levels,
            &h_all,
            target,
            &reference,
            l_ref,
            config,
            &stream,
            &pool,
        )?;
        summary.rows.extend(series.rows);
        summary.fits.push(series.fit);
        summary.level_rows.extend(series.level_rows);
        if p == 1 {
            let reference = mlmc_reference(
                &model,
                &hierarchy,
                p,
                l_ref,
                &h_all,
                Target::Qoi,
                config,
                &stream,
                &pool,
            )?;
            let series = mlmc_series(
                &model,
                &hierarchy,
                p,
                &config.levels,
                &h_all,
                Target::Qoi,
                &reference,
                l_ref,
                config,
                &stream,
                &pool,
            )?;
            summary.rows.extend(series.rows);
            summary.fits.push(series.fit);
            summary.level_rows.extend(series.level_rows);
        }
    }
    write_summary(out, "mlmc_convergence", &summary)?;
    Ok(summary)
}

/// The single-level convergence study (solution target only), against the
/// multilevel reference.
pub fn run_mc_convergence(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<EstimatorConvergenceSummary, ExperimentError> {
    let model = model_or_benchmark(config)?;
    let hierarchy = build_hierarchy(config, 1)?;
    let stream = SampleStream::new(config.seed, 0x6d632d76); // "mc-v"
    let pool = ThreadPool::new(config.threads);
    let l_ref = config.levels.iter().copied().max().unwrap() + 1;
    let h_all = level_sizes(&hierarchy, l_ref, config);

    let mut summary = EstimatorConvergenceSummary {
        method: "mc",
        rows: Vec::new(),
        fits: Vec::new(),
        level_rows: Vec::new(),
    };
    for &p in &config.orders {
        let reference = mlmc_reference(
            &model,
            &hierarchy,
            p,
            l_ref,
            &h_all,
            Target::Solution(Projection::Energy),
            config,
            &stream,
            &pool,
        )?;
        let series = mc_series(
            &model,
            &hierarchy,
            p,
            &config.levels,
            &h_all,
            &reference,
            l_ref,
            config,
            &stream,
            &pool,
        )?;
        summary.rows.extend(series.rows);
        summary.fits.push(series.fit);
        summary.level_rows.extend(series.level_rows);
    }
    write_summary(out, "mc_convergence", &summary)?;
    Ok(summary)
}
