//! Cost-accuracy comparison: both estimators with formula-driven counts,
//! errors against the shared multilevel reference, and the
//! matched-complexity read-out — the largest cost reached by both measured
//! curves, with the longer curve log-log interpolated there.

use polyuq_core::estimators::Target;
use polyuq_core::stats::loglog_interpolate;
use polyuq_core::stochastic::SampleStream;
use polyuq_core::vem::Projection;

use super::estimator_runs::{level_sizes, mc_series, mlmc_reference, mlmc_series};
use super::{build_hierarchy, model_or_benchmark, ExperimentError};
use crate::config::ExperimentConfig;
use crate::experiments::estimator_runs::ConvergenceRow;
use crate::output::{fmt_f64, OutputDir};
use crate::threads::ThreadPool;

/// The matched-complexity comparison: both curves read at the largest cost
/// they share.
#[derive(Debug, Clone)]
pub struct MatchedPoint {
    pub p: usize,
    pub cost: f64,
    pub error_mlmc: f64,
    pub error_mc: f64,
    /// `error_mc / error_mlmc` at the matched cost.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct CostAccuracySummary {
    pub rows: Vec<ConvergenceRow>,
    pub matched: Vec<MatchedPoint>,
}

/// Reads a measured `(cost, error)` curve at an interior cost by log-log
/// interpolation.
fn curve_at(rows: &[ConvergenceRow], cost: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.cost_level_dofs as f64, r.error))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let costs: Vec<f64> = pts.iter().map(|r| r.0).collect();
    let errs: Vec<f64> = pts.iter().map(|r| r.1).collect();
    loglog_interpolate(&costs, &errs, cost)
}

pub fn run_cost_accuracy(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<CostAccuracySummary, ExperimentError> {
    let model = model_or_benchmark(config)?;
    let hierarchy = build_hierarchy(config, 1)?;
    let stream = SampleStream::new(config.seed, 0x636f7374); // "cost"
    let pool = ThreadPool::new(config.threads);
    let mc_levels = if config.mc_levels.is_empty() {
        config.levels.clone()
    } else {
        config.mc_levels.clone()
    };
    let l_ref = config
        .levels
        .iter()
        .chain(mc_levels.iter())
        .copied()
        .max()
        .unwrap()
        + 1;
    let h_all = level_sizes(&hierarchy, l_ref, config);

    let mut rows = Vec::new();
    let mut matched = Vec::new();
    for &p in &config.orders {
        let target = Target::Solution(Projection::Energy);
        let reference = mlmc_reference(
            &model, &hierarchy, p, l_ref, &h_all, target, config, &stream, &pool,
        )?;
        let ml = mlmc_series(
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
        let mc = mc_series(
            &model, &hierarchy, p, &mc_levels, &h_all, &reference, l_ref, config, &stream, &pool,
        )?;

        // the largest complexity both measured curves reach
        let ml_max = ml
            .rows
            .iter()
            .map(|r| r.cost_level_dofs)
            .max()
            .unwrap() as f64;
        let mc_max = mc
            .rows
            .iter()
            .map(|r| r.cost_level_dofs)
            .max()
            .unwrap() as f64;
        let cost_star = ml_max.min(mc_max);
        let error_mlmc = curve_at(&ml.rows, cost_star);
        let error_mc = curve_at(&mc.rows, cost_star);
        matched.push(MatchedPoint {
            p,
            cost: cost_star,
            error_mlmc,
            error_mc,
            ratio: error_mc / error_mlmc,
        });
        rows.extend(ml.rows);
        rows.extend(mc.rows);
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.p.to_string(),
                r.max_level.to_string(),
                r.cost_level_dofs.to_string(),
                r.cost_solve_dofs.to_string(),
                fmt_f64(r.error),
            ]
        })
        .collect();
    out.write_table(
        "cost_accuracy",
        &["method", "p", "L", "cost", "cost_both_solves", "error"],
        &table,
    )?;
    let matched_rows: Vec<Vec<String>> = matched
        .iter()
        .map(|m| {
            vec![
                m.p.to_string(),
                fmt_f64(m.cost),
                fmt_f64(m.error_mlmc),
                fmt_f64(m.error_mc),
                fmt_f64(m.ratio),
            ]
        })
        .collect();
    out.write_table(
        "cost_accuracy_matched",
        &["p", "cost", "error_mlmc", "error_mc", "ratio"],
        &matched_rows,
    )?;
    Ok(CostAccuracySummary { rows, matched })
}
