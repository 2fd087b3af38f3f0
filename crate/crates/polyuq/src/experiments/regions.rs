//! Validation on the strip domain with a piecewise-constant region
//! coefficient: independent Monte Carlo and multilevel estimates of the
//! expected solution field must agree pointwise and in the domain-average
//! quantity of interest.

use polyuq_core::estimators::{
    mc_estimate, mc_sample_count_with, mlmc_estimate, mlmc_sample_counts_with, StochasticProblem,
    Target, DEFAULT_SAMPLE_CAP,
};
use polyuq_core::stochastic::{RandomCoefficient, SampleStream};
use polyuq_core::vem::{qoi_field, Projection};
use polyuq_core::Point;

use super::{build_hierarchy, bundled_regions, regime_ranges, ExperimentError};
use crate::config::{ExperimentConfig, ModelConfig};
use crate::output::{fmt_f64, OutputDir};
use crate::threads::ThreadPool;

#[derive(Debug, Clone)]
pub struct RegionsSummary {
    pub regime: String,
    /// `sup |MC - MLMC| / max |MLMC|` over element centroids of the finest
    /// mesh.
    pub sup_relative_difference: f64,
    pub qoi_mc: f64,
    pub qoi_mlmc: f64,
    pub qoi_difference: f64,
    pub mc_samples: usize,
    pub mlmc_samples: Vec<usize>,
}

fn ones(_: Point) -> f64 {
    1.0
}

pub fn run_validate_regions(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<Vec<RegionsSummary>, ExperimentError> {
    let mut runs: Vec<(String, RandomCoefficient)> = Vec::new();
    if let Some(ModelConfig::PiecewiseRegions { regions }) = &config.model {
        runs.push((
            "custom".to_string(),
            RandomCoefficient::PiecewiseRegions {
                regions: regions.clone(),
            },
        ));
    } else {
        let regime = config.regime.as_deref().unwrap_or("both");
        let names: Vec<&str> = match regime {
            "both" => vec!["uniform", "hetero"],
            r => vec![r],
        };
        for name in names {
            let ranges = regime_ranges(name).ok_or_else(|| {
                crate::config::ConfigError::Invalid(format!("unknown regime `{name}`"))
            })?;
            runs.push((
                name.to_string(),
                RandomCoefficient::PiecewiseRegions {
                    regions: bundled_regions(&ranges),
                },
            ));
        }
    }

    let hierarchy = build_hierarchy(config, 0)?;
    let levels = config.levels.iter().copied().max().unwrap();
    let h_all: Vec<f64> = (0..levels).map(|l| hierarchy.mesh_size(l)).collect();
    let pool = ThreadPool::new(config.threads);
    let domain_area = config.domain.width() * config.domain.height();
    let average = move |_: Point| 1.0;

    let mut summaries = Vec::new();
    let mut field_rows: Vec<Vec<String>> = Vec::new();
    for (regime, model) in runs {
        model
            .validate()
            .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?;
        let problem = StochasticProblem {
            coefficient: &model,
            source: &ones,
            qoi_weight: &ones,
        };
        let stream = SampleStream::new(config.seed, 0x72656769); // "regi"
        let target = Target::Solution(Projection::Energy);

        let alloc = mlmc_sample_counts_with(
            1,
            &h_all,
            config.epsilon,
            target,
            config.sample_multiplier,
            DEFAULT_SAMPLE_CAP,
        )?;
        let mlmc = mlmc_estimate(
            &problem,
            &hierarchy,
            1,
            &alloc.per_level,
            &stream.derive(1),
            target,
            config.solver_tol,
            &pool,
        )?;
        let m_mc = mc_sample_count_with(
            1,
            h_all[levels - 1],
            target,
            config.sample_multiplier,
            DEFAULT_SAMPLE_CAP,
        )?;
        let mc = mc_estimate(
            &problem,
            hierarchy.mesh(levels - 1).clone(),
            1,
            m_mc,
            &stream.derive(2),
            target,
            config.solver_tol,
            &pool,
        )?;

        // pointwise comparison at element centroids of the finest mesh
        let mesh = hierarchy.mesh(levels - 1);
        let mut max_abs_mlmc = 0.0f64;
        let mut values = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let c = mesh.element_centroid(e);
            let v_mlmc = mlmc.field.eval_in_element(e, c);
            let v_mc = mc.field.eval_in_element(e, c);
            max_abs_mlmc = max_abs_mlmc.max(v_mlmc.abs());
            values.push((c, v_mc, v_mlmc));
        }
        let mut sup_rel = 0.0f64;
        for &(c, v_mc, v_mlmc) in &values {
            let rel = (v_mc - v_mlmc).abs() / max_abs_mlmc;
            sup_rel = sup_rel.max(rel);
            field_rows.push(vec![
                regime.clone(),
                fmt_f64(c[0]),
                fmt_f64(c[1]),
                fmt_f64(v_mc),
                fmt_f64(v_mlmc),
                fmt_f64(rel),
            ]);
        }

        // persist both payloads as field snapshots
        crate::fieldio::save_field(
            &mlmc.field,
            &out.path().join(format!("field_mlmc_{regime}.csv")),
        )
        .map_err(|e| std::io::Error::other(e.to_string()))?;
        crate::fieldio::save_field(
            &mc.field,
            &out.path().join(format!("field_mc_{regime}.csv")),
        )
        .map_err(|e| std::io::Error::other(e.to_string()))?;

        // domain-average quantity of interest of both field estimates
        let qoi_mc = qoi_field(&mc.field, &average) / domain_area;
        let qoi_mlmc = qoi_field(&mlmc.field, &average) / domain_area;
        summaries.push(RegionsSummary {
            regime,
            sup_relative_difference: sup_rel,
            qoi_mc,
            qoi_mlmc,
            qoi_difference: (qoi_mc - qoi_mlmc).abs(),
            mc_samples: m_mc,
            mlmc_samples: alloc.per_level.clone(),
        });
    }

    out.write_table(
        "regions_field",
        &["regime", "x", "y", "mc", "mlmc", "rel_diff"],
        &field_rows,
    )?;
    let summary_rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.regime.clone(),
                fmt_f64(s.sup_relative_difference),
                fmt_f64(s.qoi_mc),
                fmt_f64(s.qoi_mlmc),
                fmt_f64(s.qoi_difference),
                s.mc_samples.to_string(),
                format!(
                    "{}",
                    s.mlmc_samples
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
            ]
        })
        .collect();
    out.write_table(
        "regions_summary",
        &["regime", "sup_rel_diff", "qoi_mc", "qoi_mlmc", "qoi_diff", "M_mc", "M_mlmc"],
        &summary_rows,
    )?;
    Ok(summaries)
}
