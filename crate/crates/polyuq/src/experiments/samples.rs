//! Sample-allocation tables and the complexity fit: exact formula outputs
//! `M`, `{M_l}` with the DOF-weighted costs they imply, regressed against
//! the theoretical complexity shape.

use polyuq_core::estimators::{
    mc_sample_count_with, mlmc_sample_counts_with, Target, DEFAULT_SAMPLE_CAP,
};
use polyuq_core::stats::{fit_line, LineFit};
use polyuq_core::vem::Projection;

use super::{build_hierarchy, ExperimentError};
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, OutputDir};

#[derive(Debug, Clone)]
pub struct AllocationRow {
    pub target: &'static str,
    pub p: usize,
    pub max_level: usize,
    pub level: usize,
    pub h: f64,
    pub samples: usize,
    pub dofs: usize,
}

#[derive(Debug, Clone)]
pub struct ComplexityRow {
    pub target: &'static str,
    pub p: usize,
    pub max_level: usize,
    pub dofs_finest: usize,
    pub cost_mlmc: u64,
    pub cost_mc: u64,
    /// The theoretical shape the multilevel cost is fitted against.
    pub model: f64,
}

#[derive(Debug, Clone)]
pub struct SamplesSummary {
    pub allocations: Vec<AllocationRow>,
    pub complexity: Vec<ComplexityRow>,
    /// Per order: log-log fit of the multilevel cost against the model.
    pub fits: Vec<(usize, LineFit)>,
}

pub fn run_samples_table(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<SamplesSummary, ExperimentError> {
    let hierarchy = build_hierarchy(config, 0)?;
    let h_all: Vec<f64> = (0..hierarchy.n_levels())
        .map(|l| hierarchy.mesh_size(l))
        .collect();

    let mut allocations = Vec::new();
    let mut complexity = Vec::new();
    let mut fits = Vec::new();
    for &p in &config.orders {
        let targets: &[(Target, &'static str)] = if p == 1 {
            &[
                (Target::Solution(Projection::Energy), "solution"),
                (Target::Qoi, "qoi"),
            ]
        } else {
            &[(Target::Solution(Projection::Energy), "solution")]
        };
        for &(target, target_name) in targets {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &max_level in &config.levels {
                let alloc = mlmc_sample_counts_with(
                    p,
                    &h_all[..max_level],
                    config.epsilon,
                    target,
                    config.sample_multiplier,
                    DEFAULT_SAMPLE_CAP,
                )?;
                let mut cost_mlmc = 0u64;
                for (idx, &m) in alloc.per_level.iter().enumerate() {
                    let dofs = hierarchy.dof_count(idx, p);
                    cost_mlmc += (m * dofs) as u64;
                    allocations.push(AllocationRow {
                        target: target_name,
                        p,
                        max_level,
                        level: idx + 1,
                        h: h_all[idx],
                        samples: m,
                        dofs,
                    });
                }
                let dofs_finest = hierarchy.dof_count(max_level - 1, p);
                let m_mc = mc_sample_count_with(
                    p,
                    h_all[max_level - 1],
                    target,
                    config.sample_multiplier,
                    DEFAULT_SAMPLE_CAP,
                )?;
                let model = match (target, p) {
                    (Target::Solution(_), 1) => {
                        dofs_finest as f64
                            * (max_level as f64).powf(3.0 + 2.0 * config.epsilon)
                    }
                    (Target::Solution(_), _) => {
                        (dofs_finest as f64).powi(p as i32)
                            * (p as f64).powi(2 * (1 - p as i32))
                    }
                    // the QoI allocation squares the rate, giving the
                    // `N^(2p) p^(2(1-2p))` shape for every order
                    (Target::Qoi, _) => {
                        (dofs_finest as f64).powi(2 * p as i32)
                            * (p as f64).powi(2 * (1 - 2 * p as i32))
                    }
                };
                complexity.push(ComplexityRow {
                    target: target_name,
                    p,
                    max_level,
                    dofs_finest,
                    cost_mlmc,
                    cost_mc: (m_mc * dofs_finest) as u64,
                    model,
                });
                if matches!(target, Target::Solution(_)) {
                    xs.push(model.ln());
                    ys.push((cost_mlmc as f64).ln());
                }
            }
            if matches!(target, Target::Solution(_)) && xs.len() >= 2 {
                fits.push((p, fit_line(&xs, &ys)));
            }
        }
    }

    let alloc_rows: Vec<Vec<String>> = allocations
        .iter()
        .map(|r| {
            vec![
                r.target.to_string(),
                r.p.to_string(),
                r.max_level.to_string(),
                r.level.to_string(),
                fmt_f64(r.h),
                r.samples.to_string(),
                r.dofs.to_string(),
            ]
        })
        .collect();
    out.write_table(
        "samples",
        &["target", "p", "L", "level", "h", "M", "N"],
        &alloc_rows,
    )?;
    let cx_rows: Vec<Vec<String>> = complexity
        .iter()
        .map(|r| {
            vec![
                r.target.to_string(),
                r.p.to_string(),
                r.max_level.to_string(),
                r.dofs_finest.to_string(),
                r.cost_mlmc.to_string(),
                r.cost_mc.to_string(),
                fmt_f64(r.model),
            ]
        })
        .collect();
    out.write_table(
        "complexity",
        &["target", "p", "L", "N_L", "cost_mlmc", "cost_mc", "model"],
        &cx_rows,
    )?;
    let fit_rows: Vec<Vec<String>> = fits
        .iter()
        .map(|(p, f)| {
            vec![
                p.to_string(),
                fmt_f64(f.slope),
                fmt_f64(f.r_squared),
            ]
        })
        .collect();
    out.write_table("complexity_fit", &["p", "slope", "r2"], &fit_rows)?;
    Ok(SamplesSummary {
        allocations,
        complexity,
        fits,
    })
}
