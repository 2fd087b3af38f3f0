//! Deterministic convergence study: solve the oscillatory benchmark with
//! unit diffusion on a mesh sequence and fit the orders of the H1, L2 and
//! QoI errors.

use std::sync::Arc;

use polyuq_core::geometry::{MeshHierarchy, PolygonalMesh, Rectangle};
use polyuq_core::stats::{fit_loglog, LineFit};
use polyuq_core::vem::VemSpace;
use polyuq_core::Point;

use super::{oscillatory, ExperimentError};
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, OutputDir};

#[derive(Debug, Clone)]
pub struct QoiRow {
    pub p: usize,
    pub mesh: String,
    pub h: f64,
    pub dofs: usize,
    pub err_h1: f64,
    pub err_l2: f64,
    pub err_qoi: f64,
}

#[derive(Debug, Clone)]
pub struct OrderFit {
    pub p: usize,
    pub h1: LineFit,
    pub l2: LineFit,
    pub qoi: LineFit,
}

#[derive(Debug, Clone)]
pub struct QoiConvergenceSummary {
    pub rows: Vec<QoiRow>,
    pub fits: Vec<OrderFit>,
}

pub fn run_qoi_convergence(
    config: &ExperimentConfig,
    out: &OutputDir,
) -> Result<QoiConvergenceSummary, ExperimentError> {
    let mut meshes: Vec<(String, Arc<PolygonalMesh>)> = Vec::new();
    for &n in &config.meshes {
        let hierarchy = MeshHierarchy::cartesian(1, n, Rectangle::UNIT)?;
        meshes.push((format!("cartesian-{n}"), hierarchy.mesh(0).clone()));
    }
    if let Some((n0, levels, amplitude)) = config.mesh_jitter {
        let coarse = crate::meshio::jittered_quad_mesh(n0, amplitude, config.seed)?;
        let hierarchy = MeshHierarchy::by_refinement(coarse, levels)?;
        for l in 0..hierarchy.n_levels() {
            meshes.push((format!("jittered-{n0}-{l}"), hierarchy.mesh(l).clone()));
        }
    }
    for path in &config.mesh_files {
        let (mesh, _warnings) = crate::meshio::load_mesh(path)?;
        meshes.push((path.display().to_string(), Arc::new(mesh)));
    }

    let one = |_: Point| 1.0;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &p in &config.orders {
        let mut hs = Vec::new();
        let mut errs_h1 = Vec::new();
        let mut errs_l2 = Vec::new();
        let mut errs_qoi = Vec::new();
        for (name, mesh) in &meshes {
            let space = VemSpace::build(mesh.clone(), p)?;
            let system = space.assemble(&one, &oscillatory::source)?;
            let solution = space.solve(&system, config.solver_tol)?;
            let (err_h1, err_l2) =
                space.error_norms(&solution, &oscillatory::exact, &oscillatory::gradient);
            let err_qoi = (space.qoi(&solution, &one) - oscillatory::QOI_EXACT).abs();
            rows.push(QoiRow {
                p,
                mesh: name.clone(),
                h: mesh.mesh_size(),
                dofs: space.dof_count(),
                err_h1,
                err_l2,
                err_qoi,
            });
            hs.push(mesh.mesh_size());
            errs_h1.push(err_h1);
            errs_l2.push(err_l2);
            errs_qoi.push(err_qoi);
        }
        let from = config.fit_from.min(hs.len().saturating_sub(2));
        if hs.len() - from >= 2 {
            fits.push(OrderFit {
                p,
                h1: fit_loglog(&hs[from..], &errs_h1[from..]),
                l2: fit_loglog(&hs[from..], &errs_l2[from..]),
                qoi: fit_loglog(&hs[from..], &errs_qoi[from..]),
            });
        }
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                r.mesh.clone(),
                fmt_f64(r.h),
                r.dofs.to_string(),
                fmt_f64(r.err_h1),
                fmt_f64(r.err_l2),
                fmt_f64(r.err_qoi),
            ]
        })
        .collect();
    out.write_table(
        "qoi_convergence",
        &["p", "mesh", "h", "dofs", "err_h1", "err_l2", "err_qoi"],
        &table,
    )?;
    let fit_table: Vec<Vec<String>> = fits
        .iter()
        .map(|f| {
            vec![
                f.p.to_string(),
                fmt_f64(f.h1.slope),
                fmt_f64(f.l2.slope),
                fmt_f64(f.qoi.slope),
                fmt_f64(f.h1.r_squared),
                fmt_f64(f.l2.r_squared),
                fmt_f64(f.qoi.r_squared),
            ]
        })
        .collect();
    out.write_table(
        "qoi_convergence_slopes",
        &["p", "slope_h1", "slope_l2", "slope_qoi", "r2_h1", "r2_l2", "r2_qoi"],
        &fit_table,
    )?;
    Ok(QoiConvergenceSummary { rows, fits })
}
