//! Single-level and multilevel Monte Carlo estimators for the expected
//! solution field and for linear quantities of interest, with the practical
//! sample-allocation formulas and DOF-based cost accounting.
//!
//! A multilevel estimate telescopes projected solution differences across a
//! nested hierarchy: each level-`l` term draws one coefficient realization
//! per sample, solves on the level mesh and (for `l > 1`) its parent, and
//! averages the restricted difference of the polynomial projections. All
//! sample loops reduce over fixed chunks in index order, so results are
//! bitwise independent of the executor.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::exec::{chunk_count, chunk_range, Executor};
use crate::fields::{FieldError, GramCache, PiecewisePolyField, RestrictionTable};
use crate::geometry::{MeshHierarchy, PolygonalMesh};
use crate::math;
use crate::stochastic::{ModelError, RandomCoefficient, SampleStream};
use crate::vem::{Projection, ScalarField, VemError, VemSpace};

/// What an estimator targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The expected solution field, represented by the given projection.
    Solution(Projection),
    /// The expected linear quantity of interest (uses the L2 projection).
    Qoi,
}

impl Target {
    fn projection(&self) -> Projection {
        match self {
            Target::Solution(p) => *p,
            Target::Qoi => Projection::L2,
        }
    }

    /// Exponent multiplier in the allocation formulas: errors decay like
    /// `h^p` for the solution and `h^(2p)` for the QoI.
    fn rate_factor(&self) -> u32 {
        match self {
            Target::Solution(_) => 1,
            Target::Qoi => 2,
        }
    }
}

/// The stochastic model problem: a sampleable coefficient, a deterministic
/// source, and the QoI weight.
pub struct StochasticProblem<'a> {
    pub coefficient: &'a RandomCoefficient,
    pub source: &'a dyn ScalarField,
    pub qoi_weight: &'a dyn ScalarField,
}

/// Sample counts produced by the practical allocation formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleAllocation {
    pub target_kind: &'static str,
    pub per_level: Vec<usize>,
}

/// Per-level estimator diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    /// 1-based level.
    pub level: usize,
    pub samples: usize,
    /// DOFs of the level space.
    pub dofs: usize,
    /// DOFs of the coarser space of the pair (0 on the first level).
    pub coarse_dofs: usize,
    /// Sample variance of the broken H1 seminorm of the level difference.
    pub variance_h1: f64,
    /// Sample variance of the QoI of the level difference.
    pub variance_qoi: f64,
    pub mean_h1: f64,
    pub mean_qoi: f64,
}

/// Estimator output: the expected-field payload on the finest mesh of the
/// run, the QoI value when targeted, per-level diagnostics and exact cost
/// counters.
#[derive(Debug, Clone)]
pub struct EstimatorResult {
    pub field: PiecewisePolyField,
    pub qoi: Option<f64>,
    pub levels: Vec<LevelStats>,
    /// `sum_l M_l N_l` (one solve per level term).
    pub cost_level_dofs: u64,
    /// `sum_l M_l (N_l + N_{l-1})`, counting both solves of a pair.
    pub cost_solve_dofs: u64,
    pub master_seed: u64,
}

/// Errors from allocation and estimation.
#[derive(Debug)]
pub enum EstimatorError {
    SampleCountOverflow { requested: f64, cap: usize },
    Model(ModelError),
    Vem { level: usize, sample: Option<usize>, source: VemError },
    Field(FieldError),
    HierarchyTooShallow { needed: usize, available: usize },
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SampleCountOverflow { requested, cap } => write!(
                f,
                "allocation formula requests {requested:.3e} samples, above the cap {cap}"
            ),
            Self::Model(e) => write!(f, "coefficient model: {e}"),
            Self::Vem {
                level,
                sample,
                source,
            } => match sample {
                Some(i) => write!(f, "level {level}, sample {i}: {source}"),
                None => write!(f, "level {level}: {source}"),
            },
            Self::Field(e) => write!(f, "field arithmetic: {e}"),
            Self::HierarchyTooShallow { needed, available } => write!(
                f,
                "hierarchy has {available} levels but {needed} are required"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EstimatorError {}

impl From<ModelError> for EstimatorError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<FieldError> for EstimatorError {
    fn from(e: FieldError) -> Self {
        Self::Field(e)
    }
}

/// Default cap on any single sample count (well below the exact-integer
/// range of `f64`).
pub const DEFAULT_SAMPLE_CAP: usize = 1_000_000_000_000;

/// Default allocation exponent offset.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Ceiling with a relative slack of `1e-9`, so that the infinitesimal
/// `epsilon` exponent in the allocation formulas does not push exact
/// integer values to the next integer.
fn ceil_with_slack(x: f64) -> f64 {
    math::ceil(x / (1.0 + 1e-9))
}

fn to_count(x: f64, cap: usize) -> Result<usize, EstimatorError> {
    if !(x.is_finite()) || x > cap as f64 {
        return Err(EstimatorError::SampleCountOverflow { requested: x, cap });
    }
    Ok((x as usize).max(1))
}

/// Single-level sample count `p^(2p) h^(-2p)` for the solution target and
/// `p^(4p) h^(-4p)` for the QoI, with an optional multiplier.
pub fn mc_sample_count(p: usize, h: f64, target: Target) -> Result<usize, EstimatorError> {
    mc_sample_count_with(p, h, target, 1.0, DEFAULT_SAMPLE_CAP)
}

pub fn mc_sample_count_with(
    p: usize,
    h: f64,
    target: Target,
    multiplier: f64,
    cap: usize,
) -> Result<usize, EstimatorError> {
    assert!(p >= 1 && h > 0.0);
    let k = target.rate_factor();
    let exponent = (2 * k * p as u32) as i32;
    let m = multiplier * math::powi(p as f64, exponent) * math::powi(h, -exponent);
    to_count(ceil_with_slack(m), cap)
}

/// Per-level counts `((h_l / h_L)^(kp) l^(1+eps))^2` with `k = 1` for the
/// solution and `k = 2` for the QoI; `h_levels` are the level mesh sizes,
/// coarsest first.
pub fn mlmc_sample_counts(
    p: usize,
    h_levels: &[f64],
    epsilon: f64,
    target: Target,
) -> Result<SampleAllocation, EstimatorError> {
    mlmc_sample_counts_with(p, h_levels, epsilon, target, 1.0, DEFAULT_SAMPLE_CAP)
}

pub fn mlmc_sample_counts_with(
    p: usize,
    h_levels: &[f64],
    epsilon: f64,
    target: Target,
    multiplier: f64,
    cap: usize,
) -> Result<SampleAllocation, EstimatorError> {
    assert!(p >= 1 && !h_levels.is_empty() && epsilon > 0.0);
    let h_finest = h_levels[h_levels.len() - 1];
    let kp = (target.rate_factor() * p as u32) as i32;
    let mut per_level = Vec::with_capacity(h_levels.len());
    for (idx, &h) in h_levels.iter().enumerate() {
        let level = (idx + 1) as f64;
        let ratio = math::powi(h / h_finest, kp);
        let m = multiplier * math::powi(ratio * math::powf(level, 1.0 + epsilon), 2);
        per_level.push(to_count(ceil_with_slack(m), cap)?);
    }
    Ok(SampleAllocation {
        target_kind: match target {
            Target::Solution(_) => "solution",
            Target::Qoi => "qoi",
        },
        per_level,
    })
}

/// Precomputed per-level machinery shared by all samples of a run.
struct LevelContext {
    space: VemSpace,
    /// Load vector restricted to free DOFs (the source is deterministic).
    rhs_free: Vec<f64>,
    gram: GramCache,
    /// Moments of the QoI weight against each element basis, flattened.
    qoi_moments: Vec<f64>,
    n_dofs: usize,
}

impl LevelContext {
    fn build(
        mesh: Arc<PolygonalMesh>,
        p: usize,
        problem: &StochasticProblem<'_>,
        level: usize,
    ) -> Result<Self, EstimatorError> {
        let space = VemSpace::build(mesh.clone(), p).map_err(|source| EstimatorError::Vem {
            level,
            sample: None,
            source,
        })?;
        let load = space.load_vector(problem.source);
        let mut rhs_free = vec![0.0; space.layout().n_free()];
        for g in 0..space.layout().total() {
            if let Some(fidx) = space.layout().free_index(g) {
                rhs_free[fidx] = load[g];
            }
        }
        let n_p = crate::vem::basis::monomial_count(p);
        let mut qoi_moments = vec![0.0; mesh.n_elements() * n_p];
        for e in 0..mesh.n_elements() {
            let m = space.element_base(e).moments_of(problem.qoi_weight);
            qoi_moments[e * n_p..(e + 1) * n_p].copy_from_slice(&m);
        }
        Ok(Self {
            gram: GramCache::new(&mesh, p),
            rhs_free,
            qoi_moments,
            n_dofs: space.dof_count(),
            space,
        })
    }

    /// One deterministic solve for a fixed coefficient, projected.
    fn solve_projected(
        &self,
        alpha: &dyn ScalarField,
        projection: Projection,
        rel_tol: f64,
        level: usize,
        sample: Option<usize>,
    ) -> Result<PiecewisePolyField, EstimatorError> {
        let wrap = |source: VemError| EstimatorError::Vem {
            level,
            sample,
            source,
        };
        let (a_ii, _) = self.space.assemble_matrix(alpha).map_err(wrap)?;
        let (x, _) = a_ii
            .cg_solve(&self.rhs_free, rel_tol)
            .map_err(|e| wrap(VemError::SolverDiverged(e)))?;
        let dofs = self.space.scatter_free(&x);
        Ok(self.space.project_dofs(&dofs, projection))
    }

    /// `int (Pi^0 q) v` for a field on this level, via cached moments.
    fn qoi_of(&self, field: &PiecewisePolyField) -> f64 {
        let n_p = crate::vem::basis::monomial_count(field.order());
        let mut acc = 0.0;
        for (c, m) in field.coeffs().iter().zip(self.qoi_moments.iter()) {
            acc += c * m;
        }
        debug_assert_eq!(field.coeffs().len() % n_p, 0);
        acc
    }
}

/// Partial reduction of one chunk of samples.
struct ChunkSum {
    field: Vec<f64>,
    sum_h1: f64,
    sum_h1_sq: f64,
    sum_q: f64,
    sum_q_sq: f64,
}

/// Runs the level term `E_M[ P u_l - P u_{l-1} ]` (the coarse part absent
/// on the first level): returns the sample-mean field on the fine mesh of
/// the pair plus moment statistics of per-sample norms and QoI values.
/// `level_1b` is the 1-based level that keys the sample draws.
#[allow(clippy::too_many_arguments)]
fn run_level_term(
    fine: &LevelContext,
    coarse: Option<(&LevelContext, &RestrictionTable)>,
    level_1b: usize,
    samples: usize,
    problem: &StochasticProblem<'_>,
    stream: &SampleStream,
    projection: Projection,
    rel_tol: f64,
    exec: &impl Executor,
) -> Result<(PiecewisePolyField, LevelStats), EstimatorError> {
    let fine_mesh = fine.space.mesh().clone();
    let order = fine.space.order();
    let n_chunks = chunk_count(samples);
    let chunk_results: Vec<Result<ChunkSum, EstimatorError>> =
        exec.map_chunks(n_chunks, &|c: usize| -> Result<ChunkSum, EstimatorError> {
            let n_p = crate::vem::basis::monomial_count(order);
            let mut sum = ChunkSum {
                field: vec![0.0; fine_mesh.n_elements() * n_p],
                sum_h1: 0.0,
                sum_h1_sq: 0.0,
                sum_q: 0.0,
                sum_q_sq: 0.0,
            };
            for i in chunk_range(c, samples) {
                let omega = problem.coefficient.sample(stream, level_1b, i);
                let mut diff =
                    fine.solve_projected(&omega, projection, rel_tol, level_1b, Some(i))?;
                if let Some((coarse_ctx, restriction)) = coarse {
                    let coarse_field = coarse_ctx.solve_projected(
                        &omega,
                        projection,
                        rel_tol,
                        level_1b - 1,
                        Some(i),
                    )?;
                    let lifted = restriction.apply(&coarse_field, fine_mesh.clone());
                    diff.axpy(-1.0, &lifted)?;
                }
                let (h1_sq, _) = diff.norms_squared_with(&fine.gram);
                let h1 = math::sqrt(h1_sq);
                let q = fine.qoi_of(&diff);
                sum.sum_h1 += h1;
                sum.sum_h1_sq += h1 * h1;
                sum.sum_q += q;
                sum.sum_q_sq += q * q;
                for (acc, v) in sum.field.iter_mut().zip(diff.coeffs()) {
                    *acc += v;
                }
            }
            Ok(sum)
        });

    let n_p = crate::vem::basis::monomial_count(order);
    let mut field = vec![0.0; fine_mesh.n_elements() * n_p];
    let mut s_h1 = 0.0;
    let mut s_h1_sq = 0.0;
    let mut s_q = 0.0;
    let mut s_q_sq = 0.0;
    for chunk in chunk_results {
        let chunk = chunk?;
        for (acc, v) in field.iter_mut().zip(chunk.field.iter()) {
            *acc += v;
        }
        s_h1 += chunk.sum_h1;
        s_h1_sq += chunk.sum_h1_sq;
        s_q += chunk.sum_q;
        s_q_sq += chunk.sum_q_sq;
    }
    let m = samples as f64;
    let inv_m = 1.0 / m;
    for v in &mut field {
        *v *= inv_m;
    }
    let var = |s: f64, s_sq: f64| {
        if samples > 1 {
            ((s_sq - s * s / m) / (m - 1.0)).max(0.0)
        } else {
            0.0
        }
    };
    let stats = LevelStats {
        level: level_1b,
        samples,
        dofs: fine.n_dofs,
        coarse_dofs: coarse.map(|(c, _)| c.n_dofs).unwrap_or(0),
        variance_h1: var(s_h1, s_h1_sq),
        variance_qoi: var(s_q, s_q_sq),
        mean_h1: s_h1 * inv_m,
        mean_qoi: s_q * inv_m,
    };
    Ok((
        PiecewisePolyField::from_raw(fine_mesh, order, field),
        stats,
    ))
}

/// Plain Monte Carlo estimate on a single mesh: the sample mean of the
/// projected solutions (energy projection for the solution target) and,
/// for the QoI target, the quantity of interest of that mean.
#[allow(clippy::too_many_arguments)]
pub fn mc_estimate(
    problem: &StochasticProblem<'_>,
    mesh: Arc<PolygonalMesh>,
    p: usize,
    samples: usize,
    stream: &SampleStream,
    target: Target,
    rel_tol: f64,
    exec: &impl Executor,
) -> Result<EstimatorResult, EstimatorError> {
    assert!(samples >= 1);
    problem.coefficient.validate()?;
    let ctx = LevelContext::build(mesh, p, problem, 1)?;
    let (field, stats) = run_level_term(
        &ctx,
        None,
        1,
        samples,
        problem,
        stream,
        target.projection(),
        rel_tol,
        exec,
    )?;
    let cost = (samples * ctx.n_dofs) as u64;
    let qoi = matches!(target, Target::Qoi).then(|| ctx.qoi_of(&field));
    Ok(EstimatorResult {
        field,
        qoi,
        levels: vec![stats],
        cost_level_dofs: cost,
        cost_solve_dofs: cost,
        master_seed: stream.master_seed(),
    })
}

/// Multilevel Monte Carlo estimate over levels `1..=counts.len()` of
/// the hierarchy: sums the per-level sample means of projected solution
/// differences, restricted to the finest level of the run.
#[allow(clippy::too_many_arguments)]
pub fn mlmc_estimate(
    problem: &StochasticProblem<'_>,
    hierarchy: &MeshHierarchy,
    p: usize,
    counts: &[usize],
    stream: &SampleStream,
    target: Target,
    rel_tol: f64,
    exec: &impl Executor,
) -> Result<EstimatorResult, EstimatorError> {
    let levels = counts.len();
    assert!(levels >= 1, "at least one level");
    if hierarchy.n_levels() < levels {
        return Err(EstimatorError::HierarchyTooShallow {
            needed: levels,
            available: hierarchy.n_levels(),
        });
    }
    problem.coefficient.validate()?;
    let projection = target.projection();

    let contexts: Vec<LevelContext> = (0..levels)
        .map(|l| LevelContext::build(hierarchy.mesh(l).clone(), p, problem, l + 1))
        .collect::<Result<_, _>>()?;
    // one-level restrictions for the coupled pairs, and level-to-finest
    let pair_restrictions: Vec<RestrictionTable> = (1..levels)
        .map(|l| RestrictionTable::new(hierarchy, l - 1, l, p))
        .collect::<Result<_, _>>()?;
    let to_finest: Vec<RestrictionTable> = (0..levels)
        .map(|l| RestrictionTable::new(hierarchy, l, levels - 1, p))
        .collect::<Result<_, _>>()?;

    let finest_mesh = hierarchy.mesh(levels - 1).clone();
    let mut total = PiecewisePolyField::zero(finest_mesh.clone(), p);
    let mut level_stats = Vec::with_capacity(levels);
    let mut cost_level_dofs = 0u64;
    let mut cost_solve_dofs = 0u64;
    for l in 0..levels {
        let coarse = (l > 0).then(|| (&contexts[l - 1], &pair_restrictions[l - 1]));
        let (mean_field, stats) = run_level_term(
            &contexts[l],
            coarse,
            l + 1,
            counts[l],
            problem,
            stream,
            projection,
            rel_tol,
            exec,
        )?;
        cost_level_dofs += (counts[l] * contexts[l].n_dofs) as u64;
        cost_solve_dofs +=
            (counts[l] * (contexts[l].n_dofs + stats.coarse_dofs)) as u64;
        let on_finest = to_finest[l].apply(&mean_field, finest_mesh.clone());
        total.axpy(1.0, &on_finest)?;
        level_stats.push(stats);
    }
    let qoi = matches!(target, Target::Qoi).then(|| {
        contexts
            .last()
            .expect("at least one level")
            .qoi_of(&total)
    });
    Ok(EstimatorResult {
        field: total,
        qoi,
        levels: level_stats,
        cost_level_dofs,
        cost_solve_dofs,
        master_seed: stream.master_seed(),
    })
}

/// Per-sample broken H1 seminorms of the difference at 1-based level
/// `level_1b`;
/// diagnostic feed for variance studies.
#[allow(clippy::too_many_arguments)]
pub fn level_sample_norms(
    problem: &StochasticProblem<'_>,
    hierarchy: &MeshHierarchy,
    p: usize,
    level_1b: usize,
    samples: usize,
    stream: &SampleStream,
    rel_tol: f64,
) -> Result<Vec<f64>, EstimatorError> {
    assert!(level_1b >= 1 && hierarchy.n_levels() >= level_1b);
    let l = level_1b - 1;
    let fine = LevelContext::build(hierarchy.mesh(l).clone(), p, problem, level_1b)?;
    let coarse = if l > 0 {
        Some((
            LevelContext::build(hierarchy.mesh(l - 1).clone(), p, problem, level_1b - 1)?,
            RestrictionTable::new(hierarchy, l - 1, l, p)?,
        ))
    } else {
        None
    };
    let mut norms = Vec::with_capacity(samples);
    for i in 0..samples {
        let omega = problem.coefficient.sample(stream, level_1b, i);
        let mut diff =
            fine.solve_projected(&omega, Projection::Energy, rel_tol, level_1b, Some(i))?;
        if let Some((ref cctx, ref table)) = coarse {
            let cf = cctx.solve_projected(
                &omega,
                Projection::Energy,
                rel_tol,
                level_1b - 1,
                Some(i),
            )?;
            let lifted = table.apply(&cf, fine.space.mesh().clone());
            diff.axpy(-1.0, &lifted)?;
        }
        let (h1_sq, _) = diff.norms_squared_with(&fine.gram);
        norms.push(math::sqrt(h1_sq));
    }
    Ok(norms)
}

/// Broken H1 seminorm of the difference between an estimator field and a
/// reference field living on a (possibly finer) hierarchy level.
pub fn error_against_reference(
    estimate: &PiecewisePolyField,
    estimate_level: usize,
    reference: &PiecewisePolyField,
    reference_level: usize,
    hierarchy: &MeshHierarchy,
) -> Result<f64, EstimatorError> {
    let lifted = if estimate_level == reference_level {
        estimate.clone()
    } else {
        crate::fields::restrict_to_fine(estimate, hierarchy, estimate_level, reference_level)?
    };
    let mut diff = lifted;
    diff.axpy(-1.0, reference)?;
    Ok(diff.broken_h1_seminorm())
}
