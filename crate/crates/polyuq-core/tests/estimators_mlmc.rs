//! Multilevel estimator verification: the telescoping oracle against a
//! deterministic coefficient, degeneration to plain Monte Carlo on one
//! level, determinism, the QoI/field linearity identity and the per-level
//! variance decay.

use polyuq_core::estimators::{
    level_sample_norms, mc_estimate, mlmc_estimate, mlmc_sample_counts, StochasticProblem, Target,
    DEFAULT_EPSILON,
};
use polyuq_core::exec::Sequential;
use polyuq_core::fields::restrict_to_fine;
use polyuq_core::geometry::{MeshHierarchy, Rectangle};
use polyuq_core::stochastic::{RandomCoefficient, SampleStream};
use polyuq_core::vem::{qoi_field, Projection, VemSpace};
use polyuq_core::Point;

fn ones(_: Point) -> f64 {
    1.0
}

fn problem<'a>(model: &'a RandomCoefficient) -> StochasticProblem<'a> {
    StochasticProblem {
        coefficient: model,
        source: &ones,
        qoi_weight: &ones,
    }
}

#[test]
fn telescoping_collapses_for_deterministic_coefficients() {
    let hierarchy = MeshHierarchy::cartesian(4, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::deterministic(3.0);
    let prob = problem(&model);
    let stream = SampleStream::new(11, 2);
    let levels = 4;

    // oracle: one deterministic solve on the finest level, projected
    let space = VemSpace::build(hierarchy.mesh(levels - 1).clone(), 1).unwrap();
    let system = space.assemble(&|_: Point| 3.0, &ones).unwrap();
    let solution = space.solve(&system, 1e-12).unwrap();
    let reference = space.project(&solution, Projection::Energy);

    for counts in [vec![1, 1, 1, 1], vec![5, 3, 2, 1], vec![2, 7, 1, 4]] {
        let est = mlmc_estimate(
            &prob,
            &hierarchy,
            1,
            &counts,
            &stream,
            Target::Solution(Projection::Energy),
            1e-12,
            &Sequential,
        )
        .unwrap();
        let mut diff = est.field.clone();
        diff.axpy(-1.0, &reference).unwrap();
        let err = diff.broken_h1_seminorm();
        let scale = reference.broken_h1_seminorm();
        assert!(
            err <= 1e-10 * scale.max(1.0),
            "allocation {counts:?}: [{err:.3e}]"
        );
        // cost formulas hold exactly
        let expect_level: u64 = counts
            .iter()
            .enumerate()
            .map(|(l, &m)| (m * hierarchy.dof_count(l, 1)) as u64)
            .sum();
        assert_eq!(est.cost_level_dofs, expect_level);
    }
}

#[test]
fn single_level_mlmc_equals_plain_mc() {
    let hierarchy = MeshHierarchy::cartesian(2, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let prob = problem(&model);
    let stream = SampleStream::new(3, 5);
    let m = 9;
    let ml = mlmc_estimate(
        &prob,
        &hierarchy,
        1,
        &[m],
        &stream,
        Target::Solution(Projection::Energy),
        1e-11,
        &Sequential,
    )
    .unwrap();
    let mc = mc_estimate(
        &prob,
        hierarchy.mesh(0).clone(),
        1,
        m,
        &stream,
        Target::Solution(Projection::Energy),
        1e-11,
        &Sequential,
    )
    .unwrap();
    assert_eq!(ml.field.coeffs().len(), mc.field.coeffs().len());
    for (a, b) in ml.field.coeffs().iter().zip(mc.field.coeffs()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(ml.cost_level_dofs, mc.cost_level_dofs);
}

#[test]
fn same_seed_reproduces_bitwise() {
    let hierarchy = MeshHierarchy::cartesian(3, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let prob = problem(&model);
    let stream = SampleStream::new(123, 9);
    let counts = mlmc_sample_counts(
        1,
        &(0..3).map(|l| hierarchy.mesh_size(l)).collect::<Vec<_>>(),
        DEFAULT_EPSILON,
        Target::Solution(Projection::Energy),
    )
    .unwrap();
    let run = || {
        mlmc_estimate(
            &prob,
            &hierarchy,
            1,
            &counts.per_level,
            &stream,
            Target::Solution(Projection::Energy),
            1e-10,
            &Sequential,
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    for (x, y) in a.field.coeffs().iter().zip(b.field.coeffs()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (sa, sb) in a.levels.iter().zip(&b.levels) {
        assert_eq!(sa.variance_h1.to_bits(), sb.variance_h1.to_bits());
    }
}

#[test]
fn qoi_estimate_equals_qoi_of_l2_field() {
    let hierarchy = MeshHierarchy::cartesian(3, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let prob = problem(&model);
    let stream = SampleStream::new(77, 4);
    let counts = [16usize, 4, 2];
    let q_run = mlmc_estimate(
        &prob,
        &hierarchy,
        1,
        &counts,
        &stream,
        Target::Qoi,
        1e-11,
        &Sequential,
    )
    .unwrap();
    let field_run = mlmc_estimate(
        &prob,
        &hierarchy,
        1,
        &counts,
        &stream,
        Target::Solution(Projection::L2),
        1e-11,
        &Sequential,
    )
    .unwrap();
    let q_of_field = qoi_field(&field_run.field, &ones);
    let q_est = q_run.qoi.expect("qoi target produces a value");
    assert!(
        (q_est - q_of_field).abs() <= 1e-12 * q_est.abs().max(1.0),
        "{q_est} vs {q_of_field}"
    );
}

#[test]
fn deterministic_mlmc_qoi_ignores_allocation() {
    let hierarchy = MeshHierarchy::cartesian(3, 1, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::deterministic(1.0);
    let prob = problem(&model);
    let stream = SampleStream::new(5, 5);
    let a = mlmc_estimate(&prob, &hierarchy, 1, &[1, 1, 1], &stream, Target::Qoi, 1e-12, &Sequential)
        .unwrap();
    let b = mlmc_estimate(&prob, &hierarchy, 1, &[4, 2, 3], &stream, Target::Qoi, 1e-12, &Sequential)
        .unwrap();
    let (qa, qb) = (a.qoi.unwrap(), b.qoi.unwrap());
    assert!((qa - qb).abs() <= 1e-11 * qa.abs().max(1.0));
}

#[test]
fn level_difference_variance_decays() {
    // variance of |w_l| is non-increasing beyond level 2, checked with a
    // bootstrap comparison at the 95% level
    let hierarchy = MeshHierarchy::cartesian(5, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let prob = problem(&model);
    let stream = SampleStream::new(2718, 6);
    let m = 48;
    let norms: Vec<Vec<f64>> = (2..=5)
        .map(|l| level_sample_norms(&prob, &hierarchy, 1, l, m, &stream, 1e-10).unwrap())
        .collect();
    let variance = |s: &[f64]| {
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (s.len() as f64 - 1.0)
    };
    let mut boot_state = 0xfeedu64;
    let mut boot = move |s: &[f64]| -> f64 {
        let n = s.len();
        let mut resample = Vec::with_capacity(n);
        for _ in 0..n {
            boot_state = boot_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            resample.push(s[(boot_state >> 33) as usize % n]);
        }
        variance(&resample)
    };
    for pair in norms.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let mut wins = 0usize;
        let trials = 400;
        for _ in 0..trials {
            if boot(fine) <= boot(coarse) {
                wins += 1;
            }
        }
        let confidence = wins as f64 / trials as f64;
        assert!(
            confidence >= 0.95,
            "variance decay not supported: {:.3} (V_coarse={:.3e}, V_fine={:.3e})",
            confidence,
            variance(coarse),
            variance(fine)
        );
    }
}

#[test]
fn estimator_error_vs_reference_decreases_with_level() {
    // smoke test of the error measurement path used by the experiments
    let hierarchy = MeshHierarchy::cartesian(4, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let prob = problem(&model);
    let stream = SampleStream::new(31, 8);
    let h: Vec<f64> = (0..4).map(|l| hierarchy.mesh_size(l)).collect();
    let ref_counts =
        mlmc_sample_counts(1, &h, DEFAULT_EPSILON, Target::Solution(Projection::Energy)).unwrap();
    let reference = mlmc_estimate(
        &prob,
        &hierarchy,
        1,
        &ref_counts.per_level,
        &stream.derive(0xAB),
        Target::Solution(Projection::Energy),
        1e-10,
        &Sequential,
    )
    .unwrap();
    let mut errors = Vec::new();
    for levels in [1usize, 2, 3] {
        let counts = mlmc_sample_counts(
            1,
            &h[..levels],
            DEFAULT_EPSILON,
            Target::Solution(Projection::Energy),
        )
        .unwrap();
        let est = mlmc_estimate(
            &prob,
            &hierarchy,
            1,
            &counts.per_level,
            &stream,
            Target::Solution(Projection::Energy),
            1e-10,
            &Sequential,
        )
        .unwrap();
        let lifted = restrict_to_fine(&est.field, &hierarchy, levels - 1, 3).unwrap();
        let mut diff = lifted;
        diff.axpy(-1.0, &reference.field).unwrap();
        errors.push(diff.broken_h1_seminorm());
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not decreasing: {errors:?}"
    );
}
