//! Minimal library walkthrough: build a nested hierarchy, run the
//! multilevel estimator on the smooth benchmark coefficient with formula
//! sample counts, and print the per-level table and cost counters.

use polyuq::ThreadPool;
use polyuq_core::estimators::{
    mlmc_estimate, mlmc_sample_counts, StochasticProblem, Target, DEFAULT_EPSILON,
};
use polyuq_core::geometry::{MeshHierarchy, Rectangle};
use polyuq_core::stochastic::{RandomCoefficient, SampleStream};
use polyuq_core::vem::Projection;
use polyuq_core::Point;

fn main() {
    let levels = 4;
    let hierarchy = MeshHierarchy::cartesian(levels, 2, Rectangle::UNIT).unwrap();
    let model = RandomCoefficient::smooth_benchmark();
    let problem = StochasticProblem {
        coefficient: &model,
        source: &|_: Point| 1.0,
        qoi_weight: &|_: Point| 1.0,
    };
    let h: Vec<f64> = (0..levels).map(|l| hierarchy.mesh_size(l)).collect();
    let target = Target::Solution(Projection::Energy);
    let alloc = mlmc_sample_counts(1, &h, DEFAULT_EPSILON, target).unwrap();
    println!("samples per level: {:?}", alloc.per_level);

    let stream = SampleStream::new(42, 1);
    let pool = ThreadPool::new(4);
    let estimate = mlmc_estimate(
        &problem,
        &hierarchy,
        1,
        &alloc.per_level,
        &stream,
        target,
        1e-10,
        &pool,
    )
    .unwrap();
    println!("level  M      N      E|w|_H1      Var|w|_H1");
    for ls in &estimate.levels {
        println!(
            "{:5} {:6} {:6} {:12.4e} {:12.4e}",
            ls.level, ls.samples, ls.dofs, ls.mean_h1, ls.variance_h1
        );
    }
    println!(
        "cost: {} level-weighted DOFs ({} counting both solves of each pair)",
        estimate.cost_level_dofs, estimate.cost_solve_dofs
    );
    println!(
        "estimated field: broken H1 seminorm {:.6e}",
        estimate.field.broken_h1_seminorm()
    );
}
