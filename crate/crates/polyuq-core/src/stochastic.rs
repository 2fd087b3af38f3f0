//! Sampleable random diffusion coefficients with reproducible,
//! level-and-sample-indexed substreams.
//!
//! Sampling is counter-based: every random variate is a pure function of
//! `(master seed, experiment, level, sample, variable)`, so parallel sample
//! loops reproduce bit-identical draws in any schedule.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::polygon;
use crate::math;
use crate::vem::ScalarField;
use crate::Point;

/// A keyed, counter-based stream of uniform variates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStream {
    master_seed: u64,
    experiment: u64,
}

impl SampleStream {
    pub fn new(master_seed: u64, experiment: u64) -> Self {
        Self {
            master_seed,
            experiment,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Derives an independent stream (used for reference estimators).
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            master_seed: mix(self.master_seed ^ mix(tag ^ 0x9e3779b97f4a7c15)),
            experiment: self.experiment,
        }
    }

    /// Uniform variate on `[0, 1)` for the given key.
    pub fn uniform01(&self, level: usize, sample: usize, variable: usize) -> f64 {
        let mut state = self.master_seed ^ 0x6a09e667f3bcc908;
        for word in [
            self.experiment,
            level as u64,
            sample as u64,
            variable as u64,
        ] {
            state = mix(state ^ mix(word.wrapping_add(0x9e3779b97f4a7c15)));
        }
        to_unit_interval(mix(state))
    }

    /// Uniform variate on `[lo, hi)`.
    pub fn uniform(&self, level: usize, sample: usize, variable: usize, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01(level, sample, variable)
    }
}

/// splitmix64 finalizer; a full-avalanche 64-bit mix.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[inline]
fn to_unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One sinusoidal mode of the smooth coefficient model:
/// `beta * sin(omega_x x + phase_x) sin(omega_y y + phase_y) * Y`,
/// `Y` uniform on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineMode {
    pub beta: f64,
    pub lo: f64,
    pub hi: f64,
    pub omega: [f64; 2],
    pub phase: [f64; 2],
}

impl SineMode {
    fn shape(&self, x: Point) -> f64 {
        math::sin(self.omega[0] * x[0] + self.phase[0])
            * math::sin(self.omega[1] * x[1] + self.phase[1])
    }

    /// `max |sin(omega t + phase)|` for `t` in `[t0, t1]`.
    fn max_abs_sin(omega: f64, phase: f64, t0: f64, t1: f64) -> f64 {
        if omega == 0.0 {
            return math::abs(math::sin(phase));
        }
        let (a, b) = (omega * t0 + phase, omega * t1 + phase);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        // an extremum of sin sits at pi/2 + k pi
        let k0 = math::ceil((lo - core::f64::consts::FRAC_PI_2) / core::f64::consts::PI);
        let extremum = core::f64::consts::FRAC_PI_2 + k0 * core::f64::consts::PI;
        if extremum <= hi {
            1.0
        } else {
            math::abs(math::sin(lo)).max(math::abs(math::sin(hi)))
        }
    }

    /// Largest `|shape|` over an axis-aligned bounding box.
    fn max_abs_shape(&self, lo: Point, hi: Point) -> f64 {
        Self::max_abs_sin(self.omega[0], self.phase[0], lo[0], hi[0])
            * Self::max_abs_sin(self.omega[1], self.phase[1], lo[1], hi[1])
    }
}

/// A polygonal region with a uniform range for its constant coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRegion {
    pub polygon: Vec<Point>,
    pub lo: f64,
    pub hi: f64,
}

/// Sampleable diffusion coefficient models.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomCoefficient {
    /// Smooth truncated expansion: affine mean plus independent sinusoidal
    /// modes with uniform amplitudes, on an axis-aligned box.
    SmoothKl {
        /// `mean = c0 + cx * x + cy * y`.
        mean: [f64; 3],
        modes: Vec<SineMode>,
        /// Bounding box of the domain, for the analytic coefficient bounds.
        domain: (Point, Point),
    },
    /// Piecewise constant on non-overlapping polygonal regions, each value
    /// uniform on its range.
    PiecewiseRegions { regions: Vec<CoefficientRegion> },
}

/// Configuration errors of a coefficient model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// The guaranteed lower coefficient bound is not positive.
    NonPositiveLowerBound { bound: f64 },
    EmptyRangeOrRegion,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveLowerBound { bound } => write!(
                f,
                "coefficient model admits non-positive values (lower bound {bound:.3e})"
            ),
            Self::EmptyRangeOrRegion => write!(f, "model has an empty range or region list"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// A sampled coefficient realization: an evaluable function with its
/// pointwise bounds.
#[derive(Debug, Clone)]
pub struct SampledCoefficient {
    kind: SampledKind,
    a_min: f64,
    a_max: f64,
}

#[derive(Debug, Clone)]
enum SampledKind {
    Smooth {
        mean: [f64; 3],
        modes: Vec<(SineMode, f64)>,
    },
    Piecewise {
        /// Polygon, bounding box `(lo, hi)`, drawn value.
        regions: Vec<(Vec<Point>, (Point, Point), f64)>,
    },
    Constant(f64),
}

fn bounding_box(polygon: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in polygon {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

impl SampledCoefficient {
    /// Deterministic constant coefficient.
    pub fn constant(value: f64) -> Self {
        Self {
            kind: SampledKind::Constant(value),
            a_min: value,
            a_max: value,
        }
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }
}

impl ScalarField for SampledCoefficient {
    fn eval(&self, x: Point) -> f64 {
        match &self.kind {
            SampledKind::Constant(v) => *v,
            SampledKind::Smooth { mean, modes } => {
                let mut a = mean[0] + mean[1] * x[0] + mean[2] * x[1];
                for (mode, y) in modes {
                    a += mode.beta * y * mode.shape(x);
                }
                a
            }
            SampledKind::Piecewise { regions } => {
                for (poly, (lo, hi), v) in regions {
                    if x[0] < lo[0] || x[0] > hi[0] || x[1] < lo[1] || x[1] > hi[1] {
                        continue;
                    }
                    if polygon::contains_point(poly, x) {
                        return *v;
                    }
                }
                // points on region interfaces can be missed by the even-odd
                // test; fall back to the nearest region by centroid
                let mut best = (f64::INFINITY, regions[0].2);
                for (poly, _, v) in regions {
                    let c = polygon::centroid(poly);
                    let d = polygon::dist2(c, x);
                    if d < best.0 {
                        best = (d, *v);
                    }
                }
                best.1
            }
        }
    }
}

impl RandomCoefficient {
    /// Validates the model: the guaranteed lower bound over all draws must
    /// be strictly positive.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::SmoothKl {
                mean,
                modes,
                domain,
            } => {
                let worst = worst_case_bounds(mean, modes, *domain);
                if !(worst.0 > 0.0) {
                    return Err(ModelError::NonPositiveLowerBound { bound: worst.0 });
                }
                Ok(())
            }
            Self::PiecewiseRegions { regions } => {
                if regions.is_empty() {
                    return Err(ModelError::EmptyRangeOrRegion);
                }
                for r in regions {
                    if r.polygon.len() < 3 || r.hi < r.lo {
                        return Err(ModelError::EmptyRangeOrRegion);
                    }
                    if !(r.lo > 0.0) {
                        return Err(ModelError::NonPositiveLowerBound { bound: r.lo });
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of independent uniform variates per draw.
    pub fn variables(&self) -> usize {
        match self {
            Self::SmoothKl { modes, .. } => modes.len(),
            Self::PiecewiseRegions { regions } => regions.len(),
        }
    }

    /// Draws the realization with key `(level, sample)`; the same key
    /// always produces the identical coefficient. For a multilevel
    /// difference term, the single realization drawn here is shared by the
    /// fine and coarse solves.
    pub fn sample(&self, stream: &SampleStream, level: usize, sample: usize) -> SampledCoefficient {
        match self {
            Self::SmoothKl {
                mean,
                modes,
                domain,
            } => {
                let draws: Vec<(SineMode, f64)> = modes
                    .iter()
                    .enumerate()
                    .map(|(j, m)| (m.clone(), stream.uniform(level, sample, j, m.lo, m.hi)))
                    .collect();
                let (a_min, a_max) = realized_bounds(mean, &draws, *domain);
                SampledCoefficient {
                    kind: SampledKind::Smooth {
                        mean: *mean,
                        modes: draws,
                    },
                    a_min,
                    a_max,
                }
            }
            Self::PiecewiseRegions { regions } => {
                let draws: Vec<(Vec<Point>, (Point, Point), f64)> = regions
                    .iter()
                    .enumerate()
                    .map(|(r, reg)| {
                        (
                            reg.polygon.clone(),
                            bounding_box(&reg.polygon),
                            stream.uniform(level, sample, r, reg.lo, reg.hi),
                        )
                    })
                    .collect();
                let a_min = draws.iter().map(|d| d.2).fold(f64::INFINITY, f64::min);
                let a_max = draws.iter().map(|d| d.2).fold(f64::NEG_INFINITY, f64::max);
                SampledCoefficient {
                    kind: SampledKind::Piecewise { regions: draws },
                    a_min,
                    a_max,
                }
            }
        }
    }

    /// The exact coefficient of the experiment in which a single mode with
    /// amplitude `(8/pi^2)^(5/2)` rides on the mean `5 + x + y`, with
    /// `Y` uniform on `[-1, 1]`, on the unit square.
    pub fn smooth_benchmark() -> Self {
        let quarter_pi = core::f64::consts::FRAC_PI_4;
        Self::SmoothKl {
            mean: [5.0, 1.0, 1.0],
            modes: alloc::vec![SineMode {
                beta: math::powf(8.0 / (core::f64::consts::PI * core::f64::consts::PI), 2.5),
                lo: -1.0,
                hi: 1.0,
                omega: [quarter_pi, quarter_pi],
                phase: [quarter_pi, quarter_pi],
            }],
            domain: ([0.0, 0.0], [1.0, 1.0]),
        }
    }

    /// A zero-variance model: every draw is the constant `value`.
    pub fn deterministic(value: f64) -> Self {
        Self::SmoothKl {
            mean: [value, 0.0, 0.0],
            modes: Vec::new(),
            domain: ([0.0, 0.0], [1.0, 1.0]),
        }
    }
}

/// Bounds of the affine mean over a box: evaluate at the four corners.
fn mean_bounds(mean: &[f64; 3], domain: (Point, Point)) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in &[domain.0[0], domain.1[0]] {
        for &y in &[domain.0[1], domain.1[1]] {
            let v = mean[0] + mean[1] * x + mean[2] * y;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// Conservative realized bounds: mean extrema shifted by each mode's
/// largest modulus times its drawn amplitude.
fn realized_bounds(mean: &[f64; 3], draws: &[(SineMode, f64)], domain: (Point, Point)) -> (f64, f64) {
    let (mut lo, mut hi) = mean_bounds(mean, domain);
    for (mode, y) in draws {
        let amp = math::abs(mode.beta * y) * mode.max_abs_shape(domain.0, domain.1);
        lo -= amp;
        hi += amp;
    }
    (lo, hi)
}

fn worst_case_bounds(mean: &[f64; 3], modes: &[SineMode], domain: (Point, Point)) -> (f64, f64) {
    let (mut lo, mut hi) = mean_bounds(mean, domain);
    for mode in modes {
        let y_max = math::abs(mode.lo).max(math::abs(mode.hi));
        let amp = math::abs(mode.beta) * y_max * mode.max_abs_shape(domain.0, domain.1);
        lo -= amp;
        hi += amp;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stream() -> SampleStream {
        SampleStream::new(42, 7)
    }

    #[test]
    fn benchmark_coefficient_matches_formula() {
        // oracle: direct evaluation of the closed-form expression
        let model = RandomCoefficient::smooth_benchmark();
        model.validate().unwrap();
        let RandomCoefficient::SmoothKl { mean, modes, .. } = &model else {
            unreachable!()
        };
        assert_eq!(*mean, [5.0, 1.0, 1.0]);
        let beta = modes[0].beta;
        // Y = 1 at x = (1, 1): 5 + 1 + 1 + beta * sin(pi/2)^2 = 7 + beta
        let forced = SampledCoefficient {
            kind: SampledKind::Smooth {
                mean: *mean,
                modes: vec![(modes[0].clone(), 1.0)],
            },
            a_min: 0.0,
            a_max: 0.0,
        };
        let expect = 7.0 + beta;
        assert!((forced.eval([1.0, 1.0]) - expect).abs() < 1e-14);
        assert!((expect - 7.59157).abs() < 5e-4);
        // Y = 0: alpha = 5 + x + y, smallest at the origin
        let off = SampledCoefficient {
            kind: SampledKind::Smooth {
                mean: *mean,
                modes: vec![(modes[0].clone(), 0.0)],
            },
            a_min: 0.0,
            a_max: 0.0,
        };
        assert!((off.eval([0.3, 0.4]) - 5.7).abs() < 1e-14);
        let (lo, _) = realized_bounds(mean, &[(modes[0].clone(), 0.0)], ([0.0, 0.0], [1.0, 1.0]));
        assert!((lo - 5.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_regions_are_constant() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let model = RandomCoefficient::PiecewiseRegions {
            regions: vec![CoefficientRegion {
                polygon: square,
                lo: 1.0,
                hi: 1.0,
            }],
        };
        let a = model.sample(&stream(), 3, 11);
        assert_eq!(a.eval([0.5, 0.5]), 1.0);
        assert_eq!(a.a_min(), 1.0);
        assert_eq!(a.a_max(), 1.0);
    }

    #[test]
    fn same_key_reproduces_and_keys_differ() {
        let model = RandomCoefficient::smooth_benchmark();
        let a = model.sample(&stream(), 2, 5);
        let b = model.sample(&stream(), 2, 5);
        assert_eq!(a.eval([0.3, 0.8]).to_bits(), b.eval([0.3, 0.8]).to_bits());
        let c = model.sample(&stream(), 2, 6);
        assert_ne!(a.eval([0.3, 0.8]).to_bits(), c.eval([0.3, 0.8]).to_bits());
    }

    #[test]
    fn sample_mean_satisfies_clt_bound() {
        // 1e4 draws of U([-1,1]): mean within 3 sigma / sqrt(n) of 0
        let s = stream();
        let n = 10_000;
        let mean: f64 = (0..n).map(|i| s.uniform(0, i, 0, -1.0, 1.0)).sum::<f64>() / n as f64;
        let bound = 3.0 * (1.0 / 3.0f64.sqrt()) / 100.0;
        assert!(mean.abs() < bound, "mean {mean} exceeds CLT bound {bound}");
    }

    #[test]
    fn uniform_marginals_pass_ks_test() {
        // Kolmogorov-Smirnov against U([2, 5]) at the 1% level
        let s = stream();
        let n = 10_000;
        let mut draws: Vec<f64> = (0..n).map(|i| s.uniform(1, i, 3, 2.0, 5.0)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = (x - 2.0) / 3.0;
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((f - lo).abs()).max((hi - f).abs());
        }
        let critical = 1.6276 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} above the 1% critical value {critical}");
    }

    #[test]
    fn bounds_honesty_on_random_points() {
        let model = RandomCoefficient::smooth_benchmark();
        let s = stream();
        for sample in 0..20 {
            let a = model.sample(&s, 1, sample);
            for k in 0..1000 {
                let x = [s.uniform01(90, k, 0), s.uniform01(90, k, 1)];
                let v = a.eval(x);
                assert!(v >= a.a_min() - 1e-12 && v <= a.a_max() + 1e-12);
            }
        }
    }

    #[test]
    fn nonpositive_model_is_rejected() {
        let model = RandomCoefficient::SmoothKl {
            mean: [1.0, 0.0, 0.0],
            modes: vec![SineMode {
                beta: 2.0,
                lo: -1.0,
                hi: 1.0,
                omega: [1.0, 1.0],
                phase: [
                    core::f64::consts::FRAC_PI_2,
                    core::f64::consts::FRAC_PI_2,
                ],
            }],
            domain: ([0.0, 0.0], [1.0, 1.0]),
        };
        assert!(matches!(
            model.validate(),
            Err(ModelError::NonPositiveLowerBound { .. })
        ));
    }

    #[test]
    fn derived_streams_differ() {
        let s = stream();
        let r = s.derive(1);
        assert_ne!(s.uniform01(0, 0, 0).to_bits(), r.uniform01(0, 0, 0).to_bits());
    }
}
