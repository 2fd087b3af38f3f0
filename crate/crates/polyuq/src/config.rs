//! Flat line-based run configuration: `key = value` pairs, `#` comments,
//! repeated `mode` / `region` lines for the coefficient model. Unknown keys
//! are rejected.

use std::fmt;
use std::path::PathBuf;

use polyuq_core::geometry::Rectangle;
use polyuq_core::stochastic::{CoefficientRegion, RandomCoefficient, SineMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    QoiConvergence,
    McConvergence,
    MlmcConvergence,
    SamplesTable,
    CostAccuracy,
    ValidateRegions,
}

impl Experiment {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "qoi-convergence" => Self::QoiConvergence,
            "mc-convergence" => Self::McConvergence,
            "mlmc-convergence" => Self::MlmcConvergence,
            "samples-table" => Self::SamplesTable,
            "cost-accuracy" => Self::CostAccuracy,
            "validate-regions" => Self::ValidateRegions,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::QoiConvergence => "qoi-convergence",
            Self::McConvergence => "mc-convergence",
            Self::MlmcConvergence => "mlmc-convergence",
            Self::SamplesTable => "samples-table",
            Self::CostAccuracy => "cost-accuracy",
            Self::ValidateRegions => "validate-regions",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Constant(f64),
    SmoothKl { mean: [f64; 3], modes: Vec<SineMode> },
    PiecewiseRegions { regions: Vec<CoefficientRegion> },
}

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Space orders to run.
    pub orders: Vec<usize>,
    /// 1-based hierarchy levels for the estimator experiments.
    pub levels: Vec<usize>,
    /// Cartesian cells per side for the deterministic convergence study.
    pub meshes: Vec<usize>,
    pub mesh_files: Vec<PathBuf>,
    pub seed: u64,
    pub epsilon: f64,
    pub threads: usize,
    pub sample_multiplier: f64,
    pub solver_tol: f64,
    pub domain: Rectangle,
    /// Cells per short side of the coarsest Cartesian level.
    pub mesh_n0: usize,
    /// Jittered nested-mesh sequence `(n0, levels, amplitude)` for the
    /// deterministic convergence study.
    pub mesh_jitter: Option<(usize, usize, f64)>,
    /// Number of leading (coarsest) meshes excluded from the rate fits.
    pub fit_from: usize,
    /// Mesh-size convention fed to the sample-count formulas: the element
    /// diameter, or half of it (the convention of the square-mesh
    /// benchmark, which quadruples the single-level counts at order 1).
    pub h_half_diagonal: bool,
    /// Levels for the single-level runs of the cost-accuracy study;
    /// defaults to `levels`.
    pub mc_levels: Vec<usize>,
    pub model: Option<ModelConfig>,
    /// Region regime for the validation experiment.
    pub regime: Option<String>,
    /// Raw text, hashed into the run manifest.
    pub raw: String,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Line { line: usize, message: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "io: {e}"),
            Self::Line { line, message } => write!(f, "config line {line}: {message}"),
            Self::Invalid(m) => write!(f, "config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn line_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut experiment: Option<Experiment> = None;
        let mut orders = vec![1usize];
        let mut levels: Vec<usize> = Vec::new();
        let mut meshes: Vec<usize> = Vec::new();
        let mut mesh_files: Vec<PathBuf> = Vec::new();
        let mut seed = 0u64;
        let mut epsilon = polyuq_core::estimators::DEFAULT_EPSILON;
        let mut threads = 1usize;
        let mut sample_multiplier = 1.0f64;
        let mut solver_tol = polyuq_core::vem::DEFAULT_SOLVER_TOL;
        let mut domain = Rectangle::UNIT;
        let mut mesh_n0 = 2usize;
        let mut mesh_jitter: Option<(usize, usize, f64)> = None;
        let mut fit_from = 0usize;
        let mut h_half_diagonal = false;
        let mut mc_levels: Vec<usize> = Vec::new();
        let mut mean: Option<[f64; 3]> = None;
        let mut modes: Vec<SineMode> = Vec::new();
        let mut regions: Vec<CoefficientRegion> = Vec::new();
        let mut model_kind: Option<String> = None;
        let mut constant_value: Option<f64> = None;
        let mut regime: Option<String> = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| line_err(ln, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "experiment" => {
                    experiment = Some(
                        Experiment::parse(value)
                            .ok_or_else(|| line_err(ln, format!("unknown experiment `{value}`")))?,
                    );
                }
                "p" => orders = parse_usize_list(ln, value)?,
                "levels" => levels = parse_level_range(ln, value)?,
                "meshes" => meshes = parse_usize_list(ln, value)?,
                "seed" => seed = value.parse().map_err(|_| line_err(ln, "bad seed"))?,
                "epsilon" => epsilon = parse_f64(ln, value)?,
                "threads" => threads = value.parse().map_err(|_| line_err(ln, "bad thread count"))?,
                "sample_multiplier" => sample_multiplier = parse_f64(ln, value)?,
                "solver_tol" => solver_tol = parse_f64(ln, value)?,
                "domain" => {
                    let v = parse_f64_list(ln, value)?;
                    if v.len() != 4 {
                        return Err(line_err(ln, "domain needs `x0 y0 x1 y1`"));
                    }
                    domain = Rectangle::new(v[0], v[1], v[2], v[3]);
                }
                "mesh" => {
                    let mut it = value.split_whitespace();
                    match it.next() {
                        Some("cartesian") => {
                            let n = it
                                .next()
                                .ok_or_else(|| line_err(ln, "mesh = cartesian <n0>"))?;
                            mesh_n0 = n.parse().map_err(|_| line_err(ln, "bad cell count"))?;
                        }
                        Some("files") => {
                            mesh_files = it.map(PathBuf::from).collect();
                            if mesh_files.is_empty() {
                                return Err(line_err(ln, "mesh = files <path...>"));
                            }
                        }
                        Some("jittered") => {
                            let args: Vec<&str> = it.collect();
                            if args.len() != 3 {
                                return Err(line_err(ln, "mesh = jittered <n0> <levels> <amplitude>"));
                            }
                            let n0 = args[0].parse().map_err(|_| line_err(ln, "bad cell count"))?;
                            let lv = args[1].parse().map_err(|_| line_err(ln, "bad level count"))?;
                            let amp = parse_f64(ln, args[2])?;
                            mesh_jitter = Some((n0, lv, amp));
                        }
                        _ => {
                            return Err(line_err(
                                ln,
                                "mesh = cartesian <n0> | files <path...> | jittered <n0> <levels> <amplitude>",
                            ))
                        }
                    }
                }
                "model" => {
                    let mut it = value.split_whitespace();
                    match it.next() {
                        Some("constant") => {
                            model_kind = Some("constant".into());
                            let v = it
                                .next()
                                .ok_or_else(|| line_err(ln, "model = constant <value>"))?;
                            constant_value = Some(parse_f64(ln, v)?);
                        }
                        Some(k @ ("smooth-kl" | "piecewise-regions")) => {
                            model_kind = Some(k.to_string())
                        }
                        _ => {
                            return Err(line_err(
                                ln,
                                "model = constant <v> | smooth-kl | piecewise-regions",
                            ))
                        }
                    }
                }
                "mean" => {
                    let v = parse_f64_list(ln, value)?;
                    if v.len() != 3 {
                        return Err(line_err(ln, "mean needs `c0 cx cy`"));
                    }
                    mean = Some([v[0], v[1], v[2]]);
                }
                "mode" => {
                    let v = parse_f64_list(ln, value)?;
                    if v.len() != 7 {
                        return Err(line_err(
                            ln,
                            "mode needs `beta lo hi omega_x phase_x omega_y phase_y`",
                        ));
                    }
                    modes.push(SineMode {
                        beta: v[0],
                        lo: v[1],
                        hi: v[2],
                        omega: [v[3], v[5]],
                        phase: [v[4], v[6]],
                    });
                }
                "region" => {
                    let (range, poly) = value
                        .split_once(':')
                        .ok_or_else(|| line_err(ln, "region = <lo> <hi> : x0 y0 x1 y1 ..."))?;
                    let r = parse_f64_list(ln, range)?;
                    let p = parse_f64_list(ln, poly)?;
                    if r.len() != 2 || p.len() < 6 || p.len() % 2 != 0 {
                        return Err(line_err(ln, "region = <lo> <hi> : x0 y0 x1 y1 ..."));
                    }
                    regions.push(CoefficientRegion {
                        polygon: p.chunks(2).map(|c| [c[0], c[1]]).collect(),
                        lo: r[0],
                        hi: r[1],
                    });
                }
                "h_convention" => {
                    h_half_diagonal = match value {
                        "diameter" => false,
                        "half-diagonal" => true,
                        other => {
                            return Err(line_err(ln, format!("unknown h convention `{other}`")))
                        }
                    }
                }
                "mc_levels" => mc_levels = parse_level_range(ln, value)?,
                "fit_from" => {
                    fit_from = value.parse().map_err(|_| line_err(ln, "bad fit_from"))?
                }
                "regime" => regime = Some(value.to_string()),
                other => return Err(line_err(ln, format!("unknown key `{other}`"))),
            }
        }

        let experiment =
            experiment.ok_or_else(|| ConfigError::Invalid("missing `experiment`".into()))?;
        let model = match model_kind.as_deref() {
            None => None,
            Some("constant") => Some(ModelConfig::Constant(constant_value.unwrap())),
            Some("smooth-kl") => Some(ModelConfig::SmoothKl {
                mean: mean
                    .ok_or_else(|| ConfigError::Invalid("smooth-kl model needs `mean`".into()))?,
                modes,
            }),
            Some("piecewise-regions") => {
                if regions.is_empty() {
                    return Err(ConfigError::Invalid(
                        "piecewise-regions model needs `region` lines".into(),
                    ));
                }
                Some(ModelConfig::PiecewiseRegions { regions })
            }
            Some(_) => unreachable!(),
        };

        let config = Self {
            experiment,
            orders,
            levels,
            meshes,
            mesh_files,
            mesh_jitter,
            fit_from,
            h_half_diagonal,
            mc_levels,
            seed,
            epsilon,
            threads,
            sample_multiplier,
            solver_tol,
            domain,
            mesh_n0,
            model,
            regime,
            raw: text.to_string(),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.orders.is_empty() || self.orders.iter().any(|&p| p == 0 || p > 6) {
            return Err(ConfigError::Invalid("p must list orders in 1..=6".into()));
        }
        if !(self.solver_tol > 0.0) || !(self.epsilon > 0.0) {
            return Err(ConfigError::Invalid(
                "solver_tol and epsilon must be positive".into(),
            ));
        }
        match self.experiment {
            Experiment::QoiConvergence => {
                if self.meshes.is_empty() && self.mesh_files.is_empty() && self.mesh_jitter.is_none()
                {
                    return Err(ConfigError::Invalid(
                        "qoi-convergence needs `meshes`, `mesh = files ...` or `mesh = jittered ...`"
                            .into(),
                    ));
                }
            }
            Experiment::McConvergence
            | Experiment::MlmcConvergence
            | Experiment::SamplesTable
            | Experiment::CostAccuracy => {
                if self.levels.is_empty() {
                    return Err(ConfigError::Invalid("estimator runs need `levels`".into()));
                }
            }
            Experiment::ValidateRegions => {
                if self.levels.is_empty() {
                    return Err(ConfigError::Invalid("validate-regions needs `levels`".into()));
                }
                let has_custom = matches!(self.model, Some(ModelConfig::PiecewiseRegions { .. }));
                let has_regime = matches!(self.regime.as_deref(), Some("uniform" | "hetero" | "both"));
                if !has_custom && !has_regime {
                    return Err(ConfigError::Invalid(
                        "validate-regions needs `regime = uniform|hetero|both` or a custom region model"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Builds the coefficient model, validated.
    pub fn coefficient(&self) -> Result<RandomCoefficient, ConfigError> {
        let model = match &self.model {
            Some(ModelConfig::Constant(v)) => RandomCoefficient::deterministic(*v),
            Some(ModelConfig::SmoothKl { mean, modes }) => RandomCoefficient::SmoothKl {
                mean: *mean,
                modes: modes.clone(),
                domain: (
                    [self.domain.x0, self.domain.y0],
                    [self.domain.x1, self.domain.y1],
                ),
            },
            Some(ModelConfig::PiecewiseRegions { regions }) => {
                RandomCoefficient::PiecewiseRegions {
                    regions: regions.clone(),
                }
            }
            None => {
                return Err(ConfigError::Invalid(
                    "this experiment needs a `model` block".into(),
                ))
            }
        };
        model
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(model)
    }

    /// FNV-1a hash of the raw configuration text.
    pub fn hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for b in self.raw.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

fn parse_f64(line: usize, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| line_err(line, format!("bad number `{v}`")))
}

fn parse_f64_list(line: usize, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(line, t))
        .collect()
}

fn parse_usize_list(line: usize, v: &str) -> Result<Vec<usize>, ConfigError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| line_err(line, format!("bad integer `{t}`")))
        })
        .collect()
}

/// `1..5` (inclusive) or an explicit list `1,2,3`.
fn parse_level_range(line: usize, v: &str) -> Result<Vec<usize>, ConfigError> {
    if let Some((a, b)) = v.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|_| line_err(line, "bad level range"))?;
        let hi: usize = b
            .trim()
            .parse()
            .map_err(|_| line_err(line, "bad level range"))?;
        if lo == 0 || hi < lo {
            return Err(line_err(line, "levels are 1-based and increasing"));
        }
        Ok((lo..=hi).collect())
    } else {
        let list = parse_usize_list(line, v)?;
        if list.iter().any(|&l| l == 0) {
            return Err(line_err(line, "levels are 1-based"));
        }
        Ok(list)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# benchmark run
experiment = mlmc-convergence
p = 1,2
levels = 1..5
seed = 42
epsilon = 1e-10
threads = 4
model = smooth-kl
mean = 5 1 1
mode = 0.59 -1 1 0.785398 0.785398 0.785398 0.785398
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::MlmcConvergence);
        assert_eq!(cfg.orders, vec![1, 2]);
        assert_eq!(cfg.levels, vec![1, 2, 3, 4, 5]);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.coefficient().is_ok());
        assert_ne!(cfg.hash(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "experiment = samples-table\nlevels = 1..3\nbogus = 1\n";
        match ExperimentConfig::parse(text) {
            Err(ConfigError::Line { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn missing_requirements_are_reported() {
        assert!(ExperimentConfig::parse("experiment = qoi-convergence\n").is_err());
        assert!(ExperimentConfig::parse("p = 1\n").is_err());
        let bad_regions = "experiment = validate-regions\nlevels = 1..2\n";
        assert!(ExperimentConfig::parse(bad_regions).is_err());
    }

    #[test]
    fn region_lines_build_a_piecewise_model() {
        let text = "\
experiment = validate-regions
levels = 1..2
domain = 0 0 4 1
mesh = cartesian 4
model = piecewise-regions
region = 1 10 : 0 0 4 0 4 0.5 0 0.5
region = 1 10 : 0 0.5 4 0.5 4 1 0 1
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let model = cfg.coefficient().unwrap();
        assert_eq!(model.variables(), 2);
    }
}
