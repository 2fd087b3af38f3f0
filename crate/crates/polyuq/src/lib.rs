//! Experiment drivers, file formats and the command line around the
//! `polyuq-core` solver: mesh files, run configuration, CSV/gnuplot
//! outputs, a thread-pool executor for the sample loops, and the batch
//! experiments reproducing the convergence and cost-accuracy studies.

pub mod config;
pub mod experiments;
pub mod fieldio;
pub mod meshio;
pub mod output;
pub mod threads;

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use threads::ThreadPool;
