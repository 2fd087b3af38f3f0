//! Minimal dense and sparse linear algebra used by the element operators and
//! the global solver. Element matrices are small (a few dozen rows at most),
//! so a plain row-major buffer with direct factorizations is enough; the
//! global systems are symmetric positive definite and solved with
//! preconditioned conjugate gradients.

mod dense;
mod sparse;

pub use dense::Matrix;
pub use sparse::{CgFailure, CgOutcome, CsrMatrix};
