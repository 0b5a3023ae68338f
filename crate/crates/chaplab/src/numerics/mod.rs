//! Shared numerical kernels: quadrature, root bracketing, cubic solves,
//! slope fitting.

pub mod cubic;
pub mod fit;
pub mod quad;
pub mod roots;
