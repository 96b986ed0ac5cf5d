//! Dense numerical kernels: symmetric eigenvalues, linear solves, the group
//! inverse of `I - P`, and the tail threshold used by the interval procedure.

pub mod eigen;
pub mod group_inverse;
pub mod linalg;
pub mod tail;

pub use eigen::sym_eigenvalues;
pub use group_inverse::{group_inverse, sensitivity, AxiomResiduals, GroupInverse};
pub use linalg::{inverse, max_abs, solve_linear, spectral_norm, symmetrize, Lu};
pub use tail::{tail_bound, tail_threshold, PEELING_BASE};
