//! Forms with bounded, possibly discontinuous coefficients sampled on a
//! regular grid: current pairings, mollification, polynomial fitting,
//! simplex integration, the flatness auditor and the iterative primitive.

pub mod fit;
pub mod flatness;
pub mod grid;
pub mod iterative;
pub mod mollify;
pub mod pairing;
pub mod simplex;

pub use fit::{fit_polynomial, PolynomialFit};
pub use flatness::{flatness_check, FlatnessOptions, FlatnessReport, Verdict};
pub use grid::{sample, GridForm, GridFormJson};
pub use iterative::{geometric_radii, iterative_primitive, IterativeOptions, IterativeOutcome, ResidualHistory, CONVERGED};
pub use mollify::{mollify, Mollifier};
pub use pairing::{current_pairing, locally_constant_check, weak_closedness_residual, weak_differential_pairing};
pub use simplex::{boundary, boundary_integral, integrate_over_simplex, Simplex};
