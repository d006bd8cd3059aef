pub mod cli;
pub mod cube;
pub mod error;
pub mod flat;
pub mod form;
pub mod poincare;
pub mod poly;
pub mod random;
pub mod rational;
pub mod supnorm;

pub use cube::Cube;
pub use error::{Error, Result};
pub use form::{MultiIndex, PolyForm};
pub use poly::Polynomial;
pub use rational::Rational;
