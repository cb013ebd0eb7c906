pub mod error;
pub mod inequalities;
pub mod model;
pub mod operators;
pub mod quadrature;
pub mod special_functions;
pub mod verify;
pub mod wavefunction;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use model::{ComplexTuple, Model, ModelParams};
pub use quadrature::{Estimate, QuadratureSpec};
pub use special_functions::Periods;
pub use wavefunction::WaveSpec;
