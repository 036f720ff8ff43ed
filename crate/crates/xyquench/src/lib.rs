//! Entanglement dynamics of the anisotropic XY chain in a transverse field.

pub mod error;
pub mod groundstate;
pub mod isotropic;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod pfaffian;
pub mod scalar;
pub mod scenario;
pub mod special;
pub mod vacuum;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

/// Double-precision aliases for the generic types.
pub type Params = model::ModelParams<f64>;
pub type Contractions = vacuum::ContractionSet<f64>;
pub type Correlators = measures::CorrelatorBundle<f64>;
pub type Density2 = measures::TwoSiteDensity<f64>;
pub type Wavepacket = isotropic::SingleParticleState<f64>;
pub type PhiCoefficients = isotropic::PhiStateCoefficients<f64>;
pub type GroundStateTable = groundstate::GroundStateContraction<f64>;
pub type Skew = pfaffian::SkewMatrix<f64>;
pub type C64 = Complex<f64>;
