pub mod energy;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod roots;

pub use equilibria::{
    AlphaRoots, AlphaSides, CriticalSet, FullySupportedState, Settings, SingularState,
    SphereModel, UniformState,
};
pub use energy::{Branch, EnergyReport, G1G2Value, StabilityCheck};
pub use error::{Error, Result};
pub use model::{classify_regime, ModelParams, Regime, RegimeCase};
