//! Two-mode q-deformed bi-coherent states for a noncommutative harmonic
//! oscillator: closed-form uncertainty products and commutator bounds, with
//! an independent truncated-matrix oracle verifying every identity.

pub mod cli;
pub mod error;
pub mod fock;
pub mod model;
pub mod oracle;
pub mod qmath;
pub mod series;
pub mod states;
pub mod uncertainty;

pub use error::{Error, Result};
pub use model::{derive_params, ModelParams, PhysicalInputs};
pub use qmath::QValue;
pub use series::Convention;
pub use states::CoherentLabel;
