//! Resource theories of thermodynamics with arbitrary conserved quantities, restricted to
//! quasiclassical states: free states, thermo-majorization, one-shot work and asymptotic rates.

pub mod asymptotics;
pub mod cli;
pub mod convertibility;
pub mod descriptor;
pub mod error;
pub mod gibbs;
pub mod hypothesis;
pub mod lorenz;
pub mod numfmt;
pub mod simplex;
pub mod state;
pub mod tensor_power;
pub mod theory;
pub mod work;

pub use error::{Result, ThermoError};
pub use state::{Operator, QuasiclassicalState, SystemSpec};
pub use theory::{Intensive, Representation, TheoryContext};
