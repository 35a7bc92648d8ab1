//! JSON descriptors for contexts and states.
//!
//! A state file carries the system operators, the probability vector and,
//! optionally, the theory context it lives in:
//!
//! ```json
//! { "representation": "energy", "beta": 1.0, "intensive": [{"label": "N", "value": 0.5}],
//!   "operators": [{"label": "H", "eigenvalues": [0, 1]}, {"label": "N", "eigenvalues": [0, 1]}],
//!   "r": [0.9, 0.1] }
//! ```
//!
//! A context file is the same object without `operators` and `r`; any state
//! file also parses as a context file. Unknown fields are ignored.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ThermoError};
use crate::state::{Operator, QuasiclassicalState, SystemSpec};
use crate::theory::{make_context, Intensive, Representation, TheoryContext};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContextDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<Representation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub intensive: Vec<Intensive>,
}

impl ContextDescriptor {
    pub fn from_context(ctx: &TheoryContext) -> Self {
        Self {
            representation: Some(ctx.representation()),
            beta: ctx.beta(),
            intensive: ctx.intensive().to_vec(),
        }
    }

    /// Whether any context field was given at all.
    pub fn is_present(&self) -> bool {
        self.representation.is_some() || self.beta.is_some() || !self.intensive.is_empty()
    }

    /// Missing `representation` means energy when `beta` is given and entropy otherwise.
    pub fn to_context(&self) -> Result<TheoryContext> {
        let repr = self.representation.unwrap_or(if self.beta.is_some() {
            Representation::Energy
        } else {
            Representation::Entropy
        });
        make_context(repr, self.beta, self.intensive.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateDescriptor {
    #[serde(flatten)]
    pub context: ContextDescriptor,
    #[serde(default)]
    pub operators: Vec<Operator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonstate: Vec<Operator>,
}

impl StateDescriptor {
    pub fn from_state(state: &QuasiclassicalState, ctx: Option<&TheoryContext>) -> Self {
        Self {
            context: ctx.map(ContextDescriptor::from_context).unwrap_or_default(),
            operators: state.spec().operators().to_vec(),
            r: Some(state.probabilities().to_vec()),
            nonstate: state.spec().nonstate().to_vec(),
        }
    }

    /// Dimension from `r`, else from the first operator.
    pub fn dim(&self) -> Result<usize> {
        if let Some(r) = &self.r {
            return Ok(r.len());
        }
        self.operators
            .iter()
            .chain(&self.nonstate)
            .map(|op| op.eigenvalues.len())
            .next()
            .ok_or_else(|| ThermoError::MissingParameter("r or operators".into()))
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        SystemSpec::with_nonstate(self.dim()?, self.operators.clone(), self.nonstate.clone())
    }

    pub fn probabilities(&self) -> Result<&[f64]> {
        self.r.as_deref().ok_or_else(|| ThermoError::MissingParameter("r".into()))
    }

    pub fn to_state(&self) -> Result<QuasiclassicalState> {
        QuasiclassicalState::new(self.system_spec()?, self.probabilities()?.to_vec())
    }

    /// The embedded context, if the file carries one.
    pub fn embedded_context(&self) -> Result<Option<TheoryContext>> {
        if self.context.is_present() {
            self.context.to_context().map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Parse failures keep serde's line/column message.
pub fn parse_state(text: &str) -> std::result::Result<StateDescriptor, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn parse_context(text: &str) -> std::result::Result<ContextDescriptor, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfmt::to_json_string;

    #[test]
    fn state_round_trip() {
        let text = r#"{"representation":"energy","beta":1.5,"intensive":[{"label":"N","value":-0.25}],
            "operators":[{"label":"H","eigenvalues":[0,1,2]},{"label":"N","eigenvalues":[0,1,1]}],
            "r":[0.5,0.25,0.25],"comment":"ignored"}"#;
        let d = parse_state(text).unwrap();
        let ctx = d.embedded_context().unwrap().unwrap();
        assert_eq!(ctx.beta(), Some(1.5));
        let s = d.to_state().unwrap();
        let again = parse_state(&to_json_string(&StateDescriptor::from_state(&s, Some(&ctx))).unwrap()).unwrap();
        assert_eq!(again.to_state().unwrap(), s);
        assert_eq!(again.embedded_context().unwrap().unwrap(), ctx);
    }

    #[test]
    fn entropy_state_without_context() {
        let d = parse_state(r#"{"r":[1,0]}"#).unwrap();
        assert!(d.embedded_context().unwrap().is_none());
        assert_eq!(d.to_state().unwrap().dim(), 2);
        assert!(parse_context("{}").unwrap().to_context().unwrap().is_entropy());
    }

    #[test]
    fn bad_inputs() {
        assert!(parse_state("{").is_err());
        assert!(parse_state(r#"{"r":"x"}"#).is_err());
        assert!(parse_state("{}").unwrap().to_state().is_err());
        let d = parse_state(r#"{"operators":[{"label":"H","eigenvalues":[0,1]}],"r":[1]}"#).unwrap();
        assert!(d.to_state().is_err());
        let d = parse_state(r#"{"representation":"entropy","beta":1,"r":[1]}"#).unwrap();
        assert_eq!(d.embedded_context(), Err(ThermoError::IntensivesInEntropyTheory));
    }
}
