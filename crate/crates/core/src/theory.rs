//! Theory contexts: which bath a resource theory models.
//!
//! A context fixes the representation (energy or entropy) and the values of
//! the bath's intensive variables. Energy-representation theories carry an
//! inverse temperature `beta` and one energy intensive variable `p_i` per
//! state operator `X_i`; the entropy theory carries nothing.
//!
//! Units: `k_B = 1`, natural logarithms. Entropy intensive variables follow
//! `F_0 = beta` and `F_i = -beta * p_i`.
//!
//! The number of independent intensive variables a physical bath admits is
//! governed by the Gibbs-Duhem relation. That relation is not enforced here;
//! any list of intensive values is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ThermoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Energy,
    Entropy,
}

/// An energy intensive variable `p_i` conjugate to the state operator `X_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intensive {
    pub label: String,
    pub value: f64,
}

impl Intensive {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
        }
    }
}

/// One thermodynamic resource theory, fixed by its representation and bath parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryContext {
    representation: Representation,
    beta: Option<f64>,
    intensive: Vec<Intensive>,
}

/// Validating constructor for [`TheoryContext`].
pub fn make_context(
    representation: Representation,
    beta: Option<f64>,
    intensive: Vec<Intensive>,
) -> Result<TheoryContext> {
    match representation {
        Representation::Entropy => {
            if beta.is_some() || !intensive.is_empty() {
                return Err(ThermoError::IntensivesInEntropyTheory);
            }
        }
        Representation::Energy => {
            let beta = beta.ok_or_else(|| ThermoError::MissingParameter("beta".into()))?;
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(ThermoError::NonPositiveBeta(beta));
            }
            for p in &intensive {
                if !p.value.is_finite() {
                    return Err(ThermoError::NonFinite(p.label.clone()));
                }
            }
        }
    }
    Ok(TheoryContext {
        representation,
        beta,
        intensive,
    })
}

impl TheoryContext {
    pub fn entropy() -> Self {
        Self {
            representation: Representation::Entropy,
            beta: None,
            intensive: Vec::new(),
        }
    }

    pub fn energy(beta: f64, intensive: Vec<Intensive>) -> Result<Self> {
        make_context(Representation::Energy, Some(beta), intensive)
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn is_entropy(&self) -> bool {
        self.representation == Representation::Entropy
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// `1 / beta`, or [`ThermoError::EntropyRepresentation`] for the entropy theory.
    pub fn temperature(&self) -> Result<f64> {
        self.beta
            .map(|b| 1.0 / b)
            .ok_or(ThermoError::EntropyRepresentation)
    }

    pub fn intensive(&self) -> &[Intensive] {
        &self.intensive
    }

    /// Number of state operators a system in this theory must carry:
    /// `j + 1` (energy operator first) in the energy representation, `0` otherwise.
    pub fn operator_count(&self) -> usize {
        match self.representation {
            Representation::Energy => self.intensive.len() + 1,
            Representation::Entropy => 0,
        }
    }

    /// Entropy intensive variables `(F_0, F_1, ..., F_j)`, aligned with the state operators.
    pub fn entropy_intensives(&self) -> Vec<f64> {
        match self.beta {
            None => Vec::new(),
            Some(beta) => std::iter::once(beta)
                .chain(self.intensive.iter().map(|p| -beta * p.value))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Entropy,
    Helmholtz,
    GrandPotential,
    Gibbs,
    Magnetic,
}

/// A particle species (or species in one phase) exchanged with a particle reservoir.
///
/// The effective chemical potential is `mu + mass * gravity * height + charge * electric_potential`:
/// gravitational and electrostatic energy fold into the chemical term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Species {
    pub label: String,
    pub mu: f64,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub height: f64,
    #[serde(default)]
    pub charge: f64,
    #[serde(default)]
    pub electric_potential: f64,
}

impl Species {
    pub fn new(label: impl Into<String>, mu: f64) -> Self {
        Self {
            label: label.into(),
            mu,
            ..Default::default()
        }
    }

    pub fn effective_mu(&self, gravity: f64) -> f64 {
        self.mu + self.mass * gravity * self.height + self.charge * self.electric_potential
    }
}

/// Parameters for [`preset`]. Only the fields relevant to the chosen kind are read.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetParams {
    pub beta: Option<f64>,
    pub species: Vec<Species>,
    /// Gravitational acceleration applied to every species' `mass * height`.
    pub gravity: f64,
    pub pressure: Option<f64>,
    /// Magnetic field components, each conjugate to one magnetic-moment operator.
    pub field: Vec<Intensive>,
}

/// Builds the context for a named ensemble.
///
/// * `helmholtz`: canonical, parameters `beta`.
/// * `grand_potential`: `beta` and one chemical potential per species (labels become intensive labels).
/// * `gibbs`: `beta` and pressure `p`; the intensive conjugate to volume is `-p`.
/// * `magnetic`: `beta` and field components `B_i`, conjugate to moment operators `M_i`.
pub fn preset(kind: PresetKind, params: &PresetParams) -> Result<TheoryContext> {
    let beta = || {
        params
            .beta
            .ok_or_else(|| ThermoError::MissingParameter("beta".into()))
    };
    match kind {
        PresetKind::Entropy => Ok(TheoryContext::entropy()),
        PresetKind::Helmholtz => TheoryContext::energy(beta()?, Vec::new()),
        PresetKind::GrandPotential => {
            if params.species.is_empty() {
                return Err(ThermoError::MissingParameter("mu".into()));
            }
            let intensive = params
                .species
                .iter()
                .map(|s| Intensive::new(s.label.clone(), s.effective_mu(params.gravity)))
                .collect();
            TheoryContext::energy(beta()?, intensive)
        }
        PresetKind::Gibbs => {
            let p = params
                .pressure
                .ok_or_else(|| ThermoError::MissingParameter("pressure".into()))?;
            TheoryContext::energy(beta()?, vec![Intensive::new("V", -p)])
        }
        PresetKind::Magnetic => {
            if params.field.is_empty() {
                return Err(ThermoError::MissingParameter("field".into()));
            }
            TheoryContext::energy(beta()?, params.field.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_context_has_no_parameters() {
        let ctx = make_context(Representation::Entropy, None, vec![]).unwrap();
        assert!(ctx.is_entropy());
        assert!(ctx.entropy_intensives().is_empty());
        assert_eq!(ctx.operator_count(), 0);
    }

    #[test]
    fn helmholtz_f0_is_beta() {
        let ctx = make_context(Representation::Energy, Some(1.0), vec![]).unwrap();
        assert_eq!(ctx.entropy_intensives(), vec![1.0]);
    }

    #[test]
    fn grand_potential_f1() {
        let ctx =
            make_context(Representation::Energy, Some(2.0), vec![Intensive::new("mu", 0.5)]).unwrap();
        assert_eq!(ctx.entropy_intensives(), vec![2.0, -1.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            make_context(Representation::Energy, Some(0.0), vec![]),
            Err(ThermoError::NonPositiveBeta(0.0))
        );
        assert!(matches!(
            make_context(Representation::Energy, Some(f64::INFINITY), vec![]),
            Err(ThermoError::NonPositiveBeta(_))
        ));
        assert_eq!(
            make_context(Representation::Entropy, None, vec![Intensive::new("mu", 1.0)]),
            Err(ThermoError::IntensivesInEntropyTheory)
        );
        assert_eq!(
            make_context(Representation::Entropy, Some(1.0), vec![]),
            Err(ThermoError::IntensivesInEntropyTheory)
        );
    }

    #[test]
    fn presets() {
        let params = PresetParams {
            beta: Some(1.0),
            ..Default::default()
        };
        let h = preset(PresetKind::Helmholtz, &params).unwrap();
        assert!(h.intensive().is_empty());

        let g = preset(
            PresetKind::Gibbs,
            &PresetParams {
                beta: Some(1.0),
                pressure: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(g.intensive()[0].value, -2.0);

        assert_eq!(
            preset(PresetKind::Helmholtz, &PresetParams::default()),
            Err(ThermoError::MissingParameter("beta".into()))
        );
        assert!(matches!(
            preset(PresetKind::GrandPotential, &params),
            Err(ThermoError::MissingParameter(_))
        ));
        assert!(preset(PresetKind::Entropy, &PresetParams::default())
            .unwrap()
            .is_entropy());
    }

    #[test]
    fn gravitational_shift_folds_into_mu() {
        let s = Species {
            label: "N".into(),
            mu: 0.3,
            mass: 2.0,
            height: 1.5,
            ..Default::default()
        };
        let ctx = preset(
            PresetKind::GrandPotential,
            &PresetParams {
                beta: Some(1.0),
                species: vec![s],
                gravity: 9.8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((ctx.intensive()[0].value - (0.3 + 2.0 * 9.8 * 1.5)).abs() < 1e-15);
    }
}
