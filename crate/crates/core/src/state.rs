//! Systems and quasiclassical states.
//!
//! All operators of a system are jointly diagonal: the `alpha`-th eigenvalue of
//! every operator belongs to the same shared eigenstate `alpha`. A quasiclassical
//! state is then a probability vector over those eigenstates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ThermoError};

/// Tolerance on `|sum(r) - 1|` accepted as already normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Inputs within this distance of normalized are renormalized; worse ones are rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Entries at or below this value count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-15;

/// A diagonal operator given by its eigenvalues in the shared eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    pub label: String,
    pub eigenvalues: Vec<f64>,
}

impl Operator {
    pub fn new(label: impl Into<String>, eigenvalues: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            eigenvalues,
        }
    }
}

/// Dimension plus the eigenvalue table of the state operators (`H`, `X_1`, ..., `X_j`)
/// and, optionally, of behind-the-scenes non-state operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    dim: usize,
    operators: Vec<Operator>,
    nonstate: Vec<Operator>,
}

fn check_operator(op: &Operator, dim: usize) -> Result<()> {
    if op.eigenvalues.len() != dim {
        return Err(ThermoError::DimensionMismatch {
            expected: dim,
            found: op.eigenvalues.len(),
        });
    }
    if op.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(ThermoError::NonFinite(op.label.clone()));
    }
    Ok(())
}

impl SystemSpec {
    pub fn new(dim: usize, operators: Vec<Operator>) -> Result<Self> {
        Self::with_nonstate(dim, operators, Vec::new())
    }

    pub fn with_nonstate(dim: usize, operators: Vec<Operator>, nonstate: Vec<Operator>) -> Result<Self> {
        if dim == 0 {
            return Err(ThermoError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for op in operators.iter().chain(&nonstate) {
            check_operator(op, dim)?;
        }
        Ok(Self {
            dim,
            operators,
            nonstate,
        })
    }

    /// A system with no state operators (entropy theory).
    pub fn bare(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// A Helmholtz-style system carrying only the energy operator.
    pub fn with_energies(energies: Vec<f64>) -> Result<Self> {
        Self::new(energies.len(), vec![Operator::new("H", energies)])
    }

    /// The trivial one-dimensional system with the given labels and zero eigenvalues.
    pub fn trivial_like(other: &SystemSpec) -> Self {
        let zeros = |ops: &[Operator]| {
            ops.iter()
                .map(|op| Operator::new(op.label.clone(), vec![0.0]))
                .collect()
        };
        Self {
            dim: 1,
            operators: zeros(&other.operators),
            nonstate: zeros(&other.nonstate),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn nonstate(&self) -> &[Operator] {
        &self.nonstate
    }

    pub fn labels(&self) -> Vec<String> {
        self.operators.iter().map(|op| op.label.clone()).collect()
    }

    /// Reorders the shared eigenbasis: new index `k` takes old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dim)?;
        let apply = |ops: &[Operator]| {
            ops.iter()
                .map(|op| Operator::new(op.label.clone(), perm.iter().map(|&i| op.eigenvalues[i]).collect()))
                .collect()
        };
        Ok(Self {
            dim: self.dim,
            operators: apply(&self.operators),
            nonstate: apply(&self.nonstate),
        })
    }

    /// True when both systems have the same dimension, labels and eigenvalues
    /// (eigenvalues compared to `1e-12` relative).
    pub fn same_operators(&self, other: &SystemSpec) -> bool {
        self.dim == other.dim
            && self.operators.len() == other.operators.len()
            && self.operators.iter().zip(&other.operators).all(|(a, b)| {
                a.label == b.label
                    && a.eigenvalues
                        .iter()
                        .zip(&b.eigenvalues)
                        .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
            })
    }

    /// Composite system `A + B`: operators `X_A (x) 1 + 1 (x) X_B`, row-major index `a * d_B + b`.
    pub fn compose(&self, other: &SystemSpec) -> Result<Self> {
        let labels = |ops: &[Operator]| ops.iter().map(|o| o.label.clone()).collect::<Vec<_>>();
        if labels(&self.operators) != labels(&other.operators) {
            return Err(ThermoError::LabelMismatch {
                left: labels(&self.operators),
                right: labels(&other.operators),
            });
        }
        if labels(&self.nonstate) != labels(&other.nonstate) {
            return Err(ThermoError::LabelMismatch {
                left: labels(&self.nonstate),
                right: labels(&other.nonstate),
            });
        }
        let sum = |a: &[Operator], b: &[Operator]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| {
                    let ev = x
                        .eigenvalues
                        .iter()
                        .flat_map(|&xa| y.eigenvalues.iter().map(move |&yb| xa + yb))
                        .collect();
                    Operator::new(x.label.clone(), ev)
                })
                .collect()
        };
        Ok(Self {
            dim: self.dim * other.dim,
            operators: sum(&self.operators, &other.operators),
            nonstate: sum(&self.nonstate, &other.nonstate),
        })
    }
}

fn check_permutation(perm: &[usize], dim: usize) -> Result<()> {
    if perm.len() != dim {
        return Err(ThermoError::DimensionMismatch {
            expected: dim,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; dim];
    for &i in perm {
        if i >= dim || seen[i] {
            return Err(ThermoError::DimensionMismatch {
                expected: dim,
                found: i,
            });
        }
        seen[i] = true;
    }
    Ok(())
}

/// Checks a probability vector and renormalizes it if it is within `RENORMALIZE_TOL` of unit mass.
pub fn normalize_probabilities(mut r: Vec<f64>) -> Result<Vec<f64>> {
    for (index, &value) in r.iter().enumerate() {
        if !value.is_finite() {
            return Err(ThermoError::NonFinite("r".into()));
        }
        if value < 0.0 {
            return Err(ThermoError::NegativeProbability { index, value });
        }
    }
    let sum: f64 = r.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOL {
        return Err(ThermoError::NotNormalized(sum));
    }
    if sum != 1.0 {
        r.iter_mut().for_each(|x| *x /= sum);
    }
    Ok(r)
}

/// A state `R = (r, (H), X_1, ..., X_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiclassicalState {
    spec: SystemSpec,
    r: Vec<f64>,
}

impl QuasiclassicalState {
    pub fn new(spec: SystemSpec, r: Vec<f64>) -> Result<Self> {
        if r.len() != spec.dim() {
            return Err(ThermoError::DimensionMismatch {
                expected: spec.dim(),
                found: r.len(),
            });
        }
        let r = normalize_probabilities(r)?;
        Ok(Self { spec, r })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Same system, different probability vector.
    pub fn with_probabilities(&self, r: Vec<f64>) -> Result<Self> {
        Self::new(self.spec.clone(), r)
    }

    /// Simultaneously relabels `r` and every eigenvalue row.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let spec = self.spec.permuted(perm)?;
        let r = perm.iter().map(|&i| self.r[i]).collect();
        Ok(Self { spec, r })
    }

    /// `A + B`: product distribution on the composite system (row-major, left factor major).
    pub fn compose(&self, other: &QuasiclassicalState) -> Result<Self> {
        let spec = self.spec.compose(&other.spec)?;
        let r = kron(&self.r, &other.r);
        Ok(Self { spec, r })
    }

    /// `supp(r)` lies in one joint eigenspace of the non-state operators.
    pub fn validate_fixed_eigensubspace(&self) -> bool {
        self.spec.nonstate().iter().all(|op| {
            let mut support = self
                .r
                .iter()
                .zip(&op.eigenvalues)
                .filter(|(&p, _)| p > SUPPORT_THRESHOLD)
                .map(|(_, &x)| x);
            match support.next() {
                None => true,
                Some(first) => {
                    support.all(|x| (x - first).abs() <= 1e-12 * x.abs().max(first.abs()).max(1.0))
                }
            }
        })
    }
}

/// Row-major Kronecker product of two vectors.
pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(r: Vec<f64>, n: Vec<f64>) -> QuasiclassicalState {
        let spec = SystemSpec::with_nonstate(2, vec![], vec![Operator::new("N", n)]).unwrap();
        QuasiclassicalState::new(spec, r).unwrap()
    }

    #[test]
    fn fixed_eigensubspace_examples() {
        assert!(two_level(vec![1.0, 0.0], vec![5.0, 7.0]).validate_fixed_eigensubspace());
        assert!(!two_level(vec![0.5, 0.5], vec![5.0, 7.0]).validate_fixed_eigensubspace());
        assert!(two_level(vec![0.5, 0.5], vec![5.0, 5.0]).validate_fixed_eigensubspace());
    }

    #[test]
    fn no_nonstate_is_vacuously_fixed() {
        let s = QuasiclassicalState::new(SystemSpec::bare(2).unwrap(), vec![0.5, 0.5]).unwrap();
        assert!(s.validate_fixed_eigensubspace());
    }

    #[test]
    fn normalization_rules() {
        let spec = SystemSpec::bare(2).unwrap();
        let s = QuasiclassicalState::new(spec.clone(), vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = s.probabilities().iter().sum();
        assert!((sum - 1.0).abs() <= NORMALIZATION_TOL);
        assert!(matches!(
            QuasiclassicalState::new(spec.clone(), vec![0.5, 0.6]),
            Err(ThermoError::NotNormalized(_))
        ));
        assert!(matches!(
            QuasiclassicalState::new(spec.clone(), vec![1.1, -0.1]),
            Err(ThermoError::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(
            QuasiclassicalState::new(spec, vec![1.0]),
            Err(ThermoError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spec_rejects_bad_tables() {
        assert!(SystemSpec::new(2, vec![Operator::new("H", vec![0.0])]).is_err());
        assert_eq!(
            SystemSpec::new(1, vec![Operator::new("H", vec![f64::INFINITY])]),
            Err(ThermoError::NonFinite("H".into()))
        );
        assert!(SystemSpec::bare(0).is_err());
    }

    #[test]
    fn compose_is_row_major() {
        let a = QuasiclassicalState::new(SystemSpec::with_energies(vec![0.0, 1.0]).unwrap(), vec![0.25, 0.75])
            .unwrap();
        let b = QuasiclassicalState::new(SystemSpec::with_energies(vec![0.0, 10.0]).unwrap(), vec![0.5, 0.5])
            .unwrap();
        let c = a.compose(&b).unwrap();
        assert_eq!(c.dim(), 4);
        assert_eq!(c.probabilities(), &[0.125, 0.125, 0.375, 0.375]);
        assert_eq!(c.spec().operators()[0].eigenvalues, vec![0.0, 10.0, 1.0, 11.0]);
    }

    #[test]
    fn compose_with_trivial_is_identity() {
        let a = QuasiclassicalState::new(SystemSpec::with_energies(vec![0.0, 1.0, 3.0]).unwrap(), vec![0.2, 0.3, 0.5])
            .unwrap();
        let t = QuasiclassicalState::new(SystemSpec::trivial_like(a.spec()), vec![1.0]).unwrap();
        assert_eq!(a.compose(&t).unwrap(), a);
        assert_eq!(t.compose(&a).unwrap(), a);
    }

    #[test]
    fn compose_rejects_label_mismatch() {
        let a = QuasiclassicalState::new(SystemSpec::with_energies(vec![0.0]).unwrap(), vec![1.0]).unwrap();
        let b = QuasiclassicalState::new(SystemSpec::bare(1).unwrap(), vec![1.0]).unwrap();
        assert!(matches!(a.compose(&b), Err(ThermoError::LabelMismatch { .. })));
    }
}
