//! i.i.d. tensor powers `R^{(x)n}` grouped into type classes.
//!
//! Every outcome string of `n` copies with composition `k = (k_1, ..., k_d)`
//! has the same probability `prod r_a^{k_a}` and the same Gibbs weight
//! `prod g_a^{k_a}`, so one atom per composition, weighted by the multinomial
//! coefficient, carries everything a ratio-sorted greedy needs. All masses are
//! kept in log space; multiplicities overflow `f64` long before the class count
//! becomes a problem.

use statrs::function::gamma::ln_gamma;

use crate::error::{Result, ThermoError};
use crate::gibbs::{gibbs_exponents, log_sum_exp};
use crate::state::QuasiclassicalState;
use crate::theory::TheoryContext;

/// Default cap on the number of type classes materialized.
pub const DEFAULT_MAX_CLASSES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionLimits {
    pub max_classes: usize,
}

impl Default for CompressionLimits {
    fn default() -> Self {
        Self {
            max_classes: DEFAULT_MAX_CLASSES,
        }
    }
}

/// One type class: `multiplicity` strings, each with probability `r_value` and Gibbs weight `g_value`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassAtom {
    pub composition: Vec<u32>,
    pub ln_multiplicity: f64,
    pub ln_r: f64,
    pub ln_g: f64,
}

impl TypeClassAtom {
    pub fn multiplicity(&self) -> f64 {
        self.ln_multiplicity.exp()
    }

    pub fn r_value(&self) -> f64 {
        self.ln_r.exp()
    }

    pub fn g_value(&self) -> f64 {
        self.ln_g.exp()
    }

    /// `ln(multiplicity * r_value)`: log probability of the whole class.
    pub fn ln_class_r(&self) -> f64 {
        self.ln_multiplicity + self.ln_r
    }

    pub fn ln_class_g(&self) -> f64 {
        self.ln_multiplicity + self.ln_g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedState {
    pub n: usize,
    pub dim: usize,
    pub atoms: Vec<TypeClassAtom>,
}

impl CompressedState {
    pub fn total_probability(&self) -> f64 {
        let ln: Vec<f64> = self.atoms.iter().map(TypeClassAtom::ln_class_r).collect();
        log_sum_exp(&ln).exp()
    }

    pub fn total_gibbs_weight(&self) -> f64 {
        let ln: Vec<f64> = self.atoms.iter().map(TypeClassAtom::ln_class_g).collect();
        log_sum_exp(&ln).exp()
    }

    /// Class masses `(ln P_r(class), ln P_g(class))`.
    pub fn class_masses(&self) -> Vec<(f64, f64)> {
        self.atoms
            .iter()
            .map(|a| (a.ln_class_r(), a.ln_class_g()))
            .collect()
    }
}

/// `C(n + d - 1, d - 1)`, saturating.
pub fn type_class_count(n: usize, d: usize) -> usize {
    if d == 0 {
        return 0;
    }
    let k = (d - 1).min(n) as u128;
    let top = (n + d - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(top - i) / (i + 1);
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub fn tensor_power_compressed(state: &QuasiclassicalState, ctx: &TheoryContext, n: usize) -> Result<CompressedState> {
    tensor_power_compressed_with(state, ctx, n, CompressionLimits::default())
}

pub fn tensor_power_compressed_with(
    state: &QuasiclassicalState,
    ctx: &TheoryContext,
    n: usize,
    limits: CompressionLimits,
) -> Result<CompressedState> {
    if n == 0 {
        return Err(ThermoError::DimensionMismatch { expected: 1, found: 0 });
    }
    let d = state.dim();
    let classes = type_class_count(n, d);
    if classes > limits.max_classes {
        return Err(ThermoError::TooLarge {
            what: "type classes",
            size: classes,
            cap: limits.max_classes,
        });
    }
    let exps = gibbs_exponents(state.spec(), ctx)?;
    let ln_z = log_sum_exp(&exps);
    let ln_g: Vec<f64> = exps.iter().map(|e| e - ln_z).collect();
    let ln_r: Vec<f64> = state.probabilities().iter().map(|p| p.ln()).collect();
    let ln_n_fact = ln_factorial(n as u32);

    let mut atoms = Vec::with_capacity(classes);
    let mut comp = vec![0u32; d];
    enumerate_compositions(&mut comp, 0, n as u32, &mut |k| {
        let mut ln_mult = ln_n_fact;
        let (mut lr, mut lg) = (0.0, 0.0);
        for (a, &ka) in k.iter().enumerate() {
            if ka == 0 {
                continue;
            }
            ln_mult -= ln_factorial(ka);
            lr += ka as f64 * ln_r[a];
            lg += ka as f64 * ln_g[a];
        }
        atoms.push(TypeClassAtom {
            composition: k.to_vec(),
            ln_multiplicity: ln_mult,
            ln_r: lr,
            ln_g: lg,
        });
    });
    Ok(CompressedState { n, dim: d, atoms })
}

/// Visits every `k` with `sum k = remaining` over positions `pos..`, first coordinate descending.
fn enumerate_compositions(comp: &mut [u32], pos: usize, remaining: u32, visit: &mut impl FnMut(&[u32])) {
    if pos + 1 == comp.len() {
        comp[pos] = remaining;
        visit(comp);
        return;
    }
    for k in (0..=remaining).rev() {
        comp[pos] = k;
        enumerate_compositions(comp, pos + 1, remaining - k, visit);
    }
    comp[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SystemSpec;

    #[test]
    fn n1_reproduces_single_copy() {
        let ctx = TheoryContext::energy(1.0, vec![]).unwrap();
        let s = QuasiclassicalState::new(SystemSpec::with_energies(vec![0.0, 1.0, 2.0]).unwrap(), vec![0.5, 0.3, 0.2])
            .unwrap();
        let c = tensor_power_compressed(&s, &ctx, 1).unwrap();
        let g = crate::gibbs::gibbs_probabilities(s.spec(), &ctx).unwrap();
        assert_eq!(c.atoms.len(), 3);
        for (a, atom) in c.atoms.iter().enumerate() {
            assert!((atom.multiplicity() - 1.0).abs() < 1e-12);
            assert!((atom.r_value() - s.probabilities()[a]).abs() < 1e-15);
            assert!((atom.g_value() - g[a]).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_expansion() {
        let s = QuasiclassicalState::new(SystemSpec::bare(2).unwrap(), vec![0.5, 0.5]).unwrap();
        let c = tensor_power_compressed(&s, &TheoryContext::entropy(), 3).unwrap();
        let mults: Vec<f64> = c.atoms.iter().map(|a| a.multiplicity().round()).collect();
        assert_eq!(mults, vec![1.0, 3.0, 3.0, 1.0]);
        for a in &c.atoms {
            assert!((a.r_value() - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_probabilities_do_not_poison_logs() {
        let s = QuasiclassicalState::new(SystemSpec::bare(3).unwrap(), vec![1.0, 0.0, 0.0]).unwrap();
        let c = tensor_power_compressed(&s, &TheoryContext::entropy(), 4).unwrap();
        assert!(c.atoms.iter().all(|a| !a.ln_r.is_nan()));
        assert!((c.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_cap() {
        assert_eq!(type_class_count(3, 2), 4);
        assert_eq!(type_class_count(10, 3), 66);
        assert_eq!(type_class_count(0, 4), 1);
        let s = QuasiclassicalState::new(SystemSpec::bare(4).unwrap(), vec![0.25; 4]).unwrap();
        let err = tensor_power_compressed_with(&s, &TheoryContext::entropy(), 100, CompressionLimits { max_classes: 1000 })
            .unwrap_err();
        assert!(matches!(err, ThermoError::TooLarge { size: 176851, .. }));
    }
}
