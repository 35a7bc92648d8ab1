//! Generalized Gibbs (free) states.
//!
//! `g_alpha = exp(-sum_i F_i x_{i,alpha}) / Z` with `F_0 = beta` and `F_i = -beta p_i`.
//! The entropy theory has no exponent and its free state is uniform.

use crate::error::{Result, ThermoError};
use crate::state::{QuasiclassicalState, SystemSpec};
use crate::theory::TheoryContext;

/// `ln sum_i exp(x_i)`, shifted by the maximum. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn check_operator_count(spec: &SystemSpec, ctx: &TheoryContext) -> Result<()> {
    if spec.operators().len() != ctx.operator_count() {
        return Err(ThermoError::DimensionMismatch {
            expected: ctx.operator_count(),
            found: spec.operators().len(),
        });
    }
    Ok(())
}

/// Log Gibbs weight numerators `-sum_i F_i x_{i,alpha}` for each eigenstate.
pub fn gibbs_exponents(spec: &SystemSpec, ctx: &TheoryContext) -> Result<Vec<f64>> {
    check_operator_count(spec, ctx)?;
    let f = ctx.entropy_intensives();
    let mut exps = vec![0.0; spec.dim()];
    for (fi, op) in f.iter().zip(spec.operators()) {
        for (e, x) in exps.iter_mut().zip(&op.eigenvalues) {
            *e -= fi * x;
        }
    }
    if exps.iter().any(|e| !e.is_finite()) {
        return Err(ThermoError::NonFinite("Gibbs exponent".into()));
    }
    Ok(exps)
}

/// Unnormalized Gibbs weights `exp(-sum_i F_i x_{i,alpha})`.
pub fn gibbs_weights(spec: &SystemSpec, ctx: &TheoryContext) -> Result<Vec<f64>> {
    Ok(gibbs_exponents(spec, ctx)?.into_iter().map(f64::exp).collect())
}

/// `ln Z`, finite even when `Z` itself under- or overflows.
pub fn log_partition_function(spec: &SystemSpec, ctx: &TheoryContext) -> Result<f64> {
    Ok(log_sum_exp(&gibbs_exponents(spec, ctx)?))
}

/// `Z`, summed with the largest exponent factored out.
pub fn partition_function(spec: &SystemSpec, ctx: &TheoryContext) -> Result<f64> {
    let exps = gibbs_exponents(spec, ctx)?;
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(max.exp() * exps.iter().map(|e| (e - max).exp()).sum::<f64>())
}

/// Normalized free-state probabilities `g`.
pub fn gibbs_probabilities(spec: &SystemSpec, ctx: &TheoryContext) -> Result<Vec<f64>> {
    let exps = gibbs_exponents(spec, ctx)?;
    let ln_z = log_sum_exp(&exps);
    Ok(exps.into_iter().map(|e| (e - ln_z).exp()).collect())
}

/// The free state `G` on `spec`.
pub fn gibbs_state(spec: &SystemSpec, ctx: &TheoryContext) -> Result<QuasiclassicalState> {
    QuasiclassicalState::new(spec.clone(), gibbs_probabilities(spec, ctx)?)
}

/// The free state `G_R` paired with `R` (same system operators).
pub fn free_state_of(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<QuasiclassicalState> {
    gibbs_state(state.spec(), ctx)
}
