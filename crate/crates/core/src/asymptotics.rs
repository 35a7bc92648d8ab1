//! Many-copy limits: the relative-entropy rate, AEP sweeps over compressed tensor powers,
//! conversion rates and the finite-`n` gap between work yield and work cost.

use serde::Serialize;

use crate::error::{Result, ThermoError};
use crate::gibbs::log_partition_function;
use crate::hypothesis::{shannon_entropy, TestingProfile};
use crate::state::QuasiclassicalState;
use crate::tensor_power::{tensor_power_compressed_with, CompressionLimits};
use crate::theory::TheoryContext;
use crate::work::{relative_entropy_to_free, w_cost_bounds_from_profile, DeltaGrid};

/// `D(s || g_S)` at or below this counts as equilibrium in [`conversion_rate`].
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

/// `<H> - T S(r) - sum_i p_i <X_i> + T ln Z`, which equals `T D(r || g_R)`.
pub fn free_energy_rate(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<f64> {
    let temperature = ctx.temperature()?;
    let ln_z = log_partition_function(state.spec(), ctx)?;
    let r = state.probabilities();
    let expect = |ev: &[f64]| -> f64 { r.iter().zip(ev).map(|(p, x)| p * x).sum() };
    let ops = state.spec().operators();
    let mut f = expect(&ops[0].eigenvalues);
    for (op, p) in ops[1..].iter().zip(ctx.intensive()) {
        f -= p.value * expect(&op.eigenvalues);
    }
    Ok(f - temperature * shannon_entropy(r) + temperature * ln_z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AepSweep {
    pub epsilon: f64,
    /// `(n, D_H^eps(r^n || g^n) / n)`, sorted by `n`.
    pub rows: Vec<(usize, f64)>,
    /// `D(r || g)`.
    pub limit: f64,
}

impl AepSweep {
    pub fn to_csv(&self) -> String {
        use crate::numfmt::fmt_g17;
        let mut out = String::from("n,per_copy_dh,limit\n");
        for &(n, v) in &self.rows {
            out.push_str(&format!("{n},{},{}\n", fmt_g17(v), fmt_g17(self.limit)));
        }
        out
    }
}

/// Greedy profile of `R^{(x)n}` against `G_R^{(x)n}`, one entry per type class.
pub fn power_profile(state: &QuasiclassicalState, ctx: &TheoryContext, n: usize, limits: CompressionLimits) -> Result<TestingProfile> {
    let compressed = tensor_power_compressed_with(state, ctx, n, limits)?;
    Ok(TestingProfile::from_log_masses(compressed.class_masses()))
}

pub fn aep_sweep(state: &QuasiclassicalState, ctx: &TheoryContext, epsilon: f64, n_list: &[usize]) -> Result<AepSweep> {
    aep_sweep_with(state, ctx, epsilon, n_list, CompressionLimits::default())
}

pub fn aep_sweep_with(
    state: &QuasiclassicalState,
    ctx: &TheoryContext,
    epsilon: f64,
    n_list: &[usize],
    limits: CompressionLimits,
) -> Result<AepSweep> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ThermoError::EpsilonOutOfRange(epsilon));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let profile = power_profile(state, ctx, n, limits)?;
        rows.push((n, profile.d_h(epsilon) / n as f64));
    }
    Ok(AepSweep {
        epsilon,
        rows,
        limit: relative_entropy_to_free(state, ctx)?,
    })
}

/// `D(r || g_R) / D(s || g_S)`: copies of `S` obtainable per copy of `R`.
pub fn conversion_rate(source: &QuasiclassicalState, target: &QuasiclassicalState, ctx: &TheoryContext) -> Result<f64> {
    let ds = relative_entropy_to_free(target, ctx)?;
    if ds.is_nan() || ds <= EQUILIBRIUM_TOL {
        return Err(ThermoError::TargetIsEquilibrium(ds));
    }
    Ok(relative_entropy_to_free(source, ctx)? / ds)
}

/// Totals for `n` copies: work yield and the cost bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteGap {
    pub n: usize,
    pub gain: f64,
    pub cost_lower: f64,
    pub cost_upper: f64,
}

pub fn finite_n_gap(state: &QuasiclassicalState, ctx: &TheoryContext, epsilon: f64, n: usize) -> Result<FiniteGap> {
    let temperature = ctx.temperature()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ThermoError::EpsilonOutOfRange(epsilon));
    }
    let profile = power_profile(state, ctx, n, CompressionLimits::default())?;
    let (cost_lower, cost_upper) = w_cost_bounds_from_profile(&profile, temperature, epsilon, &DeltaGrid::default())?;
    Ok(FiniteGap {
        n,
        gain: temperature * profile.d_h(epsilon),
        cost_lower,
        cost_upper,
    })
}
