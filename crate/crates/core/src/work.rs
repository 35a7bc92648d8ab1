//! One-shot work yield and work cost, and the battery that stores the work.
//!
//! Work is in units where `k_B = 1`; the `1/beta` prefactor makes it an energy.
//!
//! * yield: `W_gain = D_H^eps(r || g) / beta`
//! * cost upper bound: `[D_H^{1-eps}(r || g) - ln((1-eps)/eps)] / beta`
//! * cost lower bound: `max_{delta in (0, 1-eps]} [D_H^{1-eps-delta}(r || g) - ln(1/delta)] / beta`,
//!   maximized over a logarithmic `delta` grid together with the kinks of the greedy profile.
//!
//! The upper bound is returned as the formula gives it, including negative
//! values for `eps` close to one.

use serde::Serialize;

use crate::convertibility::{can_convert, ConversionQuery};
use crate::error::{Result, ThermoError};
use crate::gibbs::{gibbs_exponents, log_sum_exp};
use crate::hypothesis::{relative_entropy_ln, shannon_entropy, TestingProfile};
use crate::state::{Operator, QuasiclassicalState, SystemSpec};
use crate::theory::TheoryContext;

/// Tolerance on `W <= W_gain` in [`battery_extract_check`].
pub const BATTERY_TOL: f64 = 1e-9;

/// `delta` values for the work-cost lower bound: both endpoints of `[min_fraction * (1-eps), 1-eps]`
/// plus `points` log-spaced values strictly between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGrid {
    pub points: usize,
    pub min_fraction: f64,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        Self {
            points: 512,
            min_fraction: 1e-12,
        }
    }
}

impl DeltaGrid {
    pub fn deltas(&self, epsilon: f64) -> Vec<f64> {
        let top = 1.0 - epsilon;
        let lo = self.min_fraction.ln();
        let mut out = Vec::with_capacity(self.points + 2);
        out.push(top * self.min_fraction);
        for k in 1..=self.points {
            let t = k as f64 / (self.points + 1) as f64;
            out.push(top * (lo * (1.0 - t)).exp());
        }
        out.push(top);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkReport {
    pub epsilon: f64,
    pub w_gain: f64,
    /// `None` at `epsilon = 0`, where the cost bounds are undefined.
    pub w_cost_lower: Option<f64>,
    pub w_cost_upper: Option<f64>,
}

/// Log free-state probabilities, computed without forming `Z`.
pub(crate) fn ln_gibbs(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<Vec<f64>> {
    let exps = gibbs_exponents(state.spec(), ctx)?;
    let ln_z = log_sum_exp(&exps);
    Ok(exps.into_iter().map(|e| e - ln_z).collect())
}

/// Greedy hypothesis-testing profile of `r` against its free state.
pub fn testing_profile(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<TestingProfile> {
    let ln_g = ln_gibbs(state, ctx)?;
    Ok(TestingProfile::from_log_masses(
        state.probabilities().iter().map(|p| p.ln()).zip(ln_g),
    ))
}

/// `D(r || g_R)`.
pub fn relative_entropy_to_free(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<f64> {
    Ok(relative_entropy_ln(state.probabilities(), &ln_gibbs(state, ctx)?))
}

fn check_gain_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(ThermoError::EpsilonOutOfRange(epsilon))
    }
}

fn check_cost_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(ThermoError::EpsilonOutOfRange(epsilon))
    }
}

pub fn w_gain(state: &QuasiclassicalState, ctx: &TheoryContext, epsilon: f64) -> Result<f64> {
    let temperature = ctx.temperature()?;
    check_gain_epsilon(epsilon)?;
    Ok(temperature * testing_profile(state, ctx)?.d_h(epsilon))
}

/// `(lower, upper)` bounds on the work cost of an `epsilon`-approximation, from a ready profile.
pub fn w_cost_bounds_from_profile(profile: &TestingProfile, temperature: f64, epsilon: f64, grid: &DeltaGrid) -> Result<(f64, f64)> {
    check_cost_epsilon(epsilon)?;
    let upper = temperature * (profile.d_h(1.0 - epsilon) - ((1.0 - epsilon) / epsilon).ln());
    let on_grid = grid.deltas(epsilon).into_iter().map(|delta| {
        let eta = (1.0 - epsilon - delta).max(0.0);
        temperature * (profile.d_h(eta) + delta.ln())
    });
    // Between kinks of b the objective is monotone in delta, so the kinks complete the search.
    let at_kinks = profile
        .breakpoints()
        .iter()
        .filter(|&&c| c > epsilon && c < 1.0)
        .map(|&c| temperature * (profile.d_h(1.0 - c) + (c - epsilon).ln()));
    let lower = on_grid.chain(at_kinks).fold(f64::NEG_INFINITY, f64::max);
    Ok((lower, upper))
}

pub fn w_cost_bounds(state: &QuasiclassicalState, ctx: &TheoryContext, epsilon: f64) -> Result<(f64, f64)> {
    w_cost_bounds_with(state, ctx, epsilon, &DeltaGrid::default())
}

pub fn w_cost_bounds_with(
    state: &QuasiclassicalState,
    ctx: &TheoryContext,
    epsilon: f64,
    grid: &DeltaGrid,
) -> Result<(f64, f64)> {
    let temperature = ctx.temperature()?;
    w_cost_bounds_from_profile(&testing_profile(state, ctx)?, temperature, epsilon, grid)
}

/// Yield and, for `epsilon > 0`, the cost bounds.
pub fn work_report(state: &QuasiclassicalState, ctx: &TheoryContext, epsilon: f64) -> Result<WorkReport> {
    let temperature = ctx.temperature()?;
    check_gain_epsilon(epsilon)?;
    let profile = testing_profile(state, ctx)?;
    report_from_profile(&profile, temperature, epsilon)
}

pub(crate) fn report_from_profile(profile: &TestingProfile, temperature: f64, epsilon: f64) -> Result<WorkReport> {
    let w_gain = temperature * profile.d_h(epsilon);
    let (w_cost_lower, w_cost_upper) = if epsilon > 0.0 {
        let (lo, hi) = w_cost_bounds_from_profile(profile, temperature, epsilon, &DeltaGrid::default())?;
        (Some(lo), Some(hi))
    } else {
        (None, None)
    };
    Ok(WorkReport {
        epsilon,
        w_gain,
        w_cost_lower,
        w_cost_upper,
    })
}

/// Entropy theory: `ln d - S(r)`, the resource content of `r` relative to the uniform state.
pub fn resource_yield(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<f64> {
    if !ctx.is_entropy() {
        return Err(ThermoError::EnergyRepresentation);
    }
    gibbs_exponents(state.spec(), ctx)?;
    Ok((state.dim() as f64).ln() - shannon_entropy(state.probabilities()))
}

/// A battery sitting in the energy eigenstate `|E>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    level_energy: f64,
}

impl BatteryState {
    pub fn new(level_energy: f64) -> Result<Self> {
        if !level_energy.is_finite() {
            return Err(ThermoError::NonFinite("battery level".into()));
        }
        Ok(Self { level_energy })
    }

    pub fn level_energy(&self) -> f64 {
        self.level_energy
    }

    /// Two-level ladder `{E, E + W}` with the labels of `like`; non-energy operators vanish on it.
    pub fn ladder(&self, w: f64, like: &SystemSpec) -> Result<SystemSpec> {
        let mut ops = Vec::with_capacity(like.operators().len());
        for (i, op) in like.operators().iter().enumerate() {
            let ev = if i == 0 {
                vec![self.level_energy, self.level_energy + w]
            } else {
                vec![0.0, 0.0]
            };
            ops.push(Operator::new(op.label.clone(), ev));
        }
        SystemSpec::new(2, ops)
    }

    /// `(B_E, B_{E+W})` on the ladder.
    pub fn transaction(&self, w: f64, like: &SystemSpec) -> Result<(QuasiclassicalState, QuasiclassicalState)> {
        let ladder = self.ladder(w, like)?;
        Ok((
            QuasiclassicalState::new(ladder.clone(), vec![1.0, 0.0])?,
            QuasiclassicalState::new(ladder, vec![0.0, 1.0])?,
        ))
    }
}

/// Can `W` be stored in the battery while `R` is consumed: `W <= W_gain^eps(R) + 1e-9`.
pub fn battery_extract_check(
    state: &QuasiclassicalState,
    battery: &BatteryState,
    w: f64,
    ctx: &TheoryContext,
    epsilon: f64,
) -> Result<bool> {
    let _ = battery;
    Ok(w <= w_gain(state, ctx, epsilon)? + BATTERY_TOL)
}

/// Exact-work route: decides `R + B_E -> B_{E+W}` with the convertibility machinery.
pub fn battery_extract_by_curves(
    state: &QuasiclassicalState,
    battery: &BatteryState,
    w: f64,
    ctx: &TheoryContext,
) -> Result<bool> {
    if ctx.is_entropy() {
        return Err(ThermoError::EntropyRepresentation);
    }
    let (low, high) = battery.transaction(w, state.spec())?;
    let q = ConversionQuery::new(state.compose(&low)?, high, ctx.clone())?;
    can_convert(&q)
}
