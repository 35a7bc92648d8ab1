//! Hypothesis testing between a state `r` and its free state `g`.
//!
//! For commuting (diagonal) states the optimal test
//! `b_eps = min { g.q : r.q >= 1 - eps, 0 <= q <= 1 }` is a fractional knapsack:
//! accept outcomes in decreasing order of `r_a / g_a` until the accepted
//! `r`-mass reaches `1 - eps`, with at most one partially accepted outcome.
//! [`TestingProfile`] sorts once and answers any `eps` by binary search, in log
//! space so that tensor powers with astronomically small type-II errors stay finite.
//! [`vertex_oracle`] solves the same program by brute force and shares no code with it.

use std::cmp::Ordering;

use crate::error::{Result, ThermoError};
use crate::gibbs::log_sum_exp;
use crate::state::normalize_probabilities;

/// `ln(e^a + e^b)`.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(ThermoError::EpsilonOutOfRange(epsilon))
    }
}

/// A validated pair `(r, g)` and type-I error budget `epsilon in [0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisTest {
    r: Vec<f64>,
    g: Vec<f64>,
    epsilon: f64,
}

impl HypothesisTest {
    pub fn new(r: Vec<f64>, g: Vec<f64>, epsilon: f64) -> Result<Self> {
        if r.len() != g.len() {
            return Err(ThermoError::DimensionMismatch {
                expected: r.len(),
                found: g.len(),
            });
        }
        check_epsilon(epsilon)?;
        Ok(Self {
            r: normalize_probabilities(r)?,
            g: normalize_probabilities(g)?,
            epsilon,
        })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// A last fractional weight this close to one counts as selecting the entry whole.
const FULL_SELECTION_TOL: f64 = 1e-12;

/// Outcomes (or whole type classes) sorted for the greedy test, with prefix masses.
#[derive(Debug, Clone, PartialEq)]
pub struct TestingProfile {
    r_mass: Vec<f64>,
    ln_g_mass: Vec<f64>,
    /// `cum_r[k]`: `r`-mass of the first `k` entries.
    cum_r: Vec<f64>,
    /// `cum_ln_g[k]`: log `g`-mass of the first `k` entries.
    cum_ln_g: Vec<f64>,
    /// No entry was dropped, so the full selection carries all of `g`.
    complete: bool,
}

impl TestingProfile {
    pub fn from_probabilities(r: &[f64], g: &[f64]) -> Self {
        Self::from_log_masses(r.iter().zip(g).map(|(a, b)| (a.ln(), b.ln())))
    }

    /// Builds the profile from `(ln r-mass, ln g-mass)` pairs, with `g` normalized. Entries with zero
    /// `r`-mass are dropped: they never help meet the constraint.
    pub fn from_log_masses(masses: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut total = 0usize;
        let mut entries: Vec<(f64, f64, f64)> = masses
            .into_iter()
            .inspect(|_| total += 1)
            .filter(|(lr, _)| *lr > f64::NEG_INFINITY)
            .map(|(lr, lg)| (lr - lg, lr, lg))
            .collect();
        let complete = entries.len() == total;
        // Stable: equal ratios keep their original (lower index first) order.
        entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));

        let n = entries.len();
        let mut cum_r = Vec::with_capacity(n + 1);
        let mut cum_ln_g = Vec::with_capacity(n + 1);
        cum_r.push(0.0);
        cum_ln_g.push(f64::NEG_INFINITY);
        let (mut acc_r, mut acc_g) = (0.0, f64::NEG_INFINITY);
        let mut r_mass = Vec::with_capacity(n);
        let mut ln_g_mass = Vec::with_capacity(n);
        for (_, lr, lg) in entries {
            let r = lr.exp();
            acc_r += r;
            acc_g = ln_add(acc_g, lg);
            cum_r.push(acc_r);
            cum_ln_g.push(acc_g);
            r_mass.push(r);
            ln_g_mass.push(lg);
        }
        Self {
            r_mass,
            ln_g_mass,
            cum_r,
            cum_ln_g,
            complete,
        }
    }

    /// `ln b_eps`; `-inf` when no `g`-mass is needed.
    pub fn ln_b(&self, epsilon: f64) -> f64 {
        let target = 1.0 - epsilon;
        if target <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let n = self.r_mass.len();
        if epsilon <= 0.0 {
            // Exactly the whole support; summing r would leave rounding to decide.
            return if self.complete { 0.0 } else { self.cum_ln_g[n] };
        }
        // First entry whose inclusion reaches the target.
        let i = self.cum_r[1..].partition_point(|&c| c < target);
        let frac = if i < n {
            ((target - self.cum_r[i]) / self.r_mass[i]).clamp(0.0, 1.0)
        } else {
            // Rounding left the total r-mass a hair short: accept everything.
            1.0
        };
        if i + 1 >= n && frac >= 1.0 - FULL_SELECTION_TOL {
            return if self.complete { 0.0 } else { self.cum_ln_g[n] };
        }
        if frac == 0.0 {
            return self.cum_ln_g[i];
        }
        ln_add(self.cum_ln_g[i], frac.ln() + self.ln_g_mass[i])
    }

    /// Cumulative `r`-mass after each entry: the type-I budgets `1 - eps` at which `b_eps` has a kink.
    pub fn breakpoints(&self) -> &[f64] {
        &self.cum_r[1..]
    }

    /// `-ln b_eps`, never negative: `b_eps <= 1` holds exactly, rounding aside.
    pub fn d_h(&self, epsilon: f64) -> f64 {
        0.0 - self.ln_b(epsilon).min(0.0)
    }
}

/// Optimal type-II error `b_eps(r || g)` of the greedy test.
pub fn b_epsilon(t: &HypothesisTest) -> f64 {
    TestingProfile::from_probabilities(&t.r, &t.g).ln_b(t.epsilon).exp()
}

/// `D_H^eps(r || g) = -ln b_eps(r || g)`.
pub fn d_h_epsilon(t: &HypothesisTest) -> f64 {
    TestingProfile::from_probabilities(&t.r, &t.g).d_h(t.epsilon)
}

/// Largest dimension [`vertex_oracle`] accepts.
pub const VERTEX_ORACLE_MAX_DIM: usize = 18;

/// Brute-force `b_eps`: every vertex of `{0 <= q <= 1, r.q >= 1 - eps}` is a 0/1 pattern
/// plus at most one fractional coordinate; evaluate them all.
pub fn vertex_oracle(t: &HypothesisTest) -> Result<f64> {
    let d = t.r.len();
    if d > VERTEX_ORACLE_MAX_DIM {
        return Err(ThermoError::TooLarge {
            what: "vertex oracle dimension",
            size: d,
            cap: VERTEX_ORACLE_MAX_DIM,
        });
    }
    let target = 1.0 - t.epsilon;
    let subsets = 1usize << d;
    let mut rs = vec![0.0; subsets];
    let mut gs = vec![0.0; subsets];
    for mask in 1..subsets {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        rs[mask] = rs[rest] + t.r[low];
        gs[mask] = gs[rest] + t.g[low];
    }
    let mut best = f64::INFINITY;
    for mask in 0..subsets {
        if rs[mask] >= target - 1e-14 {
            best = best.min(gs[mask]);
            continue;
        }
        for j in (0..d).filter(|j| mask & (1 << j) == 0) {
            if t.r[j] <= 0.0 {
                continue;
            }
            let q = (target - rs[mask]) / t.r[j];
            if q <= 1.0 + 1e-12 {
                best = best.min(gs[mask] + q.min(1.0) * t.g[j]);
            }
        }
    }
    Ok(best)
}

/// `S(r) = -sum r ln r`, with `0 ln 0 = 0`.
pub fn shannon_entropy(r: &[f64]) -> f64 {
    -r.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

/// `D(r || g) = sum r (ln r - ln g)`; `+inf` when `supp r` is not inside `supp g`.
pub fn relative_entropy(r: &[f64], g: &[f64]) -> f64 {
    let ln_g: Vec<f64> = g.iter().map(|x| x.ln()).collect();
    relative_entropy_ln(r, &ln_g)
}

/// [`relative_entropy`] with `g` given by its logarithms.
pub fn relative_entropy_ln(r: &[f64], ln_g: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&p, &lg) in r.iter().zip(ln_g) {
        if p > 0.0 {
            if lg == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            acc += p * (p.ln() - lg);
        }
    }
    acc
}

/// `-ln sum_{a in supp r} g_a`, the `eps = 0` value of `D_H`.
pub fn min_relative_entropy(r: &[f64], g: &[f64]) -> f64 {
    let ln: Vec<f64> = r
        .iter()
        .zip(g)
        .filter(|(&p, _)| p > 0.0)
        .map(|(_, q)| q.ln())
        .collect();
    -log_sum_exp(&ln)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn test(r: &[f64], g: &[f64], eps: f64) -> HypothesisTest {
        HypothesisTest::new(r.to_vec(), g.to_vec(), eps).unwrap()
    }

    #[test]
    fn closed_form_probes() {
        assert!((b_epsilon(&test(&[0.3, 0.7], &[0.3, 0.7], 0.0)) - 1.0).abs() < 1e-15);
        let pure = test(&[1.0, 0.0], &[2.0 / 3.0, 1.0 / 3.0], 0.0);
        assert!((b_epsilon(&pure) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d_h_epsilon(&pure) - 1.5f64.ln()).abs() < 1e-15);
        let half = test(&[0.5, 0.5], &[0.5, 0.5], 0.5);
        assert!((b_epsilon(&half) - 0.5).abs() < 1e-15);
        assert!((d_h_epsilon(&half) - LN2).abs() < 1e-15);
        assert!(d_h_epsilon(&test(&[0.5, 0.5], &[0.5, 0.5], 0.0)).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_probes() {
        for t in [
            test(&[0.3, 0.7], &[0.3, 0.7], 0.0),
            test(&[1.0, 0.0], &[2.0 / 3.0, 1.0 / 3.0], 0.0),
            test(&[0.5, 0.5], &[0.5, 0.5], 0.5),
        ] {
            assert!((vertex_oracle(&t).unwrap() - b_epsilon(&t)).abs() < 1e-12);
        }
        for eps in [0.0, 0.2, 0.75, 0.999] {
            let t = test(&[1.0], &[1.0], eps);
            assert!((vertex_oracle(&t).unwrap() - (1.0 - eps)).abs() < 1e-15);
            assert!((b_epsilon(&t) - (1.0 - eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gibbs_weight_is_free() {
        let t = test(&[0.5, 0.5], &[0.0, 1.0], 0.5);
        assert_eq!(b_epsilon(&t), 0.0);
        assert_eq!(d_h_epsilon(&t), f64::INFINITY);
        assert_eq!(vertex_oracle(&t).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_range() {
        assert_eq!(
            HypothesisTest::new(vec![1.0], vec![1.0], 1.0),
            Err(ThermoError::EpsilonOutOfRange(1.0))
        );
        assert!(HypothesisTest::new(vec![1.0], vec![1.0], -0.1).is_err());
        assert!(HypothesisTest::new(vec![1.0], vec![0.5, 0.5], 0.1).is_err());
    }

    #[test]
    fn oracle_size_cap() {
        let r = vec![1.0 / 19.0; 19];
        let t = test(&r, &r, 0.1);
        assert!(matches!(vertex_oracle(&t), Err(ThermoError::TooLarge { .. })));
    }

    #[test]
    fn entropies() {
        let u = [0.25; 4];
        assert_eq!(relative_entropy(&u, &u), 0.0);
        assert!((relative_entropy(&[1.0, 0.0], &[0.5, 0.5]) - LN2).abs() < 1e-15);
        assert!((shannon_entropy(&[0.5, 0.5]) - LN2).abs() < 1e-15);
        assert_eq!(relative_entropy(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(shannon_entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn min_relative_entropy_matches_eps_zero() {
        let r = [0.6, 0.0, 0.4, 0.0];
        let g = [0.1, 0.2, 0.3, 0.4];
        let t = test(&r, &g, 0.0);
        assert!((d_h_epsilon(&t) - min_relative_entropy(&r, &g)).abs() < 1e-14);
        assert!((min_relative_entropy(&r, &g) + 0.4f64.ln()).abs() < 1e-15);
    }
}
