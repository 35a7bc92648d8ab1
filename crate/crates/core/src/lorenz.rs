//! Rescaled Lorenz curves.
//!
//! Eigenstates are sorted by decreasing `r_a / w_a`, where `w_a` is the
//! unnormalized Gibbs weight. The curve joins `(0, 0)` to the cumulative points
//! `(sum w, sum r)`, so it spans `[0, Z]` and is concave by construction.
//! One state can be turned into another by free operations exactly when its
//! curve never dips below the other's.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Result, ThermoError};
use crate::gibbs::gibbs_exponents;
use crate::numfmt::fmt_g17;
use crate::state::QuasiclassicalState;
use crate::theory::TheoryContext;

/// Absolute tolerance on curve heights when deciding domination.
pub const DOMINATION_TOL: f64 = 1e-12;
/// Relative tolerance on the widths of two curves being compared.
pub const WIDTH_TOL: f64 = 1e-9;
/// Margins smaller than this in magnitude are flagged as near-ties.
pub const NEAR_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    points: Vec<(f64, f64)>,
    width: f64,
    source_order: Vec<usize>,
}

/// Outcome of comparing two curves on the union of their breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    pub dominates: bool,
    /// `min (A(x) - B(x))` over interior breakpoints; `0` when there are none.
    pub min_margin: f64,
    /// The curves touch or almost cross inside the domain, so the verdict rests on the tolerance.
    pub near_tie: bool,
}

pub fn build_curve(state: &QuasiclassicalState, ctx: &TheoryContext) -> Result<LorenzCurve> {
    let exps = gibbs_exponents(state.spec(), ctx)?;
    let r = state.probabilities();
    // ln(r_a / w_a); ln 0 = -inf sorts last.
    let keys: Vec<f64> = r.iter().zip(&exps).map(|(p, e)| p.ln() - e).collect();
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| match keys[b].partial_cmp(&keys[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });

    let mut points = Vec::with_capacity(r.len() + 1);
    points.push((0.0, 0.0));
    let (mut x, mut y) = (0.0, 0.0);
    for &a in &order {
        x += exps[a].exp();
        y += r[a];
        points.push((x, y));
    }
    Ok(LorenzCurve {
        points,
        width: x,
        source_order: order,
    })
}

impl LorenzCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `Z`, the last breakpoint's abscissa.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn source_order(&self) -> &[usize] {
        &self.source_order
    }

    fn slack(&self) -> f64 {
        1e-12 * self.width.max(1.0)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= -self.slack() && x <= self.width + self.slack()) {
            return Err(ThermoError::OutOfDomain { x, width: self.width });
        }
        Ok(self.eval_clamped(x))
    }

    fn eval_clamped(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|p| p.0 < x);
        if i == 0 {
            return self.points[0].1;
        }
        if i >= self.points.len() {
            return self.points[self.points.len() - 1].1;
        }
        let (x0, y0) = self.points[i - 1];
        let (x1, y1) = self.points[i];
        if x1 <= x0 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Breakpoints as CSV with an `x,y` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for &(x, y) in &self.points {
            let _ = writeln!(out, "{},{}", fmt_g17(x), fmt_g17(y));
        }
        out
    }
}

pub fn compare(a: &LorenzCurve, b: &LorenzCurve) -> Result<DominanceReport> {
    let scale = a.width.max(b.width).max(1.0);
    if (a.width - b.width).abs() > WIDTH_TOL * scale {
        return Err(ThermoError::WidthMismatch(a.width, b.width));
    }
    let interior = |c: &LorenzCurve| {
        let n = c.points.len();
        c.points[1..n - 1].iter().map(|p| p.0).collect::<Vec<_>>()
    };
    let mut min_margin = f64::INFINITY;
    for x in interior(a).into_iter().chain(interior(b)) {
        min_margin = min_margin.min(a.eval_clamped(x) - b.eval_clamped(x));
    }
    // Endpoints agree up to normalization error.
    let end = a.points[a.points.len() - 1].1 - b.points[b.points.len() - 1].1;
    let endpoint_ok = end >= -DOMINATION_TOL;
    if min_margin == f64::INFINITY {
        min_margin = 0.0;
    }
    Ok(DominanceReport {
        dominates: endpoint_ok && min_margin >= -DOMINATION_TOL,
        min_margin,
        near_tie: min_margin.abs() <= NEAR_TIE_TOL,
    })
}

/// `A(x) >= B(x) - 1e-12` everywhere on `[0, Z]`.
pub fn dominates(a: &LorenzCurve, b: &LorenzCurve) -> Result<bool> {
    Ok(compare(a, b)?.dominates)
}
