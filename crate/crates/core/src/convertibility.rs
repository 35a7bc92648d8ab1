//! Single-shot convertibility under free (equilibrating) operations.
//!
//! `R -> S` is possible exactly when some column-stochastic matrix that fixes
//! the free state maps `r` to `s` (equimajorization). Two routes decide it:
//!
//! * [`can_convert`] compares rescaled Lorenz curves, `O(d log d)`.
//! * [`feasibility_oracle`] solves the linear feasibility problem directly and
//!   returns the matrix. It is size-capped and exists to cross-check the curves.
//!
//! When the states carry different operators, `R'` is padded with the free
//! state of `S'` and `S'` with the free state of `R'`, and the composites are
//! compared on the joint system.

use serde::Serialize;

use crate::error::{Result, ThermoError};
use crate::gibbs::{gibbs_exponents, gibbs_probabilities, gibbs_state};
use crate::lorenz::{build_curve, compare, DominanceReport};
use crate::simplex::{solve, LinearProgram, LpOutcome};
use crate::state::{kron, QuasiclassicalState};
use crate::theory::TheoryContext;

/// Environment variable overriding [`OracleLimits::max_side_dim`].
pub const MAX_DIM_ENV: &str = "THERMOFLOW_MAX_DIM";
pub const DEFAULT_MAX_SIDE_DIM: usize = 12;
/// Witness entries, column sums and mapped vectors are checked to this tolerance.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest dimension allowed for either state.
    pub max_side_dim: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_side_dim: DEFAULT_MAX_SIDE_DIM,
        }
    }
}

impl OracleLimits {
    /// Defaults, overridden by `THERMOFLOW_MAX_DIM` when it parses as a positive integer.
    pub fn from_env() -> Self {
        std::env::var(MAX_DIM_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&d| d > 0)
            .map(|max_side_dim| Self { max_side_dim })
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionQuery {
    pub source: QuasiclassicalState,
    pub target: QuasiclassicalState,
    pub ctx: TheoryContext,
}

impl ConversionQuery {
    /// Both states must be valid systems of `ctx` and carry the same operator labels.
    pub fn new(source: QuasiclassicalState, target: QuasiclassicalState, ctx: TheoryContext) -> Result<Self> {
        for (name, s) in [("source", &source), ("target", &target)] {
            gibbs_exponents(s.spec(), &ctx).map_err(|e| ThermoError::ContextMismatch(format!("{name}: {e}")))?;
        }
        if source.spec().labels() != target.spec().labels() {
            return Err(ThermoError::ContextMismatch(format!(
                "operator labels {:?} vs {:?}",
                source.spec().labels(),
                target.spec().labels()
            )));
        }
        Ok(Self { source, target, ctx })
    }

    /// Source and target live on the same system (same dimension and eigenvalue table).
    pub fn shares_operators(&self) -> bool {
        self.source.spec().same_operators(self.target.spec())
    }

    /// The vectors the equistochastic matrix must relate: `(input, output, free)`.
    /// Same system: `(r, s, g)`. Otherwise `(r' (x) g_S, g_R (x) s', g_R (x) g_S)`.
    pub fn comparison_vectors(&self) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let g_r = gibbs_probabilities(self.source.spec(), &self.ctx)?;
        if self.shares_operators() {
            return Ok((
                self.source.probabilities().to_vec(),
                self.target.probabilities().to_vec(),
                g_r,
            ));
        }
        let g_s = gibbs_probabilities(self.target.spec(), &self.ctx)?;
        Ok((
            kron(self.source.probabilities(), &g_s),
            kron(&g_r, self.target.probabilities()),
            kron(&g_r, &g_s),
        ))
    }

    /// The pair of states whose curves are compared.
    fn comparison_states(&self) -> Result<(QuasiclassicalState, QuasiclassicalState)> {
        if self.shares_operators() {
            return Ok((self.source.clone(), self.target.clone()));
        }
        let mismatch = |e: ThermoError| ThermoError::ContextMismatch(e.to_string());
        let g_source = gibbs_state(self.source.spec(), &self.ctx)?;
        let g_target = gibbs_state(self.target.spec(), &self.ctx)?;
        let left = self.source.compose(&g_target).map_err(mismatch)?;
        let right = g_source.compose(&self.target).map_err(mismatch)?;
        Ok((left, right))
    }

    fn check_limits(&self, limits: OracleLimits) -> Result<()> {
        for s in [&self.source, &self.target] {
            if s.dim() > limits.max_side_dim {
                return Err(ThermoError::TooLarge {
                    what: "state dimension",
                    size: s.dim(),
                    cap: limits.max_side_dim,
                });
            }
        }
        Ok(())
    }
}

/// Curve comparison with the near-tie diagnostic.
pub fn conversion_report(q: &ConversionQuery) -> Result<DominanceReport> {
    let (left, right) = q.comparison_states()?;
    compare(&build_curve(&left, &q.ctx)?, &build_curve(&right, &q.ctx)?)
}

pub fn can_convert(q: &ConversionQuery) -> Result<bool> {
    Ok(conversion_report(q)?.dominates)
}

/// Always takes the composite route, even for states on the same system.
pub fn can_convert_composed(q: &ConversionQuery) -> Result<bool> {
    let g_source = gibbs_state(q.source.spec(), &q.ctx)?;
    let g_target = gibbs_state(q.target.spec(), &q.ctx)?;
    let mismatch = |e: ThermoError| ThermoError::ContextMismatch(e.to_string());
    let left = q.source.compose(&g_target).map_err(mismatch)?;
    let right = g_source.compose(&q.target).map_err(mismatch)?;
    compare(&build_curve(&left, &q.ctx)?, &build_curve(&right, &q.ctx)?).map(|r| r.dominates)
}

/// A `rows x cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl WitnessMatrix {
    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1.0;
        }
        Self {
            rows: d,
            cols: d,
            entries,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Largest violation of: entries in `[0, 1]`, unit column sums, `M free = free_out`, `M input = output`.
    pub fn max_violation(&self, input: &[f64], output: &[f64], free_in: &[f64], free_out: &[f64]) -> f64 {
        let entry = self
            .entries
            .iter()
            .map(|&m| (-m).max(m - 1.0).max(0.0))
            .fold(0.0, f64::max);
        let cols = self.column_sums().iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
        let diff = |a: Vec<f64>, b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        entry
            .max(cols)
            .max(diff(self.apply(free_in), free_out))
            .max(diff(self.apply(input), output))
    }
}

/// Rows of the equistochastic constraints on `M` (out x in, row-major), plus their right-hand sides.
fn equistochastic_rows(input: &[f64], output: &[f64], free: &[f64], extra_cols: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (d_out, d_in) = (output.len(), input.len());
    let width = d_out * d_in + extra_cols;
    let mut rows = Vec::with_capacity(d_in + 2 * d_out);
    let mut rhs = Vec::with_capacity(d_in + 2 * d_out);
    for j in 0..d_in {
        let mut row = vec![0.0; width];
        for i in 0..d_out {
            row[i * d_in + j] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }
    for i in 0..d_out {
        let mut row = vec![0.0; width];
        row[i * d_in..(i + 1) * d_in].copy_from_slice(free);
        rows.push(row);
        rhs.push(free[i]);
    }
    for i in 0..d_out {
        let mut row = vec![0.0; width];
        row[i * d_in..(i + 1) * d_in].copy_from_slice(input);
        rows.push(row);
        rhs.push(output[i]);
    }
    (rows, rhs)
}

pub fn feasibility_oracle(q: &ConversionQuery) -> Result<Option<WitnessMatrix>> {
    feasibility_oracle_with(q, OracleLimits::default())
}

/// Searches for `M >= 0` with unit column sums, `M g = g` and `M r = s`.
pub fn feasibility_oracle_with(q: &ConversionQuery, limits: OracleLimits) -> Result<Option<WitnessMatrix>> {
    q.check_limits(limits)?;
    let (input, output, free) = q.comparison_vectors()?;
    if q.shares_operators() {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15);
        // r -> r: identity. r -> g: every column is g.
        let direct = if close(&input, &output) {
            Some(WitnessMatrix::identity(input.len()))
        } else if close(&output, &free) {
            Some(WitnessMatrix {
                rows: free.len(),
                cols: free.len(),
                entries: free.iter().flat_map(|&gi| std::iter::repeat_n(gi, free.len())).collect(),
            })
        } else {
            None
        };
        if let Some(m) = direct {
            return Ok(Some(m));
        }
    }
    let (rows, rhs) = equistochastic_rows(&input, &output, &free, 0);
    let lp = LinearProgram {
        objective: vec![0.0; output.len() * input.len()],
        rows,
        rhs,
    };
    match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            let m = WitnessMatrix {
                rows: output.len(),
                cols: input.len(),
                entries: x,
            };
            let violation = m.max_violation(&input, &output, &free, &free);
            if violation > WITNESS_TOL {
                return Err(ThermoError::Solver(format!(
                    "witness violates constraints by {violation:e}"
                )));
            }
            Ok(Some(m))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded => Err(ThermoError::Solver("feasibility program reported unbounded".into())),
    }
}

pub fn smallest_epsilon(q: &ConversionQuery) -> Result<f64> {
    smallest_epsilon_with(q, OracleLimits::default())
}

/// `min (1/2) ||M r - s||_1` over equistochastic `M`; zero exactly for convertible pairs.
pub fn smallest_epsilon_with(q: &ConversionQuery, limits: OracleLimits) -> Result<f64> {
    q.check_limits(limits)?;
    let (input, output, free) = q.comparison_vectors()?;
    let (d_out, d_in) = (output.len(), input.len());
    let n_m = d_out * d_in;
    // Extra columns: u_i, v_i >= 0 with M r - s = u - v.
    let (mut rows, rhs) = equistochastic_rows(&input, &output, &free, 2 * d_out);
    for i in 0..d_out {
        let row = &mut rows[d_in + d_out + i];
        row[n_m + i] = -1.0;
        row[n_m + d_out + i] = 1.0;
    }
    let mut objective = vec![0.0; n_m + 2 * d_out];
    objective[n_m..].iter_mut().for_each(|c| *c = 0.5);
    match solve(&LinearProgram { objective, rows, rhs })? {
        LpOutcome::Optimal { value, .. } => Ok(value.clamp(0.0, 1.0)),
        other => Err(ThermoError::Solver(format!("distance program ended as {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SystemSpec;

    fn entropy_state(r: Vec<f64>) -> QuasiclassicalState {
        QuasiclassicalState::new(SystemSpec::bare(r.len()).unwrap(), r).unwrap()
    }

    fn entropy_query(r: Vec<f64>, s: Vec<f64>) -> ConversionQuery {
        ConversionQuery::new(entropy_state(r), entropy_state(s), TheoryContext::entropy()).unwrap()
    }

    #[test]
    fn majorization_by_partial_sums() {
        let q = entropy_query(vec![0.5, 0.3, 0.2], vec![0.4, 0.35, 0.25]);
        assert!(can_convert(&q).unwrap());
        assert!(feasibility_oracle(&q).unwrap().is_some());
        let back = entropy_query(vec![0.4, 0.35, 0.25], vec![0.5, 0.3, 0.2]);
        assert!(!can_convert(&back).unwrap());
        assert!(feasibility_oracle(&back).unwrap().is_none());
    }

    #[test]
    fn identity_and_gibbs_witnesses() {
        let ctx = TheoryContext::energy(1.0, vec![]).unwrap();
        let spec = SystemSpec::with_energies(vec![0.0, 0.5, 1.5]).unwrap();
        let r = QuasiclassicalState::new(spec.clone(), vec![0.1, 0.2, 0.7]).unwrap();
        let q = ConversionQuery::new(r.clone(), r.clone(), ctx.clone()).unwrap();
        let m = feasibility_oracle(&q).unwrap().unwrap();
        assert_eq!(m, WitnessMatrix::identity(3));
        let g = gibbs_probabilities(&spec, &ctx).unwrap();
        assert!(m.max_violation(r.probabilities(), r.probabilities(), &g, &g) < 1e-15);

        let gs = gibbs_state(&spec, &ctx).unwrap();
        let q = ConversionQuery::new(r, gs, ctx).unwrap();
        assert!(can_convert(&q).unwrap());
        let m = feasibility_oracle(&q).unwrap().unwrap();
        for j in 0..3 {
            for (i, gi) in g.iter().enumerate() {
                assert!((m.get(i, j) - gi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn smallest_epsilon_examples() {
        let q = entropy_query(vec![0.5, 0.5], vec![1.0, 0.0]);
        assert!((smallest_epsilon(&q).unwrap() - 0.5).abs() < 1e-9);
        let q = entropy_query(vec![0.5, 0.3, 0.2], vec![0.4, 0.35, 0.25]);
        assert!(smallest_epsilon(&q).unwrap() < 1e-9);
        let q = entropy_query(vec![0.2, 0.8], vec![0.2, 0.8]);
        assert!(smallest_epsilon(&q).unwrap() < 1e-9);
    }

    #[test]
    fn different_dimensions_use_composites() {
        // Pure bit -> pure qutrit is impossible; pure qutrit -> pure bit is fine.
        let bit = entropy_state(vec![1.0, 0.0]);
        let trit = entropy_state(vec![1.0, 0.0, 0.0]);
        let ctx = TheoryContext::entropy();
        let up = ConversionQuery::new(bit.clone(), trit.clone(), ctx.clone()).unwrap();
        let down = ConversionQuery::new(trit, bit, ctx).unwrap();
        assert!(!up.shares_operators());
        assert!(!can_convert(&up).unwrap());
        assert!(can_convert(&down).unwrap());
        assert!(feasibility_oracle(&up).unwrap().is_none());
        let m = feasibility_oracle(&down).unwrap().unwrap();
        assert_eq!((m.rows, m.cols), (6, 6));
    }

    #[test]
    fn size_cap_and_env() {
        let q = entropy_query(vec![1.0 / 13.0; 13], vec![1.0 / 13.0; 13]);
        assert!(matches!(feasibility_oracle(&q), Err(ThermoError::TooLarge { .. })));
        assert!(feasibility_oracle_with(&q, OracleLimits { max_side_dim: 13 }).unwrap().is_some());
    }

    #[test]
    fn context_mismatch() {
        let ctx = TheoryContext::energy(1.0, vec![]).unwrap();
        let a = entropy_state(vec![1.0, 0.0]);
        assert!(matches!(
            ConversionQuery::new(a.clone(), a, ctx),
            Err(ThermoError::ContextMismatch(_))
        ));
    }
}
