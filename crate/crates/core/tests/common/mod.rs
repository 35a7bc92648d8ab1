//! Seeded generators shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thermoflow::convertibility::ConversionQuery;
use thermoflow::gibbs::gibbs_probabilities;
use thermoflow::theory::{preset, PresetKind, PresetParams, Species};
use thermoflow::{Intensive, Operator, QuasiclassicalState, SystemSpec, TheoryContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Helmholtz,
    GrandPotential,
    Gibbs,
}

pub const FLAVORS: [Flavor; 3] = [Flavor::Helmholtz, Flavor::GrandPotential, Flavor::Gibbs];

/// Probability vector with full support unless `zeros` allows occasional exact zeros.
pub fn probs(rng: &mut ChaCha8Rng, d: usize, zeros: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d)
            .map(|_| {
                if zeros && rng.gen_bool(0.2) {
                    0.0
                } else {
                    // Exponential weights spread the entries over several scales.
                    -rng.gen_range(1e-6f64..1.0).ln()
                }
            })
            .collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

pub fn context(rng: &mut ChaCha8Rng, flavor: Flavor) -> TheoryContext {
    let beta = rng.gen_range(0.3..2.5);
    match flavor {
        Flavor::Helmholtz => TheoryContext::energy(beta, vec![]).unwrap(),
        Flavor::GrandPotential => TheoryContext::energy(beta, vec![Intensive::new("N", rng.gen_range(-1.0..1.0))]).unwrap(),
        Flavor::Gibbs => preset(
            PresetKind::Gibbs,
            &PresetParams {
                beta: Some(beta),
                pressure: Some(rng.gen_range(0.1..2.0)),
                ..Default::default()
            },
        )
        .unwrap(),
    }
}

/// A random system of dimension `d` carrying one operator per context variable.
pub fn spec(rng: &mut ChaCha8Rng, ctx: &TheoryContext, d: usize) -> SystemSpec {
    if ctx.is_entropy() {
        return SystemSpec::bare(d).unwrap();
    }
    let mut ops = vec![Operator::new("H", (0..d).map(|_| rng.gen_range(0.0..3.0)).collect())];
    for p in ctx.intensive() {
        let ev = match p.label.as_str() {
            "N" => (0..d).map(|_| rng.gen_range(0..4) as f64).collect(),
            _ => (0..d).map(|_| rng.gen_range(0.5..2.0)).collect(),
        };
        ops.push(Operator::new(p.label.clone(), ev));
    }
    SystemSpec::new(d, ops).unwrap()
}

pub fn state(rng: &mut ChaCha8Rng, ctx: &TheoryContext, d: usize) -> QuasiclassicalState {
    let s = spec(rng, ctx, d);
    QuasiclassicalState::new(s, probs(rng, d, true)).unwrap()
}

/// State on `spec` with full support.
pub fn state_on(rng: &mut ChaCha8Rng, spec: &SystemSpec) -> QuasiclassicalState {
    QuasiclassicalState::new(spec.clone(), probs(rng, spec.dim(), false)).unwrap()
}

/// Applies a few random Gibbs-preserving two-level partial thermalizations to `r`.
pub fn thermalize(rng: &mut ChaCha8Rng, r: &[f64], g: &[f64], steps: usize) -> Vec<f64> {
    let mut s = r.to_vec();
    let d = s.len();
    if d < 2 {
        return s;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let lambda = rng.gen_range(0.0..1.0);
        let total = s[i] + s[j];
        let gi = g[i] / (g[i] + g[j]);
        s[i] = lambda * s[i] + (1.0 - lambda) * total * gi;
        s[j] = total - s[i];
    }
    let sum: f64 = s.iter().sum();
    s.iter_mut().for_each(|x| *x /= sum);
    s
}

/// Conversion query with side dimensions in `2..=max_d`; about half the targets are
/// built by free processing of the source so both verdicts are well represented.
pub fn query(rng: &mut ChaCha8Rng, ctx: &TheoryContext, same_operators: bool, max_d: usize) -> ConversionQuery {
    let d = rng.gen_range(2..=max_d);
    let source = state(rng, ctx, d);
    let target = if same_operators {
        let g = gibbs_probabilities(source.spec(), ctx).unwrap();
        let s = if rng.gen_bool(0.5) {
            thermalize(rng, source.probabilities(), &g, 3)
        } else {
            probs(rng, d, true)
        };
        source.with_probabilities(s).unwrap()
    } else {
        let d2 = rng.gen_range(2..=max_d);
        let spec2 = spec(rng, ctx, d2);
        let g2 = gibbs_probabilities(&spec2, ctx).unwrap();
        let lambda: f64 = rng.gen_range(0.0..1.0f64).powi(2);
        let raw = probs(rng, d2, true);
        let s: Vec<f64> = raw.iter().zip(&g2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        QuasiclassicalState::new(spec2, s).unwrap()
    };
    ConversionQuery::new(source, target, ctx.clone()).unwrap()
}

/// Random grand-potential species with gravitational data.
pub fn species(rng: &mut ChaCha8Rng) -> (Species, f64) {
    let mut s = Species::new("N", rng.gen_range(-2.0..2.0));
    s.mass = rng.gen_range(0.0..3.0);
    s.height = rng.gen_range(-1.0..1.0);
    (s, rng.gen_range(0.0..10.0))
}
