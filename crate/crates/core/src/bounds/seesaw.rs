//! See-saw coordinate ascent over states and per-symbol Bloch vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::expression::{product_operator, BellExpression, Bindings};
use crate::linalg::StateVector;
use crate::pauli::PauliSum;

pub const DEFAULT_RESTARTS: usize = 16;
pub const MAX_SWEEPS: usize = 500;
pub const MIN_GAIN: f64 = 1e-9;
/// Allowed per-sweep decrease before the trace counts as non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub seed: u64,
    /// Top eigenvalue after each state update.
    pub values: Vec<f64>,
    pub converged: bool,
}

impl RestartTrace {
    pub fn best(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawResult {
    pub value: f64,
    pub bindings: Bindings,
    pub state: StateVector,
    pub traces: Vec<RestartTrace>,
    pub monotone: bool,
}

fn random_unit<R: rand::Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-6 {
            return [v[0] / r, v[1] / r, v[2] / r];
        }
    }
}

fn random_bindings(expr: &BellExpression, seed: u64) -> Bindings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Bindings::new();
    for (p, names) in expr.symbols().iter().enumerate() {
        for name in names {
            b.insert(p, name, random_unit(&mut rng));
        }
    }
    b
}

/// Coefficients `r_j` with `<B> = r . v + const` in the Bloch vector of one symbol.
fn effective_direction(
    expr: &BellExpression,
    bindings: &Bindings,
    party: usize,
    symbol: usize,
    psi: &StateVector,
) -> Result<[f64; 3]> {
    let n = expr.parties();
    let mut r = [0.0; 3];
    for (axis, slot) in r.iter_mut().enumerate() {
        let mut unit = [0.0; 3];
        unit[axis] = 1.0;
        let mut op = PauliSum::zero(n);
        for (fs, c) in expr.terms() {
            if !fs.contains(&(party, symbol)) {
                continue;
            }
            let factors: Vec<(usize, [f64; 3])> = fs
                .iter()
                .map(|&(p, s)| {
                    if (p, s) == (party, symbol) {
                        (p, unit)
                    } else {
                        let name = &expr.symbols()[p][s];
                        (p, bindings.get(p, name).expect("every symbol is bound"))
                    }
                })
                .collect();
            op = op.add(&product_operator(n, &factors, c)?)?;
        }
        *slot = op.expectation(psi.amplitudes())?;
    }
    Ok(r)
}

fn run_restart(
    expr: &BellExpression,
    mut bindings: Bindings,
    seed: u64,
) -> Result<(RestartTrace, Bindings, StateVector)> {
    let mut values = Vec::new();
    let mut best: Option<(f64, Bindings, StateVector)> = None;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let eig = expr.bind(&bindings)?.to_dense()?.eigh()?;
        let (lam, v) = eig.top();
        let psi = StateVector::normalized(v)?;
        let gain = values.last().map(|&prev| lam - prev);
        values.push(lam);
        if best.as_ref().is_none_or(|(b, _, _)| lam > *b) {
            best = Some((lam, bindings.clone(), psi.clone()));
        }
        if gain.is_some_and(|g| g < MIN_GAIN) {
            converged = true;
            break;
        }
        for (p, names) in expr.symbols().iter().enumerate() {
            for (s, name) in names.iter().enumerate() {
                let r = effective_direction(expr, &bindings, p, s, &psi)?;
                let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                if len > 1e-14 {
                    bindings.insert(p, name, [r[0] / len, r[1] / len, r[2] / len]);
                }
            }
        }
    }
    let (_, b, psi) = best.expect("at least one sweep");
    Ok((RestartTrace { seed, values, converged }, b, psi))
}

/// Best value over seeded restarts. Restart 0 starts from `initial` when given.
pub fn seesaw_optimize(
    expr: &BellExpression,
    restarts: usize,
    seed: u64,
    initial: Option<&Bindings>,
) -> Result<SeesawResult> {
    let restarts = restarts.max(1);
    let start = |r: usize| {
        let s = seed.wrapping_add(r as u64);
        match (r, initial) {
            (0, Some(b)) => (b.clone(), s),
            _ => (random_bindings(expr, s), s),
        }
    };
    let run = |r: usize| {
        let (b, s) = start(r);
        run_restart(expr, b, s)
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = (0..restarts).map(run).collect::<Result<_>>()?;

    let mut traces = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, Bindings, StateVector)> = None;
    for (trace, b, psi) in runs {
        let v = trace.best();
        if best.as_ref().is_none_or(|(bv, _, _)| v > *bv + MIN_GAIN) {
            best = Some((v, b, psi));
        }
        traces.push(trace);
    }
    let (value, bindings, state) = best.expect("at least one restart");
    let monotone = traces.iter().all(RestartTrace::is_monotone);
    Ok(SeesawResult {
        value,
        bindings,
        state,
        traces,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn chsh() -> BellExpression {
        BellExpression::from_monomials(
            2,
            &[
                (1.0, &[(0, "A"), (1, "B")]),
                (1.0, &[(0, "A"), (1, "B'")]),
                (1.0, &[(0, "A'"), (1, "B")]),
                (-1.0, &[(0, "A'"), (1, "B'")]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chsh_reaches_tsirelson() {
        let r = seesaw_optimize(&chsh(), DEFAULT_RESTARTS, 7, None).unwrap();
        assert!((r.value - 2.0 * SQRT_2).abs() < 1e-7, "{}", r.value);
        assert!(r.monotone);
        assert_eq!(r.traces.len(), DEFAULT_RESTARTS);
        let again = seesaw_optimize(&chsh(), DEFAULT_RESTARTS, 7, None).unwrap();
        assert_eq!(r.value, again.value);
    }

    #[test]
    fn single_term() {
        let e = BellExpression::from_monomials(2, &[(1.0, &[(0, "A"), (1, "B")])]).unwrap();
        let r = seesaw_optimize(&e, 4, 0, None).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn never_exceeds_term_bound() {
        let e = BellExpression::from_monomials(
            3,
            &[
                (1.0, &[(0, "A"), (1, "A"), (2, "A")]),
                (-1.0, &[(0, "A"), (1, "B"), (2, "B")]),
                (-1.0, &[(0, "B"), (1, "A"), (2, "B")]),
                (-1.0, &[(0, "B"), (1, "B"), (2, "A")]),
            ],
        )
        .unwrap();
        let r = seesaw_optimize(&e, 8, 3, None).unwrap();
        assert!(r.value <= e.dichotomic_term_bound() + 1e-8);
        assert!((r.value - 4.0).abs() < 1e-7);
        assert!(r.monotone);
    }
}
