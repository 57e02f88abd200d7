//! Exact local-deterministic extrema by Gray-code vertex enumeration.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expression::BellExpression;

/// Largest symbol count enumerated exactly.
pub const MAX_EXACT_SYMBOLS: usize = 28;

/// Values within this of the running optimum count as ties.
pub const TIE_TOL: f64 = 1e-9;

/// Top bits fixed per work chunk.
const CHUNK_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalBounds {
    pub min: f64,
    pub max: f64,
    /// `±1` per flattened symbol at the maximum.
    pub argmax: Vec<i8>,
    pub argmin: Vec<i8>,
    pub vertices: u64,
}

/// Variable `j` of code `c` is `-1` iff bit `m-1-j` is set, so smaller codes
/// are lexicographically smaller assignments with `+1 < -1`.
pub fn assignment_from_code(code: u64, m: usize) -> Vec<i8> {
    (0..m)
        .map(|j| if (code >> (m - 1 - j)) & 1 == 1 { -1 } else { 1 })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    code: u64,
}

impl Best {
    fn offer(&mut self, value: f64, code: u64) {
        if value > self.value + TIE_TOL || ((value - self.value).abs() <= TIE_TOL && code < self.code) {
            self.value = value;
            self.code = code;
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.offer(other.value, other.code);
        self
    }
}

struct Prepared {
    m: usize,
    coefs: Vec<f64>,
    var_terms: Vec<Vec<usize>>,
    term_vars: Vec<Vec<usize>>,
    constant: f64,
}

impl Prepared {
    fn new(expr: &BellExpression) -> Self {
        let m = expr.symbol_count();
        let flat = expr.flat_terms();
        let mut var_terms = vec![Vec::new(); m];
        for (t, (vars, _)) in flat.iter().enumerate() {
            for &v in vars {
                var_terms[v].push(t);
            }
        }
        Prepared {
            m,
            coefs: flat.iter().map(|(_, c)| *c).collect(),
            term_vars: flat.into_iter().map(|(v, _)| v).collect(),
            var_terms,
            constant: expr.constant(),
        }
    }

    /// Walks codes `prefix << low .. (prefix+1) << low` in Gray order.
    fn chunk(&self, prefix: u64, low: usize) -> (Best, Best) {
        let base = prefix << low;
        let values = assignment_from_code(base, self.m);
        let mut signs: Vec<f64> = self
            .term_vars
            .iter()
            .map(|vs| vs.iter().map(|&v| values[v] as f64).product())
            .collect();
        let mut value: f64 =
            self.constant + self.coefs.iter().zip(&signs).map(|(c, s)| c * s).sum::<f64>();
        let mut hi = Best { value, code: base };
        let mut lo = Best { value: -value, code: base };
        let mut gray = 0u64;
        for i in 1..(1u64 << low) {
            let bit = i.trailing_zeros() as usize;
            gray ^= 1 << bit;
            let var = self.m - 1 - bit;
            for &t in &self.var_terms[var] {
                value -= 2.0 * self.coefs[t] * signs[t];
                signs[t] = -signs[t];
            }
            let code = base | gray;
            hi.offer(value, code);
            lo.offer(-value, code);
        }
        (hi, lo)
    }
}

/// Exact minimum and maximum over all `2^m` deterministic assignments.
pub fn classical_bounds(expr: &BellExpression) -> Result<ClassicalBounds> {
    let m = expr.symbol_count();
    if m > MAX_EXACT_SYMBOLS {
        return Err(Error::SymbolBudgetExceeded {
            symbols: m,
            max: MAX_EXACT_SYMBOLS,
        });
    }
    let prep = Prepared::new(expr);
    let top = m.min(CHUNK_BITS);
    let low = m - top;
    let chunks = 1u64 << top;
    let run = |p: u64| prep.chunk(p, low);

    #[cfg(feature = "parallel")]
    let results: Vec<(Best, Best)> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(Best, Best)> = (0..chunks).map(run).collect();

    let (hi, lo) = results
        .into_iter()
        .reduce(|a, b| (a.0.merge(b.0), a.1.merge(b.1)))
        .expect("at least one chunk");
    let argmax = assignment_from_code(hi.code, m);
    let argmin = assignment_from_code(lo.code, m);
    Ok(ClassicalBounds {
        max: expr.evaluate(&argmax)?,
        min: expr.evaluate(&argmin)?,
        argmax,
        argmin,
        vertices: 1u64 << m,
    })
}

/// Best values over random vertices; a lower bound on the max and an
/// upper bound on the min, not exact.
pub fn classical_sampled<R: Rng + ?Sized>(
    expr: &BellExpression,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let m = expr.symbol_count();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut values = vec![1i8; m];
    for _ in 0..samples.max(1) {
        for v in values.iter_mut() {
            *v = if rng.random::<bool>() { 1 } else { -1 };
        }
        let x = expr.evaluate(&values)?;
        hi = hi.max(x);
        lo = lo.min(x);
    }
    Ok((hi, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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

    // Oracle: plain loop over every vertex.
    fn brute(expr: &BellExpression) -> (f64, f64) {
        let m = expr.symbol_count();
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for code in 0..(1u64 << m) {
            let v = expr.evaluate(&assignment_from_code(code, m)).unwrap();
            hi = hi.max(v);
            lo = lo.min(v);
        }
        (hi, lo)
    }

    #[test]
    fn chsh_bounds() {
        let b = classical_bounds(&chsh()).unwrap();
        assert_eq!((b.min, b.max), (-2.0, 2.0));
        assert_eq!(b.vertices, 16);
        // smallest code reaching 2 is all +1
        assert_eq!(b.argmax, vec![1, 1, 1, 1]);
    }

    #[test]
    fn constant_only() {
        let mut e = BellExpression::new(1);
        e.add_constant(3.0);
        let b = classical_bounds(&e).unwrap();
        assert_eq!((b.min, b.max), (3.0, 3.0));
    }

    #[test]
    fn budget_enforced() {
        let mut e = BellExpression::new(1);
        for k in 0..29 {
            let s = e.symbol(0, &format!("S{k}")).unwrap();
            e.add_term(vec![(0, s)], 1.0).unwrap();
        }
        assert!(matches!(
            classical_bounds(&e),
            Err(Error::SymbolBudgetExceeded { symbols: 29, .. })
        ));
    }

    #[test]
    fn sampling_never_beats_enumeration() {
        let e = chsh();
        let exact = classical_bounds(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (hi, lo) = classical_sampled(&e, 100, &mut rng).unwrap();
        assert!(hi <= exact.max && lo >= exact.min);
    }

    fn arb_expr() -> impl Strategy<Value = BellExpression> {
        (1usize..=4, 1usize..=3).prop_flat_map(|(parties, per)| {
            proptest::collection::vec(
                (proptest::collection::vec(0..=per, parties), -3i32..=3),
                1..8,
            )
            .prop_map(move |monos| {
                let mut e = BellExpression::new(parties);
                for (choice, c) in monos {
                    let mut fs = Vec::new();
                    for (p, k) in choice.iter().enumerate() {
                        if *k > 0 {
                            fs.push((p, e.symbol(p, &format!("S{k}")).unwrap()));
                        }
                    }
                    e.add_term(fs, c as f64).unwrap();
                }
                e
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn gray_walk_matches_brute_force(e in arb_expr()) {
            let b = classical_bounds(&e).unwrap();
            let (hi, lo) = brute(&e);
            prop_assert!((b.max - hi).abs() < 1e-12);
            prop_assert!((b.min - lo).abs() < 1e-12);
            prop_assert!((e.evaluate(&b.argmax).unwrap() - hi).abs() < 1e-12);
            // witness is the first optimal code
            let m = e.symbol_count();
            let first = (0..(1u64 << m))
                .find(|&c| (e.evaluate(&assignment_from_code(c, m)).unwrap() - hi).abs() <= TIE_TOL)
                .unwrap();
            prop_assert_eq!(b.argmax.clone(), assignment_from_code(first, m));
        }
    }
}
