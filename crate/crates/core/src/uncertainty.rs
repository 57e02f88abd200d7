//! Uncertainty relations between two xz-plane Bell operators and the
//! quadratic Bell inequalities obtained from them.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expression::{BellExpression, Bindings};
use crate::linalg::{bloch_operator, DenseMatrix, DensityMatrix};
use crate::pauli::{Pauli, PauliSum};
use crate::pseudo::PseudoPauliSet;
use crate::stabilizer::LogicalBasis;

/// Relation bound for two-qubit operators of norm `2 sqrt 2`.
pub const RELATION_BOUND: f64 = 8.0;

/// `|n1 -+ n2|^2` below this counts as parallel.
const PARALLEL_TOL: f64 = 1e-12;

/// Unit vector `(sin theta, cos theta)` in the xz plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionXZ {
    pub theta: f64,
}

impl DirectionXZ {
    pub fn new(theta: f64) -> Self {
        DirectionXZ { theta }
    }

    pub fn vector(&self) -> [f64; 2] {
        [self.theta.sin(), self.theta.cos()]
    }

    /// `|n1 + n2|^2` and `|n1 - n2|^2`.
    fn sum_diff_sq(&self, other: &Self) -> (f64, f64) {
        let c = (self.theta - other.theta).cos();
        (2.0 + 2.0 * c, 2.0 - 2.0 * c)
    }
}

/// `2 sqrt 2 (sin theta X~ + cos theta Z~)`.
pub fn bell_op_xz(set: &PseudoPauliSet, d: DirectionXZ) -> Result<PauliSum> {
    Ok(set.rotated_z(d.theta)?.scale(2.0 * SQRT_2))
}

fn relation_lhs(b1: f64, b2: f64, d1: DirectionXZ, d2: DirectionXZ) -> Result<f64> {
    let (plus, minus) = d1.sum_diff_sq(&d2);
    if plus < PARALLEL_TOL || minus < PARALLEL_TOL {
        return Err(Error::ParallelDirections);
    }
    Ok((b1 + b2).powi(2) / plus + (b1 - b2).powi(2) / minus)
}

/// Left side of the relation for the two operators at `d1`, `d2`.
pub fn uncertainty_lhs(
    set: &PseudoPauliSet,
    rho: &DensityMatrix,
    d1: DirectionXZ,
    d2: DirectionXZ,
) -> Result<f64> {
    let b1 = rho.expectation(&bell_op_xz(set, d1)?.to_dense()?);
    let b2 = rho.expectation(&bell_op_xz(set, d2)?.to_dense()?);
    relation_lhs(b1, b2, d1, d2)
}

/// Single-qubit relation for `A_i = a_i . sigma`; at most 1 for every state.
pub fn lemma_check(a1: [f64; 3], a2: [f64; 3], rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let cross = [
        a1[1] * a2[2] - a1[2] * a2[1],
        a1[2] * a2[0] - a1[0] * a2[2],
        a1[0] * a2[1] - a1[1] * a2[0],
    ];
    if cross.iter().map(|c| c * c).sum::<f64>() < PARALLEL_TOL {
        return Err(Error::ParallelDirections);
    }
    let op = |v: [f64; 3]| {
        let m = bloch_operator(v);
        DenseMatrix::from_fn(2, |r, c| m[r][c])
    };
    let e1 = rho.expectation(&op(a1));
    let e2 = rho.expectation(&op(a2));
    let plus: f64 = (0..3).map(|k| (a1[k] + a2[k]).powi(2)).sum();
    let minus: f64 = (0..3).map(|k| (a1[k] - a2[k]).powi(2)).sum();
    Ok((e1 + e2).powi(2) / plus + (e1 - e2).powi(2) / minus)
}

/// How one party's `Z` and `X` are rewritten in its symbols `A`, `B`:
/// `Z = z[0] A + z[1] B`, `X = x[0] A + x[1] B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub z: [f64; 2],
    pub x: [f64; 2],
}

impl Replacement {
    /// `Z = cos(phi) A + sin(phi) B`, `X = -sin(phi) A + cos(phi) B`.
    pub fn rotation(phi: f64) -> Self {
        Replacement {
            z: [phi.cos(), phi.sin()],
            x: [-phi.sin(), phi.cos()],
        }
    }

    /// `Z -> B`, `X -> A`.
    pub fn swapped() -> Self {
        Replacement {
            z: [0.0, 1.0],
            x: [1.0, 0.0],
        }
    }

    fn coefficients(&self, p: Pauli) -> Result<[f64; 2]> {
        match p {
            Pauli::Z => Ok(self.z),
            Pauli::X => Ok(self.x),
            other => Err(Error::UnmappedOperator {
                party: 0,
                operator: other.as_char().to_string(),
            }),
        }
    }
}

const SYMBOLS: [&str; 2] = ["A", "B"];

/// Linear expression in `A_i`, `B_i` from an xz-only Pauli sum.
pub fn replace_settings(op: &PauliSum, rules: &[Replacement]) -> Result<BellExpression> {
    let n = op.n();
    if rules.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rules.len(),
        });
    }
    let mut e = BellExpression::new(n);
    for p in 0..n {
        for s in SYMBOLS {
            e.symbol(p, s)?;
        }
    }
    for (t, c) in op.iter() {
        let mut partial: Vec<(Vec<(usize, usize)>, f64)> = vec![(Vec::new(), c)];
        for (q, letter) in t.letters().into_iter().enumerate() {
            if letter == Pauli::I {
                continue;
            }
            let k = rules[q].coefficients(letter).map_err(|_| Error::UnmappedOperator {
                party: q,
                operator: letter.as_char().to_string(),
            })?;
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (fs, w) in &partial {
                for (s, &ks) in k.iter().enumerate() {
                    if ks != 0.0 {
                        let mut f = fs.clone();
                        f.push((q, s));
                        next.push((f, w * ks));
                    }
                }
            }
            partial = next;
        }
        for (fs, w) in partial {
            if fs.is_empty() {
                e.add_constant(w);
            } else {
                e.add_term(fs, w)?;
            }
        }
    }
    Ok(e.pruned(1e-12))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadraticVariant {
    Uffink,
    Nki,
}

impl QuadraticVariant {
    pub fn directions(self) -> (DirectionXZ, DirectionXZ) {
        match self {
            QuadraticVariant::Uffink => (DirectionXZ::new(0.0), DirectionXZ::new(FRAC_PI_2)),
            QuadraticVariant::Nki => (DirectionXZ::new(FRAC_PI_4), DirectionXZ::new(3.0 * FRAC_PI_4)),
        }
    }

    /// Factor applied to both linear expressions.
    pub fn scale(self) -> f64 {
        match self {
            QuadraticVariant::Uffink => 1.0 / SQRT_2,
            QuadraticVariant::Nki => 1.0,
        }
    }

    /// Stated bound on the sum of squares.
    pub fn bound(self) -> f64 {
        RELATION_BOUND * self.scale().powi(2)
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadraticVariant::Uffink => "uffink",
            QuadraticVariant::Nki => "nki",
        }
    }
}

/// `<x>^2 + <y>^2 <= bound` for two linear expressions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticBell {
    pub variant: QuadraticVariant,
    pub x: BellExpression,
    pub y: BellExpression,
    pub bound: f64,
    /// `(x, y)` at each deterministic vertex, in code order.
    pub vertices: Vec<[f64; 2]>,
    pub classical_max: f64,
}

/// Builds the pair from the two xz operators of `set` under `rules`.
pub fn quadratic_bell(
    set: &PseudoPauliSet,
    variant: QuadraticVariant,
    rules: &[Replacement],
) -> Result<QuadraticBell> {
    let (d1, d2) = variant.directions();
    let s = variant.scale();
    let x = replace_settings(&bell_op_xz(set, d1)?.scale(s), rules)?;
    let y = replace_settings(&bell_op_xz(set, d2)?.scale(s), rules)?;
    let vertices = vertex_pairs(&x, &y)?;
    let classical_max = vertices
        .iter()
        .map(|v| v[0] * v[0] + v[1] * v[1])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(QuadraticBell {
        variant,
        x,
        y,
        bound: variant.bound(),
        vertices,
        classical_max,
    })
}

/// The two-qubit variant on the Bell basis, `Z1 -> A1, X1 -> B1, Z2 -> B2, X2 -> A2`.
pub fn quadratic_default(variant: QuadraticVariant) -> Result<QuadraticBell> {
    let set = PseudoPauliSet::for_basis(&LogicalBasis::bell())?;
    quadratic_bell(&set, variant, &[Replacement::rotation(0.0), Replacement::swapped()])
}

/// `(x, y)` at every deterministic assignment. Both expressions must share symbols.
pub fn vertex_pairs(x: &BellExpression, y: &BellExpression) -> Result<Vec<[f64; 2]>> {
    if x.symbols() != y.symbols() {
        return Err(Error::InvalidArgument("expressions use different symbols".into()));
    }
    let m = x.symbol_count();
    if m > 20 {
        return Err(Error::SymbolBudgetExceeded { symbols: m, max: 20 });
    }
    (0..1u64 << m)
        .map(|code| {
            let v = crate::bounds::classical::assignment_from_code(code, m);
            Ok([x.evaluate(&v)?, y.evaluate(&v)?])
        })
        .collect()
}

fn xz_bindings(parties: usize, angles: &[f64]) -> Bindings {
    let mut b = Bindings::new();
    for p in 0..parties {
        for (k, s) in SYMBOLS.iter().enumerate() {
            let a = angles[2 * p + k];
            b.insert(p, s, [a.sin(), 0.0, a.cos()]);
        }
    }
    b
}

/// Largest `<x>^2 + <y>^2` over states for fixed observables, via
/// `max_alpha lambda(cos a X + sin a Y)^2` on a grid of `steps` angles.
pub fn max_over_states(x: &DenseMatrix, y: &DenseMatrix, steps: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for k in 0..steps {
        let a = PI * k as f64 / steps as f64;
        let m = x
            .scale(a.cos().into())
            .add(&y.scale(a.sin().into()));
        let e = m.eigh()?;
        let top = e.values.last().copied().unwrap_or(0.0);
        let bottom = e.values.first().copied().unwrap_or(0.0);
        best = best.max(top * top).max(bottom * bottom);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticSweep {
    pub samples: usize,
    pub max_value: f64,
    /// Setting angles `A_1, B_1, A_2, B_2, ...` at the maximum.
    pub argmax_angles: Vec<f64>,
    pub within_bound: bool,
}

/// Random xz-plane settings, each maximized over states.
pub fn quadratic_quantum_sweep(q: &QuadraticBell, samples: usize, seed: u64) -> Result<QuadraticSweep> {
    let parties = q.x.parties();
    let run = |k: usize| -> Result<(f64, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let angles: Vec<f64> = (0..2 * parties).map(|_| rng.random_range(-PI..PI)).collect();
        let b = xz_bindings(parties, &angles);
        let x = q.x.bind(&b)?.to_dense()?;
        let y = q.y.bind(&b)?.to_dense()?;
        Ok((max_over_states(&x, &y, 90)?, angles))
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<(f64, Vec<f64>)> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<(f64, Vec<f64>)> = (0..samples).map(run).collect::<Result<_>>()?;

    let (max_value, argmax_angles) = runs
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(QuadraticSweep {
        samples,
        within_bound: max_value <= q.bound + 1e-9,
        max_value,
        argmax_angles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscCheck {
    /// `(<B_1>_c, <B_2>_c)` at every vertex.
    pub vertices: Vec<[f64; 2]>,
    /// Largest relation value over the vertices.
    pub max_lhs: f64,
    pub inside: bool,
}

/// Classical vertices of the two operators under `rules` against the relation.
/// For orthogonal directions this is the disc `x^2 + y^2 <= 8`.
pub fn square_in_disc_check(
    set: &PseudoPauliSet,
    d1: DirectionXZ,
    d2: DirectionXZ,
    rules: &[Replacement],
) -> Result<DiscCheck> {
    let x = replace_settings(&bell_op_xz(set, d1)?, rules)?;
    let y = replace_settings(&bell_op_xz(set, d2)?, rules)?;
    let vertices = vertex_pairs(&x, &y)?;
    let mut max_lhs = f64::NEG_INFINITY;
    for v in &vertices {
        max_lhs = max_lhs.max(relation_lhs(v[0], v[1], d1, d2)?);
    }
    Ok(DiscCheck {
        vertices,
        inside: max_lhs <= RELATION_BOUND + 1e-9,
        max_lhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintySweep {
    pub samples: usize,
    pub seed: u64,
    pub max_lhs: f64,
    pub argmax_sample: usize,
    pub argmax_theta: [f64; 2],
    pub lemma_max: f64,
    pub relation_holds: bool,
    pub lemma_holds: bool,
}

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(-PI..PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Seeded Monte-Carlo check of both relations; sample `k` uses seed `seed + k`.
pub fn uncertainty_sweep(samples: usize, seed: u64) -> Result<UncertaintySweep> {
    let set = PseudoPauliSet::for_basis(&LogicalBasis::bell())?;
    let run = |k: usize| -> Result<(f64, [f64; 2], f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let rho = DensityMatrix::random(2, &mut rng);
        let (t1, t2) = loop {
            let t1: f64 = rng.random_range(-PI..PI);
            let t2: f64 = rng.random_range(-PI..PI);
            if (t1 - t2).sin().abs() > 1e-6 {
                break (t1, t2);
            }
        };
        let lhs = uncertainty_lhs(&set, &rho, DirectionXZ::new(t1), DirectionXZ::new(t2))?;
        let qubit = DensityMatrix::random(1, &mut rng);
        let (a1, a2) = loop {
            let (a1, a2) = (random_unit(&mut rng), random_unit(&mut rng));
            let c = [
                a1[1] * a2[2] - a1[2] * a2[1],
                a1[2] * a2[0] - a1[0] * a2[2],
                a1[0] * a2[1] - a1[1] * a2[0],
            ];
            if c.iter().map(|x| x * x).sum::<f64>() > 1e-10 {
                break (a1, a2);
            }
        };
        let lemma = lemma_check(a1, a2, &qubit)?;
        Ok((lhs, [t1, t2], lemma))
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<(f64, [f64; 2], f64)> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<(f64, [f64; 2], f64)> = (0..samples).map(run).collect::<Result<_>>()?;

    let mut out = UncertaintySweep {
        samples,
        seed,
        max_lhs: f64::NEG_INFINITY,
        argmax_sample: 0,
        argmax_theta: [0.0, 0.0],
        lemma_max: f64::NEG_INFINITY,
        relation_holds: true,
        lemma_holds: true,
    };
    for (k, (lhs, theta, lemma)) in runs.into_iter().enumerate() {
        if lhs > out.max_lhs {
            out.max_lhs = lhs;
            out.argmax_sample = k;
            out.argmax_theta = theta;
        }
        out.lemma_max = out.lemma_max.max(lemma);
    }
    out.relation_holds = out.max_lhs <= RELATION_BOUND + 1e-9;
    out.lemma_holds = out.lemma_max <= 1.0 + 1e-10;
    Ok(out)
}

/// Relation value on `cos(t/2)|0~> + sin(t/2)|1~>`.
pub fn saturation_lhs(t: f64, d1: DirectionXZ, d2: DirectionXZ) -> Result<f64> {
    let set = PseudoPauliSet::for_basis(&LogicalBasis::bell())?;
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let amps: Vec<_> = set
        .basis
        .zero()
        .amplitudes()
        .iter()
        .zip(set.basis.one().amplitudes())
        .map(|(a, b)| a * c + b * s)
        .collect();
    let psi = crate::linalg::StateVector::new(amps)?;
    uncertainty_lhs(&set, &DensityMatrix::pure(&psi), d1, d2)
}
