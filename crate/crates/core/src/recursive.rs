//! Recursive logical qubits: the `*` expansion that swaps one physical qubit
//! for a logical one, and the Mermin and Svetlichny families it generates.

use std::f64::consts::SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::bounds::{classical_bounds, quantum_lower_bound, BOUND_TOL};
use crate::error::{Error, Result};
use crate::expression::{symbolize, BellExpression, ProductSum, SymbolMap};
use crate::linalg::{outer, StateVector};
use crate::pauli::{Pauli, PauliSum, PauliTerm};
use crate::pseudo::PseudoPauliSet;
use crate::stabilizer::LogicalBasis;

pub const MAX_LEVEL: usize = 10;
pub const MAX_FAMILY_LEVEL: usize = 8;

/// Images of `I, X, Y, Z` and of `|0>, |1>` under one expansion.
#[derive(Debug, Clone)]
pub struct Expansion {
    basis: LogicalBasis,
    images: [PauliSum; 4],
}

fn slot(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

impl Expansion {
    pub fn new(basis: LogicalBasis) -> Result<Self> {
        let s = PseudoPauliSet::for_basis(&basis)?;
        Ok(Expansion {
            images: [s.i, s.x, s.y, s.z],
            basis,
        })
    }

    pub fn bell() -> Self {
        Self::new(LogicalBasis::bell()).expect("the Bell basis is valid")
    }

    pub fn basis(&self) -> &LogicalBasis {
        &self.basis
    }

    pub fn image(&self, p: Pauli) -> &PauliSum {
        &self.images[slot(p)]
    }

    /// Qubits added per expansion.
    pub fn growth(&self) -> usize {
        self.basis.n() - 1
    }

    /// Replaces qubit `k` of every term by the image of its letter.
    pub fn expand_operator(&self, op: &PauliSum, k: usize) -> Result<PauliSum> {
        substitute(op, k, |p| self.image(p).clone())
    }

    /// `|b>` on qubit `k` becomes the logical ket `b`.
    pub fn expand_ket(&self, psi: &StateVector, k: usize) -> Result<StateVector> {
        let n = psi.qubits();
        if k >= n {
            return Err(Error::InvalidArgument(format!("qubit {k} out of range for {n}")));
        }
        let m = self.basis.n();
        let low = n - k - 1;
        let kets = [self.basis.zero().amplitudes(), self.basis.one().amplitudes()];
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << (n - 1 + m)];
        for (b, &a) in psi.amplitudes().iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let pre = b >> (low + 1);
            let bit = (b >> low) & 1;
            let suf = b & ((1 << low) - 1);
            for (j, &c) in kets[bit].iter().enumerate() {
                out[(((pre << m) | j) << low) | suf] += a * c;
            }
        }
        StateVector::new(out)
    }
}

/// Substitutes qubit `k` of each term by `image(letter)`, extended linearly.
pub fn substitute(op: &PauliSum, k: usize, image: impl Fn(Pauli) -> PauliSum) -> Result<PauliSum> {
    let n = op.n();
    if k >= n {
        return Err(Error::InvalidArgument(format!("qubit {k} out of range for {n}")));
    }
    let mut out: Option<PauliSum> = None;
    for (t, c) in op.iter() {
        let letters = t.letters();
        let img = image(letters[k]);
        let m = img.n();
        let acc = out.get_or_insert_with(|| PauliSum::zero(n - 1 + m));
        for (it, ic) in img.iter() {
            let mut ls = letters[..k].to_vec();
            ls.extend(it.letters());
            ls.extend_from_slice(&letters[k + 1..]);
            acc.add_term(PauliTerm::from_letters(&ls), c * ic)?;
        }
    }
    Ok(out.unwrap_or_else(|| PauliSum::zero(n)))
}

/// One rung of the recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursiveLevel {
    pub n: usize,
    pub zero: StateVector,
    pub one: StateVector,
    pub z: PauliSum,
    pub x: PauliSum,
}

impl RecursiveLevel {
    pub fn physical() -> Self {
        RecursiveLevel {
            n: 1,
            zero: StateVector::basis(1, 0),
            one: StateVector::basis(1, 1),
            z: PauliSum::from_pairs([("Z", 1.0)]).expect("valid label"),
            x: PauliSum::from_pairs([("X", 1.0)]).expect("valid label"),
        }
    }

    pub fn star_expand(&self, e: &Expansion, k: usize) -> Result<Self> {
        if k >= self.n {
            return Err(Error::InvalidArgument(format!(
                "qubit {k} out of range for level {}",
                self.n
            )));
        }
        Ok(RecursiveLevel {
            n: self.n + e.growth(),
            zero: e.expand_ket(&self.zero, k)?,
            one: e.expand_ket(&self.one, k)?,
            z: e.expand_operator(&self.z, k)?,
            x: e.expand_operator(&self.x, k)?,
        })
    }

    /// Entrywise gap between the operators and their outer-product forms.
    pub fn projector_residual(&self) -> Result<f64> {
        let (a, b) = (self.zero.amplitudes(), self.one.amplitudes());
        let z = outer(a, a).sub(&outer(b, b));
        let x = outer(a, b).add(&outer(b, a));
        Ok(self
            .z
            .to_dense()?
            .max_abs_diff(&z)
            .max(self.x.to_dense()?.max_abs_diff(&x)))
    }
}

/// Expands the last qubit `n - 1` times, starting from a physical qubit.
pub fn build_level(n: usize) -> Result<RecursiveLevel> {
    build_level_with(n, &Expansion::bell())
}

pub fn build_level_with(n: usize, e: &Expansion) -> Result<RecursiveLevel> {
    if n == 0 || n > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "recursion level must be in 1..={MAX_LEVEL}, got {n}"
        )));
    }
    if e.growth() != 1 && n != 1 {
        return Err(Error::InvalidArgument(
            "levels are indexed by qubit count, which needs a two-qubit expansion".into(),
        ));
    }
    let mut level = RecursiveLevel::physical();
    while level.n < n {
        level = level.star_expand(e, level.n - 1)?;
    }
    Ok(level)
}

/// Level `n + 2` in one step: the last qubit's letter goes to its level-3 image.
pub fn two_step(level: &RecursiveLevel) -> Result<(PauliSum, PauliSum)> {
    let e = Expansion::bell();
    let images: Vec<PauliSum> = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
        .into_iter()
        .map(|p| {
            let single = PauliSum::from_term(PauliTerm::single(1, 0, p), 1.0)?;
            e.expand_operator(&e.expand_operator(&single, 0)?, 1)
        })
        .collect::<Result<_>>()?;
    let last = level.n - 1;
    let img = |p: Pauli| images[slot(p)].clone();
    Ok((substitute(&level.z, last, img)?, substitute(&level.x, last, img)?))
}

/// Exact dyadic rational `num / 2^log2_den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dyadic {
    num: i64,
    log2_den: u32,
}

impl Dyadic {
    pub fn new(num: i64, log2_den: u32) -> Self {
        let (mut num, mut d) = (num, log2_den);
        while d > 0 && num % 2 == 0 {
            num /= 2;
            d -= 1;
        }
        Dyadic { num, log2_den: d }
    }

    pub fn half() -> Self {
        Dyadic::new(1, 1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1u64 << self.log2_den) as f64
    }

    fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        let d = self.log2_den.max(other.log2_den);
        (self.num << (d - self.log2_den)).cmp(&(other.num << (d - other.log2_den)))
    }

    pub fn le(&self, other: &Self) -> bool {
        self.cmp_value(other).is_le()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.log2_den)
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Largest classical value of a dyadic Pauli sum, each `(qubit, letter)` an
/// independent `±1`. Integer arithmetic only.
pub fn max_value_assignment(op: &PauliSum) -> Result<Dyadic> {
    let mut log2_den = 0u32;
    while op
        .iter()
        .any(|(_, c)| (c * (1u64 << log2_den) as f64).fract() != 0.0)
    {
        log2_den += 1;
        if log2_den > 40 {
            return Err(Error::InvalidArgument("coefficients are not dyadic".into()));
        }
    }
    let scale = (1u64 << log2_den) as f64;
    // variable per (qubit, letter) that occurs
    let mut vars: Vec<(usize, Pauli)> = Vec::new();
    let mut terms: Vec<(Vec<usize>, i64)> = Vec::new();
    for (t, c) in op.iter() {
        let mut idx = Vec::new();
        for (q, p) in t.letters().into_iter().enumerate() {
            if p == Pauli::I {
                continue;
            }
            let v = match vars.iter().position(|&e| e == (q, p)) {
                Some(v) => v,
                None => {
                    vars.push((q, p));
                    vars.len() - 1
                }
            };
            idx.push(v);
        }
        terms.push((idx, (c * scale) as i64));
    }
    if vars.len() > 24 {
        return Err(Error::SymbolBudgetExceeded {
            symbols: vars.len(),
            max: 24,
        });
    }
    let mut best = i64::MIN;
    for code in 0u64..(1 << vars.len()) {
        let total: i64 = terms
            .iter()
            .map(|(idx, c)| {
                let odd = idx.iter().filter(|&&v| (code >> v) & 1 == 1).count() % 2 == 1;
                if odd {
                    -c
                } else {
                    *c
                }
            })
            .sum();
        best = best.max(total);
    }
    Ok(Dyadic::new(best, log2_den))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueBoundReport {
    pub n: usize,
    pub max_v_z: Dyadic,
    pub max_v_x: Dyadic,
    /// Both maxima are at most one half.
    pub at_most_half: bool,
    /// Both maxima equal one half.
    pub equals_half: bool,
}

pub fn value_bound_check(n: usize) -> Result<ValueBoundReport> {
    if n > MAX_FAMILY_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "value check limited to {MAX_FAMILY_LEVEL} qubits"
        )));
    }
    let level = build_level(n)?;
    let z = max_value_assignment(&level.z)?;
    let x = max_value_assignment(&level.x)?;
    let h = Dyadic::half();
    Ok(ValueBoundReport {
        n,
        max_v_z: z,
        max_v_x: x,
        at_most_half: z.le(&h) && x.le(&h),
        equals_half: z == h && x == h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyBounds {
    pub expression: BellExpression,
    pub classical_max: f64,
    /// Value given by the `v <= 1/2` induction.
    pub induction_bound: f64,
    pub matches_induction: bool,
    pub quantum_lower: f64,
    pub expected_quantum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursiveCase {
    pub n: usize,
    pub mermin: FamilyBounds,
    pub svetlichny: FamilyBounds,
}

/// Symbols used by the family: `X -> A`, `Z -> B`.
pub fn family_symbols() -> SymbolMap {
    SymbolMap::new(Some("A"), None, Some("B"))
}

fn family_bounds(op: &PauliSum, induction: f64, expected: f64) -> Result<FamilyBounds> {
    let (expression, bindings) = symbolize(&ProductSum::from_pauli_sum(op), &family_symbols())?;
    let classical = classical_bounds(&expression)?;
    let (quantum_lower, _) = quantum_lower_bound(&expression.bind(&bindings)?)?;
    Ok(FamilyBounds {
        classical_max: classical.max,
        induction_bound: induction,
        matches_induction: (classical.max - induction).abs() <= BOUND_TOL,
        quantum_lower,
        expected_quantum: expected,
        expression,
    })
}

/// Logical operators of the `n`-party Mermin and Svetlichny cases.
pub fn family_operators(n: usize) -> Result<(PauliSum, PauliSum)> {
    let level = build_level(n)?;
    let s = (1u64 << (n - 1)) as f64;
    Ok((level.z.scale(s), level.x.add(&level.z)?.scale(s)))
}

pub fn mermin_svetlichny(n: usize) -> Result<RecursiveCase> {
    if !(3..=MAX_FAMILY_LEVEL).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "family defined for 3..={MAX_FAMILY_LEVEL} parties, got {n}"
        )));
    }
    let (m, sv) = family_operators(n)?;
    let s = (1u64 << (n - 1)) as f64;
    Ok(RecursiveCase {
        n,
        mermin: family_bounds(&m, s / 2.0, s)?,
        svetlichny: family_bounds(&sv, s, s * SQRT_2)?,
    })
}
