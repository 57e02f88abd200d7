//! Pauli strings in symplectic form and real linear combinations of them.
//!
//! A [`PauliTerm`] stores `i^phase * P_0 ⊗ ... ⊗ P_(n-1)`, where the letter on
//! qubit `j` is read from bit `j` of the x and z masks: `(0,0)=I`, `(1,0)=X`,
//! `(0,1)=Z`, `(1,1)=Y`. The letter `Y` is the Hermitian one, so a term is
//! Hermitian exactly when `phase` is 0 or 2.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, DenseMatrix};

pub const MAX_QUBITS: usize = 64;

/// Coefficients below this are dropped after arithmetic.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Bloch direction of the letter; `I` maps to the zero vector.
    pub fn bloch(self) -> [f64; 3] {
        match self {
            Pauli::I => [0.0, 0.0, 0.0],
            Pauli::X => [1.0, 0.0, 0.0],
            Pauli::Y => [0.0, 1.0, 0.0],
            Pauli::Z => [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliTerm {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
fn pop(v: u64) -> u32 {
    v.count_ones()
}

impl PauliTerm {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let m = low_mask(n);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::InvalidArgument("mask has bits beyond n".into()));
        }
        Ok(PauliTerm {
            n,
            x,
            z,
            phase: phase & 3,
        })
    }

    pub fn identity(n: usize) -> Self {
        PauliTerm::new(n, 0, 0, 0).expect("valid qubit count")
    }

    /// A single letter on one qubit, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        let (x, z) = p.bits();
        PauliTerm::new(n, (x as u64) << qubit, (z as u64) << qubit, 0).expect("valid qubit count")
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut t = PauliTerm::identity(letters.len());
        for (j, p) in letters.iter().enumerate() {
            t = t.with_letter(j, *p);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        pop(self.x | self.z)
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|j| self.letter(j)).collect()
    }

    pub fn with_letter(mut self, qubit: usize, p: Pauli) -> Self {
        let (x, z) = p.bits();
        let bit = 1u64 << qubit;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
        self
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// The same string with phase zero.
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    /// `i^phase` as a complex number.
    pub fn phase_factor(&self) -> Complex64 {
        phase_to_complex(self.phase)
    }

    /// Real sign of a Hermitian term.
    pub fn sign(&self) -> Result<f64> {
        match self.phase {
            0 => Ok(1.0),
            2 => Ok(-1.0),
            _ => Err(Error::NonHermitian { residual: 2.0 }),
        }
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // Y = i X Z, so each term is i^(p + |x&z|) X^x Z^z; moving Z^z1 past X^x2
        // costs (-1)^|z1&x2|.
        let total = self.phase as u32
            + other.phase as u32
            + pop(self.x & self.z)
            + pop(other.x & other.z)
            + 2 * pop(self.z & other.x);
        let phase = ((total + 4 * 64 - pop(x & z)) % 4) as u8;
        Ok(PauliTerm {
            n: self.n,
            x,
            z,
            phase,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_n(other)?;
        Ok((pop(self.x & other.z) + pop(self.z & other.x)).is_multiple_of(2))
    }

    /// `P ⊗ Q`, with `self` on the leading qubits.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n = self.n + other.n;
        PauliTerm::new(
            n,
            self.x | (other.x << self.n),
            self.z | (other.z << self.n),
            (self.phase + other.phase) & 3,
        )
    }

    /// Letters on the listed qubits, in that order.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let letters: Vec<Pauli> = qubits.iter().map(|&q| self.letter(q)).collect();
        PauliTerm::from_letters(&letters).with_phase(self.phase)
    }

    /// Dense matrix of the term.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_cap(self.n)?;
        let mut m = DenseMatrix::zeros(1 << self.n);
        self.accumulate(&mut m, Complex64::new(1.0, 0.0));
        Ok(m)
    }

    /// Index-space masks: qubit `j` sits at bit `n-1-j` of a basis index.
    fn index_masks(&self) -> (usize, usize) {
        let rev = |m: u64| -> usize {
            let mut out = 0usize;
            for j in 0..self.n {
                if (m >> j) & 1 == 1 {
                    out |= 1 << (self.n - 1 - j);
                }
            }
            out
        };
        (rev(self.x), rev(self.z))
    }

    pub(crate) fn accumulate(&self, m: &mut DenseMatrix, coef: Complex64) {
        let (xi, zi) = self.index_masks();
        let base = coef * phase_to_complex(((self.phase as u32 + pop(self.x & self.z)) % 4) as u8);
        for b in 0..(1usize << self.n) {
            let v = if (zi & b).count_ones() % 2 == 1 { -base } else { base };
            m.add_at(b ^ xi, b, v);
        }
    }

    /// `out += coef * P * psi`, without forming a matrix.
    pub(crate) fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64], coef: Complex64) {
        let (xi, zi) = self.index_masks();
        let base = coef * phase_to_complex(((self.phase as u32 + pop(self.x & self.z)) % 4) as u8);
        for (b, a) in psi.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let v = if (zi & b).count_ones() % 2 == 1 { -base } else { base };
            out[b ^ xi] += v * a;
        }
    }

    /// `tr(P M)` for a dense matrix of matching size.
    pub fn trace_with(&self, m: &DenseMatrix) -> Complex64 {
        let (xi, zi) = self.index_masks();
        let base = phase_to_complex(((self.phase as u32 + pop(self.x & self.z)) % 4) as u8);
        let mut s = Complex64::new(0.0, 0.0);
        // P[c ^ x, c] = base * (-1)^|z & c|, so tr(PM) = sum_c P[c^x, c] M[c, c^x]
        for c in 0..m.dim() {
            let v = m.get(c, c ^ xi);
            if (zi & c).count_ones() % 2 == 1 {
                s -= v;
            } else {
                s += v;
            }
        }
        s * base
    }

    pub fn label(&self) -> String {
        self.letters().iter().map(|p| p.as_char()).collect()
    }
}

pub(crate) fn phase_to_complex(p: u8) -> Complex64 {
    match p & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl FromStr for PauliTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else {
            (0, t)
        };
        if body.is_empty() {
            return Err(Error::parse(s, "no Pauli letters"));
        }
        if body.chars().count() > MAX_QUBITS {
            return Err(Error::parse(s, format!("more than {MAX_QUBITS} qubits")));
        }
        let mut letters = Vec::with_capacity(body.len());
        for (k, c) in body.chars().enumerate() {
            letters.push(Pauli::from_char(c).ok_or_else(|| {
                Error::parse(s, format!("unexpected character `{c}` at position {k}"))
            })?);
        }
        Ok(PauliTerm::from_letters(&letters).with_phase(phase))
    }
}

impl Serialize for PauliTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real combination of unsigned Pauli strings; Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliTerm, f64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_term(PauliTerm::identity(n), 1.0).expect("identity is Hermitian")
    }

    /// `coef * term`; the term must be Hermitian.
    pub fn from_term(term: PauliTerm, coef: f64) -> Result<Self> {
        let mut s = Self::zero(term.n);
        s.add_term(term, coef)?;
        Ok(s)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut out: Option<PauliSum> = None;
        for (label, c) in pairs {
            let t: PauliTerm = label.parse()?;
            let s = out.get_or_insert_with(|| PauliSum::zero(t.n));
            s.add_term(t, c)?;
        }
        out.ok_or_else(|| Error::InvalidArgument("empty term list".into()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in storage order; keys always have phase zero.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliTerm, f64)> {
        self.terms.iter().map(|(t, c)| (t, *c))
    }

    pub fn coefficient(&self, term: &PauliTerm) -> f64 {
        self.terms.get(&term.unsigned()).copied().unwrap_or(0.0)
            * term.sign().unwrap_or(f64::NAN)
    }

    pub fn add_term(&mut self, term: PauliTerm, coef: f64) -> Result<()> {
        if term.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: term.n,
            });
        }
        let sign = term.sign()?;
        let key = term.unsigned();
        let e = self.terms.entry(key).or_insert(0.0);
        *e += sign * coef;
        if e.abs() < PRUNE_TOL {
            self.terms.remove(&key);
        }
        Ok(())
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add_term(*t, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = PauliSum::zero(self.n);
        for (t, c) in self.iter() {
            let v = c * s;
            if v.abs() >= PRUNE_TOL {
                out.terms.insert(*t, v);
            }
        }
        out
    }

    /// Drops coefficients with magnitude below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        PauliSum {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() >= tol)
                .map(|(t, c)| (*t, *c))
                .collect(),
        }
    }

    /// Operator product; generally not Hermitian.
    pub fn mul(&self, other: &Self) -> Result<ComplexPauliSum> {
        self.to_complex().mul(&other.to_complex())
    }

    pub fn to_complex(&self) -> ComplexPauliSum {
        let mut out = ComplexPauliSum::zero(self.n);
        for (t, c) in self.iter() {
            out.add_term(*t, Complex64::new(c, 0.0));
        }
        out
    }

    /// `PQ + QP`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let pq = self.mul(other)?;
        let qp = other.mul(self)?;
        pq.add(&qp)?.to_hermitian(1e-12)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_cap(self.n)?;
        let mut m = DenseMatrix::zeros(1 << self.n);
        for (t, c) in self.iter() {
            t.accumulate(&mut m, Complex64::new(c, 0.0));
        }
        Ok(m)
    }

    /// `B |psi>` computed term by term.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != 1usize << self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: psi.len().trailing_zeros() as usize,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (t, c) in self.iter() {
            t.apply_into(psi, &mut out, Complex64::new(c, 0.0));
        }
        Ok(out)
    }

    pub fn expectation(&self, psi: &[Complex64]) -> Result<f64> {
        let b = self.apply(psi)?;
        Ok(crate::linalg::inner(psi, &b).re)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        self.to_dense()?.lambda_max()
    }

    pub fn lambda_min(&self) -> Result<f64> {
        self.to_dense()?.lambda_min()
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coef_diff(&self, other: &Self) -> Result<f64> {
        self.check_n(other)?;
        let mut worst: f64 = 0.0;
        for (t, c) in self.iter() {
            worst = worst.max((c - other.terms.get(t).copied().unwrap_or(0.0)).abs());
        }
        for (t, c) in other.iter() {
            if !self.terms.contains_key(t) {
                worst = worst.max(c.abs());
            }
        }
        Ok(worst)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_coef_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Sum of absolute coefficients, ignoring the identity term.
    pub fn l1_norm(&self) -> f64 {
        self.iter().map(|(_, c)| c.abs()).sum()
    }

    /// `(label, coefficient)` pairs sorted by label.
    pub fn to_pairs(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self.iter().map(|(t, c)| (t.label(), c)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let mut out = PauliSum::zero(self.n + other.n);
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                out.add_term(a.kron(b)?, ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Conjugation `U B U^dagger` by a Hermitian Pauli `U` (itself an involution).
    pub fn conjugate_by(&self, u: &PauliTerm) -> Result<Self> {
        let mut out = PauliSum::zero(self.n);
        for (t, c) in self.iter() {
            let s = if t.commutes(u)? { 1.0 } else { -1.0 };
            out.add_term(*t, s * c)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (label, c)) in self.to_pairs().iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}*{label}", crate::report::fmt_num(c.abs()))?;
            } else {
                write!(f, "{}*{label}", crate::report::fmt_num(*c))?;
            }
        }
        Ok(())
    }
}

impl Serialize for PauliSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliSum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(String, f64)> = Vec::deserialize(d)?;
        PauliSum::from_pairs(pairs.iter().map(|(s, c)| (s.as_str(), *c)))
            .map_err(serde::de::Error::custom)
    }
}

/// Complex combination of Pauli strings, used for intermediate products.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPauliSum {
    n: usize,
    terms: BTreeMap<PauliTerm, Complex64>,
}

impl ComplexPauliSum {
    pub fn zero(n: usize) -> Self {
        ComplexPauliSum {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliTerm, Complex64)> {
        self.terms.iter().map(|(t, c)| (t, *c))
    }

    pub fn add_term(&mut self, term: PauliTerm, coef: Complex64) {
        let key = term.unsigned();
        let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += coef * term.phase_factor();
        if e.norm() < PRUNE_TOL {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add_term(*t, c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = ComplexPauliSum::zero(self.n);
        for (t, c) in self.iter() {
            out.add_term(*t, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = ComplexPauliSum::zero(self.n);
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                out.add_term(a.multiply(b)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// Real part as a [`PauliSum`]; fails if any imaginary part exceeds `tol`.
    pub fn to_hermitian(&self, tol: f64) -> Result<PauliSum> {
        let mut out = PauliSum::zero(self.n);
        for (t, c) in self.iter() {
            if c.im.abs() > tol {
                return Err(Error::NonHermitian { residual: c.im.abs() });
            }
            out.add_term(*t, c.re)?;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_cap(self.n)?;
        let mut m = DenseMatrix::zeros(1 << self.n);
        for (t, c) in self.iter() {
            t.accumulate(&mut m, c);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Independent dense oracle: Kronecker products of 2x2 matrices.
    fn letter_matrix(p: Pauli) -> DenseMatrix {
        let rows = match p {
            Pauli::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
            Pauli::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            Pauli::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            Pauli::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        };
        DenseMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
    }

    fn kron_oracle(term: &PauliTerm) -> DenseMatrix {
        let mut m = DenseMatrix::identity(1);
        for p in term.letters() {
            m = m.kron(&letter_matrix(p));
        }
        m.scale(term.phase_factor())
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(t("X").multiply(&t("Z")).unwrap(), t("-iY"));
        assert_eq!(t("Z").multiply(&t("X")).unwrap(), t("iY"));
        assert_eq!(t("X").multiply(&t("Y")).unwrap(), t("iZ"));
        assert_eq!(t("Y").multiply(&t("Y")).unwrap(), t("I"));
        assert_eq!(t("IZ").multiply(&t("IZ")).unwrap(), t("+II"));
    }

    #[test]
    fn five_qubit_generator_product_matches_dense() {
        let a = t("ZXZII");
        let b = t("IZXZI");
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.label(), "ZYYZI");
        let dense = kron_oracle(&a).matmul(&kron_oracle(&b));
        assert!(ab.to_dense().unwrap().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            t("XZ").multiply(&t("X")),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(t("XZ").commutes(&t("X")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!t("X").commutes(&t("Z")).unwrap());
        assert!(t("XI").commutes(&t("IZ")).unwrap());
        assert!(!t("ZZZZZ").commutes(&t("ZXZII")).unwrap());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+ZXZII", "-YIIZZ", "+iXY", "-iZ"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("XX").to_string(), "+XX");
        assert!("+XQ".parse::<PauliTerm>().is_err());
        assert!("-".parse::<PauliTerm>().is_err());
    }

    #[test]
    fn anticommutator_examples() {
        let x = PauliSum::from_pairs([("X", 1.0)]).unwrap();
        let z = PauliSum::from_pairs([("Z", 1.0)]).unwrap();
        assert!(x.anticommutator(&z).unwrap().is_empty());
        let xx = x.anticommutator(&x).unwrap();
        assert_eq!(xx.to_pairs(), vec![("I".to_string(), 2.0)]);
    }

    #[test]
    fn y_renders_with_imaginary_entries() {
        let y = PauliSum::from_pairs([("Y", 1.0)]).unwrap().to_dense().unwrap();
        assert_eq!(y.get(0, 1), c(0., -1.));
        assert_eq!(y.get(1, 0), c(0., 1.));
    }

    #[test]
    fn identity_renders_as_identity() {
        let i = PauliSum::identity(1).to_dense().unwrap();
        assert_eq!(i, DenseMatrix::identity(2));
    }

    #[test]
    fn bell_pseudo_z_spectrum() {
        let zt = PauliSum::from_pairs([("XX", 0.5), ("ZZ", 0.5)]).unwrap();
        let e = zt.to_dense().unwrap().eigh().unwrap();
        let expect = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in e.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chsh_operator_top_eigenvalue() {
        let s = 2f64.sqrt();
        let b = PauliSum::from_pairs([("XX", s), ("ZZ", s)]).unwrap();
        assert!((b.lambda_max().unwrap() - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn z_has_unit_top_eigenvalue() {
        let z = PauliSum::from_pairs([("Z", 1.0)]).unwrap();
        assert!((z.lambda_max().unwrap() - 1.0).abs() < 1e-14);
        assert!((z.lambda_min().unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let big = PauliSum::identity(crate::linalg::dense_qubit_cap() + 1);
        assert!(matches!(big.to_dense(), Err(Error::QubitCapExceeded { .. })));
    }

    #[test]
    fn non_hermitian_terms_rejected_in_sums() {
        let mut s = PauliSum::zero(1);
        assert!(s.add_term(t("iX"), 1.0).is_err());
    }

    fn arb_term(max_n: usize) -> impl Strategy<Value = PauliTerm> {
        (1..=max_n).prop_flat_map(|n| {
            let m = (1u64 << n) - 1;
            (Just(n), 0..=m, 0..=m, 0u8..4)
                .prop_map(|(n, x, z, p)| PauliTerm::new(n, x, z, p).unwrap())
        })
    }

    fn arb_pair(max_n: usize) -> impl Strategy<Value = (PauliTerm, PauliTerm)> {
        (1..=max_n).prop_flat_map(|n| {
            let m = (1u64 << n) - 1;
            (0..=m, 0..=m, 0u8..4, 0..=m, 0..=m, 0u8..4).prop_map(move |(x1, z1, p1, x2, z2, p2)| {
                (
                    PauliTerm::new(n, x1, z1, p1).unwrap(),
                    PauliTerm::new(n, x2, z2, p2).unwrap(),
                )
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn product_matches_dense_oracle((a, b) in arb_pair(6)) {
            let ab = a.multiply(&b).unwrap();
            let dense = kron_oracle(&a).matmul(&kron_oracle(&b));
            prop_assert!(ab.to_dense().unwrap().max_abs_diff(&dense) <= 1e-12);
            prop_assert!(kron_oracle(&ab).max_abs_diff(&dense) <= 1e-12);
        }

        #[test]
        fn commutes_matches_dense_commutator((a, b) in arb_pair(6)) {
            let da = kron_oracle(&a);
            let db = kron_oracle(&b);
            let comm = da.matmul(&db).sub(&db.matmul(&da));
            let zero = comm.frobenius_norm() < 1e-12;
            prop_assert_eq!(a.commutes(&b).unwrap(), zero);
        }

        #[test]
        fn hermitian_closure((a, b) in arb_pair(8)) {
            let a = a.with_phase(0);
            let b = b.with_phase(2);
            let ab = a.multiply(&b).unwrap();
            // Hermitian iff the factors commute
            prop_assert_eq!(ab.is_hermitian(), a.commutes(&b).unwrap());
        }

        #[test]
        fn multiplication_is_associative(a in arb_term(5), seed in any::<(u64, u64, u64, u64)>()) {
            let n = a.n();
            let m = (1u64 << n) - 1;
            let b = PauliTerm::new(n, seed.0 & m, seed.1 & m, 0).unwrap();
            let c3 = PauliTerm::new(n, seed.2 & m, seed.3 & m, 1).unwrap();
            let left = a.multiply(&b).unwrap().multiply(&c3).unwrap();
            let right = a.multiply(&b.multiply(&c3).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn parse_round_trip(a in arb_term(10)) {
            let back: PauliTerm = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn to_dense_is_linear(
            (a, b) in arb_pair(4),
            ca in -3.0f64..3.0,
            cb in -3.0f64..3.0,
            s in -2.0f64..2.0,
        ) {
            let p = PauliSum::from_term(a.with_phase(0), ca).unwrap();
            let q = PauliSum::from_term(b.with_phase(2), cb).unwrap();
            let combo = p.scale(s).add(&q).unwrap();
            let lhs = combo.to_dense().unwrap();
            let rhs = p.to_dense().unwrap().scale(c(s, 0.)).add(&q.to_dense().unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
            prop_assert!(lhs.hermitian_residual() <= 1e-12);
        }

        #[test]
        fn sparse_apply_matches_dense(a in arb_term(5), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let psi = crate::linalg::StateVector::random(a.n(), &mut rng);
            let s = PauliSum::from_term(a.with_phase(0), 0.7).unwrap();
            let sparse = s.apply(psi.amplitudes()).unwrap();
            let dense = s.to_dense().unwrap().apply(psi.amplitudes());
            for (x, y) in sparse.iter().zip(&dense) {
                prop_assert!((x - y).norm() <= 1e-12);
            }
        }

        #[test]
        fn trace_with_matches_product_trace((a, b) in arb_pair(4)) {
            let m = kron_oracle(&b);
            let direct = kron_oracle(&a).matmul(&m).trace();
            prop_assert!((a.trace_with(&m) - direct).norm() <= 1e-12);
        }
    }
}
