//! Dense complex linear algebra at desk scale: matrices, state vectors,
//! density matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis index,
//! so `|q0 q1 ... q(n-1)>` reads left to right.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 12;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

/// Largest qubit count that may be rendered densely.
pub fn dense_qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

pub fn set_dense_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap.min(30), Ordering::Relaxed);
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    let cap = dense_qubit_cap();
    if n > cap {
        Err(Error::QubitCapExceeded { n, cap })
    } else {
        Ok(())
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used when deciding whether a matrix is Hermitian enough to diagonalize.
pub const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix rows must be square".into()));
        }
        Ok(DenseMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits, when the dimension is a power of two.
    pub fn qubits(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] += v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        DenseMatrix { dim: d, data: out }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |r, c| {
            self.get(r / b, c / b) * other.get(r % b, c % b)
        })
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Full spectral decomposition of a Hermitian matrix.
    pub fn eigh(&self) -> Result<Eigen> {
        jacobi_eigh(self)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.eigh()?.values.last().expect("non-empty spectrum"))
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim).map(|r| self.vectors.get(r, k)).collect()
    }

    pub fn top(&self) -> (f64, Vec<Complex64>) {
        let k = self.values.len() - 1;
        (self.values[k], self.vector(k))
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &[Complex64], d: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                s += a[r * d + c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigh(m: &DenseMatrix) -> Result<Eigen> {
    let d = m.dim;
    let scale = m.frobenius_norm().max(1.0);
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian { residual });
    }
    // symmetrize so rounding in the input cannot stall convergence
    let mut a: Vec<Complex64> = DenseMatrix::from_fn(d, |r, c| {
        if r == c {
            Complex64::new(m.get(r, r).re, 0.0)
        } else {
            (m.get(r, c) + m.get(c, r).conj()) * 0.5
        }
    })
    .data;
    let mut v = DenseMatrix::identity(d).data;
    let threshold = 1e-13 * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a, d) <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                // phase that makes the (p, q) entry real and positive
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotation block J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * jpp + akq * jqp;
                    a[k * d + q] = akp * jpq + akq * jqq;
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = vkp * jpp + vkq * jqp;
                    v[k * d + q] = vkp * jpq + vkq * jqq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * d + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * d + q] = ZERO;
                a[q * d + p] = ZERO;
                a[p * d + p] = Complex64::new(a[p * d + p].re, 0.0);
                a[q * d + q] = Complex64::new(a[q * d + q].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].re.total_cmp(&a[j * d + j].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let vectors = DenseMatrix::from_fn(d, |r, c| v[r * d + order[c]]);
    Ok(Eigen { values, vectors })
}

/// Applies a 2x2 operator to one qubit of an n-qubit vector in place.
pub fn apply_single_qubit(state: &mut [Complex64], n: usize, qubit: usize, op: &[[Complex64; 2]; 2]) {
    let stride = 1usize << (n - 1 - qubit);
    let dim = state.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + stride {
            let a0 = state[i];
            let a1 = state[i + stride];
            state[i] = op[0][0] * a0 + op[0][1] * a1;
            state[i + stride] = op[1][0] * a0 + op[1][1] * a1;
        }
        base += 2 * stride;
    }
}

/// The single-qubit observable `v . sigma` for a real 3-vector `(x, y, z)`.
pub fn bloch_operator(v: [f64; 3]) -> [[Complex64; 2]; 2] {
    let [x, y, z] = v;
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Pure state with unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", try_from = "Vec<[f64; 2]>")]
pub struct StateVector {
    amps: Vec<Complex64>,
}

pub const STATE_NORM_TOL: f64 = 1e-12;

impl StateVector {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state dimension {} is not a power of two",
                amps.len()
            )));
        }
        let nrm = norm(&amps);
        if (nrm - 1.0).abs() > STATE_NORM_TOL * 10.0 {
            return Err(Error::InvalidArgument(format!("state norm {nrm} is not 1")));
        }
        Ok(StateVector { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let nrm = norm(&amps);
        if nrm < 1e-300 {
            return Err(Error::InvalidArgument("zero vector cannot be normalized".into()));
        }
        for a in &mut amps {
            *a /= nrm;
        }
        Self::new(amps)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { amps }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    /// Global phase fixed so that the first non-negligible amplitude is real positive.
    pub fn phase_fixed(mut self) -> Self {
        if let Some(first) = self.amps.iter().find(|a| a.norm() > 1e-10).copied() {
            let rot = first.conj() / first.norm();
            for a in &mut self.amps {
                *a *= rot;
            }
        }
        self
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    /// `|<self|other>| == 1` within `tol`.
    pub fn equal_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    pub fn projector(&self) -> DenseMatrix {
        outer(&self.amps, &self.amps)
    }

    pub fn expectation(&self, m: &DenseMatrix) -> f64 {
        inner(&self.amps, &m.apply(&self.amps)).re
    }

    pub fn kron(&self, other: &Self) -> Self {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector { amps }
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(s: StateVector) -> Self {
        s.amps.iter().map(|a| [a.re, a.im]).collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        StateVector::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// `|a><b|`
pub fn outer(a: &[Complex64], b: &[Complex64]) -> DenseMatrix {
    assert_eq!(a.len(), b.len());
    DenseMatrix::from_fn(a.len(), |r, c| a[r] * b[c].conj())
}

/// Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DenseMatrix,
}

impl DensityMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if m.hermitian_residual() > 1e-12 {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} is not 1")));
        }
        if m.lambda_min()? < -1e-10 {
            return Err(Error::InvalidArgument("density matrix is not positive".into()));
        }
        Ok(DensityMatrix { m })
    }

    pub fn pure(state: &StateVector) -> Self {
        DensityMatrix {
            m: state.projector(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        DensityMatrix {
            m: DenseMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Convex mixture `sum_k p_k |psi_k><psi_k|`; weights are renormalized.
    pub fn mixture(components: &[(f64, StateVector)]) -> Result<Self> {
        let total: f64 = components.iter().map(|(p, _)| *p).sum();
        if components.is_empty() || total <= 0.0 || components.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::InvalidArgument("mixture weights must be nonnegative".into()));
        }
        let dim = components[0].1.dim();
        let mut m = DenseMatrix::zeros(dim);
        for (p, s) in components {
            m = m.add(&s.projector().scale(Complex64::new(p / total, 0.0)));
        }
        Ok(DensityMatrix { m })
    }

    /// `G G^dagger / tr(G G^dagger)` with complex Gaussian `G`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let dim = 1 << n;
        let g = DenseMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        let mut m = m.scale(Complex64::new(1.0 / tr, 0.0));
        // exact hermiticity after rounding
        m = DenseMatrix::from_fn(dim, |r, c| {
            if r == c {
                Complex64::new(m.get(r, r).re, 0.0)
            } else if r < c {
                m.get(r, c)
            } else {
                m.get(c, r).conj()
            }
        });
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim
    }

    /// `tr(rho M)`, real part.
    pub fn expectation(&self, op: &DenseMatrix) -> f64 {
        assert_eq!(self.m.dim, op.dim, "dimension mismatch");
        let d = self.m.dim;
        let mut s = ZERO;
        for r in 0..d {
            for c in 0..d {
                s += self.m.get(r, c) * op.get(c, r);
            }
        }
        s.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jacobi_diagonalizes_pauli_y() {
        let y = DenseMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]])
            .unwrap();
        let e = y.eigh().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let (_, v) = e.top();
        let yv = y.apply(&v);
        for (a, b) in yv.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(3, &mut rng);
        let m = rho.matrix().clone();
        let e = m.eigh().unwrap();
        let d = m.dim();
        let rebuilt = DenseMatrix::from_fn(d, |r, cc| {
            (0..d)
                .map(|k| e.vectors.get(r, k) * e.values[k] * e.vectors.get(cc, k).conj())
                .sum()
        });
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
    }

    // Oracle: real symmetric embedding [[Re, -Im], [Im, Re]] has each
    // eigenvalue of the Hermitian matrix twice.
    fn nalgebra_spectrum(m: &DenseMatrix) -> Vec<f64> {
        let d = m.dim();
        let big = nalgebra::DMatrix::from_fn(2 * d, 2 * d, |r, cc| {
            let v = m.get(r % d, cc % d);
            match (r < d, cc < d) {
                (true, true) | (false, false) => v.re,
                (true, false) => -v.im,
                (false, true) => v.im,
            }
        });
        let mut vals: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.into_iter().step_by(2).collect()
    }

    #[test]
    fn jacobi_matches_independent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g = DenseMatrix::from_fn(8, |_, _| {
                c(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let h = g.add(&g.adjoint());
            let ours = h.eigh().unwrap().values;
            let oracle = nalgebra_spectrum(&h);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn jacobi_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = DensityMatrix::random(4, &mut rng).matrix().clone();
        assert_eq!(m.eigh().unwrap().values, m.eigh().unwrap().values);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = DenseMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]])
            .unwrap();
        assert!(matches!(m.eigh(), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn phase_fix_makes_first_amplitude_positive() {
        let s = StateVector::new(vec![c(0., 0.), c(0., -1.0)]).unwrap().phase_fixed();
        assert!((s.amplitudes()[1] - c(1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn random_density_matrix_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = DensityMatrix::random(2, &mut rng);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn single_qubit_application_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StateVector::random(3, &mut rng);
        let op = bloch_operator([0.6, 0.0, 0.8]);
        let mut applied = psi.amplitudes().to_vec();
        apply_single_qubit(&mut applied, 3, 1, &op);
        let local = DenseMatrix::from_rows(&[op[0].to_vec(), op[1].to_vec()]).unwrap();
        let full = DenseMatrix::identity(2).kron(&local).kron(&DenseMatrix::identity(2));
        let expect = full.apply(psi.amplitudes());
        for (a, b) in applied.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
