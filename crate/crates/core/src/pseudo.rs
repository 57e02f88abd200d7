//! Pseudo Pauli operators of a logical qubit, built either from dense
//! outer products or directly from the stabilizer group.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_cap, outer, DenseMatrix};
use crate::pauli::{PauliSum, PauliTerm};
use crate::stabilizer::{basis_from_flip, LogicalBasis, StabilizerGroup};

/// Largest qubit count for the full Pauli-basis scan.
pub const NUMERIC_MAX_QUBITS: usize = 6;

/// Coefficients below this are dropped after the trace decomposition.
pub const DECOMPOSE_PRUNE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoPauliSet {
    pub z: PauliSum,
    pub x: PauliSum,
    pub y: PauliSum,
    pub i: PauliSum,
    #[serde(skip)]
    pub basis: LogicalBasis,
}

impl PseudoPauliSet {
    /// Symbolic construction when the basis carries stabilizer data, numeric otherwise.
    pub fn for_basis(b: &LogicalBasis) -> Result<Self> {
        match b.stabilizer() {
            Some(s) => pseudo_paulis_symbolic(&s.group, &s.flip),
            None => pseudo_paulis_numeric(b),
        }
    }

    pub fn n(&self) -> usize {
        self.z.n()
    }

    /// `k_x X~ + k_y Y~ + k_z Z~`.
    pub fn along(&self, k: [f64; 3]) -> Result<PauliSum> {
        self.x
            .scale(k[0])
            .add(&self.y.scale(k[1]))?
            .add(&self.z.scale(k[2]))
    }

    /// `cos(theta) Z~ + sin(theta) X~`.
    pub fn rotated_z(&self, theta: f64) -> Result<PauliSum> {
        self.z.scale(theta.cos()).add(&self.x.scale(theta.sin()))
    }
}

/// Pauli coefficients `tr(P M) / 2^n` over all `4^n` strings.
pub fn pauli_decompose(m: &DenseMatrix) -> Result<PauliSum> {
    let n = m
        .qubits()
        .ok_or_else(|| Error::InvalidArgument("dimension is not a power of two".into()))?;
    if n > NUMERIC_MAX_QUBITS {
        return Err(Error::QubitCapExceeded {
            n,
            cap: NUMERIC_MAX_QUBITS,
        });
    }
    let residual = m.hermitian_residual();
    if residual > 1e-10 {
        return Err(Error::NonHermitian { residual });
    }
    let dim = 1u64 << n;
    let mut out = PauliSum::zero(n);
    for x in 0..dim {
        for z in 0..dim {
            let p = PauliTerm::new(n, x, z, 0)?;
            let c = p.trace_with(m).re / dim as f64;
            if c.abs() >= DECOMPOSE_PRUNE {
                out.add_term(p, c)?;
            }
        }
    }
    Ok(out)
}

/// Dense outer products, then the Pauli-basis scan.
pub fn pseudo_paulis_numeric(b: &LogicalBasis) -> Result<PseudoPauliSet> {
    check_cap(b.n())?;
    let z0 = b.zero().amplitudes();
    let o1 = b.one().amplitudes();
    let p00 = outer(z0, z0);
    let p11 = outer(o1, o1);
    let p01 = outer(z0, o1);
    let p10 = outer(o1, z0);
    let i = Complex64::new(0.0, 1.0);
    Ok(PseudoPauliSet {
        z: pauli_decompose(&p00.sub(&p11))?,
        x: pauli_decompose(&p01.add(&p10))?,
        y: pauli_decompose(&p10.sub(&p01).scale(i))?,
        i: pauli_decompose(&p00.add(&p11))?,
        basis: b.clone(),
    })
}

/// Half-group split of the projector expansion.
pub fn pseudo_paulis_symbolic(s: &StabilizerGroup, zc: &PauliTerm) -> Result<PseudoPauliSet> {
    let basis = basis_from_flip(s, zc)?;
    let p0 = s.expand_projector()?;
    let p1 = p0.conjugate_by(zc)?;
    let z = p0.sub(&p1)?;
    let id = p0.add(&p1)?;
    let flip = PauliSum::from_term(*zc, 1.0)?;
    let x = id.mul(&flip)?.to_hermitian(1e-12)?;
    let y = x
        .mul(&z)?
        .scale(Complex64::new(0.0, 1.0))
        .to_hermitian(1e-12)?;
    Ok(PseudoPauliSet {
        z,
        x,
        y,
        i: id,
        basis,
    })
}
