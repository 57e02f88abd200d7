//! Graph states, stabilizer groups and two-dimensional logical bases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, StateVector};
use crate::pauli::{PauliSum, PauliTerm};

/// Orthonormality tolerance for logical kets.
pub const BASIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = GraphSpec { n, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("graph with {} vertices", self.n)));
        }
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {a}")));
            }
            if a >= self.n || b >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) outside 0..{}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Cycle `0-1-...-(n-1)-0`.
    pub fn ring(n: usize) -> Self {
        GraphSpec {
            n,
            edges: (0..n).map(|i| (i, (i + 1) % n)).collect(),
        }
    }

    pub fn path(n: usize) -> Self {
        GraphSpec {
            n,
            edges: (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }

    fn neighbour_mask(&self, v: usize) -> u64 {
        // duplicated edges toggle, so an edge listed twice cancels
        let mut m = 0u64;
        for &(a, b) in &self.edges {
            if a == v {
                m ^= 1 << b;
            } else if b == v {
                m ^= 1 << a;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliTerm>,
}

impl StabilizerGroup {
    pub fn new(generators: Vec<PauliTerm>) -> Result<Self> {
        let n = generators
            .first()
            .map(|g| g.n())
            .ok_or_else(|| Error::InvalidStabilizerGroup("no generators".into()))?;
        if generators.len() != n {
            return Err(Error::InvalidStabilizerGroup(format!(
                "{} generators for {n} qubits",
                generators.len()
            )));
        }
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.n(),
                });
            }
            if !g.is_hermitian() {
                return Err(Error::InvalidStabilizerGroup(format!("{g} is not Hermitian")));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::InvalidStabilizerGroup(format!(
                        "{a} and {b} anticommute"
                    )));
                }
            }
        }
        if symplectic_rank(&generators) != n {
            return Err(Error::InvalidStabilizerGroup(
                "generators are not independent".into(),
            ));
        }
        Ok(StabilizerGroup { n, generators })
    }

    pub fn parse(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|s| s.parse()).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliTerm] {
        &self.generators
    }

    /// All `2^n` signed group elements; element `k` is the product of the
    /// generators selected by the bits of `k`.
    pub fn elements(&self) -> Result<Vec<PauliTerm>> {
        check_cap(self.n)?;
        let size = 1usize << self.n;
        let mut out = vec![PauliTerm::identity(self.n); size];
        for k in 1..size {
            let low = k.trailing_zeros() as usize;
            out[k] = out[k & (k - 1)].multiply(&self.generators[low])?;
        }
        Ok(out)
    }

    /// `prod (I + g_i) / 2` as a Pauli sum.
    pub fn expand_projector(&self) -> Result<PauliSum> {
        let w = 1.0 / (1u64 << self.n) as f64;
        let mut p = PauliSum::zero(self.n);
        for e in self.elements()? {
            p.add_term(e, w)?;
        }
        Ok(p)
    }

    /// The stabilized state, phase fixed.
    pub fn state_vector(&self) -> Result<StateVector> {
        let p = self.expand_projector()?;
        let dim = 1usize << self.n;
        // P|b> for the basis index with the largest overlap
        let mut best = (0usize, f64::MIN);
        let diag_terms: Vec<(&PauliTerm, f64)> =
            p.iter().filter(|(t, _)| t.x_mask() == 0).collect();
        for b in 0..dim {
            let mut d = 0.0;
            for (t, c) in &diag_terms {
                let zi = index_mask(t.z_mask(), self.n);
                d += if (zi & b).count_ones() % 2 == 1 { -c } else { *c };
            }
            if d > best.1 + 1e-12 {
                best = (b, d);
            }
        }
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[best.0] = Complex64::new(1.0, 0.0);
        let col = p.apply(&e)?;
        Ok(StateVector::normalized(col)?.phase_fixed())
    }

    /// Whether `t` (up to sign) is in the group, and with which sign.
    pub fn contains(&self, t: &PauliTerm) -> Result<Option<f64>> {
        for e in self.elements()? {
            if e.unsigned() == t.unsigned() {
                return Ok(Some(e.sign()? * t.sign()?));
            }
        }
        Ok(None)
    }
}

fn index_mask(m: u64, n: usize) -> usize {
    let mut out = 0usize;
    for j in 0..n {
        if (m >> j) & 1 == 1 {
            out |= 1 << (n - 1 - j);
        }
    }
    out
}

/// GF(2) rank of the stacked `(x | z)` rows.
pub fn symplectic_rank(terms: &[PauliTerm]) -> usize {
    let mut rows: Vec<u128> = terms
        .iter()
        .map(|t| t.x_mask() as u128 | ((t.z_mask() as u128) << 64))
        .collect();
    let mut rank = 0;
    for bit in 0..128 {
        let pivot = (rank..rows.len()).find(|&r| (rows[r] >> bit) & 1 == 1);
        if let Some(p) = pivot {
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && (rows[r] >> bit) & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Generator for vertex `v` is `X_v` times `Z` on every neighbour.
pub fn graph_state_generators(g: &GraphSpec) -> Result<StabilizerGroup> {
    g.validate()?;
    let gens = (0..g.n)
        .map(|v| PauliTerm::new(g.n, 1 << v, g.neighbour_mask(v), 0))
        .collect::<Result<Vec<_>>>()?;
    StabilizerGroup::new(gens)
}

/// Stabilizer description of a basis: `|0~>` is stabilized by `group`,
/// `|1~> = flip |0~>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerBasis {
    pub group: StabilizerGroup,
    pub flip: PauliTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalBasis {
    n: usize,
    zero: StateVector,
    one: StateVector,
    stabilizer: Option<StabilizerBasis>,
}

impl LogicalBasis {
    /// Explicit orthonormal kets.
    pub fn from_kets(zero: StateVector, one: StateVector) -> Result<Self> {
        if zero.dim() != one.dim() {
            return Err(Error::DimensionMismatch {
                expected: zero.qubits(),
                found: one.qubits(),
            });
        }
        let overlap = zero.inner(&one).norm();
        if overlap > BASIS_TOL {
            return Err(Error::InvalidBasis(format!(
                "kets are not orthogonal (overlap {overlap:e})"
            )));
        }
        Ok(LogicalBasis {
            n: zero.qubits(),
            zero,
            one,
            stabilizer: None,
        })
    }

    /// Real amplitudes, normalized on entry.
    pub fn from_real_kets(zero: &[f64], one: &[f64]) -> Result<Self> {
        Self::from_kets(StateVector::from_real(zero)?, StateVector::from_real(one)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero(&self) -> &StateVector {
        &self.zero
    }

    pub fn one(&self) -> &StateVector {
        &self.one
    }

    pub fn stabilizer(&self) -> Option<&StabilizerBasis> {
        self.stabilizer.as_ref()
    }

    /// `|0> , |1>` on one physical qubit.
    pub fn trivial() -> Self {
        LogicalBasis {
            n: 1,
            zero: StateVector::basis(1, 0),
            one: StateVector::basis(1, 1),
            stabilizer: Some(StabilizerBasis {
                group: StabilizerGroup::parse(&["Z"]).expect("valid group"),
                flip: "X".parse().expect("valid term"),
            }),
        }
    }

    /// `(|00>+|11>)/sqrt2` and `(|01>-|10>)/sqrt2`, from `{XX, ZZ}` with flip `Z1 X2`.
    pub fn bell() -> Self {
        let group = StabilizerGroup::parse(&["XX", "ZZ"]).expect("valid group");
        basis_from_flip(&group, &"ZX".parse().expect("valid term")).expect("valid flip")
    }

    /// Three-qubit basis of the Mermin and Svetlichny constructions.
    pub fn ghz3() -> Self {
        // |0~> = [|0>(|00>-|11>) - |1>(|01>+|10>)]/2
        // |1~> = [|0>(|01>+|10>) + |1>(|00>-|11>)]/2
        let zero = [1.0, 0.0, 0.0, -1.0, 0.0, -1.0, -1.0, 0.0];
        let one = [0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, -1.0];
        Self::from_real_kets(&zero, &one).expect("orthonormal kets")
    }

    /// Five-qubit ring graph state with the all-Z flip.
    pub fn ring5() -> Self {
        let g = graph_state_generators(&GraphSpec::ring(5)).expect("valid graph");
        basis_from_flip(&g, &"ZZZZZ".parse().expect("valid term")).expect("valid flip")
    }
}

/// `|0~>` is the group's state and `|1~> = zc |0~>` exactly (no phase fixing).
pub fn basis_from_flip(s: &StabilizerGroup, zc: &PauliTerm) -> Result<LogicalBasis> {
    if zc.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            found: zc.n(),
        });
    }
    if !zc.is_hermitian() {
        return Err(Error::InvalidFlip(format!("{zc} is not Hermitian")));
    }
    let mut anticommuting = false;
    for g in s.generators() {
        if !zc.commutes(g)? {
            anticommuting = true;
        }
    }
    if !anticommuting {
        return Err(Error::InvalidFlip(format!(
            "{zc} commutes with every generator"
        )));
    }
    let zero = s.state_vector()?;
    let flip = PauliSum::from_term(*zc, 1.0)?;
    let one = StateVector::normalized(flip.apply(zero.amplitudes())?)?;
    let mut b = LogicalBasis::from_kets(zero, one)?;
    b.stabilizer = Some(StabilizerBasis {
        group: s.clone(),
        flip: *zc,
    });
    Ok(b)
}

/// Count of group elements commuting with the flip.
pub fn commuting_with_flip(s: &StabilizerGroup, zc: &PauliTerm) -> Result<usize> {
    let mut k = 0;
    for e in s.elements()? {
        if e.commutes(zc)? {
            k += 1;
        }
    }
    Ok(k)
}
