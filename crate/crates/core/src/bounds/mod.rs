//! Classical and quantum bounds of Bell expressions.

pub mod classical;
pub mod seesaw;
pub mod sos;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use classical::{classical_bounds, classical_sampled, ClassicalBounds, MAX_EXACT_SYMBOLS};
pub use seesaw::{seesaw_optimize, SeesawResult, DEFAULT_RESTARTS};
pub use sos::{search_pairing, sos_verify, SosCertificate, SosReport, SosStatus};

use crate::construct::Construction;
use crate::error::{Error, Result};
use crate::expression::BellExpression;
use crate::linalg::{check_cap, StateVector};
use crate::pauli::PauliSum;

/// Tolerance for comparing bounds.
pub const BOUND_TOL: f64 = 1e-9;

/// Vertices drawn when the expression is too large to enumerate.
pub const FALLBACK_SAMPLES: usize = 1 << 20;

/// One `±1` value per symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignedValue {
    pub party: usize,
    pub symbol: String,
    pub value: i8,
}

pub type Assignment = Vec<AssignedValue>;

pub fn assignment(expr: &BellExpression, values: &[i8]) -> Assignment {
    let mut out = Vec::with_capacity(values.len());
    let mut it = values.iter();
    for (party, names) in expr.symbols().iter().enumerate() {
        for name in names {
            out.push(AssignedValue {
                party,
                symbol: name.clone(),
                value: *it.next().expect("one value per symbol"),
            });
        }
    }
    out
}

/// `lambda_max` of the operator and a top eigenvector.
pub fn quantum_lower_bound(be: &PauliSum) -> Result<(f64, StateVector)> {
    check_cap(be.n())?;
    let (value, v) = be.to_dense()?.eigh()?.top();
    Ok((value, StateVector::normalized(v)?.phase_fixed()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub classical_min: f64,
    pub classical_max: f64,
    /// False when the symbol budget forced sampling.
    pub classical_exact: bool,
    pub classical_witness: Assignment,
    pub quantum_lower: f64,
    pub quantum_witness_state: StateVector,
    pub rough_bound: f64,
    pub dichotomic_bound: f64,
    pub sos_status: SosStatus,
    pub sos: Option<SosReport>,
    pub seesaw_value: Option<f64>,
    pub violation: bool,
}

#[derive(Debug, Clone, Default)]
pub enum SosMode {
    #[default]
    Skip,
    /// Pairing search, for expressions of at most eight terms.
    Search,
    Given(SosCertificate),
}

#[derive(Debug, Clone, Default)]
pub struct BoundsOptions {
    pub sos: SosMode,
    /// Restart count; `None` skips the see-saw.
    pub seesaw_restarts: Option<usize>,
    pub seed: u64,
}

/// Full report for one construction.
pub fn compute_bounds(c: &Construction, opts: &BoundsOptions) -> Result<BoundsReport> {
    let expr = &c.expression;
    let (classical_min, classical_max, witness, exact) = match classical_bounds(expr) {
        Ok(b) => (b.min, b.max, b.argmax, true),
        Err(Error::SymbolBudgetExceeded { .. }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let (hi, lo) = classical_sampled(expr, FALLBACK_SAMPLES, &mut rng)?;
            (lo, hi, Vec::new(), false)
        }
        Err(e) => return Err(e),
    };
    let be = expr.bind(&c.bindings)?;
    let (quantum_lower, state) = quantum_lower_bound(&be)?;
    let sos = match &opts.sos {
        SosMode::Skip => None,
        SosMode::Search => match search_pairing(expr)? {
            Some(cert) => Some(sos_verify(expr, &c.bindings, &cert)?),
            None => Some(SosReport {
                status: SosStatus::Failed,
                anticommutators_cancel: false,
                residual: f64::NAN,
                claimed_bound: f64::NAN,
            }),
        },
        SosMode::Given(cert) => Some(sos_verify(expr, &c.bindings, cert)?),
    };
    let seesaw_value = match opts.seesaw_restarts {
        Some(r) => Some(seesaw_optimize(expr, r, opts.seed, Some(&c.bindings))?.value),
        None => None,
    };
    Ok(BoundsReport {
        classical_min,
        classical_max,
        classical_exact: exact,
        classical_witness: if witness.is_empty() {
            Vec::new()
        } else {
            assignment(expr, &witness)
        },
        quantum_lower,
        quantum_witness_state: state,
        rough_bound: c.beta_q,
        dichotomic_bound: expr.dichotomic_term_bound(),
        sos_status: sos.as_ref().map_or(SosStatus::NotAttempted, |s| s.status),
        sos,
        seesaw_value,
        violation: classical_max < quantum_lower - BOUND_TOL,
    })
}
