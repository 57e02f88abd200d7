//! Sum-of-squares certificates built from pairs of expression terms.
//!
//! A certificate pairs up the `2K` unit-weight terms as `(P_k, Q_k)`. When the
//! anticommutators `{P_k, Q_k}` sum to zero, `sqrt(2) K I - B` equals
//! `(1/sqrt 2) sum_k (I - (P_k + Q_k)/sqrt 2)^2`, which is positive.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expression::{product_operator, BellExpression, Bindings, Factor};
use crate::linalg::DenseMatrix;

/// Operator identities hold to this entrywise.
pub const SOS_TOL: f64 = 1e-10;

/// Largest term count for the pairing search.
pub const SEARCH_MAX_TERMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    /// Index pairs into the expression's term order.
    pub partition: Vec<(usize, usize)>,
    pub claimed_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SosStatus {
    Verified,
    Failed,
    NotAttempted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosReport {
    pub status: SosStatus,
    /// Whether the anticommutators cancel in the free algebra of symbols.
    pub anticommutators_cancel: bool,
    pub residual: f64,
    pub claimed_bound: f64,
}

type Word = Vec<Vec<usize>>;

/// Per-party words of `P Q`, cancelling `s s = I`.
fn product_word(parties: usize, p: &[Factor], q: &[Factor]) -> Word {
    let mut w = vec![Vec::new(); parties];
    for &(party, s) in p.iter().chain(q) {
        let word = &mut w[party];
        if word.last() == Some(&s) {
            word.pop();
        } else {
            word.push(s);
        }
    }
    w
}

fn unit_terms(expr: &BellExpression) -> Result<Vec<(Vec<Factor>, f64)>> {
    expr.terms()
        .map(|(fs, c)| {
            if (c.abs() - 1.0).abs() > 1e-12 {
                Err(Error::MalformedCertificate(format!(
                    "term coefficient {c} is not +-1"
                )))
            } else {
                Ok((fs.to_vec(), c.signum()))
            }
        })
        .collect()
}

fn check_partition(partition: &[(usize, usize)], terms: usize) -> Result<()> {
    let mut seen = vec![false; terms];
    for &(a, b) in partition {
        for i in [a, b] {
            if i >= terms {
                return Err(Error::MalformedCertificate(format!(
                    "term index {i} out of range ({terms} terms)"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::MalformedCertificate(format!("term {i} used twice")));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::MalformedCertificate(format!("term {i} not covered")));
    }
    Ok(())
}

/// `sum_k {P_k, Q_k}` vanishes as a formal sum of words.
fn anticommutators_cancel(
    parties: usize,
    terms: &[(Vec<Factor>, f64)],
    partition: &[(usize, usize)],
) -> bool {
    let mut acc: BTreeMap<Word, f64> = BTreeMap::new();
    for &(a, b) in partition {
        let (p, cp) = &terms[a];
        let (q, cq) = &terms[b];
        for w in [product_word(parties, p, q), product_word(parties, q, p)] {
            *acc.entry(w).or_default() += cp * cq;
        }
    }
    acc.values().all(|c| c.abs() < 1e-12)
}

fn term_matrix(
    expr: &BellExpression,
    bindings: &Bindings,
    term: &(Vec<Factor>, f64),
) -> Result<DenseMatrix> {
    let n = expr.parties();
    let mut factors = Vec::with_capacity(term.0.len());
    for &(p, s) in &term.0 {
        let name = &expr.symbols()[p][s];
        let v = bindings.get(p, name).ok_or_else(|| Error::UnboundSymbol {
            party: p,
            symbol: name.clone(),
        })?;
        factors.push((p, v));
    }
    product_operator(n, &factors, term.1)?.to_dense()
}

/// Max entrywise gap between `claimed I - B` and the sum of squares.
fn dense_residual(
    expr: &BellExpression,
    bindings: &Bindings,
    terms: &[(Vec<Factor>, f64)],
    cert: &SosCertificate,
) -> Result<f64> {
    let dim = 1usize << expr.parties();
    let id = DenseMatrix::identity(dim);
    let lhs = id
        .scale(Complex64::from(cert.claimed_bound))
        .sub(&expr.bind(bindings)?.to_dense()?);
    let mut rhs = DenseMatrix::zeros(dim);
    for &(a, b) in &cert.partition {
        let pq = term_matrix(expr, bindings, &terms[a])?
            .add(&term_matrix(expr, bindings, &terms[b])?);
        let d = id.sub(&pq.scale(Complex64::from(1.0 / SQRT_2)));
        rhs = rhs.add(&d.matmul(&d));
    }
    Ok(lhs.max_abs_diff(&rhs.scale(Complex64::from(1.0 / SQRT_2))))
}

/// Checks the partition condition and the dense operator identity.
pub fn sos_verify(
    expr: &BellExpression,
    bindings: &Bindings,
    cert: &SosCertificate,
) -> Result<SosReport> {
    let terms = unit_terms(expr)?;
    check_partition(&cert.partition, terms.len())?;
    if expr.constant() != 0.0 {
        return Err(Error::MalformedCertificate(
            "expressions with a constant term are not supported".into(),
        ));
    }
    let cancel = anticommutators_cancel(expr.parties(), &terms, &cert.partition);
    let residual = dense_residual(expr, bindings, &terms, cert)?;
    let status = if cancel && residual <= SOS_TOL {
        SosStatus::Verified
    } else {
        SosStatus::Failed
    };
    Ok(SosReport {
        status,
        anticommutators_cancel: cancel,
        residual,
        claimed_bound: cert.claimed_bound,
    })
}

/// Called with each complete matching; returning `true` stops the search.
type Visit<'a> = dyn FnMut(&[(usize, usize)]) -> bool + 'a;

fn matchings(items: &[usize], out: &mut Vec<(usize, usize)>, f: &mut Visit) -> bool {
    let Some((&first, rest)) = items.split_first() else {
        return f(out);
    };
    for k in 0..rest.len() {
        out.push((first, rest[k]));
        let remaining: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &v)| v)
            .collect();
        if matchings(&remaining, out, f) {
            return true;
        }
        out.pop();
    }
    false
}

/// First pairing, in lexicographic order, whose anticommutators cancel.
pub fn search_pairing(expr: &BellExpression) -> Result<Option<SosCertificate>> {
    let terms = unit_terms(expr)?;
    if terms.len() > SEARCH_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "pairing search limited to {SEARCH_MAX_TERMS} terms, got {}",
            terms.len()
        )));
    }
    if terms.is_empty() || terms.len() % 2 == 1 {
        return Ok(None);
    }
    let idx: Vec<usize> = (0..terms.len()).collect();
    let mut found = None;
    matchings(&idx, &mut Vec::new(), &mut |pairs| {
        if anticommutators_cancel(expr.parties(), &terms, pairs) {
            found = Some(pairs.to_vec());
            true
        } else {
            false
        }
    });
    Ok(found.map(|partition| SosCertificate {
        claimed_bound: SQRT_2 * partition.len() as f64,
        partition,
    }))
}
