//! From a logical Bell operator to experimental settings and an abstract
//! Bell expression.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expression::{symbolize, BellExpression, Bindings, OpFactor, ProductSum, Setting, SymbolMap};
use crate::pauli::{Pauli, PauliSum, PauliTerm};
use crate::pseudo::PseudoPauliSet;
use crate::stabilizer::LogicalBasis;

/// Tolerance for matrix identities along the pipeline.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Decomposition {
    None,
    Complementary { pivot: usize },
    Chained { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellRecipe {
    pub basis: LogicalBasis,
    pub k: [f64; 3],
    pub beta_q: f64,
    pub decomposition: Decomposition,
    pub symbols: SymbolMap,
    /// Names of the pivot settings, in order of first appearance.
    pub pivot_symbols: Vec<String>,
}

pub fn default_pivot_symbols() -> Vec<String> {
    vec!["A".into(), "B".into()]
}

impl BellRecipe {
    pub fn new(basis: LogicalBasis, k: [f64; 3], beta_q: f64) -> Result<Self> {
        let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Recipe(format!("direction k has norm {norm}, expected 1")));
        }
        if !(beta_q > 0.0 && beta_q.is_finite()) {
            return Err(Error::Recipe(format!("beta_q must be positive, got {beta_q}")));
        }
        Ok(BellRecipe {
            basis,
            k,
            beta_q,
            decomposition: Decomposition::None,
            symbols: SymbolMap::default(),
            pivot_symbols: default_pivot_symbols(),
        })
    }

    pub fn with_decomposition(mut self, d: Decomposition) -> Self {
        self.decomposition = d;
        self
    }

    pub fn with_symbols(mut self, map: SymbolMap) -> Self {
        self.symbols = map;
        self
    }

    pub fn with_pivot_symbols(mut self, names: &[&str]) -> Self {
        self.pivot_symbols = names.iter().map(|s| s.to_string()).collect();
        self
    }
}

/// `2^(n-1) / max|k_i|`, times `sqrt 2` when a complementary split follows.
/// Makes the largest stabilizer coefficient one before any split.
pub fn auto_beta(n: usize, k: [f64; 3], decomposition: &Decomposition) -> f64 {
    let kmax = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let base = (1u64 << (n - 1)) as f64 / kmax;
    match decomposition {
        Decomposition::Complementary { .. } => base * std::f64::consts::SQRT_2,
        _ => base,
    }
}

/// `beta_q (k . sigma~)` in stabilizer form.
pub fn build_logical(r: &BellRecipe) -> Result<PauliSum> {
    let set = PseudoPauliSet::for_basis(&r.basis)?;
    Ok(set.along(r.k)?.scale(r.beta_q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposed {
    pub operator: ProductSum,
    pub settings: Vec<Setting>,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() <= tol)
}

struct Group {
    rest: PauliTerm,
    weight: f64,
    obs: [f64; 3],
    size: usize,
}

/// Rewrites the pivot qubit's operators as unit-vector observables.
///
/// Terms sharing the same letters off the pivot merge into one weighted
/// observable. When exactly two groups remain and their observables
/// anticommute, each is split over `(O1 ± O2)/sqrt 2`.
pub fn complementary_decompose(b: &PauliSum, pivot: usize, names: &[String]) -> Result<Decomposed> {
    let n = b.n();
    if pivot >= n {
        return Err(Error::InvalidArgument(format!("pivot {pivot} outside 0..{n}")));
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut raw: Vec<(PauliTerm, [f64; 3], usize)> = Vec::new();
    let mut ordered: Vec<(&PauliTerm, f64)> = b.iter().collect();
    ordered.sort_by_key(|(t, _)| t.label());
    for (t, c) in ordered {
        let letter = t.letter(pivot);
        if letter == Pauli::I {
            return Err(Error::DecompositionNotApplicable(format!(
                "term {} has identity on the pivot",
                t.label()
            )));
        }
        let rest = t.with_letter(pivot, Pauli::I);
        let l = letter.bloch();
        let v = [c * l[0], c * l[1], c * l[2]];
        match raw.iter_mut().find(|(r, _, _)| *r == rest) {
            Some(entry) => {
                for (e, x) in entry.1.iter_mut().zip(v) {
                    *e += x;
                }
                entry.2 += 1;
            }
            None => raw.push((rest, v, 1)),
        }
    }
    let mut seen: Vec<[f64; 3]> = Vec::new();
    for (rest, v, size) in raw {
        let w = dot(v, v).sqrt();
        if w < crate::pauli::PRUNE_TOL {
            continue;
        }
        let mut obs = [v[0] / w, v[1] / w, v[2] / w];
        let mut weight = w;
        if let Some(known) = seen.iter().find(|s| close(**s, obs, 1e-9) || close(**s, obs.map(|x| -x), 1e-9)) {
            if !close(*known, obs, 1e-9) {
                weight = -weight;
            }
            obs = *known;
        } else {
            let first = obs.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
            if first < 0.0 {
                obs = obs.map(|x| -x);
                weight = -weight;
            }
            seen.push(obs);
        }
        groups.push(Group {
            rest,
            weight,
            obs,
            size,
        });
    }
    let merged = groups.iter().any(|g| g.size > 1);
    let split = groups.len() == 2 && dot(groups[0].obs, groups[1].obs).abs() < 1e-9;

    let name = |k: usize| -> String {
        names
            .get(k)
            .cloned()
            .unwrap_or_else(|| format!("S{}", k + 1))
    };
    let rest_factors = |t: &PauliTerm| -> Vec<OpFactor> {
        t.letters()
            .into_iter()
            .enumerate()
            .filter(|(_, l)| *l != Pauli::I)
            .map(|(q, l)| OpFactor::letter(q, l))
            .collect()
    };
    let with_pivot = |t: &PauliTerm, f: OpFactor| -> Vec<OpFactor> {
        let mut fs = rest_factors(t);
        let at = fs.iter().position(|x| x.party > pivot).unwrap_or(fs.len());
        fs.insert(at, f);
        fs
    };

    let mut op = ProductSum::new(n);
    if split {
        let (g1, g2) = (&groups[0], &groups[1]);
        let plus = [0, 1, 2].map(|k| (g1.obs[k] + g2.obs[k]) * FRAC_1_SQRT_2);
        let minus = [0, 1, 2].map(|k| (g1.obs[k] - g2.obs[k]) * FRAC_1_SQRT_2);
        let (sp, sm) = (name(0), name(1));
        let a = g1.weight * FRAC_1_SQRT_2;
        let c = g2.weight * FRAC_1_SQRT_2;
        op.push(a, with_pivot(&g1.rest, OpFactor::named(pivot, plus, &sp)));
        op.push(a, with_pivot(&g1.rest, OpFactor::named(pivot, minus, &sm)));
        op.push(c, with_pivot(&g2.rest, OpFactor::named(pivot, plus, &sp)));
        op.push(-c, with_pivot(&g2.rest, OpFactor::named(pivot, minus, &sm)));
    } else if merged {
        for g in &groups {
            let k = seen
                .iter()
                .position(|s| close(*s, g.obs, 1e-12))
                .expect("observable registered");
            op.push(g.weight, with_pivot(&g.rest, OpFactor::named(pivot, g.obs, &name(k))));
        }
    } else {
        return Err(Error::DecompositionNotApplicable(format!(
            "no terms share letters off qubit {pivot}, and the remaining {} groups do not form an anticommuting pair",
            groups.len()
        )));
    }
    let settings = op.named_settings();
    Ok(Decomposed {
        operator: op,
        settings,
    })
}

/// `Z(theta) = cos(theta) Z + sin(theta) X` as a Bloch vector.
pub fn z_theta(theta: f64) -> [f64; 3] {
    [theta.sin(), 0.0, theta.cos()]
}

/// Everything the pipeline produces for one recipe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Construction {
    /// `B^e(L)`, equal to `B^e(S)` as a Pauli sum.
    pub logical: PauliSum,
    /// `B^e`, the operator in measured settings.
    pub experimental: ProductSum,
    pub settings: Vec<Setting>,
    pub expression: BellExpression,
    pub bindings: Bindings,
    pub beta_q: f64,
}

impl Construction {
    /// Largest entrywise difference among the three renderings of the operator.
    pub fn identity_residual(&self) -> Result<f64> {
        let l = self.logical.to_dense()?;
        let e = self.experimental.to_pauli_sum()?.to_dense()?;
        let b = self.expression.bind(&self.bindings)?.to_dense()?;
        Ok(l.max_abs_diff(&e).max(l.max_abs_diff(&b)))
    }
}

pub fn build(r: &BellRecipe) -> Result<Construction> {
    if let Decomposition::Chained { n } = r.decomposition {
        if r.basis != LogicalBasis::bell() {
            return Err(Error::Recipe("the chained construction uses the Bell basis".into()));
        }
        return chained_recipe(n);
    }
    let logical = build_logical(r)?;
    let (experimental, settings) = match r.decomposition {
        Decomposition::None => (ProductSum::from_pauli_sum(&logical), Vec::new()),
        Decomposition::Complementary { pivot } => {
            let d = complementary_decompose(&logical, pivot, &r.pivot_symbols)?;
            (d.operator, d.settings)
        }
        Decomposition::Chained { .. } => unreachable!("handled above"),
    };
    let (expression, bindings) = symbolize(&experimental, &r.symbols)?;
    Ok(Construction {
        logical,
        experimental,
        settings,
        expression,
        bindings,
        beta_q: r.beta_q,
    })
}

/// Chained inequality with `n` settings per party on the Bell basis.
///
/// Uses `Z(theta_k) = [Z(phi_(k-1)) + Z(phi_k)] / (2 cos(pi/2n))` with
/// `theta_k = (k-1) pi/n`, `phi_k = (2k-1) pi/2n`, and `Z(0) = [Z(phi_1) - Z(phi_n)] / (2 cos(pi/2n))`.
pub fn chained_recipe(n: usize) -> Result<Construction> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "chained construction needs at least 2 settings, got {n}"
        )));
    }
    let nf = n as f64;
    let c = (PI / (2.0 * nf)).cos();
    let set = PseudoPauliSet::for_basis(&LogicalBasis::bell())?;
    let logical = set.z.scale(2.0 * nf * c);
    let theta = |k: usize| (k as f64 - 1.0) * PI / nf;
    let phi = |k: usize| (2.0 * k as f64 - 1.0) * PI / (2.0 * nf);
    let a = |k: usize| OpFactor::named(0, z_theta(theta(k)), &format!("A{k}"));
    let b = |k: usize| OpFactor::named(1, z_theta(phi(k)), &format!("B{k}"));
    let mut op = ProductSum::new(2);
    for k in 1..=n {
        op.push(1.0, vec![a(k), b(k)]);
    }
    for k in 2..=n {
        op.push(1.0, vec![a(k), b(k - 1)]);
    }
    op.push(-1.0, vec![a(1), b(n)]);
    let settings = op.named_settings();
    let (expression, bindings) = symbolize(&op, &SymbolMap::new(None, None, None))?;
    Ok(Construction {
        logical,
        experimental: op,
        settings,
        expression,
        bindings,
        beta_q: 2.0 * nf * c,
    })
}

/// `(1/n) sum_k Z1(theta_k) Z2(theta_k + shift)` on two qubits.
pub fn chained_average(n: usize, shift: f64) -> Result<PauliSum> {
    let mut out = PauliSum::zero(2);
    for k in 1..=n {
        let t = (k as f64 - 1.0) * PI / n as f64;
        let term = crate::expression::product_operator(
            2,
            &[(0, z_theta(t)), (1, z_theta(t + shift))],
            1.0 / n as f64,
        )?;
        out = out.add(&term)?;
    }
    Ok(out)
}
