//! Abstract Bell expressions, the product-form operators they come from,
//! and the bindings that turn symbols back into observables.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::pauli::{Pauli, PauliSum, PauliTerm};

/// Tolerance for matching Bloch vectors to known settings.
pub const BLOCH_TOL: f64 = 1e-9;

/// One factor `(party, symbol index)` of a monomial.
pub type Factor = (usize, usize);

/// Multilinear polynomial in per-party dichotomic symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ExpressionRepr", try_from = "ExpressionRepr")]
pub struct BellExpression {
    symbols: Vec<Vec<String>>,
    terms: BTreeMap<Vec<Factor>, f64>,
    constant: f64,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    factors: Vec<Factor>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpressionRepr {
    symbols: Vec<Vec<String>>,
    terms: Vec<TermRepr>,
    constant: f64,
}

impl From<BellExpression> for ExpressionRepr {
    fn from(e: BellExpression) -> Self {
        ExpressionRepr {
            terms: e
                .terms
                .into_iter()
                .map(|(factors, coef)| TermRepr { factors, coef })
                .collect(),
            symbols: e.symbols,
            constant: e.constant,
        }
    }
}

impl TryFrom<ExpressionRepr> for BellExpression {
    type Error = Error;

    fn try_from(r: ExpressionRepr) -> Result<Self> {
        let mut e = BellExpression::new(r.symbols.len());
        e.symbols = r.symbols;
        e.constant = r.constant;
        for t in r.terms {
            e.add_term(t.factors, t.coef)?;
        }
        Ok(e)
    }
}

impl BellExpression {
    pub fn new(parties: usize) -> Self {
        BellExpression {
            symbols: vec![Vec::new(); parties],
            terms: BTreeMap::new(),
            constant: 0.0,
        }
    }

    pub fn parties(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Vec<String>] {
        &self.symbols
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Factor], f64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Total number of symbols over all parties.
    pub fn symbol_count(&self) -> usize {
        self.symbols.iter().map(Vec::len).sum()
    }

    /// Index of `name` on `party`, registering it if new.
    pub fn symbol(&mut self, party: usize, name: &str) -> Result<usize> {
        let list = self
            .symbols
            .get_mut(party)
            .ok_or_else(|| Error::InvalidArgument(format!("party {party} out of range")))?;
        if let Some(k) = list.iter().position(|s| s == name) {
            return Ok(k);
        }
        list.push(name.to_string());
        Ok(list.len() - 1)
    }

    pub fn find_symbol(&self, party: usize, name: &str) -> Option<usize> {
        self.symbols.get(party)?.iter().position(|s| s == name)
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_term(&mut self, mut factors: Vec<Factor>, coef: f64) -> Result<()> {
        factors.sort_unstable();
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "party {} appears twice in one term",
                    w[0].0
                )));
            }
        }
        for &(p, s) in &factors {
            if p >= self.parties() || s >= self.symbols[p].len() {
                return Err(Error::InvalidArgument(format!("unknown symbol ({p}, {s})")));
            }
        }
        if factors.is_empty() {
            self.constant += coef;
            return Ok(());
        }
        let e = self.terms.entry(factors.clone()).or_insert(0.0);
        *e += coef;
        if e.abs() < crate::pauli::PRUNE_TOL {
            self.terms.remove(&factors);
        }
        Ok(())
    }

    /// Builds from `(coefficient, [(party, symbol name)])` monomials.
    pub fn from_monomials(parties: usize, monomials: &[(f64, &[(usize, &str)])]) -> Result<Self> {
        let mut e = BellExpression::new(parties);
        for (c, fs) in monomials {
            let factors = fs
                .iter()
                .map(|(p, s)| e.symbol(*p, s).map(|k| (*p, k)))
                .collect::<Result<Vec<_>>>()?;
            e.add_term(factors, *c)?;
        }
        Ok(e)
    }

    /// Offset of each party's first symbol in the flattened variable list.
    pub fn variable_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.parties());
        let mut acc = 0;
        for s in &self.symbols {
            off.push(acc);
            acc += s.len();
        }
        off
    }

    /// Monomials as flattened variable indices.
    pub fn flat_terms(&self) -> Vec<(Vec<usize>, f64)> {
        let off = self.variable_offsets();
        self.terms
            .iter()
            .map(|(fs, c)| (fs.iter().map(|&(p, s)| off[p] + s).collect(), *c))
            .collect()
    }

    /// Value at a deterministic assignment, one `±1` per flattened variable.
    pub fn evaluate(&self, values: &[i8]) -> Result<f64> {
        if values.len() != self.symbol_count() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} symbols",
                values.len(),
                self.symbol_count()
            )));
        }
        let mut total = self.constant;
        for (vars, c) in self.flat_terms() {
            let sign: i32 = vars.iter().map(|&v| values[v] as i32).product();
            total += c * sign as f64;
        }
        Ok(total)
    }

    /// Sum of absolute coefficients plus the constant.
    pub fn dichotomic_term_bound(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum::<f64>() + self.constant
    }

    /// Drops terms with `|c| < tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.abs() >= tol);
        if self.constant.abs() < tol {
            self.constant = 0.0;
        }
        self
    }

    /// Scales every coefficient, the constant included.
    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.constant *= s;
        out
    }

    /// Operator obtained by substituting each symbol's observable.
    pub fn bind(&self, bindings: &Bindings) -> Result<PauliSum> {
        let n = self.parties();
        let mut out = PauliSum::zero(n);
        if self.constant != 0.0 {
            out.add_term(PauliTerm::identity(n), self.constant)?;
        }
        for (fs, c) in &self.terms {
            let mut factors = Vec::with_capacity(fs.len());
            for &(p, s) in fs {
                let name = &self.symbols[p][s];
                let v = bindings.get(p, name).ok_or_else(|| Error::UnboundSymbol {
                    party: p,
                    symbol: name.clone(),
                })?;
                factors.push((p, v));
            }
            out = out.add(&product_operator(n, &factors, *c)?)?;
        }
        Ok(out)
    }

    /// `tr(rho B)` with the bound observables.
    pub fn evaluate_quantum(&self, bindings: &Bindings, rho: &DensityMatrix) -> Result<f64> {
        let op = self.bind(bindings)?.to_dense()?;
        Ok(rho.expectation(&op))
    }

    pub fn symbol_label(&self, party: usize, index: usize) -> String {
        format!("{}_{}", self.symbols[party][index], party + 1)
    }
}

impl fmt::Display for BellExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut write_coef = |f: &mut fmt::Formatter<'_>, c: f64, body: &str| -> fmt::Result {
            let mag = c.abs();
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let coef = crate::report::surd(mag).unwrap_or_else(|| crate::report::fmt_num(mag));
            match (coef == "1", body.is_empty()) {
                (true, false) => write!(f, "{body}"),
                (_, true) => write!(f, "{coef}"),
                (false, false) => write!(f, "{coef}*{body}"),
            }
        };
        if self.constant != 0.0 {
            write_coef(f, self.constant, "")?;
        }
        for (fs, c) in &self.terms {
            let body: Vec<String> = fs.iter().map(|&(p, s)| self.symbol_label(p, s)).collect();
            write_coef(f, *c, &body.join(" "))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Unit Bloch vector of each `(party, symbol)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<BoundSymbol>", from = "Vec<BoundSymbol>")]
pub struct Bindings {
    map: BTreeMap<(usize, String), [f64; 3]>,
}

/// Serialized form of one binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSymbol {
    pub party: usize,
    pub symbol: String,
    pub bloch: [f64; 3],
}

impl From<Bindings> for Vec<BoundSymbol> {
    fn from(b: Bindings) -> Self {
        b.map
            .into_iter()
            .map(|((party, symbol), bloch)| BoundSymbol { party, symbol, bloch })
            .collect()
    }
}

impl From<Vec<BoundSymbol>> for Bindings {
    fn from(v: Vec<BoundSymbol>) -> Self {
        Bindings {
            map: v.into_iter().map(|b| ((b.party, b.symbol), b.bloch)).collect(),
        }
    }
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, party: usize, symbol: &str, bloch: [f64; 3]) {
        self.map.insert((party, symbol.to_string()), bloch);
    }

    pub fn get(&self, party: usize, symbol: &str) -> Option<[f64; 3]> {
        self.map.get(&(party, symbol.to_string())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, [f64; 3])> {
        self.map.iter().map(|((p, s), v)| (*p, s.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// A dichotomic single-qubit observable `v . sigma` with a symbol name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub party: usize,
    pub label: String,
    pub bloch: [f64; 3],
}

impl Setting {
    pub fn operator(&self, n: usize) -> Result<PauliSum> {
        product_operator(n, &[(self.party, self.bloch)], 1.0)
    }
}

/// Factor of a product-form operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpFactor {
    pub party: usize,
    pub bloch: [f64; 3],
    /// Symbol fixed by the construction; `None` defers to the letter map.
    pub symbol: Option<String>,
}

impl OpFactor {
    pub fn letter(party: usize, p: Pauli) -> Self {
        OpFactor {
            party,
            bloch: p.bloch(),
            symbol: None,
        }
    }

    pub fn named(party: usize, bloch: [f64; 3], symbol: &str) -> Self {
        OpFactor {
            party,
            bloch,
            symbol: Some(symbol.to_string()),
        }
    }
}

/// Sum of products of single-qubit observables; the experimental operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSum {
    pub n: usize,
    pub terms: Vec<(f64, Vec<OpFactor>)>,
}

impl ProductSum {
    pub fn new(n: usize) -> Self {
        ProductSum { n, terms: Vec::new() }
    }

    /// One product per Pauli term; the identity term becomes an empty product.
    pub fn from_pauli_sum(p: &PauliSum) -> Self {
        let terms = p
            .iter()
            .map(|(t, c)| {
                let fs = t
                    .letters()
                    .into_iter()
                    .enumerate()
                    .filter(|(_, l)| *l != Pauli::I)
                    .map(|(q, l)| OpFactor::letter(q, l))
                    .collect();
                (c, fs)
            })
            .collect();
        ProductSum { n: p.n(), terms }
    }

    pub fn push(&mut self, coef: f64, factors: Vec<OpFactor>) {
        self.terms.push((coef, factors));
    }

    pub fn to_pauli_sum(&self) -> Result<PauliSum> {
        let mut out = PauliSum::zero(self.n);
        for (c, fs) in &self.terms {
            let factors: Vec<(usize, [f64; 3])> = fs.iter().map(|f| (f.party, f.bloch)).collect();
            out = out.add(&product_operator(self.n, &factors, *c)?)?;
        }
        Ok(out)
    }

    /// Distinct settings that carry explicit symbols, in first-use order.
    pub fn named_settings(&self) -> Vec<Setting> {
        let mut out: Vec<Setting> = Vec::new();
        for (_, fs) in &self.terms {
            for f in fs {
                if let Some(s) = &f.symbol {
                    if !out.iter().any(|o| o.party == f.party && &o.label == s) {
                        out.push(Setting {
                            party: f.party,
                            label: s.clone(),
                            bloch: f.bloch,
                        });
                    }
                }
            }
        }
        out
    }
}

/// `coef * prod_k (v_k . sigma)` on the listed parties.
pub fn product_operator(n: usize, factors: &[(usize, [f64; 3])], coef: f64) -> Result<PauliSum> {
    let mut partial: Vec<(PauliTerm, f64)> = vec![(PauliTerm::identity(n), coef)];
    for &(q, v) in factors {
        if q >= n {
            return Err(Error::InvalidArgument(format!("party {q} out of range")));
        }
        let mut next = Vec::with_capacity(partial.len() * 3);
        for (t, c) in &partial {
            if t.letter(q) != Pauli::I {
                return Err(Error::InvalidArgument(format!("party {q} appears twice")));
            }
            for (l, comp) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(v) {
                if comp != 0.0 {
                    next.push((t.with_letter(q, l), c * comp));
                }
            }
        }
        partial = next;
    }
    let mut out = PauliSum::zero(n);
    for (t, c) in partial {
        out.add_term(t, c)?;
    }
    Ok(out)
}

/// Symbol names for Pauli letters, shared by all parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMap {
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
}

impl Default for SymbolMap {
    /// `Z -> A`, `X -> B`, `Y -> C`.
    fn default() -> Self {
        SymbolMap {
            x: Some("B".into()),
            y: Some("C".into()),
            z: Some("A".into()),
        }
    }
}

impl SymbolMap {
    pub fn new(x: Option<&str>, y: Option<&str>, z: Option<&str>) -> Self {
        SymbolMap {
            x: x.map(str::to_string),
            y: y.map(str::to_string),
            z: z.map(str::to_string),
        }
    }

    fn for_letter(&self, p: Pauli) -> Option<&str> {
        match p {
            Pauli::X => self.x.as_deref(),
            Pauli::Y => self.y.as_deref(),
            Pauli::Z => self.z.as_deref(),
            Pauli::I => None,
        }
    }
}

fn axis_of(v: [f64; 3]) -> Option<(Pauli, f64)> {
    for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        let others = (0..3).filter(|&j| j != k).all(|j| v[j].abs() < BLOCH_TOL);
        if others && (v[k].abs() - 1.0).abs() < BLOCH_TOL {
            return Some((p, v[k].signum()));
        }
    }
    None
}

fn same(a: [f64; 3], b: [f64; 3]) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() < BLOCH_TOL)
}

fn neg(a: [f64; 3]) -> [f64; 3] {
    [-a[0], -a[1], -a[2]]
}

fn describe(v: [f64; 3]) -> String {
    format!(
        "({}, {}, {})",
        crate::report::fmt_num(v[0]),
        crate::report::fmt_num(v[1]),
        crate::report::fmt_num(v[2])
    )
}

/// Replaces each observable by a symbol. Named factors keep their symbol;
/// bare Pauli axes go through `map`. An observable equal to minus a known
/// symbol's observable reuses that symbol with a sign flip.
pub fn symbolize(op: &ProductSum, map: &SymbolMap) -> Result<(BellExpression, Bindings)> {
    let mut expr = BellExpression::new(op.n);
    let mut bindings = Bindings::new();
    for (c, fs) in &op.terms {
        let mut coef = *c;
        let mut factors = Vec::with_capacity(fs.len());
        for f in fs {
            let (name, sign) = match &f.symbol {
                Some(s) => (s.clone(), 1.0),
                None => {
                    let (letter, sign) = axis_of(f.bloch).ok_or_else(|| Error::UnmappedOperator {
                        party: f.party,
                        operator: describe(f.bloch),
                    })?;
                    let s = map.for_letter(letter).ok_or_else(|| Error::UnmappedOperator {
                        party: f.party,
                        operator: letter.as_char().to_string(),
                    })?;
                    (s.to_string(), sign)
                }
            };
            let v = if sign < 0.0 { neg(f.bloch) } else { f.bloch };
            let sign = match bindings.get(f.party, &name) {
                None => {
                    bindings.insert(f.party, &name, v);
                    sign
                }
                Some(known) if same(known, v) => sign,
                Some(known) if same(known, neg(v)) => -sign,
                Some(known) => {
                    return Err(Error::Recipe(format!(
                        "symbol {name} on party {} bound to both {} and {}",
                        f.party,
                        describe(known),
                        describe(v)
                    )))
                }
            };
            coef *= sign;
            factors.push((f.party, expr.symbol(f.party, &name)?));
        }
        expr.add_term(factors, coef)?;
    }
    Ok((expr, bindings))
}
