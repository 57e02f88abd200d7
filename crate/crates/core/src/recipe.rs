//! JSON recipe files.
//!
//! ```json
//! {
//!   "basis": {"kind": "graph", "graph": {"n": 5, "edges": [[0,1],[1,2],[2,3],[3,4],[4,0]]}, "flip": "ZZZZZ"},
//!   "k": [0, 0, 1],
//!   "beta_q": "auto",
//!   "decomposition": {"kind": "none"},
//!   "symbols": {"Z": "A", "X": "B", "Y": "C"}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::construct::{auto_beta, BellRecipe, Decomposition};
use crate::error::{Error, Result};
use crate::expression::SymbolMap;
use crate::linalg::StateVector;
use crate::pauli::PauliTerm;
use crate::stabilizer::{basis_from_flip, graph_state_generators, GraphSpec, LogicalBasis, StabilizerGroup};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BasisSpec {
    Trivial,
    Bell,
    Ghz3,
    Ring5,
    Graph {
        graph: GraphSpec,
        flip: String,
    },
    Stabilizers {
        generators: Vec<String>,
        flip: String,
    },
    /// Amplitudes as `[re, im]` pairs.
    Kets {
        zero: Vec<[f64; 2]>,
        one: Vec<[f64; 2]>,
    },
}

impl BasisSpec {
    pub fn resolve(&self) -> Result<LogicalBasis> {
        let flip = |s: &str| s.parse::<PauliTerm>();
        match self {
            BasisSpec::Trivial => Ok(LogicalBasis::trivial()),
            BasisSpec::Bell => Ok(LogicalBasis::bell()),
            BasisSpec::Ghz3 => Ok(LogicalBasis::ghz3()),
            BasisSpec::Ring5 => Ok(LogicalBasis::ring5()),
            BasisSpec::Graph { graph, flip: f } => {
                graph.validate()?;
                basis_from_flip(&graph_state_generators(graph)?, &flip(f)?)
            }
            BasisSpec::Stabilizers { generators, flip: f } => {
                let labels: Vec<&str> = generators.iter().map(String::as_str).collect();
                basis_from_flip(&StabilizerGroup::parse(&labels)?, &flip(f)?)
            }
            BasisSpec::Kets { zero, one } => {
                let ket = |v: &[[f64; 2]]| {
                    StateVector::normalized(v.iter().map(|a| Complex64::new(a[0], a[1])).collect())
                };
                LogicalBasis::from_kets(ket(zero)?, ket(one)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Value(f64),
    Keyword(String),
}

impl Default for BetaSpec {
    fn default() -> Self {
        BetaSpec::Keyword("auto".into())
    }
}

fn default_decomposition() -> Decomposition {
    Decomposition::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeFile {
    pub basis: BasisSpec,
    /// Normalized on load.
    pub k: [f64; 3],
    #[serde(default)]
    pub beta_q: BetaSpec,
    #[serde(default = "default_decomposition")]
    pub decomposition: Decomposition,
    #[serde(default)]
    pub symbols: Option<SymbolMap>,
    #[serde(default)]
    pub pivot_symbols: Option<Vec<String>>,
}

impl RecipeFile {
    pub fn into_recipe(self) -> Result<BellRecipe> {
        let basis = self.basis.resolve()?;
        let norm = self.k.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Recipe("direction k must be a nonzero vector".into()));
        }
        let k = self.k.map(|v| v / norm);
        let beta = match &self.beta_q {
            BetaSpec::Value(v) => *v,
            BetaSpec::Keyword(w) if w == "auto" => auto_beta(basis.n(), k, &self.decomposition),
            BetaSpec::Keyword(w) => {
                return Err(Error::Recipe(format!(
                    "beta_q must be a number or \"auto\", got \"{w}\""
                )))
            }
        };
        let mut r = BellRecipe::new(basis, k, beta)?.with_decomposition(self.decomposition);
        if let Some(s) = self.symbols {
            r = r.with_symbols(s);
        }
        if let Some(p) = self.pivot_symbols {
            r.pivot_symbols = p;
        }
        Ok(r)
    }
}

fn diagnostic(text: &str, e: &serde_json::Error) -> Error {
    let line = e.line();
    let mut msg = format!("line {line}, column {}: {e}", e.column());
    if let Some(src) = text.lines().nth(line.saturating_sub(1)) {
        let caret = " ".repeat(e.column().saturating_sub(1));
        msg.push_str(&format!("\n  | {src}\n  | {caret}^"));
    }
    Error::Recipe(msg)
}

pub fn parse_recipe_file(text: &str) -> Result<RecipeFile> {
    serde_json::from_str(text).map_err(|e| diagnostic(text, &e))
}

pub fn parse_recipe(text: &str) -> Result<BellRecipe> {
    parse_recipe_file(text)?.into_recipe()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build;

    #[test]
    fn ring_recipe() {
        let text = r#"{
            "basis": {"kind": "graph", "graph": {"n": 5, "edges": [[0,1],[1,2],[2,3],[3,4],[4,0]]}, "flip": "ZZZZZ"},
            "k": [0, 0, 1],
            "beta_q": "auto",
            "decomposition": {"kind": "none"},
            "symbols": {"Z": "A", "X": "B", "Y": "C"}
        }"#;
        let r = parse_recipe(text).unwrap();
        assert_eq!(r.beta_q, 16.0);
        assert_eq!(r.basis, LogicalBasis::ring5());
        let c = build(&r).unwrap();
        assert_eq!(c.expression.term_count(), 16);
    }

    #[test]
    fn chsh_recipe_with_pivot() {
        let text = r#"{"basis": {"kind": "bell"}, "k": [0, 0, 2], "beta_q": "auto",
            "decomposition": {"kind": "complementary", "pivot": 1},
            "symbols": {"X": "A", "Z": "A'"}, "pivot_symbols": ["B", "B'"]}"#;
        let r = parse_recipe(text).unwrap();
        assert_eq!(r.k, [0.0, 0.0, 1.0]);
        assert!((r.beta_q - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
        let c = build(&r).unwrap();
        assert_eq!(c.expression.to_string(), "A_1 B_2 + A_1 B'_2 + A'_1 B_2 - A'_1 B'_2");
    }

    #[test]
    fn explicit_beta_and_defaults() {
        let r = parse_recipe(r#"{"basis": {"kind": "ghz3"}, "k": [0, 0, 1], "beta_q": 4}"#).unwrap();
        assert_eq!(r.beta_q, 4.0);
        assert_eq!(r.decomposition, Decomposition::None);
    }

    #[test]
    fn stabilizer_and_ket_bases() {
        let s = r#"{"basis": {"kind": "stabilizers", "generators": ["XX", "ZZ"], "flip": "ZX"}, "k": [0,0,1]}"#;
        assert_eq!(parse_recipe(s).unwrap().basis, LogicalBasis::bell());
        let k = r#"{"basis": {"kind": "kets", "zero": [[1,0],[0,0]], "one": [[0,0],[1,0]]}, "k": [1,0,0]}"#;
        assert_eq!(parse_recipe(k).unwrap().basis.n(), 1);
    }

    #[test]
    fn diagnostics_point_at_the_line() {
        let text = "{\n  \"basis\": {\"kind\": \"bell\"},\n  \"k\": [0, 0, 1,\n}";
        let err = parse_recipe(text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("  | }"), "{err}");
        let unknown = r#"{"basis": {"kind": "bell"}, "k": [0,0,1], "colour": 1}"#;
        assert!(parse_recipe(unknown).unwrap_err().to_string().contains("colour"));
        let bad_beta = r#"{"basis": {"kind": "bell"}, "k": [0,0,1], "beta_q": "big"}"#;
        assert!(parse_recipe(bad_beta).is_err());
        let zero_k = r#"{"basis": {"kind": "bell"}, "k": [0,0,0]}"#;
        assert!(parse_recipe(zero_k).is_err());
        let bad_flip = r#"{"basis": {"kind": "stabilizers", "generators": ["XX", "ZZ"], "flip": "XX"}, "k": [0,0,1]}"#;
        assert!(matches!(parse_recipe(bad_flip), Err(Error::InvalidFlip(_))));
    }
}
