//! Named reference cases with their expected values.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{compute_bounds, BoundsOptions, BoundsReport, SosMode, SosStatus, DEFAULT_RESTARTS};
use crate::construct::{build, chained_recipe, BellRecipe, Construction, Decomposition, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::expression::{symbolize, ProductSum, SymbolMap};
use crate::linalg::{DensityMatrix, StateVector};
use crate::pseudo::PseudoPauliSet;
use crate::recursive::{mermin_svetlichny, FamilyBounds, MAX_FAMILY_LEVEL};
use crate::report::fmt_with_surd;
use crate::stabilizer::LogicalBasis;
use crate::uncertainty::{quadratic_default, quadratic_quantum_sweep, QuadraticVariant};

/// Bound comparisons.
pub const VALUE_TOL: f64 = 1e-9;
/// See-saw convergence to a known optimum.
pub const SEESAW_TOL: f64 = 1e-7;
/// See-saw lower-bound checks.
pub const SEESAW_FLOOR_TOL: f64 = 1e-6;

/// Fixed-size cases; `chained:N`, `mermin:N` and `svetlichny:N` are parametrized.
pub const CATALOG: [&str; 11] = [
    "chsh",
    "chsh-diagonal",
    "chsh-rotated",
    "mermin3",
    "svetlichny3",
    "l5-mermin",
    "l5-svetlichny",
    "l5-hyper",
    "l5-identity",
    "uffink",
    "nki",
];

/// Catalog plus the parametrized families over their default ranges.
pub fn all_case_names() -> Vec<String> {
    let mut v: Vec<String> = CATALOG.iter().map(|s| s.to_string()).collect();
    v.extend((2..=6).map(|n| format!("chained:{n}")));
    v.extend((3..=MAX_FAMILY_LEVEL).map(|n| format!("mermin:{n}")));
    v.extend((3..=MAX_FAMILY_LEVEL).map(|n| format!("svetlichny:{n}")));
    v.sort();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    AtLeast,
    AtMost,
    Matches,
}

/// One comparison against an expected value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    /// What the expected value is.
    pub anchor: String,
    pub relation: Relation,
    pub target: String,
    pub observed: String,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn numeric(quantity: &str, anchor: &str, relation: Relation, target: f64, observed: f64, tol: f64) -> Self {
        let passed = match relation {
            Relation::Equal => (observed - target).abs() <= tol,
            Relation::AtLeast => observed >= target - tol,
            Relation::AtMost => observed <= target + tol,
            Relation::Matches => unreachable!("numeric relation"),
        };
        Check {
            quantity: quantity.into(),
            anchor: anchor.into(),
            relation,
            target: fmt_with_surd(target),
            observed: fmt_with_surd(observed),
            tolerance: Some(tol),
            passed,
        }
    }

    fn text(quantity: &str, anchor: &str, target: &str, observed: &str) -> Self {
        Check {
            quantity: quantity.into(),
            anchor: anchor.into(),
            relation: Relation::Matches,
            target: target.into(),
            observed: observed.into(),
            tolerance: None,
            passed: target == observed,
        }
    }

    fn flag(quantity: &str, anchor: &str, ok: bool) -> Self {
        Check::text(quantity, anchor, "true", if ok { "true" } else { "false" })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub title: String,
    /// Logical operator the expression was derived from, when there is one.
    pub logical: Option<String>,
    /// Pretty-printed expressions; two for quadratic cases.
    pub expressions: Vec<String>,
    pub bounds: Option<BoundsReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CaseResult {
    fn new(name: &str, title: &str, expressions: Vec<String>, bounds: Option<BoundsReport>, checks: Vec<Check>) -> Self {
        CaseResult {
            name: name.into(),
            title: title.into(),
            logical: None,
            expressions,
            bounds,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    fn with_logical(mut self, c: &Construction) -> Self {
        self.logical = Some(c.logical.to_string());
        self
    }
}

#[derive(Debug, Clone)]
pub struct CaseOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Random settings per quadratic sweep.
    pub quadratic_samples: usize,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            quadratic_samples: 400,
        }
    }
}

fn sym(x: Option<&str>, y: Option<&str>, z: Option<&str>) -> SymbolMap {
    SymbolMap::new(x, y, z)
}

fn chsh_recipe(theta: f64) -> Result<BellRecipe> {
    Ok(BellRecipe::new(LogicalBasis::bell(), [theta.sin(), 0.0, theta.cos()], 2.0 * SQRT_2)?
        .with_decomposition(Decomposition::Complementary { pivot: 1 })
        .with_symbols(sym(Some("A"), None, Some("A'")))
        .with_pivot_symbols(&["B", "B'"]))
}

fn ring_recipe(k: [f64; 3], beta: f64) -> Result<BellRecipe> {
    Ok(BellRecipe::new(LogicalBasis::ring5(), k, beta)?.with_symbols(sym(Some("B"), Some("C"), Some("A"))))
}

struct Linear {
    construction: Construction,
    sos: SosMode,
    seesaw: bool,
}

fn run_linear(l: &Linear, opts: &CaseOptions) -> Result<(BoundsReport, Check)> {
    let bo = BoundsOptions {
        sos: l.sos.clone(),
        seesaw_restarts: l.seesaw.then_some(opts.restarts),
        seed: opts.seed,
    };
    let report = compute_bounds(&l.construction, &bo)?;
    let residual = l.construction.identity_residual()?;
    let identity = Check::numeric(
        "pipeline identity residual",
        "logical, stabilizer and measured forms are the same matrix",
        Relation::AtMost,
        0.0,
        residual,
        IDENTITY_TOL,
    );
    Ok((report, identity))
}

fn eq(q: &str, anchor: &str, target: f64, observed: f64) -> Check {
    Check::numeric(q, anchor, Relation::Equal, target, observed, VALUE_TOL)
}

fn sos_check(r: &BoundsReport, anchor: &str) -> Check {
    Check::text(
        "sos certificate",
        anchor,
        "verified",
        match r.sos_status {
            SosStatus::Verified => "verified",
            SosStatus::Failed => "failed",
            SosStatus::NotAttempted => "not-attempted",
        },
    )
}

fn seesaw_value(r: &BoundsReport) -> f64 {
    r.seesaw_value.unwrap_or(f64::NAN)
}

fn case_chsh(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let l = Linear {
        construction: build(&chsh_recipe(0.0)?)?,
        sos: SosMode::Search,
        seesaw: true,
    };
    let (r, id) = run_linear(&l, opts)?;
    let e = l.construction.expression.to_string();
    let checks = vec![
        Check::text("expression", "standard CHSH form", "A_1 B_2 + A_1 B'_2 + A'_1 B_2 - A'_1 B'_2", &e),
        eq("classical max", "CHSH local bound", 2.0, r.classical_max),
        eq("classical min", "CHSH local bound", -2.0, r.classical_min),
        eq("quantum lower", "Tsirelson bound 2 sqrt 2", 2.0 * SQRT_2, r.quantum_lower),
        sos_check(&r, "pairwise anticommuting squares certify 2 sqrt 2"),
        Check::numeric("seesaw", "Tsirelson bound 2 sqrt 2", Relation::Equal, 2.0 * SQRT_2, seesaw_value(&r), SEESAW_TOL),
        id,
    ];
    Ok(CaseResult::new(name, "CHSH from the Bell-basis pseudo Z", vec![e], Some(r), checks).with_logical(&l.construction))
}

fn case_chsh_diagonal(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let h = 1.0 / SQRT_2;
    let r = BellRecipe::new(LogicalBasis::bell(), [h, 0.0, h], 2.0 * SQRT_2)?
        .with_symbols(sym(Some("B"), None, Some("A")));
    let l = Linear {
        construction: build(&r)?,
        sos: SosMode::Search,
        seesaw: true,
    };
    let (r, id) = run_linear(&l, opts)?;
    let e = l.construction.expression.to_string();
    let checks = vec![
        eq("classical max", "CHSH local bound", 2.0, r.classical_max),
        eq("quantum lower", "Tsirelson bound 2 sqrt 2", 2.0 * SQRT_2, r.quantum_lower),
        sos_check(&r, "pairwise anticommuting squares certify 2 sqrt 2"),
        Check::numeric("seesaw", "Tsirelson bound 2 sqrt 2", Relation::Equal, 2.0 * SQRT_2, seesaw_value(&r), SEESAW_TOL),
        id,
    ];
    Ok(CaseResult::new(name, "CHSH from the diagonal pseudo spin (X~ + Z~)", vec![e], Some(r), checks).with_logical(&l.construction))
}

/// Angle of the rotated CHSH case.
pub const ROTATED_THETA: f64 = PI / 6.0;

fn case_chsh_rotated(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let l = Linear {
        construction: build(&chsh_recipe(ROTATED_THETA)?)?,
        sos: SosMode::Skip,
        seesaw: false,
    };
    let (r, id) = run_linear(&l, opts)?;
    let t = ROTATED_THETA + FRAC_PI_4;
    let want = [[t.sin(), 0.0, t.cos()], [t.cos(), 0.0, -t.sin()]];
    let found = want.iter().all(|w| {
        l.construction
            .settings
            .iter()
            .any(|s| (0..3).all(|k| (s.bloch[k] - w[k]).abs() < 1e-12))
    });
    let e = l.construction.expression.to_string();
    let checks = vec![
        eq("classical max", "CHSH local bound", 2.0, r.classical_max),
        eq("quantum lower", "Tsirelson bound 2 sqrt 2", 2.0 * SQRT_2, r.quantum_lower),
        Check::flag("pivot settings", "measured along theta + pi/4 and its complement", found),
        id,
    ];
    Ok(CaseResult::new(name, "CHSH from the rotated pseudo Z at theta = pi/6", vec![e], Some(r), checks).with_logical(&l.construction))
}

fn case_mermin3(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let rec = BellRecipe::new(LogicalBasis::ghz3(), [0.0, 0.0, 1.0], 4.0)?.with_symbols(sym(Some("B"), None, Some("A")));
    let l = Linear {
        construction: build(&rec)?,
        sos: SosMode::Skip,
        seesaw: true,
    };
    let (r, id) = run_linear(&l, opts)?;
    let e = l.construction.expression.to_string();
    let checks = vec![
        Check::text("expression", "three-party Mermin form", "A_1 A_2 A_3 - A_1 B_2 B_3 - B_1 A_2 B_3 - B_1 B_2 A_3", &e),
        eq("classical max", "three-party Mermin local bound", 2.0, r.classical_max),
        eq("quantum lower", "three-party Mermin maximum", 4.0, r.quantum_lower),
        eq("dichotomic term bound", "three-party Mermin maximum", 4.0, r.dichotomic_bound),
        Check::numeric("seesaw", "three-party Mermin maximum", Relation::Equal, 4.0, seesaw_value(&r), SEESAW_TOL),
        id,
    ];
    Ok(CaseResult::new(name, "Three-party Mermin from the GHZ-type basis", vec![e], Some(r), checks).with_logical(&l.construction))
}

fn case_svetlichny3(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let h = 1.0 / SQRT_2;
    let rec = BellRecipe::new(LogicalBasis::ghz3(), [h, 0.0, -h], 4.0 * SQRT_2)?
        .with_symbols(sym(Some("A"), None, Some("B")));
    let l = Linear {
        construction: build(&rec)?,
        sos: SosMode::Search,
        seesaw: true,
    };
    let (r, id) = run_linear(&l, opts)?;
    let e = l.construction.expression.to_string();
    let checks = vec![
        eq("classical max", "three-party Svetlichny local bound", 4.0, r.classical_max),
        eq("quantum lower", "three-party Svetlichny maximum 4 sqrt 2", 4.0 * SQRT_2, r.quantum_lower),
        sos_check(&r, "four anticommuting pairs certify 4 sqrt 2"),
        Check::numeric("seesaw", "three-party Svetlichny maximum 4 sqrt 2", Relation::Equal, 4.0 * SQRT_2, seesaw_value(&r), SEESAW_TOL),
        id,
    ];
    Ok(CaseResult::new(name, "Three-party Svetlichny from the GHZ-type basis", vec![e], Some(r), checks).with_logical(&l.construction))
}

fn case_ring(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let (h, t) = (1.0 / SQRT_2, 1.0 / 3f64.sqrt());
    let (rec, title, classical, quantum, seesaw) = match name {
        "l5-mermin" => (ring_recipe([0.0, 0.0, 1.0], 16.0)?, "Mermin-like, five-qubit ring", 8.0, 16.0, false),
        "l5-svetlichny" => (ring_recipe([h, 0.0, h], 16.0 * SQRT_2)?, "Svetlichny-like, five-qubit ring", 16.0, 16.0 * SQRT_2, true),
        _ => (ring_recipe([t, t, t], 16.0 * 3f64.sqrt())?, "Hyper-Svetlichny-like, five-qubit ring", 24.0, 16.0 * 3f64.sqrt(), true),
    };
    let l = Linear {
        construction: build(&rec)?,
        sos: SosMode::Skip,
        seesaw,
    };
    let (r, id) = run_linear(&l, opts)?;
    let e = l.construction.expression.to_string();
    let mut checks = vec![
        eq("classical max", "five-qubit ring local bound by enumeration", classical, r.classical_max),
        eq("classical min", "five-qubit ring local bound by enumeration", -classical, r.classical_min),
        eq("quantum lower", "logical operator attains beta_q", quantum, r.quantum_lower),
    ];
    if name == "l5-mermin" {
        checks.push(eq("dichotomic term bound", "sixteen unit terms", 16.0, r.dichotomic_bound));
        let psi = LogicalBasis::ring5().zero().clone();
        checks.push(Check::flag(
            "witness",
            "top eigenvector is the ring graph state",
            r.quantum_witness_state.equal_up_to_phase(&psi, 1e-8),
        ));
    } else {
        checks.push(Check::numeric(
            "seesaw",
            "rough quantum bound beta_q is a lower bound",
            Relation::AtLeast,
            quantum,
            seesaw_value(&r),
            SEESAW_FLOOR_TOL,
        ));
        checks.push(Check::numeric(
            "seesaw",
            "dichotomic term bound",
            Relation::AtMost,
            r.dichotomic_bound,
            seesaw_value(&r),
            1e-8,
        ));
    }
    checks.push(id);
    Ok(CaseResult::new(name, title, vec![e], Some(r), checks).with_logical(&l.construction))
}

/// Number of random code-space mixtures tested on the identity case.
pub const CODE_SPACE_MIXTURES: usize = 10;

fn case_ring_identity(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    let basis = LogicalBasis::ring5();
    let set = PseudoPauliSet::for_basis(&basis)?;
    let logical = set.i.scale(16.0);
    let experimental = ProductSum::from_pauli_sum(&logical);
    let (expression, bindings) = symbolize(&experimental, &sym(Some("B"), Some("C"), Some("A")))?;
    let construction = Construction {
        logical,
        experimental,
        settings: Vec::new(),
        expression,
        bindings,
        beta_q: 16.0,
    };
    let l = Linear {
        construction,
        sos: SosMode::Skip,
        seesaw: false,
    };
    let (r, id) = run_linear(&l, opts)?;
    let op = l.construction.logical.to_dense()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..CODE_SPACE_MIXTURES {
        let comps: Vec<(f64, StateVector)> = (0..3)
            .map(|_| {
                let c = StateVector::random(1, &mut rng);
                let a = c.amplitudes();
                let amps = basis
                    .zero()
                    .amplitudes()
                    .iter()
                    .zip(basis.one().amplitudes())
                    .map(|(z, o)| a[0] * z + a[1] * o)
                    .collect();
                (rand::Rng::random::<f64>(&mut rng), StateVector::normalized(amps).expect("nonzero"))
            })
            .collect();
        let rho = DensityMatrix::mixture(&comps)?;
        worst = worst.max((rho.expectation(&op) - 16.0).abs());
    }
    let e = l.construction.expression.to_string();
    let checks = vec![
        eq("classical max", "all-ones assignment satisfies every stabilizer term", 16.0, r.classical_max),
        eq("classical min", "ring local minimum by enumeration", -8.0, r.classical_min),
        eq("quantum lower", "code projector scaled by 16", 16.0, r.quantum_lower),
        eq("dichotomic term bound", "sixteen unit terms", 16.0, r.dichotomic_bound),
        Check::numeric("code-space mixtures", "every code-space state attains 16", Relation::AtMost, 0.0, worst, VALUE_TOL),
        id,
    ];
    Ok(CaseResult::new(name, "Pseudo identity on the five-qubit ring", vec![e], Some(r), checks).with_logical(&l.construction))
}

fn case_chained(name: &str, n: usize, opts: &CaseOptions) -> Result<CaseResult> {
    let l = Linear {
        construction: chained_recipe(n)?,
        sos: SosMode::Skip,
        seesaw: false,
    };
    let (r, id) = run_linear(&l, opts)?;
    let nf = n as f64;
    let e = l.construction.expression.to_string();
    let checks = vec![
        eq("classical max", "chained local bound 2n - 2", 2.0 * nf - 2.0, r.classical_max),
        eq("quantum lower", "chained maximum 2n cos(pi/2n)", 2.0 * nf * (PI / (2.0 * nf)).cos(), r.quantum_lower),
        Check::text("term count", "2n correlators", &(2 * n).to_string(), &l.construction.expression.term_count().to_string()),
        id,
    ];
    Ok(CaseResult::new(name, &format!("Chained inequality, {n} settings per party"), vec![e], Some(r), checks).with_logical(&l.construction))
}

fn family_checks(f: &FamilyBounds, label: &str) -> Vec<Check> {
    vec![
        Check::numeric(
            "classical max",
            &format!("{label} local bound from the induction"),
            Relation::AtMost,
            f.induction_bound,
            f.classical_max,
            VALUE_TOL,
        ),
        eq("quantum lower", &format!("{label} quantum maximum"), f.expected_quantum, f.quantum_lower),
    ]
}

fn case_family(name: &str, n: usize, svetlichny: bool) -> Result<CaseResult> {
    let r = mermin_svetlichny(n)?;
    let (f, label, title) = if svetlichny {
        (&r.svetlichny, "Svetlichny", format!("{n}-party Svetlichny from the recursive basis"))
    } else {
        (&r.mermin, "Mermin", format!("{n}-party Mermin from the recursive basis"))
    };
    Ok(CaseResult::new(name, &title, vec![f.expression.to_string()], None, family_checks(f, label)))
}

fn case_quadratic(name: &str, v: QuadraticVariant, opts: &CaseOptions) -> Result<CaseResult> {
    let q = quadratic_default(v)?;
    let sweep = quadratic_quantum_sweep(&q, opts.quadratic_samples, opts.seed)?;
    let (ex, ey, title) = match v {
        QuadraticVariant::Uffink => ("A_1 B_2 + B_1 A_2", "A_1 A_2 - B_1 B_2", "Uffink quadratic inequality"),
        QuadraticVariant::Nki => (
            "A_1 A_2 + A_1 B_2 + B_1 A_2 - B_1 B_2",
            "A_1 A_2 - A_1 B_2 - B_1 A_2 - B_1 B_2",
            "Nagata-Koashi-Imoto quadratic inequality",
        ),
    };
    let (x, y) = (q.x.to_string(), q.y.to_string());
    let checks = vec![
        Check::text("first expression", "quadratic inequality, first correlator", ex, &x),
        Check::text("second expression", "quadratic inequality, second correlator", ey, &y),
        eq("classical max", "maximum of x^2 + y^2 over the local vertices", q.bound, q.classical_max),
        Check::numeric("quantum sweep", "quantum values stay inside the disc", Relation::AtMost, q.bound, sweep.max_value, VALUE_TOL),
    ];
    Ok(CaseResult::new(name, title, vec![x, y], None, checks))
}

fn parse_param(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?;
    Some(
        rest.parse::<usize>()
            .map_err(|_| Error::UnknownCase(name.to_string())),
    )
}

/// Runs one named case.
pub fn run_case(name: &str, opts: &CaseOptions) -> Result<CaseResult> {
    if let Some(n) = parse_param(name, "chained:") {
        return case_chained(name, n?, opts);
    }
    if let Some(n) = parse_param(name, "mermin:") {
        return case_family(name, n?, false);
    }
    if let Some(n) = parse_param(name, "svetlichny:") {
        return case_family(name, n?, true);
    }
    match name {
        "chsh" => case_chsh(name, opts),
        "chsh-diagonal" => case_chsh_diagonal(name, opts),
        "chsh-rotated" => case_chsh_rotated(name, opts),
        "mermin3" => case_mermin3(name, opts),
        "svetlichny3" => case_svetlichny3(name, opts),
        "l5-mermin" | "l5-svetlichny" | "l5-hyper" => case_ring(name, opts),
        "l5-identity" => case_ring_identity(name, opts),
        "uffink" => case_quadratic(name, QuadraticVariant::Uffink, opts),
        "nki" => case_quadratic(name, QuadraticVariant::Nki, opts),
        _ => Err(Error::UnknownCase(name.to_string())),
    }
}

/// Builds and bounds a user recipe; the only checks are internal consistency.
pub fn run_recipe(name: &str, recipe: &BellRecipe, opts: &CaseOptions) -> Result<CaseResult> {
    let c = build(recipe)?;
    let small = c.expression.term_count() <= crate::bounds::sos::SEARCH_MAX_TERMS
        && c.expression.terms().all(|(_, k)| (k.abs() - 1.0).abs() < 1e-12)
        && c.expression.constant() == 0.0;
    let l = Linear {
        construction: c,
        sos: if small { SosMode::Search } else { SosMode::Skip },
        seesaw: opts.restarts > 0,
    };
    let (r, id) = run_linear(&l, opts)?;
    let checks = vec![
        Check::numeric(
            "quantum lower",
            "the recipe's own state attains beta_q",
            Relation::AtLeast,
            r.rough_bound,
            r.quantum_lower,
            VALUE_TOL,
        ),
        id,
    ];
    Ok(CaseResult::new(name, "Recipe", vec![l.construction.expression.to_string()], Some(r), checks).with_logical(&l.construction))
}

/// Runs cases in parallel; results come back sorted by name.
pub fn run_cases(names: &[String], opts: &CaseOptions) -> Vec<(String, Result<CaseResult>)> {
    let run = |n: &String| (n.clone(), run_case(n, opts));
    #[cfg(feature = "parallel")]
    let mut out: Vec<_> = {
        use rayon::prelude::*;
        names.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut out: Vec<_> = names.iter().map(run).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod ring_tests {
    use super::*;

    #[test]
    fn ring_cases_pass() {
        let o = CaseOptions { seed: 0, restarts: 16, quadratic_samples: 10 };
        for name in ["l5-mermin", "l5-svetlichny", "l5-hyper", "l5-identity"] {
            let r = run_case(name, &o).unwrap();
            for c in &r.checks {
                assert!(c.passed, "{name}: {c:?}");
            }
        }
    }
}
