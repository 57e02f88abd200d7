//! Browser bindings. Each exported function returns a JSON string; the
//! plain functions underneath are what the native tests exercise.

use std::f64::consts::SQRT_2;

use bellforge::bounds::classical_bounds;
use bellforge::cases::{run_case, CaseOptions};
use bellforge::construct::{build, BellRecipe, Decomposition};
use bellforge::expression::SymbolMap;
use bellforge::linalg::{DensityMatrix, StateVector};
use bellforge::pseudo::PseudoPauliSet;
use bellforge::stabilizer::LogicalBasis;
use bellforge::uncertainty::{bell_op_xz, DirectionXZ, RELATION_BOUND};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Debug, Serialize)]
pub struct Region {
    pub theta: [f64; 2],
    /// Boundary of the allowed region, traced by logical pure states.
    pub boundary: Vec<[f64; 2]>,
    /// Expectation pairs of random two-qubit mixed states.
    pub samples: Vec<[f64; 2]>,
    pub max_lhs: f64,
    pub bound: f64,
}

/// Expectation pairs `(<B(theta1)>, <B(theta2)>)` of the two xz-plane operators.
pub fn uncertainty_region(theta1: f64, theta2: f64, samples: usize, seed: u64) -> Result<Region> {
    let set = PseudoPauliSet::for_basis(&LogicalBasis::bell()).map_err(err)?;
    let (d1, d2) = (DirectionXZ::new(theta1), DirectionXZ::new(theta2));
    let b1 = bell_op_xz(&set, d1).and_then(|b| b.to_dense()).map_err(err)?;
    let b2 = bell_op_xz(&set, d2).and_then(|b| b.to_dense()).map_err(err)?;
    let (c, s) = ((theta1 - theta2).cos(), (theta1 - theta2).sin());
    let lhs = |x: f64, y: f64| {
        let (p, m) = (2.0 + 2.0 * c, 2.0 - 2.0 * c);
        if s.abs() < 1e-9 {
            f64::NAN
        } else {
            (x + y).powi(2) / p + (x - y).powi(2) / m
        }
    };
    let steps = 180;
    let mut boundary = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        let (ct, st) = ((t / 2.0).cos(), (t / 2.0).sin());
        let amps = set
            .basis
            .zero()
            .amplitudes()
            .iter()
            .zip(set.basis.one().amplitudes())
            .map(|(a, b)| a * ct + b * st)
            .collect();
        let psi = StateVector::new(amps).map_err(err)?;
        boundary.push([psi.expectation(&b1), psi.expectation(&b2)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    let mut max_lhs = f64::NEG_INFINITY;
    for _ in 0..samples {
        let rho = DensityMatrix::random(2, &mut rng);
        let p = [rho.expectation(&b1), rho.expectation(&b2)];
        max_lhs = max_lhs.max(lhs(p[0], p[1]));
        points.push(p);
    }
    Ok(Region {
        theta: [theta1, theta2],
        boundary,
        samples: points,
        max_lhs,
        bound: RELATION_BOUND,
    })
}

#[derive(Debug, Serialize)]
pub struct RotatedChsh {
    pub theta: f64,
    pub expression: String,
    /// `(label, x, z)` of the pivot-party settings.
    pub settings: Vec<(String, f64, f64)>,
    pub classical_max: f64,
    pub quantum: f64,
}

/// CHSH from `cos(theta) Z~ + sin(theta) X~` on the Bell-pair basis.
pub fn rotated_chsh(theta: f64) -> Result<RotatedChsh> {
    let r = BellRecipe::new(LogicalBasis::bell(), [theta.sin(), 0.0, theta.cos()], 2.0 * SQRT_2)
        .map_err(err)?
        .with_decomposition(Decomposition::Complementary { pivot: 1 })
        .with_symbols(SymbolMap::new(Some("A"), None, Some("A'")))
        .with_pivot_symbols(&["B", "B'"]);
    let c = build(&r).map_err(err)?;
    let cb = classical_bounds(&c.expression).map_err(err)?;
    let settings = c
        .settings
        .iter()
        .map(|s| (s.label.clone(), s.bloch[0], s.bloch[2]))
        .collect();
    Ok(RotatedChsh {
        theta,
        expression: c.expression.to_string(),
        settings,
        classical_max: cb.max,
        quantum: c.logical.lambda_max().map_err(err)?,
    })
}

fn to_json<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(err))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = uncertaintyRegion)]
pub fn uncertainty_region_js(theta1: f64, theta2: f64, samples: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(uncertainty_region(theta1, theta2, samples, seed as u64))
}

#[wasm_bindgen(js_name = rotatedChsh)]
pub fn rotated_chsh_js(theta: f64) -> std::result::Result<String, JsValue> {
    to_json(rotated_chsh(theta))
}

/// Runs a named case with a small restart budget.
#[wasm_bindgen(js_name = runCase)]
pub fn run_case_js(name: &str, seed: u32) -> std::result::Result<String, JsValue> {
    let opts = CaseOptions {
        seed: seed as u64,
        restarts: 4,
        quadratic_samples: 100,
    };
    to_json(run_case(name, &opts).map_err(err))
}
