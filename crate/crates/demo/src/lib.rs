//! Browser bindings. Every export returns a JSON string; errors come back
//! as `{"error": "..."}` so the page never has to catch.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hopf_lck::expr::C64;
use hopf_lck::forms::{definiteness, DefinitenessOptions};
use hopf_lck::hopf::{example1_entry, kodaira_family, vaisman_entry};
use hopf_lck::maps::jordan_form;
use hopf_lck::sampling::annulus_points;
use hopf_lck::verify::{verify_lck, Samples};

fn wrap(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// Real orbit of `(z1, z2) ↦ (α z1 + t z2, α z2)` plus the Jordan type of
/// its linear part.
pub fn kodaira_orbit_value(
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
    steps: u32,
) -> Result<Value, String> {
    let g = kodaira_family(C64::new(alpha, 0.0), C64::new(t, 0.0)).map_err(|e| e.to_string())?;
    let blocks = jordan_form(&g.linear_part())
        .map_err(|e| e.to_string())?
        .block_sizes();
    let mut z = vec![C64::new(x, 0.0), C64::new(y, 0.0)];
    let mut orbit = vec![[x, y]];
    for _ in 0..steps.min(500) {
        z = g.evaluate(&z);
        if !(z[0].norm().is_finite() && z[1].norm().is_finite()) || z[0].norm() > 1e6 {
            break;
        }
        orbit.push([z[0].re, z[1].re]);
    }
    Ok(json!({ "orbit": orbit, "blocks": blocks }))
}

/// Runs the lcK identity check for the standard structure with factor `μ`.
pub fn example1_check_value(mu_re: f64, mu_im: f64, points: usize) -> Result<Value, String> {
    let e = example1_entry(C64::new(mu_re, mu_im)).map_err(|e| e.to_string())?;
    let samples = Samples::annulus(2, points.clamp(1, 2000), 42);
    let r = verify_lck(
        e.form("Omega").unwrap(),
        e.form("theta").unwrap(),
        &samples,
        1e-10,
    )
    .map_err(|e| e.to_string())?;
    serde_json::to_value(&r).map_err(|e| e.to_string())
}

/// Eigenvalue range of the weighted Vaisman form over sample points.
pub fn vaisman_spectrum_value(
    r1: f64,
    r2: f64,
    p1: f64,
    p2: f64,
    points: usize,
) -> Result<Value, String> {
    let e = vaisman_entry(&[r1, r2], &[p1, p2]).map_err(|e| e.to_string())?;
    let pts = annulus_points(2, points.clamp(1, 400), 42);
    let d = definiteness(
        e.form("Omega").unwrap(),
        &pts,
        &DefinitenessOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let eigen: Vec<[f64; 2]> = d
        .samples
        .iter()
        .map(|s| [s.eigenvalues[0], s.eigenvalues[s.eigenvalues.len() - 1]])
        .collect();
    Ok(json!({
        "overall": d.overall,
        "sign": d.sign,
        "min_abs_eigenvalue": d.min_abs_eigenvalue,
        "max_abs_eigenvalue": d.max_abs_eigenvalue,
        "eigenvalues": eigen,
    }))
}

#[wasm_bindgen]
pub fn kodaira_orbit(alpha: f64, t: f64, x: f64, y: f64, steps: u32) -> String {
    wrap(kodaira_orbit_value(alpha, t, x, y, steps))
}

#[wasm_bindgen]
pub fn example1_check(mu_re: f64, mu_im: f64, points: usize) -> String {
    wrap(example1_check_value(mu_re, mu_im, points))
}

#[wasm_bindgen]
pub fn vaisman_spectrum(r1: f64, r2: f64, p1: f64, p2: f64, points: usize) -> String {
    wrap(vaisman_spectrum_value(r1, r2, p1, p2, points))
}
