//! Browser bindings: peak PMF, success curve and Euclid trace.
//!
//! The plain functions hold the logic and run on any target; the
//! `#[wasm_bindgen]` wrappers only convert errors for JavaScript.

use num_bigint::BigUint;
use serde_json::json;
use wasm_bindgen::prelude::*;

use ecshor::dlp_sim::{success_probability, PeakDistribution};
use ecshor::euclid_machine::{run_inverse_traced, MachineConfig};

/// Largest register for the PMF plot.
pub const MAX_PMF_BITS: u32 = 16;
/// Largest q for the in-browser success curve.
pub const MAX_CURVE_Q: u64 = 4096;
/// Largest modulus width for the trace view.
pub const MAX_TRACE_BITS: u64 = 512;

/// pmf(x) for x in Z_N, N = 2^n, of the peak centered at `center`.
pub fn peak_pmf_values(center: f64, n: u32) -> Result<Vec<f64>, String> {
    if !(1..=MAX_PMF_BITS).contains(&n) {
        return Err(format!("n must be in 1..={MAX_PMF_BITS}"));
    }
    let size = 1u64 << n;
    if !center.is_finite() {
        return Err("center must be finite".into());
    }
    let pk = PeakDistribution::from_real(center.rem_euclid(size as f64), size).map_err(|e| e.to_string())?;
    Ok((0..size).map(|x| pk.pmf(x)).collect())
}

/// Success probability for n = n_min..=n_max at fixed q, d and window.
pub fn success_curve_values(q: u64, d: u64, window: u64, n_min: u32, n_max: u32) -> Result<Vec<f64>, String> {
    if q > MAX_CURVE_Q {
        return Err(format!("q must be at most {MAX_CURVE_Q} in the browser"));
    }
    if n_min > n_max || n_max > 24 {
        return Err("need n_min <= n_max <= 24".into());
    }
    (n_min..=n_max)
        .map(|n| success_probability(q, d, n, window).map(|s| s.probability).map_err(|e| e.to_string()))
        .collect()
}

/// Per-cycle register trace of x^-1 mod p as a JSON string.
pub fn euclid_trace_json(p: &str, x: &str, sharing: bool) -> Result<String, String> {
    let p: BigUint = p.trim().parse().map_err(|_| "p must be a decimal integer".to_string())?;
    let x: BigUint = x.trim().parse().map_err(|_| "x must be a decimal integer".to_string())?;
    if p.bits() > MAX_TRACE_BITS {
        return Err(format!("p is limited to {MAX_TRACE_BITS} bits"));
    }
    let cfg = if sharing { MachineConfig::default() } else { MachineConfig::no_sharing() };
    let (res, rows) = run_inverse_traced(&x, &p, &cfg).map_err(|e| e.to_string())?;
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "step": r.step, "c": r.c, "f": r.f,
                "a": r.a.to_string(), "A": r.big_a.to_string(),
                "b": r.b.to_string(), "B": r.big_b.to_string(),
                "i": r.i, "q": r.q.to_string(), "h": r.h,
            })
        })
        .collect();
    Ok(json!({
        "inverse": res.inverse.map(|v| v.to_string()),
        "cycles_used": res.cycles_used,
        "budget": res.budget,
        "failure": res.failure.map(|f| format!("{f:?}")),
        "quotients": res.quotients.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        "rows": rows,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn peak_pmf(center: f64, n: u32) -> Result<Vec<f64>, JsError> {
    peak_pmf_values(center, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn success_curve(q: u32, d: u32, window: u32, n_min: u32, n_max: u32) -> Result<Vec<f64>, JsError> {
    success_curve_values(q as u64, d as u64, window as u64, n_min, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn euclid_trace(p: &str, x: &str, sharing: bool) -> Result<String, JsError> {
    euclid_trace_json(p, x, sharing).map_err(|e| JsError::new(&e))
}
