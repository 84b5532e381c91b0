//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; the plain `*_json` functions carry the logic so they can be
//! tested natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use reclab::characterize::{self, IdentityId, Method, Params, ScanOptions};
use reclab::condmom::{self, Window};
use reclab::report::{self, Format};
use reclab::simrec::{self, mix64};
use reclab::HazardModel;

/// Upper bounds that keep one call interactive in a browser tab.
pub const MAX_CURVE_POINTS: u32 = 2000;
pub const MAX_BINS: u32 = 200;
pub const MAX_DRAWS: u32 = 200_000;

fn model(dist: &str) -> Result<HazardModel, String> {
    dist.parse().map_err(|e: reclab::Error| e.to_string())
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Conditional density on `points` interior abscissae, its quadrature mean,
/// and a normalized histogram of `draws` bridge samples (draw `k` seeded by
/// `mix64(seed, k)`).
#[allow(clippy::too_many_arguments)]
pub fn density_curve_json(
    dist: &str,
    i: u32,
    j: u32,
    u: f64,
    v: f64,
    points: u32,
    bins: u32,
    draws: u32,
    seed: u64,
) -> Result<String, String> {
    let model = model(dist)?;
    let w = Window::new(i, j, u, v).map_err(text)?;
    if !(2..=MAX_CURVE_POINTS).contains(&points) || !(1..=MAX_BINS).contains(&bins) || draws > MAX_DRAWS {
        return Err(format!("need 2..={MAX_CURVE_POINTS} points, 1..={MAX_BINS} bins and at most {MAX_DRAWS} draws"));
    }
    let step = (v - u) / f64::from(points + 1);
    let xs: Vec<f64> = (1..=points).map(|k| u + step * f64::from(k)).collect();
    let density =
        xs.iter().map(|&x| condmom::conditional_density(&model, &w, x)).collect::<Result<Vec<_>, _>>().map_err(text)?;
    let mean = condmom::conditional_expectation(&model, &w, |x| x).map_err(text)?;

    let width = (v - u) / f64::from(bins);
    let mut counts = vec![0u64; bins as usize];
    let mut total = 0.0;
    for k in 0..u64::from(draws) {
        let x = simrec::sample_conditional(&model, &w, mix64(seed, k)).map_err(text)?;
        total += x;
        let b = (((x - u) / width) as usize).min(bins as usize - 1);
        counts[b] += 1;
    }
    let scale = if draws > 0 { 1.0 / (f64::from(draws) * width) } else { 0.0 };
    let histogram: Vec<f64> = counts.iter().map(|&c| c as f64 * scale).collect();
    let edges: Vec<f64> = (0..=bins).map(|b| u + width * f64::from(b)).collect();
    Ok(json!({
        "dist": model.to_string(),
        "i": i, "j": j, "u": u, "v": v,
        "xs": xs,
        "density": density,
        "mean": mean,
        "edges": edges,
        "histogram": histogram,
        "mc_mean": (draws > 0).then(|| total / f64::from(draws)),
        "draws": draws,
        "seed": seed,
    })
    .to_string())
}

/// Scan report of one identity over the default grid. Parameters of zero
/// mean "use the default".
#[allow(clippy::too_many_arguments)]
pub fn scan_identity_json(
    identity: &str,
    dist: &str,
    k: u32,
    r: u32,
    m: u32,
    n: u32,
    method: &str,
    samples: u32,
    seed: u64,
) -> Result<String, String> {
    let model = model(dist)?;
    let id: IdentityId = identity.parse().map_err(text)?;
    let method: Method = method.parse().map_err(text)?;
    if method == Method::Mc && u64::from(samples) > u64::from(MAX_DRAWS) {
        return Err(format!("at most {MAX_DRAWS} samples per expectation"));
    }
    let given = |x: u32| (x > 0).then_some(x);
    let params = Params { k: given(k), r: given(r), m: given(m), n: given(n), p: None };
    let opts = ScanOptions {
        method,
        samples: u64::from(samples),
        seed,
        tol: characterize::default_tol(method),
        ..ScanOptions::new(&model)
    };
    let rep = characterize::scan(id, &params, &model, &opts).map_err(text)?;
    let bytes = report::serialize_report(&rep, Format::Json).map_err(text)?;
    String::from_utf8(bytes).map_err(text)
}

pub fn classify_json(dist: &str, tol: f64) -> Result<String, String> {
    let rep = characterize::classify_report(&model(dist)?, tol).map_err(text)?;
    let bytes = report::serialize_classify(&rep, Format::Json).map_err(text)?;
    String::from_utf8(bytes).map_err(text)
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn density_curve(
    dist: &str,
    i: u32,
    j: u32,
    u: f64,
    v: f64,
    points: u32,
    bins: u32,
    draws: u32,
    seed: u32,
) -> Result<String, JsError> {
    density_curve_json(dist, i, j, u, v, points, bins, draws, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn scan_identity(
    identity: &str,
    dist: &str,
    k: u32,
    r: u32,
    m: u32,
    n: u32,
    method: &str,
    samples: u32,
    seed: u32,
) -> Result<String, JsError> {
    scan_identity_json(identity, dist, k, r, m, n, method, samples, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(dist: &str, tol: f64) -> Result<String, JsError> {
    classify_json(dist, tol).map_err(|e| JsError::new(&e))
}

/// Identity tokens for the page's drop-down.
#[wasm_bindgen]
pub fn identities() -> String {
    let names: Vec<String> = IdentityId::ALL.iter().map(|id| id.to_string()).collect();
    json!(names).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn histogram_matches_density() {
        let out = parse(&density_curve_json("exp:c=1", 2, 2, 0.0, 4.0, 50, 20, 20_000, 7).unwrap());
        assert_eq!(out["xs"].as_array().unwrap().len(), 50);
        assert_eq!(out["edges"].as_array().unwrap().len(), 21);
        // Exponential records are uniform in the bridge: mean is the midpoint.
        assert!((out["mean"].as_f64().unwrap() - 2.0).abs() < 1e-10);
        assert!((out["mc_mean"].as_f64().unwrap() - 2.0).abs() < 0.05);
        let mass: f64 = out["histogram"].as_array().unwrap().iter().map(|h| h.as_f64().unwrap() * 0.2).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(density_curve_json("exp:c=1", 2, 2, 0.0, 4.0, 1, 20, 10, 0).is_err());
    }

    #[test]
    fn scan_and_classify() {
        let out = parse(&scan_identity_json("cor3", "weibull:alpha=0.5,c=1", 0, 0, 0, 0, "quad", 0, 0).unwrap());
        assert_eq!(out["verdict"], "CONFIRMED");
        let out = parse(&scan_identity_json("cor3", "weibull:alpha=2,c=1", 0, 0, 0, 0, "quad", 0, 0).unwrap());
        assert_eq!(out["verdict"], "VIOLATED");
        assert!(scan_identity_json("nope", "linquad", 0, 0, 0, 0, "quad", 0, 0).is_err());
        let out = parse(&classify_json("exp:c=2", 1e-6).unwrap());
        assert_eq!(out["classification"], "Exponential");
        assert_eq!(parse(&identities()).as_array().unwrap().len(), 16);
    }
}
