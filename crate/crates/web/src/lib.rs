//! Browser bindings. Every export takes plain arguments and returns a JSON
//! string; the Rust-side functions are also usable (and tested) natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use gprand_core::analytic::{f_eval, g_eval, SmoothingParams};
use gprand_core::bounds::{eta_composition, parse_ratio, prop1_exponents, prop2_exponents, prop3_exponents, ratio_str};
use gprand_core::exactreal::DEFAULT_PRECISION;
use gprand_core::genpoly::parse;
use gprand_core::measures::{discrepancy, well_distribution};
use gprand_core::sequence::{fractional_parts, generate};

/// Longest sequence the page will generate.
pub const MAX_N: usize = 1 << 15;

/// Signs, walk, `W` with its witness and the discrepancy of `{f(n)}`.
pub fn sequence_report(expr: &str, n: usize) -> Result<Value, String> {
    if n == 0 || n > MAX_N {
        return Err(format!("N must be in 1..={MAX_N}"));
    }
    let e = parse(expr).map_err(|e| e.to_string())?;
    let seq = generate(&e, n, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let fr = fractional_parts(&e, n, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let wd = well_distribution(&seq, None);
    let disc = discrepancy(&fr).map_err(|e| e.to_string())?;
    let signs = seq.signs();
    let walk: Vec<i64> = signs
        .iter()
        .scan(0i64, |s, &x| {
            *s += x as i64;
            Some(*s)
        })
        .collect();
    let shown: String = signs.iter().take(256).map(|&s| if s > 0 { '+' } else { '-' }).collect();
    Ok(json!({
        "n": n,
        "signs": shown,
        "walk": walk,
        "w": wd.w,
        "witness": {"a": wd.witness.a, "b": wd.witness.b, "m": wd.witness.m, "u": wd.witness.u},
        "d": disc.d,
        "interval": [disc.interval.0, disc.interval.1],
    }))
}

/// `F(x, tau)` and the truncated `G_r(x)` on a uniform grid of `[0, 1)`.
pub fn smoothing_curve(r: u32, delta: f64, tau: f64, k: u64, samples: usize) -> Result<Value, String> {
    let p = SmoothingParams::new(r, delta, tau, k).map_err(|e| e.to_string())?;
    if !(2..=4096).contains(&samples) || k > 4096 {
        return Err("samples must be in 2..=4096 and K at most 4096".into());
    }
    let xs: Vec<f64> = (0..samples).map(|i| i as f64 / samples as f64).collect();
    let f: Vec<[f64; 2]> = xs.iter().map(|&x| f_eval(x, tau)).map(|z| [z.re, z.im]).collect();
    let g: Vec<[f64; 2]> = xs.iter().map(|&x| g_eval(x, &p)).map(|z| [z.re, z.im]).collect();
    Ok(json!({"x": xs, "f": f, "g": g, "errorScale": (delta * k as f64).powi(-(r as i32))}))
}

/// Exponent rows for degrees `2..=d_max` at type `t` (`"p/q"` text).
pub fn exponent_table(d_max: u32, t: &str) -> Result<Value, String> {
    let t = parse_ratio(t).map_err(|e| e.to_string())?;
    if !(2..=16).contains(&d_max) {
        return Err("degree must be in 2..=16".into());
    }
    let mut rows = Vec::new();
    for d in 2..=d_max {
        let err = |e: gprand_core::Error| e.to_string();
        let (p1, p2, p3) = (
            prop1_exponents(d, &t).map_err(err)?,
            prop2_exponents(d, &t).map_err(err)?,
            prop3_exponents(d, &t).map_err(err)?,
        );
        let eta = eta_composition(d, &t).map_err(err)?;
        rows.push(json!({
            "d": d,
            "prop1": [ratio_str(&p1.a_exp), ratio_str(&p1.n_exp)],
            "prop2": [ratio_str(&p2.a_exp), ratio_str(&p2.n_exp)],
            "prop3": [ratio_str(&p3.a_exp), ratio_str(&p3.n_exp)],
            "threshold": ratio_str(&eta.threshold),
            "eta": ratio_str(&eta.candidate),
        }));
    }
    Ok(Value::Array(rows))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sequenceReport)]
pub fn sequence_report_js(expr: &str, n: usize) -> Result<String, JsValue> {
    to_js(sequence_report(expr, n))
}

#[wasm_bindgen(js_name = smoothingCurve)]
pub fn smoothing_curve_js(r: u32, delta: f64, tau: f64, k: u32, samples: usize) -> Result<String, JsValue> {
    to_js(smoothing_curve(r, delta, tau, k as u64, samples))
}

#[wasm_bindgen(js_name = exponentTable)]
pub fn exponent_table_js(d_max: u32, t: &str) -> Result<String, JsValue> {
    to_js(exponent_table(d_max, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_report_fields() {
        let v = sequence_report("x*1/2", 8).unwrap();
        assert_eq!(v["signs"], "-+-+-+-+");
        assert_eq!(v["w"], 4);
        assert_eq!(v["walk"][7], 0);
        assert!(sequence_report("x", 0).is_err());
        assert!(sequence_report("x +", 4).is_err());
    }

    #[test]
    fn smoothing_curve_shapes() {
        let v = smoothing_curve(1, 0.05, 0.0, 16, 10).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 10);
        assert_eq!(v["g"][3][0], 1.0);
        assert!(smoothing_curve(1, 2.0, 0.5, 16, 10).is_err());
    }

    #[test]
    fn exponent_rows() {
        let v = exponent_table(3, "1").unwrap();
        assert_eq!(v[0]["prop3"][1], "4/357");
        assert_eq!(v[0]["threshold"], "1/1764");
        assert_eq!(v[1]["prop1"][0], "1/3");
        assert!(exponent_table(1, "1").is_err());
        assert!(exponent_table(3, "0").is_err());
    }
}
