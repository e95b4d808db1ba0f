//! Browser bindings: each export takes a JSON document and returns a JSON
//! report, or throws a string describing the input error.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use extendkit::convex;
use extendkit::ground::{self, PartialFunction, PartialSetFunction, Rational, ValueClass};
use extendkit::subadditive;
use extendkit::submodular::{self, SubmodularVerdict, DEFAULT_CLOSURE_CAP};
use extendkit::xos;

/// Roof and canonical extension of a one-dimensional convex instance sampled
/// on `samples` evenly spaced points over `[lo, hi]`.
pub fn convex_profile_json(doc: &str, lo: f64, hi: f64, samples: usize) -> Result<Value, String> {
    let ch = ground::parse_convex_function(doc.as_bytes()).map_err(|e| e.to_string())?;
    if ch.dim() != 1 {
        return Err(format!("the profile plot needs dimension 1, got {}", ch.dim()));
    }
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || samples < 2 {
        return Err("need lo < hi and at least two samples".into());
    }
    let verdict = convex::extend_convex(&ch).map_err(|e| e.to_string())?;
    let vertices = convex::enumerate_dual_vertices(&ch).map_err(|e| e.to_string())?;
    let (lo, hi) = (Rational::from_f64_floor(lo, 20), Rational::from_f64_floor(hi, 20));
    let step = (&hi - &lo) / Rational::from(samples as i64 - 1);
    let mut profile = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = vec![&lo + &step * Rational::from(k as i64)];
        let roof = convex::roof_value(&ch, &x).map_err(|e| e.to_string())?;
        let tilde = vertices.iter().map(|v| v.eval(&x)).max().expect("at least one vertex");
        profile.push(json!({
            "x": x[0].to_f64(),
            "roof": roof.map(|r| r.to_f64()),
            "tilde": tilde.to_f64(),
        }));
    }
    let points: Vec<Value> = ch.points().iter().map(|(t, f)| json!({"x": t[0].to_f64(), "value": f.to_f64()})).collect();
    Ok(json!({
        "extendible": verdict.is_extendible(),
        "vertices": vertices,
        "points": points,
        "profile": profile,
    }))
}

/// Submodular verdict, and for refuted inputs the certificate before and
/// after rewriting onto defined sets.
pub fn submodular_check_json(doc: &str) -> Result<Value, String> {
    let h = ground::parse_set_function(doc.as_bytes(), ValueClass::Submodular).map_err(|e| e.to_string())?;
    Ok(match submodular::extend_submodular(&h, DEFAULT_CLOSURE_CAP).map_err(|e| e.to_string())? {
        SubmodularVerdict::Extendible { family, values } => {
            json!({"extendible": true, "family": family, "values": values})
        }
        SubmodularVerdict::AntichainShortcut { family, values } => {
            json!({"extendible": true, "antichain": true, "family": family, "values": values})
        }
        SubmodularVerdict::NotExtendible(cert) => {
            let rewritten = submodular::lattice_rewrite(&cert, &h).map_err(|e| e.to_string())?;
            json!({
                "extendible": false,
                "certificate": cert.to_json_value(),
                "slack": cert.slack(&h),
                "rewritten": rewritten.to_json_value(),
                "rewritten_valid": submodular::verify_square_certificate(&rewritten, &h),
            })
        }
    })
}

fn positive_factors(h: &PartialSetFunction) -> Value {
    let without_empty: Vec<_> = h.points().iter().filter(|(s, _)| !s.is_empty()).cloned().collect();
    if h.check_positive().is_err() || without_empty.len() != h.len() {
        return Value::Null;
    }
    let mono = subadditive::approx_monotone_subadditive_exact(h).ok().map(|a| a.alpha);
    let xos = xos::approx_xos(h).ok().map(|a| a.alpha);
    json!({"monotone_subadditive": mono, "xos": xos})
}

/// Extendibility of a partial set function in every supported class.
pub fn set_function_report_json(doc: &str) -> Result<Value, String> {
    let h = match ground::parse_partial_function(doc.as_bytes()).map_err(|e| e.to_string())? {
        PartialFunction::Set(h) => h,
        PartialFunction::Convex(_) => return Err("expected a set-function document with an \"m\" key".into()),
    };
    let nonnegative = h.check_class(ValueClass::Subadditive).is_ok();
    let mut report = json!({"m": h.m(), "points": h.len(), "nonnegative": nonnegative});
    if nonnegative {
        let mono = subadditive::extend_monotone_subadditive(&h).map_err(|e| e.to_string())?;
        let general = subadditive::extend_general_subadditive(&h).map_err(|e| e.to_string())?;
        let x = xos::extend_xos(&h).map_err(|e| e.to_string())?;
        let witness = |v: &subadditive::SubadditiveVerdict| match v {
            subadditive::SubadditiveVerdict::Extendible => Value::Null,
            subadditive::SubadditiveVerdict::NotExtendible(w) => json!(w),
        };
        report["monotone_subadditive"] = json!({"extendible": mono.is_extendible(), "violation": witness(&mono)});
        report["subadditive"] = json!({"extendible": general.is_extendible(), "violation": witness(&general)});
        report["xos"] = serde_json::to_value(&x).map_err(|e| e.to_string())?;
        report["factors"] = positive_factors(&h);
    }
    let sub = submodular::extend_submodular(&h, DEFAULT_CLOSURE_CAP).map_err(|e| e.to_string())?;
    report["submodular"] = json!({"extendible": sub.is_extendible()});
    Ok(report)
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn convex_profile(doc: &str, lo: f64, hi: f64, samples: usize) -> Result<String, JsValue> {
    to_js(convex_profile_json(doc, lo, hi, samples))
}

#[wasm_bindgen]
pub fn submodular_check(doc: &str) -> Result<String, JsValue> {
    to_js(submodular_check_json(doc))
}

#[wasm_bindgen]
pub fn set_function_report(doc: &str) -> Result<String, JsValue> {
    to_js(set_function_report_json(doc))
}
