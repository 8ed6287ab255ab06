//! Deterministic report rendering. JSON objects are emitted with sorted
//! keys (the default map in serde_json), rationals as "num/den" strings
//! and reals rounded to 12 significant digits, so identical runs produce
//! byte-identical output.

use buckdens::{
    BoundSemantics, CheckReport, CountMode, CoverResult, CoverStatus, DensityReport, Measure,
    Rat, Verdict, VerifyOutcome,
};
use serde_json::{json, Value};

/// Round to 12 significant digits; keeps output stable across runs.
pub fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn real(x: f64) -> Value {
    json!(round12(x))
}

pub fn rat_str(r: &Rat) -> Value {
    Value::String(r.to_string())
}

pub fn measure_value(command: &str, expr: &str, m: &Measure) -> Value {
    json!({
        "command": command,
        "expr": expr,
        "exact": m.is_exact(),
        "value": rat_str(&m.value),
        "value_real": real(m.value.to_f64()),
        "tail_bound": real(m.tail.to_f64()),
    })
}

pub fn mode_str(mode: CountMode) -> &'static str {
    match mode {
        CountMode::Exact => "exact",
        CountMode::Window => "window",
    }
}

pub fn density_value(command: &str, expr: &str, system: &str, rep: &DensityReport) -> Value {
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "modulus": e.modulus,
                "count": e.count,
                "ratio": rat_str(&e.ratio),
                "ratio_real": real(e.ratio.to_f64()),
                "exact": e.exact,
            })
        })
        .collect();
    json!({
        "command": command,
        "expr": expr,
        "system": system,
        "mode": mode_str(rep.mode),
        "window": rep.window,
        "bound_semantics": match rep.bound {
            BoundSemantics::UpperBound => "upper-bound",
            BoundSemantics::Approximation => "approximation",
        },
        "entries": entries,
        "final": real(rep.final_value()),
        "final_ratio": rat_str(&rep.final_ratio),
    })
}

pub fn cover_value(expr: &str, res: &CoverResult) -> Value {
    let classes: Vec<String> = res
        .certificate
        .classes
        .iter()
        .map(|c| c.to_string())
        .collect();
    let (status, window) = match res.certificate.status {
        CoverStatus::Proved => ("proved", None),
        CoverStatus::WindowChecked(w) => ("window-checked", Some(w)),
    };
    json!({
        "command": "cover",
        "expr": expr,
        "max_modulus": res.max_modulus,
        "restriction": format!("infimum restricted to moduli <= {}", res.max_modulus),
        "value": rat_str(&res.value),
        "value_real": real(res.value.to_f64()),
        "optimal": res.optimal,
        "nodes": res.nodes,
        "certificate": {
            "classes": classes,
            "weight": rat_str(&res.certificate.weight),
            "status": status,
            "window": window,
        },
    })
}

pub fn verify_value(expr: &str, classes: &[String], outcome: &VerifyOutcome) -> Value {
    let (status, counterexample, window) = match outcome {
        VerifyOutcome::Proved => ("proved", None, None),
        VerifyOutcome::WindowChecked { window } => ("window-checked", None, Some(*window)),
        VerifyOutcome::Failed { counterexample } => ("failed", Some(*counterexample), None),
    };
    json!({
        "command": "verify-cover",
        "expr": expr,
        "classes": classes,
        "status": status,
        "counterexample": counterexample,
        "window": window,
    })
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub fn check_value(command: &str, rep: &CheckReport) -> Value {
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "value": r.value,
                "numeric": r.numeric.map(round12),
            })
        })
        .collect();
    let ce = rep.counterexample.as_ref().map(|c| {
        json!({
            "n": c.n,
            "part": c.part,
            "step": c.step,
            "detail": c.detail,
        })
    });
    json!({
        "command": command,
        "check": rep.check,
        "verdict": verdict_str(rep.verdict),
        "counterexample": ce,
        "rows": rows,
        "window": rep.window,
        "n_range": rep.n_range.map(|(a, b)| vec![a, b]),
        "notes": rep.notes,
    })
}

pub fn density_csv(rep: &DensityReport) -> String {
    let mut out = String::from("N,B_N,R,ratio\n");
    for e in &rep.entries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.n,
            e.modulus,
            e.count,
            round12(e.ratio.to_f64())
        ));
    }
    out
}

/// Plain-text rendering of any report value: one "key: value" line per
/// top-level field, nested values inline.
pub fn text_render(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = v {
        for (k, val) in map {
            match val {
                Value::Array(items) => {
                    out.push_str(&format!("{k}:\n"));
                    for item in items {
                        out.push_str(&format!("  {}\n", compact(item)));
                    }
                }
                other => out.push_str(&format!("{k}: {}\n", compact(other))),
            }
        }
    } else {
        out.push_str(&format!("{v}\n"));
    }
    out
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
