//! Canonical report encoding.
//!
//! JSON objects are written with sorted keys, two-space indentation and
//! floats as `{:.16e}`; non-finite floats become `null`. Two runs with the
//! same inputs therefore produce the same bytes.

use std::fmt::Write as _;

use serde_json::Value;
use torus_green::Complex64;

pub const SCHEMA_VERSION: u64 = 1;

/// `-0.0` prints as `0.0...e0`.
pub fn float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn cx(z: Complex64) -> Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&float(x)),
                    _ => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(out, &map[key], depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub const CSV_HEADER: &str = "re_tau,im_tau,count,extra_t,extra_s";

/// One CSV row; missing values are left empty.
pub fn csv_row(tau: Complex64, count: Option<usize>, extra: Option<(f64, f64)>) -> String {
    let count = count.map(|n| n.to_string()).unwrap_or_default();
    let (t, s) = match extra {
        Some((t, s)) => (float(t), float(s)),
        None => (String::new(), String::new()),
    };
    format!("{},{},{count},{t},{s}\n", float(tau.re), float(tau.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 1.5, "a": [1, -2, f64::NAN], "c": {"z": 0.1, "y": true}});
        let s = to_canonical_json(&v);
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(s.contains("1.5000000000000000e0"));
        assert!(s.contains("null"));
        assert!(s.contains("-2"));
        assert!(s.find("\"y\"").unwrap() < s.find("\"z\"").unwrap());
    }

    #[test]
    fn float_round_trips() {
        for x in [0.1, -3.0e-300, 1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_row_layout() {
        let row = csv_row(Complex64::new(0.5, 1.0), Some(3), None);
        assert_eq!(row, "5.0000000000000000e-1,1.0000000000000000e0,3,,\n");
    }
}
