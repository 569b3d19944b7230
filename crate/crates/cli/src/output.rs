use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Number, Value};
use std::io::Write;
use std::path::Path;

/// `%.12e` with a signed, at least two-digit exponent.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    // no negative zero in output
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                let f: f64 = text.parse().unwrap_or(f64::NAN);
                if f.is_finite() {
                    Value::Number(fmt_float(f).parse::<Number>().expect("valid number"))
                } else {
                    Value::Null
                }
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

/// Serialize with sorted keys and fixed float formatting.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = canonical(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(1.0), "1.000000000000e+00");
        assert_eq!(fmt_float(-0.00123), "-1.230000000000e-03");
        assert_eq!(fmt_float(6.02e123), "6.020000000000e+123");
    }

    #[test]
    fn keys_sorted_and_ints_kept() {
        let text = to_json(&json!({"b": 0.5, "a": 3, "c": [1.0, f64::NAN]})).unwrap();
        let a = text.find("\"a\"").unwrap();
        let b = text.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(text.contains("\"a\": 3"));
        assert!(text.contains("5.000000000000e-01"));
        assert!(text.contains("null"));
    }
}
