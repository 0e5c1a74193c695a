//! Canonical JSON rendering: object keys sorted, floats at 15 significant
//! digits, no whitespace dependence. Reports written this way are
//! byte-identical across runs with the same job and seed.

use serde_json::Value;

pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                write_float(n.as_f64().unwrap_or(f64::NAN), out);
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push(':');
                write_value(&map[*k], out);
            }
            out.push('}');
        }
    }
}

/// Fixed 15-significant-digit scientific form; zero written plainly.
pub fn write_float(f: f64, out: &mut String) {
    if f == 0.0 {
        out.push_str("0.0");
    } else if f.is_finite() {
        out.push_str(&format!("{f:.14e}"));
    } else {
        out.push_str("null");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 1.5, "a": [0.0, 2u64, -3i64], "c": {"z": true, "y": "s"}});
        let s = to_canonical_string(&v);
        assert_eq!(
            s,
            "{\"a\":[0.0,2,-3],\"b\":1.50000000000000e0,\"c\":{\"y\":\"s\",\"z\":true}}\n"
        );
    }
}
