use serde_json::{Map, Value};

/// Significant digits of every floating-point number in the output.
pub const DIGITS: usize = 12;

/// A finite double rounded to [`DIGITS`] significant digits; infinities and
/// NaN become the strings `"-inf"`, `"+inf"` and `"nan"`.
pub fn num(x: f64) -> Value {
    if x == f64::NEG_INFINITY {
        return Value::from("-inf");
    }
    if x == f64::INFINITY {
        return Value::from("+inf");
    }
    if x.is_nan() {
        return Value::from("nan");
    }
    Value::from(round(x))
}

fn round(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().expect("formatted double")
}

/// Rounds every non-integer number in a JSON tree.
pub fn round_all(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64")),
        Value::Array(items) => Value::Array(items.into_iter().map(round_all).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_all(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Text of a scalar cell; nested values are written as compact JSON.
pub fn cell(v: &Value) -> String {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

/// `key,value` rows for the top-level fields of an object.
pub fn record_csv(v: &Value) -> String {
    let mut out = String::from("key,value\n");
    if let Value::Object(map) = v {
        for (k, x) in map {
            out.push_str(&format!("{},{}\n", cell(&Value::from(k.as_str())), cell(x)));
        }
    }
    out
}

pub fn table_csv(header: &[&str], rows: &[Vec<Value>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(num(-10.000000000000002), json!(-10.0));
        assert_eq!(round_all(json!({"a": [2.0f64.sqrt() / 10.0, 3]})), json!({"a": [0.141421356237, 3]}));
    }

    #[test]
    fn csv_cells_are_quoted() {
        assert_eq!(cell(&json!("a,b")), "\"a,b\"");
        assert_eq!(record_csv(&json!({"x": 1, "y": "-inf"})), "key,value\nx,1\ny,-inf\n");
    }
}
