//! Fixed-precision rendering of numbers for stdout.

use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 10;

/// `x` with 10 significant digits, in positional notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = SIGNIFICANT_DIGITS - 1)
    }
}

pub fn round_sig(x: f64) -> f64 {
    sig10(x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON document to 10 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(2.3263478740408408), "2.326347874");
        assert_eq!(sig10(4.605170185988091), "4.605170186");
        assert_eq!(sig10(1546.717845455068), "1546.717845");
        assert_eq!(sig10(-0.5), "-0.5000000000");
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(1.5e20), "1.500000000e20");
        assert_eq!(round_sig(1.23456789012345), 1.234567890);
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let v = serde_json::json!({"a": 1.0000000000001, "n": 3, "s": [0.1234567890123]});
        assert_eq!(round_json(v), serde_json::json!({"a": 1.0, "n": 3, "s": [0.123456789]}));
    }
}
