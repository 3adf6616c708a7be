//! Deterministic number formatting shared by every output format.

use serde_json::Value;
use wpir_core::prob::{self, Ratio};

/// Significant digits kept in every floating-point output.
pub const SIG_DIGITS: usize = 15;

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal that reads back as `round_sig(x)`; never scientific
/// notation, never `-0`.
pub fn fmt_f64(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_owned();
    }
    format!("{r}")
}

/// A JSON number holding `round_sig(x)`, or `null` if `x` is not finite.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

pub fn json_ratio(r: &Ratio) -> Value {
    Value::String(prob::format_ratio(r))
}

/// Pretty JSON with a trailing newline. `serde_json` keeps object keys
/// sorted, so equal values always print identically.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_f64(3f64.log2()), "1.58496250072116");
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(1e-3), "0.001");
        assert_eq!(fmt_f64(2.0), "2");
    }
}
