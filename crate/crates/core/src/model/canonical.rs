//! Canonical number formatting shared by every persisted stream.
//!
//! All reals are rounded to 9 significant digits and then written in the
//! shortest form that round-trips. Object keys are emitted sorted, so a value
//! always serializes to the same bytes.

use serde::Serialize;
use serde_json::Value;

/// Rounds to 9 significant decimal digits. `-0.0` becomes `0.0`; non-finite
/// values pass through unchanged.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = round9(n.as_f64().expect("f64 number"));
                if let Some(num) = serde_json::Number::from_f64(x) {
                    *n = num;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

/// Serializes `value` to a single-line canonical JSON string.
pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v);
    serde_json::to_string(&v)
}

/// Pretty-printed variant for human-facing report files.
pub fn to_canonical_json_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v);
    serde_json::to_string_pretty(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounds_to_nine_digits() {
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
        assert_eq!(round9(123456789.49), 123456789.0);
        assert_eq!(round9(-0.0), 0.0);
        assert_eq!(round9(2.0), 2.0);
    }

    #[test]
    fn keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: u32,
        }
        let s = to_canonical_json(&S { zeta: 0.1 + 0.2, alpha: 3 }).unwrap();
        assert_eq!(s, r#"{"alpha":3,"zeta":0.3}"#);
    }

    proptest! {
        #[test]
        fn round9_is_idempotent(x in -1e6f64..1e6) {
            let r = round9(x);
            prop_assert_eq!(round9(r), r);
            prop_assert!((r - x).abs() <= x.abs() * 1e-8 + 1e-300);
        }
    }
}
