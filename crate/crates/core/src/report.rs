//! Serialization helpers shared by report types.

use serde::Serializer;

/// Writes finite values as numbers and non-finite ones as the strings
/// `"-inf"`, `"inf"` or `"nan"`, which plain JSON cannot represent.
pub fn extended_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}
