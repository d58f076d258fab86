//! Decimal rendering helpers shared by the CSV writers and reports.

/// Renders `x` with 17 significant decimal digits in scientific notation.
///
/// 17 digits are enough to round-trip any `f64` exactly, so CSV output can be
/// re-read bit-for-bit. Infinities and NaN render as Rust's `Display` does;
/// they never appear in well-formed output and stay recognizable if they do.
pub fn g17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
