//! Dynamics along one characteristic.
//!
//! The radial flow reduces to autonomous ODEs along curves `ṙ = F·r`:
//!
//! * coefficient pair: `Ḟ = −F² − G`, `Ġ = F·(1 − 4G)`;
//! * gradient (Riccati) pair: `u̇ = −u² − 2Fu − v`, `v̇ = −uv + (1−4G)u − 4Fv`;
//! * projective linearization: `q̇ = p1`, `ṗ1 = −2F·p1 − p2`,
//!   `ṗ2 = (1−4G)·p1 − 4F·p2`, with `(q, p1, p2)(0) = (1, u0, v0)`,
//!   and `u = p1/q`, `v = p2/q` wherever `q ≠ 0`.
//!
//! Two quantities are conserved: `C4 = (1 − 2G + 2F²)/(2M)` with
//! `M = √(1 − 4G)`, and `r⁴·(1 − 4G)`. They confine `M` to the reciprocal
//! envelope pair `M± = 2C4 ± √(4C4² − 1)` and make every non-equilibrium
//! `(F, G)` orbit periodic with period `2π`.
//!
//! Submodules: [`dop853`] (the adaptive integrator), [`series`] (sampled
//! trajectories and their CSV/JSON export), [`oracle`] (integration-backed
//! classification, period measurement, and the full characteristic run).

pub mod dop853;
mod dop853_coeffs;
pub mod oracle;
pub mod series;

use crate::datum::DatumError;
use serde::{Deserialize, Serialize};

/// Right-hand side of the coefficient/radius system `(F, G, r)`.
///
/// `dF = −F² − G`, `dG = F·(1 − 4G)`, `dr = F·r`.
#[inline]
pub fn rhs_characteristic(f: f64, g: f64, r: f64) -> (f64, f64, f64) {
    (-f * f - g, f * (1.0 - 4.0 * g), f * r)
}

/// Right-hand side of the gradient (Riccati) pair `(u, v)` driven by `(F, G)`.
///
/// `du = −u² − 2Fu − v`, `dv = −uv + (1−4G)u − 4Fv`.
#[inline]
pub fn rhs_gradient(f: f64, g: f64, u: f64, v: f64) -> (f64, f64) {
    (
        -u * u - 2.0 * f * u - v,
        -u * v + (1.0 - 4.0 * g) * u - 4.0 * f * v,
    )
}

/// Right-hand side of the linearized system `(q, p1, p2)` driven by `(F, G)`.
///
/// `dq = p1`, `dp1 = −2F·p1 − p2`, `dp2 = (1−4G)·p1 − 4F·p2`.
#[inline]
pub fn rhs_linearized(f: f64, g: f64, _q: f64, p1: f64, p2: f64) -> (f64, f64, f64) {
    (
        p1,
        -2.0 * f * p1 - p2,
        (1.0 - 4.0 * g) * p1 - 4.0 * f * p2,
    )
}

/// First integrals attached to one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    /// `M0 = √(1 − 4·G0)`.
    #[serde(rename = "M0")]
    pub m0: f64,
    /// `C4 = (1 − 2·G0 + 2·F0²)/(2·M0) ≥ 1/2`.
    #[serde(rename = "C4")]
    pub c4: f64,
    /// `K = r0·√M0`, so that `r(t) = K/√M(t)`.
    #[serde(rename = "K")]
    pub k: f64,
}

/// Evaluates the conserved quantities `(M0, C4, K)` of a characteristic.
///
/// Rejects `G0 ≥ 1/4`, where `M0` would leave the real axis.
pub fn conserved_quantities(f0: f64, g0: f64, r0: f64) -> Result<Conserved, DatumError> {
    if g0 >= 0.25 || g0.is_nan() {
        return Err(DatumError::FieldTooStrong { g0 });
    }
    let m0 = (1.0 - 4.0 * g0).sqrt();
    let c4 = (1.0 - 2.0 * g0 + 2.0 * f0 * f0) / (2.0 * m0);
    Ok(Conserved { m0, c4, k: r0 * m0.sqrt() })
}

/// Envelope `(M−, M+)` of `M(t) = √(1 − 4G(t))` over one period.
///
/// `M± = 2C4 ± √(4C4² − 1)`; the pair is reciprocal, `M−·M+ = 1`, and brackets
/// `M0`. The discriminant is clamped at zero: it is non-negative in exact
/// arithmetic (`C4 ≥ 1/2`) but can round below by an ulp at the equilibrium.
pub fn envelope(f0: f64, g0: f64) -> Result<(f64, f64), DatumError> {
    let c4 = conserved_quantities(f0, g0, 1.0)?.c4;
    let half_width = (4.0 * c4 * c4 - 1.0).max(0.0).sqrt();
    Ok((2.0 * c4 - half_width, 2.0 * c4 + half_width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn characteristic_rhs_matches_direct_substitution() {
        assert_eq!(rhs_characteristic(0.0, 0.0, 1.0), (0.0, 0.0, 0.0));
        let (df, dg, dr) = rhs_characteristic(0.1, 0.0, 2.0);
        assert_relative_eq!(df, -0.01, max_relative = 1e-15);
        assert_relative_eq!(dg, 0.1, max_relative = 1e-15);
        assert_relative_eq!(dr, 0.2, max_relative = 1e-15);
        // dF = −F² − G = −0.04 − 0.1; the sign of the F² term matters.
        let (df, dg, dr) = rhs_characteristic(-0.2, 0.1, 1.0);
        assert_relative_eq!(df, -0.14, max_relative = 1e-14);
        assert_relative_eq!(dg, -0.12, max_relative = 1e-14);
        assert_relative_eq!(dr, -0.2, max_relative = 1e-15);
    }

    #[test]
    fn gradient_rhs_matches_direct_substitution() {
        assert_eq!(rhs_gradient(0.0, 0.0, 0.0, 0.0), (0.0, 0.0));
        assert_eq!(rhs_gradient(0.0, 0.0, 1.0, 0.0), (-1.0, 1.0));
        let (du, dv) = rhs_gradient(0.1, 0.05, 0.2, -0.3);
        assert_relative_eq!(du, 0.22, max_relative = 1e-14);
        assert_relative_eq!(dv, 0.34, max_relative = 1e-14);
    }

    #[test]
    fn linearized_rhs_matches_direct_substitution() {
        assert_eq!(rhs_linearized(0.0, 0.0, 1.0, 0.0, 0.0), (0.0, 0.0, 0.0));
        assert_eq!(rhs_linearized(0.0, 0.0, 1.0, 0.0, 0.6), (0.0, -0.6, 0.0));
        let (dq, dp1, dp2) = rhs_linearized(0.1, 0.05, 1.0, 0.2, -0.3);
        assert_relative_eq!(dq, 0.2, max_relative = 1e-15);
        assert_relative_eq!(dp1, 0.26, max_relative = 1e-14);
        assert_relative_eq!(dp2, 0.28, max_relative = 1e-14);
    }

    #[test]
    fn conserved_quantities_examples() {
        let c = conserved_quantities(0.0, 0.0, 1.0).unwrap();
        assert_eq!((c.m0, c.c4, c.k), (1.0, 0.5, 1.0));

        let c = conserved_quantities(0.0, 0.09, 1.0).unwrap();
        assert_relative_eq!(c.m0, 0.8, max_relative = 1e-15);
        assert_relative_eq!(c.c4, 0.5125, max_relative = 1e-15);
        assert_relative_eq!(c.k, 0.894427, max_relative = 1e-6);

        // Both published forms of C4 agree: (1 − 2G0 + 2F0²)/(2M0) and
        // (1 + M0² + 4F0²)/(4M0).
        let c = conserved_quantities(0.5, 0.0, 2.0).unwrap();
        assert_eq!((c.m0, c.c4, c.k), (1.0, 0.75, 2.0));
        let alt = (1.0 + c.m0 * c.m0 + 4.0 * 0.25) / (4.0 * c.m0);
        assert_relative_eq!(c.c4, alt, max_relative = 1e-15);

        assert!(conserved_quantities(0.0, 0.25, 1.0).is_err());
        assert!(conserved_quantities(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn envelope_examples() {
        let (lo, hi) = envelope(0.0, 0.09).unwrap();
        assert_relative_eq!(lo, 0.8, max_relative = 1e-12);
        assert_relative_eq!(hi, 1.25, max_relative = 1e-12);

        assert_eq!(envelope(0.0, 0.0).unwrap(), (1.0, 1.0));

        let (lo, hi) = envelope(0.5, 0.0).unwrap();
        assert_relative_eq!(lo, 0.381966, max_relative = 1e-6);
        assert_relative_eq!(hi, 2.618034, max_relative = 1e-6);
    }

    #[test]
    fn envelope_is_reciprocal_and_brackets_m0() {
        for (f0, g0) in [(0.3, 0.09), (1.2, -0.7), (0.0, 0.2), (-0.4, 0.1)] {
            let (lo, hi) = envelope(f0, g0).unwrap();
            let m0 = conserved_quantities(f0, g0, 1.0).unwrap().m0;
            assert_relative_eq!(lo * hi, 1.0, max_relative = 1e-12);
            assert!(lo <= m0 * (1.0 + 1e-14) && m0 <= hi * (1.0 + 1e-14));
        }
    }
}
