//! Per-characteristic initial data and admissibility checks.
//!
//! A radially symmetric flow is described by the scaled fields `F = V/r`
//! (velocity) and `G = E/r` (force field) together with the gradient
//! variables `u = div V − 4F` and `v = div E − 4G`. Everything the engine
//! does — integration, classification, sweeps — starts from one
//! [`InitialDatum`] holding these values at `t = 0` for a single
//! characteristic rooted at radius `r0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Initial state of one characteristic.
///
/// The checked constructors ([`InitialDatum::new`], [`InitialDatum::with_r0`])
/// enforce the admissibility conditions under which the analysis is valid:
///
/// * `G0 < 1/4`, so that `M0 = √(1 − 4·G0)` is real and positive;
/// * positive initial density `1 − (v0 + 4·G0) > 0`;
/// * `r0 ≥ 0`, with `r0 = 0` meaning the limiting values `V0(r)/r → V0′(0)`
///   and likewise for `G0`.
///
/// [`InitialDatum::phase_point`] relaxes the density condition for parameter
/// sweeps that chart the full phase plane. Fields are public for ergonomic
/// read access; construct through the validating constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    /// Root radius of the characteristic (affects only the radial column).
    pub r0: f64,
    /// Scaled radial velocity `V0(r0)/r0`.
    #[serde(rename = "F0")]
    pub f0: f64,
    /// Scaled radial field `E0(r0)/r0`.
    #[serde(rename = "G0")]
    pub g0: f64,
    /// Gradient variable `div V0 − 4·F0 = r0·F0′(r0)`.
    pub u0: f64,
    /// Gradient variable `div E0 − 4·G0 = r0·G0′(r0)`.
    pub v0: f64,
}

/// Rejection reasons for inadmissible initial data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatumError {
    #[error("component {name} = {value} is not finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("G0 = {g0} lies outside the admissible domain G0 < 1/4")]
    FieldTooStrong { g0: f64 },
    #[error("initial density 1 - (v0 + 4 G0) = {n0} is not positive")]
    NonPositiveDensity { n0: f64 },
    #[error("root radius r0 = {r0} must be >= 0")]
    NegativeRadius { r0: f64 },
}

impl InitialDatum {
    /// Fully validated datum with the default root radius `r0 = 1`.
    ///
    /// The classification itself depends only on `(F0, G0, u0, v0)`; the
    /// radius scales the `r` column of trajectories and nothing else.
    pub fn new(f0: f64, g0: f64, u0: f64, v0: f64) -> Result<Self, DatumError> {
        Self::with_r0(1.0, f0, g0, u0, v0)
    }

    /// Fully validated datum with an explicit root radius.
    pub fn with_r0(r0: f64, f0: f64, g0: f64, u0: f64, v0: f64) -> Result<Self, DatumError> {
        let datum = Self::phase_point_r0(r0, f0, g0, u0, v0)?;
        let n0 = datum.initial_density();
        if n0 <= 0.0 {
            return Err(DatumError::NonPositiveDensity { n0 });
        }
        Ok(datum)
    }

    /// Datum validated as a phase-space point only: finite components,
    /// `G0 < 1/4` and `r0 ≥ 0`, but **no** density-positivity requirement.
    ///
    /// Parameter-plane scans cover rectangles on which the derived density
    /// goes negative; the characteristic ODEs and the criterion algebra are
    /// insensitive to that, so the scan layer uses this constructor.
    pub fn phase_point(f0: f64, g0: f64, u0: f64, v0: f64) -> Result<Self, DatumError> {
        Self::phase_point_r0(1.0, f0, g0, u0, v0)
    }

    fn phase_point_r0(r0: f64, f0: f64, g0: f64, u0: f64, v0: f64) -> Result<Self, DatumError> {
        for (name, value) in [("r0", r0), ("F0", f0), ("G0", g0), ("u0", u0), ("v0", v0)] {
            if !value.is_finite() {
                return Err(DatumError::NonFinite { name, value });
            }
        }
        if g0 >= 0.25 {
            return Err(DatumError::FieldTooStrong { g0 });
        }
        if r0 < 0.0 {
            return Err(DatumError::NegativeRadius { r0 });
        }
        Ok(Self { r0, f0, g0, u0, v0 })
    }

    /// Initial density `n(0) = 1 − (v0 + 4·G0)` (background fixed to 1).
    pub fn initial_density(&self) -> f64 {
        1.0 - (self.v0 + 4.0 * self.g0)
    }

    /// Velocity divergence `div V0 = u0 + 4·F0`.
    pub fn div_v0(&self) -> f64 {
        self.u0 + 4.0 * self.f0
    }

    /// Field divergence `div E0 = v0 + 4·G0`.
    pub fn div_e0(&self) -> f64 {
        self.v0 + 4.0 * self.g0
    }

    /// True on the equilibrium coefficient trajectory `F0 = G0 = 0`, where the
    /// linearized system has constant coefficients and a harmonic solution.
    pub fn is_harmonic_degenerate(&self) -> bool {
        self.f0 == 0.0 && self.g0 == 0.0
    }

    /// Sup norm of `(F0, G0, u0, v0)`; small-data results are stated in it.
    pub fn sup_norm(&self) -> f64 {
        self.f0
            .abs()
            .max(self.g0.abs())
            .max(self.u0.abs())
            .max(self.v0.abs())
    }
}
