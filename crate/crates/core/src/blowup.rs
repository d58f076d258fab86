//! Closed-form blow-up criterion.
//!
//! The coefficient pair `(F, G)` travels a closed orbit, and `M = √(1 − 4G)`
//! together with the sign of `F` parametrizes it: in the variables
//! `(w, M) = (σ·W(M), M)` with `W(M) = √(4C₄M − 1 − M²) = 2|F|` the orbit is
//! exactly the circle of radius `√(4C₄² − 1)` centered at `(0, 2C₄)`. The
//! deviation `q` of a gradient trajectory is an affine function of `(w, M)`,
//!
//! ```text
//! q(M, σ) = C₁ + Y(M, σ),    Y = (σ·C₂·W(M) − C₃·M) / K₁³,
//! ```
//!
//! so its extrema over one period lie at the tangency points of the level
//! lines with that circle — a finite candidate list. The constants `C₂, C₃`
//! are obtained by solving the 2×2 endpoint system that matches the
//! transformed variable `P` and its slope `R` at `M₀`; `C₁` pins `q(0) = 1`.
//!
//! The minimum `q*` of `q` over a period decides the fate of the flow: the
//! solution stays globally smooth iff `q* > 0`, and `q* < 0` means the first
//! zero of `q` — a gradient blow-up — occurs before one period has elapsed.
//!
//! The degenerate datum `F0 = G0 = 0` keeps the coefficients at the
//! equilibrium, `q` is then a pure harmonic oscillation and is handled in
//! closed form without the `M`-parametrization.

use crate::datum::{DatumError, InitialDatum};
use crate::ode::oracle::{oracle_classify, IntegrationError, OracleOptions};
use crate::ode::{conserved_quantities, envelope};
use crate::verdict::{Method, Verdict, VerdictClass};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Determinants below this are treated as numerically degenerate; the datum
/// is then so close to the equilibrium that the harmonic closed form is
/// accurate to ~1e−7 and takes over.
pub const DEGENERATE_DET: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriterionError {
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error("F0 = G0 = 0 has no M-parametrization; use the harmonic closed form")]
    HarmonicDegenerate,
    #[error("endpoint system is numerically degenerate (det = {det:.3e})")]
    DegenerateSystem { det: f64 },
    #[error("M = {m} lies outside the envelope [{m_minus}, {m_plus}]")]
    OutsideEnvelope { m: f64, m_minus: f64, m_plus: f64 },
    #[error("oracle fallback failed: {0}")]
    Oracle(#[from] IntegrationError),
    #[error("dimension parameter must be positive, got {d}")]
    NonPositiveDimension { d: Rational64 },
}

/// A point where `q(M, σ)` can attain its extremum over one period.
///
/// Interior tangency points carry the branch sign `σ = ±1`; the envelope
/// endpoints are appended with `σ = 0` since `W = 0` makes `q` there
/// branch-independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub sigma: f64,
    #[serde(rename = "M_star")]
    pub m_star: f64,
}

/// Constants of the closed-form representation for one initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConstants {
    #[serde(rename = "M0")]
    pub m0: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    /// `K1 = √M0`, so `K1³ = M0^{3/2}`.
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "M_minus")]
    pub m_minus: f64,
    #[serde(rename = "M_plus")]
    pub m_plus: f64,
    /// Sign of `F0`: −1, 0, or +1.
    pub sigma0: f64,
    /// `P0 = u0`.
    #[serde(rename = "P0")]
    pub p0: f64,
    /// `R0 = F0·u0 − v0`, the initial slope of the transformed variable
    /// (not the reference radius of the datum).
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    /// Determinant of the endpoint system, `2·M0·(4C4² − 1)`.
    pub det: f64,
    /// `C3/√(C2² + C3²)`; undefined when both constants vanish.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub extremum_candidates: Vec<Candidate>,
}

/// `(P0, R0)`: initial value and initial slope of the transformed linear
/// variable `P = p1·(r/r0)³`.
///
/// From `ṗ1(0) = −2F0·u0 − v0` and `Ṗ = (ṗ1 + 3F·p1)(r/r0)³` one gets
/// `R0 = F0·u0 − v0`.
pub fn endpoint_values(datum: &InitialDatum) -> (f64, f64) {
    (datum.u0, datum.f0 * datum.u0 - datum.v0)
}

impl CriterionConstants {
    /// `W(M) = √(4C4·M − 1 − M²)`, equal to `2|F|` on the orbit. Errors when
    /// `M` lies outside the envelope beyond rounding slack.
    pub fn w(&self, m: f64) -> Result<f64, CriterionError> {
        let w2 = 4.0 * self.c4 * m - 1.0 - m * m;
        if w2 < -1e-9 * (1.0 + m * m) {
            return Err(CriterionError::OutsideEnvelope {
                m,
                m_minus: self.m_minus,
                m_plus: self.m_plus,
            });
        }
        Ok(w2.max(0.0).sqrt())
    }

    fn y(&self, m: f64, sigma: f64) -> Result<f64, CriterionError> {
        let w = self.w(m)?;
        Ok((sigma * self.c2 * w - self.c3 * m) / (self.k1 * self.k1 * self.k1))
    }

    /// `Y` at the datum's own point `(M0, σ0)`; re-deriving it through the
    /// same float path keeps the anchor `q(M0, σ0) = 1` exact.
    fn y0(&self) -> f64 {
        self.y(self.m0, self.sigma0).expect("M0 lies on the envelope circle")
    }

    /// The closed forms `(q, P, R)` at envelope coordinate `M` on branch
    /// `σ ∈ {−1, +1}` (`σ = 0` is accepted at the endpoints, where the
    /// branches coincide).
    pub fn closed_forms(&self, m: f64, sigma: f64) -> Result<(f64, f64, f64), CriterionError> {
        debug_assert!(
            sigma == 0.0 || sigma == 1.0 || sigma == -1.0,
            "sigma must be a sign, got {sigma}"
        );
        let w = self.w(m)?;
        let sq = m.sqrt();
        let q = 1.0 + (self.y(m, sigma)? - self.y0());
        let p = -(self.c2 * (2.0 * self.c4 - m) - sigma * self.c3 * w) / sq;
        let r = -(sigma * self.c2 * (2.0 * self.c4 + m) * w + self.c3 * (1.0 - m * m))
            / (2.0 * sq);
        Ok((q, p, r))
    }

    /// `q(M, σ)` alone.
    pub fn q_of(&self, m: f64, sigma: f64) -> Result<f64, CriterionError> {
        Ok(1.0 + (self.y(m, sigma)? - self.y0()))
    }

    pub fn extremum_candidates(&self) -> &[Candidate] {
        &self.extremum_candidates
    }
}

/// Builds the closed-form constants for an admissible, non-harmonic datum.
///
/// `C2, C3` solve the endpoint system `P(M0, σ0) = P0`, `R(M0, σ0) = R0`,
/// which in matrix form (using `σ0·W(M0) = 2F0`) reads
///
/// ```text
/// (2C4 − M0)·C2       − 2F0·C3        = −√M0·P0
/// 2F0(2C4 + M0)·C2    + (1 − M0²)·C3  = −2√M0·R0
/// ```
///
/// with determinant `2M0(4C4² − 1) > 0` away from the equilibrium. `C1` then
/// pins `q(M0, σ0) = 1`.
pub fn criterion_constants(datum: &InitialDatum) -> Result<CriterionConstants, CriterionError> {
    let (p0, r0) = endpoint_values(datum);
    constants_from_endpoints(datum, p0, r0)
}

/// Same solve with caller-supplied endpoint values `(P0, R0)`.
///
/// The verification report uses this to rebuild the constants under
/// alternative endpoint conventions and measure how far each lands from the
/// integrated trajectory; everything downstream of the endpoint values is
/// bit-identical to the standard path.
pub fn constants_from_endpoints(
    datum: &InitialDatum,
    p0: f64,
    r0: f64,
) -> Result<CriterionConstants, CriterionError> {
    if datum.is_harmonic_degenerate() {
        return Err(CriterionError::HarmonicDegenerate);
    }
    let cons = conserved_quantities(datum.f0, datum.g0, 1.0)?;
    let (m0, c4) = (cons.m0, cons.c4);
    let (m_minus, m_plus) = envelope(datum.f0, datum.g0)?;
    let sigma0 = if datum.f0 > 0.0 {
        1.0
    } else if datum.f0 < 0.0 {
        -1.0
    } else {
        0.0
    };

    let sq = m0.sqrt();
    let (a, b) = (2.0 * c4 - m0, -2.0 * datum.f0);
    let (c, d) = (2.0 * datum.f0 * (2.0 * c4 + m0), 1.0 - m0 * m0);
    let det = a * d - b * c;
    if det < DEGENERATE_DET {
        return Err(CriterionError::DegenerateSystem { det });
    }
    let rhs1 = -sq * p0;
    let rhs2 = -2.0 * sq * r0;
    let c2 = (rhs1 * d - b * rhs2) / det;
    let c3 = (a * rhs2 - c * rhs1) / det;

    let lambda = if c2 == 0.0 && c3 == 0.0 { None } else { Some(c3 / c2.hypot(c3)) };

    let mut consts = CriterionConstants {
        m0,
        c4,
        k1: sq,
        m_minus,
        m_plus,
        sigma0,
        p0,
        r0,
        c1: f64::NAN,
        c2,
        c3,
        det,
        lambda,
        extremum_candidates: Vec::new(),
    };
    consts.c1 = 1.0 - consts.y0();

    // Interior tangency points M* = 2C4 ± |λ|√(4C4²−1), each kept on the
    // branch(es) where the unsquared condition C2(2C4−M*) = σ·C3·W(M*)
    // holds. With C2 = 0 the tangencies degenerate onto the endpoints.
    let mut cands = Vec::new();
    if c2 != 0.0 {
        let lam = lambda.expect("c2 nonzero implies lambda defined");
        let rho = (4.0 * c4 * c4 - 1.0).max(0.0).sqrt();
        let pair_tol = 1e-9 * (1.0 + c2.abs() + c3.abs());
        let mut roots = vec![2.0 * c4 - lam.abs() * rho, 2.0 * c4 + lam.abs() * rho];
        roots.dedup();
        for m_star in roots {
            let m_star = m_star.clamp(m_minus, m_plus);
            let w = consts.w(m_star).expect("tangency point lies inside the envelope");
            for sigma in [-1.0, 1.0] {
                if (c2 * (2.0 * c4 - m_star) - sigma * c3 * w).abs() <= pair_tol {
                    cands.push(Candidate { sigma, m_star });
                }
            }
        }
    }
    cands.push(Candidate { sigma: 0.0, m_star: m_minus });
    cands.push(Candidate { sigma: 0.0, m_star: m_plus });
    consts.extremum_candidates = cands;
    Ok(consts)
}

/// `q(t)` of the harmonic degenerate case `F0 = G0 = 0`:
/// `q = (1 − v0) + u0·sin t + v0·cos t`.
pub fn harmonic_q(u0: f64, v0: f64, t: f64) -> f64 {
    (1.0 - v0) + u0 * t.sin() + v0 * t.cos()
}

/// Exact minimum of the harmonic `q` over a period:
/// `q* = 1 − v0 − √(u0² + v0²)`.
pub fn harmonic_q_star(u0: f64, v0: f64) -> f64 {
    1.0 - v0 - u0.hypot(v0)
}

/// Minimum of `q` over one full period, in closed form.
pub fn q_star(datum: &InitialDatum) -> Result<f64, CriterionError> {
    if datum.is_harmonic_degenerate() {
        return Ok(harmonic_q_star(datum.u0, datum.v0));
    }
    let consts = match criterion_constants(datum) {
        // So close to the equilibrium that the endpoint system is unusable;
        // the harmonic formula is then correct to ~1e−7.
        Err(CriterionError::DegenerateSystem { .. }) => {
            return Ok(harmonic_q_star(datum.u0, datum.v0))
        }
        other => other?,
    };
    let mut min_q = f64::INFINITY;
    for cand in &consts.extremum_candidates {
        min_q = min_q.min(consts.q_of(cand.m_star, cand.sigma)?);
    }
    Ok(min_q)
}

/// Closed-form classification. On blow-up the first zero time of `q` is not
/// available algebraically and is taken from the integration oracle.
pub fn classify(datum: &InitialDatum, margin: f64) -> Result<Verdict, CriterionError> {
    let qs = q_star(datum)?;
    let class = VerdictClass::from_q_star(qs, margin);
    let t_star = if class == VerdictClass::BlowUp {
        oracle_classify(datum, &OracleOptions::default())?.t_star
    } else {
        None
    };
    Ok(Verdict { class, q_star: qs, t_star, method: Method::ClosedForm })
}

/// Outcome of one of the corollary criteria: the deciding margin together
/// with the value of the corresponding formula as printed in its source,
/// kept for side-by-side comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryVerdict {
    pub class: VerdictClass,
    /// The margin that decides: smooth iff positive.
    pub margin: f64,
    /// The printed-form margin (sign may disagree with `margin`).
    pub printed_margin: f64,
}

fn class_of_margin(margin: f64) -> VerdictClass {
    if margin > 0.0 {
        VerdictClass::Smooth
    } else if margin < 0.0 {
        VerdictClass::BlowUp
    } else {
        VerdictClass::Marginal
    }
}

/// Criterion on the zero-velocity plane: datum `(0, G0, 0, v0)` with
/// `v0 = divE0 − 4G0`.
///
/// With `u0 = 0` the endpoint system decouples, the extrema sit at the
/// envelope endpoints `{M0, 1/M0}`, and `q* = min(1, 1 − 2v0/M0²)`: the flow
/// stays smooth iff `v0 < M0²/2`. The deciding margin is `M0²/2 − v0`. The
/// printed inequality `divE0 > 6G0 − 1/2` rearranges to `v0 + M0²/2 > 0`,
/// whose sign differs from the resolved one on real data (e.g. `G0 = 0`,
/// `divE0 = 0.6` oscillates to `q = 0.4 + 0.6·cos t`, which vanishes); it is
/// reported, not trusted.
pub fn criterion_zero_velocity(g0: f64, div_e0: f64) -> Result<CorollaryVerdict, CriterionError> {
    if g0 >= 0.25 || g0.is_nan() {
        return Err(CriterionError::Datum(DatumError::FieldTooStrong { g0 }));
    }
    let v0 = div_e0 - 4.0 * g0;
    let m0_sq = 1.0 - 4.0 * g0;
    let margin = 0.5 * m0_sq - v0;
    let printed_margin = v0 + 0.5 * m0_sq;
    Ok(CorollaryVerdict { class: class_of_margin(margin), margin, printed_margin })
}

/// Criterion on the zero-field plane: datum `(F0, 0, u0, 0)` with
/// `u0 = divV0 − 4F0`.
///
/// Here `M0 = 1` and the closed form collapses to `q* = 1 − |u0|` exactly
/// (the circle geometry makes the minimum independent of `F0`), which is the
/// deciding margin. The printed formula
/// `min± [1 − (F0 ± (F0²−1)/√(F0²+1))·u0]` coincides with it at `F0 ∈ {0, ±1}`
/// but strays elsewhere and fails against integration on most of the plane;
/// it is reported for comparison only.
pub fn criterion_zero_field(f0: f64, div_v0: f64) -> CorollaryVerdict {
    let u0 = div_v0 - 4.0 * f0;
    let margin = 1.0 - u0.abs();
    let shift = (f0 * f0 - 1.0) / (f0 * f0 + 1.0).sqrt();
    let printed_margin =
        (1.0 - (f0 + shift) * u0).min(1.0 - (f0 - shift) * u0);
    CorollaryVerdict { class: class_of_margin(margin), margin, printed_margin }
}

/// The one-dimensional criterion: with initial density `n0 > 0`, the solution
/// stays globally smooth iff `(dV0)² + 2·dE0 − n0 < 0` strictly; otherwise it
/// blows up in finite time (equality included).
pub fn criterion_d1(dv0: f64, de0: f64, n0: f64) -> Result<VerdictClass, CriterionError> {
    if n0 <= 0.0 {
        return Err(CriterionError::Datum(DatumError::NonPositiveDensity { n0 }));
    }
    let indicator = dv0 * dv0 + 2.0 * de0 - n0;
    Ok(if indicator < 0.0 { VerdictClass::Smooth } else { VerdictClass::BlowUp })
}

/// Isochronicity test for the oscillator family indexed by the space
/// dimension `d`, with `f(y) = (2+d)·y` and `g(y) = y + d·y³`.
///
/// The obstruction is `τ(y) = [((2+d)/3)² − d]·y⁶`; the center is isochronous
/// iff the bracket vanishes. Returns the coefficient `(2+d)²/9 − d` in exact
/// rational arithmetic together with the isochronicity flag, true exactly for
/// `d ∈ {1, 4}`.
pub fn sabatini_isochronous(d: Rational64) -> Result<(Rational64, bool), CriterionError> {
    if d <= Rational64::from_integer(0) {
        return Err(CriterionError::NonPositiveDimension { d });
    }
    let shifted = d + Rational64::from_integer(2);
    let coeff = shifted * shifted / Rational64::from_integer(9) - d;
    Ok((coeff, coeff == Rational64::from_integer(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn datum(f0: f64, g0: f64, u0: f64, v0: f64) -> InitialDatum {
        InitialDatum::phase_point(f0, g0, u0, v0).unwrap()
    }

    #[test]
    fn endpoint_values_follow_the_resolved_convention() {
        assert_eq!(endpoint_values(&datum(0.0, 0.0, 0.0, -0.3)), (0.0, 0.3));
        assert_eq!(endpoint_values(&datum(0.0, 0.0, 0.5, 0.0)), (0.5, 0.0));
        // Discriminator: F0·u0 − v0 = 1, not the 2F0·u0 − v0 = 2 variant.
        assert_eq!(endpoint_values(&datum(1.0, 0.0, 1.0, 0.0)), (1.0, 1.0));
    }

    #[test]
    fn constants_of_the_decoupled_case() {
        let c = criterion_constants(&datum(0.0, 0.09, 0.0, -0.3)).unwrap();
        assert_eq!(c.c2, 0.0);
        // C3 = −2·v0·√M0/(M0² − 1) with M0 = 0.8.
        let expected = -2.0 * (-0.3) * 0.8_f64.sqrt() / (0.64 - 1.0);
        assert_relative_eq!(c.c3, expected, max_relative = 1e-12);
        assert_relative_eq!(c.c3, -1.4907119849998598, max_relative = 1e-12);
        assert_eq!(c.sigma0, 0.0);
        assert!(c.det > 0.0);
        assert_relative_eq!(c.det, 2.0 * c.m0 * (4.0 * c.c4 * c.c4 - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn trivial_gradient_gives_constant_q() {
        let c = criterion_constants(&datum(0.0, 0.09, 0.0, 0.0)).unwrap();
        assert_eq!((c.c2, c.c3), (0.0, 0.0));
        assert_eq!(c.c1, 1.0);
        assert_eq!(c.lambda, None);
        // Endpoints only, branch-independent.
        assert_eq!(c.extremum_candidates.len(), 2);
        for cand in c.extremum_candidates() {
            assert_eq!(cand.sigma, 0.0);
        }
        for m in [c.m_minus, 0.9, 1.0, 1.1, c.m_plus] {
            for sigma in [-1.0, 1.0] {
                let (q, p, r) = c.closed_forms(m, sigma).unwrap();
                assert_eq!(q, 1.0);
                assert_eq!(p, 0.0);
                assert_eq!(r, 0.0);
            }
        }
    }

    #[test]
    fn harmonic_datum_is_rejected_by_constants() {
        assert_eq!(
            criterion_constants(&datum(0.0, 0.0, 0.1, 0.2)).unwrap_err(),
            CriterionError::HarmonicDegenerate
        );
    }

    #[test]
    fn anchors_hold_at_the_initial_point() {
        for (f0, g0, u0, v0) in
            [(0.0, 0.09, 0.0, -0.3), (0.5, 0.0, 0.3, 0.1), (-0.7, -0.4, 1.2, -0.8)]
        {
            let c = criterion_constants(&datum(f0, g0, u0, v0)).unwrap();
            let (q, p, _) = c.closed_forms(c.m0, c.sigma0).unwrap();
            assert_eq!(q, 1.0, "anchor q(M0) at ({f0},{g0},{u0},{v0})");
            assert_abs_diff_eq!(p, u0, epsilon = 1e-13);
        }
    }

    #[test]
    fn opposite_endpoint_value_fixes_the_sign_convention() {
        // q(1/M0) = 1 − 2v0/M0² = 1.9375 for v0 = −0.3, M0 = 0.8. The
        // opposite sign convention would give 0.0625.
        let c = criterion_constants(&datum(0.0, 0.09, 0.0, -0.3)).unwrap();
        let q = c.q_of(1.25, 0.0).unwrap();
        assert_relative_eq!(q, 1.9375, max_relative = 1e-12);
        assert_relative_eq!(q, 1.0 - 2.0 * (-0.3) / 0.64, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_candidates_are_the_endpoints() {
        let c = criterion_constants(&datum(0.0, 0.09, 0.0, -0.3)).unwrap();
        let ms: Vec<f64> = c.extremum_candidates().iter().map(|cand| cand.m_star).collect();
        assert_eq!(ms.len(), 2);
        assert_abs_diff_eq!(ms[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(ms[1], 1.25, epsilon = 1e-12);
    }

    #[test]
    fn interior_candidates_are_critical_points() {
        let c = criterion_constants(&datum(0.5, 0.0, 0.3, 0.1)).unwrap();
        let interior: Vec<&Candidate> =
            c.extremum_candidates().iter().filter(|cand| cand.sigma != 0.0).collect();
        assert!(!interior.is_empty());
        for cand in interior {
            assert!(cand.m_star >= c.m_minus && cand.m_star <= c.m_plus);
            let (_, p, _) = c.closed_forms(cand.m_star, cand.sigma).unwrap();
            assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn out_of_envelope_is_rejected() {
        let c = criterion_constants(&datum(0.0, 0.09, 0.0, -0.3)).unwrap();
        assert!(matches!(
            c.closed_forms(2.0, 1.0),
            Err(CriterionError::OutsideEnvelope { .. })
        ));
    }

    #[test]
    fn q_star_matches_harmonic_closed_forms() {
        assert_relative_eq!(q_star(&datum(0.0, 0.0, 0.3, 0.4)).unwrap(), 0.1, max_relative = 1e-14);
        assert_relative_eq!(q_star(&datum(0.0, 0.0, 0.0, -0.6)).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(q_star(&datum(0.0, 0.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(harmonic_q_star(0.0, 0.6), -0.2, max_relative = 1e-14);
        assert_abs_diff_eq!(harmonic_q(0.0, 0.6, (-2.0_f64 / 3.0).acos()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn q_star_matches_known_non_harmonic_values() {
        // Zero-velocity discriminator: q* = 1 − 2v0/M0².
        assert_relative_eq!(
            q_star(&datum(0.0, 0.09, 0.0, 0.4)).unwrap(),
            -0.25,
            max_relative = 1e-9
        );
        // Zero-field plane: q* = 1 − |u0| for any F0.
        assert_relative_eq!(q_star(&datum(1.0, 0.0, 1.3, 0.0)).unwrap(), -0.3, max_relative = 1e-9);
        assert_relative_eq!(q_star(&datum(2.0, 0.0, 0.5, 0.0)).unwrap(), 0.5, max_relative = 1e-9);
    }

    #[test]
    fn classify_reports_blow_up_time_from_the_oracle() {
        let v = classify(&datum(0.0, 0.0, 0.0, 0.6), 1e-6).unwrap();
        assert_eq!(v.class, VerdictClass::BlowUp);
        assert_eq!(v.method, Method::ClosedForm);
        assert_abs_diff_eq!(v.t_star.unwrap(), (-2.0_f64 / 3.0).acos(), epsilon = 1e-6);
        assert!(v.t_star.unwrap() > 0.0 && v.t_star.unwrap() < 2.0 * PI);

        let v = classify(&datum(0.0, 0.0, 0.3, 0.4), 1e-6).unwrap();
        assert_eq!(v.class, VerdictClass::Smooth);
        assert_eq!(v.t_star, None);
    }

    #[test]
    fn small_data_classify_smooth() {
        for (f0, g0, u0, v0) in
            [(0.05, 0.05, 0.05, 0.05), (-0.05, -0.05, -0.05, -0.05), (0.05, -0.03, 0.02, 0.04)]
        {
            let v = classify(&datum(f0, g0, u0, v0), 1e-6).unwrap();
            assert_eq!(v.class, VerdictClass::Smooth, "({f0},{g0},{u0},{v0})");
        }
    }

    #[test]
    fn zero_velocity_margins() {
        let c = criterion_zero_velocity(0.0, 0.0).unwrap();
        assert_eq!(c.class, VerdictClass::Smooth);
        assert_eq!((c.margin, c.printed_margin), (0.5, 0.5));

        // Gaussian pulse amplitude 0.2 at r = 1: G0 = 0.2·e^{−1/2},
        // divE0 = 3·G0.
        let g0 = 0.2 * (-0.5_f64).exp();
        let c = criterion_zero_velocity(g0, 3.0 * g0).unwrap();
        assert_eq!(c.class, VerdictClass::Smooth);
        assert!(c.printed_margin > 0.0, "both conventions agree here");
        // 0.5 − G0 since v0 = −G0 at this radius.
        assert_relative_eq!(c.margin, 0.5 - g0, max_relative = 1e-12);

        // The discriminating datum: resolved blow-up, printed smooth.
        let c = criterion_zero_velocity(0.0, 0.6).unwrap();
        assert_eq!(c.class, VerdictClass::BlowUp);
        assert_relative_eq!(c.margin, -0.1, max_relative = 1e-12);
        assert_relative_eq!(c.printed_margin, 1.1, max_relative = 1e-12);

        assert!(criterion_zero_velocity(0.25, 0.0).is_err());
    }

    #[test]
    fn zero_field_margins() {
        let c = criterion_zero_field(0.0, 0.5);
        assert_eq!(c.class, VerdictClass::Smooth);
        assert_relative_eq!(c.margin, 0.5, max_relative = 1e-12);
        assert_relative_eq!(c.printed_margin, 0.5, max_relative = 1e-12);

        let c = criterion_zero_field(0.0, 1.2);
        assert_eq!(c.class, VerdictClass::BlowUp);
        assert_relative_eq!(c.margin, -0.2, max_relative = 1e-12);

        // F0² − 1 = 0 kills the shift term: printed = 1 − F0·u0 = resolved.
        let c = criterion_zero_field(1.0, 4.5);
        assert_eq!(c.class, VerdictClass::Smooth);
        assert_relative_eq!(c.margin, 0.5, max_relative = 1e-12);
        assert_relative_eq!(c.printed_margin, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn d1_criterion_is_strict() {
        assert_eq!(criterion_d1(0.5, 0.3, 1.0).unwrap(), VerdictClass::Smooth);
        assert_eq!(criterion_d1(0.0, 0.0, 1.0).unwrap(), VerdictClass::Smooth);
        assert_eq!(criterion_d1(1.0, 0.0, 1.0).unwrap(), VerdictClass::BlowUp);
        assert!(criterion_d1(0.5, 0.3, 0.0).is_err());
    }

    #[test]
    fn sabatini_coefficient_is_exact() {
        let (c, iso) = sabatini_isochronous(Rational64::from_integer(4)).unwrap();
        assert_eq!(c, Rational64::from_integer(0));
        assert!(iso);
        let (c, iso) = sabatini_isochronous(Rational64::from_integer(1)).unwrap();
        assert_eq!(c, Rational64::from_integer(0));
        assert!(iso);
        let (c, iso) = sabatini_isochronous(Rational64::from_integer(2)).unwrap();
        assert_eq!(c, Rational64::new(-2, 9));
        assert!(!iso);
        for d in 1..=10 {
            let (_, iso) = sabatini_isochronous(Rational64::from_integer(d)).unwrap();
            assert_eq!(iso, d == 1 || d == 4, "d = {d}");
        }
        assert!(sabatini_isochronous(Rational64::from_integer(0)).is_err());
    }
}
