//! Radial initial-data layer: turns profile specifications `V0(r)`, `E0(r)`
//! into per-characteristic initial data.
//!
//! Everything classification needs at a radius `r0` is the scaled quadruple
//! `F0 = V0/r`, `G0 = E0/r`, `u0 = r·F0′`, `v0 = r·G0′` (equivalently
//! `u0 = divV0 − 4F0`, `v0 = divE0 − 4G0`, using
//! `div(F(r)·r) = 4F + r·F′` in four space dimensions). At the origin the
//! scaled fields take their `r → 0` limits `V0′(0)`, `E0′(0)` and both
//! gradient variables vanish.

use crate::datum::{DatumError, InitialDatum};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("pulse amplitude must satisfy 0 < a < 1/4, got {a}")]
    InvalidAmplitude { a: f64 },
    #[error("critical-background coefficient must be positive, got {c}")]
    NonPositiveCoefficient { c: f64 },
    #[error("radius {r0} is outside the profile domain [0, {r_max}]")]
    OutsideDomain { r0: f64, r_max: f64 },
    #[error("radius {r0} is not a sample node of the tabulated profile")]
    NotASampleNode { r0: f64 },
    #[error("tabulated profile needs at least 3 samples, got {n}")]
    TooFewSamples { n: usize },
    #[error("profile value {what} is not finite at r = {r0}")]
    NonFinite { what: &'static str, r0: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("grid must be strictly increasing and nonnegative")]
    InvalidGrid,
    #[error("uniform grid step {step} does not tile [{lo}, {hi}]")]
    StepDoesNotTile { lo: f64, hi: f64, step: f64 },
    #[error(transparent)]
    Datum(#[from] DatumError),
}

/// Sampled radial profile: rows `(r, V0, E0)` with strictly increasing
/// nonnegative `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    pub samples: Vec<(f64, f64, f64)>,
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial initial-data specification.
#[derive(Clone)]
pub enum ProfileSpec {
    /// `V0 ≡ 0`, `E0 = r·G0(r)` with `G0(r) = a·e^{−r²/2}`; admissible for
    /// every radius exactly when `0 < a < 1/4`.
    GaussianPulse { a: f64 },
    /// Scaled fields and their radial derivatives supplied analytically.
    AnalyticPair { f0: RadialFn, df0: RadialFn, g0: RadialFn, dg0: RadialFn },
    /// Finite sample table; data are produced at the sample nodes via
    /// finite differences.
    Tabulated(TabulatedProfile),
}

impl fmt::Debug for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::GaussianPulse { a } => write!(f, "GaussianPulse {{ a: {a} }}"),
            ProfileSpec::AnalyticPair { .. } => write!(f, "AnalyticPair {{ .. }}"),
            ProfileSpec::Tabulated(t) => {
                write!(f, "Tabulated {{ {} samples }}", t.samples.len())
            }
        }
    }
}

impl ProfileSpec {
    pub fn gaussian(a: f64) -> Result<Self, ProfileError> {
        if !(a > 0.0 && a < 0.25) {
            return Err(ProfileError::InvalidAmplitude { a });
        }
        Ok(ProfileSpec::GaussianPulse { a })
    }

    pub fn analytic_pair(
        f0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ProfileSpec::AnalyticPair {
            f0: Arc::new(f0),
            df0: Arc::new(df0),
            g0: Arc::new(g0),
            dg0: Arc::new(dg0),
        }
    }

    pub fn tabulated(samples: Vec<(f64, f64, f64)>) -> Result<Self, ProfileError> {
        TabulatedProfile::new(samples).map(ProfileSpec::Tabulated)
    }
}

impl TabulatedProfile {
    pub fn new(samples: Vec<(f64, f64, f64)>) -> Result<Self, ProfileError> {
        if samples.len() < 3 {
            return Err(ProfileError::TooFewSamples { n: samples.len() });
        }
        let mut prev = -1.0;
        for &(r, v, e) in &samples {
            if !r.is_finite() || !v.is_finite() || !e.is_finite() {
                return Err(ProfileError::NonFinite { what: "table entry", r0: r });
            }
            if r < 0.0 || r <= prev {
                return Err(ProfileError::InvalidGrid);
            }
            prev = r;
        }
        Ok(Self { samples })
    }

    /// Parses `r,V0,E0` CSV (header required).
    pub fn parse_csv(text: &str) -> Result<Self, ProfileError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "r,V0,E0" => {}
            Some((_, h)) => {
                return Err(ProfileError::Parse {
                    line: 1,
                    message: format!("expected header 'r,V0,E0', got '{}'", h.trim()),
                })
            }
            None => return Err(ProfileError::Parse { line: 1, message: "empty file".into() }),
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(ProfileError::Parse {
                    line: idx + 1,
                    message: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut row = [0.0_f64; 3];
            for (k, field) in fields.iter().enumerate() {
                row[k] = field.trim().parse().map_err(|e| ProfileError::Parse {
                    line: idx + 1,
                    message: format!("field {}: {e}", k + 1),
                })?;
            }
            samples.push((row[0], row[1], row[2]));
        }
        Self::new(samples)
    }

    fn node_index(&self, r0: f64) -> Result<usize, ProfileError> {
        let tol = 1e-9 * r0.abs().max(1.0);
        self.samples
            .iter()
            .position(|&(r, _, _)| (r - r0).abs() <= tol)
            .ok_or(ProfileError::NotASampleNode { r0 })
    }

    /// Scaled-field samples `F0 = V0/r`, `G0 = E0/r`, with the origin value
    /// replaced by the one-sided derivative limit.
    fn scaled_samples(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let rs: Vec<f64> = self.samples.iter().map(|s| s.0).collect();
        let mut fs = Vec::with_capacity(rs.len());
        let mut gs = Vec::with_capacity(rs.len());
        for (i, &(r, v, e)) in self.samples.iter().enumerate() {
            if r == 0.0 {
                let vs: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
                let es: Vec<f64> = self.samples.iter().map(|s| s.2).collect();
                fs.push(derivative_at(&rs, &vs, i));
                gs.push(derivative_at(&rs, &es, i));
            } else {
                fs.push(v / r);
                gs.push(e / r);
            }
        }
        (rs, fs, gs)
    }
}

/// Finite-difference weights on arbitrary nodes: coefficients `w_j` with
/// `f^(m)(x0) ≈ Σ w_j f(nodes_j)`. Standard Fornberg recursion; exact for
/// polynomials of degree `< nodes.len()`.
pub fn fd_weights(nodes: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > m, "need more than {m} nodes for the {m}-th derivative");
    let mut c = vec![vec![0.0_f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// First derivative of sampled values at node `i`, using the five nearest
/// nodes (fourth order) when available, otherwise three (second order).
fn derivative_at(rs: &[f64], values: &[f64], i: usize) -> f64 {
    let n = rs.len();
    let width = if n >= 5 { 5 } else { 3 };
    let lo = i.saturating_sub(width / 2).min(n - width);
    let w = fd_weights(&rs[lo..lo + width], rs[i], 1);
    w.iter().zip(&values[lo..lo + width]).map(|(wi, vi)| wi * vi).sum()
}

/// Evaluates the scaled fields and gradient variables of a profile at `r0`
/// and assembles the admissible initial datum.
pub fn datum_at(profile: &ProfileSpec, r0: f64) -> Result<InitialDatum, ProfileError> {
    let (f0, g0, u0, v0) = scaled_values_at(profile, r0)?;
    for (what, x) in [("F0", f0), ("G0", g0), ("u0", u0), ("v0", v0)] {
        if !x.is_finite() {
            return Err(ProfileError::NonFinite { what, r0 });
        }
    }
    Ok(InitialDatum::with_r0(r0, f0, g0, u0, v0)?)
}

fn scaled_values_at(profile: &ProfileSpec, r0: f64) -> Result<(f64, f64, f64, f64), ProfileError> {
    if r0 < 0.0 {
        return Err(ProfileError::OutsideDomain { r0, r_max: f64::INFINITY });
    }
    match profile {
        ProfileSpec::GaussianPulse { a } => {
            let g0 = a * (-0.5 * r0 * r0).exp();
            Ok((0.0, g0, 0.0, -r0 * r0 * g0))
        }
        ProfileSpec::AnalyticPair { f0, df0, g0, dg0 } => {
            Ok((f0(r0), g0(r0), r0 * df0(r0), r0 * dg0(r0)))
        }
        ProfileSpec::Tabulated(table) => {
            let r_max = table.samples.last().expect("validated nonempty").0;
            if r0 > r_max {
                return Err(ProfileError::OutsideDomain { r0, r_max });
            }
            let i = table.node_index(r0)?;
            let (rs, fs, gs) = table.scaled_samples();
            let u0 = rs[i] * derivative_at(&rs, &fs, i);
            let v0 = rs[i] * derivative_at(&rs, &gs, i);
            Ok((fs[i], gs[i], u0, v0))
        }
    }
}

/// Ordered radii at which a profile is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
}

impl RadialGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, ProfileError> {
        if points.is_empty() {
            return Err(ProfileError::InvalidGrid);
        }
        let mut prev = -1.0;
        for &p in &points {
            if !p.is_finite() || p < 0.0 || p <= prev {
                return Err(ProfileError::InvalidGrid);
            }
            prev = p;
        }
        Ok(Self { points })
    }

    /// Uniform grid `lo, lo+step, …, hi`; the step must tile the interval
    /// (endpoints are hit exactly by construction).
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Result<Self, ProfileError> {
        if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi > lo) {
            return Err(ProfileError::StepDoesNotTile { lo, hi, step });
        }
        let n = ((hi - lo) / step).round();
        if n < 1.0 || ((lo + n * step) - hi).abs() > 1e-6 * step {
            return Err(ProfileError::StepDoesNotTile { lo, hi, step });
        }
        let n = n as usize;
        let points = (0..=n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n {
                    hi
                } else {
                    lo + (hi - lo) * (i as f64 / n as f64)
                }
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One admissibility violation found by [`validate_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileViolation {
    pub r0: f64,
    pub message: String,
}

/// Result of checking a profile over a grid: the scaled field must stay
/// below 1/4 and the initial density must stay positive at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checked: usize,
    pub first_violation: Option<ProfileViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.first_violation.is_none()
    }
}

pub fn validate_profile(profile: &ProfileSpec, grid: &RadialGrid) -> ValidationReport {
    for (k, &r0) in grid.points().iter().enumerate() {
        match datum_at(profile, r0) {
            Ok(_) => {}
            Err(err) => {
                return ValidationReport {
                    checked: k + 1,
                    first_violation: Some(ProfileViolation { r0, message: err.to_string() }),
                }
            }
        }
    }
    ValidationReport { checked: grid.len(), first_violation: None }
}

/// The critical background field `G0*(r) = 1/4 − C·r²`, the threshold shape
/// satisfying `r·dG0*/dr = 2·G0* − 1/2` identically.
pub fn critical_background(c: f64, r: f64) -> Result<f64, ProfileError> {
    if c <= 0.0 || c.is_nan() {
        return Err(ProfileError::NonPositiveCoefficient { c });
    }
    Ok(0.25 - c * r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gaussian_datum_matches_hand_arithmetic() {
        let p = ProfileSpec::gaussian(0.2).unwrap();
        let d = datum_at(&p, 1.0).unwrap();
        let g = 0.2 * (-0.5_f64).exp();
        assert_eq!(d.f0, 0.0);
        assert_eq!(d.u0, 0.0);
        assert_relative_eq!(d.g0, g, max_relative = 1e-15);
        assert_relative_eq!(d.v0, -g, max_relative = 1e-15);
        assert_abs_diff_eq!(d.g0, 0.121306, epsilon = 1e-6);
        assert_abs_diff_eq!(d.initial_density(), 0.636081, epsilon = 1e-6);
    }

    #[test]
    fn origin_limits_kill_the_gradient_variables() {
        let p = ProfileSpec::gaussian(0.2).unwrap();
        let d = datum_at(&p, 0.0).unwrap();
        assert_eq!((d.u0, d.v0), (0.0, 0.0));
        assert_eq!(d.g0, 0.2);

        let q = ProfileSpec::analytic_pair(|_| 0.3, |_| 0.0, |r| 0.1 * r, |_| 0.1);
        let d = datum_at(&q, 0.0).unwrap();
        assert_eq!((d.u0, d.v0), (0.0, 0.0));
    }

    #[test]
    fn linear_velocity_profile_has_constant_f0() {
        // V0 = c·r means F0 = c everywhere and u0 = r·F0′ = 0.
        let c = 0.37;
        let p = ProfileSpec::analytic_pair(move |_| c, |_| 0.0, |_| 0.0, |_| 0.0);
        for r0 in [0.0, 0.5, 2.0] {
            let d = datum_at(&p, r0).unwrap();
            assert_eq!(d.f0, c);
            assert_eq!(d.u0, 0.0);
        }
    }

    #[test]
    fn amplitude_bounds_are_enforced() {
        assert!(ProfileSpec::gaussian(0.2).is_ok());
        assert!(matches!(
            ProfileSpec::gaussian(0.3),
            Err(ProfileError::InvalidAmplitude { .. })
        ));
        assert!(ProfileSpec::gaussian(0.25).is_err());
        assert!(ProfileSpec::gaussian(0.0).is_err());
        assert!(ProfileSpec::gaussian(-0.1).is_err());
    }

    #[test]
    fn fornberg_weights_recover_textbook_stencils() {
        // Five-point centered first derivative, unit spacing.
        let w = fd_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 0.0, 1);
        let expected = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        // Three-point one-sided first derivative.
        let w = fd_weights(&[0.0, 1.0, 2.0], 0.0, 1);
        let expected = [-1.5, 2.0, -0.5];
        for (a, b) in w.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn fornberg_weights_are_exact_on_polynomials() {
        let nodes = [0.1, 0.3, 0.35, 0.8, 1.4];
        let x0 = 0.35;
        let w = fd_weights(&nodes, x0, 1);
        // p(x) = 2x⁴ − x³ + 3x − 5, p′(x) = 8x³ − 3x² + 3.
        let p = |x: f64| 2.0 * x.powi(4) - x.powi(3) + 3.0 * x - 5.0;
        let dp = 8.0 * x0.powi(3) - 3.0 * x0 * x0 + 3.0;
        let approx_dp: f64 = nodes.iter().zip(&w).map(|(&x, &wi)| wi * p(x)).sum();
        assert_relative_eq!(approx_dp, dp, max_relative = 1e-11);
    }

    #[test]
    fn tabulated_gaussian_converges_at_fourth_order() {
        let table_of = |h: f64| {
            let n = (3.0 / h).round() as usize;
            let samples: Vec<(f64, f64, f64)> = (0..=n)
                .map(|i| {
                    let r = 3.0 * i as f64 / n as f64;
                    let g = 0.2 * (-0.5 * r * r).exp();
                    (r, 0.0, r * g)
                })
                .collect();
            ProfileSpec::tabulated(samples).unwrap()
        };
        let exact_v0 = |r: f64| -0.2 * r * r * (-0.5 * r * r).exp();

        let err_of = |h: f64| {
            let p = table_of(h);
            let d = datum_at(&p, 1.5).unwrap();
            (d.v0 - exact_v0(1.5)).abs()
        };
        let (e1, e2) = (err_of(0.1), err_of(0.05));
        assert!(e1 < 1e-5, "coarse error {e1:.3e}");
        // Fourth-order scheme: halving the step should gain ~16×.
        assert!(e2 < e1 / 8.0, "refinement {e1:.3e} -> {e2:.3e}");
    }

    #[test]
    fn gradient_routes_agree_on_tabulated_data() {
        // u0 = r·F0′ must match divV0 − 4F0 = (V0′ + 3V0/r) − 4F0 within
        // the difference-scheme error.
        let n = 60;
        let samples: Vec<(f64, f64, f64)> = (0..=n)
            .map(|i| {
                let r = 3.0 * i as f64 / n as f64;
                let v = 0.3 * r * (-0.4 * r * r).exp();
                (r, v, 0.0)
            })
            .collect();
        let rs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let vs: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let p = ProfileSpec::tabulated(samples).unwrap();

        let i = 30;
        let d = datum_at(&p, rs[i]).unwrap();
        let dv0 = derivative_at(&rs, &vs, i);
        let div_v0 = dv0 + 3.0 * vs[i] / rs[i];
        // The two difference routes differentiate different functions
        // (V/r vs V), so their fourth-order truncation errors differ by
        // O(h^4) at h = 0.05.
        assert_abs_diff_eq!(d.u0, div_v0 - 4.0 * d.f0, epsilon = 5e-6);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let table = TabulatedProfile::parse_csv("r,V0,E0\n0,0,0\n0.5,0.1,0.05\n1,0.15,0.08\n")
            .unwrap();
        assert_eq!(table.samples.len(), 3);

        let err = TabulatedProfile::parse_csv("r,V0\n0,0\n").unwrap_err();
        assert!(matches!(err, ProfileError::Parse { line: 1, .. }));
        let err = TabulatedProfile::parse_csv("r,V0,E0\n0,0,zero\n").unwrap_err();
        assert!(matches!(err, ProfileError::Parse { line: 2, .. }));
        let err = TabulatedProfile::parse_csv("r,V0,E0\n1,0,0\n0.5,0,0\n2,0,0\n").unwrap_err();
        assert_eq!(err, ProfileError::InvalidGrid);
    }

    #[test]
    fn validation_reports_first_violation() {
        let p = ProfileSpec::gaussian(0.2).unwrap();
        let grid = RadialGrid::uniform(0.0, 6.0, 0.05).unwrap();
        assert_eq!(grid.len(), 121);
        assert_eq!(*grid.points().last().unwrap(), 6.0);
        assert!(validate_profile(&p, &grid).is_valid());

        // For G0 = 0.1r the density n0 = 1 − (v0 + 4G0) = 1 − 0.5r reaches
        // zero at r = 2 — before the field bound G0 < 1/4 fails at r = 2.5.
        let strong = ProfileSpec::analytic_pair(|_| 0.0, |_| 0.0, |r| 0.1 * r, |_| 0.1);
        let grid = RadialGrid::uniform(0.0, 6.0, 0.5).unwrap();
        let report = validate_profile(&strong, &grid);
        assert!(!report.is_valid());
        let v = report.first_violation.unwrap();
        assert_eq!(v.r0, 2.0);
        assert!(v.message.contains("density"), "message: {}", v.message);
    }

    #[test]
    fn critical_background_satisfies_its_equation() {
        assert_eq!(critical_background(0.01, 2.0).unwrap(), 0.21);
        assert_eq!(critical_background(0.7, 0.0).unwrap(), 0.25);
        assert!(critical_background(0.0, 1.0).is_err());
        assert!(critical_background(-1.0, 1.0).is_err());
        // r·(G0*)′ − 2·G0* + 1/2 ≡ 0.
        for (c, r) in [(0.01, 2.0), (0.3, 0.5), (1.7, 3.0)] {
            let dg = -2.0 * c * r; // d/dr of 1/4 − C·r²
            let g = critical_background(c, r).unwrap();
            assert_abs_diff_eq!(r * dg - 2.0 * g + 0.5, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_grid_rejects_non_tiling_steps() {
        assert!(RadialGrid::uniform(0.0, 1.0, 0.3).is_err());
        assert!(RadialGrid::uniform(0.0, 1.0, -0.1).is_err());
        assert!(RadialGrid::uniform(1.0, 1.0, 0.1).is_err());
        let g = RadialGrid::uniform(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
