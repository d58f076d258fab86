//! Parameter sweeps: radial scans over a profile (worst characteristic) and
//! 2D phase-plane scans with straight-line frontier fitting.
//!
//! Cells are classified independently and in parallel; results are assembled
//! in row-major index order so output bytes never depend on the worker count.

use crate::blowup::{self, CriterionError};
use crate::datum::{DatumError, InitialDatum};
use crate::fmt::g17;
use crate::ode::oracle::{oracle_classify, IntegrationError, OracleOptions};
use crate::profiles::{datum_at, validate_profile, ProfileError, ProfileSpec, RadialGrid};
use crate::verdict::{Verdict, VerdictClass, DEFAULT_MARGIN};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("invalid scan request: {reason}")]
    InvalidRequest { reason: String },
    #[error("frontier fit needs both Smooth and BlowUp cells")]
    SingleClass,
    #[error("profile invalid at r0 = {r0}: {message}")]
    InvalidProfile { r0: f64, message: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Oracle(#[from] IntegrationError),
}

/// Which 2D slice of initial data a plane scan covers.
///
/// * `ZeroVelocity`: axes `(G0, div E0)`, pointwise datum `F0 = u0 = 0`,
///   `v0 = divE0 − 4·G0`.
/// * `ZeroField`: axes `(F0, div V0)`, pointwise datum `G0 = v0 = 0`,
///   `u0 = divV0 − 4·F0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneKind {
    ZeroVelocity,
    ZeroField,
}

impl PlaneKind {
    pub fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            PlaneKind::ZeroVelocity => ("G0", "divE0"),
            PlaneKind::ZeroField => ("F0", "divV0"),
        }
    }

    /// Pointwise datum for plane coordinates `(x, y)`.
    pub fn datum(self, x: f64, y: f64) -> Result<InitialDatum, DatumError> {
        match self {
            PlaneKind::ZeroVelocity => InitialDatum::phase_point(0.0, x, 0.0, y - 4.0 * x),
            PlaneKind::ZeroField => InitialDatum::phase_point(x, 0.0, y - 4.0 * x, 0.0),
        }
    }
}

impl std::fmt::Display for PlaneKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlaneKind::ZeroVelocity => write!(f, "zero-velocity"),
            PlaneKind::ZeroField => write!(f, "zero-field"),
        }
    }
}

/// How cells are classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    /// Closed-form minimum of the transformed solution; `t_star` left empty.
    Closed,
    /// Direct integration of the linearized system.
    Oracle,
    /// Both, with the oracle values recorded and disagreements counted.
    Both,
}

impl std::fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanMethod::Closed => write!(f, "closed"),
            ScanMethod::Oracle => write!(f, "oracle"),
            ScanMethod::Both => write!(f, "both"),
        }
    }
}

/// Inclusive axis discretization: `n` points `lo + i·(hi−lo)/(n−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self, ScanError> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(ScanError::InvalidRequest {
                reason: format!("axis bounds [{lo}, {hi}] must be finite and ordered"),
            });
        }
        if n < 2 {
            return Err(ScanError::InvalidRequest {
                reason: format!("resolution {n} must be at least 2"),
            });
        }
        Ok(Self { lo, hi, n })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * (i as f64 / (self.n - 1) as f64)
    }

    /// Physical extent of one cell.
    pub fn cell_size(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }
}

/// A validated plane-scan request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRequest {
    pub plane: PlaneKind,
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub method: ScanMethod,
}

impl ScanRequest {
    pub fn new(
        plane: PlaneKind,
        x: AxisSpec,
        y: AxisSpec,
        method: ScanMethod,
    ) -> Result<Self, ScanError> {
        if plane == PlaneKind::ZeroVelocity && x.hi >= 0.25 {
            return Err(ScanError::InvalidRequest {
                reason: format!("zero-velocity G0 upper bound {} must be < 1/4", x.hi),
            });
        }
        Ok(Self { plane, x, y, method })
    }

    /// Square request with the same resolution on both axes.
    pub fn square(
        plane: PlaneKind,
        x_bounds: (f64, f64),
        y_bounds: (f64, f64),
        resolution: usize,
        method: ScanMethod,
    ) -> Result<Self, ScanError> {
        Self::new(
            plane,
            AxisSpec::new(x_bounds.0, x_bounds.1, resolution)?,
            AxisSpec::new(y_bounds.0, y_bounds.1, resolution)?,
            method,
        )
    }
}

/// One classified grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub x: f64,
    pub y: f64,
    pub q_star: f64,
    pub class: VerdictClass,
    pub t_star: Option<f64>,
    /// Method `both` only: the two classifications differ.
    pub disagree: bool,
}

/// Plane-scan output: row-major cells (`y` outer, `x` inner) plus counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub request: ScanRequest,
    pub cells: Vec<ScanCell>,
    pub n_smooth: usize,
    pub n_blow_up: usize,
    pub n_marginal: usize,
    pub disagreements: usize,
}

impl ScanResult {
    /// Cell with the smallest `q_star`.
    pub fn worst_cell(&self) -> &ScanCell {
        self.cells
            .iter()
            .min_by(|a, b| a.q_star.total_cmp(&b.q_star))
            .expect("scan grids are nonempty")
    }

    /// CSV rows in deterministic row-major order with per-plane axis names.
    pub fn to_csv(&self) -> String {
        let (xn, yn) = self.request.plane.axis_names();
        let mut out = format!("{xn},{yn},q_star,verdict,t_star\n");
        for c in &self.cells {
            let t = c.t_star.map(g17).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{t}\n",
                g17(c.x),
                g17(c.y),
                g17(c.q_star),
                c.class
            ));
        }
        out
    }

    /// Summary JSON: counts, worst point, disagreements, frontier fit
    /// (null when the scan contains a single class).
    pub fn summary_json(&self) -> serde_json::Value {
        let worst = self.worst_cell();
        let frontier = fit_frontier(self).ok().map(|f| {
            json!({
                "slope": f.slope,
                "intercept": f.intercept,
                "max_residual_cells": f.max_residual_cells,
                "boundary_points": f.n_boundary,
            })
        });
        json!({
            "plane": self.request.plane,
            "method": self.request.method,
            "nx": self.request.x.n,
            "ny": self.request.y.n,
            "counts": {
                "smooth": self.n_smooth,
                "blow-up": self.n_blow_up,
                "marginal": self.n_marginal,
            },
            "disagreements": self.disagreements,
            "worst": { "x": worst.x, "y": worst.y, "q_star": worst.q_star },
            "frontier": frontier,
        })
    }
}

fn classify_cell(plane: PlaneKind, method: ScanMethod, x: f64, y: f64) -> Result<ScanCell, ScanError> {
    let datum = plane.datum(x, y)?;
    let closed = match method {
        ScanMethod::Closed | ScanMethod::Both => Some(blowup::q_star(&datum)?),
        ScanMethod::Oracle => None,
    };
    let oracle = match method {
        ScanMethod::Oracle | ScanMethod::Both => {
            Some(oracle_classify(&datum, &OracleOptions::default())?)
        }
        ScanMethod::Closed => None,
    };
    let (q_star, class, t_star) = match (&oracle, closed) {
        (Some(v), _) => (v.q_star, v.class, v.t_star),
        (None, Some(q)) => (q, VerdictClass::from_q_star(q, DEFAULT_MARGIN), None),
        (None, None) => unreachable!("method covers at least one classifier"),
    };
    let disagree = match (&oracle, closed) {
        (Some(v), Some(q)) => v.class != VerdictClass::from_q_star(q, DEFAULT_MARGIN),
        _ => false,
    };
    Ok(ScanCell { x, y, q_star, class, t_star, disagree })
}

/// Classifies every cell of the requested plane. Internally parallel over
/// cells; the result ordering (and hence CSV bytes) is independent of the
/// worker count.
pub fn scan_plane(request: &ScanRequest) -> Result<ScanResult, ScanError> {
    let (nx, ny) = (request.x.n, request.y.n);
    let cells: Vec<ScanCell> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / nx, k % nx);
            classify_cell(request.plane, request.method, request.x.point(i), request.y.point(j))
        })
        .collect::<Result<_, _>>()?;
    let mut result = ScanResult {
        request: request.clone(),
        cells,
        n_smooth: 0,
        n_blow_up: 0,
        n_marginal: 0,
        disagreements: 0,
    };
    for c in &result.cells {
        match c.class {
            VerdictClass::Smooth => result.n_smooth += 1,
            VerdictClass::BlowUp => result.n_blow_up += 1,
            VerdictClass::Marginal => result.n_marginal += 1,
        }
        result.disagreements += c.disagree as usize;
    }
    Ok(result)
}

/// Verdict for one characteristic of a radial scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialVerdict {
    pub r0: f64,
    pub q_star: f64,
    pub class: VerdictClass,
    pub t_star: Option<f64>,
    pub disagree: bool,
}

/// Radial-scan output over a grid of root radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialScanResult {
    pub points: Vec<RadialVerdict>,
    /// Smooth iff every radius is Smooth; BlowUp if any radius blows up;
    /// Marginal otherwise.
    pub global: VerdictClass,
    /// Radius minimizing `q_star`.
    pub worst_r0: f64,
    /// Earliest blow-up time over all blow-up radii, if any.
    pub min_t_star: Option<f64>,
    pub disagreements: usize,
}

impl RadialScanResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r0,q_star,verdict,t_star\n");
        for p in &self.points {
            let t = p.t_star.map(g17).unwrap_or_default();
            out.push_str(&format!("{},{},{},{t}\n", g17(p.r0), g17(p.q_star), p.class));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "points": self.points.len(),
            "global": self.global,
            "worst_r0": self.worst_r0,
            "min_t_star": self.min_t_star,
            "disagreements": self.disagreements,
        })
    }
}

/// Classifies the characteristic rooted at every grid radius and aggregates
/// the global verdict. The profile must be admissible on the whole grid.
pub fn scan_radial(
    profile: &ProfileSpec,
    grid: &RadialGrid,
    method: ScanMethod,
) -> Result<RadialScanResult, ScanError> {
    let report = validate_profile(profile, grid);
    if let Some(v) = report.first_violation {
        return Err(ScanError::InvalidProfile { r0: v.r0, message: v.message });
    }
    let points: Vec<RadialVerdict> = grid
        .points()
        .par_iter()
        .map(|&r0| -> Result<RadialVerdict, ScanError> {
            let datum = datum_at(profile, r0)?;
            let (closed, oracle): (Option<Verdict>, Option<Verdict>) = match method {
                ScanMethod::Closed => (Some(blowup::classify(&datum, DEFAULT_MARGIN)?), None),
                ScanMethod::Oracle => {
                    (None, Some(oracle_classify(&datum, &OracleOptions::default())?))
                }
                ScanMethod::Both => (
                    Some(blowup::classify(&datum, DEFAULT_MARGIN)?),
                    Some(oracle_classify(&datum, &OracleOptions::default())?),
                ),
            };
            let primary = oracle.as_ref().or(closed.as_ref()).expect("one classifier ran");
            let disagree = match (&closed, &oracle) {
                (Some(a), Some(b)) => a.class != b.class,
                _ => false,
            };
            Ok(RadialVerdict {
                r0,
                q_star: primary.q_star,
                class: primary.class,
                t_star: primary.t_star,
                disagree,
            })
        })
        .collect::<Result<_, _>>()?;

    let global = if points.iter().any(|p| p.class == VerdictClass::BlowUp) {
        VerdictClass::BlowUp
    } else if points.iter().any(|p| p.class == VerdictClass::Marginal) {
        VerdictClass::Marginal
    } else {
        VerdictClass::Smooth
    };
    let worst = points
        .iter()
        .min_by(|a, b| a.q_star.total_cmp(&b.q_star))
        .expect("grids are nonempty");
    let min_t_star = points
        .iter()
        .filter(|p| p.class == VerdictClass::BlowUp)
        .filter_map(|p| p.t_star)
        .min_by(f64::total_cmp);
    Ok(RadialScanResult {
        worst_r0: worst.r0,
        global,
        min_t_star,
        disagreements: points.iter().filter(|p| p.disagree).count(),
        points,
    })
}

/// Straight line fitted to the Smooth/BlowUp boundary of a plane scan.
///
/// Boundary points are midpoints between adjacent cells of opposite class,
/// fitted by total least squares in cell-index coordinates (so the residual
/// is isotropic in cells); slope and intercept are reported in physical
/// axis units as `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual_cells: f64,
    pub n_boundary: usize,
}

pub fn fit_frontier(result: &ScanResult) -> Result<FrontierFit, ScanError> {
    let (nx, ny) = (result.request.x.n, result.request.y.n);
    let class = |i: usize, j: usize| result.cells[j * nx + i].class;
    let opposite = |a: VerdictClass, b: VerdictClass| {
        (a == VerdictClass::Smooth && b == VerdictClass::BlowUp)
            || (a == VerdictClass::BlowUp && b == VerdictClass::Smooth)
    };

    // Midpoints between class-changing neighbors, in cell-index coordinates.
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx && opposite(class(i, j), class(i + 1, j)) {
                pts.push((i as f64 + 0.5, j as f64));
            }
            if j + 1 < ny && opposite(class(i, j), class(i, j + 1)) {
                pts.push((i as f64, j as f64 + 0.5));
            }
        }
    }
    if pts.is_empty() {
        return Err(ScanError::SingleClass);
    }

    // Total least squares: principal direction of the centered point cloud.
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.0, sy + p.1));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Largest eigenvector of [[sxx, sxy], [sxy, syy]].
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (dir_x, dir_y) = (theta.cos(), theta.sin());
    let max_residual_cells = pts
        .iter()
        .map(|&(x, y)| ((x - mx) * dir_y - (y - my) * dir_x).abs())
        .fold(0.0, f64::max);

    // Map the line to physical coordinates.
    let (hx, hy) = (result.request.x.cell_size(), result.request.y.cell_size());
    let (px, py) = (
        result.request.x.lo + mx * hx,
        result.request.y.lo + my * hy,
    );
    let (vx, vy) = (dir_x * hx, dir_y * hy);
    let slope = vy / vx;
    let intercept = py - slope * px;
    Ok(FrontierFit { slope, intercept, max_residual_cells, n_boundary: pts.len() })
}

/// A candidate straight line `y = slope·x + intercept` for a fitted frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCandidate {
    pub name: &'static str,
    pub slope: f64,
    pub intercept: f64,
}

/// Mean absolute vertical deviation between the fitted line and a candidate
/// over the scanned x-range.
pub fn candidate_deviation(fit: &FrontierFit, cand: &LineCandidate, x: &AxisSpec) -> f64 {
    let ds = fit.slope - cand.slope;
    let db = fit.intercept - cand.intercept;
    // Mean of |ds·x + db| over [lo, hi], sampled on the axis grid.
    let n = x.n;
    (0..n).map(|i| (ds * x.point(i) + db).abs()).sum::<f64>() / n as f64
}

/// Picks the candidate line closest to the fitted frontier.
pub fn select_candidate<'a>(
    fit: &FrontierFit,
    candidates: &'a [LineCandidate],
    x: &AxisSpec,
) -> (&'a LineCandidate, Vec<f64>) {
    assert!(!candidates.is_empty());
    let devs: Vec<f64> = candidates.iter().map(|c| candidate_deviation(fit, c, x)).collect();
    let best = devs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty");
    (&candidates[best], devs)
}
