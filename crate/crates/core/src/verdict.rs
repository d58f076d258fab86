//! Classification outcomes.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Default half-width of the band around `q* = 0` inside which a
/// floating-point classification is reported as [`VerdictClass::Marginal`]
/// rather than forced to a side.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Smoothness class of one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictClass {
    /// The projective denominator `q` stays positive: the solution remains
    /// globally C¹-smooth along this characteristic.
    Smooth,
    /// `q` vanishes before one period ends: the gradients `(u, v)` leave every
    /// bounded set in finite time.
    BlowUp,
    /// `|q*|` is within the margin tolerance; the sign of `q*` is not
    /// trustworthy at working precision.
    Marginal,
}

impl VerdictClass {
    /// Class of a minimal-`q` value under the margin convention: `Marginal`
    /// inside the closed band `|q*| ≤ margin`, otherwise by sign.
    pub fn from_q_star(q_star: f64, margin: f64) -> Self {
        if q_star.abs() <= margin {
            VerdictClass::Marginal
        } else if q_star > 0.0 {
            VerdictClass::Smooth
        } else {
            VerdictClass::BlowUp
        }
    }
}

impl fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictClass::Smooth => "smooth",
            VerdictClass::BlowUp => "blow-up",
            VerdictClass::Marginal => "marginal",
        })
    }
}

/// How a verdict was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed-form criterion algebra (extremum candidates of `q(M)`).
    ClosedForm,
    /// Direct adaptive integration with event location.
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Oracle => "oracle",
        })
    }
}

/// Full classification result for one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: VerdictClass,
    /// Minimum of `q` over one period.
    pub q_star: f64,
    /// First zero of `q`; present exactly for blow-up verdicts.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_star: Option<f64>,
    pub method: Method,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  q* = {:.6}", self.class, self.q_star)?;
        if let Some(t) = self.t_star {
            write!(f, "  t* = {t:.6}")?;
        }
        write!(f, "  [{}]", self.method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_band_is_closed() {
        assert_eq!(VerdictClass::from_q_star(1e-6, 1e-6), VerdictClass::Marginal);
        assert_eq!(VerdictClass::from_q_star(-1e-6, 1e-6), VerdictClass::Marginal);
        assert_eq!(VerdictClass::from_q_star(1.01e-6, 1e-6), VerdictClass::Smooth);
        assert_eq!(VerdictClass::from_q_star(-1.01e-6, 1e-6), VerdictClass::BlowUp);
    }

    #[test]
    fn serializes_with_kebab_names() {
        let v = Verdict {
            class: VerdictClass::BlowUp,
            q_star: -0.2,
            t_star: Some(2.3),
            method: Method::Oracle,
        };
        let json = serde_json::to_value(v).unwrap();
        assert_eq!(json["class"], "blow-up");
        assert_eq!(json["method"], "oracle");
        assert_eq!(json["t_star"], 2.3);

        let smooth = Verdict {
            class: VerdictClass::Smooth,
            q_star: 1.0,
            t_star: None,
            method: Method::ClosedForm,
        };
        let json = serde_json::to_value(smooth).unwrap();
        assert!(json.get("t_star").is_none());
        assert_eq!(json["class"], "smooth");
    }

    #[test]
    fn display_is_single_line() {
        let v = Verdict {
            class: VerdictClass::Smooth,
            q_star: 0.1,
            t_star: None,
            method: Method::ClosedForm,
        };
        assert_eq!(format!("{v}"), "smooth  q* = 0.100000  [closed-form]");
    }
}
