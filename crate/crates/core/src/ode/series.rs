//! Sampled trajectories and their CSV / JSON export.

use crate::datum::InitialDatum;
use crate::fmt::g17;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Full state of one characteristic at a sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicState {
    pub t: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub q: f64,
    pub p1: f64,
    pub p2: f64,
    /// Density `n = 1 − (v + 4G)`; recomputed from `v` and `G` at every
    /// sample so the identity holds by construction.
    pub n: f64,
}

impl CharacteristicState {
    #[allow(clippy::too_many_arguments)]
    pub fn from_fields(t: f64, f: f64, g: f64, u: f64, v: f64, r: f64, q: f64, p1: f64, p2: f64) -> Self {
        Self { t, f, g, u, v, r, q, p1, p2, n: 1.0 - (v + 4.0 * g) }
    }
}

/// How a characteristic run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeriesOutcome {
    /// Integrated through the requested horizon.
    Completed,
    /// The gradient pair `(u, v)` crossed the explosion threshold at `t`;
    /// the series ends there with the last finite state.
    GradientExplosion { t: f64 },
}

/// Metadata carried next to the samples (JSON sidecar of the CSV export).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub datum: InitialDatum,
    pub horizon: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub outcome: SeriesOutcome,
    /// Located zeros of `q` (none when the gradients explode first: the
    /// explosion cut-off sits just before the zero itself).
    pub q_zeros: Vec<f64>,
    /// Completed-period marks of the `(F, G)` oscillation (`t ≈ 2πk`); empty
    /// for the equilibrium coefficient trajectory.
    pub period_marks: Vec<f64>,
    pub n_steps: usize,
    pub n_rhs_evals: usize,
}

/// Ordered samples of one characteristic plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<CharacteristicState>,
    pub meta: SeriesMeta,
}

impl TimeSeries {
    /// Writes the samples as CSV with 17-significant-digit values.
    ///
    /// Column order: `t,F,G,r,u,v,q,p1,p2,n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,F,G,r,u,v,q,p1,p2,n")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                g17(s.t),
                g17(s.f),
                g17(s.g),
                g17(s.r),
                g17(s.u),
                g17(s.v),
                g17(s.q),
                g17(s.p1),
                g17(s.p2),
                g17(s.n),
            )?;
        }
        Ok(())
    }

    /// Writes the metadata sidecar as pretty JSON.
    pub fn write_meta_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.meta)?;
        writeln!(w)
    }

    /// Re-parses a CSV produced by [`TimeSeries::write_csv`].
    ///
    /// Used by the round-trip checks; 17-digit rendering makes this lossless.
    pub fn parse_csv(text: &str) -> Result<Vec<CharacteristicState>, String> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "t,F,G,r,u,v,q,p1,p2,n" => {}
            Some((_, header)) => return Err(format!("line 1: unexpected header {header:?}")),
            None => return Err("empty file".to_string()),
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 10 {
                return Err(format!("line {}: expected 10 fields, got {}", idx + 1, fields.len()));
            }
            let mut vals = [0.0_f64; 10];
            for (j, raw) in fields.iter().enumerate() {
                vals[j] = raw.trim().parse::<f64>().map_err(|e| {
                    format!("line {}, field {}: {e} ({raw:?})", idx + 1, j + 1)
                })?;
            }
            let [t, f, g, r, u, v, q, p1, p2, n] = vals;
            samples.push(CharacteristicState { t, f, g, u, v, r, q, p1, p2, n });
        }
        Ok(samples)
    }

    /// Structural sanity: strictly increasing `t`, the projective initial
    /// column `(q, p1, p2)(0) = (1, u0, v0)`, and the density identity.
    pub fn check_consistency(&self) -> Result<(), String> {
        let first = self.samples.first().ok_or("series has no samples")?;
        if first.t != 0.0 {
            return Err(format!("first sample at t = {}, expected 0", first.t));
        }
        if first.q != 1.0 || first.p1 != self.meta.datum.u0 || first.p2 != self.meta.datum.v0 {
            return Err("initial projective column is not (1, u0, v0)".to_string());
        }
        for w in self.samples.windows(2) {
            if w[1].t <= w[0].t {
                return Err(format!("samples not strictly increasing at t = {}", w[1].t));
            }
        }
        for s in &self.samples {
            let n = 1.0 - (s.v + 4.0 * s.g);
            if (s.n - n).abs() > 1e-12 * n.abs().max(1.0) {
                return Err(format!("density identity violated at t = {}", s.t));
            }
        }
        Ok(())
    }
}

/// Density samples `(t, n)` of a series.
///
/// `n(t) = 1 − v(t) − 4·G(t)` with the background fixed to one; the first
/// pair reproduces the profile's initial density.
pub fn density_along(series: &TimeSeries) -> Vec<(f64, f64)> {
    series.samples.iter().map(|s| (s.t, s.n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_series() -> TimeSeries {
        let datum = InitialDatum::new(0.0, 0.0, 0.3, 0.4).unwrap();
        let samples = vec![
            CharacteristicState::from_fields(0.0, 0.0, 0.0, 0.3, 0.4, 1.0, 1.0, 0.3, 0.4),
            CharacteristicState::from_fields(0.5, 0.0, 0.0, 0.2, 0.3, 1.0, 1.1, 0.25, 0.35),
        ];
        TimeSeries {
            samples,
            meta: SeriesMeta {
                datum,
                horizon: 0.5,
                abs_tol: 1e-10,
                rel_tol: 1e-10,
                outcome: SeriesOutcome::Completed,
                q_zeros: vec![],
                period_marks: vec![],
                n_steps: 1,
                n_rhs_evals: 13,
            },
        }
    }

    #[test]
    fn csv_round_trips_bitwise() {
        let series = tiny_series();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = TimeSeries::parse_csv(&text).unwrap();
        assert_eq!(parsed, series.samples);
    }

    #[test]
    fn parse_reports_position() {
        let err = TimeSeries::parse_csv("t,F,G,r,u,v,q,p1,p2,n\n1,2,3\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        let err = TimeSeries::parse_csv("wrong\n").unwrap_err();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn consistency_checks_catch_mangled_series() {
        let good = tiny_series();
        assert!(good.check_consistency().is_ok());

        let mut bad = good.clone();
        bad.samples[1].t = 0.0;
        assert!(bad.check_consistency().is_err());

        let mut bad = good.clone();
        bad.samples[0].q = 0.5;
        assert!(bad.check_consistency().is_err());

        let mut bad = good;
        bad.samples[1].n += 1e-6;
        assert!(bad.check_consistency().is_err());
    }

    #[test]
    fn density_pairs_follow_samples() {
        let series = tiny_series();
        let pairs = density_along(&series);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], (0.0, 1.0 - 0.4));
        assert_eq!(pairs[1].1, 1.0 - 0.3);
    }

    #[test]
    fn meta_json_names_outcome() {
        let series = tiny_series();
        let mut buf = Vec::new();
        series.write_meta_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["outcome"]["kind"], "completed");
        assert_eq!(v["datum"]["F0"], 0.0);
    }
}
