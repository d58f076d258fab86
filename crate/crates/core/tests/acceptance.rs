//! Acceptance gate: thirteen end-to-end criteria, one test each, every one
//! printing a single `[acceptance NN] …: PASS/FAIL` line before asserting.
//! Each criterion draws its own data through the public API so the gate
//! stays independent of the library's internal self-checks.

use ep4_core::sweep::{select_candidate, LineCandidate};
use ep4_core::{
    check_closed_form, check_conservation, check_radon, classify, criterion_d1,
    criterion_zero_field, fit_frontier, harmonic_q, harmonic_q_star, integrate_characteristic,
    measure_period, oracle_classify, q_star, run_with_options, sabatini_isochronous, scan_plane,
    scan_radial, InitialDatum, OracleOptions, PlaneKind, ProfileSpec, RadialGrid, Rational64,
    ScanMethod, ScanRequest, VerdictClass, VerifyOptions, DEFAULT_MARGIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::time::Instant;

fn gate(n: u32, desc: &str, pass: bool) {
    println!("[acceptance {n:02}] {desc}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "[acceptance {n:02}] {desc}: FAIL");
}

fn sample_data(seed: u64, n: usize) -> Vec<InitialDatum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n);
    while data.len() < n {
        let f0 = rng.random_range(-1.5..1.5);
        let g0 = rng.random_range(-1.0..0.24);
        let u0 = rng.random_range(-1.5..1.5);
        let v0 = rng.random_range(-1.5..1.5);
        if let Ok(d) = InitialDatum::new(f0, g0, u0, v0) {
            data.push(d);
        }
    }
    data
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn acceptance_01_period_reproduction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let pairs: Vec<(f64, f64)> = (0..200)
        .map(|_| (rng.random_range(-1.5..1.5), rng.random_range(-1.0..0.24)))
        .filter(|&(f0, g0)| f0 != 0.0 || g0 != 0.0)
        .collect();
    let opts = OracleOptions::default();
    let max_err = pairs
        .par_iter()
        .map(|&(f0, g0)| (measure_period(f0, g0, &opts).unwrap().period - TAU).abs())
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        1,
        &format!(
            "coefficient period = 2*pi within 1e-6 on 200 random pairs \
             (max err {max_err:.2e}, {elapsed:.1}s, budget 30s)"
        ),
        max_err < 1e-6 && elapsed < 30.0,
    );
}

#[test]
fn acceptance_02_conservation_drift() {
    let data = sample_data(102, 100);
    let max_drift = data
        .par_iter()
        .map(|d| {
            let c = check_conservation(d).unwrap();
            c.c4_drift.max(c.k_drift)
        })
        .reduce(|| 0.0, f64::max);
    gate(
        2,
        &format!(
            "C4 and r^4(1-4G) drift < 1e-8 over 10 periods on 100 random data \
             (max {max_drift:.2e})"
        ),
        max_drift < 1e-8,
    );
}

#[test]
fn acceptance_03_radon_equivalence() {
    let data = sample_data(103, 500);
    let max_dev = data
        .par_iter()
        .map(|d| check_radon(d, TAU).unwrap())
        .reduce(|| 0.0, f64::max);
    gate(
        3,
        &format!(
            "gradient pair vs linearized ratio within 1e-6 while q >= 0.1 \
             on 500 random data (max {max_dev:.2e})"
        ),
        max_dev < 1e-6,
    );
}

#[test]
fn acceptance_04_criterion_oracle_agreement() {
    let start = Instant::now();
    let data = sample_data(104, 10_000);
    let opts = OracleOptions::default();
    let results: Vec<(f64, VerdictClass, VerdictClass)> = data
        .par_iter()
        .map(|d| {
            let qs = q_star(d).unwrap();
            let class = VerdictClass::from_q_star(qs, DEFAULT_MARGIN);
            let oracle = oracle_classify(d, &opts).unwrap();
            (qs, class, oracle.class)
        })
        .collect();
    let clear: Vec<&(f64, VerdictClass, VerdictClass)> =
        results.iter().filter(|(qs, _, _)| qs.abs() > 1e-3).collect();
    let agree = clear.iter().filter(|(_, c, o)| c == o).count();
    let agreement = agree as f64 / clear.len() as f64;

    let smooth_sup = data
        .par_iter()
        .zip(&results)
        .filter(|(_, (qs, class, _))| *class == VerdictClass::Smooth && qs.abs() > 1e-3)
        .map(|(d, _)| check_closed_form(d).unwrap().max_q_deviation)
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        4,
        &format!(
            "closed form vs oracle on 10^4 data with |q*| > 1e-3: agreement \
             {:.3}% (need >= 99.9), smooth-case q sup-error {smooth_sup:.2e} \
             (need < 1e-6), {elapsed:.0}s (budget 300s)",
            100.0 * agreement
        ),
        agreement >= 0.999 && smooth_sup < 1e-6 && elapsed < 300.0,
    );
}

#[test]
fn acceptance_05_harmonic_exactness() {
    // Integrated q against (1 - v0) + u0 sin t + v0 cos t on the
    // constant-coefficient slice.
    let opts = OracleOptions::default();
    let mut cells = Vec::new();
    for &v0 in &linspace(-1.4, 0.9, 12) {
        for &u0 in &linspace(-1.5, 1.5, 13) {
            cells.push((u0, v0));
        }
    }
    let sup = cells
        .par_iter()
        .map(|&(u0, v0)| {
            let d = InitialDatum::new(0.0, 0.0, u0, v0).unwrap();
            let series = integrate_characteristic(&d, TAU, &opts).unwrap();
            series
                .samples
                .iter()
                .map(|s| (s.q - harmonic_q(u0, v0, s.t)).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    // The classification boundary is exactly u0^2 + 2 v0 = 1.
    let mut boundary_ok = true;
    for v0 in [-1.0, -0.4, 0.0, 0.3, 0.45] {
        let at = |shift: f64| harmonic_q_star((1.0 - 2.0 * v0 + shift).sqrt(), v0);
        boundary_ok &= at(0.0).abs() <= 1e-9;
        boundary_ok &= at(-2e-3) > DEFAULT_MARGIN; // inside: smooth
        boundary_ok &= at(2e-3) < -DEFAULT_MARGIN; // outside: blow-up
    }
    gate(
        5,
        &format!(
            "constant-coefficient q matches the explicit oscillation within \
             1e-9 (sup {sup:.2e}); boundary u0^2 + 2 v0 = 1 is marginal"
        ),
        sup < 1e-9 && boundary_ok,
    );
}

#[test]
fn acceptance_06_gaussian_pulse_scan() {
    let start = Instant::now();
    let grid = RadialGrid::uniform(0.0, 6.0, 0.05).unwrap();
    let mut all_smooth = true;
    for a in [0.05, 0.1, 0.2, 0.24] {
        let profile = ProfileSpec::gaussian(a).unwrap();
        let scan = scan_radial(&profile, &grid, ScanMethod::Closed).unwrap();
        all_smooth &= scan.global == VerdictClass::Smooth;
    }
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        6,
        &format!(
            "gaussian pulses a in {{0.05, 0.1, 0.2, 0.24}} scan globally \
             Smooth on [0,6] step 0.05 ({elapsed:.1}s, budget 60s)"
        ),
        all_smooth && elapsed < 60.0,
    );
}

#[test]
fn acceptance_07_blow_up_time_bound() {
    // Criterion 4's sample, criterion 5's slice, criterion 6's scans: every
    // blow-up verdict must carry t_star in (0, 2*pi).
    let data = sample_data(104, 10_000);
    let bad_random = data
        .par_iter()
        .filter(|d| {
            let v = classify(d, DEFAULT_MARGIN).unwrap();
            v.class == VerdictClass::BlowUp
                && !matches!(v.t_star, Some(t) if t > 0.0 && t < TAU)
        })
        .count();

    let opts = OracleOptions::default();
    let mut harmonic_blowups = 0usize;
    let mut bad_harmonic = 0usize;
    for &v0 in &linspace(-1.4, 0.9, 12) {
        for &u0 in &linspace(-1.5, 1.5, 13) {
            let d = InitialDatum::new(0.0, 0.0, u0, v0).unwrap();
            if harmonic_q_star(u0, v0) < -DEFAULT_MARGIN {
                harmonic_blowups += 1;
                let o = oracle_classify(&d, &opts).unwrap();
                if !matches!(o.t_star, Some(t) if t > 0.0 && t < TAU) {
                    bad_harmonic += 1;
                }
            }
        }
    }

    // The pulse scans are globally smooth, so they contribute no blow-ups.
    let grid = RadialGrid::uniform(0.0, 6.0, 0.05).unwrap();
    let pulse = scan_radial(&ProfileSpec::gaussian(0.24).unwrap(), &grid, ScanMethod::Closed)
        .unwrap();
    let pulse_clean = pulse.min_t_star.is_none()
        && pulse.points.iter().all(|p| p.class != VerdictClass::BlowUp);

    gate(
        7,
        &format!(
            "t_star in (0, 2*pi) for every blow-up verdict (0 violations on \
             10^4 random, {harmonic_blowups} constant-coefficient blow-ups, \
             pulse scan contributes none)"
        ),
        bad_random == 0 && bad_harmonic == 0 && pulse_clean,
    );
}

#[test]
fn acceptance_08_small_data_smoothness() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let data: Vec<InitialDatum> = (0..1000)
        .map(|_| {
            InitialDatum::new(
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
            )
            .unwrap()
        })
        .collect();
    let non_smooth = data
        .par_iter()
        .filter(|d| {
            let qs = q_star(d).unwrap();
            VerdictClass::from_q_star(qs, DEFAULT_MARGIN) != VerdictClass::Smooth
        })
        .count();
    gate(
        8,
        &format!("1000 random data with sup-norm <= 0.05 all classify Smooth ({non_smooth} exceptions)"),
        non_smooth == 0,
    );
}

#[test]
fn acceptance_09_isochrony_dimensions() {
    let mut ok = true;
    for d in 1..=10i64 {
        let (coeff, iso) = sabatini_isochronous(Rational64::from_integer(d)).unwrap();
        ok &= coeff == Rational64::new((2 + d) * (2 + d) - 9 * d, 9);
        ok &= iso == (d == 1 || d == 4);
    }
    gate(
        9,
        "exact rational isochrony holds for d in {1, 4} and no other d in 1..10",
        ok,
    );
}

#[test]
fn acceptance_10_one_dimensional_criterion() {
    let axis = linspace(-2.0, 2.0, 50);
    let mut mismatches = 0usize;
    for &dv0 in &axis {
        for &de0 in &axis {
            let class = criterion_d1(dv0, de0, 1.0).unwrap();
            let smooth = dv0 * dv0 + 2.0 * de0 - 1.0 < 0.0;
            if (class == VerdictClass::Smooth) != smooth {
                mismatches += 1;
            }
        }
    }
    gate(
        10,
        &format!("one-dimensional verdict matches the sign of (V0')^2 + 2 E0' - 1 on a 50x50 grid ({mismatches} mismatches)"),
        mismatches == 0,
    );
}

#[test]
fn acceptance_11_zero_field_corollary() {
    let req = ScanRequest::square(
        PlaneKind::ZeroField,
        (-2.0, 2.0),
        (-2.0, 2.0),
        100,
        ScanMethod::Oracle,
    )
    .unwrap();
    let scan = scan_plane(&req).unwrap();
    let (mut compared, mut agree) = (0usize, 0usize);
    for cell in &scan.cells {
        let cz = criterion_zero_field(cell.x, cell.y);
        if cz.class == VerdictClass::Marginal || cell.class == VerdictClass::Marginal {
            continue;
        }
        compared += 1;
        if cz.class == cell.class {
            agree += 1;
        }
    }
    let agreement = agree as f64 / compared as f64;

    // F0 = 0 slice: the oracle frontier must sit at |divV0| = 1 within one
    // cell width.
    let ys = linspace(-2.0, 2.0, 100);
    let cell_w = ys[1] - ys[0];
    let opts = OracleOptions::default();
    let col: Vec<f64> = ys
        .par_iter()
        .map(|&dv0| {
            let d = InitialDatum::phase_point(0.0, 0.0, dv0, 0.0).unwrap();
            oracle_classify(&d, &opts).unwrap().q_star
        })
        .collect();
    let mut crossings = Vec::new();
    for i in 1..col.len() {
        if col[i - 1].signum() != col[i].signum() {
            let frac = col[i - 1] / (col[i - 1] - col[i]);
            crossings.push(ys[i - 1] + frac * (ys[i] - ys[i - 1]));
        }
    }
    let frontier_ok = crossings.len() == 2
        && (crossings[0] + 1.0).abs() <= cell_w
        && (crossings[1] - 1.0).abs() <= cell_w;

    gate(
        11,
        &format!(
            "zero-field corollary vs oracle on 100x100 grid: {:.3}% of \
             {compared} non-marginal cells (need >= 99.9); F0 = 0 frontier at \
             divV0 = {:.4}, {:.4} (|divV0| = 1 within {cell_w:.4})",
            100.0 * agreement,
            crossings.first().copied().unwrap_or(f64::NAN),
            crossings.last().copied().unwrap_or(f64::NAN),
        ),
        agreement >= 0.999 && frontier_ok,
    );
}

#[test]
fn acceptance_12_zero_velocity_frontier() {
    let req = ScanRequest::square(
        PlaneKind::ZeroVelocity,
        (-1.0, 0.24),
        (-2.0, 2.0),
        200,
        ScanMethod::Oracle,
    )
    .unwrap();
    let scan = scan_plane(&req).unwrap();
    let fit = fit_frontier(&scan).unwrap();
    let candidates = [
        LineCandidate { name: "resolved", slope: 2.0, intercept: 0.5 },
        LineCandidate { name: "printed", slope: 6.0, intercept: -0.5 },
    ];
    let (best, _) = select_candidate(&fit, &candidates, &scan.request.x);

    // The verification report must state the selection in its ledger.
    let report = run_with_options(&VerifyOptions {
        seed: 42,
        n_cases: 25,
        zv_resolution: 60,
        ..Default::default()
    });
    let entry = report.ledger.iter().find(|e| e.id == "zero-velocity-inequality");
    let entry_ok = entry.is_some_and(|e| {
        e.samples > 0
            && !e.printed.is_empty()
            && !e.resolved.is_empty()
            && e.detail.contains("selected candidate: resolved")
    });

    gate(
        12,
        &format!(
            "zero-velocity frontier at resolution 200 is a line: slope \
             {:.4}, intercept {:.4}, max residual {:.3} cells (need <= 1); \
             oracle selects the '{}' corollary line and the report ledger \
             records the selection",
            fit.slope, fit.intercept, fit.max_residual_cells, best.name
        ),
        fit.max_residual_cells <= 1.0 && best.name == "resolved" && entry_ok,
    );
}

#[test]
fn acceptance_13_thread_count_determinism() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let report = run_with_options(&VerifyOptions {
                seed: 42,
                n_cases: 80,
                zv_resolution: 48,
                ..Default::default()
            });
            let req = ScanRequest::square(
                PlaneKind::ZeroVelocity,
                (-0.8, 0.2),
                (-1.5, 1.5),
                41,
                ScanMethod::Both,
            )
            .unwrap();
            let scan = scan_plane(&req).unwrap();
            let grid = RadialGrid::uniform(0.0, 4.0, 0.1).unwrap();
            let radial =
                scan_radial(&ProfileSpec::gaussian(0.2).unwrap(), &grid, ScanMethod::Both)
                    .unwrap();
            (
                report.render_text(),
                serde_json::to_string_pretty(&report.to_json()).unwrap(),
                scan.to_csv(),
                serde_json::to_string(&scan.summary_json()).unwrap(),
                radial.to_csv(),
            )
        })
    };
    let single = run(1);
    let multi = run(4);
    gate(
        13,
        "verify report and scan artifacts are byte-identical across 1 and 4 \
         worker threads",
        single == multi,
    );
}
