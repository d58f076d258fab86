//! Blow-up analysis for radially symmetric solutions of the pressureless
//! repulsive Euler–Poisson system in four space dimensions.
//!
//! Along a characteristic the velocity/field coefficients `(F, G)` satisfy a
//! closed planar system whose orbits are all `2π`-periodic, and the radial
//! gradients `(u, v) = (∂V, ∂E)` obey a Riccati system driven by those
//! coefficients. Linearization turns the Riccati pair into a linear system
//! for `(q, p1, p2)` with `u = p1/q`, `v = p2/q`: the solution loses
//! smoothness exactly where `q` vanishes, necessarily within the first
//! period.
//!
//! The crate provides
//! - the characteristic dynamics with conserved quantities ([`ode`]),
//! - a high-order integrator with dense output and event location
//!   ([`ode::dop853`]),
//! - integration oracles for classification and period measurement
//!   ([`ode::oracle`]),
//! - the exact closed-form criterion deciding smoothness vs. blow-up
//!   ([`blowup`]),
//! - initial data built from radial velocity/field profiles ([`profiles`]),
//! - parameter-plane and radial sweeps ([`sweep`]),
//! - a self-contained verification suite ([`verify`]).

pub mod blowup;
pub mod datum;
pub mod fmt;
pub mod ode;
pub mod profiles;
pub mod sweep;
pub mod verdict;
pub mod verify;

pub use blowup::{
    classify, constants_from_endpoints, criterion_constants, criterion_d1, criterion_zero_field,
    criterion_zero_velocity, endpoint_values, harmonic_q, harmonic_q_star, q_star,
    sabatini_isochronous, Candidate, CorollaryVerdict, CriterionConstants, CriterionError,
};
pub use datum::{DatumError, InitialDatum};
pub use num_rational::Rational64;
pub use ode::dop853::{Outcome, StepControl, Tolerances};
pub use ode::oracle::{
    integrate_characteristic, measure_period, oracle_classify, riccati_classify,
    IntegrationError, OracleOptions, PeriodMeasurement,
};
pub use ode::series::{CharacteristicState, SeriesOutcome, TimeSeries};
pub use ode::{conserved_quantities, envelope, Conserved};
pub use profiles::{
    critical_background, datum_at, fd_weights, validate_profile, ProfileError, ProfileSpec,
    RadialGrid, TabulatedProfile, ValidationReport,
};
pub use sweep::{
    fit_frontier, scan_plane, scan_radial, AxisSpec, FrontierFit, PlaneKind, RadialScanResult,
    ScanCell, ScanError, ScanMethod, ScanRequest, ScanResult,
};
pub use verdict::{Method, Verdict, VerdictClass, DEFAULT_MARGIN};
pub use verify::{
    check_closed_form, check_conservation, check_radon, run_all, run_with_options, CheckResult,
    ClosedFormCheck, ConservationFigures, LedgerEntry, VerificationReport, VerifyOptions,
};
