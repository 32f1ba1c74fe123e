//! Iteration and pseudo-helix analysis of ascending maps F(x) = αf(x) + x + β.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI uses.

pub mod detect;
pub mod error;
pub mod expr;
pub mod families;
pub mod io;
pub mod metrics;
pub mod orbit;
pub mod scalar;
pub mod sweep;

pub use detect::{
    classify, classify_series, detect_helix, infer_period, segment_pseudo_helices, steady_points,
    ClassifyOptions, Evidence, PseudoHelixSegment, SegmentOptions, SegmentScanner, Verdict,
};
pub use error::{Error, ErrorClass, Result};
pub use expr::{parse_map_expr, MapExpr, Param};
pub use families::{builtin, schwarzian_at, schwarzian_scan, validate_ascending, FamilySpec, BUILTIN_NAMES};
pub use metrics::{
    average_periodicity, chaos_mod1_test, chaos_mod1_test_pairs, quasi_ap_check, ChaosOptions, QuasiAp,
    SteadyPointTrain,
};
pub use orbit::{diff_columns, iterate, orbit_terms, DiffColumns, Term};
pub use scalar::Scalar;
pub use sweep::{
    classify_grid, find_boundary, find_boundary_by, invert_mu, mu, vier_estimate, Boundary, InvertOptions,
    Inversion, Inverter, MuOracle, OrbitMu, OrbitMuOptions, Side, SweepOptions, SweepRecord, VierEstimate,
};

pub type Jet = expr::Jet3<f64>;
pub type Map = families::BoundMap<f64>;
pub type Orbit = orbit::OrbitSeries<f64>;
pub type HelixReport = detect::HelixReport<f64>;
pub type Classification = detect::Classification<f64>;
pub type SchwarzianReport = families::SchwarzianReport<f64>;
pub type ChaosModReport = metrics::ChaosModReport<f64>;
