//! Helix detection, pseudo-helix segmentation and orbit classification.

mod segment;

pub use segment::{PseudoHelixSegment, SegmentOptions, SegmentScanner};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::BoundMap;
use crate::metrics::SteadyPointTrain;
use crate::orbit::{iterate, OrbitSeries, Term};
use crate::scalar::Scalar;

/// A stable helix of order j: u(n + j) − u(n) → m with j attractors mod 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HelixReport<T> {
    pub period_j: usize,
    /// Sorted fractional parts of the last j terms.
    pub lambdas: Vec<T>,
    pub modulo_step: i64,
    /// Largest |u(n + j) − u(n) − m| over the confirmation window.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict<T> {
    StableHelix(HelixReport<T>),
    PseudoHelixRegime { period_p: usize, segments: Vec<PseudoHelixSegment> },
    Chaotic,
}

impl<T> Verdict<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::StableHelix(_) => "stable_helix",
            Verdict::PseudoHelixRegime { .. } => "pseudo_helix_regime",
            Verdict::Chaotic => "chaotic",
        }
    }

    pub fn is_stable_helix(&self) -> bool {
        matches!(self, Verdict::StableHelix(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub transient: usize,
    pub horizon: usize,
    pub cycles_checked: usize,
    pub segments_found: usize,
    /// Long enough Δ₂-decreasing runs without a steady point in every phase.
    pub windows_without_steady_point: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification<T> {
    pub verdict: Verdict<T>,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub transient: usize,
    pub confirm_cycles: usize,
    pub tol: f64,
    pub p_max: usize,
    pub horizon: usize,
    pub segment: SegmentOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            transient: 10_000,
            confirm_cycles: 100,
            tol: 1e-6,
            p_max: 128,
            horizon: 100_000,
            segment: SegmentOptions::default(),
        }
    }
}

impl ClassifyOptions {
    fn validate(&self) -> Result<()> {
        if self.horizon <= self.transient {
            return Err(Error::InvalidArgument(format!(
                "horizon {} must exceed transient {}",
                self.horizon, self.transient
            )));
        }
        if self.p_max == 0 || self.confirm_cycles == 0 {
            return Err(Error::InvalidArgument("p_max and confirm_cycles must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest j ≤ p_max for which u(n + j) − u(n) stays within `tol` of an
/// integer over the last (confirm_cycles + 1)·j terms of `terms`.
pub fn detect_helix<T: Scalar>(
    terms: &[Term<T>],
    p_max: usize,
    confirm_cycles: usize,
    tol: T,
) -> Option<HelixReport<T>> {
    let n = terms.len();
    for j in 1..=p_max {
        let window = (confirm_cycles + 1) * j;
        if window > n {
            break;
        }
        let first = n - window;
        let step = terms[n - 1 - j].to(&terms[n - 1]).round();
        let mut residual = T::zero();
        for i in first..n - j {
            residual = residual.max((terms[i].to(&terms[i + j]) - step).abs());
            if !(residual < tol) {
                break;
            }
        }
        if residual < tol && step >= T::one() {
            let mut lambdas: Vec<T> = terms[n - j..].iter().map(|t| t.frac).collect();
            lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            return Some(HelixReport {
                period_j: j,
                lambdas,
                modulo_step: step.to_i64().expect("finite step"),
                residual,
            });
        }
    }
    None
}

/// Smallest p ≤ p_max such that the integer-part jumps ⌊u(n+1)⌋ − ⌊u(n)⌋ over
/// the trailing 4·p_max terms repeat with period p.
pub fn infer_period<T: Scalar>(series: &OrbitSeries<T>, p_max: usize) -> Result<Option<usize>> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be positive".into()));
    }
    let need = 4 * p_max + 1;
    if series.len() < need {
        return Err(Error::TooShort { need, have: series.len() });
    }
    let tail = &series.terms()[series.len() - need..];
    let jumps: Vec<i64> = tail.windows(2).map(|w| w[1].int_part - w[0].int_part).collect();
    Ok((1..=p_max).find(|&p| (p..jumps.len()).all(|i| jumps[i] == jumps[i - p])))
}

/// Pseudo-helix segments of period p in a materialised series.
pub fn segment_pseudo_helices<T: Scalar>(
    series: &OrbitSeries<T>,
    p: usize,
    opts: &SegmentOptions,
) -> Result<Vec<PseudoHelixSegment>> {
    Ok(scan_terms(series.terms(), p, opts, 1)?.0)
}

/// Steady orders (one per segment) with their periodicity statistics.
pub fn steady_points<T: Scalar>(
    series: &OrbitSeries<T>,
    p: usize,
    opts: &SegmentOptions,
) -> Result<SteadyPointTrain> {
    let segments = segment_pseudo_helices(series, p, opts)?;
    Ok(SteadyPointTrain::from_orders(segments.iter().map(|s| s.steady_order()).collect()))
}

fn scan_terms<T: Scalar>(
    terms: &[Term<T>],
    p: usize,
    opts: &SegmentOptions,
    origin: u64,
) -> Result<(Vec<PseudoHelixSegment>, usize)> {
    if p == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let mut scanner = SegmentScanner::new(p, *opts, origin);
    for t in terms {
        scanner.push(*t);
    }
    Ok(scanner.finish())
}

/// Classify the orbit of `x0` after discarding the transient.
pub fn classify<T: Scalar>(map: &BoundMap<T>, x0: T, opts: &ClassifyOptions) -> Result<Classification<T>> {
    opts.validate()?;
    let series = iterate(map, x0, opts.horizon)?;
    classify_series(&series, opts)
}

/// Classification of an already materialised orbit of length `opts.horizon`
/// or shorter.
pub fn classify_series<T: Scalar>(series: &OrbitSeries<T>, opts: &ClassifyOptions) -> Result<Classification<T>> {
    opts.validate()?;
    if series.len() <= opts.transient {
        return Err(Error::TooShort { need: opts.transient + 1, have: series.len() });
    }
    let tail = &series.terms()[opts.transient..];
    let mut evidence = Evidence {
        transient: opts.transient,
        horizon: series.len(),
        cycles_checked: opts.confirm_cycles,
        segments_found: 0,
        windows_without_steady_point: 0,
    };
    if let Some(h) = detect_helix(tail, opts.p_max, opts.confirm_cycles, T::lit(opts.tol)) {
        return Ok(Classification { verdict: Verdict::StableHelix(h), evidence });
    }
    let origin = opts.transient as u64 + 1;
    for p in 1..=opts.p_max {
        if tail.len() < 3 * p + 1 {
            break;
        }
        let (segments, without) = scan_terms(tail, p, &opts.segment, origin)?;
        if p == 1 {
            evidence.windows_without_steady_point = without;
        }
        if segments.len() >= 2 {
            evidence.segments_found = segments.len();
            evidence.windows_without_steady_point = without;
            return Ok(Classification {
                verdict: Verdict::PseudoHelixRegime { period_p: p, segments },
                evidence,
            });
        }
    }
    Ok(Classification { verdict: Verdict::Chaotic, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::builtin;

    fn sine(beta: f64) -> BoundMap<f64> {
        builtin("sine").unwrap().bind::<f64>(Some(0.4), Some(beta)).unwrap()
    }

    #[test]
    fn order_one_helix() {
        // Fixed points of F(x) − x − 2 = 0.4 sin(pi x): x = 0 and 1 (mod 2); the
        // attracting one has F'(x) = 1 + 0.4 pi cos(pi x) < 1, i.e. x = 1.
        let c = classify(&sine(2.0), 0.3, &ClassifyOptions::default()).unwrap();
        match c.verdict {
            Verdict::StableHelix(h) => {
                assert_eq!(h.period_j, 1);
                assert_eq!(h.modulo_step, 2);
                assert!((h.lambdas[0] - 1.0).abs() < 1e-9 || h.lambdas[0] < 1e-9);
                assert!(h.residual < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detect_helix_on_synthetic_terms() {
        let vals: Vec<f64> = (0..400).map(|i| 0.2 + 0.5 * (i % 3) as f64 + 4.0 * (i / 3) as f64).collect();
        let s = OrbitSeries::from_values(&vals);
        let h = detect_helix(s.terms(), 10, 100, 1e-9).unwrap();
        assert_eq!(h.period_j, 3);
        assert_eq!(h.modulo_step, 4);
        assert_eq!(h.lambdas.len(), 3);
        assert!(detect_helix(s.terms(), 2, 100, 1e-9).is_none());
    }

    #[test]
    fn infer_period_of_jumps() {
        // Jumps 1,2,1,2,... have period 2.
        let mut v = vec![0.5];
        for i in 0..200 {
            v.push(v[i] + if i % 2 == 0 { 1.0 } else { 2.0 });
        }
        let s = OrbitSeries::from_values(&v);
        assert_eq!(infer_period(&s, 8).unwrap(), Some(2));
        assert!(matches!(infer_period(&s, 100), Err(Error::TooShort { .. })));
        assert!(infer_period(&s, 0).is_err());
    }

    #[test]
    fn options_are_validated() {
        let bad = ClassifyOptions { transient: 10, horizon: 10, ..ClassifyOptions::default() };
        assert!(classify(&sine(2.0), 0.3, &bad).is_err());
        let bad = ClassifyOptions { tol: 0.0, ..ClassifyOptions::default() };
        assert!(classify(&sine(2.0), 0.3, &bad).is_err());
    }

    #[test]
    fn chaotic_parameter() {
        let c = classify(&sine(1.5), 0.3, &ClassifyOptions { p_max: 16, ..ClassifyOptions::default() })
            .unwrap();
        assert_eq!(c.verdict, Verdict::Chaotic, "{:?}", c.evidence);
    }
}
