//! Parameter sweeps, boundary location, average periodicity μ and its
//! inverse, and the Vier ratio estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{classify, ClassifyOptions, SegmentOptions, SegmentScanner, Verdict};
use crate::error::{Error, Result};
use crate::expr::Param;
use crate::families::{validate_ascending, BoundMap, FamilySpec};
use crate::metrics::average_periodicity;
use crate::orbit::orbit_terms;

/// Which side of a boundary holds the chaotic (pseudo-helix) regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Chaotic values lie below the boundary.
    Left,
    /// Chaotic values lie above the boundary.
    Right,
}

impl Side {
    /// Parameter value at distance `d` from `boundary` on this side.
    pub fn at(self, boundary: f64, d: f64) -> f64 {
        match self {
            Side::Left => boundary - d,
            Side::Right => boundary + d,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::InvalidArgument(format!("side must be left or right, got `{other}`"))),
        }
    }
}

/// Bind `family` with `param` set to `value` and the other parameter to `other`.
pub fn bind_axis(family: &FamilySpec, param: Param, value: f64, other: f64) -> Result<BoundMap<f64>> {
    match param {
        Param::Alpha => family.bind(Some(value), Some(other)),
        Param::Beta => family.bind(Some(other), Some(value)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub classify: ClassifyOptions,
    /// Steady orders required before μ is reported.
    pub min_steady_points: usize,
    /// Grid size of the per-point ascending check over one lift period.
    pub ascending_samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { classify: ClassifyOptions::default(), min_steady_points: 10, ascending_samples: 1001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub param_name: Param,
    pub param_value: f64,
    /// `stable_helix`, `pseudo_helix_regime`, `chaotic`, or `error`.
    pub verdict: String,
    /// Helix order or pseudo-helix period.
    pub period: Option<usize>,
    pub segments: usize,
    pub mu: Option<f64>,
    pub error: Option<String>,
}

fn check_ascending(map: &BoundMap<f64>, samples: usize) -> Result<()> {
    let hi = f64::from(map.lift_period().unwrap_or(1));
    if !validate_ascending(map, 0.0, hi, samples)? {
        return Err(Error::NotAscending(format!(
            "F(x) - x <= 0 somewhere on [0, {hi}] at alpha={}, beta={}",
            map.alpha, map.beta
        )));
    }
    Ok(())
}

fn classify_point(
    family: &FamilySpec,
    param: Param,
    value: f64,
    other: f64,
    x0: f64,
    opts: &SweepOptions,
) -> SweepRecord {
    let mut rec = SweepRecord {
        param_name: param,
        param_value: value,
        verdict: "error".into(),
        period: None,
        segments: 0,
        mu: None,
        error: None,
    };
    let run = || -> Result<_> {
        let map = bind_axis(family, param, value, other)?;
        check_ascending(&map, opts.ascending_samples)?;
        classify(&map, x0, &opts.classify)
    };
    match run() {
        Err(e) => rec.error = Some(e.to_string()),
        Ok(c) => {
            rec.verdict = c.verdict.name().into();
            match &c.verdict {
                Verdict::StableHelix(h) => rec.period = Some(h.period_j),
                Verdict::PseudoHelixRegime { period_p, segments } => {
                    rec.period = Some(*period_p);
                    rec.segments = segments.len();
                    if segments.len() >= opts.min_steady_points {
                        let orders: Vec<u64> = segments.iter().map(|s| s.steady_order()).collect();
                        rec.mu = average_periodicity(&orders).ok();
                    }
                }
                Verdict::Chaotic => {}
            }
        }
    }
    rec
}

/// Evenly spaced grid over [lo, hi] with both endpoints included.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || steps < 2 {
        return Err(Error::InvalidArgument(format!("need lo < hi and steps >= 2 (got [{lo}, {hi}], {steps})")));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { hi } else { lo + h * i as f64 }).collect())
}

/// Classify every grid value independently; per-point failures are recorded,
/// not propagated.
#[allow(clippy::too_many_arguments)]
pub fn classify_grid(
    family: &FamilySpec,
    param: Param,
    lo: f64,
    hi: f64,
    steps: usize,
    fixed_other: f64,
    x0: f64,
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    let values = grid(lo, hi, steps)?;
    Ok(values
        .par_iter()
        .map(|v| classify_point(family, param, *v, fixed_other, x0, opts))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// False when `iter_max` ran out before the bracket shrank below tolerance.
    pub converged: bool,
}

/// Bisection on a boolean predicate that differs at the two bracket ends.
pub fn find_boundary_by<P>(mut pred: P, lo: f64, hi: f64, tol: f64, iter_max: usize) -> Result<Boundary>
where
    P: FnMut(f64) -> Result<bool>,
{
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("bracket [{lo}, {hi}] is empty")));
    }
    let at_lo = pred(lo)?;
    if pred(hi)? == at_lo {
        return Err(Error::BracketNotStraddling { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    while b - a >= tol && iterations < iter_max {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if pred(mid)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(Boundary { value: 0.5 * (a + b), bracket: (a, b), iterations, converged: b - a < tol })
}

/// Boundary between stable-helix and non-helix verdicts along one parameter.
#[allow(clippy::too_many_arguments)]
pub fn find_boundary(
    family: &FamilySpec,
    param: Param,
    bracket_lo: f64,
    bracket_hi: f64,
    fixed_other: f64,
    x0: f64,
    opts: &ClassifyOptions,
    tol: f64,
    iter_max: usize,
) -> Result<Boundary> {
    let pred = |v: f64| -> Result<bool> {
        let map = bind_axis(family, param, v, fixed_other)?;
        Ok(classify(&map, x0, opts)?.verdict.is_stable_helix())
    };
    find_boundary_by(pred, bracket_lo, bracket_hi, tol, iter_max)
}

/// Average periodicity of the steady points at one parameter value; the
/// value must classify as a pseudo-helix regime.
pub fn mu(map: &BoundMap<f64>, x0: f64, opts: &ClassifyOptions, min_steady_points: usize) -> Result<f64> {
    let c = classify(map, x0, opts)?;
    let segments = match c.verdict {
        Verdict::PseudoHelixRegime { segments, .. } => segments,
        other => {
            let value = if map.family.references(Param::Beta) { map.beta } else { map.alpha };
            return Err(Error::NotInRegime { value, verdict: other.name().into() });
        }
    };
    if segments.len() < min_steady_points.max(2) {
        return Err(Error::InsufficientSteadyPoints { found: segments.len(), need: min_steady_points.max(2) });
    }
    let orders: Vec<u64> = segments.iter().map(|s| s.steady_order()).collect();
    average_periodicity(&orders)
}

/// Anything that can report μ at a parameter value.
pub trait MuOracle: Sync {
    fn mu_at(&self, value: f64) -> Result<f64>;
}

impl<F> MuOracle for F
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    fn mu_at(&self, value: f64) -> Result<f64> {
        self(value)
    }
}

/// μ measured from orbits of a family, without first classifying the value.
///
/// Each initial value is streamed until `target_points` steady orders past
/// the transient have been seen at one of the checkpoints h0, 2h0, 4h0, …
/// (or `max_horizon` is hit); μ is the mean over the initial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitMuOptions {
    pub x0s: Vec<f64>,
    pub period_p: usize,
    pub transient: usize,
    pub initial_horizon: usize,
    pub max_horizon: usize,
    pub target_points: usize,
    pub min_steady_points: usize,
    pub segment: SegmentOptions,
}

impl Default for OrbitMuOptions {
    fn default() -> Self {
        Self {
            x0s: vec![0.25, 0.5, 0.75],
            period_p: 1,
            transient: 1_000,
            initial_horizon: 100_000,
            max_horizon: 100_000_000,
            target_points: 100,
            min_steady_points: 10,
            segment: SegmentOptions::default(),
        }
    }
}

pub struct OrbitMu {
    pub family: FamilySpec,
    pub param: Param,
    pub fixed_other: f64,
    pub opts: OrbitMuOptions,
}

impl OrbitMu {
    /// Steady orders past the transient for one initial value.
    pub fn steady_orders(&self, value: f64, x0: f64) -> Result<Vec<u64>> {
        let map = bind_axis(&self.family, self.param, value, self.fixed_other)?;
        let o = &self.opts;
        let mut scanner = SegmentScanner::new(o.period_p, o.segment, 1);
        let mut checkpoint = o.initial_horizon.min(o.max_horizon);
        let past = |orders: &[crate::detect::PseudoHelixSegment]| {
            orders.iter().filter(|s| s.steady_order() > o.transient as u64).count()
        };
        for (n, t) in orbit_terms(&map, x0, o.max_horizon).enumerate() {
            scanner.push(t?);
            if n + 1 == checkpoint {
                if past(scanner.segments()) >= o.target_points {
                    break;
                }
                checkpoint = checkpoint.saturating_mul(2).min(o.max_horizon);
            }
        }
        let (segments, _) = scanner.finish();
        Ok(segments
            .iter()
            .map(|s| s.steady_order())
            .filter(|k| *k > o.transient as u64)
            .collect())
    }
}

impl MuOracle for OrbitMu {
    fn mu_at(&self, value: f64) -> Result<f64> {
        let need = self.opts.min_steady_points.max(2);
        let mut total = 0.0;
        for x0 in &self.opts.x0s {
            let orders = self.steady_orders(value, *x0)?;
            if orders.len() < need {
                return Err(Error::InsufficientSteadyPoints { found: orders.len(), need });
            }
            total += average_periodicity(&orders)?;
        }
        Ok(total / self.opts.x0s.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvertOptions {
    /// Starting distance from the boundary, inside the chaotic interval.
    pub span: f64,
    pub mu_rel_tol: f64,
    /// Budget of μ evaluations after the first one.
    pub max_steps: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self { span: 0.01, mu_rel_tol: 0.05, max_steps: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inversion {
    pub value: f64,
    pub mu: f64,
    /// |μ(value) − target| / target.
    pub residual: f64,
    pub evaluations: usize,
}

/// Parameter value on the chaotic side at which μ ≈ `target`.
///
/// The distance to the boundary is halved from `span` until μ reaches the
/// target, then the last bracket is bisected.
pub fn invert_mu<O: MuOracle + ?Sized>(
    oracle: &O,
    boundary: f64,
    side: Side,
    target: f64,
    opts: &InvertOptions,
) -> Result<Inversion> {
    if !(target > 0.0) || !(opts.span > 0.0) {
        return Err(Error::InvalidArgument("target and span must be positive".into()));
    }
    let close = |m: f64| ((m - target) / target).abs() < opts.mu_rel_tol;
    let done = |d: f64, m: f64, evaluations: usize| Inversion {
        value: side.at(boundary, d),
        mu: m,
        residual: ((m - target) / target).abs(),
        evaluations,
    };

    let mut far = opts.span;
    let mut mu_far = oracle.mu_at(side.at(boundary, far))?;
    let mut evaluations = 1;
    if close(mu_far) {
        return Ok(done(far, mu_far, evaluations));
    }
    if mu_far > target {
        return Err(Error::Unreachable(format!(
            "mu = {mu_far} already exceeds target {target} at distance {far}"
        )));
    }
    let (mut near, mut mu_near);
    loop {
        if evaluations > opts.max_steps {
            return Err(Error::Unreachable(format!("mu still below {target} at distance {far}")));
        }
        let d = 0.5 * far;
        let m = oracle.mu_at(side.at(boundary, d))?;
        evaluations += 1;
        if m < mu_far * (1.0 - opts.mu_rel_tol) {
            return Err(Error::NonMonotone(format!(
                "mu fell from {mu_far} to {m} moving from distance {far} to {d}"
            )));
        }
        if close(m) {
            return Ok(done(d, m, evaluations));
        }
        if m > target {
            near = d;
            mu_near = m;
            break;
        }
        far = d;
        mu_far = m;
    }
    while evaluations <= opts.max_steps {
        let d = 0.5 * (near + far);
        let m = oracle.mu_at(side.at(boundary, d))?;
        evaluations += 1;
        if close(m) {
            return Ok(done(d, m, evaluations));
        }
        if m < mu_far * (1.0 - opts.mu_rel_tol) || m > mu_near * (1.0 + opts.mu_rel_tol) {
            return Err(Error::NonMonotone(format!(
                "mu = {m} at distance {d} lies outside [{mu_far}, {mu_near}]"
            )));
        }
        if m > target {
            near = d;
            mu_near = m;
        } else {
            far = d;
            mu_far = m;
        }
    }
    Err(Error::Unreachable(format!("bisection budget spent with bracket distances [{near}, {far}]")))
}

/// Anything that can map a target periodicity to a parameter value.
pub trait Inverter: Sync {
    fn invert(&self, target: f64) -> Result<Inversion>;
}

impl<F> Inverter for F
where
    F: Fn(f64) -> Result<Inversion> + Sync,
{
    fn invert(&self, target: f64) -> Result<Inversion> {
        self(target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VierEstimate {
    pub boundary: f64,
    pub side: Side,
    pub p0: f64,
    pub levels: usize,
    pub targets: Vec<f64>,
    /// b_n = μ⁻¹(2ⁿ·P0) for the levels that succeeded.
    pub b: Vec<f64>,
    pub mu: Vec<f64>,
    pub residuals: Vec<f64>,
    /// r_n = (b_{n+1} − b_n) / (b_{n+2} − b_{n+1}).
    pub ratios: Vec<f64>,
    /// b moves strictly toward the boundary.
    pub monotone: bool,
    pub failed_level: Option<usize>,
    pub failure: Option<String>,
}

/// Vier ratios from inverted parameter values at P0, 2P0, …, 2^(levels−1)P0.
/// Levels are inverted concurrently; a failure truncates the result at the
/// first failing level.
pub fn vier_estimate<I: Inverter + ?Sized>(
    inverter: &I,
    boundary: f64,
    side: Side,
    p0: f64,
    levels: usize,
) -> Result<VierEstimate> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("levels must be at least 3, got {levels}")));
    }
    if !(p0 > 0.0) {
        return Err(Error::InvalidArgument("P0 must be positive".into()));
    }
    let targets: Vec<f64> = (0..levels).map(|n| p0 * (1u64 << n) as f64).collect();
    let results: Vec<Result<Inversion>> = targets.par_iter().map(|t| inverter.invert(*t)).collect();

    let mut est = VierEstimate {
        boundary,
        side,
        p0,
        levels,
        targets: targets.clone(),
        b: Vec::new(),
        mu: Vec::new(),
        residuals: Vec::new(),
        ratios: Vec::new(),
        monotone: true,
        failed_level: None,
        failure: None,
    };
    for (n, r) in results.into_iter().enumerate() {
        match r {
            Ok(inv) => {
                est.b.push(inv.value);
                est.mu.push(inv.mu);
                est.residuals.push(inv.residual);
            }
            Err(e) => {
                est.failed_level = Some(n);
                est.failure = Some(e.to_string());
                break;
            }
        }
    }
    est.ratios = est.b.windows(3).map(|w| (w[1] - w[0]) / (w[2] - w[1])).collect();
    est.monotone = est.b.windows(2).all(|w| match side {
        Side::Left => w[1] > w[0],
        Side::Right => w[1] < w[0],
    });
    Ok(est)
}
