//! Steady-point periodicity and the chaos-modulo-1 estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::BoundMap;
use crate::orbit::orbit_terms;
use crate::scalar::Scalar;

/// Orders U(1..n) of steady points with their periodicity statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyPointTrain {
    pub orders: Vec<u64>,
    pub average_periodicity: Option<f64>,
    pub quasi_ap: Option<QuasiAp>,
}

impl SteadyPointTrain {
    pub fn from_orders(orders: Vec<u64>) -> Self {
        let average_periodicity = average_periodicity(&orders).ok();
        let quasi_ap = quasi_ap_check(&orders).ok();
        Self { orders, average_periodicity, quasi_ap }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

fn check_increasing(orders: &[u64]) -> Result<()> {
    if orders.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing);
    }
    Ok(())
}

/// (U(n) − U(1)) / (n − 1).
pub fn average_periodicity(orders: &[u64]) -> Result<f64> {
    if orders.len() < 2 {
        return Err(Error::TooFewOrders { need: 2, have: orders.len() });
    }
    check_increasing(orders)?;
    let span = orders[orders.len() - 1] - orders[0];
    Ok(span as f64 / (orders.len() - 1) as f64)
}

/// Verdict of the quasi-arithmetic-progression test: every gap between
/// consecutive orders must lie in [P − P^(1/3), P + P^(1/3)].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiAp {
    pub verdict: bool,
    pub mean: f64,
    pub band: (f64, f64),
    pub differences: Vec<u64>,
    /// Gaps falling outside the band.
    pub outliers: Vec<u64>,
}

pub fn quasi_ap_check(orders: &[u64]) -> Result<QuasiAp> {
    if orders.len() < 3 {
        return Err(Error::TooFewOrders { need: 3, have: orders.len() });
    }
    let mean = average_periodicity(orders)?;
    let half = mean.cbrt();
    let band = (mean - half, mean + half);
    let differences: Vec<u64> = orders.windows(2).map(|w| w[1] - w[0]).collect();
    let outliers: Vec<u64> = differences
        .iter()
        .copied()
        .filter(|d| (*d as f64) < band.0 || (*d as f64) > band.1)
        .collect();
    Ok(QuasiAp { verdict: outliers.is_empty(), mean, band, differences, outliers })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ChaosOptions {
    pub pair_count: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub shifts: Vec<f64>,
    pub lambda_threshold: f64,
    pub frac_tol: f64,
    pub seed: u64,
}

impl Default for ChaosOptions {
    fn default() -> Self {
        Self {
            pair_count: 20,
            horizon: 1_000_000,
            burn_in: 1_000,
            shifts: vec![0.0, 0.25, 0.5],
            lambda_threshold: 0.1,
            frac_tol: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats<T> {
    pub x: T,
    pub y: T,
    pub identical: bool,
    /// max |u_x(n) − u_y(n)| over burn_in < n ≤ horizon.
    pub max_spread: T,
    /// Per shift s: min |[u_x(n) + s] − [u_y(n) + s]| over the same range.
    pub min_frac_distance: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosModReport<T> {
    pub options: ChaosOptions,
    pub pairs: Vec<PairStats<T>>,
    /// Smallest per-pair lim-sup estimate over the distinct pairs.
    pub spread_estimate: T,
    /// Largest per-pair spread seen; useful for watching unbounded growth.
    pub max_spread_observed: T,
    /// Per shift: largest per-pair lim-inf estimate over the distinct pairs.
    pub min_frac_distance: Vec<T>,
    pub verdict: bool,
    pub note: &'static str,
}

const CHAOS_NOTE: &str = "finite-horizon estimate over sampled pairs; not a proof of chaos";

fn shifted_frac<T: Scalar>(frac: T, s: T) -> T {
    let v = frac + s;
    v - v.floor()
}

fn pair_stats<T: Scalar>(map: &BoundMap<T>, x: T, y: T, opts: &ChaosOptions) -> Result<PairStats<T>> {
    let shifts: Vec<T> = opts.shifts.iter().map(|s| T::lit(*s)).collect();
    let mut max_spread = T::zero();
    let mut min_frac = vec![T::infinity(); shifts.len()];
    let ox = orbit_terms(map, x, opts.horizon);
    let oy = orbit_terms(map, y, opts.horizon);
    for (n, (tx, ty)) in ox.zip(oy).enumerate() {
        let (tx, ty) = (tx?, ty?);
        if n < opts.burn_in {
            continue;
        }
        max_spread = max_spread.max(tx.to(&ty).abs());
        for (slot, s) in min_frac.iter_mut().zip(&shifts) {
            let d = (shifted_frac(tx.frac, *s) - shifted_frac(ty.frac, *s)).abs();
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(PairStats { x, y, identical: x == y, max_spread, min_frac_distance: min_frac })
}

/// Chaos-modulo-1 test on `pair_count` seeded pairs drawn from [0, 1)².
pub fn chaos_mod1_test<T: Scalar>(map: &BoundMap<T>, opts: &ChaosOptions) -> Result<ChaosModReport<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs: Vec<(T, T)> = (0..opts.pair_count)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            (T::lit(x), T::lit(y))
        })
        .collect();
    chaos_mod1_test_pairs(map, &pairs, opts)
}

/// Chaos-modulo-1 test on explicit initial pairs.
///
/// The definition asks for one λ and one shift s that work for every pair of
/// distinct initial values, so the aggregate spread is the minimum of the
/// per-pair spreads and the aggregate fractional distance for a shift is the
/// maximum of the per-pair minima. Identical pairs are reported but excluded.
pub fn chaos_mod1_test_pairs<T: Scalar>(
    map: &BoundMap<T>,
    pairs: &[(T, T)],
    opts: &ChaosOptions,
) -> Result<ChaosModReport<T>> {
    if opts.horizon <= opts.burn_in {
        return Err(Error::InvalidArgument("horizon must exceed burn_in".into()));
    }
    if opts.shifts.is_empty() || opts.shifts.iter().any(|s| !(*s > -1.0 && *s < 1.0)) {
        return Err(Error::InvalidArgument("shifts must be non-empty and lie in (-1, 1)".into()));
    }
    let stats: Vec<PairStats<T>> = pairs
        .par_iter()
        .map(|(x, y)| pair_stats(map, *x, *y, opts))
        .collect::<Result<_>>()?;

    let distinct: Vec<&PairStats<T>> = stats.iter().filter(|p| !p.identical).collect();
    let (spread_estimate, min_frac_distance) = if distinct.is_empty() {
        (T::zero(), vec![T::infinity(); opts.shifts.len()])
    } else {
        let spread = distinct.iter().map(|p| p.max_spread).fold(T::infinity(), T::min);
        let fracs = (0..opts.shifts.len())
            .map(|k| distinct.iter().map(|p| p.min_frac_distance[k]).fold(T::zero(), T::max))
            .collect();
        (spread, fracs)
    };
    let max_spread_observed = stats.iter().map(|p| p.max_spread).fold(T::zero(), T::max);
    let verdict = !distinct.is_empty()
        && spread_estimate >= T::lit(opts.lambda_threshold)
        && min_frac_distance.iter().any(|d| *d < T::lit(opts.frac_tol));
    Ok(ChaosModReport {
        options: opts.clone(),
        pairs: stats,
        spread_estimate,
        max_spread_observed,
        min_frac_distance,
        verdict,
        note: CHAOS_NOTE,
    })
}
