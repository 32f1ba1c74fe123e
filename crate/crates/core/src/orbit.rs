//! Orbit iteration with an exact integer/fractional split of every term.
//!
//! Terms are stored as `(int_part, frac)` with `frac ∈ [0, 1)`. Differences
//! between terms are formed from the split representation, so second
//! differences of orbits that have climbed to 10⁷ keep the precision of the
//! fractional parts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::BoundMap;
use crate::scalar::Scalar;

/// Orbit values at or beyond this magnitude are treated as divergent, since
/// their integer parts no longer fit the split representation.
const INT_RANGE: f64 = 9.0e18;

/// Split a finite value into `(floor(value), value − floor(value))`.
pub fn decompose<T: Scalar>(value: T) -> (i64, T) {
    let fl = value.floor();
    let mut int_part = fl.to_i64().expect("integer part fits in i64");
    let mut frac = value - fl;
    if frac >= T::one() {
        int_part += 1;
        frac = T::zero();
    }
    (int_part, frac)
}

/// One orbit term in split form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term<T> {
    pub int_part: i64,
    pub frac: T,
}

impl<T: Scalar> Term<T> {
    pub fn from_value(value: T) -> Self {
        let (int_part, frac) = decompose(value);
        Self { int_part, frac }
    }

    pub fn value(&self) -> T {
        T::from_int(self.int_part) + self.frac
    }

    /// `other − self`, formed without materialising either full value.
    #[inline]
    pub fn to(&self, other: &Self) -> T {
        T::from_int(other.int_part - self.int_part) + (other.frac - self.frac)
    }
}

/// Materialised orbit u(1..N), stored 0-based: `term(0)` is u(1) = x0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSeries<T> {
    pub x0: T,
    pub alpha: T,
    pub beta: T,
    terms: Vec<Term<T>>,
}

impl<T: Scalar> OrbitSeries<T> {
    pub fn from_terms(x0: T, alpha: T, beta: T, terms: Vec<Term<T>>) -> Self {
        Self { x0, alpha, beta, terms }
    }

    /// Series from plain values (ingested tables, synthetic test data).
    pub fn from_values(values: &[T]) -> Self {
        let terms: Vec<_> = values.iter().map(|v| Term::from_value(*v)).collect();
        let x0 = values.first().copied().unwrap_or_else(T::zero);
        Self { x0, alpha: T::zero(), beta: T::zero(), terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> Term<T> {
        self.terms[i]
    }

    pub fn value(&self, i: usize) -> T {
        self.terms[i].value()
    }

    pub fn values(&self) -> Vec<T> {
        self.terms.iter().map(Term::value).collect()
    }

    /// u(j) − u(i), 0-based.
    #[inline]
    pub fn advance(&self, i: usize, j: usize) -> T {
        self.terms[i].to(&self.terms[j])
    }

    /// First differences u(n+1) − u(n).
    pub fn delta1(&self) -> Vec<T> {
        self.terms.windows(2).map(|w| w[0].to(&w[1])).collect()
    }

    /// Sub-series of the first `n` terms.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            x0: self.x0,
            alpha: self.alpha,
            beta: self.beta,
            terms: self.terms[..n.min(self.terms.len())].to_vec(),
        }
    }
}

/// Streaming orbit of a bound map.
///
/// Maps with a known lift period L are iterated on [0, L) and the removed
/// multiples of L are tracked as an integer, which is exact because
/// F(x + kL) = F(x) + kL. A failing step is reported as the item after the
/// last good term.
pub struct OrbitIter<'a, T> {
    map: &'a BoundMap<T>,
    lift: Option<(i64, T)>,
    turns: i64,
    x: T,
    index: usize,
    remaining: usize,
    pending: Option<Error>,
}

impl<'a, T: Scalar> OrbitIter<'a, T> {
    pub fn new(map: &'a BoundMap<T>, x0: T, n: usize) -> Self {
        let lift = map.lift_period().map(|l| (i64::from(l), T::from_int(i64::from(l))));
        let (turns, x) = match lift {
            Some((_, lt)) => {
                let k = (x0 / lt).floor();
                (k.to_i64().expect("turn count fits in i64"), x0 - k * lt)
            }
            None => (0, x0),
        };
        Self { map, lift, turns, x, index: 0, remaining: n, pending: None }
    }

    fn current(&self) -> Term<T> {
        match self.lift {
            Some((l, _)) => {
                let (i, f) = decompose(self.x);
                Term { int_part: self.turns * l + i, frac: f }
            }
            None => Term::from_value(self.x),
        }
    }

    fn step(&mut self) -> Result<()> {
        let y = self.map.eval(self.x)?;
        if !(y.abs() < T::lit(INT_RANGE)) {
            return Err(Error::NonFinite { what: format!("{y} outside the representable range") });
        }
        match self.lift {
            Some((_, lt)) => {
                let k = (y / lt).floor();
                let mut x = y - k * lt;
                let mut turns = self.turns + k.to_i64().expect("turn count fits in i64");
                if x >= lt {
                    x = x - lt;
                    turns += 1;
                }
                self.x = x;
                self.turns = turns;
            }
            None => self.x = y,
        }
        Ok(())
    }
}

impl<T: Scalar> Iterator for OrbitIter<'_, T> {
    type Item = Result<Term<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        if let Some(e) = self.pending.take() {
            self.remaining = 0;
            return Some(Err(e));
        }
        let here = self.current();
        self.remaining -= 1;
        self.index += 1;
        if self.remaining > 0 {
            match self.step() {
                Err(e) => {
                    self.pending = Some(match e {
                        Error::NonFinite { what } => Error::NonFinite {
                            what: format!("{what} (orbit index {})", self.index + 1),
                        },
                        other => other,
                    })
                }
                Ok(()) => {
                    let next = self.current();
                    if here.to(&next) <= T::zero() {
                        self.pending = Some(Error::NotAscending(format!(
                            "u({}) = {} is not above u({}) = {}",
                            self.index + 1,
                            next.value(),
                            self.index,
                            here.value()
                        )));
                    }
                }
            }
        }
        Some(Ok(here))
    }
}

/// Stream of the first `n` terms starting at `x0`.
pub fn orbit_terms<T: Scalar>(map: &BoundMap<T>, x0: T, n: usize) -> OrbitIter<'_, T> {
    OrbitIter::new(map, x0, n)
}

/// Materialise the first `n` terms starting at `x0`.
pub fn iterate<T: Scalar>(map: &BoundMap<T>, x0: T, n: usize) -> Result<OrbitSeries<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("orbit length must be at least 1".into()));
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite { what: "initial value".into() });
    }
    let terms = OrbitIter::new(map, x0, n).collect::<Result<Vec<_>>>()?;
    Ok(OrbitSeries::from_terms(x0, map.alpha, map.beta, terms))
}

/// First differences and phase-split second differences for period `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffColumns<T> {
    pub delta1: Vec<T>,
    /// `delta2_by_phase[j][k]` = u(j+p(k+2)) − 2u(j+p(k+1)) + u(j+pk), 0-based.
    pub delta2_by_phase: Vec<Vec<T>>,
}

pub fn diff_columns<T: Scalar>(series: &OrbitSeries<T>, p: usize) -> Result<DiffColumns<T>> {
    if p == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    if series.len() < 3 * p {
        return Err(Error::TooShort { need: 3 * p, have: series.len() });
    }
    let delta2_by_phase = (0..p)
        .map(|j| {
            (j..)
                .step_by(p)
                .take_while(|i| i + 2 * p < series.len())
                .map(|i| series.advance(i + p, i + 2 * p) - series.advance(i, i + p))
                .collect()
        })
        .collect();
    Ok(DiffColumns { delta1: series.delta1(), delta2_by_phase })
}
