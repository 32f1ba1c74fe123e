//! Streaming segmentation of an orbit into pseudo-helix segments.
//!
//! For a period p the scanner watches, per base index i,
//!
//! * adv(i) = u(i+p) − u(i), which must stay within `advance_tol` of one
//!   integer M for the whole run (the integer-part jumps of order p repeat),
//! * Δ₂(i) = adv(i+p) − adv(i), which must strictly decrease along every
//!   residue class mod p (up to `slack`).
//!
//! A maximal run of such indices is a segment when it is long enough and
//! every residue class changes sign from positive to negative inside it.
//! The first sign change is the steady point.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::orbit::Term;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentOptions {
    /// Minimum run length, in multiples of p.
    pub min_len_factor: usize,
    /// Tolerance on the strict decrease of Δ₂.
    pub slack: f64,
    /// Allowed distance of adv(i) from the run's integer step.
    pub advance_tol: f64,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self { min_len_factor: 5, slack: 1e-15, advance_tol: 0.5 }
    }
}

/// One pseudo-helix segment, with 1-based orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoHelixSegment {
    /// First order of the segment.
    pub n0: u64,
    /// Number of orders after n0 covered by the segment.
    pub m: u64,
    pub period_p: usize,
    /// k with steady order n0 + k·p.
    pub steady_point_k0: u64,
    /// Steady order and the p − 1 orders following it.
    pub steady_orders: Vec<u64>,
    /// Integer step M of the segment.
    pub modulo_step: i64,
}

impl PseudoHelixSegment {
    pub fn steady_order(&self) -> u64 {
        self.steady_orders[0]
    }

    pub fn end(&self) -> u64 {
        self.n0 + self.m
    }
}

struct Run {
    start: usize,
    last: usize,
    step: i64,
    /// Smallest Δ₂ index with a +/− sign change, per phase.
    transitions: Vec<Option<usize>>,
}

/// Push-based scanner; feed terms in order and collect finished segments.
pub struct SegmentScanner<T> {
    p: usize,
    opts: SegmentOptions,
    slack: T,
    tol: T,
    /// 1-based order of the first pushed term.
    origin: u64,
    window: VecDeque<Term<T>>,
    pushed: usize,
    run: Option<Run>,
    prev_end: Option<usize>,
    segments: Vec<PseudoHelixSegment>,
    windows_without_steady_point: usize,
}

impl<T: Scalar> SegmentScanner<T> {
    /// `origin` is the 1-based order of the first term that will be pushed.
    pub fn new(p: usize, opts: SegmentOptions, origin: u64) -> Self {
        assert!(p >= 1, "period must be at least 1");
        Self {
            p,
            opts,
            slack: T::lit(opts.slack),
            tol: T::lit(opts.advance_tol),
            origin,
            window: VecDeque::with_capacity(3 * p + 1),
            pushed: 0,
            run: None,
            prev_end: None,
            segments: Vec::new(),
            windows_without_steady_point: 0,
        }
    }

    pub fn push(&mut self, term: Term<T>) {
        self.window.push_back(term);
        self.pushed += 1;
        if self.window.len() > 3 * self.p + 1 {
            self.window.pop_front();
        }
        if self.window.len() == 3 * self.p + 1 {
            self.examine(self.pushed - 1 - 3 * self.p);
        }
    }

    pub fn segments(&self) -> &[PseudoHelixSegment] {
        &self.segments
    }

    /// Long enough runs that never produced a steady point in every phase.
    pub fn windows_without_steady_point(&self) -> usize {
        self.windows_without_steady_point
    }

    /// Close any open run and return the segments found.
    pub fn finish(mut self) -> (Vec<PseudoHelixSegment>, usize) {
        self.close_run();
        (self.segments, self.windows_without_steady_point)
    }

    fn examine(&mut self, i: usize) {
        let p = self.p;
        let w = &self.window;
        let adv = [w[0].to(&w[p]), w[p].to(&w[2 * p]), w[2 * p].to(&w[3 * p])];
        let d2 = [adv[1] - adv[0], adv[2] - adv[1]];
        let decreasing = d2[1] < d2[0] + self.slack;

        let tol = self.tol;
        let near = |step: i64| adv.iter().all(|a| (*a - T::from_int(step)).abs() < tol);
        let fresh_step = adv[0].round().to_i64().unwrap_or(i64::MIN);

        let continues = match &self.run {
            Some(run) => decreasing && near(run.step),
            None => false,
        };
        if continues {
            self.extend_run(i, d2);
            return;
        }
        let fresh = decreasing && near(fresh_step);
        self.close_run();
        if fresh {
            self.run = Some(Run { start: i, last: i, step: fresh_step, transitions: vec![None; p] });
            self.note_transition(i, d2);
        }
    }

    fn extend_run(&mut self, i: usize, d2: [T; 2]) {
        if let Some(run) = &mut self.run {
            run.last = i;
        }
        self.note_transition(i, d2);
    }

    fn note_transition(&mut self, i: usize, d2: [T; 2]) {
        if d2[0] > T::zero() && d2[1] < T::zero() {
            let q = i + self.p;
            let run = self.run.as_mut().expect("open run");
            let slot = &mut run.transitions[q % self.p];
            if slot.is_none() {
                *slot = Some(q);
            }
        }
    }

    fn close_run(&mut self) {
        let Some(run) = self.run.take() else { return };
        let p = self.p;
        let len = run.last - run.start + 1;
        if len < self.opts.min_len_factor * p {
            return;
        }
        let steady = match run.transitions.iter().copied().collect::<Option<Vec<_>>>() {
            Some(all) => *all.iter().min().expect("p >= 1"),
            None => {
                self.windows_without_steady_point += 1;
                return;
            }
        };
        let start = match self.prev_end {
            Some(e) if e >= run.start => e + 1,
            _ => run.start,
        };
        let end = run.last + p;
        self.prev_end = Some(end);
        let order = |idx: usize| self.origin + idx as u64;
        self.segments.push(PseudoHelixSegment {
            n0: order(start),
            m: (end - start) as u64,
            period_p: p,
            steady_point_k0: ((steady - start) / p) as u64,
            steady_orders: (steady..steady + p).map(order).collect(),
            modulo_step: run.step,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(values: &[f64], p: usize, opts: SegmentOptions) -> (Vec<PseudoHelixSegment>, usize) {
        let mut s = SegmentScanner::<f64>::new(p, opts, 1);
        for v in values {
            s.push(Term::from_value(*v));
        }
        s.finish()
    }

    /// u(n) = n·M + c·(n − t)³ sampled before and after an inflection at t:
    /// Δ₂ of a cubic is linear and changes sign exactly once.
    fn cubic(n: usize, step: f64, c: f64, t: f64) -> Vec<f64> {
        (0..n).map(|i| 0.1 + step * i as f64 - c * (i as f64 - t).powi(3)).collect()
    }

    #[test]
    fn single_inflection_p1() {
        let u = cubic(60, 1.0, 1e-6, 30.5);
        let (segs, _) = scan(&u, 1, SegmentOptions::default());
        assert_eq!(segs.len(), 1);
        let s = &segs[0];
        assert_eq!(s.n0, 1);
        // Base indices 0..=56 qualify; Δ₂ positions run to 57.
        assert_eq!(s.m, 57);
        assert_eq!(s.modulo_step, 1);
        // Δ₂(i) = −6c(i − 29.5): positive up to 29, negative from 30 (0-based),
        // so the steady point is order 31.
        assert_eq!(s.steady_orders, vec![31]);
        assert_eq!(s.steady_point_k0, 30);
    }

    #[test]
    fn arithmetic_series_has_no_segment() {
        let u: Vec<f64> = (0..200).map(|i| 0.25 + 1.75 * i as f64).collect();
        let (segs, without) = scan(&u, 1, SegmentOptions::default());
        assert!(segs.is_empty());
        // Constant Δ₂ passes the slack test but never changes sign.
        assert_eq!(without, 1);
    }

    #[test]
    fn convex_run_counts_as_window_without_steady_point() {
        let u: Vec<f64> = (0..100).map(|i| i as f64 + 1e-6 * (i as f64).powi(3)).collect();
        let (segs, without) = scan(&u, 1, SegmentOptions::default());
        assert!(segs.is_empty());
        assert_eq!(without, 0, "increasing Δ₂ never forms a run");
        let u: Vec<f64> = (0..100).map(|i| i as f64 - 1e-5 * (i as f64).powi(3)).collect();
        let (segs, without) = scan(&u, 1, SegmentOptions::default());
        assert!(segs.is_empty());
        assert_eq!(without, 1, "concave-only run has no sign change");
    }

    #[test]
    fn short_run_is_dropped() {
        let u = cubic(7, 1.0, 1e-6, 3.5);
        let (segs, _) = scan(&u, 1, SegmentOptions::default());
        assert!(segs.is_empty());
    }

    #[test]
    fn period_two_interleaved() {
        // Two interleaved cubics with step 3 per two terms and different offsets.
        let n = 80;
        let u: Vec<f64> = (0..n)
            .map(|i| {
                let k = (i / 2) as f64;
                let off = if i % 2 == 0 { 0.1 } else { 1.6 };
                off + 3.0 * k - 1e-6 * (k - 20.5).powi(3)
            })
            .collect();
        let (segs, _) = scan(&u, 2, SegmentOptions::default());
        assert_eq!(segs.len(), 1);
        let s = &segs[0];
        assert_eq!(s.period_p, 2);
        assert_eq!(s.modulo_step, 3);
        assert_eq!(s.steady_orders.len(), 2);
        assert_eq!(s.steady_orders[1], s.steady_orders[0] + 1);
        // Per phase Δ₂ at pair index k is −6c(k − 19.5): first negative at k = 20,
        // which is 0-based index 40 in phase 0.
        assert_eq!(s.steady_orders[0], 41);
    }

    #[test]
    fn origin_shifts_orders() {
        let u = cubic(60, 1.0, 1e-6, 30.5);
        let mut s = SegmentScanner::<f64>::new(1, SegmentOptions::default(), 1001);
        for v in &u {
            s.push(Term::from_value(*v));
        }
        let (segs, _) = s.finish();
        assert_eq!(segs[0].steady_orders, vec![1031]);
        assert_eq!(segs[0].n0, 1001);
    }
}
