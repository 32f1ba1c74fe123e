//! Named map families, parameter binding and Schwarzian profiles.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_map_expr, Jet3, MapExpr, Param};
use crate::scalar::Scalar;

/// Below this |F'| the Schwarzian quotient is reported as singular.
pub const DEFAULT_EPS_DERIV: f64 = 1e-9;

/// Identifiers accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = [
    "sine",
    "phi_nested",
    "psi_nested",
    "composite",
    "phi_positive_schwarzian",
];

/// Every built-in satisfies F(x + 2) = F(x) + 2.
const BUILTIN_LIFT_PERIOD: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub name: String,
    pub expr: MapExpr,
    pub free_params: BTreeSet<Param>,
    pub fixed_params: BTreeMap<Param, f64>,
    /// Integer L with F(x + L) = F(x) + L, when known. Orbits of such maps
    /// are iterated on [0, L) with the lost turns tracked exactly.
    pub lift_period: Option<u32>,
}

/// Built-in family by name.
pub fn builtin(name: &str) -> Result<FamilySpec> {
    let text = match name {
        "sine" => "alpha*sin(pi*x)+x+beta",
        "phi_nested" => "alpha*sin(sin(0.5*pi*x)^2)+x+beta",
        "psi_nested" => "alpha*sin(sin(pi*x))+x+beta",
        "composite" => "0.31830988618379*sin(pi*(0.3*sin(pi*x)+x))+0.3*sin(pi*x)+x+beta",
        "phi_positive_schwarzian" => "alpha*0.5*sin(0.5*pi*sin(pi*x))+x+beta",
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    FamilySpec::custom(name, text, Some(BUILTIN_LIFT_PERIOD))
}

impl FamilySpec {
    /// Family from expression text; every referenced parameter starts free.
    pub fn custom(name: &str, text: &str, lift_period: Option<u32>) -> Result<Self> {
        if lift_period == Some(0) {
            return Err(Error::InvalidArgument("lift period must be positive".into()));
        }
        let expr = parse_map_expr(text)?;
        let free_params = expr.params();
        Ok(Self {
            name: name.to_string(),
            expr,
            free_params,
            fixed_params: BTreeMap::new(),
            lift_period,
        })
    }

    /// Freeze a parameter at a value; it is then no longer required by [`bind`](Self::bind).
    pub fn fix(mut self, param: Param, value: f64) -> Self {
        if self.free_params.remove(&param) {
            self.fixed_params.insert(param, value);
        }
        self
    }

    pub fn references(&self, param: Param) -> bool {
        self.free_params.contains(&param) || self.fixed_params.contains_key(&param)
    }

    /// Bind parameter values, producing an evaluable single-variable map.
    pub fn bind<T: Scalar>(&self, alpha: Option<T>, beta: Option<T>) -> Result<BoundMap<T>> {
        let resolve = |p: Param, given: Option<T>| -> Result<T> {
            if let Some(v) = self.fixed_params.get(&p) {
                return Ok(T::lit(*v));
            }
            if self.free_params.contains(&p) {
                return given.ok_or(Error::MissingParameter(p.name()));
            }
            Ok(given.unwrap_or_else(T::zero))
        };
        Ok(BoundMap {
            family: self.clone(),
            alpha: resolve(Param::Alpha, alpha)?,
            beta: resolve(Param::Beta, beta)?,
        })
    }
}

/// Family with concrete parameter values.
#[derive(Debug, Clone, Serialize)]
pub struct BoundMap<T> {
    pub family: FamilySpec,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> BoundMap<T> {
    #[inline]
    pub fn eval(&self, x: T) -> Result<T> {
        self.family.expr.eval(x, self.alpha, self.beta)
    }

    pub fn jet(&self, x: T) -> Result<Jet3<T>> {
        self.family.expr.eval_jet(x, self.alpha, self.beta)
    }

    pub fn lift_period(&self) -> Option<u32> {
        self.family.lift_period
    }

    /// F∘F as a map of the same parameters.
    pub fn iterate_twice(&self) -> BoundMap<T> {
        let mut family = self.family.clone();
        family.expr = family.expr.compose(&self.family.expr);
        family.name = format!("{}∘{}", self.family.name, self.family.name);
        BoundMap { family, alpha: self.alpha, beta: self.beta }
    }
}

fn grid<T: Scalar>(lo: T, hi: T, samples: usize) -> impl Iterator<Item = T> {
    let step = (hi - lo) / T::from_count(samples - 1);
    (0..samples).map(move |i| if i + 1 == samples { hi } else { lo + step * T::from_count(i) })
}

fn check_grid<T: Scalar>(lo: T, hi: T, samples: usize) -> Result<()> {
    if !(lo < hi) || samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need lo < hi and at least 2 samples (got [{lo}, {hi}], {samples})"
        )));
    }
    Ok(())
}

/// True iff F(x) − x > 0 on every grid sample of [x_lo, x_hi].
pub fn validate_ascending<T: Scalar>(map: &BoundMap<T>, x_lo: T, x_hi: T, samples: usize) -> Result<bool> {
    check_grid(x_lo, x_hi, samples)?;
    for x in grid(x_lo, x_hi, samples) {
        if map.eval(x)? - x <= T::zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Schwarzian F'''/F' − 3/2 (F''/F')² of a jet; `None` when |F'| < eps.
pub fn schwarzian_from_jet<T: Scalar>(j: &Jet3<T>, eps_deriv: T) -> Option<T> {
    if j.v1.abs() < eps_deriv {
        return None;
    }
    let q = j.v2 / j.v1;
    Some(j.v3 / j.v1 - T::lit(1.5) * q * q)
}

pub fn schwarzian_at<T: Scalar>(map: &BoundMap<T>, x: T) -> Result<Option<T>> {
    schwarzian_at_eps(map, x, T::lit(DEFAULT_EPS_DERIV))
}

pub fn schwarzian_at_eps<T: Scalar>(map: &BoundMap<T>, x: T, eps_deriv: T) -> Result<Option<T>> {
    Ok(schwarzian_from_jet(&map.jet(x)?, eps_deriv))
}

#[derive(Debug, Clone, Serialize)]
pub struct SchwarzianReport<T> {
    pub grid: Vec<T>,
    /// `None` marks a singular sample (|F'| below the threshold).
    pub values: Vec<Option<T>>,
    pub all_negative: bool,
    pub first_positive_sample: Option<T>,
    pub singular_count: usize,
}

pub fn schwarzian_scan<T: Scalar>(
    map: &BoundMap<T>,
    x_lo: T,
    x_hi: T,
    samples: usize,
) -> Result<SchwarzianReport<T>> {
    check_grid(x_lo, x_hi, samples)?;
    let eps = T::lit(DEFAULT_EPS_DERIV);
    let mut report = SchwarzianReport {
        grid: Vec::with_capacity(samples),
        values: Vec::with_capacity(samples),
        all_negative: true,
        first_positive_sample: None,
        singular_count: 0,
    };
    let mut regular = 0usize;
    for x in grid(x_lo, x_hi, samples) {
        let s = schwarzian_at_eps(map, x, eps)?;
        match s {
            None => report.singular_count += 1,
            Some(v) => {
                regular += 1;
                if v >= T::zero() {
                    report.all_negative = false;
                }
                if v > T::zero() && report.first_positive_sample.is_none() {
                    report.first_positive_sample = Some(x);
                }
            }
        }
        report.grid.push(x);
        report.values.push(s);
    }
    if regular == 0 {
        report.all_negative = false;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_expressions() {
        let sine = builtin("sine").unwrap();
        assert_eq!(sine.expr, parse_map_expr("alpha*sin(pi*x)+x+beta").unwrap());
        let comp = builtin("composite").unwrap();
        assert!(comp.expr.source_text().starts_with("0.31830988618379*"));
        assert_eq!(comp.free_params.iter().copied().collect::<Vec<_>>(), vec![Param::Beta]);
        let phi = builtin("phi_positive_schwarzian").unwrap();
        assert_eq!(
            phi.expr,
            parse_map_expr("alpha*0.5*sin(0.5*pi*sin(pi*x))+x+beta").unwrap()
        );
        assert!(matches!(builtin("logistic"), Err(Error::UnknownFamily(_))));
        for name in BUILTIN_NAMES {
            let f = builtin(name).unwrap();
            let all: BTreeSet<_> = f.free_params.iter().chain(f.fixed_params.keys()).copied().collect();
            assert_eq!(all, f.expr.params());
        }
    }

    #[test]
    fn bind_and_evaluate() {
        let m = builtin("sine").unwrap().bind::<f64>(Some(0.4), Some(1.0)).unwrap();
        assert!((m.eval(0.5).unwrap() - 1.9).abs() < 1e-15);
        assert!((m.eval(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            builtin("sine").unwrap().bind::<f64>(Some(0.4), None),
            Err(Error::MissingParameter("beta"))
        ));
        let fixed = builtin("sine").unwrap().fix(Param::Alpha, 0.4);
        let m = fixed.bind::<f64>(None, Some(1.0)).unwrap();
        assert_eq!(m.alpha, 0.4);
    }

    #[test]
    fn phi_nested_value() {
        // 1.2 * sin(sin^2(pi/4)) + 0.5 + 0.8 with sin(0.5) = 0.479425538604203.
        let m = builtin("phi_nested").unwrap().bind::<f64>(Some(1.2), Some(0.8)).unwrap();
        let oracle = 1.2 * 0.479_425_538_604_203 + 0.5 + 0.8;
        assert!((m.eval(0.5).unwrap() - oracle).abs() < 1e-14);
        assert!((m.eval(0.5).unwrap() - 1.875_310_646_325).abs() < 1e-12);
    }

    #[test]
    fn ascending_validation() {
        let sine = builtin("sine").unwrap();
        let ok = sine.bind::<f64>(Some(0.4), Some(1.5)).unwrap();
        assert!(validate_ascending(&ok, 0.0, 2.0, 10_000).unwrap());
        let bad = sine.bind::<f64>(Some(0.4), Some(0.3)).unwrap();
        assert!(!validate_ascending(&bad, 0.0, 2.0, 10_000).unwrap());
        let shift = FamilySpec::custom("shift", "x+1", None).unwrap().bind::<f64>(None, None).unwrap();
        assert!(validate_ascending(&shift, 0.0, 2.0, 100).unwrap());
        assert!(validate_ascending(&shift, 2.0, 0.0, 100).is_err());
        assert!(validate_ascending(&shift, 0.0, 2.0, 1).is_err());
    }

    #[test]
    fn sine_schwarzian_at_half() {
        // F' = 1, F'' = -0.4 pi^2, F''' = 0  =>  S = -1.5 (0.4 pi^2)^2 = -0.24 pi^4.
        let m = builtin("sine").unwrap().bind::<f64>(Some(0.4), Some(1.3)).unwrap();
        let s = schwarzian_at(&m, 0.5).unwrap().unwrap();
        let pi = std::f64::consts::PI;
        assert!((s + 0.24 * pi.powi(4)).abs() < 1e-12);
        assert!((s + 23.378_181_85).abs() < 1e-7);
    }

    #[test]
    fn affine_schwarzian_is_zero() {
        let m = FamilySpec::custom("aff", "x+7", None).unwrap().bind::<f64>(None, None).unwrap();
        assert_eq!(schwarzian_at(&m, 3.3).unwrap(), Some(0.0));
        let r = schwarzian_scan(&m, 0.0, 2.0, 50).unwrap();
        assert!(r.values.iter().all(|v| *v == Some(0.0)));
        assert!(!r.all_negative);
        assert!(r.first_positive_sample.is_none());
    }

    #[test]
    fn singular_at_critical_point() {
        let m = builtin("sine").unwrap().bind::<f64>(Some(0.4), Some(1.3)).unwrap();
        // Bisection oracle for 1 + 0.4 pi cos(pi x) = 0 on [0.5, 1].
        let fp = |x: f64| 1.0 + 0.4 * std::f64::consts::PI * (std::f64::consts::PI * x).cos();
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fp(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_eq!(schwarzian_at(&m, 0.5 * (lo + hi)).unwrap(), None);
    }
}
