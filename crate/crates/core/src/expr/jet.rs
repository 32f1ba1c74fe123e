use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value and first three derivatives of a function at a point.
///
/// Components are true derivatives (`v2` is f'', not f''/2), so the
/// Schwarzian can be assembled from them directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet3<T> {
    pub v0: T,
    pub v1: T,
    pub v2: T,
    pub v3: T,
}

impl<T: Scalar> Jet3<T> {
    pub fn new(v0: T, v1: T, v2: T, v3: T) -> Self {
        Self { v0, v1, v2, v3 }
    }

    pub fn constant(c: T) -> Self {
        Self::new(c, T::zero(), T::zero(), T::zero())
    }

    /// The independent variable itself: (x, 1, 0, 0).
    pub fn variable(x: T) -> Self {
        Self::new(x, T::one(), T::zero(), T::zero())
    }

    pub fn is_constant(&self) -> bool {
        self.v1 == T::zero() && self.v2 == T::zero() && self.v3 == T::zero()
    }

    pub fn is_finite(&self) -> bool {
        self.v0.is_finite() && self.v1.is_finite() && self.v2.is_finite() && self.v3.is_finite()
    }

    /// Chain rule for `phi(self)` given phi and its first three derivatives
    /// evaluated at `self.v0` (Faà di Bruno to third order).
    pub fn compose(&self, phi: [T; 4]) -> Self {
        let [p0, p1, p2, p3] = phi;
        let (g1, g2, g3) = (self.v1, self.v2, self.v3);
        let three = T::lit(3.0);
        Self::new(
            p0,
            p1 * g1,
            p2 * g1 * g1 + p1 * g2,
            p3 * g1 * g1 * g1 + three * p2 * g1 * g2 + p1 * g3,
        )
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.v0.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.v0.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Self {
        let e = self.v0.exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Self> {
        let y = self.v0;
        if y <= T::zero() {
            return Err(Error::Domain(format!("logarithm of non-positive value {y}")));
        }
        let r = y.recip();
        Ok(self.compose([y.ln(), r, -r * r, T::lit(2.0) * r * r * r]))
    }

    pub fn recip(&self) -> Result<Self> {
        let y = self.v0;
        if y == T::zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let r = y.recip();
        let r2 = r * r;
        Ok(self.compose([r, -r2, T::lit(2.0) * r2 * r, T::lit(-6.0) * r2 * r2]))
    }

    /// `self ^ c` for an exponent that does not depend on x.
    pub fn powc(&self, c: T) -> Result<Self> {
        let y = self.v0;
        let integral = c.fract() == T::zero();
        if y < T::zero() && !integral {
            return Err(Error::Domain(format!("negative base {y} with fractional exponent {c}")));
        }
        if y == T::zero() && c < T::zero() {
            return Err(Error::Domain("0 raised to a negative power".into()));
        }
        // Falling-factorial coefficients c, c(c-1), c(c-1)(c-2); a zero
        // coefficient kills the term even where y^(c-k) diverges.
        let mut phi = [y.powf(c), T::zero(), T::zero(), T::zero()];
        let mut coeff = T::one();
        for (k, slot) in phi.iter_mut().enumerate().skip(1) {
            coeff = coeff * (c - T::from_count(k - 1));
            *slot = if coeff == T::zero() {
                T::zero()
            } else {
                coeff * powk(y, c - T::from_count(k), integral)
            };
        }
        Ok(self.compose(phi))
    }

    /// General power `self ^ exponent`; a non-constant exponent goes through
    /// exp(exponent * ln(self)) and needs a strictly positive base.
    pub fn pow(&self, exponent: &Self) -> Result<Self> {
        if exponent.is_constant() {
            return self.powc(exponent.v0);
        }
        if self.v0 <= T::zero() {
            return Err(Error::Domain(format!(
                "non-positive base {} with x-dependent exponent",
                self.v0
            )));
        }
        Ok((*exponent * self.ln()?).exp())
    }
}

fn powk<T: Scalar>(y: T, e: T, integral: bool) -> T {
    if integral {
        match e.to_i32() {
            Some(n) => y.powi(n),
            None => y.powf(e),
        }
    } else {
        y.powf(e)
    }
}

impl<T: Scalar> Add for Jet3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v0 + o.v0, self.v1 + o.v1, self.v2 + o.v2, self.v3 + o.v3)
    }
}

impl<T: Scalar> Sub for Jet3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v0 - o.v0, self.v1 - o.v1, self.v2 - o.v2, self.v3 - o.v3)
    }
}

impl<T: Scalar> Neg for Jet3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v0, -self.v1, -self.v2, -self.v3)
    }
}

/// Leibniz rule.
impl<T: Scalar> Mul for Jet3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let three = T::lit(3.0);
        let two = T::lit(2.0);
        Self::new(
            self.v0 * o.v0,
            self.v1 * o.v0 + self.v0 * o.v1,
            self.v2 * o.v0 + two * self.v1 * o.v1 + self.v0 * o.v2,
            self.v3 * o.v0 + three * self.v2 * o.v1 + three * self.v1 * o.v2 + self.v0 * o.v3,
        )
    }
}

/// Panics on a zero divisor; use [`Jet3::recip`] for the checked form.
impl<T: Scalar> Div for Jet3<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip().expect("jet division by zero")
    }
}
