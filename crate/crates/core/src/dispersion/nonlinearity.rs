use crate::scalar::Scalar;

use super::{DispersionError, Result};

/// Monotone cubic Hermite interpolant (Fritsch–Carlson slopes, three-point
/// end slopes) on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSpline<T = f64> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Scalar> MonotoneSpline<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(DispersionError::InvalidParams(
                "spline needs at least two (x, y) pairs".into(),
            ));
        }
        if xs[0] != T::zero() || xs[n - 1] != T::one() {
            return Err(DispersionError::InvalidParams(
                "spline knots must span exactly [0, 1]".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DispersionError::InvalidParams(
                "spline knots must be strictly increasing".into(),
            ));
        }
        if ys.windows(2).any(|w| w[1] < w[0]) {
            return Err(DispersionError::InvalidParams(
                "spline values must be nondecreasing".into(),
            ));
        }
        let secant: Vec<T> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![T::zero(); n];
        if n == 2 {
            slopes[0] = secant[0];
            slopes[1] = secant[0];
        } else {
            let h = |i: usize| xs[i + 1] - xs[i];
            slopes[0] = end_slope(h(0), h(1), secant[0], secant[1]);
            slopes[n - 1] = end_slope(h(n - 2), h(n - 3), secant[n - 2], secant[n - 3]);
        }
        for i in 1..n - 1 {
            slopes[i] = if secant[i - 1] * secant[i] <= T::zero() {
                T::zero()
            } else {
                (secant[i - 1] + secant[i]) * T::lit(0.5)
            };
        }
        for i in 0..n - 1 {
            if secant[i] == T::zero() {
                slopes[i] = T::zero();
                slopes[i + 1] = T::zero();
                continue;
            }
            let a = slopes[i] / secant[i];
            let b = slopes[i + 1] / secant[i];
            let r2 = a * a + b * b;
            if r2 > T::lit(9.0) {
                let tau = T::lit(3.0) / r2.sqrt();
                slopes[i] = tau * a * secant[i];
                slopes[i + 1] = tau * b * secant[i];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn value(&self, x: T) -> T {
        let n = self.xs.len();
        if x <= T::zero() {
            return self.ys[0] + self.slopes[0] * x;
        }
        if x >= T::one() {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - T::one());
        }
        let i = match self.xs.binary_search_by(|k| k.partial_cmp(&x).expect("finite knot")) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn slope_at_zero(&self) -> T {
        self.slopes[0]
    }

    pub fn end_value(&self) -> T {
        self.ys[self.ys.len() - 1]
    }
}

/// One-sided three-point end slope, kept shape-preserving: zero when it
/// disagrees in sign with the end secant, at most three times that secant
/// when the two secants disagree.
fn end_slope<T: Scalar>(h0: T, h1: T, s0: T, s1: T) -> T {
    let m = ((T::lit(2.0) * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if m * s0 <= T::zero() {
        T::zero()
    } else if s0 * s1 <= T::zero() && m.abs() > T::lit(3.0) * s0.abs() {
        T::lit(3.0) * s0
    } else {
        m
    }
}

/// Reaction nonlinearity `g` or `h`. `cap` is the value required at 1
/// (`beta` for `g`, `alpha` for `h`).
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity<T = f64> {
    /// `slope0 x / (1 + (slope0/cap - 1) x)`; concave whenever `slope0 > cap`.
    Saturating { slope0: T, cap: T },
    /// `cap x`.
    Linear { cap: T },
    Custom(MonotoneSpline<T>),
}

impl<T: Scalar> Nonlinearity<T> {
    pub fn saturating(slope0: T, cap: T) -> Self {
        Nonlinearity::Saturating { slope0, cap }
    }

    pub fn value(&self, x: T) -> T {
        match self {
            Nonlinearity::Saturating { slope0, cap } => {
                *slope0 * x / (T::one() + (*slope0 / *cap - T::one()) * x)
            }
            Nonlinearity::Linear { cap } => *cap * x,
            Nonlinearity::Custom(s) => s.value(x),
        }
    }

    pub fn slope0(&self) -> T {
        match self {
            Nonlinearity::Saturating { slope0, .. } => *slope0,
            Nonlinearity::Linear { cap } => *cap,
            Nonlinearity::Custom(s) => s.slope_at_zero(),
        }
    }

    /// Richardson-extrapolated forward difference at 0.
    pub fn numerical_slope0(&self) -> T {
        let h = T::lit(1e-5);
        let d1 = (self.value(h) - self.value(T::zero())) / h;
        let half = h * T::lit(0.5);
        let d2 = (self.value(half) - self.value(T::zero())) / half;
        T::lit(2.0) * d2 - d1
    }
}
