//! Error function for generic scalars.
//!
//! Power series `erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!` below
//! |x| = 3 (all terms positive, no cancellation) and a Lentz continued fraction
//! for `erfc` above. Both converge to full working precision.

use crate::scalar::Scalar;

const SERIES_LIMIT: f64 = 3.0;

pub fn erf<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        return -erf(-x);
    }
    if x <= T::lit(SERIES_LIMIT) {
        erf_series(x)
    } else {
        T::one() - erfc_cf(x)
    }
}

pub fn erfc<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x <= T::lit(SERIES_LIMIT) {
        T::one() - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

fn erf_series<T: Scalar>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term = term * two_x2 / T::from_usize_lossy(2 * n + 1);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::lit(2.0) / T::PI().sqrt() * (-x * x).exp() * sum
}

/// Modified Lentz evaluation of `1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_cf<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in 1..500 {
        let a = T::from_usize_lossy(n) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}
