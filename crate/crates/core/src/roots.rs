//! Bracketing root finders and a golden-section maximiser.
//!
//! Every sign pattern used by the crate is established analytically, so plain
//! bisection is used throughout: it cannot diverge and needs no derivative.

use crate::scalar::Scalar;

const MAX_BISECTIONS: usize = 400;
const MAX_GOLDEN: usize = 400;

/// Stopping rule for [`bisect`]: argument width or absolute residual.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub x: T,
    pub f: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(x: f64, f: f64) -> Self {
        Self {
            x: T::lit(x),
            f: T::lit(f),
        }
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self::new(1e-14, 0.0)
    }
}

/// Finds a sign change of `f` inside `[lo, hi]`.
///
/// The caller guarantees `f(lo)` and `f(hi)` have opposite signs (or one is
/// zero); `f_lo` is `f(lo)`, passed in so it is not evaluated twice.
pub fn bisect<T, E, F>(mut lo: T, mut hi: T, f_lo: T, mut f: F, tol: Tolerance<T>) -> Result<T, E>
where
    T: Scalar,
    F: FnMut(T) -> Result<T, E>,
{
    if f_lo == T::zero() {
        return Ok(lo);
    }
    let lo_positive = f_lo > T::zero();
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() || fm.abs() <= tol.f {
            return Ok(mid);
        }
        if (fm > T::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= tol.x * (T::one() + mid.abs()) {
            break;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Maximises a unimodal `f` on `[a, b]`; returns `(argmax, max)`.
pub fn golden_max<T, E, F>(mut a: T, mut b: T, mut f: F, x_tol: T) -> Result<(T, T), E>
where
    T: Scalar,
    F: FnMut(T) -> Result<T, E>,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..MAX_GOLDEN {
        if (b - a).abs() <= x_tol * (T::one() + c.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn bisect_finds_sqrt_two() {
        let f = |x: f64| Ok::<_, Infallible>(x * x - 2.0);
        let r = bisect(1.0, 2.0, -1.0, f, Tolerance::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_accepts_reversed_bracket() {
        let f = |x: f64| Ok::<_, Infallible>(x.cos());
        let r = bisect(3.0, 0.0, -0.989_992_496_600_445_4, f, Tolerance::default()).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn golden_max_of_parabola() {
        let f = |x: f64| Ok::<_, Infallible>(-(x - 0.3) * (x - 0.3) + 4.0);
        let (x, v) = golden_max(-2.0, 5.0, f, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 4.0).abs() < 1e-14);
    }
}
