use crate::scalar::Scalar;

use super::{DispersionError, Nonlinearity, Result};

const CHECK_POINTS: usize = 1000;
const CAP_TOL: f64 = 1e-10;
const SLOPE_TOL: f64 = 1e-8;

/// The four numbers the linearisation at zero depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates<T = f64> {
    pub alpha: T,
    pub beta: T,
    /// `g'(0)`
    pub g0: T,
    /// `h'(0)`
    pub h0: T,
}

impl<T: Scalar> Rates<T> {
    pub fn new(alpha: T, beta: T, g0: T, h0: T) -> Result<Self> {
        let all_positive = [alpha, beta, g0, h0]
            .iter()
            .all(|v| *v > T::zero() && v.is_finite());
        if !all_positive {
            return Err(DispersionError::InvalidParams(format!(
                "alpha, beta, g'(0), h'(0) must be positive: {alpha}, {beta}, {g0}, {h0}"
            )));
        }
        if !(alpha * beta < g0 * h0) {
            return Err(DispersionError::InvalidParams(format!(
                "need alpha*beta < g'(0)h'(0), got {} >= {}",
                alpha * beta,
                g0 * h0
            )));
        }
        Ok(Self { alpha, beta, g0, h0 })
    }

    /// `g'(0) h'(0)`.
    pub fn coupling(&self) -> T {
        self.g0 * self.h0
    }
}

/// Death rates and reaction nonlinearities, validated against the standing
/// monostability hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f64> {
    pub alpha: T,
    pub beta: T,
    pub g: Nonlinearity<T>,
    pub h: Nonlinearity<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(alpha: T, beta: T, g: Nonlinearity<T>, h: Nonlinearity<T>) -> Result<Self> {
        let p = Self { alpha, beta, g, h };
        p.validate()?;
        Ok(p)
    }

    /// Saturating `g` and `h` with the given slopes at zero.
    pub fn saturating(alpha: T, beta: T, g0: T, h0: T) -> Result<Self> {
        Self::new(
            alpha,
            beta,
            Nonlinearity::saturating(g0, beta),
            Nonlinearity::saturating(h0, alpha),
        )
    }

    pub fn rates(&self) -> Rates<T> {
        Rates {
            alpha: self.alpha,
            beta: self.beta,
            g0: self.g.slope0(),
            h0: self.h.slope0(),
        }
    }

    fn validate(&self) -> Result<()> {
        Rates::new(self.alpha, self.beta, self.g.slope0(), self.h.slope0())?;
        let bad = |msg: String| Err(DispersionError::InvalidParams(msg));
        let cap_tol = T::lit(CAP_TOL);
        for (name, f, cap) in [("g", &self.g, self.beta), ("h", &self.h, self.alpha)] {
            if f.value(T::zero()).abs() > cap_tol {
                return bad(format!("{name}(0) must vanish"));
            }
            if (f.value(T::one()) - cap).abs() > cap_tol * cap.max(T::one()) {
                return bad(format!("{name}(1) = {} must equal {cap}", f.value(T::one())));
            }
            let fd = f.numerical_slope0();
            if (fd - f.slope0()).abs() > T::lit(SLOPE_TOL) * f.slope0().max(T::one()) {
                return bad(format!(
                    "{name}'(0) = {} disagrees with finite difference {fd}",
                    f.slope0()
                ));
            }
            let s0 = f.slope0();
            let mut prev = T::zero();
            for i in 1..CHECK_POINTS {
                let x = T::from_usize_lossy(i) / T::from_usize_lossy(CHECK_POINTS);
                let v = f.value(x);
                if !(v > T::zero()) {
                    return bad(format!("{name} must be positive on (0,1), fails at {x}"));
                }
                if v > s0 * x * (T::one() + cap_tol) {
                    return bad(format!("{name} exceeds its tangent at 0 near {x}"));
                }
                if v < prev - cap_tol {
                    return bad(format!("{name} is decreasing near {x}"));
                }
                prev = v;
            }
        }
        for i in 1..CHECK_POINTS {
            let s = T::from_usize_lossy(i) / T::from_usize_lossy(CHECK_POINTS);
            let lhs = self.h.value(self.g.value(s) / self.beta) - self.alpha * s;
            if !(lhs > T::zero()) {
                return bad(format!("h(g(s)/beta) - alpha s must be positive, fails at s = {s}"));
            }
        }
        Ok(())
    }
}
