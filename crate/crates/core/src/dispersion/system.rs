use crate::kernels::{Kernel, KernelError};
use crate::scalar::Scalar;

use super::{DispersionError, ModelParams, Rates, Result};

/// `A(lambda) = M_{k1}(lambda) - 1 - alpha`.
pub fn eval_a<T: Scalar>(k1: &Kernel<T>, alpha: T, lambda: T) -> Result<T, KernelError> {
    Ok(k1.mgf(lambda)? - T::one() - alpha)
}

/// `B(lambda) = M_{k2}(lambda) - 1 - beta`.
pub fn eval_b<T: Scalar>(k2: &Kernel<T>, beta: T, lambda: T) -> Result<T, KernelError> {
    Ok(k2.mgf(lambda)? - T::one() - beta)
}

/// Linearisation at the trivial state: rates plus the two kernels.
///
/// `coupling` is normally `g'(0) h'(0)`; the perturbed system used for the
/// lower-solution construction replaces it by `(g'(0)-eta)(h'(0)-eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSystem<T = f64> {
    rates: Rates<T>,
    k1: Kernel<T>,
    k2: Kernel<T>,
}

impl<T: Scalar> DispersionSystem<T> {
    pub fn new(rates: Rates<T>, k1: Kernel<T>, k2: Kernel<T>) -> Self {
        Self { rates, k1, k2 }
    }

    pub fn from_params(params: &ModelParams<T>, k1: Kernel<T>, k2: Kernel<T>) -> Self {
        Self::new(params.rates(), k1, k2)
    }

    pub fn rates(&self) -> &Rates<T> {
        &self.rates
    }

    pub fn k1(&self) -> &Kernel<T> {
        &self.k1
    }

    pub fn k2(&self) -> &Kernel<T> {
        &self.k2
    }

    pub fn coupling(&self) -> T {
        self.rates.coupling()
    }

    /// Same kernels with `g'(0), h'(0)` lowered by `eta`.
    pub fn perturbed(&self, eta: T) -> Result<Self> {
        let Rates { alpha, beta, g0, h0 } = self.rates;
        if !(eta > T::zero()) || !(eta < g0.min(h0)) {
            return Err(DispersionError::Domain(format!(
                "eta = {eta} must lie in (0, min(g'(0), h'(0))) = (0, {})",
                g0.min(h0)
            )));
        }
        let rates = Rates::new(alpha, beta, g0 - eta, h0 - eta).map_err(|_| {
            DispersionError::Domain(format!(
                "eta = {eta} too large: (g'(0)-eta)(h'(0)-eta) must exceed alpha*beta"
            ))
        })?;
        Ok(Self::new(rates, self.k1.clone(), self.k2.clone()))
    }

    /// Replaces the second kernel (used when sweeping its mobility).
    pub fn with_k2(&self, k2: Kernel<T>) -> Self {
        Self::new(self.rates, self.k1.clone(), k2)
    }

    pub fn reflect(&self) -> Self {
        Self::new(self.rates, self.k1.reflect(), self.k2.reflect())
    }

    pub fn eval_a(&self, lambda: T) -> Result<T> {
        Ok(eval_a(&self.k1, self.rates.alpha, lambda)?)
    }

    pub fn eval_b(&self, lambda: T) -> Result<T> {
        Ok(eval_b(&self.k2, self.rates.beta, lambda)?)
    }

    fn ab(&self, lambda: T) -> Result<(T, T)> {
        Ok((self.eval_a(lambda)?, self.eval_b(lambda)?))
    }

    fn radical(&self, a: T, b: T) -> T {
        ((a - b) * (a - b) + T::lit(4.0) * self.coupling()).sqrt()
    }

    /// Principal eigenvalue of the linearised symbol,
    /// `D = [A + B + sqrt((A-B)^2 + 4 g'h')] / 2`.
    pub fn eval_d(&self, lambda: T) -> Result<T> {
        let (a, b) = self.ab(lambda)?;
        Ok(self.d_from(a, b))
    }

    fn d_from(&self, a: T, b: T) -> T {
        let root = self.radical(a, b);
        let sum = a + b;
        if sum < T::zero() {
            // product form avoids cancellation when D is close to zero
            (a * b - self.coupling()) * T::lit(2.0) / (sum - root)
        } else {
            (sum + root) * T::lit(0.5)
        }
    }

    pub fn d_prime(&self, lambda: T) -> Result<T> {
        let (a, b) = self.ab(lambda)?;
        let da = self.k1.mgf_derivative(lambda)?;
        let db = self.k2.mgf_derivative(lambda)?;
        Ok((da + db + (a - b) * (da - db) / self.radical(a, b)) * T::lit(0.5))
    }

    /// `c(lambda) = D(lambda) / lambda`.
    pub fn eval_c(&self, lambda: T) -> Result<T> {
        if lambda == T::zero() {
            return Err(DispersionError::Domain("c(lambda) is undefined at lambda = 0".into()));
        }
        Ok(self.eval_d(lambda)? / lambda)
    }

    /// `lambda D'(lambda) - D(lambda)`; `c'(lambda)` has the sign of this over `lambda^2`.
    pub fn psi(&self, lambda: T) -> Result<T> {
        Ok(lambda * self.d_prime(lambda)? - self.eval_d(lambda)?)
    }

    /// `G(c, lambda) = c lambda - A(lambda)`.
    pub fn eval_g(&self, c: T, lambda: T) -> Result<T> {
        Ok(c * lambda - self.eval_a(lambda)?)
    }

    /// `H(c, lambda) = c lambda - B(lambda)`.
    pub fn eval_h(&self, c: T, lambda: T) -> Result<T> {
        Ok(c * lambda - self.eval_b(lambda)?)
    }

    /// Ratio of the `v` to `u` amplitudes of the exponential eigenfunction.
    pub fn b_coefficient(&self, lambda: T) -> Result<T> {
        let (a, b) = self.ab(lambda)?;
        Ok((b - a + self.radical(a, b)) / (T::lit(2.0) * self.rates.h0))
    }
}
