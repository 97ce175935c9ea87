//! Dispersal kernels and their moment-generating functions.
//!
//! A kernel is a probability density `k(x)` of a jump of length `x` per unit
//! time. Analysis needs `M(lambda) = int k(x) e^{lambda x} dx`; simulation needs a
//! sampled copy on the grid. Tabulated kernels sit on the nodes
//! `origin + i * dx` and are integrated with the midpoint rule, which is exactly
//! the discrete operator the simulator applies.

use thiserror::Error;

use crate::roots::{bisect, Tolerance};
use crate::scalar::Scalar;
use crate::special::{erf, erfc};

/// Truncated mass above which [`Kernel::discretize`] refuses to proceed.
pub const MAX_TAIL_MASS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("moment-generating function overflows at lambda = {lambda}")]
    Overflow { lambda: f64 },
    #[error("kernel has no mass on the negative half-line")]
    ZeroNegativeMass,
    #[error("truncated tail mass {tail:e} exceeds {MAX_TAIL_MASS:e}")]
    TailMassTooLarge { tail: f64 },
    #[error("kernel density must be positive somewhere on both half-lines")]
    OneSided,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// Density sampled on the uniform nodes `origin + i * dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T = f64> {
    dx: T,
    origin: T,
    weights: Vec<T>,
    tail_mass: T,
}

impl<T: Scalar> Tabulated<T> {
    /// Builds a table and rescales the weights to `dx * sum(w) = 1`.
    pub fn new(dx: T, origin: T, weights: Vec<T>) -> Result<Self, KernelError> {
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(KernelError::InvalidParameter(format!("dx must be positive, got {dx}")));
        }
        if !origin.is_finite() {
            return Err(KernelError::InvalidParameter("origin must be finite".into()));
        }
        if weights.is_empty() {
            return Err(KernelError::InvalidParameter("empty weight table".into()));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(KernelError::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let mass = weights.iter().fold(T::zero(), |acc, &w| acc + w) * dx;
        if !(mass > T::zero()) {
            return Err(KernelError::InvalidParameter("weights carry no mass".into()));
        }
        let weights = weights.into_iter().map(|w| w / mass).collect();
        Ok(Self {
            dx,
            origin,
            weights,
            tail_mass: T::zero(),
        })
    }

    /// Builds a table from `(x, density)` samples on a uniform grid.
    pub fn from_samples(xs: &[T], density: &[T]) -> Result<Self, KernelError> {
        if xs.len() != density.len() || xs.len() < 2 {
            return Err(KernelError::InvalidParameter(
                "need at least two (x, density) samples".into(),
            ));
        }
        let dx = xs[1] - xs[0];
        for pair in xs.windows(2) {
            let step = pair[1] - pair[0];
            if (step - dx).abs() > T::lit(1e-9) * dx.abs().max(T::one()) {
                return Err(KernelError::GridMismatch(
                    "tabulated x values are not uniformly spaced".into(),
                ));
            }
        }
        Self::new(dx, xs[0], density.to_vec())
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Mass that was cut off when this table was produced by truncation.
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> T {
        self.origin + T::from_usize_lossy(i) * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.weights.iter().enumerate().map(|(i, &w)| (self.node(i), w))
    }

    pub fn mass(&self) -> T {
        self.weights.iter().fold(T::zero(), |acc, &w| acc + w) * self.dx
    }

    /// Largest |x| among nodes carrying positive weight.
    pub fn support_radius(&self) -> T {
        self.nodes()
            .filter(|(_, w)| *w > T::zero())
            .fold(T::zero(), |acc, (x, _)| acc.max(x.abs()))
    }

    /// Integer offset of the first node, in units of `grid_dx`.
    pub fn first_offset(&self, grid_dx: T) -> Result<isize, KernelError> {
        if (self.dx - grid_dx).abs() > T::lit(1e-12) * grid_dx {
            return Err(KernelError::GridMismatch(format!(
                "kernel dx {} differs from grid dx {}",
                self.dx, grid_dx
            )));
        }
        let k = self.origin / grid_dx;
        let rounded = k.round();
        if (k - rounded).abs() > T::lit(1e-9) {
            return Err(KernelError::GridMismatch(
                "kernel nodes are not aligned with grid offsets".into(),
            ));
        }
        rounded
            .to_isize()
            .ok_or_else(|| KernelError::GridMismatch("kernel origin out of range".into()))
    }

    fn reflected(&self) -> Self {
        let last = self.node(self.len() - 1);
        Self {
            dx: self.dx,
            origin: -last,
            weights: self.weights.iter().rev().copied().collect(),
            tail_mass: self.tail_mass,
        }
    }

    fn exp_guard(&self, lambda: T) -> Result<(), KernelError> {
        let worst = self
            .nodes()
            .filter(|(_, w)| *w > T::zero())
            .fold(T::neg_infinity(), |acc, (x, _)| acc.max(lambda * x));
        if worst > T::lit(T::MAX_EXP_ARG) {
            return Err(KernelError::Overflow {
                lambda: lambda.as_f64(),
            });
        }
        Ok(())
    }

    fn moment_sum(&self, lambda: T, power: i32) -> T {
        let sum = self.nodes().fold(T::zero(), |acc, (x, w)| {
            if w > T::zero() {
                acc + w * x.powi(power) * (lambda * x).exp()
            } else {
                acc
            }
        });
        sum * self.dx
    }

    fn is_symmetric(&self) -> bool {
        let n = self.len();
        let centred = (self.origin + self.node(n - 1)).abs() <= T::lit(1e-9) * self.dx;
        let scale = self.weights.iter().fold(T::zero(), |m, &w| m.max(w));
        centred
            && (0..n / 2).all(|i| {
                (self.weights[i] - self.weights[n - 1 - i]).abs() <= T::lit(1e-13) * scale
            })
    }

    fn nonincreasing_away_from_origin(&self) -> bool {
        let ws: Vec<(T, T)> = self.nodes().collect();
        ws.windows(2).all(|p| {
            let (x0, w0) = p[0];
            let (x1, w1) = p[1];
            if x0 >= T::zero() {
                w1 <= w0
            } else if x1 <= T::zero() {
                w1 >= w0
            } else {
                true
            }
        })
    }
}

/// Dispersal kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel<T = f64> {
    /// Gaussian with the given mean and variance.
    Normal { mean: T, var: T },
    /// Constant density on `[lower, upper]`, `lower < 0 < upper`.
    Uniform { lower: T, upper: T },
    /// Point mass at the origin: the component does not move.
    Dirac,
    Tabulated(Tabulated<T>),
}

impl<T: Scalar> Kernel<T> {
    pub fn normal(mean: T, var: T) -> Result<Self, KernelError> {
        if !mean.is_finite() || !(var > T::zero()) || !var.is_finite() {
            return Err(KernelError::InvalidParameter(format!(
                "normal kernel needs finite mean and positive variance, got mean={mean}, var={var}"
            )));
        }
        Ok(Kernel::Normal { mean, var })
    }

    pub fn uniform(lower: T, upper: T) -> Result<Self, KernelError> {
        if !(lower < T::zero()) || !(upper > T::zero()) || !lower.is_finite() || !upper.is_finite()
        {
            return Err(KernelError::InvalidParameter(format!(
                "uniform kernel needs lower < 0 < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Kernel::Uniform { lower, upper })
    }

    /// Wraps a table, rejecting densities that live on one half-line only.
    pub fn tabulated(table: Tabulated<T>) -> Result<Self, KernelError> {
        let pos = table.nodes().any(|(x, w)| x > T::zero() && w > T::zero());
        let neg = table.nodes().any(|(x, w)| x < T::zero() && w > T::zero());
        if !(pos && neg) {
            return Err(KernelError::OneSided);
        }
        Ok(Kernel::Tabulated(table))
    }

    /// True for the point mass, which models a non-moving component.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Kernel::Dirac)
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Kernel::Tabulated(_))
    }

    pub fn mean(&self) -> T {
        match self {
            Kernel::Normal { mean, .. } => *mean,
            Kernel::Uniform { lower, upper } => (*lower + *upper) * T::lit(0.5),
            Kernel::Dirac => T::zero(),
            Kernel::Tabulated(t) => t.moment_sum(T::zero(), 1),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Kernel::Normal { mean, .. } => *mean == T::zero(),
            Kernel::Uniform { lower, upper } => *lower + *upper == T::zero(),
            Kernel::Dirac => true,
            Kernel::Tabulated(t) => t.is_symmetric(),
        }
    }

    /// Symmetric and nonincreasing in |x|.
    pub fn is_symmetric_unimodal(&self) -> bool {
        match self {
            Kernel::Tabulated(t) => t.is_symmetric() && t.nonincreasing_away_from_origin(),
            _ => self.is_symmetric(),
        }
    }

    /// The kernel of the mirrored process `x -> -x`.
    pub fn reflect(&self) -> Self {
        match self {
            Kernel::Normal { mean, var } => Kernel::Normal {
                mean: -*mean,
                var: *var,
            },
            Kernel::Uniform { lower, upper } => Kernel::Uniform {
                lower: -*upper,
                upper: -*lower,
            },
            Kernel::Dirac => Kernel::Dirac,
            Kernel::Tabulated(t) => Kernel::Tabulated(t.reflected()),
        }
    }

    /// `int k(x) e^{lambda x} dx`.
    pub fn mgf(&self, lambda: T) -> Result<T, KernelError> {
        let max_arg = T::lit(T::MAX_EXP_ARG);
        let overflow = || KernelError::Overflow {
            lambda: lambda.as_f64(),
        };
        match self {
            Kernel::Normal { mean, var } => {
                let arg = *mean * lambda + *var * lambda * lambda * T::lit(0.5);
                if arg > max_arg {
                    return Err(overflow());
                }
                Ok(arg.exp())
            }
            Kernel::Uniform { lower, upper } => {
                if (*upper * lambda).max(*lower * lambda) > max_arg {
                    return Err(overflow());
                }
                if lambda == T::zero() {
                    return Ok(T::one());
                }
                // centred form keeps reflection exact: M(-lambda) = reflected M(lambda)
                let (mid, half) = centre_half(*lower, *upper);
                let z = half * lambda;
                Ok((mid * lambda).exp() * z.sinh() / z)
            }
            Kernel::Dirac => Ok(T::one()),
            Kernel::Tabulated(t) => {
                t.exp_guard(lambda)?;
                Ok(t.moment_sum(lambda, 0))
            }
        }
    }

    /// `d/dlambda int k(x) e^{lambda x} dx`.
    pub fn mgf_derivative(&self, lambda: T) -> Result<T, KernelError> {
        match self {
            Kernel::Normal { mean, var } => Ok((*mean + *var * lambda) * self.mgf(lambda)?),
            Kernel::Uniform { lower, upper } => {
                let m = self.mgf(lambda)?;
                let (mid, half) = centre_half(*lower, *upper);
                Ok(mid * m + (mid * lambda).exp() * half * sinhc_derivative(half * lambda))
            }
            Kernel::Dirac => Ok(T::zero()),
            Kernel::Tabulated(t) => {
                t.exp_guard(lambda)?;
                Ok(t.moment_sum(lambda, 1))
            }
        }
    }

    /// Minimiser and minimum of the MGF (`E(k)` in the asymmetry literature).
    ///
    /// The MGF is strictly convex with slope equal to the mean at 0, so the
    /// minimiser lies on the side opposite to the mean and is the unique root of
    /// the derivative there.
    pub fn mgf_minimum(&self) -> Result<(T, T), KernelError> {
        let mean = self.mean();
        if self.is_degenerate() || mean == T::zero() {
            return Ok((T::zero(), T::one()));
        }
        let dir = if mean > T::zero() { -T::one() } else { T::one() };
        let mut step = T::one();
        let mut far = dir * step;
        let mut d_far = self.mgf_derivative(far)?;
        let mut guard = 0;
        while (d_far > T::zero()) == (mean > T::zero()) && d_far != T::zero() {
            step = step * T::lit(2.0);
            far = dir * step;
            d_far = self.mgf_derivative(far)?;
            guard += 1;
            if guard > 60 {
                return Err(KernelError::InvalidParameter(
                    "MGF derivative never changes sign".into(),
                ));
            }
        }
        let root = bisect(
            T::zero(),
            far,
            mean,
            |l| self.mgf_derivative(l),
            Tolerance::new(1e-15, 0.0),
        )?;
        Ok((root, self.mgf(root)?))
    }

    /// `inf_lambda M(lambda)`, in `(0, 1]`; equals 1 for zero-mean kernels.
    pub fn asymmetry_infimum(&self) -> Result<T, KernelError> {
        Ok(self.mgf_minimum()?.1)
    }

    /// Ratio of the first absolute moments on the positive and negative half-lines.
    pub fn asymmetry_ratio(&self) -> Result<T, KernelError> {
        match self {
            Kernel::Normal { mean, var } => {
                if *mean == T::zero() {
                    return Ok(T::one());
                }
                let r = *mean / (T::lit(2.0) * *var).sqrt();
                Ok(normal_ratio(r))
            }
            Kernel::Uniform { lower, upper } => {
                let q = *upper / *lower;
                Ok(q * q)
            }
            Kernel::Dirac => Err(KernelError::ZeroNegativeMass),
            Kernel::Tabulated(t) => {
                let (pos, neg) = t.nodes().fold((T::zero(), T::zero()), |(p, n), (x, w)| {
                    if x > T::zero() {
                        (p + w * x, n)
                    } else {
                        (p, n - w * x)
                    }
                });
                if neg == T::zero() {
                    return Err(KernelError::ZeroNegativeMass);
                }
                Ok(pos / neg)
            }
        }
    }

    /// Radius that keeps the truncated tail far below every test tolerance.
    pub fn default_truncation_radius(&self) -> T {
        match self {
            Kernel::Normal { mean, var } => T::lit(10.0) * var.sqrt() + mean.abs(),
            Kernel::Uniform { lower, upper } => lower.abs().max(upper.abs()),
            Kernel::Dirac => T::zero(),
            Kernel::Tabulated(t) => t.support_radius(),
        }
    }

    /// Samples the kernel on the nodes `j * dx` whose cells
    /// `[(j - 1/2) dx, (j + 1/2) dx]` meet `[-radius, radius]`.
    ///
    /// Normal densities are point-sampled (spectrally accurate for smooth
    /// kernels); uniform densities are cell-averaged so the jump at each end
    /// is split exactly. Weights are renormalised to unit mass.
    pub fn discretize(&self, dx: T, radius: T) -> Result<Tabulated<T>, KernelError> {
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(KernelError::InvalidParameter(format!("dx must be positive, got {dx}")));
        }
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(KernelError::InvalidParameter(format!(
                "truncation radius must be nonnegative, got {radius}"
            )));
        }
        // every node whose cell meets [-radius, radius]
        let m = (radius / dx - T::lit(0.5) - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
        let m_t = T::from_usize_lossy(m);
        let half = T::lit(0.5);
        let edge = (m_t + half) * dx;
        let node = |j: usize| (T::from_usize_lossy(j) - m_t) * dx;

        let (weights, tail) = match self {
            Kernel::Dirac => return Tabulated::new(dx, T::zero(), vec![dx.recip()]),
            Kernel::Normal { mean, var } => {
                let scale = (T::lit(2.0) * *var).sqrt();
                let tail = half * erfc((edge - *mean) / scale) + half * erfc((edge + *mean) / scale);
                let norm = (T::lit(2.0) * T::PI() * *var).sqrt().recip();
                let w = (0..=2 * m)
                    .map(|j| {
                        let y = node(j) - *mean;
                        norm * (-(y * y) / (T::lit(2.0) * *var)).exp()
                    })
                    .collect::<Vec<_>>();
                (w, tail)
            }
            Kernel::Uniform { lower, upper } => {
                let width = *upper - *lower;
                let tail = ((*upper - edge).max(T::zero()) + (-edge - *lower).max(T::zero())) / width;
                let w = (0..=2 * m)
                    .map(|j| {
                        let a = (node(j) - half * dx).max(*lower);
                        let b = (node(j) + half * dx).min(*upper);
                        (b - a).max(T::zero()) / (dx * width)
                    })
                    .collect::<Vec<_>>();
                (w, tail)
            }
            Kernel::Tabulated(t) => {
                let first = t.first_offset(dx)?;
                let mut kept = Vec::with_capacity(2 * m + 1);
                let mut cut = T::zero();
                for (i, &w) in t.weights.iter().enumerate() {
                    let j = first + i as isize;
                    if j.unsigned_abs() <= m {
                        kept.push((j, w));
                    } else {
                        cut = cut + w * dx;
                    }
                }
                let mut w = vec![T::zero(); 2 * m + 1];
                for (j, wj) in kept {
                    w[(j + m as isize) as usize] = wj;
                }
                (w, cut)
            }
        };
        if tail > T::lit(MAX_TAIL_MASS) {
            return Err(KernelError::TailMassTooLarge { tail: tail.as_f64() });
        }
        let first = weights.iter().position(|w| *w > T::zero());
        let last = weights.iter().rposition(|w| *w > T::zero());
        let (first, last) = match (first, last) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(KernelError::InvalidParameter(
                    "grid too coarse: no node carries kernel mass".into(),
                ))
            }
        };
        let mut table = Tabulated::new(dx, node(first), weights[first..=last].to_vec())?;
        table.tail_mass = tail;
        Ok(table)
    }

    /// The kernel seen by the simulator on a grid of spacing `dx`.
    ///
    /// The point mass stays a point mass; everything else becomes the table
    /// returned by [`Kernel::discretize`] at the default truncation radius.
    pub fn discrete_counterpart(&self, dx: T) -> Result<Kernel<T>, KernelError> {
        match self {
            Kernel::Dirac => Ok(Kernel::Dirac),
            _ => Kernel::tabulated(self.discretize(dx, self.default_truncation_radius())?),
        }
    }
}

fn centre_half<T: Scalar>(lower: T, upper: T) -> (T, T) {
    ((lower + upper) * T::lit(0.5), (upper - lower) * T::lit(0.5))
}

/// `d/dz [sinh(z) / z]`, with a series near the removable singularity.
fn sinhc_derivative<T: Scalar>(z: T) -> T {
    if z.abs() < T::lit(0.5) {
        // sum_{k>=1} 2k z^{2k-1} / (2k+1)!
        let z2 = z * z;
        let mut sum = T::zero();
        let mut zpow = z;
        let mut fact = T::one();
        for k in 1..15 {
            fact = fact * T::from_usize_lossy(2 * k) * T::from_usize_lossy(2 * k + 1);
            sum = sum + T::from_usize_lossy(2 * k) * zpow / fact;
            zpow = zpow * z2;
        }
        sum
    } else {
        (z * z.cosh() - z.sinh()) / (z * z)
    }
}

/// `M1/M2` of a Gaussian with `r = mean / sqrt(2 var)`.
fn normal_ratio<T: Scalar>(r: T) -> T {
    let inv = (-r * r).exp() / (r * T::PI().sqrt()) + erf(r) - T::one();
    T::one() + T::lit(2.0) / inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal(a: f64, s: f64) -> Kernel {
        Kernel::normal(a, s).unwrap()
    }

    #[test]
    fn uniform_mgf_at_zero_is_total_mass() {
        let k = Kernel::uniform(-1.0, 2.0).unwrap();
        assert_eq!(k.mgf(0.0).unwrap(), 1.0);
    }

    #[test]
    fn normal_mgf_closed_form() {
        let v = normal(0.5, 1.0).mgf(1.0).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn uniform_mgf_is_smooth_through_zero() {
        let k = Kernel::uniform(-1.0, 2.0).unwrap();
        for &l in &[1e-12, -1e-9, 1e-6] {
            // 1 + mean*l + E[X^2] l^2/2 with mean = 1/2, E[X^2] = 1
            let want: f64 = 1.0 + 0.5 * l + 0.5 * l * l;
            assert!((k.mgf(l).unwrap() - want).abs() < 1e-15);
            let dwant = 0.5 + l;
            assert!((k.mgf_derivative(l).unwrap() - dwant).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_derivative_matches_finite_difference() {
        let k = Kernel::uniform(-1.0_f64, 2.0).unwrap();
        for &l in &[-3.0, -0.4, -0.2, 0.1, 0.24, 0.3, 1.7] {
            let h = 1e-5;
            let fd = (k.mgf(l + h).unwrap() - k.mgf(l - h).unwrap()) / (2.0 * h);
            let an = k.mgf_derivative(l).unwrap();
            assert!((fd - an).abs() < 1e-8 * an.abs().max(1.0), "l={l}: {fd} vs {an}");
        }
    }

    #[test]
    fn dirac_mgf_is_one() {
        for l in [-30.0, 0.0, 4.0] {
            assert_eq!(Kernel::<f64>::Dirac.mgf(l).unwrap(), 1.0);
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            normal(0.0, 1.0).mgf(40.0),
            Err(KernelError::Overflow { .. })
        ));
        let u = Kernel::uniform(-1.0_f64, 2.0).unwrap();
        assert!(matches!(u.mgf(351.0), Err(KernelError::Overflow { .. })));
        assert!(u.mgf(-699.0).is_ok());
        assert!(matches!(u.mgf(-701.0), Err(KernelError::Overflow { .. })));
    }

    #[test]
    fn constructors_validate() {
        assert!(Kernel::uniform(1.0, 2.0).is_err());
        assert!(Kernel::normal(0.0, 0.0).is_err());
        let one_sided = Tabulated::new(0.1, 0.1, vec![1.0, 2.0]).unwrap();
        assert_eq!(Kernel::tabulated(one_sided), Err(KernelError::OneSided));
        assert!(Tabulated::new(0.1, 0.0, vec![-1.0, 2.0]).is_err());
    }

    #[test]
    fn tabulated_normal_quadrature_matches_closed_form() {
        let dx = 0.01;
        let xs: Vec<f64> = (0..=2100).map(|i| -10.0 + i as f64 * dx).collect();
        let pdf: Vec<f64> = xs
            .iter()
            .map(|x| (-(x - 0.5) * (x - 0.5) / 2.0).exp())
            .collect();
        let t = Kernel::tabulated(Tabulated::from_samples(&xs, &pdf).unwrap()).unwrap();
        let want = normal(0.5, 1.0).mgf(0.7).unwrap();
        assert!((t.mgf(0.7).unwrap() - want).abs() < 1e-6);
        assert!((t.mgf(0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetry_infimum_values() {
        assert_eq!(normal(0.0, 1.0).asymmetry_infimum().unwrap(), 1.0);
        assert_eq!(Kernel::<f64>::Dirac.asymmetry_infimum().unwrap(), 1.0);
        let e = normal(0.5, 1.0).asymmetry_infimum().unwrap();
        assert!((e - (-0.125f64).exp()).abs() < 1e-14);
        // grid cross-check
        let k = normal(0.5, 1.0);
        let grid_min = (0..=40_000)
            .map(|i| k.mgf(-2.0 + i as f64 * 1e-4).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((grid_min - e).abs() < 1e-8);
    }

    #[test]
    fn asymmetry_ratio_values() {
        let u = Kernel::uniform(-1.0_f64, 2.0).unwrap();
        assert!((u.asymmetry_ratio().unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(normal(0.0, 3.0).asymmetry_ratio().unwrap(), 1.0);
        assert_eq!(
            Kernel::uniform(-1.5, 1.5).unwrap().asymmetry_ratio().unwrap(),
            1.0
        );
        assert_eq!(
            Kernel::<f64>::Dirac.asymmetry_ratio(),
            Err(KernelError::ZeroNegativeMass)
        );
    }

    #[test]
    fn normal_ratio_matches_direct_quadrature() {
        // Composite Simpson on [-20, 20] for both half-line first moments.
        let (a, s) = (0.5_f64, 1.0_f64);
        let pdf = |x: f64| (-(x - a) * (x - a) / (2.0 * s)).exp() / (2.0 * std::f64::consts::PI * s).sqrt();
        let simpson = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut acc = f(lo) + f(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(lo + i as f64 * h);
            }
            acc * h / 3.0
        };
        let m1 = simpson(0.0, 20.0, &|x| x * pdf(x));
        let m2 = simpson(-20.0, 0.0, &|x| -x * pdf(x));
        let got = normal(a, s).asymmetry_ratio().unwrap();
        assert!((got - m1 / m2).abs() < 1e-8, "{got} vs {}", m1 / m2);
    }

    #[test]
    fn discretize_dirac_is_single_spike() {
        let t = Kernel::<f64>::Dirac.discretize(0.1, 1.0).unwrap();
        assert_eq!(t.weights(), &[10.0]);
        assert_eq!(t.origin(), 0.0);
    }

    #[test]
    fn discretize_uniform_splits_end_cells() {
        let t = Kernel::uniform(-1.0_f64, 2.0).unwrap().discretize(0.01, 3.0).unwrap();
        let w = t.weights();
        assert_eq!(w.len(), 301);
        assert!((t.origin() + 1.0).abs() < 1e-12);
        assert!((t.mass() - 1.0).abs() < 1e-12);
        let full = 1.0 / 3.0;
        assert!(w[1..300].iter().all(|x| (x - full).abs() < 1e-12));
        assert!((w[0] - full / 2.0).abs() < 1e-12 && (w[300] - full / 2.0).abs() < 1e-12);
        // 299 full cells + 2 half cells = 300 full-weight equivalents
        let equivalents: f64 = w.iter().sum::<f64>() / full;
        assert!((equivalents - 300.0).abs() < 1e-9);
    }

    #[test]
    fn discretize_normal_mgf_matches_closed_form() {
        let k = normal(0.5, 1.0);
        let t = Kernel::tabulated(k.discretize(0.05, 12.0).unwrap()).unwrap();
        assert!((t.mgf(0.3).unwrap() - k.mgf(0.3).unwrap()).abs() < 1e-6);
        let d = k.discretize(0.05, k.default_truncation_radius()).unwrap();
        assert!(d.tail_mass() < 1e-12);
    }

    #[test]
    fn discretize_rejects_heavy_truncation() {
        let err = normal(0.0, 1.0).discretize(0.1, 3.0).unwrap_err();
        assert!(matches!(err, KernelError::TailMassTooLarge { .. }));
        let err = Kernel::uniform(-1.0, 2.0).unwrap().discretize(0.1, 1.5).unwrap_err();
        assert!(matches!(err, KernelError::TailMassTooLarge { .. }));
    }

    #[test]
    fn reflection_mirrors_mgf() {
        let ks = [
            normal(0.7, 2.0),
            Kernel::uniform(-1.0, 2.5).unwrap(),
            Kernel::Dirac,
        ];
        for k in &ks {
            for l in [-1.3, 0.2, 0.9] {
                assert_eq!(k.reflect().mgf(l).unwrap(), k.mgf(-l).unwrap());
            }
        }
        let t = Kernel::tabulated(normal(0.7, 1.0).discretize(0.1, 11.0).unwrap()).unwrap();
        for l in [-1.3, 0.2, 0.9] {
            let a = t.reflect().mgf(l).unwrap();
            let b = t.mgf(-l).unwrap();
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn symmetry_detection() {
        assert!(normal(0.0, 1.0).is_symmetric());
        assert!(!normal(0.1, 1.0).is_symmetric());
        let t = Kernel::tabulated(normal(0.0, 1.0).discretize(0.1, 10.0).unwrap()).unwrap();
        assert!(t.is_symmetric() && t.is_symmetric_unimodal());
        let t = Kernel::tabulated(normal(0.3, 1.0).discretize(0.1, 10.5).unwrap()).unwrap();
        assert!(!t.is_symmetric());
    }

    #[test]
    fn f32_kernels_work() {
        let k = Kernel::<f32>::normal(0.5, 1.0).unwrap();
        assert!((k.mgf(1.0).unwrap() - std::f32::consts::E).abs() < 1e-6);
        let e = k.asymmetry_infimum().unwrap();
        assert!((e - (-0.125f32).exp()).abs() < 1e-5);
    }
}
