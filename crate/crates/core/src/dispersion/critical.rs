//! Asymmetry index `K` and the critical mobility `sigma*` of the second
//! component, below which leftward spread is blocked.

use crate::kernels::Kernel;
use crate::roots::{bisect, Tolerance};
use crate::scalar::Scalar;

use super::speeds::{classify_propagation, lambda_set, max_product, Classification};
use super::{DispersionError, DispersionSystem, Rates, Result};

const SIGMA_LOW: f64 = 1e-3;
const SIGMA_FLOOR: f64 = 1e-9;
const SIGMA_CAP: f64 = 1e4;

/// `omega(z) - omega(-r z)` with `omega(z) = (z - 1) e^z`.
pub fn omega_gap<T: Scalar>(r: T, z: T) -> T {
    (z - T::one()) * z.exp() + (r * z + T::one()) * (-r * z).exp()
}

/// The root `z_r in (1 - 1/r, 1)` of [`omega_gap`], for `r > 1`.
pub fn omega_root<T: Scalar>(r: T) -> Result<T> {
    if !(r > T::one()) || !r.is_finite() {
        return Err(DispersionError::Domain(format!("omega root needs r > 1, got {r}")));
    }
    let lo = T::one() - r.recip();
    let hi = T::one();
    let f_lo = omega_gap(r, lo);
    if !(f_lo < T::zero() && omega_gap(r, hi) > T::zero()) {
        return Err(DispersionError::BracketFailure(format!(
            "omega gap has no sign change on ({lo}, 1) for r = {r}"
        )));
    }
    let z = bisect(lo, hi, f_lo, |z| Ok::<_, DispersionError>(omega_gap(r, z)), Tolerance::new(1e-16, 0.0))?;
    let floor = T::lit(2.0) * r.ln() / (T::one() + r);
    if !(z > floor) {
        return Err(DispersionError::InternalInconsistency(format!(
            "z_r = {z} is not above 2 ln r / (1 + r) = {floor}"
        )));
    }
    Ok(z)
}

/// Asymmetry index `K = -beta min A / (g'(0) h'(0))`.
///
/// Closed forms are used for normal and uniform kernels; other kernels go
/// through the numerical MGF minimum. Kernels with negative mean must be
/// reflected first.
pub fn kappa_index<T: Scalar>(rates: &Rates<T>, k1: &Kernel<T>) -> Result<T> {
    let Rates { alpha, beta, .. } = *rates;
    let gh = rates.coupling();
    if k1.mean() < T::zero() {
        return Err(DispersionError::Domain(
            "k1 has negative mean; reflect the spatial axis first".into(),
        ));
    }
    match *k1 {
        Kernel::Normal { mean, var } => {
            let r2 = mean * mean / (T::lit(2.0) * var);
            Ok(beta * (alpha + T::one() - (-r2).exp()) / gh)
        }
        Kernel::Uniform { lower, upper } => {
            if upper + lower == T::zero() {
                return Ok(alpha * beta / gh);
            }
            let r = -upper / lower;
            let z = omega_root(r)?;
            let a_min = k1.mgf(z / lower)? - T::one() - alpha;
            Ok(-beta * a_min / gh)
        }
        _ => {
            let e = k1.asymmetry_infimum()?;
            Ok(beta * (alpha + T::one() - e) / gh)
        }
    }
}

/// One-parameter family for the second kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MobilityFamily {
    /// `Normal(0, sigma)`, `sigma` the variance.
    NormalVariance,
    /// `Uniform(-sigma, sigma)`.
    UniformHalfWidth,
}

impl MobilityFamily {
    pub fn kernel<T: Scalar>(self, sigma: T) -> Result<Kernel<T>> {
        Ok(match self {
            MobilityFamily::NormalVariance => Kernel::normal(T::zero(), sigma)?,
            MobilityFamily::UniformHalfWidth => Kernel::uniform(-sigma, sigma)?,
        })
    }

    /// Family a kernel belongs to, if it is centred.
    pub fn of<T: Scalar>(k: &Kernel<T>) -> Option<(Self, T)> {
        match *k {
            Kernel::Normal { mean, var } if mean == T::zero() => Some((MobilityFamily::NormalVariance, var)),
            Kernel::Uniform { lower, upper } if lower == -upper => {
                Some((MobilityFamily::UniformHalfWidth, upper))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalMobility<T = f64> {
    pub kappa: T,
    pub sigma_star: T,
}

/// Critical mobility: the `sigma` at which `Lambda` shrinks to a point.
///
/// `F(sigma) = max A B - g'(0) h'(0)` decreases in `sigma`; it is bracketed
/// by doubling from `[1e-3, 1]` and bisected. The result is checked by
/// classifying at `0.9 sigma*` (right only) and `1.1 sigma*` (bidirectional).
/// The second kernel of `sys` is ignored.
pub fn sigma_star<T: Scalar>(
    sys: &DispersionSystem<T>,
    family: MobilityFamily,
    allow_unproven: bool,
) -> Result<CriticalMobility<T>> {
    let kappa = kappa_index(sys.rates(), sys.k1())?;
    if !(kappa > T::one()) {
        return Err(DispersionError::NoCriticalValue {
            kappa: kappa.as_f64(),
        });
    }
    if !matches!(sys.k1(), Kernel::Normal { .. } | Kernel::Uniform { .. }) && !allow_unproven {
        return Err(DispersionError::Unproven);
    }
    let gh = sys.coupling();
    let at = |sigma: T| sys.with_k2(family.kernel(sigma).expect("positive sigma"));
    let f = |sigma: T| -> Result<T> { Ok(max_product(&at(sigma))?.1 - gh) };

    let mut lo = T::lit(SIGMA_LOW);
    let mut f_lo = f(lo)?;
    while !(f_lo > T::zero()) {
        lo = lo * T::lit(0.5);
        if lo < T::lit(SIGMA_FLOOR) {
            return Err(DispersionError::BracketFailure(
                "max A B stays below g'(0)h'(0) for small sigma".into(),
            ));
        }
        f_lo = f(lo)?;
    }
    let mut hi = T::one().max(lo);
    while !(f(hi)? < T::zero()) {
        if hi >= T::lit(SIGMA_CAP) {
            return Err(DispersionError::BracketFailure(format!(
                "max A B stays above g'(0)h'(0) up to sigma = {SIGMA_CAP}"
            )));
        }
        lo = hi;
        f_lo = f(lo)?;
        hi = (hi * T::lit(2.0)).min(T::lit(SIGMA_CAP));
    }
    let sigma = bisect(lo, hi, f_lo, f, Tolerance::new(1e-13, 0.0))?;

    for (factor, want) in [
        (0.9, Classification::RightOnly),
        (1.1, Classification::Bidirectional),
    ] {
        let s = sigma * T::lit(factor);
        let got = classify_propagation(lambda_set(&at(s))?.as_ref());
        if got != want {
            return Err(DispersionError::InternalInconsistency(format!(
                "classification at sigma = {s} is {got}, expected {want}"
            )));
        }
    }
    Ok(CriticalMobility {
        kappa,
        sigma_star: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_root_r2() {
        let z = omega_root(2.0_f64).unwrap();
        assert!(z > 0.5 && z < 1.0);
        assert!(omega_gap(2.0, z).abs() < 1e-14);
        assert!((z - 0.716_375_266_635_687_4).abs() < 1e-12);
    }

    #[test]
    fn omega_root_near_one() {
        let z = omega_root(1.001_f64).unwrap();
        assert!(z > 0.0 && z < 0.01);
        assert!(omega_root(1.0).is_err());
        assert!(omega_root(0.5).is_err());
    }

    #[test]
    fn uniform_minimum_closed_form() {
        // at the minimiser, min M = e^z / (1 + r z)
        for r in [1.2_f64, 2.0, 5.0] {
            let k = Kernel::uniform(-1.0, r).unwrap();
            let z = omega_root(r).unwrap();
            let want = z.exp() / (1.0 + r * z);
            assert!((k.mgf(-z).unwrap() - want).abs() < 1e-12);
            assert!((k.asymmetry_infimum().unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_for_symmetric_kernels() {
        let rates = Rates::new(0.2_f64, 0.1, 0.11, 0.2).unwrap();
        let want = 0.02 / 0.022;
        let k = kappa_index(&rates, &Kernel::normal(0.0, 3.0).unwrap()).unwrap();
        assert!((k - want).abs() < 1e-15);
        let k = kappa_index(&rates, &Kernel::uniform(-2.0, 2.0).unwrap()).unwrap();
        assert!((k - want).abs() < 1e-15);
        let k = kappa_index(&rates, &Kernel::Dirac).unwrap();
        assert!((k - want).abs() < 1e-15);
    }

    #[test]
    fn kappa_rejects_negative_mean() {
        let rates = Rates::new(0.2_f64, 0.1, 0.11, 0.2).unwrap();
        let err = kappa_index(&rates, &Kernel::normal(-0.5, 1.0).unwrap());
        assert!(matches!(err, Err(DispersionError::Domain(_))));
    }

    #[test]
    fn general_kernel_kappa_agrees_with_closed_form() {
        let rates = Rates::new(0.2_f64, 0.1, 0.11, 0.2).unwrap();
        let k1 = Kernel::normal(0.5, 1.0).unwrap();
        let table = k1.discretize(0.01, 11.0).unwrap();
        let exact = kappa_index(&rates, &k1).unwrap();
        let general = kappa_index(&rates, &Kernel::tabulated(table).unwrap()).unwrap();
        assert!((exact - general).abs() < 1e-8);
    }

    #[test]
    fn no_critical_value_for_symmetric_k1() {
        let s = 0.06f64.sqrt();
        let sys = DispersionSystem::new(
            Rates::new(0.2, 0.2, s, s).unwrap(),
            Kernel::uniform(-1.0, 1.0).unwrap(),
            Kernel::Dirac,
        );
        let err = sigma_star(&sys, MobilityFamily::UniformHalfWidth, false).unwrap_err();
        assert!(matches!(err, DispersionError::NoCriticalValue { kappa } if kappa < 1.0));
    }

    #[test]
    fn general_kernels_need_opt_in() {
        let rates = Rates::new(0.2_f64, 0.1, 0.11, 0.2).unwrap();
        let table = Kernel::normal(0.5, 1.0).unwrap().discretize(0.02, 11.0).unwrap();
        let sys = DispersionSystem::new(rates, Kernel::tabulated(table).unwrap(), Kernel::Dirac);
        assert_eq!(
            sigma_star(&sys, MobilityFamily::NormalVariance, false).unwrap_err(),
            DispersionError::Unproven
        );
        let cm = sigma_star(&sys, MobilityFamily::NormalVariance, true).unwrap();
        assert!(cm.sigma_star > 0.0);
    }

    #[test]
    fn family_recognition() {
        assert_eq!(
            MobilityFamily::of(&Kernel::normal(0.0, 2.0).unwrap()),
            Some((MobilityFamily::NormalVariance, 2.0))
        );
        assert_eq!(
            MobilityFamily::of(&Kernel::uniform(-0.5, 0.5).unwrap()),
            Some((MobilityFamily::UniformHalfWidth, 0.5))
        );
        assert_eq!(MobilityFamily::of(&Kernel::normal(0.1, 2.0).unwrap()), None);
        assert_eq!(MobilityFamily::of(&Kernel::<f64>::Dirac), None);
    }
}
