//! Extremal speeds `c_l*`, `c_r*`, the interval set `Lambda` and the resulting
//! propagation-direction classification.

use std::fmt;
use std::str::FromStr;

use crate::kernels::{Kernel, KernelError};
use crate::roots::{bisect, golden_max, Tolerance};
use crate::scalar::Scalar;

use super::{DispersionError, DispersionSystem, Result};

/// Speeds closer to zero than this count as zero when classifying by sign.
pub const SIGN_TOLERANCE: f64 = 1e-6;
/// A `Lambda` interval narrower than this is reported as a single point.
pub const SINGLETON_WIDTH: f64 = 1e-7;

const LAMBDA_START: f64 = 1e-8;
const LAMBDA_MAX: f64 = 50.0;
const MAX_DOUBLINGS: usize = 80;
const GOLDEN_TOL: f64 = 1e-11;
/// Relative gap between `max A B` and `g'(0)h'(0)` still read as tangency.
const TANGENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// `c_l* < 0 < c_r*`
    Bidirectional,
    /// `0 < c_l* < c_r*`
    RightOnly,
    /// `c_l* < c_r* < 0`
    LeftOnly,
    /// `c_l* < c_r* = 0`
    CriticalRight,
    /// `0 = c_l* < c_r*`
    CriticalLeft,
}

impl Classification {
    pub const ALL: [Classification; 5] = [
        Classification::Bidirectional,
        Classification::RightOnly,
        Classification::LeftOnly,
        Classification::CriticalRight,
        Classification::CriticalLeft,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Bidirectional => "Bidirectional",
            Classification::RightOnly => "RightOnly",
            Classification::LeftOnly => "LeftOnly",
            Classification::CriticalRight => "CriticalRight",
            Classification::CriticalLeft => "CriticalLeft",
        }
    }

    /// Whether two classifications can describe the same configuration once
    /// a speed within tolerance of zero is allowed to read either way.
    pub fn compatible(self, other: Self) -> bool {
        use Classification::*;
        self == other
            || matches!(
                (self, other),
                (CriticalLeft, Bidirectional | RightOnly)
                    | (Bidirectional | RightOnly, CriticalLeft)
                    | (CriticalRight, Bidirectional | LeftOnly)
                    | (Bidirectional | LeftOnly, CriticalRight)
            )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Classification::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown classification {s:?}"))
    }
}

/// Closed interval `[lo, hi]`; `lo == hi` for a tangency point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaInterval<T = f64> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> LambdaInterval<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) * T::lit(0.5)
    }

    pub fn is_singleton(&self) -> bool {
        self.width() < T::lit(SINGLETON_WIDTH)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile<T = f64> {
    pub lambda_l_star: T,
    pub lambda_r_star: T,
    pub c_l_star: T,
    pub c_r_star: T,
    pub lambda_interval: Option<LambdaInterval<T>>,
    pub classification: Classification,
}

/// Extremal speeds of the system with the coupling lowered by `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedSpeeds<T = f64> {
    pub eta: T,
    pub lambda_l: T,
    pub lambda_r: T,
    pub c_l: T,
    pub c_r: T,
}

fn overflow_as_positive<T: Scalar>(r: Result<T>) -> Result<T> {
    match r {
        Err(DispersionError::Kernel(KernelError::Overflow { .. })) => Ok(T::one()),
        other => other,
    }
}

/// Positive minimiser of `c` and the minimum, via the root of
/// `psi = lambda D' - D` (negative below the minimiser, positive above).
pub(crate) fn right_extremum<T: Scalar>(sys: &DispersionSystem<T>) -> Result<(T, T)> {
    let psi = |l: T| overflow_as_positive(sys.psi(l));
    let cap = T::lit(LAMBDA_MAX);
    let mut lo = T::lit(LAMBDA_START);
    let mut psi_lo = psi(lo)?;
    if !(psi_lo < T::zero()) {
        return Err(DispersionError::BracketFailure(format!(
            "psi({lo}) = {psi_lo} is not negative"
        )));
    }
    let hi = loop {
        let hi = (lo * T::lit(2.0)).min(cap);
        let p = psi(hi)?;
        if p > T::zero() {
            break hi;
        }
        if hi >= cap {
            return Err(DispersionError::BracketFailure(format!(
                "psi keeps its sign on ({LAMBDA_START}, {LAMBDA_MAX})"
            )));
        }
        lo = hi;
        psi_lo = p;
    };
    let lambda = bisect(lo, hi, psi_lo, psi, Tolerance::new(1e-15, 0.0))?;
    Ok((lambda, sys.eval_c(lambda)?))
}

/// Both extrema: `(lambda_l*, c_l*, lambda_r*, c_r*)`. The left one is the
/// right one of the reflected system, so symmetric kernels give exactly
/// mirrored values.
fn extrema<T: Scalar>(sys: &DispersionSystem<T>) -> Result<(T, T, T, T)> {
    let (lr, cr) = right_extremum(sys)?;
    let (ll, cl) = right_extremum(&sys.reflect())?;
    Ok((-ll, -cl, lr, cr))
}

/// Sign-based classification of a pair of extremal speeds.
pub fn classify_by_signs<T: Scalar>(c_l: T, c_r: T, tol: T) -> Classification {
    if c_r.abs() <= tol {
        Classification::CriticalRight
    } else if c_l.abs() <= tol {
        Classification::CriticalLeft
    } else if c_l > T::zero() {
        Classification::RightOnly
    } else if c_r < T::zero() {
        Classification::LeftOnly
    } else {
        Classification::Bidirectional
    }
}

/// Direction of propagation read off the `Lambda` set alone.
pub fn classify_propagation<T: Scalar>(set: Option<&LambdaInterval<T>>) -> Classification {
    match set {
        None => Classification::Bidirectional,
        Some(iv) if iv.is_singleton() => {
            if iv.midpoint() > T::zero() {
                Classification::CriticalRight
            } else {
                Classification::CriticalLeft
            }
        }
        Some(iv) => {
            if iv.midpoint() > T::zero() {
                Classification::LeftOnly
            } else {
                Classification::RightOnly
            }
        }
    }
}

/// Locates both extremal speeds and classifies the direction of spread.
///
/// The `Lambda` classification is cross-checked against the signs of the
/// speeds; an incompatible pair is an [`DispersionError::InternalInconsistency`].
pub fn locate_speeds<T: Scalar>(sys: &DispersionSystem<T>) -> Result<SpeedProfile<T>> {
    let (lambda_l_star, c_l_star, lambda_r_star, c_r_star) = extrema(sys)?;
    if !(c_l_star < c_r_star) {
        return Err(DispersionError::InternalInconsistency(format!(
            "c_l* = {c_l_star} is not below c_r* = {c_r_star}"
        )));
    }
    let lambda_interval = lambda_set(sys)?;
    let classification = classify_propagation(lambda_interval.as_ref());
    let by_sign = classify_by_signs(c_l_star, c_r_star, T::lit(SIGN_TOLERANCE));
    if !classification.compatible(by_sign) {
        return Err(DispersionError::InternalInconsistency(format!(
            "Lambda set gives {classification}, speeds ({c_l_star}, {c_r_star}) give {by_sign}"
        )));
    }
    Ok(SpeedProfile {
        lambda_l_star,
        lambda_r_star,
        c_l_star,
        c_r_star,
        lambda_interval,
        classification,
    })
}

/// Extremal speeds of the `eta`-perturbed system, checked to sit strictly
/// inside `(c_l*, c_r*)`.
pub fn perturbed_speeds<T: Scalar>(sys: &DispersionSystem<T>, eta: T) -> Result<PerturbedSpeeds<T>> {
    let perturbed = sys.perturbed(eta)?;
    let (_, c_l_star, _, c_r_star) = extrema(sys)?;
    let (lambda_l, c_l, lambda_r, c_r) = extrema(&perturbed)?;
    if !(c_l_star < c_l && c_l < c_r && c_r < c_r_star) {
        return Err(DispersionError::InternalInconsistency(format!(
            "perturbed speeds ({c_l}, {c_r}) not nested in ({c_l_star}, {c_r_star})"
        )));
    }
    Ok(PerturbedSpeeds {
        eta,
        lambda_l,
        lambda_r,
        c_l,
        c_r,
    })
}

/// Roots `(lower, upper)` of `M(lambda) - 1 - rate`; `None` means the
/// MGF never reaches `1 + rate` on that side.
fn root_interval<T: Scalar>(k: &Kernel<T>, rate: T) -> Result<(Option<T>, Option<T>)> {
    if k.is_degenerate() {
        return Ok((None, None));
    }
    let f = |l: T| overflow_as_positive(k.mgf(l).map(|m| m - T::one() - rate).map_err(Into::into));
    let side = |dir: T| -> Result<T> {
        let mut near = T::zero();
        let mut far = dir;
        for _ in 0..MAX_DOUBLINGS {
            if f(far)? > T::zero() {
                return bisect(near, far, -rate, f, Tolerance::new(1e-15, 0.0));
            }
            near = far;
            far = far * T::lit(2.0);
        }
        Err(DispersionError::BracketFailure(
            "MGF stays below 1 + rate on a half-line".into(),
        ))
    };
    let lo = side(-T::one())?;
    let hi = side(T::one())?;
    Ok((Some(lo), Some(hi)))
}

/// `Lambda^A cap Lambda^B`, or `None` when both kernels are degenerate and
/// the intersection is the whole line.
fn product_window<T: Scalar>(sys: &DispersionSystem<T>) -> Result<Option<(T, T)>> {
    let (a_lo, a_hi) = root_interval(sys.k1(), sys.rates().alpha)?;
    let (b_lo, b_hi) = root_interval(sys.k2(), sys.rates().beta)?;
    let pick = |x: Option<T>, y: Option<T>, lower: bool| match (x, y) {
        (Some(x), Some(y)) => Some(if lower { x.max(y) } else { x.min(y) }),
        (Some(v), None) | (None, Some(v)) => Some(v),
        (None, None) => None,
    };
    match (pick(a_lo, b_lo, true), pick(a_hi, b_hi, false)) {
        (Some(lo), Some(hi)) => Ok(Some((lo, hi))),
        _ => Ok(None),
    }
}

/// Maximiser and maximum of `A B` over `Lambda^A cap Lambda^B`.
pub fn max_product<T: Scalar>(sys: &DispersionSystem<T>) -> Result<(T, T)> {
    let Some((lo, hi)) = product_window(sys)? else {
        return Ok((T::zero(), sys.rates().alpha * sys.rates().beta));
    };
    let ab = |l: T| -> Result<T> { Ok(sys.eval_a(l)? * sys.eval_b(l)?) };
    golden_max(lo, hi, ab, T::lit(GOLDEN_TOL))
}

/// The set where `A B >= g'(0)h'(0)` with `A, B < 0`; `None` when empty.
pub fn lambda_set<T: Scalar>(sys: &DispersionSystem<T>) -> Result<Option<LambdaInterval<T>>> {
    let gh = sys.coupling();
    let Some((lo, hi)) = product_window(sys)? else {
        return Ok(None);
    };
    let excess = |l: T| -> Result<T> { Ok(sys.eval_a(l)? * sys.eval_b(l)? - gh) };
    let (arg, max) = golden_max(lo, hi, excess, T::lit(GOLDEN_TOL))?;
    let tol = T::lit(TANGENCY_TOL) * gh.max(T::one());
    if max < -tol {
        return Ok(None);
    }
    if max <= tol {
        return Ok(Some(LambdaInterval { lo: arg, hi: arg }));
    }
    let tol = Tolerance::new(1e-15, 0.0);
    let left = bisect(arg, lo, max, excess, tol)?;
    let right = bisect(arg, hi, max, excess, tol)?;
    Ok(Some(LambdaInterval {
        lo: left,
        hi: right,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Rates;

    fn system(a: (f64, f64, f64, f64), k1: Kernel, k2: Kernel) -> DispersionSystem {
        DispersionSystem::new(Rates::new(a.0, a.1, a.2, a.3).unwrap(), k1, k2)
    }

    fn normal(m: f64, s: f64) -> Kernel {
        Kernel::normal(m, s).unwrap()
    }

    fn grid_min(sys: &DispersionSystem, lo: f64, hi: f64, step: f64) -> (f64, f64) {
        let n = ((hi - lo) / step) as usize;
        (1..n)
            .map(|i| lo + i as f64 * step)
            .map(|l| (l, sys.eval_c(l).unwrap()))
            .fold((f64::NAN, f64::INFINITY), |b, p| if p.1 < b.1 { p } else { b })
    }

    #[test]
    fn symmetric_normal_matches_grid_search() {
        let sys = system((0.2, 0.2, 0.5, 0.5), normal(0.0, 1.0), normal(0.0, 1.0));
        let p = locate_speeds(&sys).unwrap();
        assert!(p.c_r_star > 0.0);
        assert!((p.c_r_star + p.c_l_star).abs() < 1e-12);
        assert!((p.lambda_r_star + p.lambda_l_star).abs() < 1e-12);
        let (_, c) = grid_min(&sys, 0.0, 5.0, 1e-5);
        assert!((c - p.c_r_star).abs() < 1e-4);
        assert!(c >= p.c_r_star - 1e-12);
        assert_eq!(p.classification, Classification::Bidirectional);
        assert!(p.lambda_interval.is_none());
    }

    #[test]
    fn degenerate_second_kernel() {
        let sys = system((0.2, 0.2, 0.5, 0.5), normal(0.0, 1.0), Kernel::Dirac);
        let p = locate_speeds(&sys).unwrap();
        let (_, c) = grid_min(&sys, 0.0, 5.0, 1e-5);
        assert!((c - p.c_r_star).abs() < 1e-4);
        assert_eq!(p.classification, Classification::Bidirectional);
    }

    #[test]
    fn both_degenerate_gives_no_extremum() {
        let sys = system((0.2, 0.2, 0.5, 0.5), Kernel::Dirac, Kernel::Dirac);
        // c = D(0)/lambda decreases for ever: no minimiser
        assert!(matches!(locate_speeds(&sys), Err(DispersionError::BracketFailure(_))));
        assert_eq!(lambda_set(&sys).unwrap(), None);
    }

    #[test]
    fn lambda_set_against_grid_scan() {
        let sys = system((0.2, 0.1, 0.11, 0.2), normal(0.5, 1.0), normal(0.0, 1.0));
        let iv = lambda_set(&sys).unwrap().expect("nonempty");
        assert!(iv.hi < 0.0 && !iv.is_singleton());
        let inside = |l: f64| {
            let (a, b) = (sys.eval_a(l).unwrap(), sys.eval_b(l).unwrap());
            a < 0.0 && b < 0.0 && a * b >= 0.022
        };
        let pts: Vec<f64> = (0..=300_000).map(|i| -3.0 + i as f64 * 1e-5).filter(|l| inside(*l)).collect();
        assert!((pts[0] - iv.lo).abs() < 2e-5);
        assert!((pts[pts.len() - 1] - iv.hi).abs() < 2e-5);
        assert_eq!(classify_propagation(Some(&iv)), Classification::RightOnly);
        let p = locate_speeds(&sys).unwrap();
        assert!(p.c_l_star > 0.0);
    }

    #[test]
    fn lambda_set_empty_for_wide_second_kernel() {
        let sys = system((0.2, 0.1, 0.11, 0.2), normal(0.5, 1.0), normal(0.0, 4.0));
        let scan = (0..=30_000)
            .map(|i| -3.0 + i as f64 * 1e-4)
            .map(|l| {
                let (a, b) = (sys.eval_a(l).unwrap(), sys.eval_b(l).unwrap());
                if a < 0.0 && b < 0.0 { a * b } else { 0.0 }
            })
            .fold(0.0, f64::max);
        assert!(scan < 0.022);
        assert_eq!(lambda_set(&sys).unwrap(), None);
    }

    #[test]
    fn lambda_set_empty_for_symmetric_kernels() {
        let sys = system((0.2, 0.2, 0.5, 0.5), normal(0.0, 1.0), normal(0.0, 2.0));
        assert_eq!(lambda_set(&sys).unwrap(), None);
    }

    #[test]
    fn classification_rules() {
        let iv = |lo, hi| LambdaInterval { lo, hi };
        assert_eq!(classify_propagation::<f64>(None), Classification::Bidirectional);
        assert_eq!(classify_propagation(Some(&iv(-0.9, -0.3))), Classification::RightOnly);
        assert_eq!(classify_propagation(Some(&iv(0.3, 0.9))), Classification::LeftOnly);
        assert_eq!(classify_propagation(Some(&iv(0.7, 0.7))), Classification::CriticalRight);
        assert_eq!(classify_propagation(Some(&iv(-0.7, -0.7))), Classification::CriticalLeft);
        assert_eq!(classify_by_signs(-1.0, 1.0, 1e-6), Classification::Bidirectional);
        assert_eq!(classify_by_signs(0.1, 1.0, 1e-6), Classification::RightOnly);
        assert_eq!(classify_by_signs(-1.0, -0.1, 1e-6), Classification::LeftOnly);
        assert_eq!(classify_by_signs(1e-9, 1.0, 1e-6), Classification::CriticalLeft);
        assert_eq!(classify_by_signs(-1.0, -1e-9, 1e-6), Classification::CriticalRight);
    }

    #[test]
    fn classification_text_round_trip() {
        for c in Classification::ALL {
            assert_eq!(c.to_string().parse::<Classification>().unwrap(), c);
        }
        assert!("sideways".parse::<Classification>().is_err());
    }

    #[test]
    fn perturbed_speeds_nest_and_converge() {
        let sys = system((0.2, 0.1, 0.11, 0.2), normal(0.5, 1.0), normal(0.0, 1.0));
        let p = locate_speeds(&sys).unwrap();
        let q = perturbed_speeds(&sys, 1e-8).unwrap();
        assert!((q.c_l - p.c_l_star).abs() < 1e-5 && (q.c_r - p.c_r_star).abs() < 1e-5);
        assert!(perturbed_speeds(&sys, 0.2).is_err());
    }

    #[test]
    fn perturbed_speeds_symmetric_pair() {
        let sys = system((0.2, 0.2, 0.6, 0.6), normal(0.0, 1.0), normal(0.0, 1.0));
        let q = perturbed_speeds(&sys, 0.3).unwrap();
        assert!((q.c_l + q.c_r).abs() < 1e-9);
    }

    #[test]
    fn f32_system_runs() {
        let sys = crate::DispersionSystem32::new(
            Rates::new(0.2f32, 0.2, 0.5, 0.5).unwrap(),
            Kernel::normal(0.0f32, 1.0).unwrap(),
            Kernel::normal(0.0f32, 1.0).unwrap(),
        );
        let p = locate_speeds(&sys).unwrap();
        let q = locate_speeds(&system((0.2, 0.2, 0.5, 0.5), normal(0.0, 1.0), normal(0.0, 1.0))).unwrap();
        assert!((p.c_r_star as f64 - q.c_r_star).abs() < 1e-4);
    }
}
