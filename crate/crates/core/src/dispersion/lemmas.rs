//! Quantities from the lower-solution construction: the root interval of
//! `G H = (g'(0)-eta)(h'(0)-eta)` and the auxiliary power function
//! `f(y) = M y - N y^{1+delta} - L y^{1-delta}`.

use crate::roots::{bisect, Tolerance};
use crate::scalar::Scalar;

use super::speeds::right_extremum;
use super::{DispersionError, DispersionSystem, Result};

const INTERIOR_SAMPLES: usize = 100;
const MAX_DOUBLINGS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Roots `gamma`, `zeta` with `|gamma| < |lambda*(eta)| < |zeta|`; both
/// negative on the left side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhInterval<T = f64> {
    pub gamma: T,
    pub zeta: T,
}

/// Roots of `G(c, .) H(c, .) = (g'(0)-eta)(h'(0)-eta)` around `lambda*(eta)`.
///
/// On the right `c` must lie in `(c_r*(eta), c_r*)`, on the left in
/// `(c_l*, c_l*(eta))`. The product exceeds the threshold, with `G, H > 0`,
/// strictly between the two roots; this is re-checked on interior samples.
pub fn gh_interval<T: Scalar>(
    sys: &DispersionSystem<T>,
    c: T,
    eta: T,
    side: Side,
) -> Result<GhInterval<T>> {
    match side {
        Side::Right => right_interval(sys, c, eta),
        Side::Left => {
            let r = right_interval(&sys.reflect(), -c, eta)?;
            Ok(GhInterval {
                gamma: -r.gamma,
                zeta: -r.zeta,
            })
        }
    }
}

fn right_interval<T: Scalar>(sys: &DispersionSystem<T>, c: T, eta: T) -> Result<GhInterval<T>> {
    let perturbed = sys.perturbed(eta)?;
    let (lambda_eta, c_eta) = right_extremum(&perturbed)?;
    let (_, c_star) = right_extremum(sys)?;
    if !(c > c_eta && c < c_star) {
        return Err(DispersionError::Domain(format!(
            "c = {c} outside the admissible band ({c_eta}, {c_star})"
        )));
    }
    let threshold = perturbed.coupling();
    let phi = |l: T| -> Result<T> { Ok(sys.eval_g(c, l)? * sys.eval_h(c, l)? - threshold) };
    let min_gh = |l: T| -> Result<T> {
        match (sys.eval_g(c, l), sys.eval_h(c, l)) {
            (Ok(g), Ok(h)) => Ok(g.min(h)),
            // past overflow A and B are huge, so G and H are negative
            _ => Ok(-T::one()),
        }
    };

    let peak = phi(lambda_eta)?;
    if !(peak > T::zero()) {
        return Err(DispersionError::Domain(format!(
            "c = {c} too close to c_r*(eta) = {c_eta} to resolve the interval"
        )));
    }
    let tol = Tolerance::new(1e-15, 0.0);
    let gamma = bisect(lambda_eta, T::zero(), peak, phi, tol)?;

    // concave G and H are positive on a single interval containing [0, lambda_eta]
    let mut near = lambda_eta;
    let mut step = lambda_eta.max(T::lit(1e-3));
    let mut far = near + step;
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if min_gh(far)? <= T::zero() {
            found = true;
            break;
        }
        near = far;
        step = step * T::lit(2.0);
        far = near + step;
    }
    if !found {
        return Err(DispersionError::BracketFailure(
            "G and H stay positive to the right of lambda*(eta)".into(),
        ));
    }
    let lambda_one = bisect(near, far, min_gh(near)?, min_gh, tol)?;
    let zeta = bisect(lambda_eta, lambda_one, peak, phi, tol)?;

    for i in 1..=INTERIOR_SAMPLES {
        let l = gamma + (zeta - gamma) * T::from_usize_lossy(i) / T::from_usize_lossy(INTERIOR_SAMPLES + 1);
        let (g, h) = (sys.eval_g(c, l)?, sys.eval_h(c, l)?);
        if !(g > T::zero() && h > T::zero() && g * h > threshold) {
            return Err(DispersionError::InternalInconsistency(format!(
                "G H interval check failed at lambda = {l}: G = {g}, H = {h}"
            )));
        }
    }
    Ok(GhInterval { gamma, zeta })
}

/// Supremum of `f` on `y > 0` and, when positive, the interval where `f > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxBounds<T = f64> {
    pub fmax: T,
    /// Maximiser of `f`, present when `fmax > 0`.
    pub argmax: Option<T>,
    /// `(R, S)`, present when `M^2 > 4 L N`.
    pub roots: Option<(T, T)>,
}

/// `f(y) = M y - N y^{1+delta} - L y^{1-delta}`.
pub fn aux_profile<T: Scalar>(m: T, n: T, l: T, delta: T, y: T) -> T {
    m * y - n * y.powf(T::one() + delta) - l * y.powf(T::one() - delta)
}

/// Closed-form sign analysis of [`aux_profile`].
///
/// With `s = y^delta`, `f = y^{1-delta} (M s - N s^2 - L)`, so `f > 0`
/// exactly for `s` between the roots of the quadratic.
pub fn aux_lemma43<T: Scalar>(m: T, n: T, l: T, delta: T) -> Result<AuxBounds<T>> {
    let positive = [m, n, l].iter().all(|v| *v > T::zero() && v.is_finite());
    if !positive || !(delta > T::zero() && delta < T::one()) {
        return Err(DispersionError::Domain(format!(
            "need M, N, L > 0 and delta in (0, 1); got {m}, {n}, {l}, {delta}"
        )));
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let inv_delta = T::one() / delta;
    let disc = m * m - four * l * n;
    if disc <= T::zero() {
        return Ok(AuxBounds {
            fmax: T::zero(),
            argmax: None,
            roots: None,
        });
    }
    let sq = disc.sqrt();
    // (M - sq) written without cancellation
    let s_lo = two * l / (m + sq);
    let s_hi = (m + sq) / (two * n);
    let roots = Some((s_lo.powf(inv_delta), s_hi.powf(inv_delta)));

    let crit_disc = m * m - four * (T::one() - delta * delta) * l * n;
    let s0 = (m + crit_disc.sqrt()) / (two * (T::one() + delta) * n);
    let y0 = s0.powf(inv_delta);
    let f0 = aux_profile(m, n, l, delta, y0);
    Ok(AuxBounds {
        fmax: f0.max(T::zero()),
        argmax: Some(y0),
        roots,
    })
}
