//! Checks a run must pass whatever the parameters: domination by the
//! exponential upper envelope, order preservation between two runs, and
//! preservation of symmetric monotone profiles.

use crate::dispersion::{DispersionSystem, Nonlinearity, SpeedProfile};
use crate::scalar::Scalar;

use super::{DiscreteKernel, DynamicsError, FieldState, Grid, Result, Trajectory};

/// Slack allowed in every ordering check.
const ORDER_TOL: f64 = 1e-8;

/// `u_bar = min{1, G e^{l_l(-x + c_l t)}, G e^{l_r(-x + c_r t)}}` and the
/// same for `v_bar` with the branches scaled by `b(l_l)`, `b(l_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperEnvelope<T = f64> {
    pub gamma: T,
    pub lambda_l: T,
    pub lambda_r: T,
    pub c_l: T,
    pub c_r: T,
    pub b_l: T,
    pub b_r: T,
}

impl<T: Scalar> UpperEnvelope<T> {
    fn unscaled(sys: &DispersionSystem<T>, profile: &SpeedProfile<T>) -> Result<Self> {
        Ok(Self {
            gamma: T::one(),
            lambda_l: profile.lambda_l_star,
            lambda_r: profile.lambda_r_star,
            c_l: profile.c_l_star,
            c_r: profile.c_r_star,
            b_l: sys.b_coefficient(profile.lambda_l_star)?,
            b_r: sys.b_coefficient(profile.lambda_r_star)?,
        })
    }

    /// Smallest admissible `Gamma`: at least `max{1, 1/b_l, 1/b_r}` and large
    /// enough for the envelope to dominate `initial` on the grid.
    pub fn minimal(
        sys: &DispersionSystem<T>,
        profile: &SpeedProfile<T>,
        grid: &Grid<T>,
        initial: &FieldState<T>,
    ) -> Result<Self> {
        let mut env = Self::unscaled(sys, profile)?;
        let mut gamma = T::one().max(env.b_l.recip()).max(env.b_r.recip());
        for i in 0..grid.n {
            let x = grid.x(i);
            let (el, er) = ((env.lambda_l * x).exp(), (env.lambda_r * x).exp());
            gamma = gamma
                .max(initial.u[i] * el.max(er))
                .max(initial.v[i] * (el / env.b_l).max(er / env.b_r));
        }
        env.gamma = gamma * (T::one() + T::lit(1e-12));
        Ok(env)
    }

    /// Envelope with a given `Gamma`, checked against `initial`.
    pub fn with_gamma(
        sys: &DispersionSystem<T>,
        profile: &SpeedProfile<T>,
        gamma: T,
        grid: &Grid<T>,
        initial: &FieldState<T>,
    ) -> Result<Self> {
        let mut env = Self::unscaled(sys, profile)?;
        env.gamma = gamma;
        if !(gamma >= T::one() && gamma * env.b_l >= T::one() && gamma * env.b_r >= T::one()) {
            return Err(DynamicsError::InvalidConfig(format!(
                "Gamma = {gamma} must be at least max(1, 1/b_l, 1/b_r)"
            )));
        }
        for i in 0..grid.n {
            let x = grid.x(i);
            let (ub, vb) = env.eval(T::zero(), x);
            if initial.u[i] > ub || initial.v[i] > vb {
                return Err(DynamicsError::InitialDominationFailure { x: x.as_f64() });
            }
        }
        Ok(env)
    }

    /// `(u_bar, v_bar)` at `(t, x)`.
    pub fn eval(&self, t: T, x: T) -> (T, T) {
        let left = self.gamma * (self.lambda_l * (-x + self.c_l * t)).exp();
        let right = self.gamma * (self.lambda_r * (-x + self.c_r * t)).exp();
        let u = T::one().min(left).min(right);
        let v = T::one().min(self.b_l * left).min(self.b_r * right);
        (u, v)
    }

    /// Largest amount by which `state` exceeds the envelope.
    pub fn max_excess(&self, grid: &Grid<T>, state: &FieldState<T>) -> T {
        (0..grid.n).fold(T::neg_infinity(), |m, i| {
            let (ub, vb) = self.eval(state.t, grid.x(i));
            m.max(state.u[i] - ub).max(state.v[i] - vb)
        })
    }

    /// Whether every snapshot of `run` lies below the envelope up to `1e-8`.
    pub fn dominates(&self, run: &Trajectory<T>) -> bool {
        let tol = T::lit(ORDER_TOL);
        run.snapshots.iter().all(|s| self.max_excess(&run.grid, s) <= tol)
    }
}

fn same_setup<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<()> {
    let mismatch = |what: &str| Err(DynamicsError::ConfigMismatch(what.into()));
    if a.grid != b.grid {
        return mismatch("grids differ");
    }
    if a.dt != b.dt {
        return mismatch("time steps differ");
    }
    if a.params != b.params {
        return mismatch("model parameters differ");
    }
    if a.kernels != b.kernels {
        return mismatch("kernels differ");
    }
    if a.snapshots.len() != b.snapshots.len() || a.snapshots.iter().zip(&b.snapshots).any(|(x, y)| x.t != y.t) {
        return mismatch("snapshot times differ");
    }
    Ok(())
}

/// `a >= b - 1e-8` in both components at every snapshot.
pub fn check_comparison<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<bool> {
    same_setup(a, b)?;
    let tol = T::lit(ORDER_TOL);
    Ok(a.snapshots.iter().zip(&b.snapshots).all(|(x, y)| {
        x.u.iter().zip(&y.u).all(|(p, q)| *p >= *q - tol) && x.v.iter().zip(&y.v).all(|(p, q)| *p >= *q - tol)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneCheck {
    Holds,
    Fails,
    /// A kernel is not symmetric and nonincreasing away from 0.
    NotApplicable,
}

/// Symmetry about the grid centre and monotone decay towards both ends,
/// each to `1e-8`.
pub fn check_monotone<T: Scalar>(
    k1: &DiscreteKernel<T>,
    k2: &DiscreteKernel<T>,
    state: &FieldState<T>,
) -> MonotoneCheck {
    let eligible = |k: &DiscreteKernel<T>| k.is_identity() || k.analysis_kernel().is_symmetric_unimodal();
    if !(eligible(k1) && eligible(k2)) {
        return MonotoneCheck::NotApplicable;
    }
    let tol = T::lit(ORDER_TOL);
    let n = state.len();
    let ok = |f: &[T]| {
        (0..n / 2).all(|i| (f[i] - f[n - 1 - i]).abs() <= tol) && (n / 2..n - 1).all(|i| f[i + 1] <= f[i] + tol)
    };
    if ok(&state.u) && ok(&state.v) {
        MonotoneCheck::Holds
    } else {
        MonotoneCheck::Fails
    }
}

/// With a point-mass second kernel the `v` equation is the pointwise ODE
/// `v' = -beta v + g(u)`. This integrates it independently in every cell,
/// with `u` taken from consecutive snapshots by cubic interpolation and the
/// step subdivided `substeps` times, and returns the largest deviation
/// from the simulated `v`.
pub fn degenerate_ode_deviation<T: Scalar>(
    run: &Trajectory<T>,
    beta: T,
    g: &Nonlinearity<T>,
    substeps: usize,
) -> Result<T> {
    if !run.kernels.1.is_identity() {
        return Err(DynamicsError::ConfigMismatch("second kernel is not a point mass".into()));
    }
    let snaps = &run.snapshots;
    if snaps.len() < 4 {
        return Err(DynamicsError::ConfigMismatch("need at least four snapshots".into()));
    }
    let h = snaps[1].t - snaps[0].t;
    if snaps.windows(2).any(|w| ((w[1].t - w[0].t) - h).abs() > T::lit(1e-9) * h) {
        return Err(DynamicsError::ConfigMismatch("snapshots must be equally spaced".into()));
    }
    let n = run.grid.n;
    let m = snaps.len();
    let sub = T::from_usize_lossy(substeps.max(1));
    let dt = h / sub;
    let mut worst = T::zero();
    for i in 0..n {
        // cubic Lagrange through four neighbouring snapshots
        let u_at = |t: T| -> T {
            let k = (t / h).floor().to_usize().unwrap_or(0).min(m - 2);
            let base = k.saturating_sub(1).min(m - 4);
            let s = t / h - T::from_usize_lossy(base);
            let mut acc = T::zero();
            for a in 0..4 {
                let mut w = T::one();
                for b in 0..4 {
                    if a != b {
                        w = w * (s - T::from_usize_lossy(b)) / (T::from_usize_lossy(a) - T::from_usize_lossy(b));
                    }
                }
                acc = acc + w * snaps[base + a].u[i];
            }
            acc
        };
        let f = |t: T, v: T| -> T { -beta * v + g.value(u_at(t - snaps[0].t)) };
        let mut v = snaps[0].v[i];
        for k in 1..m {
            for j in 0..substeps.max(1) {
                let t = snaps[k - 1].t + T::from_usize_lossy(j) * dt;
                let half = dt * T::lit(0.5);
                let k1 = f(t, v);
                let k2 = f(t + half, v + half * k1);
                let k3 = f(t + half, v + half * k2);
                let k4 = f(t + dt, v + dt * k3);
                v = v + dt / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4);
            }
            worst = worst.max((v - snaps[k].v[i]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{locate_speeds, Rates};
    use crate::kernels::Kernel;

    fn envelope() -> UpperEnvelope {
        let sys = DispersionSystem::new(
            Rates::new(0.2, 0.2, 0.6, 0.6).unwrap(),
            Kernel::normal(0.0, 1.0).unwrap(),
            Kernel::normal(0.0, 1.0).unwrap(),
        );
        let p = locate_speeds(&sys).unwrap();
        let g = Grid::centered(20.0, 0.1).unwrap();
        let mut s = FieldState::zeros(g.n);
        s.u[g.n / 2] = 0.5;
        UpperEnvelope::minimal(&sys, &p, &g, &s).unwrap()
    }

    #[test]
    fn envelope_is_one_inside_the_band() {
        let e = envelope();
        assert_eq!(e.eval(10.0, 0.0), (1.0, 1.0));
        let x = e.c_r * 10.0 + e.gamma.ln() / e.lambda_r;
        let (u, _) = e.eval(10.0, x);
        assert!((u - 1.0).abs() < 1e-12);
        assert!(e.eval(10.0, x + 1.0).0 < 1.0);
    }

    #[test]
    fn gamma_too_small_is_rejected() {
        let sys = DispersionSystem::new(
            Rates::new(0.2, 0.2, 0.6, 0.6).unwrap(),
            Kernel::normal(0.0, 1.0).unwrap(),
            Kernel::normal(0.0, 1.0).unwrap(),
        );
        let p = locate_speeds(&sys).unwrap();
        let g = Grid::centered(20.0, 0.1).unwrap();
        let mut s = FieldState::zeros(g.n);
        s.u[g.n - 1] = 0.5;
        let err = UpperEnvelope::with_gamma(&sys, &p, 2.0, &g, &s).unwrap_err();
        assert!(matches!(err, DynamicsError::InitialDominationFailure { .. }));
    }
}
