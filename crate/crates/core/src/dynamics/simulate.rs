//! Classical RK4 on the method-of-lines system
//!
//! ```text
//! u' = k1 * u - (1 + alpha) u + h(v)
//! v' = k2 * v - (1 + beta)  v + g(u)
//! ```

use crate::dispersion::{DispersionSystem, ModelParams, Rates};
use crate::kernels::Kernel;
use crate::scalar::Scalar;

use super::front::{estimate_speed, FrontTrace, SpeedFit};
use super::{ConvolutionMethod, Convolver, DiscreteKernel, DynamicsError, FieldState, Grid, InitialData, Result};

/// Overshoot of the unit box tolerated (and clamped) after each step.
pub const BOX_TOLERANCE: f64 = 1e-9;
const BOUNDARY_FRACTION: f64 = 0.05;
const BOUNDARY_LEVEL: f64 = 1e-6;

/// Largest admissible time step, `0.5 / (2 + alpha + beta + g'(0) + h'(0))`.
pub fn stability_bound<T: Scalar>(rates: &Rates<T>) -> T {
    T::lit(0.5) / (T::lit(2.0) + rates.alpha + rates.beta + rates.g0 + rates.h0)
}

/// Everything a run needs besides the model itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T = f64> {
    pub grid: Grid<T>,
    pub dt: T,
    pub horizon: T,
    /// Steps between stored snapshots (the final state is always stored).
    pub snapshot_stride: usize,
    /// Steps between front samples.
    pub trace_stride: usize,
    /// Front level.
    pub nu: T,
    /// Trailing fraction of the run used by the speed fit.
    pub fit_window: T,
    pub method: ConvolutionMethod,
    pub initial: InitialData<T>,
}

impl<T: Scalar> SimConfig<T> {
    /// Defaults: `dt = 0.05`, front level 0.1, fit over the last half, one
    /// snapshot per time unit.
    pub fn new(grid: Grid<T>, horizon: T, initial: InitialData<T>) -> Self {
        let dt = T::lit(0.05);
        Self {
            grid,
            dt,
            horizon,
            snapshot_stride: 20,
            trace_stride: 1,
            nu: T::lit(0.1),
            fit_window: T::lit(0.5),
            method: ConvolutionMethod::Auto,
            initial,
        }
    }

    pub fn steps(&self) -> Result<usize> {
        let steps = (self.horizon / self.dt).round();
        let exact = (steps * self.dt - self.horizon).abs() <= T::lit(1e-9) * self.horizon.max(T::one());
        if !(self.dt > T::zero()) || !(self.horizon > T::zero()) || !exact {
            return Err(DynamicsError::InvalidConfig(format!(
                "horizon {} must be a positive multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        steps
            .to_usize()
            .ok_or_else(|| DynamicsError::InvalidConfig("too many steps".into()))
    }
}

/// Stored output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = f64> {
    pub grid: Grid<T>,
    pub dt: T,
    pub params: ModelParams<T>,
    pub kernels: (DiscreteKernel<T>, DiscreteKernel<T>),
    pub snapshots: Vec<FieldState<T>>,
    pub trace: FrontTrace<T>,
    /// Exponential-tail data with a kernel that is not symmetric and
    /// nonincreasing away from 0: the decay-rate speed result is not
    /// guaranteed for such runs.
    pub outside_theorem_hypotheses: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &FieldState<T> {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn fit(&self, window: T) -> Result<SpeedFit<T>> {
        estimate_speed(&self.trace, window)
    }
}

/// Owns the discretised operator and the RK4 work arrays.
#[derive(Debug, Clone)]
pub struct Simulator<T: Scalar = f64> {
    params: ModelParams<T>,
    grid: Grid<T>,
    method: ConvolutionMethod,
    conv: Convolver<T>,
    cu: Vec<T>,
    cv: Vec<T>,
    su: Vec<T>,
    sv: Vec<T>,
    ku: Vec<T>,
    kv: Vec<T>,
    au: Vec<T>,
    av: Vec<T>,
}

impl<T: Scalar> Simulator<T> {
    pub fn new(
        params: &ModelParams<T>,
        k1: &Kernel<T>,
        k2: &Kernel<T>,
        grid: Grid<T>,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        let d1 = DiscreteKernel::new(k1, grid.dx)?;
        let d2 = DiscreteKernel::new(k2, grid.dx)?;
        Ok(Self::from_discrete(params, d1, d2, grid, method))
    }

    pub fn from_discrete(
        params: &ModelParams<T>,
        k1: DiscreteKernel<T>,
        k2: DiscreteKernel<T>,
        grid: Grid<T>,
        method: ConvolutionMethod,
    ) -> Self {
        let n = grid.n;
        let z = || vec![T::zero(); n];
        Self {
            params: params.clone(),
            grid,
            method,
            conv: Convolver::new(n, k1, k2, method),
            cu: z(),
            cv: z(),
            su: z(),
            sv: z(),
            ku: z(),
            kv: z(),
            au: z(),
            av: z(),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn convolver(&self) -> &Convolver<T> {
        &self.conv
    }

    /// Dispersion system of the sampled kernels: the linearisation the
    /// simulator actually discretises.
    pub fn analysis_system(&self) -> DispersionSystem<T> {
        DispersionSystem::new(
            self.params.rates(),
            self.conv.k1().analysis_kernel().clone(),
            self.conv.k2().analysis_kernel().clone(),
        )
    }

    /// Right-hand side of the semi-discrete system.
    pub fn rhs(&mut self, u: &[T], v: &[T], du: &mut [T], dv: &mut [T]) {
        self.conv.apply(u, v, &mut self.cu, &mut self.cv);
        let ModelParams { alpha, beta, g, h } = &self.params;
        let (a1, b1) = (T::one() + *alpha, T::one() + *beta);
        for i in 0..u.len() {
            du[i] = self.cu[i] - a1 * u[i] + h.value(v[i]);
            dv[i] = self.cv[i] - b1 * v[i] + g.value(u[i]);
        }
    }

    /// `k = f(s)`, `acc += weight k`, `s = y + scale k`.
    fn stage(&mut self, y: &FieldState<T>, scale: T, weight: T) {
        let (mut su, mut sv) = (std::mem::take(&mut self.su), std::mem::take(&mut self.sv));
        let (mut ku, mut kv) = (std::mem::take(&mut self.ku), std::mem::take(&mut self.kv));
        self.rhs(&su, &sv, &mut ku, &mut kv);
        for i in 0..ku.len() {
            self.au[i] = self.au[i] + weight * ku[i];
            self.av[i] = self.av[i] + weight * kv[i];
            su[i] = y.u[i] + scale * ku[i];
            sv[i] = y.v[i] + scale * kv[i];
        }
        (self.su, self.sv, self.ku, self.kv) = (su, sv, ku, kv);
    }

    /// One RK4 step of length `dt`; values are checked against the unit box
    /// and clamped only within [`BOX_TOLERANCE`].
    pub fn step(&mut self, state: &mut FieldState<T>, dt: T) -> Result<()> {
        let bound = stability_bound(&self.params.rates());
        if !(dt > T::zero() && dt <= bound) {
            return Err(DynamicsError::InvalidConfig(format!(
                "dt = {dt} outside (0, {bound}]"
            )));
        }
        let half = dt * T::lit(0.5);
        let two = T::lit(2.0);
        self.au.iter_mut().for_each(|x| *x = T::zero());
        self.av.iter_mut().for_each(|x| *x = T::zero());
        self.su.copy_from_slice(&state.u);
        self.sv.copy_from_slice(&state.v);
        self.stage(state, half, T::one());
        self.stage(state, half, two);
        self.stage(state, dt, two);
        self.stage(state, T::zero(), T::one());
        let sixth = dt / T::lit(6.0);
        let tol = T::lit(BOX_TOLERANCE);
        let t = state.t + dt;
        for (field, acc) in [(&mut state.u, &self.au), (&mut state.v, &self.av)] {
            for (i, (x, a)) in field.iter_mut().zip(acc).enumerate() {
                let y = *x + sixth * *a;
                if !(y >= -tol && y <= T::one() + tol) {
                    return Err(DynamicsError::BoxViolation {
                        t: t.as_f64(),
                        cell: i,
                        value: y.as_f64(),
                    });
                }
                *x = y.max(T::zero()).min(T::one());
            }
        }
        state.t = t;
        Ok(())
    }

    /// Largest `max(u, v)` in the outer 5% of cells on either side.
    pub fn boundary_level(&self, state: &FieldState<T>) -> T {
        let n = state.len();
        let m = ((T::from_usize_lossy(n) * T::lit(BOUNDARY_FRACTION)).ceil())
            .to_usize()
            .unwrap_or(1)
            .clamp(1, n);
        (0..m)
            .chain(n - m..n)
            .fold(T::zero(), |acc, i| acc.max(state.u[i]).max(state.v[i]))
    }

    /// Runs from the configured initial data.
    ///
    /// Under [`ConvolutionMethod::Auto`], exponential-tail data is convolved
    /// by direct summation: the tail ahead of the front sets the speed and
    /// lies far below the round-off floor of the FFT.
    pub fn run(&mut self, cfg: &SimConfig<T>) -> Result<Trajectory<T>> {
        let state = cfg.initial.sample(&self.grid)?;
        let tails = matches!(cfg.initial, InitialData::ExponentialTail { .. });
        if self.method == ConvolutionMethod::Auto {
            let method = if tails { ConvolutionMethod::Direct } else { ConvolutionMethod::Auto };
            self.conv = self.conv.with_method(method);
        }
        let hyp = self.outside_hypotheses(&cfg.initial);
        self.run_from(cfg, state, hyp)
    }

    fn outside_hypotheses(&self, initial: &InitialData<T>) -> bool {
        let ok = |k: &DiscreteKernel<T>| k.is_identity() || k.analysis_kernel().is_symmetric_unimodal();
        matches!(initial, InitialData::ExponentialTail { .. }) && !(ok(self.conv.k1()) && ok(self.conv.k2()))
    }

    fn run_from(&mut self, cfg: &SimConfig<T>, mut state: FieldState<T>, hyp: bool) -> Result<Trajectory<T>> {
        if cfg.grid != self.grid {
            return Err(DynamicsError::InvalidConfig("run grid differs from simulator grid".into()));
        }
        if cfg.snapshot_stride == 0 || cfg.trace_stride == 0 {
            return Err(DynamicsError::InvalidConfig("strides must be positive".into()));
        }
        let steps = cfg.steps()?;
        let mut trace = FrontTrace::new(cfg.nu)?;
        let level = T::lit(BOUNDARY_LEVEL);
        let check_boundary = |sim: &Self, s: &FieldState<T>| -> Result<()> {
            let b = sim.boundary_level(s);
            if b > level {
                return Err(DynamicsError::BoundaryContamination {
                    t: s.t.as_f64(),
                    value: b.as_f64(),
                });
            }
            Ok(())
        };
        check_boundary(self, &state)?;
        trace.record(&self.grid, &state);
        let mut snapshots = vec![state.clone()];
        for s in 1..=steps {
            self.step(&mut state, cfg.dt)?;
            // time from the step count keeps sample times exact
            state.t = T::from_usize_lossy(s) * cfg.dt;
            check_boundary(self, &state)?;
            if s % cfg.trace_stride == 0 {
                trace.record(&self.grid, &state);
            }
            if s % cfg.snapshot_stride == 0 || s == steps {
                snapshots.push(state.clone());
            }
        }
        Ok(Trajectory {
            grid: self.grid,
            dt: cfg.dt,
            params: self.params.clone(),
            kernels: (self.conv.k1().clone(), self.conv.k2().clone()),
            snapshots,
            trace,
            outside_theorem_hypotheses: hyp,
        })
    }

    /// Runs from explicit initial data instead of `cfg.initial`.
    pub fn run_with(&mut self, cfg: &SimConfig<T>, state: FieldState<T>) -> Result<Trajectory<T>> {
        if state.len() != self.grid.n {
            return Err(DynamicsError::InvalidConfig("initial state length differs from grid".into()));
        }
        self.run_from(cfg, state, false)
    }
}
