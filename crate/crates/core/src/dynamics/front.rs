//! Level-set tracking of the two outer fronts and linear speed fits.

use crate::scalar::Scalar;

use super::{DynamicsError, FieldState, Grid, Result};

/// Minimum number of samples a speed fit accepts.
pub const MIN_FIT_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSample<T = f64> {
    pub t: T,
    pub x_left: T,
    pub x_right: T,
}

/// Fitted front speeds and coefficients of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFit<T = f64> {
    pub c_left: T,
    pub c_right: T,
    pub r2_left: T,
    pub r2_right: T,
    pub samples: usize,
}

/// Outermost crossings of `min(u, v) = nu`, one sample per recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrace<T = f64> {
    pub nu: T,
    pub samples: Vec<FrontSample<T>>,
}

impl<T: Scalar> FrontTrace<T> {
    pub fn new(nu: T) -> Result<Self> {
        if !(nu > T::zero() && nu < T::one()) {
            return Err(DynamicsError::InvalidConfig(format!("front level must lie in (0, 1), got {nu}")));
        }
        Ok(Self {
            nu,
            samples: Vec::new(),
        })
    }

    /// Crossing positions in `state`, linearly interpolated between cells;
    /// `None` while no cell reaches the level.
    pub fn locate(&self, grid: &Grid<T>, state: &FieldState<T>) -> Option<(T, T)> {
        let m = state.min_field();
        let nu = self.nu;
        let first = m.iter().position(|x| *x >= nu)?;
        let last = m.iter().rposition(|x| *x >= nu)?;
        let left = if first == 0 {
            grid.x(0)
        } else {
            let (a, b) = (m[first - 1], m[first]);
            grid.x(first) - (b - nu) / (b - a) * grid.dx
        };
        let right = if last + 1 == m.len() {
            grid.x(last)
        } else {
            let (a, b) = (m[last], m[last + 1]);
            grid.x(last) + (a - nu) / (a - b) * grid.dx
        };
        Some((left, right))
    }

    pub fn record(&mut self, grid: &Grid<T>, state: &FieldState<T>) {
        if let Some((x_left, x_right)) = self.locate(grid, state) {
            if self.samples.last().map_or(true, |s| state.t > s.t) {
                self.samples.push(FrontSample {
                    t: state.t,
                    x_left,
                    x_right,
                });
            }
        }
    }
}

/// Least-squares slope and `r^2` of `ys` against `ts`.
fn linear_fit<T: Scalar>(ts: &[T], ys: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(ts.len());
    let mt = ts.iter().fold(T::zero(), |a, b| a + *b) / n;
    let my = ys.iter().fold(T::zero(), |a, b| a + *b) / n;
    let (mut stt, mut sty, mut syy) = (T::zero(), T::zero(), T::zero());
    for (t, y) in ts.iter().zip(ys) {
        let (dt, dy) = (*t - mt, *y - my);
        stt = stt + dt * dt;
        sty = sty + dt * dy;
        syy = syy + dy * dy;
    }
    let slope = sty / stt;
    let ss_res = ys
        .iter()
        .zip(ts)
        .map(|(y, t)| *y - my - slope * (*t - mt))
        .fold(T::zero(), |a, r| a + r * r);
    let r2 = if syy == T::zero() {
        T::one()
    } else {
        T::one() - ss_res / syy
    };
    (slope, r2)
}

/// Fits both front positions linearly over samples with
/// `t >= (1 - window) * t_last`.
pub fn estimate_speed<T: Scalar>(trace: &FrontTrace<T>, window: T) -> Result<SpeedFit<T>> {
    if !(window > T::zero() && window <= T::one()) {
        return Err(DynamicsError::InvalidConfig(format!("fit window must lie in (0, 1], got {window}")));
    }
    let t_last = trace.samples.last().map_or(T::zero(), |s| s.t);
    let start = (T::one() - window) * t_last;
    let used: Vec<&FrontSample<T>> = trace.samples.iter().filter(|s| s.t >= start).collect();
    if used.len() < MIN_FIT_SAMPLES {
        return Err(DynamicsError::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: used.len(),
        });
    }
    let ts: Vec<T> = used.iter().map(|s| s.t).collect();
    let xl: Vec<T> = used.iter().map(|s| s.x_left).collect();
    let xr: Vec<T> = used.iter().map(|s| s.x_right).collect();
    let (c_left, r2_left) = linear_fit(&ts, &xl);
    let (c_right, r2_right) = linear_fit(&ts, &xr);
    Ok(SpeedFit {
        c_left,
        c_right,
        r2_left,
        r2_right,
        samples: used.len(),
    })
}
