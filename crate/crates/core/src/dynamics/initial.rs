use crate::scalar::Scalar;

use super::{DynamicsError, FieldState, Grid, Result};

/// Values below this are flushed to zero to keep subnormals out of the run.
const TAIL_FLOOR: f64 = 1e-300;

/// Initial condition, applied identically to both components unless custom.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData<T = f64> {
    /// Height `height` on `|x - center| <= halfwidth`, zero elsewhere.
    CompactBump { center: T, halfwidth: T, height: T },
    /// `amplitude * exp(-rate |x - center|)` outside the plateau
    /// `|x - center| <= plateau`, constant inside it.
    ExponentialTail {
        center: T,
        rate: T,
        amplitude: T,
        plateau: T,
    },
    Custom { u: Vec<T>, v: Vec<T> },
}

impl<T: Scalar> InitialData<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        match self {
            InitialData::CompactBump { halfwidth, height, .. } => {
                if !(*halfwidth > T::zero()) || !(*height > T::zero() && *height <= T::one()) {
                    return bad(format!(
                        "bump needs halfwidth > 0 and height in (0, 1], got {halfwidth}, {height}"
                    ));
                }
            }
            InitialData::ExponentialTail {
                rate,
                amplitude,
                plateau,
                ..
            } => {
                if !(*rate > T::zero()) || !(*amplitude > T::zero()) || !(*plateau >= T::zero()) {
                    return bad("exponential tail needs rate, amplitude > 0 and plateau >= 0".into());
                }
                if *amplitude * (-*rate * *plateau).exp() > T::one() {
                    return bad("exponential tail exceeds 1 on its plateau".into());
                }
            }
            InitialData::Custom { u, v } => {
                let inside = |x: &T| *x >= T::zero() && *x <= T::one();
                if u.len() != v.len() || !u.iter().chain(v).all(inside) {
                    return bad("custom data must be two equal-length vectors in [0, 1]".into());
                }
            }
        }
        Ok(())
    }

    /// Value of the (common) profile at `x`; `None` for custom data.
    pub fn profile(&self, x: T) -> Option<T> {
        match self {
            InitialData::CompactBump {
                center,
                halfwidth,
                height,
            } => Some(if (x - *center).abs() <= *halfwidth {
                *height
            } else {
                T::zero()
            }),
            InitialData::ExponentialTail {
                center,
                rate,
                amplitude,
                plateau,
            } => {
                let d = (x - *center).abs().max(*plateau);
                let val = *amplitude * (-*rate * d).exp();
                Some(if val < T::lit(TAIL_FLOOR) { T::zero() } else { val })
            }
            InitialData::Custom { .. } => None,
        }
    }

    pub fn sample(&self, grid: &Grid<T>) -> Result<FieldState<T>> {
        self.validate()?;
        if let InitialData::Custom { u, v } = self {
            if u.len() != grid.n {
                return Err(DynamicsError::InvalidConfig(format!(
                    "custom data has {} cells, grid has {}",
                    u.len(),
                    grid.n
                )));
            }
            return Ok(FieldState {
                t: T::zero(),
                u: u.clone(),
                v: v.clone(),
            });
        }
        let u: Vec<T> = (0..grid.n)
            .map(|i| self.profile(grid.x(i)).expect("analytic profile"))
            .collect();
        Ok(FieldState {
            t: T::zero(),
            v: u.clone(),
            u,
        })
    }

    /// Symmetric about `center` and nonincreasing away from it.
    pub fn is_symmetric_decreasing(&self) -> bool {
        !matches!(self, InitialData::Custom { .. })
    }

    pub fn center(&self) -> Option<T> {
        match self {
            InitialData::CompactBump { center, .. } | InitialData::ExponentialTail { center, .. } => Some(*center),
            InitialData::Custom { .. } => None,
        }
    }
}
