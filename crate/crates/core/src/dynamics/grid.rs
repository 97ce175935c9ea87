use crate::scalar::Scalar;

use super::{DynamicsError, Result};

/// Uniform grid of `n` cells of width `dx`; cell `i` is centred at
/// `x0 + (i + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T = f64> {
    pub x0: T,
    pub dx: T,
    pub n: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(x0: T, dx: T, n: usize) -> Result<Self> {
        if !(dx > T::zero()) || !dx.is_finite() || !x0.is_finite() || n == 0 {
            return Err(DynamicsError::InvalidConfig(format!(
                "grid needs dx > 0 and n > 0, got dx = {dx}, n = {n}"
            )));
        }
        Ok(Self { x0, dx, n })
    }

    /// Even number of cells covering at least `[-halfwidth, halfwidth]`,
    /// mirror-symmetric about 0.
    pub fn centered(halfwidth: T, dx: T) -> Result<Self> {
        if !(halfwidth > T::zero()) {
            return Err(DynamicsError::InvalidConfig(format!(
                "halfwidth must be positive, got {halfwidth}"
            )));
        }
        let half = (halfwidth / dx).ceil().to_usize().ok_or_else(|| {
            DynamicsError::InvalidConfig(format!("halfwidth/dx = {} too large", halfwidth / dx))
        })?;
        let n = 2 * half.max(1);
        Self::new(-T::from_usize_lossy(n) * dx * T::lit(0.5), dx, n)
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + (T::from_usize_lossy(i) + T::lit(0.5)) * self.dx
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn length(&self) -> T {
        T::from_usize_lossy(self.n) * self.dx
    }

    pub fn center(&self) -> T {
        self.x0 + self.length() * T::lit(0.5)
    }
}

/// `(u, v)` on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<T = f64> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> FieldState<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: T::zero(),
            u: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Mirror image `i -> n - 1 - i`.
    pub fn reflected(&self) -> Self {
        Self {
            t: self.t,
            u: self.u.iter().rev().copied().collect(),
            v: self.v.iter().rev().copied().collect(),
        }
    }

    /// `min(u_i, v_i)`, the field the fronts are read from.
    pub fn min_field(&self) -> Vec<T> {
        self.u.iter().zip(&self.v).map(|(a, b)| a.min(*b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_grid_is_symmetric() {
        let g = Grid::centered(10.0_f64, 0.3).unwrap();
        assert_eq!(g.n % 2, 0);
        for i in 0..g.n {
            assert!((g.x(i) + g.x(g.n - 1 - i)).abs() < 1e-12);
        }
        assert!(g.x(g.n - 1) + 0.5 * g.dx >= 10.0);
        assert!(g.center().abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(Grid::new(0.0_f64, 0.0, 10).is_err());
        assert!(Grid::new(0.0_f64, 0.1, 0).is_err());
        assert!(Grid::centered(-1.0_f64, 0.1).is_err());
    }
}
