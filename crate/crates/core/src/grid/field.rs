use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::RadialGrid;
use crate::{Error, Result};

/// Complex radial profile sampled at the nodes of a grid.
#[derive(Clone, Debug)]
pub struct RadialField {
    values: Vec<Complex64>,
    grid: Arc<RadialGrid>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch { expected: grid.n, got: values.len() });
        }
        if let Some(j) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::CorruptedField(j));
        }
        Ok(RadialField { values, grid })
    }

    pub(crate) fn from_parts(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        RadialField { values, grid }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![Complex64::new(0.0, 0.0); grid.n];
        RadialField { values, grid }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        RadialField { values, grid }
    }

    pub fn from_real(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|u_j|^2` at every node.
    pub fn modulus_sq(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    pub fn scaled(&self, a: f64) -> RadialField {
        let values = self.values.iter().map(|z| z * a).collect();
        RadialField { values, grid: self.grid.clone() }
    }

    /// Same nodal values placed on another grid with the same node count.
    pub fn with_grid(&self, grid: Arc<RadialGrid>) -> Result<RadialField> {
        RadialField::new(grid, self.values.clone())
    }

    pub(crate) fn check_grid(&self, other: &RadialGrid) -> Result<()> {
        if self.grid.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Value at an arbitrary radius by four-point Lagrange interpolation.
    ///
    /// Uses the even extension across the origin and the Dirichlet wall
    /// (odd reflection about `rmax`); zero beyond the wall.
    pub fn interpolate(&self, r: f64) -> Complex64 {
        let g = &*self.grid;
        let r = r.abs();
        if r >= g.rmax {
            return Complex64::new(0.0, 0.0);
        }
        let x = r / g.h - 0.5;
        let base = libm::floor(x) as i64 - 1;
        let t = x - (base + 1) as f64;
        let node = |k: i64| -> Complex64 {
            let n = g.n as i64;
            if k < 0 {
                self.values[(-k - 1) as usize]
            } else if k >= n {
                let m = 2 * n - 1 - k;
                if m >= 0 {
                    -self.values[m as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else {
                self.values[k as usize]
            }
        };
        // nodes at offsets -1, 0, 1, 2 relative to t
        let (p0, p1, p2, p3) = (node(base), node(base + 1), node(base + 2), node(base + 3));
        let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        p0 * c0 + p1 * c1 + p2 * c2 + p3 * c3
    }

    /// Resample onto another grid of the same dimension.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> RadialField {
        let values = grid.nodes.iter().map(|&r| self.interpolate(r)).collect();
        RadialField { values, grid }
    }
}
