//! Uniform periodic grid on the 3-torus and FFT-based spectral calculus.
//!
//! Grid layout: index `(ix, iy, iz) -> (ix*n + iy)*n + iz`, sample points
//! `x_j = i_j / n`. Derivatives are exact on the resolved frequency band.

use crate::clifford::fourier_index;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Cx;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Cubic sampling grid with `n^3` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid3 {
    pub n: usize,
}

impl Grid3 {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Grid3 { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Sample point coordinates in the fundamental domain `[0,1)^3`.
    pub fn point<T: Real>(&self, ix: usize, iy: usize, iz: usize) -> [T; 3] {
        let n = T::of(self.n as f64);
        [
            T::of(ix as f64) / n,
            T::of(iy as f64) / n,
            T::of(iz as f64) / n,
        ]
    }

    /// Iterate `(ix, iy, iz)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |ix| (0..n).flat_map(move |iy| (0..n).map(move |iz| (ix, iy, iz))))
    }
}

/// Cached FFT plans plus spectral-derivative helpers for one grid size.
pub struct Fft3<T: Real> {
    pub grid: Grid3,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    /// Integer frequencies per FFT bin.
    pub kappa: Vec<i64>,
}

impl<T: Real> Fft3<T> {
    pub fn new(grid: Grid3) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let kappa = (0..grid.n).map(|m| fourier_index(m, grid.n)).collect();
        Fft3 { grid, fwd, inv, kappa }
    }

    fn pass(&self, data: &mut [Cx<T>], plan: &Arc<dyn Fft<T>>, axis: usize) {
        let n = self.grid.n;
        debug_assert_eq!(data.len(), self.grid.len());
        match axis {
            2 => plan.process(data),
            1 | 0 => {
                let mut scratch = vec![Cx::new(T::zero(), T::zero()); data.len()];
                // gather lines of the chosen axis into contiguous runs
                for ix in 0..n {
                    for iy in 0..n {
                        for iz in 0..n {
                            let src = self.grid.idx(ix, iy, iz);
                            let dst = if axis == 1 {
                                (ix * n + iz) * n + iy
                            } else {
                                (iy * n + iz) * n + ix
                            };
                            scratch[dst] = data[src];
                        }
                    }
                }
                plan.process(&mut scratch);
                for ix in 0..n {
                    for iy in 0..n {
                        for iz in 0..n {
                            let dst = self.grid.idx(ix, iy, iz);
                            let src = if axis == 1 {
                                (ix * n + iz) * n + iy
                            } else {
                                (iy * n + iz) * n + ix
                            };
                            data[dst] = scratch[src];
                        }
                    }
                }
            }
            _ => unreachable!("axis out of range"),
        }
    }

    /// In-place unnormalized forward 3D transform.
    pub fn forward(&self, data: &mut [Cx<T>]) {
        for axis in 0..3 {
            self.pass(data, &self.fwd, axis);
        }
    }

    /// In-place inverse 3D transform, normalized so that
    /// `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Cx<T>]) {
        for axis in 0..3 {
            self.pass(data, &self.inv, axis);
        }
        let scale = T::one() / T::of(self.grid.len() as f64);
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }

    /// Spectral partial derivative along `axis` (periodic, integer
    /// frequencies).
    pub fn derivative(&self, data: &[Cx<T>], axis: usize) -> Vec<Cx<T>> {
        let n = self.grid.n;
        let mut hat = data.to_vec();
        self.forward(&mut hat);
        let two_pi = T::of(2.0) * T::PI();
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let m = [ix, iy, iz][axis];
                    let w = two_pi * T::of(self.kappa[m] as f64);
                    let idx = self.grid.idx(ix, iy, iz);
                    // multiply by i * 2*pi*kappa
                    let z = hat[idx];
                    hat[idx] = Cx::new(-z.im * w, z.re * w);
                }
            }
        }
        self.inverse(&mut hat);
        hat
    }
}

/// Compensated (Kahan) accumulator; keeps grid quadratures deterministic and
/// accurate independent of summation length.
#[derive(Clone, Copy, Debug)]
pub struct Kahan<T: Real> {
    sum: T,
    c: T,
}

impl<T: Real> Default for Kahan<T> {
    fn default() -> Self {
        Kahan {
            sum: T::zero(),
            c: T::zero(),
        }
    }
}

impl<T: Real> Kahan<T> {
    pub fn add(&mut self, x: T) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}
