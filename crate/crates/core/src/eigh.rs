//! Spectral windows and windowed eigenvalue lists shared by the dense and
//! iterative solver paths.

use crate::error::{Error, Result};
use crate::scalar::{cmp_real, Real};
use serde::{Deserialize, Serialize};

/// Zero-centered window `[-w, +w]` with a boundary guard band used for hazard
/// detection.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct SpectralWindow<T: Real> {
    pub half_width: T,
    pub guard: T,
}

impl<T: Real> SpectralWindow<T> {
    pub fn new(half_width: T, guard: T) -> Result<Self> {
        if half_width <= T::zero() {
            return Err(Error::Domain(format!(
                "window half-width must be positive, got {half_width}"
            )));
        }
        if guard <= T::zero() || guard >= half_width / T::of(10.0) {
            return Err(Error::Domain(format!(
                "window guard must lie in (0, w/10), got {guard} for w = {half_width}"
            )));
        }
        Ok(SpectralWindow { half_width, guard })
    }

    /// Default guard: `w / 100`.
    pub fn with_default_guard(half_width: T) -> Result<Self> {
        Self::new(half_width, half_width / T::of(100.0))
    }
}

/// Eigenvalues of one Hermitian operator near the window.
///
/// `eigenvalues` is sorted ascending and complete on `[-horizon, +horizon]`:
/// the solver asserts that every eigenvalue of magnitude `<= horizon` is
/// present (a dense solve reports `horizon = +inf`). Values beyond the
/// horizon may or may not appear.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct WindowSpectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub horizon: T,
    /// Upper bound on `||A v - lambda v||` for the reported pairs.
    pub residual_bound: T,
}

impl<T: Real> WindowSpectrum<T> {
    pub fn from_full_spectrum(mut eigenvalues: Vec<T>, residual_bound: T) -> Self {
        eigenvalues.sort_by(cmp_real);
        WindowSpectrum {
            eigenvalues,
            horizon: T::infinity(),
            residual_bound,
        }
    }

    /// Values inside `[-w, +w]`.
    pub fn in_window(&self, w: T) -> impl Iterator<Item = T> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .filter(move |&x| x.abs() <= w)
    }

    /// Number of strictly negative eigenvalues inside `[-w, 0)`.
    pub fn negative_count(&self, w: T) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&x| x < T::zero() && x >= -w)
            .count()
    }

    /// Smallest `|lambda|` among reported values (`+inf` when empty).
    pub fn min_abs(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::infinity(), |m, &x| m.min(x.abs()))
    }

    /// Smallest distance from any reported eigenvalue to the pair of window
    /// boundaries `{-w, +w}`.
    pub fn min_boundary_distance(&self, w: T) -> T {
        self.eigenvalues.iter().fold(T::infinity(), |m, &x| {
            m.min((x - w).abs()).min((x + w).abs())
        })
    }

    /// True if some eigenvalue lies within `tol` of `-w` or `+w`.
    pub fn boundary_hazard(&self, w: T, tol: T) -> bool {
        self.min_boundary_distance(w) <= tol
    }
}
