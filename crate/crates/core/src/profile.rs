//! Radial collapse profile used by the degree-k maps.
//!
//! `chi: [0, inf) -> [0, pi]` rises from 0 to `pi` inside the collapse radius
//! and is identically `pi` beyond it. It is built as the normalized integral
//! of the bump density `exp(-b / (1 - (s/r)^2))`:
//!
//! * the density is even and C-infinity flat at `s = r`, so `chi` glues
//!   smoothly to the constant value `pi` at the collapse radius;
//! * the integral of an even function is odd, so `chi(s)/s` extends smoothly
//!   through `s = 0` and `chi'(0) > 0` — exactly what the collapse map needs
//!   to be smooth at the center of the cube.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre panel order used for the profile integral.
const GL_ORDER: usize = 16;
/// Composite panels per evaluation; 8 panels of order 16 put the quadrature
/// error well below f64 roundoff for this analytic integrand.
const GL_PANELS: usize = 8;

/// Monotone collapse profile with C-infinity flat outer end.
#[derive(Clone, Debug)]
pub struct CollapseProfile<T: Real> {
    pub radius: T,
    pub sharpness: T,
    /// Exponent `p` in the bump density `exp(-b / (1 - u^2)^p)`; larger
    /// values trade a flatter glue for faster asymptotic Fourier decay.
    pub flatness_power: T,
    nodes: Vec<(T, T)>,
    norm: T,
}

impl<T: Real> CollapseProfile<T> {
    /// `radius` in `(0, 1/2]`, `sharpness > 0` steers how much of the rise is
    /// concentrated mid-profile.
    pub fn new(radius: T, sharpness: T) -> Result<Self> {
        Self::with_power(radius, sharpness, T::one())
    }

    pub fn with_power(radius: T, sharpness: T, flatness_power: T) -> Result<Self> {
        if radius <= T::zero() || radius > T::of(0.5) {
            return Err(Error::Domain(format!(
                "collapse radius must lie in (0, 1/2], got {radius}"
            )));
        }
        if sharpness <= T::zero() || flatness_power <= T::zero() {
            return Err(Error::Domain(format!(
                "profile sharpness and flatness power must be positive, got {sharpness}, {flatness_power}"
            )));
        }
        let nodes = gauss_legendre_unit::<T>(GL_ORDER);
        let mut p = CollapseProfile {
            radius,
            sharpness,
            flatness_power,
            nodes,
            norm: T::one(),
        };
        p.norm = p.integral(radius);
        Ok(p)
    }

    pub fn default_profile() -> Self {
        Self::with_power(T::of(0.45), T::one(), T::one())
            .expect("default profile parameters are valid")
    }

    /// Bump density `exp(-b / (1 - (s/r)^2)^p)` on `[0, r)`, zero beyond.
    fn density(&self, s: T) -> T {
        let u = s / self.radius;
        let one = T::one();
        if u >= one {
            return T::zero();
        }
        let g = one - u * u;
        (-self.sharpness / g.powf(self.flatness_power)).exp()
    }

    /// `∫_0^s density` by composite Gauss-Legendre.
    fn integral(&self, s: T) -> T {
        let s = s.min(self.radius);
        if s <= T::zero() {
            return T::zero();
        }
        let mut total = T::zero();
        let h = s / T::of(GL_PANELS as f64);
        for p in 0..GL_PANELS {
            let a = h * T::of(p as f64);
            for &(x, w) in &self.nodes {
                total += self.density(a + h * x) * w * h;
            }
        }
        total
    }

    /// Profile value; `chi(0) = 0`, `chi(s) = pi` for `s >= radius`.
    pub fn chi(&self, s: T) -> T {
        if s >= self.radius {
            return T::PI();
        }
        if s <= T::zero() {
            return T::zero();
        }
        (T::PI() * self.integral(s) / self.norm).min(T::PI())
    }

    /// `sin(chi(s)) / s` with the smooth continuation at `s = 0`.
    pub fn sin_chi_over_s(&self, s: T) -> T {
        let tiny = T::of(1e-12);
        if s < tiny {
            // sin(chi)/s -> chi'(0) as s -> 0
            return self.chi_slope_at_zero();
        }
        self.chi(s).sin() / s
    }

    /// `chi'(0) = pi * density(0) / norm`.
    pub fn chi_slope_at_zero(&self) -> T {
        T::PI() * (-self.sharpness).exp() / self.norm
    }
}

/// Nodes and weights of `m`-point Gauss-Legendre quadrature on `[0, 1]`.
fn gauss_legendre_unit<T: Real>(m: usize) -> Vec<(T, T)> {
    // Newton iteration on P_m over [-1, 1], then affine map to [0, 1].
    let mut out = Vec::with_capacity(m);
    let mf = m as f64;
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_and_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((T::of(0.5 * (1.0 - x)), T::of(0.5 * w)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
