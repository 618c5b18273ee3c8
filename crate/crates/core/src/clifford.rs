//! Flat 3-torus model data: Clifford generators, spin structure, and the
//! shifted Fourier frequency lattice that diagonalizes the untwisted operator.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * the torus is `R^3 / Z^3` (period 1 per axis);
//! * the untwisted operator is discretized as `-i Σ_j γ_j ∂_j + π Σ_j δ_j γ_j`
//!   with Hermitian generators, so every assembled operator is Hermitian by
//!   construction;
//! * a non-trivial spin structure component `δ_j = 1` is realized as the
//!   half-integer frequency shift `κ_j + 1/2` on a single periodic FFT grid
//!   (antiperiodic spinor components re-expressed as shifted periodic ones).

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Cx;
use serde::{Deserialize, Serialize};

/// Spin structure class of the 3-torus: one periodic/antiperiodic choice per
/// axis. `1` means antiperiodic (non-trivial) along that axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinStructure(pub [u8; 3]);

impl SpinStructure {
    pub fn new(delta: [u8; 3]) -> Result<Self> {
        if delta.iter().any(|&d| d > 1) {
            return Err(Error::Domain(format!(
                "spin structure entries must be 0 or 1, got {delta:?}"
            )));
        }
        Ok(SpinStructure(delta))
    }

    pub fn non_trivial() -> Self {
        SpinStructure([1, 1, 1])
    }

    pub fn is_trivial(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Frequency shift per axis, `δ_j / 2`.
    pub fn shift<T: Real>(&self, axis: usize) -> T {
        T::of(self.0[axis] as f64 * 0.5)
    }
}

/// 2x2 complex matrix in row-major storage; the element `(r, c)` is `m[2*r + c]`.
pub type Mat2<T> = [Cx<T>; 4];

/// The three 2x2 Hermitian Clifford generators together with the spin
/// structure of the torus.
#[derive(Clone, Debug)]
pub struct CliffordModel<T: Real> {
    pub gamma: [Mat2<T>; 3],
    pub delta: SpinStructure,
}

/// The conventional generator triple: `γ_1 γ_2 = i γ_3`, each Hermitian and
/// unitary, pairwise anticommuting.
pub fn clifford_generators<T: Real>(delta: SpinStructure) -> CliffordModel<T> {
    let o = T::zero();
    let l = T::one();
    let z = |re, im| Cx::new(re, im);
    let gamma1 = [z(o, o), z(l, o), z(l, o), z(o, o)];
    let gamma2 = [z(o, o), z(o, -l), z(o, l), z(o, o)];
    let gamma3 = [z(l, o), z(o, o), z(o, o), z(-l, o)];
    CliffordModel {
        gamma: [gamma1, gamma2, gamma3],
        delta,
    }
}

impl<T: Real> CliffordModel<T> {
    /// Principal symbol at momentum `xi` (already including any spin-structure
    /// shift): `Σ_j γ_j · 2π ξ_j`, a 2x2 Hermitian matrix with eigenvalues
    /// `±2π|ξ|`.
    pub fn dirac_symbol(&self, xi: [T; 3]) -> Mat2<T> {
        let two_pi = T::of(2.0) * T::PI();
        let mut s = [Cx::new(T::zero(), T::zero()); 4];
        for (j, g) in self.gamma.iter().enumerate() {
            let w = two_pi * xi[j];
            for (dst, src) in s.iter_mut().zip(g.iter()) {
                *dst += src.scale(w);
            }
        }
        s
    }

    /// Closed-form symbol eigenvalues `±2π|ξ|`.
    pub fn symbol_eigenvalues(xi: [T; 3]) -> [T; 2] {
        let n = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let v = T::of(2.0) * T::PI() * n;
        [-v, v]
    }
}

/// Shifted Fourier wave numbers `κ_j + δ_j/2` per axis for an `n_g`-point
/// grid. The symmetric index band is `-n/2 .. n/2 - 1` for even `n` and
/// `-(n-1)/2 .. (n-1)/2` for odd `n`.
#[derive(Clone, Debug)]
pub struct FrequencyLattice<T: Real> {
    pub grid_size: usize,
    pub axes: [Vec<T>; 3],
    pub delta: SpinStructure,
}

/// Integer Fourier index for FFT bin `m` of an `n`-point transform, in the
/// symmetric band convention.
pub fn fourier_index(m: usize, n: usize) -> i64 {
    debug_assert!(m < n);
    let half = (n - 1) / 2;
    if m <= half {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

pub fn frequency_lattice<T: Real>(n_g: usize, delta: SpinStructure) -> Result<FrequencyLattice<T>> {
    if n_g < 2 {
        return Err(Error::InvalidGrid(n_g));
    }
    let axes = std::array::from_fn(|j| {
        let mut v: Vec<T> = (0..n_g)
            .map(|m| T::of(fourier_index(m, n_g) as f64) + delta.shift::<T>(j))
            .collect();
        v.sort_by(crate::scalar::cmp_real);
        v
    });
    Ok(FrequencyLattice {
        grid_size: n_g,
        axes,
        delta,
    })
}

impl<T: Real> FrequencyLattice<T> {
    /// Smallest `|κ + δ/2|` over the whole lattice. `>= 1/2` whenever the spin
    /// structure is non-trivial.
    pub fn min_norm(&self) -> T {
        let mut best = T::infinity();
        for &x in &self.axes[0] {
            for &y in &self.axes[1] {
                for &z in &self.axes[2] {
                    let n = (x * x + y * y + z * z).sqrt();
                    if n < best {
                        best = n;
                    }
                }
            }
        }
        best
    }
}

/// 2x2 matrix helpers shared by the small Clifford-side computations.
pub mod mat2 {
    use super::Mat2;
    use crate::scalar::Real;
    use crate::Cx;

    pub fn zero<T: Real>() -> Mat2<T> {
        [Cx::new(T::zero(), T::zero()); 4]
    }

    pub fn identity<T: Real>() -> Mat2<T> {
        let mut m = zero();
        m[0] = Cx::new(T::one(), T::zero());
        m[3] = Cx::new(T::one(), T::zero());
        m
    }

    pub fn mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
        [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ]
    }

    pub fn add<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
        std::array::from_fn(|i| a[i] + b[i])
    }

    pub fn sub<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
        std::array::from_fn(|i| a[i] - b[i])
    }

    pub fn scale<T: Real>(a: &Mat2<T>, s: Cx<T>) -> Mat2<T> {
        std::array::from_fn(|i| a[i] * s)
    }

    pub fn adjoint<T: Real>(a: &Mat2<T>) -> Mat2<T> {
        [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
    }

    pub fn max_abs<T: Real>(a: &Mat2<T>) -> T {
        a.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Eigenvalues of a 2x2 Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues<T: Real>(a: &Mat2<T>) -> [T; 2] {
        let half = T::of(0.5);
        let tr = (a[0] + a[3]).re;
        let det = (a[0] * a[3] - a[1] * a[2]).re;
        let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
        [tr * half - disc, tr * half + disc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-14;

    fn max_abs_diff(a: &Mat2<f64>, b: &Mat2<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn generator_algebra() {
        let m: CliffordModel<f64> = clifford_generators(SpinStructure::non_trivial());
        // gamma1*gamma2 = i*gamma3
        let g12 = mat2::mul(&m.gamma[0], &m.gamma[1]);
        let ig3 = mat2::scale(&m.gamma[2], Cx::new(0.0, 1.0));
        assert!(max_abs_diff(&g12, &ig3) < TOL);
        // Clifford relations
        for i in 0..3 {
            for j in 0..3 {
                let ac = mat2::add(
                    &mat2::mul(&m.gamma[i], &m.gamma[j]),
                    &mat2::mul(&m.gamma[j], &m.gamma[i]),
                );
                let expect = if i == j {
                    mat2::scale(&mat2::identity(), Cx::new(2.0, 0.0))
                } else {
                    mat2::zero()
                };
                assert!(max_abs_diff(&ac, &expect) < TOL, "i={i} j={j}");
            }
        }
        // Hermitian and unitary
        for g in &m.gamma {
            assert!(max_abs_diff(g, &mat2::adjoint(g)) < TOL);
            let gg = mat2::mul(g, &mat2::adjoint(g));
            assert!(max_abs_diff(&gg, &mat2::identity()) < TOL);
        }
    }

    #[test]
    fn lattice_small_cases() {
        let l: FrequencyLattice<f64> =
            frequency_lattice(2, SpinStructure::new([1, 1, 1]).unwrap()).unwrap();
        for ax in &l.axes {
            assert_eq!(ax, &vec![-0.5, 0.5]);
        }
        let l0: FrequencyLattice<f64> =
            frequency_lattice(2, SpinStructure::new([0, 0, 0]).unwrap()).unwrap();
        for ax in &l0.axes {
            assert_eq!(ax, &vec![-1.0, 0.0]);
        }
        let l4: FrequencyLattice<f64> =
            frequency_lattice(4, SpinStructure::new([1, 0, 0]).unwrap()).unwrap();
        assert_eq!(l4.axes[0], vec![-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(l4.axes[1], vec![-2.0, -1.0, 0.0, 1.0]);
        assert!(frequency_lattice::<f64>(1, SpinStructure::non_trivial()).is_err());
    }

    #[test]
    fn lattice_min_norm_bound() {
        for ng in [2usize, 3, 4, 6] {
            let l: FrequencyLattice<f64> =
                frequency_lattice(ng, SpinStructure::new([1, 0, 1]).unwrap()).unwrap();
            assert!(l.min_norm() >= 0.5 - 1e-15, "ng={ng}");
        }
    }

    #[test]
    fn symbol_matches_closed_form() {
        let m: CliffordModel<f64> = clifford_generators(SpinStructure::non_trivial());
        // zero momentum -> zero matrix
        let s0 = m.dirac_symbol([0.0, 0.0, 0.0]);
        assert!(mat2::max_abs(&s0) < TOL);

        let cases = [
            ([0.5, 0.5, 0.5], std::f64::consts::PI * 3.0f64.sqrt()),
            ([1.0, 0.0, 0.0], 2.0 * std::f64::consts::PI),
            ([0.25, -0.75, 1.5], 0.0), // filled below from closed form
        ];
        for (xi, expect) in cases {
            let s = m.dirac_symbol(xi);
            let ev = mat2::hermitian_eigenvalues(&s);
            let want = if expect > 0.0 {
                expect
            } else {
                CliffordModel::<f64>::symbol_eigenvalues(xi)[1]
            };
            assert!((ev[0] + want).abs() < 1e-12, "xi={xi:?}");
            assert!((ev[1] - want).abs() < 1e-12, "xi={xi:?}");
        }
    }

    #[test]
    fn symbol_is_odd_and_symmetric() {
        let m: CliffordModel<f64> = clifford_generators(SpinStructure::non_trivial());
        let xi = [0.3, -1.2, 0.7];
        let s = m.dirac_symbol(xi);
        let sneg = m.dirac_symbol([-xi[0], -xi[1], -xi[2]]);
        for i in 0..4 {
            assert_eq!(s[i], -sneg[i]);
        }
        let ev = mat2::hermitian_eigenvalues(&s);
        assert!((ev[0] + ev[1]).abs() < 1e-12);
    }

    #[test]
    fn nontrivial_lattice_symbol_gap() {
        // discrete version of "the untwisted operator is invertible":
        // every lattice point of a non-trivial structure has |lambda| >= pi
        let delta = SpinStructure::new([1, 1, 1]).unwrap();
        let m: CliffordModel<f64> = clifford_generators(delta);
        let l: FrequencyLattice<f64> = frequency_lattice(4, delta).unwrap();
        for &x in &l.axes[0] {
            for &y in &l.axes[1] {
                for &z in &l.axes[2] {
                    let ev = mat2::hermitian_eigenvalues(&m.dirac_symbol([x, y, z]));
                    assert!(ev[1] >= std::f64::consts::PI - 1e-12);
                    assert!(ev[0] <= -std::f64::consts::PI + 1e-12);
                }
            }
        }
    }
}
