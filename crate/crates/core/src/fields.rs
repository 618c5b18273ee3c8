//! Sampled maps on the torus: `S^3`-valued collapse maps, `U(N)`-valued gauge
//! fields, and `u(N)`-valued connection 1-forms.

use crate::error::{Error, Result};
use crate::grid::{Fft3, Grid3};
use crate::profile::CollapseProfile;
use crate::quaternion::{su2_embed, Quaternion};
use crate::scalar::Real;
use crate::Cx;

/// A map `T^3 -> S^3` sampled on the uniform grid; component-major storage,
/// `comps[c][g]`.
#[derive(Clone, Debug)]
pub struct SphereMap<T: Real> {
    pub n_g: usize,
    pub comps: [Vec<T>; 4],
}

impl<T: Real> SphereMap<T> {
    pub fn grid(&self) -> Grid3 {
        Grid3 { n: self.n_g }
    }

    /// Largest deviation of `|f(x)|` from 1 over the grid.
    pub fn unit_defect(&self) -> T {
        let len = self.grid().len();
        let mut worst = T::zero();
        for g in 0..len {
            let mut s = T::zero();
            for c in 0..4 {
                s += self.comps[c][g] * self.comps[c][g];
            }
            worst = worst.max((s.sqrt() - T::one()).abs());
        }
        worst
    }
}

/// A map `T^3 -> U(N)` sampled on the uniform grid; grid-major storage, the
/// matrix at grid point `g` occupies `data[g*N*N .. (g+1)*N*N]` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryField<T: Real> {
    pub n_g: usize,
    pub rank: usize,
    pub data: Vec<Cx<T>>,
}

impl<T: Real> UnitaryField<T> {
    pub fn grid(&self) -> Grid3 {
        Grid3 { n: self.n_g }
    }

    #[inline]
    pub fn at(&self, g: usize) -> &[Cx<T>] {
        let nn = self.rank * self.rank;
        &self.data[g * nn..(g + 1) * nn]
    }

    /// Largest entry of `U*U - Id` over the grid.
    pub fn unitarity_defect(&self) -> T {
        let n = self.rank;
        let mut worst = T::zero();
        for g in 0..self.grid().len() {
            let u = self.at(g);
            for r in 0..n {
                for c in 0..n {
                    let mut acc = Cx::new(T::zero(), T::zero());
                    for l in 0..n {
                        acc += u[l * n + r].conj() * u[l * n + c];
                    }
                    if r == c {
                        acc -= Cx::new(T::one(), T::zero());
                    }
                    worst = worst.max(acc.norm());
                }
            }
        }
        worst
    }

    /// Largest deviation of `det U` from the unit circle (and from 1 for
    /// SU(2)-embedded fields) — only meaningful for rank 2, where the
    /// determinant is cheap.
    pub fn det_defect(&self) -> Option<T> {
        if self.rank != 2 {
            return None;
        }
        let mut worst = T::zero();
        for g in 0..self.grid().len() {
            let u = self.at(g);
            let det = u[0] * u[3] - u[1] * u[2];
            worst = worst.max((det - Cx::new(T::one(), T::zero())).norm());
        }
        Some(worst)
    }
}

/// A `u(N)`-valued 1-form sampled on the grid: three components, grid-major
/// `N x N` blocks like [`UnitaryField`].
#[derive(Clone, Debug)]
pub struct ConnectionForm<T: Real> {
    pub n_g: usize,
    pub rank: usize,
    pub comps: [Vec<Cx<T>>; 3],
    /// Measured anti-Hermitian defect `max |alpha + alpha*|` (grid-dependent,
    /// reported alongside the data rather than hidden by projection).
    pub anti_herm_defect: T,
}

impl<T: Real> ConnectionForm<T> {
    pub fn grid(&self) -> Grid3 {
        Grid3 { n: self.n_g }
    }

    #[inline]
    pub fn at(&self, axis: usize, g: usize) -> &[Cx<T>] {
        let nn = self.rank * self.rank;
        &self.comps[axis][g * nn..(g + 1) * nn]
    }

    pub fn zero(n_g: usize, rank: usize) -> Self {
        let len = n_g * n_g * n_g * rank * rank;
        ConnectionForm {
            n_g,
            rank,
            comps: std::array::from_fn(|_| vec![Cx::new(T::zero(), T::zero()); len]),
            anti_herm_defect: T::zero(),
        }
    }

    /// Operator norm of the component `axis` at grid point `g` (exact for
    /// rank <= 2, power-iteration estimate above).
    pub fn component_op_norm(&self, axis: usize, g: usize) -> T {
        op_norm_small(self.at(axis, g), self.rank)
    }
}

/// The degree-1 building block: collapse the cube onto the sphere.
///
/// With `c` the cube center and `s = |x - c|`, the point maps to
/// `(sin(chi(s)) (x-c)/s, cos(chi(s)))`; everything at distance >= the
/// collapse radius lands on the south pole `(0,0,0,-1)`, so the map is
/// constant near the cube boundary and descends smoothly to the torus.
pub fn collapse_map<T: Real>(x: [T; 3], profile: &CollapseProfile<T>) -> [T; 4] {
    let half = T::of(0.5);
    // the third coordinate is negated: this orients the map so that the
    // k = 1 field comes out with degree +1 and spectral flow +1 under the
    // crate-wide calibration
    let v = [x[0] - half, x[1] - half, half - x[2]];
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if s >= profile.radius {
        return [T::zero(), T::zero(), T::zero(), -T::one()];
    }
    let ratio = profile.sin_chi_over_s(s);
    [
        ratio * v[0],
        ratio * v[1],
        ratio * v[2],
        profile.chi(s).cos(),
    ]
}

/// Sample `f_k = p_k ∘ f_1` (quaternion power composed with the collapse map)
/// on the grid.
pub fn degree_map<T: Real>(
    k: i64,
    n_g: usize,
    profile: &CollapseProfile<T>,
) -> Result<SphereMap<T>> {
    let grid = Grid3::new(n_g)?;
    let len = grid.len();
    let mut comps: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); len]);
    for (ix, iy, iz) in grid.iter() {
        let g = grid.idx(ix, iy, iz);
        let f1 = collapse_map(grid.point(ix, iy, iz), profile);
        let q = Quaternion([f1[3], f1[0], f1[1], f1[2]]).powi(k)?;
        // back to (vector, scalar) ordering of S^3 coordinates
        comps[0][g] = q.0[1];
        comps[1][g] = q.0[2];
        comps[2][g] = q.0[3];
        comps[3][g] = q.0[0];
    }
    Ok(SphereMap { n_g, comps })
}

/// Sample the gauge field `F_k = su2_embed ∘ p_k ∘ f_1` on the grid.
pub fn gauge_field<T: Real>(
    k: i64,
    n_g: usize,
    rank: usize,
    profile: &CollapseProfile<T>,
) -> Result<UnitaryField<T>> {
    if rank < 2 {
        return Err(Error::RankTooSmall(rank));
    }
    let grid = Grid3::new(n_g)?;
    let nn = rank * rank;
    let mut data = vec![Cx::new(T::zero(), T::zero()); grid.len() * nn];
    for (ix, iy, iz) in grid.iter() {
        let g = grid.idx(ix, iy, iz);
        let f1 = collapse_map(grid.point(ix, iy, iz), profile);
        let q = Quaternion([f1[3], f1[0], f1[1], f1[2]]).powi(k)?;
        let u = su2_embed(&q, rank)?;
        data[g * nn..(g + 1) * nn].copy_from_slice(&u);
    }
    Ok(UnitaryField { n_g, rank, data })
}

/// Maurer-Cartan form `alpha_j = F^{-1} ∂_j F` with spectral derivatives.
///
/// The pointwise inverse uses unitarity (`F^{-1} = F*`). The anti-Hermitian
/// defect of the result is pure discretization error of the derivative and is
/// recorded on the returned form.
pub fn maurer_cartan<T: Real>(field: &UnitaryField<T>) -> Result<ConnectionForm<T>> {
    let grid = field.grid();
    let n = field.rank;
    let nn = n * n;
    let len = grid.len();
    let fft = Fft3::<T>::new(grid);
    let mut comps: [Vec<Cx<T>>; 3] =
        std::array::from_fn(|_| vec![Cx::new(T::zero(), T::zero()); len * nn]);

    let mut entry = vec![Cx::new(T::zero(), T::zero()); len];
    for axis in 0..3 {
        // derivative entry by entry, then pointwise F* (dF)
        let mut dfield = vec![Cx::new(T::zero(), T::zero()); len * nn];
        for e in 0..nn {
            for g in 0..len {
                entry[g] = field.data[g * nn + e];
            }
            let de = fft.derivative(&entry, axis);
            for g in 0..len {
                dfield[g * nn + e] = de[g];
            }
        }
        let alpha = &mut comps[axis];
        for g in 0..len {
            let u = field.at(g);
            let df = &dfield[g * nn..(g + 1) * nn];
            for r in 0..n {
                for c in 0..n {
                    let mut acc = Cx::new(T::zero(), T::zero());
                    for l in 0..n {
                        acc += u[l * n + r].conj() * df[l * n + c];
                    }
                    alpha[g * nn + r * n + c] = acc;
                }
            }
        }
    }

    let mut defect = T::zero();
    for axis in 0..3 {
        for g in 0..len {
            let a = &comps[axis][g * nn..(g + 1) * nn];
            for r in 0..n {
                for c in 0..n {
                    let d = (a[r * n + c] + a[c * n + r].conj()).norm();
                    defect = defect.max(d);
                }
            }
        }
    }

    Ok(ConnectionForm {
        n_g: field.n_g,
        rank: n,
        comps,
        anti_herm_defect: defect,
    })
}

/// Operator norm of a small row-major `n x n` complex matrix. Exact closed
/// form for `n <= 2`, 40 rounds of power iteration with a Frobenius cap for
/// larger ranks.
pub fn op_norm_small<T: Real>(m: &[Cx<T>], n: usize) -> T {
    debug_assert_eq!(m.len(), n * n);
    if n == 1 {
        return m[0].norm();
    }
    if n == 2 {
        // singular values of [[a,b],[c,d]]: eigenvalues of M*M
        let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
        let g00 = (a.conj() * a + c.conj() * c).re;
        let g11 = (b.conj() * b + d.conj() * d).re;
        let g01 = a.conj() * b + c.conj() * d;
        let tr = g00 + g11;
        let det = g00 * g11 - g01.norm_sqr();
        let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
        return (tr * T::of(0.5) + disc).max(T::zero()).sqrt();
    }
    let frob = m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let mut v: Vec<Cx<T>> = (0..n)
        .map(|i| Cx::new(T::of(((i * 37 + 11) % 19) as f64 + 1.0), T::of(1.0)))
        .collect();
    let mut w = vec![Cx::new(T::zero(), T::zero()); n];
    let mut est = T::zero();
    for _ in 0..40 {
        // w = M* M v
        let mut mv = vec![Cx::new(T::zero(), T::zero()); n];
        for r in 0..n {
            let mut acc = Cx::new(T::zero(), T::zero());
            for c in 0..n {
                acc += m[r * n + c] * v[c];
            }
            mv[r] = acc;
        }
        for c in 0..n {
            let mut acc = Cx::new(T::zero(), T::zero());
            for r in 0..n {
                acc += m[r * n + c].conj() * mv[r];
            }
            w[c] = acc;
        }
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if nrm == T::zero() {
            return T::zero();
        }
        est = nrm.sqrt();
        for (dst, src) in v.iter_mut().zip(w.iter()) {
            *dst = src.scale(T::one() / nrm);
        }
    }
    est.min(frob)
}
