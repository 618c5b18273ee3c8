//! The discretized twisted Dirac operator `D = D_0 + t·X` on the 3-torus.
//!
//! Fourier collocation: the untwisted part `D_0 = -i Σ_j γ_j ∂_j + π Σ_j δ_j γ_j`
//! is applied exactly on the frequency band (diagonal 2x2 symbol per mode),
//! the twist `X = Σ_j γ_j ⊗ (-i α_j(x))` pointwise on the grid. All
//! discretization error therefore sits in the twist term; the untwisted
//! spectrum is reproduced to machine precision.
//!
//! Spinor-field layout: component-major, component `c = s·N + a` (spin `s`,
//! bundle index `a`) occupies `v[c·n³ .. (c+1)·n³]` in grid storage order.

use crate::clifford::{clifford_generators, frequency_lattice, CliffordModel, Mat2, SpinStructure};
use crate::eigh::{SpectralWindow, WindowSpectrum};
use crate::error::{Error, Result};
use crate::fields::{gauge_field, maurer_cartan, op_norm_small, ConnectionForm};
use crate::grid::{Fft3, Grid3};
use crate::profile::CollapseProfile;
use crate::scalar::{cmp_real, Real};
use crate::Cx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Recommended cap on the anti-Hermitian defect of a connection before
/// assembly refuses it as incompatible with the metric.
pub const RECOMMENDED_COMPAT_TOL: f64 = 1.0;

/// Solver choice for windowed eigenvalue extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolverMode {
    Dense,
    Iterative,
}

struct Twist<T: Real> {
    /// `(2N)x(2N)` Hermitian blocks, grid-major.
    blocks: Vec<Cx<T>>,
    /// Rigorous upper bound on the operator norm of the full multiplication
    /// operator (max over grid points of a per-block bound).
    norm_bound: T,
    /// The cruder per-axis bound `Σ_j max_x ||alpha_j(x)||`.
    axis_sum_bound: T,
}

struct DiracCore<T: Real> {
    grid: Grid3,
    delta: SpinStructure,
    rank: usize,
    model: CliffordModel<T>,
    fft: Fft3<T>,
    /// 2x2 symbol per Fourier bin (already includes the spin-structure shift).
    symbols: Vec<Mat2<T>>,
    twist: Option<Twist<T>>,
}

/// Hermitian operator `D_0 + t·X`, shareable across threads; `at_t` produces
/// siblings along the affine path without re-assembly.
#[derive(Clone)]
pub struct DiracOperator<T: Real> {
    core: Arc<DiracCore<T>>,
    pub t: T,
}

fn build_symbols<T: Real>(grid: Grid3, model: &CliffordModel<T>) -> Result<Vec<Mat2<T>>> {
    let lattice = frequency_lattice::<T>(grid.n, model.delta)?;
    let _ = lattice; // axis lists are sorted; recompute per-bin below
    let mut symbols = Vec::with_capacity(grid.len());
    let shift: [T; 3] = std::array::from_fn(|j| model.delta.shift::<T>(j));
    let kappa: Vec<T> = (0..grid.n)
        .map(|m| T::of(crate::clifford::fourier_index(m, grid.n) as f64))
        .collect();
    for (mx, my, mz) in grid.iter() {
        let xi = [
            kappa[mx] + shift[0],
            kappa[my] + shift[1],
            kappa[mz] + shift[2],
        ];
        symbols.push(model.dirac_symbol(xi));
    }
    Ok(symbols)
}

impl<T: Real> DiracOperator<T> {
    /// The untwisted operator (`alpha = 0`) on rank-`rank` coefficients.
    pub fn untwisted(n_g: usize, delta: SpinStructure, rank: usize) -> Result<Self> {
        let grid = Grid3::new(n_g)?;
        if rank == 0 {
            return Err(Error::RankTooSmall(rank));
        }
        let model = clifford_generators::<T>(delta);
        let symbols = build_symbols(grid, &model)?;
        Ok(DiracOperator {
            core: Arc::new(DiracCore {
                grid,
                delta,
                rank,
                fft: Fft3::new(grid),
                symbols,
                model,
                twist: None,
            }),
            t: T::zero(),
        })
    }

    /// Assemble `D_0 + t·X` from a connection form.
    ///
    /// The twist is built from the skew projection `(alpha - alpha*)/2`, so
    /// the operator is Hermitian by construction; if the measured
    /// anti-Hermitian defect exceeds `compat_tol` the connection is rejected
    /// as incompatible with the Hermitian metric.
    pub fn assemble(
        alpha: &ConnectionForm<T>,
        t: T,
        delta: SpinStructure,
        compat_tol: T,
    ) -> Result<Self> {
        if t < T::zero() || t > T::one() {
            return Err(Error::Domain(format!("path parameter t={t} outside [0,1]")));
        }
        if alpha.anti_herm_defect > compat_tol {
            return Err(Error::NotAntiHermitian {
                defect: alpha.anti_herm_defect.as_f64(),
                tol: compat_tol.as_f64(),
            });
        }
        let grid = Grid3::new(alpha.n_g)?;
        let n = alpha.rank;
        if n == 0 {
            return Err(Error::RankTooSmall(n));
        }
        for axis in 0..3 {
            if alpha.comps[axis].len() != grid.len() * n * n {
                return Err(Error::Shape(format!(
                    "connection component {axis} has {} entries, expected {}",
                    alpha.comps[axis].len(),
                    grid.len() * n * n
                )));
            }
        }
        let model = clifford_generators::<T>(delta);
        let symbols = build_symbols(grid, &model)?;

        let two_n = 2 * n;
        let bn = two_n * two_n;
        let mut blocks = vec![Cx::new(T::zero(), T::zero()); grid.len() * bn];
        let mut norm_bound = T::zero();
        let mut axis_max = [T::zero(); 3];
        let mut skew = vec![Cx::new(T::zero(), T::zero()); n * n];
        let half = T::of(0.5);
        let m_i = Cx::new(T::zero(), -T::one());
        for g in 0..grid.len() {
            let block = &mut blocks[g * bn..(g + 1) * bn];
            let mut point_sum = T::zero();
            for (axis, gamma) in model.gamma.iter().enumerate() {
                let a = alpha.at(axis, g);
                for r in 0..n {
                    for c in 0..n {
                        skew[r * n + c] = (a[r * n + c] - a[c * n + r].conj()).scale(half);
                    }
                }
                let a_norm = op_norm_small(&skew, n);
                point_sum += a_norm;
                axis_max[axis] = axis_max[axis].max(a_norm);
                // gamma_j (x) (-i * skew_j)
                for rs in 0..2 {
                    for cs in 0..2 {
                        let gcoef = gamma[rs * 2 + cs];
                        if gcoef.norm_sqr() == T::zero() {
                            continue;
                        }
                        for ra in 0..n {
                            for ca in 0..n {
                                let row = rs * n + ra;
                                let col = cs * n + ca;
                                block[row * two_n + col] += gcoef * m_i * skew[ra * n + ca];
                            }
                        }
                    }
                }
            }
            norm_bound = norm_bound.max(point_sum.min(gershgorin(block, two_n)));
        }
        let axis_sum_bound = axis_max[0] + axis_max[1] + axis_max[2];

        Ok(DiracOperator {
            core: Arc::new(DiracCore {
                grid,
                delta,
                rank: n,
                fft: Fft3::new(grid),
                symbols,
                model,
                twist: Some(Twist {
                    blocks,
                    norm_bound,
                    axis_sum_bound,
                }),
            }),
            t,
        })
    }

    /// Sibling operator at a different path parameter (shares all assembly).
    pub fn at_t(&self, t: T) -> Self {
        DiracOperator {
            core: Arc::clone(&self.core),
            t,
        }
    }

    pub fn grid(&self) -> Grid3 {
        self.core.grid
    }

    pub fn rank(&self) -> usize {
        self.core.rank
    }

    pub fn delta(&self) -> SpinStructure {
        self.core.delta
    }

    pub fn model(&self) -> &CliffordModel<T> {
        &self.core.model
    }

    /// Dimension of the discretized spinor space, `2N·n³`.
    pub fn dim(&self) -> usize {
        2 * self.core.rank * self.core.grid.len()
    }

    /// Rigorous upper bound on `||X||` (zero without a twist).
    pub fn x_norm_bound(&self) -> T {
        self.core
            .twist
            .as_ref()
            .map(|tw| tw.norm_bound)
            .unwrap_or(T::zero())
    }

    /// The per-axis bound `Σ_j max_x ||alpha_j(x)||`.
    pub fn x_axis_sum_bound(&self) -> T {
        self.core
            .twist
            .as_ref()
            .map(|tw| tw.axis_sum_bound)
            .unwrap_or(T::zero())
    }

    /// Power-iteration estimate of `||X||` from below (seeded, deterministic).
    pub fn x_norm_estimate(&self, seed: u64, iters: usize) -> T {
        let Some(tw) = self.core.twist.as_ref() else {
            return T::zero();
        };
        let n3 = self.core.grid.len();
        let two_n = 2 * self.core.rank;
        let bn = two_n * two_n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Cx<T>> = (0..self.dim())
            .map(|_| {
                Cx::new(
                    T::of(rng.gen_range(-1.0..1.0)),
                    T::of(rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let mut w = vec![Cx::new(T::zero(), T::zero()); self.dim()];
        let mut est = T::zero();
        for _ in 0..iters {
            let nrm = norm(&v);
            if nrm == T::zero() {
                return T::zero();
            }
            scale_in_place(&mut v, T::one() / nrm);
            for z in w.iter_mut() {
                *z = Cx::new(T::zero(), T::zero());
            }
            for g in 0..n3 {
                let block = &tw.blocks[g * bn..(g + 1) * bn];
                for r in 0..two_n {
                    let mut acc = Cx::new(T::zero(), T::zero());
                    for c in 0..two_n {
                        acc += block[r * two_n + c] * v[c * n3 + g];
                    }
                    w[r * n3 + g] = acc;
                }
            }
            est = norm(&w);
            std::mem::swap(&mut v, &mut w);
        }
        est
    }

    /// `out = (D_0 + t·X) v`.
    pub fn apply_into(&self, v: &[Cx<T>], out: &mut [Cx<T>]) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim || out.len() != dim {
            return Err(Error::Shape(format!(
                "operator dimension {dim}, got input {} / output {}",
                v.len(),
                out.len()
            )));
        }
        let core = &*self.core;
        let n3 = core.grid.len();
        let n = core.rank;
        let comps = 2 * n;

        out.copy_from_slice(v);
        for c in 0..comps {
            core.fft.forward(&mut out[c * n3..(c + 1) * n3]);
        }
        for g in 0..n3 {
            let s = &core.symbols[g];
            for a in 0..n {
                let i0 = a * n3 + g;
                let i1 = (n + a) * n3 + g;
                let h0 = out[i0];
                let h1 = out[i1];
                out[i0] = s[0] * h0 + s[1] * h1;
                out[i1] = s[2] * h0 + s[3] * h1;
            }
        }
        for c in 0..comps {
            core.fft.inverse(&mut out[c * n3..(c + 1) * n3]);
        }

        if let Some(tw) = core.twist.as_ref() {
            if self.t != T::zero() {
                let bn = comps * comps;
                for g in 0..n3 {
                    let block = &tw.blocks[g * bn..(g + 1) * bn];
                    for r in 0..comps {
                        let mut acc = Cx::new(T::zero(), T::zero());
                        for c in 0..comps {
                            acc += block[r * comps + c] * v[c * n3 + g];
                        }
                        out[r * n3 + g] += acc.scale(self.t);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, v: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        let mut out = vec![Cx::new(T::zero(), T::zero()); self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// Dense column-major materialization (oracle path for small grids).
    pub fn dense(&self) -> Result<Vec<Cx<T>>> {
        let dim = self.dim();
        let mut mat = vec![Cx::new(T::zero(), T::zero()); dim * dim];
        let mut e = vec![Cx::new(T::zero(), T::zero()); dim];
        let mut col = vec![Cx::new(T::zero(), T::zero()); dim];
        for j in 0..dim {
            e[j] = Cx::new(T::one(), T::zero());
            self.apply_into(&e, &mut col)?;
            mat[j * dim..(j + 1) * dim].copy_from_slice(&col);
            e[j] = Cx::new(T::zero(), T::zero());
        }
        Ok(mat)
    }

    /// Dense twist matrix `X` alone (column-major).
    pub fn dense_twist(&self) -> Result<Vec<Cx<T>>> {
        let dim = self.dim();
        let mut mat = vec![Cx::new(T::zero(), T::zero()); dim * dim];
        let Some(tw) = self.core.twist.as_ref() else {
            return Ok(mat);
        };
        let n3 = self.core.grid.len();
        let comps = 2 * self.core.rank;
        let bn = comps * comps;
        for g in 0..n3 {
            let block = &tw.blocks[g * bn..(g + 1) * bn];
            for r in 0..comps {
                for c in 0..comps {
                    let row = r * n3 + g;
                    let col = c * n3 + g;
                    mat[col * dim + row] = block[r * comps + c];
                }
            }
        }
        Ok(mat)
    }

    /// All eigenvalues in `[-w, +w]` with multiplicity, plus a hazard flag for
    /// values within the guard band of the window boundary.
    pub fn window_eigs(
        &self,
        window: &SpectralWindow<T>,
        mode: SolverMode,
        seed: u64,
    ) -> Result<WindowedEigs<T>> {
        let spectrum = self.spectrum_up_to(window.half_width + window.guard, mode, seed)?;
        let values: Vec<T> = spectrum.in_window(window.half_width).collect();
        let hazard = spectrum.boundary_hazard(window.half_width, window.guard);
        Ok(WindowedEigs {
            values,
            hazard,
            residual_bound: spectrum.residual_bound,
        })
    }

    /// Complete spectrum on `[-horizon, +horizon]` (dense mode returns the
    /// full spectrum).
    pub fn spectrum_up_to(
        &self,
        horizon: T,
        mode: SolverMode,
        seed: u64,
    ) -> Result<WindowSpectrum<T>> {
        match mode {
            SolverMode::Dense => {
                let dim = self.dim();
                let a = self.dense()?;
                let vals = T::hermitian_eigenvalues(&a, dim)?;
                // backward-stable dense solve: residual at roundoff scale
                let scale = vals
                    .iter()
                    .fold(T::zero(), |m, &x| m.max(x.abs()))
                    .max(T::one());
                Ok(WindowSpectrum::from_full_spectrum(
                    vals,
                    scale * T::of(1e-13),
                ))
            }
            SolverMode::Iterative => {
                let apply = |v: &[Cx<T>], out: &mut [Cx<T>]| {
                    self.apply_into(v, out).expect("dimensions fixed by dim()");
                };
                let shift = horizon * horizon;
                let precond = |v: &mut [Cx<T>]| self.fourier_precondition(shift, v);
                let problem = crate::lobpcg::FoldedProblem {
                    dim: self.dim(),
                    apply_a: &apply,
                    precondition: &precond,
                    a_norm_bound: self.norm_upper_bound(),
                };
                let opts = crate::lobpcg::FoldedOpts {
                    cutoff: horizon,
                    tol_rel: T::of(1e-8),
                    max_iters: 600,
                    seed,
                    block: 0, // auto
                };
                crate::lobpcg::folded_window_spectrum(&problem, &opts)
            }
        }
    }

    /// Norm estimate `||D_t||` (untwisted band maximum plus twist bound).
    pub fn norm_upper_bound(&self) -> T {
        let core = &*self.core;
        let mut sym_max = T::zero();
        for s in &core.symbols {
            let ev = crate::clifford::mat2::hermitian_eigenvalues(s);
            sym_max = sym_max.max(ev[1].abs()).max(ev[0].abs());
        }
        sym_max + self.t.abs() * self.x_norm_bound()
    }

    /// Fourier-diagonal preconditioner `(D_0^2 + shift)^{-1}` for the folded
    /// interior eigensolver.
    pub(crate) fn fourier_precondition(&self, shift: T, v: &mut [Cx<T>]) {
        let core = &*self.core;
        let n3 = core.grid.len();
        let comps = 2 * core.rank;
        debug_assert_eq!(v.len(), comps * n3);
        for c in 0..comps {
            core.fft.forward(&mut v[c * n3..(c + 1) * n3]);
        }
        for g in 0..n3 {
            // D_0^2 is scalar per mode: (2 pi |xi|)^2
            let ev = crate::clifford::mat2::hermitian_eigenvalues(&core.symbols[g]);
            let lam2 = ev[1] * ev[1];
            let w = T::one() / (lam2 + shift);
            for c in 0..comps {
                let i = c * n3 + g;
                v[i] = v[i].scale(w);
            }
        }
        for c in 0..comps {
            core.fft.inverse(&mut v[c * n3..(c + 1) * n3]);
        }
    }
}

/// Windowed eigenvalue list as returned by [`DiracOperator::window_eigs`].
#[derive(Clone, Debug)]
pub struct WindowedEigs<T: Real> {
    pub values: Vec<T>,
    pub hazard: bool,
    pub residual_bound: T,
}

fn gershgorin<T: Real>(block: &[Cx<T>], n: usize) -> T {
    let mut worst = T::zero();
    for r in 0..n {
        let mut row = T::zero();
        for c in 0..n {
            row += block[r * n + c].norm();
        }
        worst = worst.max(row);
    }
    worst
}

pub(crate) fn norm<T: Real>(v: &[Cx<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn scale_in_place<T: Real>(v: &mut [Cx<T>], s: T) {
    for z in v.iter_mut() {
        *z = z.scale(s);
    }
}

/// Closed-form spectrum of the untwisted operator on plain spinors (rank 1):
/// `±2π|κ + δ/2|` per lattice point, sorted ascending, `2·n³` values.
pub fn untwisted_spectrum<T: Real>(n_g: usize, delta: SpinStructure) -> Result<Vec<T>> {
    let lattice = frequency_lattice::<T>(n_g, delta)?;
    let mut out = Vec::with_capacity(2 * n_g * n_g * n_g);
    for &x in &lattice.axes[0] {
        for &y in &lattice.axes[1] {
            for &z in &lattice.axes[2] {
                let v = T::of(2.0) * T::PI() * (x * x + y * y + z * z).sqrt();
                out.push(-v);
                out.push(v);
            }
        }
    }
    out.sort_by(cmp_real);
    Ok(out)
}

/// Closed-form untwisted spectrum with every value repeated `rank` times
/// (the trivially twisted operator).
pub fn untwisted_spectrum_with_rank<T: Real>(
    n_g: usize,
    delta: SpinStructure,
    rank: usize,
) -> Result<Vec<T>> {
    let base = untwisted_spectrum::<T>(n_g, delta)?;
    let mut out = Vec::with_capacity(base.len() * rank);
    for v in base {
        for _ in 0..rank {
            out.push(v);
        }
    }
    out.sort_by(cmp_real);
    Ok(out)
}

/// The affine operator path `t -> D_0 + t X` walked by the spectral-flow
/// engine. Dense mode caches the two dense matrices once; iterative mode
/// stays matrix-free and solves the folded interior problem per sample.
pub struct DiracFlowPath<T: Real> {
    op: DiracOperator<T>,
    mode: SolverMode,
    seed: u64,
    dense_cache: Option<(Vec<Cx<T>>, Vec<Cx<T>>)>,
}

impl<T: Real> DiracFlowPath<T> {
    pub fn new(op: DiracOperator<T>, mode: SolverMode, seed: u64) -> Result<Self> {
        let dense_cache = match mode {
            SolverMode::Dense => {
                let a0 = op.at_t(T::zero()).dense()?;
                let x = op.dense_twist()?;
                Some((a0, x))
            }
            SolverMode::Iterative => None,
        };
        Ok(DiracFlowPath {
            op,
            mode,
            seed,
            dense_cache,
        })
    }

    pub fn operator(&self) -> &DiracOperator<T> {
        &self.op
    }
}

impl<T: Real> crate::sfl::OperatorPath<T> for DiracFlowPath<T> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn delta_norm_bound(&self, a: T, b: T) -> T {
        (b - a).abs() * self.op.x_norm_bound()
    }

    fn spectrum_up_to(&self, t: T, horizon: T) -> Result<WindowSpectrum<T>> {
        match self.mode {
            SolverMode::Dense => {
                let (a0, x) = self.dense_cache.as_ref().expect("dense cache present");
                let dim = self.op.dim();
                let mat: Vec<Cx<T>> = a0
                    .iter()
                    .zip(x.iter())
                    .map(|(a, xx)| *a + xx.scale(t))
                    .collect();
                let vals = T::hermitian_eigenvalues(&mat, dim)?;
                let scale = vals
                    .iter()
                    .fold(T::zero(), |m, &v| m.max(v.abs()))
                    .max(T::one());
                Ok(WindowSpectrum::from_full_spectrum(
                    vals,
                    scale * T::of(1e-13),
                ))
            }
            SolverMode::Iterative => {
                let seed = self.seed ^ t.as_f64().to_bits().rotate_left(17);
                self.op.at_t(t).spectrum_up_to(horizon, SolverMode::Iterative, seed)
            }
        }
    }

    fn endpoint_relation(&self) -> crate::sfl::EndpointRelation {
        crate::sfl::EndpointRelation::Unitary {
            description: "gauge transform of the trivial connection".into(),
        }
    }

    fn dense_at(&self, t: T) -> Option<Vec<Cx<T>>> {
        match &self.dense_cache {
            Some((a0, x)) => Some(
                a0.iter()
                    .zip(x.iter())
                    .map(|(a, xx)| *a + xx.scale(t))
                    .collect(),
            ),
            None => self.op.at_t(t).dense().ok(),
        }
    }
}

/// Band used by [`conjugation_residual`] probes: the discretization error of
/// the endpoint identity is measured on modes `|kappa|_inf <= PROBE_BAND`
/// that every grid in a refinement study resolves. (The unrestricted
/// operator norm is dominated by products wrapping around the Nyquist shell,
/// an artifact of the band edge that does not shrink under refinement.)
pub const PROBE_BAND: i64 = 2;

/// Operator-norm estimate of `P (D^k_1 - F_k^* D_0 F_k) P` by power
/// iteration, `P` the low-frequency probe-band projector: pure
/// discretization error of the endpoint conjugation identity, which must
/// shrink as the grid grows.
pub fn conjugation_residual<T: Real>(
    k: i64,
    n_g: usize,
    rank: usize,
    delta: SpinStructure,
    profile: &CollapseProfile<T>,
    seed: u64,
    iters: usize,
) -> Result<T> {
    let field = gauge_field::<T>(k, n_g, rank, profile)?;
    let alpha = maurer_cartan(&field)?;
    let d1 = DiracOperator::assemble(&alpha, T::one(), delta, T::infinity())?;
    let d0 = DiracOperator::<T>::untwisted(n_g, delta, rank)?;
    let dim = d1.dim();
    let n3 = d1.grid().len();

    let mul_field = |conj: bool, v: &[Cx<T>], out: &mut [Cx<T>]| {
        // (1 ⊗ F) pointwise on the bundle index
        let n = rank;
        for g in 0..n3 {
            let u = field.at(g);
            for s in 0..2 {
                for a in 0..n {
                    let mut acc = Cx::new(T::zero(), T::zero());
                    for b in 0..n {
                        let f = if conj {
                            u[b * n + a].conj()
                        } else {
                            u[a * n + b]
                        };
                        acc += f * v[(s * n + b) * n3 + g];
                    }
                    out[(s * n + a) * n3 + g] = acc;
                }
            }
        }
    };

    // probe-band projector |kappa|_inf <= PROBE_BAND, applied per component
    let grid = d1.grid();
    let fft = Fft3::<T>::new(grid);
    let kappa: Vec<i64> = (0..grid.n)
        .map(|m| crate::clifford::fourier_index(m, grid.n))
        .collect();
    let comps = 2 * rank;
    let project = |v: &mut [Cx<T>]| {
        for c in 0..comps {
            fft.forward(&mut v[c * n3..(c + 1) * n3]);
        }
        for (mx, my, mz) in grid.iter() {
            let keep = kappa[mx].abs() <= PROBE_BAND
                && kappa[my].abs() <= PROBE_BAND
                && kappa[mz].abs() <= PROBE_BAND;
            if !keep {
                let g = grid.idx(mx, my, mz);
                for c in 0..comps {
                    v[c * n3 + g] = Cx::new(T::zero(), T::zero());
                }
            }
        }
        for c in 0..comps {
            fft.inverse(&mut v[c * n3..(c + 1) * n3]);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Cx<T>> = (0..dim)
        .map(|_| {
            Cx::new(
                T::of(rng.gen_range(-1.0..1.0)),
                T::of(rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    project(&mut v);
    let mut fv = vec![Cx::new(T::zero(), T::zero()); dim];
    let mut dfv = vec![Cx::new(T::zero(), T::zero()); dim];
    let mut w = vec![Cx::new(T::zero(), T::zero()); dim];
    let mut est = T::zero();
    for _ in 0..iters {
        let nrm = norm(&v);
        if nrm == T::zero() {
            return Ok(T::zero());
        }
        scale_in_place(&mut v, T::one() / nrm);
        // w = P (D1 - F* D0 F) v with v already in the band
        mul_field(false, &v, &mut fv);
        d0.apply_into(&fv, &mut dfv)?;
        mul_field(true, &dfv, &mut fv);
        d1.apply_into(&v, &mut w)?;
        for i in 0..dim {
            w[i] -= fv[i];
        }
        project(&mut w);
        est = norm(&w);
        std::mem::swap(&mut v, &mut w);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta111() -> SpinStructure {
        SpinStructure::non_trivial()
    }

    #[test]
    fn untwisted_spectrum_smallest_grid() {
        // n_g = 2, delta = (1,1,1): every lattice point has |xi| = sqrt(3)/2
        let s = untwisted_spectrum::<f64>(2, delta111()).unwrap();
        assert_eq!(s.len(), 16);
        let pisq3 = std::f64::consts::PI * 3.0f64.sqrt();
        for (i, v) in s.iter().enumerate() {
            let want = if i < 8 { -pisq3 } else { pisq3 };
            assert!((v - want).abs() < 1e-12, "i={i} v={v}");
        }
        // trivial structure has a kernel
        let s0 = untwisted_spectrum::<f64>(4, SpinStructure::new([0, 0, 0]).unwrap()).unwrap();
        assert!(s0.iter().any(|&v| v == 0.0));
        // the gap of the non-trivial structure
        let smin = s.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
        assert!((smin - pisq3).abs() < 1e-12);
    }

    #[test]
    fn dense_untwisted_matches_closed_form() {
        for (n_g, rank) in [(2usize, 1usize), (2, 2), (4, 1)] {
            let d = DiracOperator::<f64>::untwisted(n_g, delta111(), rank).unwrap();
            let dim = d.dim();
            let mat = d.dense().unwrap();
            // Hermiticity of the dense assembly
            let mut herm: f64 = 0.0;
            for r in 0..dim {
                for c in 0..dim {
                    herm = herm.max((mat[c * dim + r] - mat[r * dim + c].conj()).norm());
                }
            }
            assert!(herm < 1e-10, "hermiticity defect {herm:.3e}");
            let got = f64::hermitian_eigenvalues(&mat, dim).unwrap();
            let want = untwisted_spectrum_with_rank::<f64>(n_g, delta111(), rank).unwrap();
            assert_eq!(got.len(), want.len());
            let worst = got
                .iter()
                .zip(want.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "n_g={n_g} N={rank}: {worst:.3e}");
        }
    }

    #[test]
    fn plane_wave_is_an_eigenvector() {
        // v = spinor eigenvector of the symbol at one mode
        let n_g = 4;
        let d = DiracOperator::<f64>::untwisted(n_g, delta111(), 1).unwrap();
        let grid = d.grid();
        let xi = [1.0 + 0.5, 0.5, -1.0 + 0.5]; // kappa = (1, 0, -1) shifted
        let tau = 2.0 * std::f64::consts::PI;
        // spin part: eigenvector of the 2x2 symbol for eigenvalue +2pi|xi|
        let s = d.model().dirac_symbol(xi);
        let lam = CliffordModel::<f64>::symbol_eigenvalues(xi)[1];
        // (s - lam) v = 0 -> v = (s01, lam - s00)
        let sv = [s[1], Cx::new(lam, 0.0) - s[0]];
        let nrm = (sv[0].norm_sqr() + sv[1].norm_sqr()).sqrt();
        let sv = [sv[0].scale(1.0 / nrm), sv[1].scale(1.0 / nrm)];
        let mut v = vec![Cx::new(0.0, 0.0); d.dim()];
        for (ix, iy, iz) in grid.iter() {
            let g = grid.idx(ix, iy, iz);
            let [x, _y, z] = grid.point::<f64>(ix, iy, iz);
            // plane wave with the integer part of the frequency
            let ph = tau * (x - z);
            let wave = Cx::new(ph.cos(), ph.sin());
            v[g] = sv[0] * wave;
            v[grid.len() + g] = sv[1] * wave;
        }
        let av = d.apply(&v).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..d.dim() {
            worst = worst.max((av[i] - v[i].scale(lam)).norm());
        }
        assert!(worst < 1e-11, "plane-wave eigenrelation defect {worst:.3e}");
    }

    #[test]
    fn apply_is_linear_and_matches_dense() {
        let profile = CollapseProfile::<f64>::default_profile();
        let field = gauge_field::<f64>(1, 4, 2, &profile).unwrap();
        let alpha = maurer_cartan(&field).unwrap();
        let d = DiracOperator::assemble(&alpha, 0.7, delta111(), 100.0).unwrap();
        let dim = d.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rvec = || -> Vec<Cx<f64>> {
            (0..dim)
                .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let u = rvec();
        let v = rvec();
        let a = Cx::new(0.3, -1.1);
        let b = Cx::new(-0.8, 0.2);
        let mut uv = vec![Cx::new(0.0, 0.0); dim];
        for i in 0..dim {
            uv[i] = u[i] * a + v[i] * b;
        }
        let d_uv = d.apply(&uv).unwrap();
        let du = d.apply(&u).unwrap();
        let dv = d.apply(&v).unwrap();
        let mut lin: f64 = 0.0;
        for i in 0..dim {
            lin = lin.max((d_uv[i] - (du[i] * a + dv[i] * b)).norm());
        }
        assert!(lin < 1e-12 * 60.0, "linearity defect {lin:.3e}");

        // agreement with the dense materialization on a random probe
        let mat = d.dense().unwrap();
        let mut dense_u = vec![Cx::new(0.0, 0.0); dim];
        for c in 0..dim {
            for r in 0..dim {
                dense_u[r] += mat[c * dim + r] * u[c];
            }
        }
        let mut agree: f64 = 0.0;
        for i in 0..dim {
            agree = agree.max((dense_u[i] - du[i]).norm());
        }
        assert!(agree < 1e-10, "dense/matrix-free disagreement {agree:.3e}");
    }

    #[test]
    fn hermitian_on_probes_and_affine_in_t() {
        let profile = CollapseProfile::<f64>::default_profile();
        let field = gauge_field::<f64>(2, 4, 2, &profile).unwrap();
        let alpha = maurer_cartan(&field).unwrap();
        let d = DiracOperator::assemble(&alpha, 1.0, delta111(), 100.0).unwrap();
        let dim = d.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rvec = || -> Vec<Cx<f64>> {
            (0..dim)
                .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        for _ in 0..4 {
            let u = rvec();
            let v = rvec();
            let du = d.apply(&u).unwrap();
            let dv = d.apply(&v).unwrap();
            let mut lhs = Cx::new(0.0, 0.0);
            let mut rhs = Cx::new(0.0, 0.0);
            for i in 0..dim {
                lhs += du[i].conj() * v[i];
                rhs += u[i].conj() * dv[i];
            }
            let nu = norm(&u);
            let nv = norm(&v);
            assert!(
                (lhs - rhs).norm() <= 1e-10 * nu * nv,
                "hermiticity probe defect {:.3e}",
                (lhs - rhs).norm()
            );
        }
        // affinity: D(t) = D(0) + t (D(1) - D(0)) on probes
        let t = 0.37;
        let dt = d.at_t(t);
        let d0 = d.at_t(0.0);
        let d1 = d.at_t(1.0);
        let u = rvec();
        let full = dt.apply(&u).unwrap();
        let a0 = d0.apply(&u).unwrap();
        let a1 = d1.apply(&u).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            let interp = a0[i] + (a1[i] - a0[i]).scale(t);
            worst = worst.max((full[i] - interp).norm());
        }
        assert!(worst < 1e-12 * 100.0, "affinity defect {worst:.3e}");
    }

    #[test]
    fn assemble_with_zero_alpha_matches_untwisted() {
        let alpha = ConnectionForm::<f64>::zero(2, 2);
        let d = DiracOperator::assemble(&alpha, 0.8, delta111(), 1e-14).unwrap();
        let mat = d.dense().unwrap();
        let got = f64::hermitian_eigenvalues(&mat, d.dim()).unwrap();
        let want = untwisted_spectrum_with_rank::<f64>(2, delta111(), 2).unwrap();
        let worst = got
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn non_anti_hermitian_alpha_rejected() {
        let mut alpha = ConnectionForm::<f64>::zero(2, 2);
        alpha.comps[0][0] = Cx::new(1.0, 0.0); // Hermitian junk
        alpha.anti_herm_defect = 2.0;
        assert!(matches!(
            DiracOperator::assemble(&alpha, 0.0, delta111(), 1.0),
            Err(Error::NotAntiHermitian { .. })
        ));
    }

    #[test]
    fn x_norm_estimate_respects_bounds() {
        let profile = CollapseProfile::<f64>::default_profile();
        let field = gauge_field::<f64>(1, 6, 2, &profile).unwrap();
        let alpha = maurer_cartan(&field).unwrap();
        let d = DiracOperator::assemble(&alpha, 1.0, delta111(), 100.0).unwrap();
        let est = d.x_norm_estimate(42, 60);
        let bound = d.x_norm_bound();
        let axis_bound = d.x_axis_sum_bound();
        assert!(est > 0.0);
        assert!(
            est <= bound * (1.0 + 1e-6),
            "estimate {est} above bound {bound}"
        );
        assert!(
            bound <= axis_bound * (1.0 + 1e-12),
            "block bound {bound} above axis bound {axis_bound}"
        );
    }

    #[test]
    fn window_eigs_dense_gap_and_full_shell() {
        let d = DiracOperator::<f64>::untwisted(2, delta111(), 2).unwrap();
        let w1 = d
            .window_eigs(
                &SpectralWindow::with_default_guard(1.0).unwrap(),
                SolverMode::Dense,
                0,
            )
            .unwrap();
        assert!(w1.values.is_empty(), "spectral gap should be empty");
        assert!(!w1.hazard);
        let w6 = d
            .window_eigs(
                &SpectralWindow::with_default_guard(6.0).unwrap(),
                SolverMode::Dense,
                0,
            )
            .unwrap();
        assert_eq!(w6.values.len(), d.dim());
        let pisq3 = std::f64::consts::PI * 3.0f64.sqrt();
        for v in &w6.values {
            assert!((v.abs() - pisq3).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugation_residual_zero_for_constant_field() {
        let profile = CollapseProfile::<f64>::default_profile();
        let r = conjugation_residual(0, 4, 2, delta111(), &profile, 3, 32).unwrap();
        assert!(r < 1e-12, "k=0 residual {r:.3e}");
    }
}
