//! Geometry-agnostic spectral-flow engine for paths of Hermitian operators.
//!
//! The flow is counted through a zero-centered spectral window: a step
//! `[t_i, t_{i+1}]` is accepted only when Weyl's inequality
//! `|lambda_j(A) - lambda_j(B)| <= ||A - B||` guarantees that no eigenvalue
//! can cross the window boundary during the step, in which case the change of
//! the negative count inside the window equals the net number of eigenvalue
//! crossings through zero. The window boundary is re-placed inside a band
//! around the nominal half-width at every step to sit in the widest local
//! spectral gap, which keeps the Weyl budget (and hence the step size) large.
//!
//! Eigenvalues exactly at zero (within `zero_tol`) at a sample trigger
//! bisection rather than a tie-break; paths must have invertible endpoints.

use crate::eigh::{SpectralWindow, WindowSpectrum};
use crate::error::{Error, Result};
use crate::scalar::{cmp_real, Real};
use crate::Cx;
use serde::{Deserialize, Serialize};

/// Relation between the two endpoint operators (metadata only; the count
/// itself needs nothing beyond invertible endpoints).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointRelation {
    None,
    Unitary { description: String },
}

/// A path `[0,1] -> Hermitian operators` the engine can walk.
pub trait OperatorPath<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Rigorous upper bound on `||A_b - A_a||` for `0 <= a <= b <= 1`.
    fn delta_norm_bound(&self, a: T, b: T) -> T;

    /// Complete spectrum of `A_t` on `[-horizon, +horizon]` (more is allowed).
    fn spectrum_up_to(&self, t: T, horizon: T) -> Result<WindowSpectrum<T>>;

    fn endpoint_relation(&self) -> EndpointRelation {
        EndpointRelation::None
    }

    /// Dense column-major materialization of `A_t`, when cheaply available
    /// (used for concatenation junction checks and brute-force oracles).
    fn dense_at(&self, _t: T) -> Option<Vec<Cx<T>>> {
        None
    }
}

/// Step-control knobs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct SflControls<T: Real> {
    /// Hard cap on accepted samples plus bisection retries.
    pub max_steps: usize,
    /// Fraction of the Weyl budget actually used per step, in (0, 1).
    pub safety: T,
    /// Relative half-width band for adaptive window placement.
    pub band: T,
    /// Eigenvalues closer to zero than this at a sample force bisection.
    pub zero_tol: T,
    /// Steps below this length abort with a refinement error.
    pub min_step: T,
    /// Seed forwarded to iterative eigensolvers.
    pub seed: u64,
}

impl<T: Real> Default for SflControls<T> {
    fn default() -> Self {
        SflControls {
            max_steps: 20_000,
            safety: T::of(0.5),
            band: T::of(0.4),
            zero_tol: T::of(1e-10),
            min_step: T::of(1e-12),
            seed: 0,
        }
    }
}

/// One accepted sample of the walk.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct SflStep<T: Real> {
    pub t: T,
    /// Window half-width used for the step leaving this sample.
    pub window: T,
    /// Eigenvalues inside that window at this sample.
    pub eigenvalues: Vec<T>,
    /// Negative count inside `window` at this sample (start of the step).
    pub negative_count: usize,
    /// Negative count at this sample inside the *previous* step's window.
    pub negative_count_arrival: usize,
}

/// Zero crossing, for diagrams; the integer flow never depends on this
/// matching.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct Crossing<T: Real> {
    pub t_lo: T,
    pub t_hi: T,
    /// `+1` upward (negative to positive), `-1` downward.
    pub direction: i8,
    pub trace: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SflDiagnostics {
    pub solves: usize,
    pub refinements: usize,
    pub hazards: usize,
    pub endpoint_relation: String,
}

/// Spectral-flow record of a path.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct SflResult<T: Real> {
    pub flow: i64,
    pub steps: Vec<SflStep<T>>,
    pub crossings: Vec<Crossing<T>>,
    pub diagnostics: SflDiagnostics,
}

impl<T: Real> SflResult<T> {
    /// CSV lines `(t, eigenvalue)` for plotting.
    pub fn eigenvalue_csv(&self) -> String {
        let mut out = String::from("t,eigenvalue\n");
        for s in &self.steps {
            for ev in &s.eigenvalues {
                out.push_str(&format!("{},{}\n", s.t.as_f64(), ev.as_f64()));
            }
        }
        out
    }
}

/// Pick the window half-width inside `[lo, hi]` maximizing the distance from
/// the folded spectrum to the boundary; returns `(half_width, gap)`.
fn choose_window<T: Real>(spectrum: &WindowSpectrum<T>, lo: T, hi: T) -> (T, T) {
    let mut folded: Vec<T> = spectrum.eigenvalues.iter().map(|x| x.abs()).collect();
    folded.sort_by(cmp_real);
    let gap_at = |w: T| -> T {
        folded
            .iter()
            .fold(T::infinity(), |m, &mu| m.min((mu - w).abs()))
    };
    let mut best_w = lo;
    let mut best_gap = gap_at(lo);
    let mut consider = |w: T| {
        let g = gap_at(w);
        if g > best_gap {
            best_gap = g;
            best_w = w;
        }
    };
    consider(hi);
    for pair in folded.windows(2) {
        let mid = (pair[0] + pair[1]) * T::of(0.5);
        if mid > lo && mid < hi {
            consider(mid);
        }
    }
    // also midpoints between band edges and nearest eigenvalues
    for &mu in &folded {
        for cand in [(mu + lo) * T::of(0.5), (mu + hi) * T::of(0.5)] {
            if cand > lo && cand < hi {
                consider(cand);
            }
        }
    }
    (best_w, best_gap)
}

fn count_negative_in<T: Real>(s: &WindowSpectrum<T>, w: T) -> usize {
    s.negative_count(w)
}

fn in_window_sorted<T: Real>(s: &WindowSpectrum<T>, w: T) -> Vec<T> {
    let mut v: Vec<T> = s.in_window(w).collect();
    v.sort_by(cmp_real);
    v
}

/// Windowed spectral flow of a path of Hermitian operators.
pub fn spectral_flow<T: Real, P: OperatorPath<T>>(
    path: &P,
    window: &SpectralWindow<T>,
    controls: &SflControls<T>,
) -> Result<SflResult<T>> {
    if controls.safety <= T::zero() || controls.safety >= T::one() {
        return Err(Error::Domain(format!(
            "safety must lie in (0,1), got {}",
            controls.safety
        )));
    }
    let w = window.half_width;
    let guard = window.guard;
    let band = controls.band;
    let w_lo = w * (T::one() - band);
    let w_hi = w * (T::one() + band);
    let horizon = w_hi + guard * T::of(4.0);

    let mut diagnostics = SflDiagnostics {
        endpoint_relation: format!("{:?}", path.endpoint_relation()),
        ..Default::default()
    };

    let start = path.spectrum_up_to(T::zero(), horizon)?;
    diagnostics.solves += 1;
    if start.min_abs() <= controls.zero_tol {
        return Err(Error::EndpointKernel(start.min_abs().as_f64()));
    }
    let finish = path.spectrum_up_to(T::one(), horizon)?;
    diagnostics.solves += 1;
    if finish.min_abs() <= controls.zero_tol {
        return Err(Error::EndpointKernel(finish.min_abs().as_f64()));
    }

    let mut flow: i64 = 0;
    let mut steps: Vec<SflStep<T>> = Vec::new();
    let mut crossings: Vec<Crossing<T>> = Vec::new();
    let mut traces: Vec<T> = Vec::new(); // last value per live trace id
    let mut trace_ids: Vec<usize> = Vec::new();
    let mut next_trace_id = 0usize;

    let mut t = T::zero();
    let mut cur = start;
    let mut arrival_count = 0usize; // negative count at t=0 in the first window, set below
    let mut first = true;

    while t < T::one() {
        if steps.len() + diagnostics.refinements >= controls.max_steps {
            return Err(Error::Refinement(format!(
                "max_steps {} exceeded at t = {} (flow so far {flow})",
                controls.max_steps,
                t.as_f64()
            )));
        }
        let (w_i, gap_inside) = choose_window(&cur, w_lo, w_hi);
        let gap = gap_inside.min(cur.horizon - w_i).min(horizon - w_i);
        let budget = controls.safety * gap;
        if !(budget > T::zero()) {
            return Err(Error::Refinement(format!(
                "no Weyl budget at t = {} (gap {gap})",
                t.as_f64()
            )));
        }

        // largest dt whose operator increment fits the budget
        let remaining = T::one() - t;
        let mut dt = {
            let full = path.delta_norm_bound(t, T::one());
            if full <= budget {
                remaining
            } else {
                // bisect on the monotone bound function
                let mut lo = T::zero();
                let mut hi = remaining;
                for _ in 0..80 {
                    let mid = (lo + hi) * T::of(0.5);
                    if path.delta_norm_bound(t, t + mid) <= budget {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };

        // inner acceptance loop: bisect on zero/boundary hazards
        let (t_next, nxt) = loop {
            if dt < controls.min_step {
                return Err(Error::Refinement(format!(
                    "step length underflow at t = {} (dt = {})",
                    t.as_f64(),
                    dt.as_f64()
                )));
            }
            let t_next = (t + dt).min(T::one());
            let nxt = if t_next == T::one() {
                finish.clone()
            } else {
                diagnostics.solves += 1;
                path.spectrum_up_to(t_next, horizon)?
            };
            let zero_hazard = nxt.min_abs() <= controls.zero_tol && t_next < T::one();
            let boundary_hazard = nxt.boundary_hazard(w_i, guard);
            let population_changed =
                count_in_window(&nxt, w_i) != count_in_window(&cur, w_i);
            if zero_hazard || boundary_hazard || population_changed {
                if boundary_hazard || population_changed {
                    diagnostics.hazards += 1;
                }
                diagnostics.refinements += 1;
                if diagnostics.refinements + steps.len() >= controls.max_steps {
                    return Err(Error::Refinement(format!(
                        "max_steps {} exceeded during bisection at t = {}",
                        controls.max_steps,
                        t.as_f64()
                    )));
                }
                dt = dt * T::of(0.5);
                continue;
            }
            break (t_next, nxt);
        };

        let neg_from = count_negative_in(&cur, w_i);
        let neg_to = count_negative_in(&nxt, w_i);
        flow += neg_from as i64 - neg_to as i64;

        // trace bookkeeping for diagrams
        let from_vals = in_window_sorted(&cur, w_i);
        let to_vals = in_window_sorted(&nxt, w_i);
        if first {
            arrival_count = neg_from;
            first = false;
        }
        // re-seed trace ids by nearest-value carry-over at the step start
        let mut new_ids = Vec::with_capacity(from_vals.len());
        for &v in &from_vals {
            let mut found = None;
            for (slot, &old_v) in traces.iter().enumerate() {
                if (old_v - v).abs() <= guard * T::of(2.0) {
                    found = Some(trace_ids[slot]);
                    break;
                }
            }
            new_ids.push(found.unwrap_or_else(|| {
                let id = next_trace_id;
                next_trace_id += 1;
                id
            }));
        }
        debug_assert_eq!(from_vals.len(), to_vals.len());
        for ((&a, &b), &id) in from_vals.iter().zip(to_vals.iter()).zip(new_ids.iter()) {
            if a < T::zero() && b > T::zero() {
                crossings.push(Crossing {
                    t_lo: t,
                    t_hi: t_next,
                    direction: 1,
                    trace: id,
                });
            } else if a > T::zero() && b < T::zero() {
                crossings.push(Crossing {
                    t_lo: t,
                    t_hi: t_next,
                    direction: -1,
                    trace: id,
                });
            }
        }
        traces = to_vals.clone();
        trace_ids = new_ids;

        steps.push(SflStep {
            t,
            window: w_i,
            eigenvalues: from_vals,
            negative_count: neg_from,
            negative_count_arrival: arrival_count,
        });
        arrival_count = neg_to;

        if t_next == T::one() {
            steps.push(SflStep {
                t: t_next,
                window: w_i,
                eigenvalues: to_vals,
                negative_count: neg_to,
                negative_count_arrival: neg_to,
            });
        }
        t = t_next;
        cur = nxt;
    }

    Ok(SflResult {
        flow,
        steps,
        crossings,
        diagnostics,
    })
}

fn count_in_window<T: Real>(s: &WindowSpectrum<T>, w: T) -> usize {
    s.in_window(w).count()
}

// ---------------------------------------------------------------------------
// dense path families
// ---------------------------------------------------------------------------

fn frobenius<T: Real>(m: &[Cx<T>]) -> T {
    m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn full_dense_spectrum<T: Real>(mat: &[Cx<T>], dim: usize) -> Result<WindowSpectrum<T>> {
    let vals = T::hermitian_eigenvalues(mat, dim)?;
    let scale = vals
        .iter()
        .fold(T::zero(), |m, &x| m.max(x.abs()))
        .max(T::one());
    Ok(WindowSpectrum::from_full_spectrum(
        vals,
        scale * T::of(1e-13),
    ))
}

/// Affine path `A_t = A_0 + t X` of dense Hermitian matrices.
pub struct DenseAffinePath<T: Real> {
    pub dim: usize,
    a0: Vec<Cx<T>>,
    x: Vec<Cx<T>>,
    x_norm_bound: T,
    relation: EndpointRelation,
}

impl<T: Real> DenseAffinePath<T> {
    pub fn new(dim: usize, a0: Vec<Cx<T>>, x: Vec<Cx<T>>) -> Result<Self> {
        if a0.len() != dim * dim || x.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {dim}x{dim} matrices, got {} and {}",
                a0.len(),
                x.len()
            )));
        }
        let x_norm_bound = frobenius(&x);
        Ok(DenseAffinePath {
            dim,
            a0,
            x,
            x_norm_bound,
            relation: EndpointRelation::None,
        })
    }

    pub fn with_relation(mut self, relation: EndpointRelation) -> Self {
        self.relation = relation;
        self
    }

    /// Path between two given endpoint matrices (`X = A_1 - A_0`).
    pub fn between(dim: usize, a0: Vec<Cx<T>>, a1: &[Cx<T>]) -> Result<Self> {
        let x: Vec<Cx<T>> = a1.iter().zip(a0.iter()).map(|(b, a)| *b - *a).collect();
        Self::new(dim, a0, x)
    }
}

impl<T: Real> OperatorPath<T> for DenseAffinePath<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn delta_norm_bound(&self, a: T, b: T) -> T {
        (b - a).abs() * self.x_norm_bound
    }

    fn spectrum_up_to(&self, t: T, _horizon: T) -> Result<WindowSpectrum<T>> {
        let mat = self.dense_at(t).expect("dense path materializes");
        full_dense_spectrum(&mat, self.dim)
    }

    fn endpoint_relation(&self) -> EndpointRelation {
        self.relation.clone()
    }

    fn dense_at(&self, t: T) -> Option<Vec<Cx<T>>> {
        Some(
            self.a0
                .iter()
                .zip(self.x.iter())
                .map(|(a, x)| *a + x.scale(t))
                .collect(),
        )
    }
}

/// Piecewise-linear path through dense Hermitian samples at given parameters.
pub struct PiecewisePath<T: Real> {
    pub dim: usize,
    ts: Vec<T>,
    mats: Vec<Vec<Cx<T>>>,
    seg_bounds: Vec<T>,
}

impl<T: Real> PiecewisePath<T> {
    /// `ts` must start at 0, end at 1, and be strictly increasing.
    pub fn new(dim: usize, ts: Vec<T>, mats: Vec<Vec<Cx<T>>>) -> Result<Self> {
        if ts.len() != mats.len() || ts.len() < 2 {
            return Err(Error::Shape("need as many sample matrices as sample times (>= 2)".into()));
        }
        if ts[0] != T::zero() || *ts.last().unwrap() != T::one() {
            return Err(Error::Domain("sample times must span [0, 1]".into()));
        }
        for pair in ts.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Domain("sample times must increase".into()));
            }
        }
        for m in &mats {
            if m.len() != dim * dim {
                return Err(Error::Shape("sample matrix dimension mismatch".into()));
            }
        }
        let seg_bounds = mats
            .windows(2)
            .map(|p| {
                let d: Vec<Cx<T>> = p[1].iter().zip(p[0].iter()).map(|(b, a)| *b - *a).collect();
                frobenius(&d)
            })
            .collect();
        Ok(PiecewisePath {
            dim,
            ts,
            mats,
            seg_bounds,
        })
    }
}

impl<T: Real> OperatorPath<T> for PiecewisePath<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn delta_norm_bound(&self, a: T, b: T) -> T {
        let mut total = T::zero();
        for i in 0..self.seg_bounds.len() {
            let (s0, s1) = (self.ts[i], self.ts[i + 1]);
            let lo = a.max(s0);
            let hi = b.min(s1);
            if hi > lo {
                total += self.seg_bounds[i] * (hi - lo) / (s1 - s0);
            }
        }
        total
    }

    fn spectrum_up_to(&self, t: T, _horizon: T) -> Result<WindowSpectrum<T>> {
        let mat = self.dense_at(t).expect("piecewise path materializes");
        full_dense_spectrum(&mat, self.dim)
    }

    fn dense_at(&self, t: T) -> Option<Vec<Cx<T>>> {
        let k = match self.ts.iter().position(|&s| s >= t) {
            Some(0) => return Some(self.mats[0].clone()),
            Some(k) => k,
            None => return Some(self.mats.last().unwrap().clone()),
        };
        let (s0, s1) = (self.ts[k - 1], self.ts[k]);
        let lam = (t - s0) / (s1 - s0);
        Some(
            self.mats[k - 1]
                .iter()
                .zip(self.mats[k].iter())
                .map(|(a, b)| a.scale(T::one() - lam) + b.scale(lam))
                .collect(),
        )
    }
}

/// Time-reversed path.
pub struct Reversed<P>(pub P);

impl<T: Real, P: OperatorPath<T>> OperatorPath<T> for Reversed<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn delta_norm_bound(&self, a: T, b: T) -> T {
        self.0.delta_norm_bound(T::one() - b, T::one() - a)
    }

    fn spectrum_up_to(&self, t: T, horizon: T) -> Result<WindowSpectrum<T>> {
        self.0.spectrum_up_to(T::one() - t, horizon)
    }

    fn endpoint_relation(&self) -> EndpointRelation {
        self.0.endpoint_relation()
    }

    fn dense_at(&self, t: T) -> Option<Vec<Cx<T>>> {
        self.0.dense_at(T::one() - t)
    }
}

pub fn reverse<P>(path: P) -> Reversed<P> {
    Reversed(path)
}

/// Concatenation, reparametrized onto `[0, 1]`; the junction operators must
/// agree within `1e-10`.
pub struct Concat<P1, P2> {
    first: P1,
    second: P2,
}

pub fn concat<T: Real, P1: OperatorPath<T>, P2: OperatorPath<T>>(
    first: P1,
    second: P2,
) -> Result<Concat<P1, P2>> {
    if first.dim() != second.dim() {
        return Err(Error::Shape(format!(
            "concat dimension mismatch: {} vs {}",
            first.dim(),
            second.dim()
        )));
    }
    match (first.dense_at(T::one()), second.dense_at(T::zero())) {
        (Some(a), Some(b)) => {
            let worst = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (*x - *y).norm())
                .fold(T::zero(), |m, v| m.max(v));
            if worst > T::of(1e-10) {
                return Err(Error::Domain(format!(
                    "concat junction mismatch {worst:.3e} > 1e-10"
                )));
            }
        }
        _ => {
            return Err(Error::Domain(
                "concat needs dense junction operators to verify continuity".into(),
            ))
        }
    }
    Ok(Concat { first, second })
}

impl<T: Real, P1: OperatorPath<T>, P2: OperatorPath<T>> OperatorPath<T> for Concat<P1, P2> {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn delta_norm_bound(&self, a: T, b: T) -> T {
        let half = T::of(0.5);
        let two = T::of(2.0);
        let mut total = T::zero();
        if a < half {
            let hi = b.min(half);
            total += self.first.delta_norm_bound(two * a, (two * hi).min(T::one()));
        }
        if b > half {
            let lo = a.max(half);
            total += self
                .second
                .delta_norm_bound(((two * lo) - T::one()).max(T::zero()), two * b - T::one());
        }
        total
    }

    fn spectrum_up_to(&self, t: T, horizon: T) -> Result<WindowSpectrum<T>> {
        let half = T::of(0.5);
        if t <= half {
            self.first.spectrum_up_to(t * T::of(2.0), horizon)
        } else {
            self.second
                .spectrum_up_to(t * T::of(2.0) - T::one(), horizon)
        }
    }

    fn dense_at(&self, t: T) -> Option<Vec<Cx<T>>> {
        let half = T::of(0.5);
        if t <= half {
            self.first.dense_at(t * T::of(2.0))
        } else {
            self.second.dense_at(t * T::of(2.0) - T::one())
        }
    }
}

// ---------------------------------------------------------------------------
// circle oracle
// ---------------------------------------------------------------------------

/// Analytic 1-dimensional oracle: the truncated family
/// `-i d/dθ + (δ + t)·w` on the circle, i.e. diagonal matrices with entries
/// `n + offset + (δ + t)·w` over the symmetric integer mode band.
///
/// The start shift `δ = 1/(2|w|)` keeps both endpoints invertible for every
/// `w != 0`; exactly `w` eigenvalue lines cross zero (upward for `w > 0`).
/// For `w = 0` the oracle is the constant antiperiodic family
/// `diag(n + 1/2 + offset)`, again invertible.
pub fn circle_oracle<T: Real>(w: i64, n_modes: usize) -> Result<DenseAffinePath<T>> {
    circle_oracle_offset(w, n_modes, T::zero())
}

/// Circle oracle with an additive spectral offset (used to chain oracles into
/// concatenations with matching junctions).
pub fn circle_oracle_offset<T: Real>(
    w: i64,
    n_modes: usize,
    offset: T,
) -> Result<DenseAffinePath<T>> {
    if n_modes < 2 * w.unsigned_abs() as usize + 4 {
        return Err(Error::Domain(format!(
            "truncation too small: n_modes = {n_modes} < 2|w| + 4"
        )));
    }
    let dim = n_modes;
    let delta = if w == 0 {
        T::of(0.5)
    } else {
        T::one() / (T::of(2.0) * T::of(w.unsigned_abs() as f64))
    };
    let wf = T::of(w as f64);
    let mut a0 = vec![Cx::new(T::zero(), T::zero()); dim * dim];
    let mut x = vec![Cx::new(T::zero(), T::zero()); dim * dim];
    for m in 0..dim {
        let n = crate::clifford::fourier_index(m, dim);
        let base = T::of(n as f64)
            + offset
            + if w == 0 { delta } else { delta * wf };
        a0[m * dim + m] = Cx::new(base, T::zero());
        x[m * dim + m] = Cx::new(wf, T::zero());
    }
    // sanity: endpoints invertible by construction
    for m in 0..dim {
        let e0 = a0[m * dim + m].re;
        let e1 = e0 + wf;
        if e0.abs() < T::of(1e-9) || e1.abs() < T::of(1e-9) {
            return Err(Error::EndpointKernel(e0.abs().min(e1.abs()).as_f64()));
        }
    }
    Ok(DenseAffinePath::new(dim, a0, x)?.with_relation(EndpointRelation::Unitary {
        description: format!("mode shift by {w} (winding-{w} phase conjugation)"),
    }))
}

/// Brute-force flow oracle: dense full-spectrum index traces on a uniform
/// grid `10x` finer than `fine_steps`, counting net sign changes per sorted
/// trace. Only for small dense paths.
pub fn brute_force_flow<T: Real, P: OperatorPath<T>>(path: &P, fine_steps: usize) -> Result<i64> {
    let dim = path.dim();
    let mut prev: Option<Vec<T>> = None;
    let mut flow = 0i64;
    for i in 0..=fine_steps {
        let t = T::of(i as f64) / T::of(fine_steps as f64);
        let mat = path
            .dense_at(t)
            .ok_or_else(|| Error::Domain("brute-force oracle needs a dense path".into()))?;
        let vals = T::hermitian_eigenvalues(&mat, dim)?;
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(vals.iter()) {
                if *a < T::zero() && *b > T::zero() {
                    flow += 1;
                } else if *a > T::zero() && *b < T::zero() {
                    flow -= 1;
                }
            }
        }
        prev = Some(vals);
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window3() -> SpectralWindow<f64> {
        SpectralWindow::with_default_guard(3.0).unwrap()
    }

    fn controls() -> SflControls<f64> {
        SflControls::default()
    }

    #[test]
    fn circle_oracle_flows() {
        for w in -3i64..=3 {
            let path = circle_oracle::<f64>(w, (2 * w.unsigned_abs() as usize).max(4) + 8).unwrap();
            let r = spectral_flow(&path, &window3(), &controls()).unwrap();
            assert_eq!(r.flow, w, "circle oracle w={w}");
        }
    }

    #[test]
    fn circle_oracle_truncation_guard() {
        assert!(circle_oracle::<f64>(3, 8).is_err());
    }

    #[test]
    fn constant_path_flow_zero() {
        // X = 0: constant invertible diagonal
        let dim = 6;
        let mut a0 = vec![Cx::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            a0[i * dim + i] = Cx::new(if i % 2 == 0 { 1.5 } else { -2.5 }, 0.0);
        }
        let x = vec![Cx::new(0.0, 0.0); dim * dim];
        let path = DenseAffinePath::new(dim, a0, x).unwrap();
        let r = spectral_flow(&path, &window3(), &controls()).unwrap();
        assert_eq!(r.flow, 0);
        assert!(r.crossings.is_empty());
    }

    #[test]
    fn reversal_and_concat() {
        let p2 = circle_oracle::<f64>(2, 12).unwrap();
        let r = spectral_flow(&reverse(p2), &window3(), &controls()).unwrap();
        assert_eq!(r.flow, -2);

        // concat(p, reverse(p)) -> 0
        let p = circle_oracle::<f64>(2, 12).unwrap();
        let back = reverse(circle_oracle::<f64>(2, 12).unwrap());
        let loop_path = concat(p, back).unwrap();
        let r0 = spectral_flow(&loop_path, &window3(), &controls()).unwrap();
        assert_eq!(r0.flow, 0);

        // concat(circle(1), shifted circle(2)) -> 3
        let first = circle_oracle::<f64>(1, 16).unwrap();
        // first ends at n + 1/2 + 1; the offset-1 winding-2 oracle starts at
        // n + 1 + 1/2
        let second = circle_oracle_offset::<f64>(2, 16, 1.0).unwrap();
        let chained = concat(first, second).unwrap();
        let r3 = spectral_flow(&chained, &window3(), &controls()).unwrap();
        assert_eq!(r3.flow, 3);
    }

    #[test]
    fn concat_junction_mismatch_rejected() {
        let first = circle_oracle::<f64>(1, 16).unwrap();
        let second = circle_oracle::<f64>(2, 16).unwrap(); // wrong offset
        assert!(concat::<f64, _, _>(first, second).is_err());
    }

    #[test]
    fn singular_endpoint_rejected() {
        let dim = 4;
        let mut a0 = vec![Cx::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            a0[i * dim + i] = Cx::new(i as f64, 0.0); // eigenvalue 0 at i=0
        }
        let x = vec![Cx::new(0.0, 0.0); dim * dim];
        let path = DenseAffinePath::new(dim, a0, x).unwrap();
        assert!(matches!(
            spectral_flow(&path, &window3(), &controls()),
            Err(Error::EndpointKernel(_))
        ));
    }

    #[test]
    fn max_steps_enforced() {
        let path = circle_oracle::<f64>(3, 16).unwrap();
        let mut c = controls();
        c.max_steps = 2;
        assert!(matches!(
            spectral_flow(&path, &window3(), &c),
            Err(Error::Refinement(_))
        ));
    }

    #[test]
    fn random_affine_paths_match_morse_count_and_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut done = 0;
        while done < 12 {
            let dim = rng.gen_range(2..=12);
            let mut herm = |scale: f64| -> Vec<Cx<f64>> {
                let mut m = vec![Cx::new(0.0, 0.0); dim * dim];
                for c in 0..dim {
                    for r in 0..=c {
                        let z = if r == c {
                            Cx::new(rng.gen_range(-scale..scale), 0.0)
                        } else {
                            Cx::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
                        };
                        m[c * dim + r] = z;
                        m[r * dim + c] = z.conj();
                    }
                }
                m
            };
            let a0 = herm(2.0);
            let a1 = herm(2.0);
            let e0 = f64::hermitian_eigenvalues(&a0, dim).unwrap();
            let e1 = f64::hermitian_eigenvalues(&a1, dim).unwrap();
            let min0 = e0.iter().fold(f64::INFINITY, |m, &x| m.min(x.abs()));
            let min1 = e1.iter().fold(f64::INFINITY, |m, &x| m.min(x.abs()));
            if min0 < 0.05 || min1 < 0.05 {
                continue;
            }
            done += 1;
            let neg0 = e0.iter().filter(|&&x| x < 0.0).count() as i64;
            let neg1 = e1.iter().filter(|&&x| x < 0.0).count() as i64;
            let path = DenseAffinePath::between(dim, a0, &a1).unwrap();
            let window = SpectralWindow::with_default_guard(
                e0.iter().chain(e1.iter()).fold(0.0f64, |m, &x| m.max(x.abs())) * 1.5 + 1.0,
            )
            .unwrap();
            let r = spectral_flow(&path, &window, &controls()).unwrap();
            // finite dimensions: flow = Morse index difference
            assert_eq!(r.flow, neg0 - neg1, "dim={dim}");
            let bf = brute_force_flow(&path, 300).unwrap();
            assert_eq!(r.flow, bf, "brute force dim={dim}");
        }
    }

    #[test]
    fn integer_determinism_across_controls() {
        let path = circle_oracle::<f64>(3, 18).unwrap();
        let mut flows = Vec::new();
        for (safety, seed) in [(0.5f64, 1u64), (0.37, 99), (0.8, 7)] {
            let c = SflControls {
                safety,
                seed,
                ..controls()
            };
            flows.push(spectral_flow(&path, &window3(), &c).unwrap().flow);
        }
        assert!(flows.iter().all(|&f| f == 3), "{flows:?}");
    }

    #[test]
    fn flow_invariant_matches_step_records() {
        let path = circle_oracle::<f64>(2, 14).unwrap();
        let r = spectral_flow(&path, &window3(), &controls()).unwrap();
        // flow = sum over transitions of (neg at start) - (neg at arrival)
        let mut acc = 0i64;
        for pair in r.steps.windows(2) {
            acc += pair[0].negative_count as i64 - pair[1].negative_count_arrival as i64;
        }
        assert_eq!(acc, r.flow);
        // net crossing directions agree with the flow
        let net: i64 = r.crossings.iter().map(|c| c.direction as i64).sum();
        assert_eq!(net, r.flow);
    }
}
