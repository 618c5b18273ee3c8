//! Unit quaternions as points of `S^3` and their identification with SU(2).

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Cx;

const UNIT_TOL: f64 = 1e-12;

/// Quaternion `w + x i + y j + z k`, stored `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T>(pub [T; 4]);

impl<T: Real> Quaternion<T> {
    pub fn identity() -> Self {
        Quaternion([T::one(), T::zero(), T::zero(), T::zero()])
    }

    pub fn norm(&self) -> T {
        self.0.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::of(UNIT_TOL)
    }

    pub fn conj(&self) -> Self {
        let [w, x, y, z] = self.0;
        Quaternion([w, -x, -y, -z])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        Quaternion([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }

    /// Integer power of a unit quaternion.
    ///
    /// Uses the Chebyshev form `q^k = (T_k(w), U_{k-1}(w)·v)`: for
    /// `q = cos θ + sin θ n̂` one has `cos kθ = T_k(cos θ)` and
    /// `sin kθ / sin θ = U_{k-1}(cos θ)`, both polynomials in `w`, so the
    /// power map is evaluated without any branch point at `sin θ = 0`.
    pub fn powi(&self, k: i64) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::Domain(format!(
                "quaternion_power needs a unit quaternion, |q| = {}",
                self.norm()
            )));
        }
        let base = if k < 0 { self.conj() } else { *self };
        let n = k.unsigned_abs();
        let w = base.0[0];
        // t = T_n(w), u = U_{n-1}(w) by the standard three-term recurrences
        let (mut t_prev, mut t_cur) = (T::one(), w); // T_0, T_1
        let (mut u_prev, mut u_cur) = (T::zero(), T::one()); // U_{-1}, U_0
        let two = T::of(2.0);
        for _ in 1..n {
            let t_next = two * w * t_cur - t_prev;
            t_prev = t_cur;
            t_cur = t_next;
            let u_next = two * w * u_cur - u_prev;
            u_prev = u_cur;
            u_cur = u_next;
        }
        let (t, u) = match n {
            0 => (T::one(), T::zero()),
            _ => (t_cur, u_cur),
        };
        let [_, x, y, z] = base.0;
        let mut out = Quaternion([t, u * x, u * y, u * z]);
        // polynomial evaluation drifts off the sphere by O(k^2 eps); renormalize
        let nrm = out.norm();
        if nrm > T::zero() {
            for c in out.0.iter_mut() {
                *c = *c / nrm;
            }
        }
        Ok(out)
    }
}

/// Identify a unit quaternion with the SU(2) matrix
/// `w·Id + i(x σ1 + y σ2 + z σ3)` and pad to an `N x N` unitary with identity.
///
/// Row-major `N x N` output; determinant 1.
pub fn su2_embed<T: Real>(q: &Quaternion<T>, n_rank: usize) -> Result<Vec<Cx<T>>> {
    if n_rank < 2 {
        return Err(Error::RankTooSmall(n_rank));
    }
    if !q.is_unit() {
        return Err(Error::Domain(format!(
            "su2_embed needs a unit quaternion, |q| = {}",
            q.norm()
        )));
    }
    let [w, x, y, z] = q.0;
    let mut m = vec![Cx::new(T::zero(), T::zero()); n_rank * n_rank];
    // top-left 2x2 block
    m[0] = Cx::new(w, z);
    m[1] = Cx::new(y, x);
    m[n_rank] = Cx::new(-y, x);
    m[n_rank + 1] = Cx::new(w, -z);
    for d in 2..n_rank {
        m[d * n_rank + d] = Cx::new(T::one(), T::zero());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q4(v: [f64; 4]) -> Quaternion<f64> {
        Quaternion(v)
    }

    #[test]
    fn pure_i_squared() {
        let q = q4([0.0, 1.0, 0.0, 0.0]);
        let q2 = q.powi(2).unwrap();
        assert!((q2.0[0] + 1.0).abs() < 1e-14);
        for c in &q2.0[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn power_one_is_identity_map() {
        let q = q4([0.5, 0.5, 0.5, 0.5]);
        let p = q.powi(1).unwrap();
        for (a, b) in p.0.iter().zip(q.0.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        let e = q.powi(0).unwrap();
        assert_eq!(e.0, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn non_unit_rejected() {
        assert!(q4([1.0, 1.0, 0.0, 0.0]).powi(2).is_err());
        assert!(su2_embed(&q4([0.9, 0.0, 0.0, 0.0]), 2).is_err());
    }

    #[test]
    fn embed_identity_and_k() {
        let id = su2_embed(&Quaternion::<f64>::identity(), 3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((id[r * 3 + c] - Cx::new(want, 0.0)).norm() < 1e-15);
            }
        }
        // q = (0,0,0,1) embeds to a unitary whose 2x2 block squares to -Id
        let u = su2_embed(&q4([0.0, 0.0, 0.0, 1.0]), 2).unwrap();
        let sq = [
            u[0] * u[0] + u[1] * u[2],
            u[0] * u[1] + u[1] * u[3],
            u[2] * u[0] + u[3] * u[2],
            u[2] * u[1] + u[3] * u[3],
        ];
        assert!((sq[0] + Cx::new(1.0, 0.0)).norm() < 1e-14);
        assert!((sq[3] + Cx::new(1.0, 0.0)).norm() < 1e-14);
        assert!(sq[1].norm() < 1e-14 && sq[2].norm() < 1e-14);
        // determinant of the embedded matrix is 1
        let det = u[0] * u[3] - u[1] * u[2];
        assert!((det - Cx::new(1.0, 0.0)).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn chebyshev_power_matches_repeated_multiplication(
            w in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
            k in -5i64..=5,
        ) {
            let n = (w*w + x*x + y*y + z*z).sqrt();
            prop_assume!(n > 1e-3);
            let q = q4([w/n, x/n, y/n, z/n]);
            let fast = q.powi(k).unwrap();
            // oracle: repeated unit-quaternion multiplication
            let base = if k < 0 { q.conj() } else { q };
            let mut slow = Quaternion::<f64>::identity();
            for _ in 0..k.unsigned_abs() {
                slow = slow.mul(&base);
            }
            for (a, b) in fast.0.iter().zip(slow.0.iter()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn embed_is_unitary(w in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = (w*w + x*x + y*y + z*z).sqrt();
            prop_assume!(n > 1e-3);
            let q = q4([w/n, x/n, y/n, z/n]);
            let u = su2_embed(&q, 2).unwrap();
            // U U* = Id
            let a = u[0]*u[0].conj() + u[1]*u[1].conj();
            let b = u[0]*u[2].conj() + u[1]*u[3].conj();
            let d = u[2]*u[2].conj() + u[3]*u[3].conj();
            prop_assert!((a - Cx::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(b.norm() < 1e-12);
            prop_assert!((d - Cx::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
