use crate::error::{Error, Result};
use crate::Cx;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real scalar the numerical core is generic over.
///
/// `f32` and `f64` implement it; the two dense Hermitian eigensolver hooks
/// dispatch to the faer backend for the matching complex type, so generic
/// code never names a backend type.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + rustfft::FftNum
    + Debug
    + Display
    + LowerExp
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Name used in serialized metadata ("f32"/"f64").
    const NAME: &'static str;

    /// Eigenvalues of a dense Hermitian matrix (column-major, `n x n`),
    /// ascending.
    fn hermitian_eigenvalues(a: &[Cx<Self>], n: usize) -> Result<Vec<Self>>;

    /// Eigenvalues (ascending) and column-major orthonormal eigenvectors of a
    /// dense Hermitian matrix.
    fn hermitian_eigen(a: &[Cx<Self>], n: usize) -> Result<(Vec<Self>, Vec<Cx<Self>>)>;

    /// Shorthand for converting literal constants.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("scalar conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion")
    }
}

macro_rules! impl_real {
    ($t:ty, $name:literal) => {
        impl Real for $t {
            const NAME: &'static str = $name;

            fn hermitian_eigenvalues(a: &[Cx<Self>], n: usize) -> Result<Vec<Self>> {
                if a.len() != n * n {
                    return Err(Error::Shape(format!(
                        "expected {}x{} matrix, got {} entries",
                        n,
                        n,
                        a.len()
                    )));
                }
                let m = faer::MatRef::from_column_major_slice(a, n, n);
                m.self_adjoint_eigenvalues(faer::Side::Lower)
                    .map_err(|e| Error::Eigensolver(format!("dense evd: {e:?}")))
            }

            fn hermitian_eigen(a: &[Cx<Self>], n: usize) -> Result<(Vec<Self>, Vec<Cx<Self>>)> {
                if a.len() != n * n {
                    return Err(Error::Shape(format!(
                        "expected {}x{} matrix, got {} entries",
                        n,
                        n,
                        a.len()
                    )));
                }
                let m = faer::MatRef::from_column_major_slice(a, n, n);
                let evd = m
                    .self_adjoint_eigen(faer::Side::Lower)
                    .map_err(|e| Error::Eigensolver(format!("dense evd: {e:?}")))?;
                let vals: Vec<Self> = evd
                    .S()
                    .column_vector()
                    .iter()
                    .map(|z| z.re)
                    .collect();
                let u = evd.U();
                let mut vecs = vec![Cx::<Self>::new(0.0, 0.0); n * n];
                for j in 0..n {
                    for i in 0..n {
                        vecs[j * n + i] = u[(i, j)];
                    }
                }
                Ok((vals, vecs))
            }
        }
    };
}

impl_real!(f64, "f64");
impl_real!(f32, "f32");

/// Total-order comparator for sorting eigenvalue lists (NaN-free by
/// construction; panics loudly otherwise).
pub fn cmp_real<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("NaN in spectrum")
}
