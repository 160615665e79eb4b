//! Dense linear maps between Euclidean spaces, adjoints, and operator-norm
//! estimation by power iteration on `AᵀA`.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::rng::uniform_symmetric;

/// Default relative tolerance on successive Rayleigh quotients.
pub const NORM_TOL: f64 = 1e-10;
/// Default iteration cap for the power method.
pub const NORM_MAX_ITER: usize = 10_000;

struct Inner {
    matrix: DMatrix<f64>,
    norm: OnceLock<f64>,
    norm_provided: bool,
}

/// A bounded linear operator `A: H₁ → H₂` between finite-dimensional
/// Euclidean spaces, stored densely.
///
/// The operator norm `‖A‖ = √λ_max(AᵀA)` is estimated on demand and memoized;
/// a caller that knows the norm exactly (e.g. `‖a‖` for a rank-one map) can
/// supply it at construction and bypass estimation. Cloning is cheap and
/// clones share the memoized norm.
#[derive(Clone)]
pub struct LinearMap {
    inner: Arc<Inner>,
}

impl LinearMap {
    /// Wraps a dense matrix. Rejects empty shapes and non-finite entries.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::parameter(
                "matrix",
                "both dimensions must be positive",
            ));
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "matrix entry",
            });
        }
        Ok(Self {
            inner: Arc::new(Inner {
                matrix,
                norm: OnceLock::new(),
                norm_provided: false,
            }),
        })
    }

    /// Wraps a matrix together with an externally known operator norm.
    pub fn with_norm(matrix: DMatrix<f64>, norm: f64) -> Result<Self> {
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::parameter(
                "norm",
                format!("must be positive and finite, got {norm}"),
            ));
        }
        let map = Self::new(matrix)?;
        map.inner.norm.set(norm).expect("fresh cell");
        // bypassing the estimator is only sound for a nonzero map
        if map.is_zero() {
            return Err(Error::ZeroOperator);
        }
        Ok(Self {
            inner: Arc::new(Inner {
                matrix: map.inner.matrix.clone(),
                norm: map.inner.norm.clone(),
                norm_provided: true,
            }),
        })
    }

    /// Builds a map from row-major nested slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::parameter(
                "matrix",
                "both dimensions must be positive",
            ));
        }
        let ncols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::instance(
                    "A",
                    format!("row {i} has {} entries, expected {ncols}", r.len()),
                ));
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), ncols, &flat))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is well-formed")
    }

    /// Dimension of the domain H₁ (number of columns).
    pub fn domain_dim(&self) -> usize {
        self.inner.matrix.ncols()
    }

    /// Dimension of the codomain H₂ (number of rows).
    pub fn codomain_dim(&self) -> usize {
        self.inner.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.inner.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.inner.matrix.iter().all(|v| *v == 0.0)
    }

    /// The externally supplied norm, if the map was built with one.
    pub fn supplied_norm(&self) -> Option<f64> {
        if self.inner.norm_provided {
            self.inner.norm.get().copied()
        } else {
            None
        }
    }

    /// Matrix-vector product `Ax`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_domain(x)?;
        Ok(&self.inner.matrix * x)
    }

    /// Adjoint product `A*u` without materializing the transpose.
    pub fn apply_adjoint(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.codomain_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.codomain_dim(),
                actual: u.len(),
            });
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "vector entry",
            });
        }
        Ok(self.inner.matrix.tr_mul(u))
    }

    /// The adjoint map `A*` (transpose). The returned map estimates its own
    /// norm independently, so `‖A*‖ = ‖A‖` stays a testable property rather
    /// than a copied cache.
    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            inner: Arc::new(Inner {
                matrix: self.inner.matrix.transpose(),
                norm: OnceLock::new(),
                norm_provided: false,
            }),
        }
    }

    /// Estimates `‖A‖ = √λ_max(AᵀA)` by power iteration, stopping when the
    /// relative change between successive Rayleigh quotients drops below
    /// `tol`. The first estimate is memoized and reused by later calls.
    pub fn operator_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroOperator);
        }
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::parameter(
                "tol",
                format!("must be positive, got {tol}"),
            ));
        }
        Ok(*self
            .inner
            .norm
            .get_or_init(|| power_iteration(&self.inner.matrix, tol, max_iter)))
    }

    /// `operator_norm` with the default tolerance and iteration cap.
    pub fn norm_estimate(&self) -> Result<f64> {
        self.operator_norm(NORM_TOL, NORM_MAX_ITER)
    }

    fn check_domain(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.domain_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain_dim(),
                actual: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "vector entry",
            });
        }
        Ok(())
    }
}

impl std::fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearMap")
            .field("rows", &self.codomain_dim())
            .field("cols", &self.domain_dim())
            .field("norm", &self.inner.norm.get())
            .finish()
    }
}

/// Power iteration on the Gram map `v ↦ Aᵀ(Av)` with a deterministic
/// pseudo-random unit start. Returns `√ρ` for the converged Rayleigh
/// quotient ρ.
fn power_iteration(matrix: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = matrix.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut v = random_unit(&mut rng, n);
    let mut rayleigh_prev = 0.0;
    let mut rayleigh = 0.0;
    for _ in 0..max_iter {
        let av = matrix * &v;
        let w = matrix.tr_mul(&av);
        rayleigh = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 || rayleigh <= 0.0 {
            // start landed in the kernel; redraw
            v = random_unit(&mut rng, n);
            rayleigh_prev = 0.0;
            continue;
        }
        if rayleigh_prev > 0.0 && (rayleigh - rayleigh_prev).abs() <= tol * rayleigh {
            break;
        }
        rayleigh_prev = rayleigh;
        v = w / wn;
    }
    rayleigh.max(0.0).sqrt()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| uniform_symmetric(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}
