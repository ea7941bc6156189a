//! Dense symmetric linear algebra for the Newton step: subspace reduction for
//! a pinned coordinate, Cholesky solves, and eigenvalue bounds.
//!
//! The Hessian of the conformal objective has the constant vector in its
//! nullspace; pinning one coordinate to zero restricts to a subspace where it
//! is positive definite. Everything here is dense: the target problems stay
//! at desk scale.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{GradientVec, HessianMat};

/// Which coordinate, if any, is pinned to zero during solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConstraintSpec {
    pinned: Option<usize>,
}

impl ConstraintSpec {
    pub fn none() -> Self {
        Self { pinned: None }
    }

    pub fn pinned(index: usize) -> Self {
        Self {
            pinned: Some(index),
        }
    }

    /// Pin coordinate 0, the conventional choice for the conformal problem.
    pub fn pin_first() -> Self {
        Self::pinned(0)
    }

    pub fn pinned_index(&self) -> Option<usize> {
        self.pinned
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(i) = self.pinned {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "pinned index {i} out of range for dimension {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn reduced_dim(&self, n: usize) -> usize {
        match self.pinned {
            Some(_) => n - 1,
            None => n,
        }
    }
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// Deletes the pinned row/column of `h` and the pinned entry of `g`.
/// With no pin this is a plain copy.
pub fn reduce(
    h: &HessianMat,
    g: &GradientVec,
    c: &ConstraintSpec,
) -> Result<(HessianMat, Vec<f64>)> {
    let n = h.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.dim(),
        });
    }
    let hr = reduce_matrix(h, c)?;
    let gr = match c.pinned_index() {
        None => g.coords().to_vec(),
        Some(p) => g
            .coords()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != p)
            .map(|(_, &x)| x)
            .collect(),
    };
    Ok((hr, gr))
}

pub fn reduce_matrix(h: &HessianMat, c: &ConstraintSpec) -> Result<HessianMat> {
    let n = h.dim();
    c.validate(n)?;
    match c.pinned_index() {
        None => Ok(h.clone()),
        Some(p) => {
            let m = n - 1;
            if m == 0 {
                return Err(Error::InvalidParameter(
                    "cannot pin the only coordinate".into(),
                ));
            }
            let mut data = Vec::with_capacity(m * m);
            for i in (0..n).filter(|&i| i != p) {
                for j in (0..n).filter(|&j| j != p) {
                    data.push(h.get(i, j));
                }
            }
            HessianMat::new(m, data)
        }
    }
}

/// Re-inserts the pinned coordinate (as exactly 0) into a reduced vector.
pub fn expand(reduced: &[f64], c: &ConstraintSpec, n: usize) -> Vec<f64> {
    match c.pinned_index() {
        None => reduced.to_vec(),
        Some(p) => {
            let mut full = Vec::with_capacity(n);
            let mut it = reduced.iter();
            for i in 0..n {
                if i == p {
                    full.push(0.0);
                } else {
                    full.push(*it.next().expect("reduced vector too short"));
                }
            }
            full
        }
    }
}

/// Cholesky factorization L L' of a symmetric positive definite matrix.
/// A non-positive pivot means the matrix is not PD to working precision and
/// is reported as an error rather than being regularized away: an indefinite
/// Hessian signals an oracle bug or a point outside the valid domain.
pub struct SpdFactorization {
    n: usize,
    l: Vec<f64>,
}

impl SpdFactorization {
    pub fn new(a: &HessianMat) -> Result<Self> {
        let n = a.dim();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            index: i,
                            pivot: sum,
                        });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = b via forward/back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                sum -= self.l[i * n + k] * yk;
            }
            y[i] = sum / self.l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                sum -= self.l[k * n + i] * xk;
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }
}

/// Newton direction `d` solving `H d = -g` on the constrained subspace; the
/// pinned coordinate of `d` is exactly 0.
pub fn newton_direction(h: &HessianMat, g: &GradientVec, c: &ConstraintSpec) -> Result<Vec<f64>> {
    let n = h.dim();
    let (hr, gr) = reduce(h, g, c)?;
    let factor = SpdFactorization::new(&hr)?;
    let neg_g: Vec<f64> = gr.iter().map(|x| -x).collect();
    let dr = factor.solve(&neg_g);
    Ok(expand(&dr, c, n))
}

/// Smallest and largest eigenvalue of the reduced matrix.
///
/// The strong-convexity bounds are stated for singular values; for a
/// symmetric PD matrix those coincide with the eigenvalues computed here.
pub fn eigen_bounds(h: &HessianMat, c: &ConstraintSpec) -> Result<(f64, f64)> {
    let hr = reduce_matrix(h, c)?;
    let eigs = symmetric_eigenvalues(&hr);
    let lo = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
pub fn spectral_norm(h: &HessianMat) -> f64 {
    symmetric_eigenvalues(h)
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// Diagnostics-only: accuracy matters more than speed here, and Jacobi is
/// about as accurate as dense symmetric eigensolvers get.
pub fn symmetric_eigenvalues(h: &HessianMat) -> Vec<f64> {
    let n = h.dim();
    let mut a = h.as_slice().to_vec();
    if n == 1 {
        return a;
    }
    let scale = h.frobenius_norm().max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
