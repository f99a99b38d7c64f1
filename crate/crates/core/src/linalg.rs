//! Small dense linear-algebra kernels with an explicit rank cutoff.
//!
//! Eigen- and singular-value decompositions come from `nalgebra`; this module
//! only fixes how near-zero spectra are treated.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values (or eigenvalues) below `rel_rank_tol · σ_max` are treated
/// as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel_rank_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rel_rank_tol: 1e-10 }
    }
}

impl TolerancePolicy {
    pub fn new(rel_rank_tol: f64) -> Result<Self> {
        if !(rel_rank_tol > 0.0 && rel_rank_tol < 1.0) {
            return Err(Error::invalid(format!(
                "rel_rank_tol must lie in (0, 1), got {rel_rank_tol}"
            )));
        }
        Ok(Self { rel_rank_tol })
    }
}

/// Result of a rank-revealing inverse: the matrix plus whether the cutoff
/// removed (or clamped) any direction.
#[derive(Debug, Clone)]
pub struct Regularized {
    pub matrix: DMatrix<f64>,
    pub truncated: bool,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-8 * scale {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// `M^{-1/2}` for a symmetric positive semidefinite `M`.
///
/// Eigenvalues below `tol · λ_max` are clamped up to that cutoff rather than
/// dropped, so the result stays invertible.
pub fn sym_inv_sqrt(m: &DMatrix<f64>, tol: TolerancePolicy) -> Result<Regularized> {
    inv_sqrt_impl(m, tol, true)
}

/// Pseudo-inverse square root `(M^+)^{1/2}`: eigenvalues below the cutoff are
/// dropped, so null directions of `M` map to zero.
pub fn sym_pinv_sqrt(m: &DMatrix<f64>, tol: TolerancePolicy) -> Result<Regularized> {
    inv_sqrt_impl(m, tol, false)
}

fn inv_sqrt_impl(m: &DMatrix<f64>, tol: TolerancePolicy, clamp: bool) -> Result<Regularized> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let max_eig = eig.eigenvalues.max();
    if !(max_eig > 0.0) || !max_eig.is_finite() {
        return Err(Error::invalid("matrix has no positive eigenvalue"));
    }
    let cutoff = tol.rel_rank_tol * max_eig;
    let min_eig = eig.eigenvalues.min();
    if min_eig < -cutoff {
        return Err(Error::invalid(format!(
            "matrix is indefinite (eigenvalue {min_eig:e})"
        )));
    }
    let mut truncated = false;
    let scaled: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < cutoff {
                truncated = true;
                if clamp {
                    1.0 / cutoff.sqrt()
                } else {
                    0.0
                }
            } else {
                1.0 / l.sqrt()
            }
        })
        .collect();
    if truncated {
        log::warn!("inverse square root: truncated eigenvalues below {cutoff:e}");
    }
    let q = &eig.eigenvectors;
    let mut qs = q.clone();
    for (j, s) in scaled.iter().enumerate() {
        qs.column_mut(j).scale_mut(*s);
    }
    let out = &qs * q.transpose();
    let out = (&out + out.transpose()) * 0.5;
    Ok(Regularized {
        matrix: out,
        truncated,
    })
}

/// Symmetric square root `M^{1/2}` of a symmetric PSD matrix; negative
/// rounding noise in the spectrum is set to zero.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let q = &eig.eigenvectors;
    let mut qs = q.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        qs.column_mut(j).scale_mut(l.max(0.0).sqrt());
    }
    Ok(&qs * q.transpose())
}

/// Smallest of the `min(r, c)` singular values.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().min().max(0.0)
}

/// Moore–Penrose pseudoinverse through the SVD with a relative cutoff.
pub fn pinv(m: &DMatrix<f64>, tol: TolerancePolicy) -> Regularized {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Regularized {
            matrix: DMatrix::zeros(c, r),
            truncated: false,
        };
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let s_max = svd.singular_values.max();
    let cutoff = tol.rel_rank_tol * s_max;
    let mut truncated = false;
    // V Σ⁺ Uᵀ
    let mut v_scaled = v_t.transpose();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cutoff && s > 0.0 {
            1.0 / s
        } else {
            truncated = true;
            0.0
        };
        v_scaled.column_mut(j).scale_mut(inv);
    }
    Regularized {
        matrix: v_scaled * u.transpose(),
        truncated,
    }
}

/// Left pseudoinverse `(MᵀM)⁻Mᵀ` of a tall matrix, computed via the SVD.
pub fn pinv_left(m: &DMatrix<f64>, tol: TolerancePolicy) -> Result<Regularized> {
    if m.nrows() < m.ncols() {
        return Err(Error::invalid(format!(
            "left pseudoinverse needs rows >= cols, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(pinv(m, tol))
}
