//! The standard root `V` of a monic elliptic tuple: the unique solution of
//! `A11 + 2 A12 V + V^2 = 0` with spectrum in the open upper half-plane,
//! together with its decomposition `V = C + iD = (S + iI)D`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core_types::complexify;
use crate::matfun::{cond_2, SchurForm};
use crate::{CMatrix, EllipticTuple, PencilError, RMatrix, Result};

/// Companion eigenvalues with `|Im β|` below this are treated as real, which
/// means the tuple is not strongly elliptic.
pub const REAL_AXIS_TOL: f64 = 1e-9;
/// Required upper-half-plane margin for `σ(V)`.
pub const SPEC_MARGIN: f64 = REAL_AXIS_TOL;
/// Tolerance for the quadratic residual and the symmetry relations.
pub const ROOT_TOL: f64 = 1e-9;
/// Eigenvector-matrix condition number beyond which the ordered-Schur
/// subspace extraction replaces the eigenvector route.
pub const COND_LIMIT: f64 = 1e10;

/// Standard root of a monic elliptic tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardRoot {
    /// `V`, spectrum in the open upper half-plane.
    pub v: CMatrix,
    /// `C = Re V`.
    pub c: RMatrix,
    /// `D = Im V`, symmetric positive definite.
    pub d: RMatrix,
    /// `S = C D^{-1}`, symmetric.
    pub s: RMatrix,
    /// Relative residual `‖A11 + 2 A12 V + V²‖ / ‖A11‖`.
    pub residual: f64,
}

/// Block companion matrix `[[0, I], [-A11, -2 A12]]` of the quadratic pencil
/// `A11 + 2β A12 + β² I`.
pub fn companion_linearization(t: &EllipticTuple) -> Result<CMatrix> {
    if !t.is_monic() {
        return Err(PencilError::NotMonic);
    }
    let ell = t.ell();
    let mut m = CMatrix::zeros(2 * ell, 2 * ell);
    m.view_mut((0, ell), (ell, ell))
        .copy_from(&CMatrix::identity(ell, ell));
    m.view_mut((ell, 0), (ell, ell))
        .copy_from(&(-complexify(t.a11())));
    m.view_mut((ell, ell), (ell, ell))
        .copy_from(&(complexify(t.a12()) * Complex64::new(-2.0, 0.0)));
    Ok(m)
}

/// Relative residual `‖A11 + 2 A12 V + V²‖ / ‖A11‖` of a candidate root.
pub fn root_residual(t: &EllipticTuple, v: &CMatrix) -> Result<f64> {
    let ell = t.ell();
    if v.nrows() != ell || v.ncols() != ell {
        return Err(PencilError::DimensionMismatch(format!(
            "root is {}x{}, tuple has ell = {}",
            v.nrows(),
            v.ncols(),
            ell
        )));
    }
    let a11 = complexify(t.a11());
    let a12 = complexify(t.a12());
    let res = &a11 + a12 * v * Complex64::new(2.0, 0.0) + v * v;
    Ok(res.norm() / t.a11().norm().max(1e-300))
}

/// Computes the standard root of a monic strongly elliptic tuple.
///
/// Primary route: eigendecomposition of the companion matrix, keeping the ℓ
/// upper-half-plane eigenpairs and reconstructing `V = X diag(β) X⁻¹` from
/// the top blocks of the eigenvectors. When that basis is ill conditioned
/// (repeated or clustered β), falls back to the ordered-Schur invariant
/// subspace `[X1; X2]` and `V = X2 X1⁻¹`.
pub fn compute_standard_root(t: &EllipticTuple) -> Result<StandardRoot> {
    let ell = t.ell();
    let comp = companion_linearization(t)?;
    let sf = SchurForm::new(&comp)?;
    let eigs = sf.eigenvalues();
    let min_im = eigs.iter().map(|b| b.im.abs()).fold(f64::INFINITY, f64::min);
    if min_im <= REAL_AXIS_TOL {
        return Err(PencilError::NotElliptic(format!(
            "companion eigenvalue within {min_im:.3e} of the real axis"
        )));
    }
    let uhp: Vec<usize> = (0..2 * ell).filter(|&j| eigs[j].im > 0.0).collect();
    if uhp.len() != ell {
        return Err(PencilError::NotElliptic(format!(
            "{} of {} companion eigenvalues in the upper half-plane",
            uhp.len(),
            2 * ell
        )));
    }

    let v = match eigenvector_route(&sf, &eigs, &uhp, ell)? {
        Some(v) => v,
        None => schur_subspace_route(&sf, &eigs, ell)?,
    };
    finalize(t, v)
}

/// `V = X diag(β) X⁻¹`; `None` when `cond(X)` exceeds `COND_LIMIT`.
fn eigenvector_route(
    sf: &SchurForm,
    eigs: &[Complex64],
    uhp: &[usize],
    ell: usize,
) -> Result<Option<CMatrix>> {
    let vecs = sf.eigenvectors();
    let mut x = CMatrix::zeros(ell, ell);
    let mut beta = CMatrix::zeros(ell, ell);
    for (k, &j) in uhp.iter().enumerate() {
        x.set_column(k, &vecs.view((0, j), (ell, 1)).column(0));
        beta[(k, k)] = eigs[j];
    }
    if cond_2(&x) > COND_LIMIT {
        return Ok(None);
    }
    let xinv = x.clone().try_inverse().ok_or(PencilError::SingularMatrix)?;
    Ok(Some(&x * beta * xinv))
}

/// `V = X2 X1⁻¹` from the reordered Schur basis of the UHP invariant
/// subspace.
fn schur_subspace_route(sf: &SchurForm, eigs: &[Complex64], ell: usize) -> Result<CMatrix> {
    let select: Vec<bool> = eigs.iter().map(|b| b.im > 0.0).collect();
    let (q, _t) = sf.reorder_front(&select)?;
    let x1 = q.view((0, 0), (ell, ell)).into_owned();
    let x2 = q.view((ell, 0), (ell, ell)).into_owned();
    let x1inv = x1
        .try_inverse()
        .ok_or(PencilError::IllConditionedEigenbasis(f64::INFINITY))?;
    Ok(&x2 * x1inv)
}

/// Purges imaginary noise, decomposes into `(C, D, S)`, and enforces every
/// invariant of the type.
fn finalize(t: &EllipticTuple, v: CMatrix) -> Result<StandardRoot> {
    let ell = t.ell();
    let residual = root_residual(t, &v)?;
    if residual > ROOT_TOL {
        return Err(PencilError::ResidualTooLarge(residual));
    }
    let c = RMatrix::from_fn(ell, ell, |i, j| v[(i, j)].re);
    let d_raw = RMatrix::from_fn(ell, ell, |i, j| v[(i, j)].im);
    let asym = (&d_raw - d_raw.transpose()).norm();
    if asym > ROOT_TOL * d_raw.norm().max(1.0) {
        return Err(PencilError::NotSymmetric("D = Im V".into()));
    }
    let d = (&d_raw + d_raw.transpose()).scale(0.5);
    let d_eigs = d.clone().symmetric_eigen().eigenvalues;
    if d_eigs.iter().any(|&l| l <= 0.0) {
        return Err(PencilError::NotPositiveDefinite("D = Im V".into()));
    }
    let dinv = d
        .clone()
        .try_inverse()
        .ok_or(PencilError::SingularMatrix)?;
    let s_raw = &c * &dinv;
    let s_asym = (&s_raw - s_raw.transpose()).norm();
    if s_asym > ROOT_TOL * s_raw.norm().max(1.0) {
        return Err(PencilError::NotSymmetric("S = C D^-1".into()));
    }
    let s = (&s_raw + s_raw.transpose()).scale(0.5);
    // CᵀD = DᵀC (equivalent restatement of the symmetry of S)
    let skew = (c.transpose() * &d - d.transpose() * &c).norm();
    if skew > ROOT_TOL * (c.norm() * d.norm()).max(1.0) {
        return Err(PencilError::InvariantViolation(
            "C^T D != D^T C beyond tolerance".into(),
        ));
    }
    let v_clean = CMatrix::from_fn(ell, ell, |i, j| Complex64::new(c[(i, j)], d[(i, j)]));
    let min_im = crate::matfun::spectrum(&v_clean)?
        .iter()
        .map(|z| z.im)
        .fold(f64::INFINITY, f64::min);
    if min_im <= SPEC_MARGIN {
        return Err(PencilError::NotElliptic(format!(
            "σ(V) margin {min_im:.3e} not above the real axis"
        )));
    }
    Ok(StandardRoot {
        v: v_clean,
        c,
        d,
        s,
        residual,
    })
}
