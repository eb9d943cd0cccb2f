//! Classification of elliptic tuples along the ladder
//! strongly elliptic ⊃ Neumann well-posed ⊃ contractive Neumann well-posed ⊃
//! formally positive, with signed margins for every verdict.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::core_types::complexify;
use crate::matfun::{self, smallest_singular_value};
use crate::standard_root::{compute_standard_root, StandardRoot, REAL_AXIS_TOL};
use crate::{EllipticTuple, PencilError, RMatrix, Result};

/// Distance tolerance for the Neumann well-posedness spectral test.
pub const NWP_TOL: f64 = 1e-9;
/// Grid resolution for the Legendre–Hadamard constant search.
pub const KAPPA_GRID: usize = 720;

/// Margins carried alongside each boolean verdict: signed distance to the
/// decision boundary (positive = inside the class).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Margins {
    /// `min |Im β|` over companion eigenvalues of the monic reduction.
    pub strongly_elliptic: f64,
    /// `dist(2i, σ([D⁻¹, C]))`; absent when not strongly elliptic.
    pub neumann_wellposed: Option<f64>,
    /// `2 − ρ([D⁻¹, C])`; absent when not strongly elliptic.
    pub contractive_nwp: Option<f64>,
    /// `λ_min` of the block matrix `[[A11, A12], [A12, A22]]`.
    pub formally_positive: f64,
}

/// Full classification of a tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub strongly_elliptic: bool,
    pub neumann_wellposed: Option<bool>,
    pub contractive_nwp: Option<bool>,
    pub formally_positive: bool,
    /// `ρ([D⁻¹, C])` of the monic reduction's standard root.
    pub commutator_radius: Option<f64>,
    /// Legendre–Hadamard constant `κ = min_θ λ_min(L_A(cos θ, sin θ))`.
    pub kappa: f64,
    pub margins: Margins,
}

/// `[D⁻¹, C] = D⁻¹C − CD⁻¹` of a standard root.
pub fn commutator(root: &StandardRoot) -> Result<RMatrix> {
    let dinv = root
        .d
        .clone()
        .try_inverse()
        .ok_or(PencilError::SingularMatrix)?;
    Ok(&dinv * &root.c - &root.c * &dinv)
}

fn monic_root(t: &EllipticTuple) -> Result<StandardRoot> {
    compute_standard_root(&t.monic_reduction()?.tuple)
}

/// Strong ellipticity with margin `min |Im β|` over companion eigenvalues.
pub fn is_strongly_elliptic(t: &EllipticTuple) -> Result<(bool, f64)> {
    let monic = t.monic_reduction()?.tuple;
    let comp = crate::standard_root::companion_linearization(&monic)?;
    let eigs = matfun::spectrum(&comp)?;
    let margin = eigs.iter().map(|b| b.im.abs()).fold(f64::INFINITY, f64::min);
    Ok((margin > REAL_AXIS_TOL, margin))
}

/// Neumann well-posedness: `2i ∉ σ([D⁻¹, C])`, margin = distance of `2i` to
/// that spectrum. Cross-asserted against invertibility of `A12 + V` on the
/// monic reduction.
pub fn neumann_wellposed(t: &EllipticTuple) -> Result<(bool, f64)> {
    let (se, _) = is_strongly_elliptic(t)?;
    if !se {
        return Err(PencilError::NotElliptic(
            "Neumann well-posedness needs strong ellipticity".into(),
        ));
    }
    let monic = t.monic_reduction()?.tuple;
    let root = compute_standard_root(&monic)?;
    let k = commutator(&root)?;
    let eigs = matfun::spectrum(&complexify(&k))?;
    let target = Complex64::new(0.0, 2.0);
    let dist = eigs
        .iter()
        .map(|z| (z - target).norm())
        .fold(f64::INFINITY, f64::min);
    let ok = dist > NWP_TOL;
    // equivalent test: A12 + V invertible
    let m = complexify(monic.a12()) + &root.v;
    let smin = smallest_singular_value(&m);
    let scale = m.norm().max(1.0);
    if (ok && smin < 1e-13 * scale) || (!ok && smin > 1e-4 * scale) {
        return Err(PencilError::InvariantViolation(format!(
            "spectral NWP test (dist {dist:.3e}) disagrees with invertibility of A12+V (smin {smin:.3e})"
        )));
    }
    Ok((ok, dist))
}

/// Contractive Neumann well-posedness: `ρ([D⁻¹, C]) < 2`, margin `2 − ρ`.
pub fn contractive_nwp(t: &EllipticTuple) -> Result<(bool, f64)> {
    let root = monic_root(t)?;
    let k = commutator(&root)?;
    let rho = matfun::spectral_radius(&complexify(&k))?;
    Ok((rho < 2.0, 2.0 - rho))
}

/// Formal positivity: the block matrix `[[A11, A12], [A12, A22]]` is positive
/// definite; margin = its smallest eigenvalue.
pub fn formally_positive(t: &EllipticTuple) -> Result<(bool, f64)> {
    let ell = t.ell();
    let mut m = RMatrix::zeros(2 * ell, 2 * ell);
    m.view_mut((0, 0), (ell, ell)).copy_from(t.a11());
    m.view_mut((0, ell), (ell, ell)).copy_from(t.a12());
    m.view_mut((ell, 0), (ell, ell)).copy_from(t.a12());
    m.view_mut((ell, ell), (ell, ell)).copy_from(t.a22());
    let lmin = m.symmetric_eigen().eigenvalues.min();
    Ok((lmin > 0.0, lmin))
}

/// Legendre–Hadamard constant `κ = min_{|ξ|=1} λ_min(L_A(ξ))`, found on a
/// dense θ-grid over `[0, π)` with golden-section refinement.
pub fn ellipticity_constant(t: &EllipticTuple) -> Result<f64> {
    let f = |theta: f64| -> f64 {
        let sym = t.symbol(theta.cos(), theta.sin());
        sym.symmetric_eigen().eigenvalues.min()
    };
    let n = KAPPA_GRID;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..n {
        let v = f(PI * k as f64 / n as f64);
        if v < best.1 {
            best = (k, v);
        }
    }
    let h = PI / n as f64;
    let center = best.0 as f64 * h;
    let (mut a, mut b) = (center - h, center + h);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    let kappa = fc.min(fd).min(best.1);
    let scale = t.a11().norm().max(t.a22().norm()).max(1.0);
    if kappa < -1e-12 * scale {
        return Err(PencilError::NotElliptic(format!(
            "Legendre–Hadamard constant {kappa:.3e} is negative"
        )));
    }
    Ok(kappa.max(0.0))
}

/// Runs the full ladder and asserts the implication chain
/// formally positive ⟹ contractive ⟹ Neumann well-posed.
pub fn classify(t: &EllipticTuple) -> Result<EllipticityReport> {
    let (se, se_margin) = is_strongly_elliptic(t)?;
    let (fp, fp_margin) = formally_positive(t)?;
    let kappa = ellipticity_constant(t)?;
    if !se {
        return Ok(EllipticityReport {
            strongly_elliptic: false,
            neumann_wellposed: None,
            contractive_nwp: None,
            formally_positive: fp,
            commutator_radius: None,
            kappa,
            margins: Margins {
                strongly_elliptic: se_margin,
                neumann_wellposed: None,
                contractive_nwp: None,
                formally_positive: fp_margin,
            },
        });
    }
    let (nwp, nwp_margin) = neumann_wellposed(t)?;
    let (cn, cn_margin) = contractive_nwp(t)?;
    let radius = 2.0 - cn_margin;
    if fp && !cn {
        return Err(PencilError::ImplicationViolation(
            "formally positive but not contractive".into(),
        ));
    }
    if cn && !nwp {
        return Err(PencilError::ImplicationViolation(
            "contractive but not Neumann well-posed".into(),
        ));
    }
    Ok(EllipticityReport {
        strongly_elliptic: true,
        neumann_wellposed: Some(nwp),
        contractive_nwp: Some(cn),
        formally_positive: fp,
        commutator_radius: Some(radius),
        kappa,
        margins: Margins {
            strongly_elliptic: se_margin,
            neumann_wellposed: Some(nwp_margin),
            contractive_nwp: Some(cn_margin),
            formally_positive: fp_margin,
        },
    })
}

/// Point on the three-segment deformation carrying a contractive
/// Neumann-well-posed tuple to the Laplacian while staying in the class:
/// `s ∈ [0, ⅓]` interpolates `A22` to the identity (fixed monic part),
/// `s ∈ [⅓, ⅔]` scales `C` to zero, `s ∈ [⅔, 1]` flows `D` to the identity
/// through its powers.
pub fn deformation_path(t: &EllipticTuple, s: f64) -> Result<EllipticTuple> {
    if !(0.0..=1.0).contains(&s) {
        return Err(PencilError::InvalidInput("path parameter outside [0,1]".into()));
    }
    let ell = t.ell();
    let red = t.monic_reduction()?;
    let root = compute_standard_root(&red.tuple)?;
    if s <= 1.0 / 3.0 {
        let u = 3.0 * s;
        let a22 = t.a22() * (1.0 - u) + RMatrix::identity(ell, ell).scale(u);
        let eig = a22.clone().symmetric_eigen();
        let half = &eig.eigenvectors
            * RMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let a11 = &half * red.tuple.a11() * &half;
        let a12 = &half * red.tuple.a12() * &half;
        EllipticTuple::new(a11, a12, a22)
    } else if s <= 2.0 / 3.0 {
        let u = 3.0 * s - 1.0;
        EllipticTuple::from_standard_root(&(root.s.scale(1.0 - u)), &root.d)
    } else {
        let u = 3.0 * s - 2.0;
        let eig = root.d.clone().symmetric_eigen();
        let dpow = &eig.eigenvectors
            * RMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(1.0 - u)))
            * eig.eigenvectors.transpose();
        let dpow = (&dpow + dpow.transpose()).scale(0.5);
        EllipticTuple::from_standard_root(&RMatrix::zeros(ell, ell), &dpow)
    }
}
