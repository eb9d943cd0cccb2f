//! Independent verification route: the angular ODE
//! `b₂v″ + (λ-1)b₁v′ + (λ(λ-1)b₀ + λb₂)v = 0` is integrated directly by an
//! embedded Runge–Kutta scheme and pencil eigenvalues appear as zeros of a
//! `2ℓ×2ℓ` boundary determinant. No standard roots or matrix powers are used
//! anywhere on this path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core_types::complexify;
use crate::exponent_solver::{count_roots, find_roots_det, ExponentRoot, SearchRegion};
use crate::{BoundaryCondition, CMatrix, EllipticTuple, PencilError, RMatrix, Result};

/// Local relative tolerance of the embedded Runge–Kutta integrator.
pub const ODE_TOL: f64 = 1e-10;
/// `|det|` below this multiple of the determinant scale counts as an oracle
/// zero.
pub const ORACLE_ZERO_TOL: f64 = 1e-7;
/// Maximum distance between matched oracle and algebraic roots.
pub const ORACLE_MATCH_TOL: f64 = 1e-6;

/// Trigonometric coefficient matrices of the angular operator.
#[derive(Debug, Clone)]
pub struct PencilCoefficients {
    a11: RMatrix,
    a12: RMatrix,
    a22: RMatrix,
}

impl PencilCoefficients {
    pub fn new(t: &EllipticTuple) -> Self {
        Self {
            a11: t.a11().clone(),
            a12: t.a12().clone(),
            a22: t.a22().clone(),
        }
    }

    /// `b₀ = A11 cos² + A22 sin² + 2 A12 sin cos`.
    pub fn b0(&self, phi: f64) -> RMatrix {
        let (s, c) = phi.sin_cos();
        &self.a11 * (c * c) + &self.a22 * (s * s) + &self.a12 * (2.0 * s * c)
    }

    /// `b₁ = 2(A22 - A11) sin cos + 2 A12 (cos² - sin²)`.
    pub fn b1(&self, phi: f64) -> RMatrix {
        let (s, c) = phi.sin_cos();
        (&self.a22 - &self.a11) * (2.0 * s * c) + &self.a12 * (2.0 * (c * c - s * s))
    }

    /// `b₂ = A11 sin² + A22 cos² - 2 A12 sin cos`.
    pub fn b2(&self, phi: f64) -> RMatrix {
        let (s, c) = phi.sin_cos();
        &self.a11 * (s * s) + &self.a22 * (c * c) - &self.a12 * (2.0 * s * c)
    }
}

/// Right-hand side `φ ↦ M(φ, λ)` of the first-order system for the state
/// `y = (v, v′)`.
pub fn first_order_system<'a>(
    pc: &'a PencilCoefficients,
    lambda: Complex64,
) -> impl Fn(f64) -> CMatrix + 'a {
    let ell = pc.a11.nrows();
    move |phi: f64| {
        let b2inv = pc
            .b2(phi)
            .try_inverse()
            .expect("b2 is positive definite for valid tuples");
        let b0 = complexify(&pc.b0(phi));
        let b1 = complexify(&pc.b1(phi));
        let b2 = complexify(&pc.b2(phi));
        let b2inv = complexify(&b2inv);
        let low_left = -&b2inv * (b0 * (lambda * (lambda - 1.0)) + b2 * lambda);
        let low_right = -&b2inv * (b1 * (lambda - 1.0));
        let mut m = CMatrix::zeros(2 * ell, 2 * ell);
        m.view_mut((0, ell), (ell, ell))
            .copy_from(&CMatrix::identity(ell, ell));
        m.view_mut((ell, 0), (ell, ell)).copy_from(&low_left);
        m.view_mut((ell, ell), (ell, ell)).copy_from(&low_right);
        m
    }
}

/// State-transition matrix of the angular system from `φ = 0` to `φ = α`.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    pub y: CMatrix,
    pub alpha: f64,
    pub lambda: Complex64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `Y′ = M(φ, λ) Y`, `Y(0) = I`, up to `φ = α` with adaptive step
/// control at local tolerance [`ODE_TOL`].
pub fn fundamental_matrix(
    pc: &PencilCoefficients,
    lambda: Complex64,
    alpha: f64,
) -> Result<FundamentalMatrix> {
    if !(alpha > 0.0 && alpha <= 2.0 * std::f64::consts::PI + 1e-9) {
        return Err(PencilError::InvalidInput("alpha outside (0, 2*pi]".into()));
    }
    let rhs = first_order_system(pc, lambda);
    let n = 2 * pc.a11.nrows();
    let mut y = CMatrix::identity(n, n);
    let mut phi = 0.0_f64;
    // conservative initial step, refined immediately by the controller
    let mut h = (alpha / 64.0).min(0.05 / (1.0 + lambda.norm()));
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut k: Vec<CMatrix> = Vec::with_capacity(7);
    while phi < alpha {
        if h < 1e-14 * alpha {
            return Err(PencilError::StepUnderflow(phi));
        }
        if phi + h > alpha {
            h = alpha - phi;
        }
        k.clear();
        k.push(rhs(phi) * &y);
        for stage in 0..6 {
            let mut ys = y.clone();
            for (j, &aij) in DP_A[stage].iter().enumerate() {
                if aij != 0.0 {
                    ys += &k[j] * Complex64::new(aij * h, 0.0);
                }
            }
            k.push(rhs(phi + DP_C[stage] * h) * ys);
        }
        let mut y5 = y.clone();
        let mut err = CMatrix::zeros(n, n);
        for j in 0..7 {
            if DP_B5[j] != 0.0 {
                y5 += &k[j] * Complex64::new(DP_B5[j] * h, 0.0);
            }
            let diff = DP_B5[j] - DP_B4[j];
            if diff != 0.0 {
                err += &k[j] * Complex64::new(diff * h, 0.0);
            }
        }
        let scale = ODE_TOL * y.norm().max(1.0);
        let err_norm = err.norm();
        if err_norm <= scale {
            phi += h;
            y = y5;
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if err_norm > 0.0 {
            0.9 * (scale / err_norm).powf(0.2)
        } else {
            5.0
        };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(FundamentalMatrix {
        y,
        alpha,
        lambda,
        steps_accepted: accepted,
        steps_rejected: rejected,
    })
}

/// Boundary rows applied to the state `(v, v′)` at angle `phi`: Dirichlet
/// picks `v`, Neumann applies `𝓝 = b₂ ∂_φ + (λ/2) b₁`.
fn boundary_rows(
    pc: &PencilCoefficients,
    lambda: Complex64,
    phi: f64,
    neumann: bool,
) -> CMatrix {
    let ell = pc.a11.nrows();
    let mut rows = CMatrix::zeros(ell, 2 * ell);
    if neumann {
        let b1 = complexify(&pc.b1(phi)) * (lambda * 0.5);
        let b2 = complexify(&pc.b2(phi));
        rows.view_mut((0, 0), (ell, ell)).copy_from(&b1);
        rows.view_mut((0, ell), (ell, ell)).copy_from(&b2);
    } else {
        rows.view_mut((0, 0), (ell, ell))
            .copy_from(&CMatrix::identity(ell, ell));
    }
    rows
}

/// The `2ℓ×2ℓ` matrix whose determinant vanishes exactly at pencil
/// eigenvalues: boundary rows at `φ = 0` on the identity basis, boundary rows
/// at `φ = α` composed with the fundamental matrix.
pub fn boundary_matrix(
    pc: &PencilCoefficients,
    fm: &FundamentalMatrix,
    bc: BoundaryCondition,
) -> CMatrix {
    let ell = pc.a11.nrows();
    let (neu0, neu1) = match bc {
        BoundaryCondition::Dirichlet => (false, false),
        BoundaryCondition::Mixed => (true, false),
        BoundaryCondition::Neumann => (true, true),
    };
    let rows0 = boundary_rows(pc, fm.lambda, 0.0, neu0);
    let rows1 = boundary_rows(pc, fm.lambda, fm.alpha, neu1) * &fm.y;
    let mut b = CMatrix::zeros(2 * ell, 2 * ell);
    b.view_mut((0, 0), (ell, 2 * ell)).copy_from(&rows0);
    b.view_mut((ell, 0), (ell, 2 * ell)).copy_from(&rows1);
    b
}

/// Boundary determinant; zero iff `λ` is a pencil eigenvalue.
pub fn boundary_determinant(
    pc: &PencilCoefficients,
    fm: &FundamentalMatrix,
    bc: BoundaryCondition,
) -> Complex64 {
    boundary_matrix(pc, fm, bc).determinant()
}

/// Stabilized `(log|det|, arg det)` of the boundary determinant at `λ`.
pub fn boundary_log_det(
    pc: &PencilCoefficients,
    bc: BoundaryCondition,
    alpha: f64,
    lambda: Complex64,
) -> Result<(f64, f64)> {
    let fm = fundamental_matrix(pc, lambda, alpha)?;
    Ok(crate::matfun::log_det(&boundary_matrix(pc, &fm, bc)))
}

/// One matched (algebraic, oracle) root pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootMatch {
    pub algebraic: Complex64,
    pub oracle: Complex64,
    pub distance: f64,
    pub multiplicity: usize,
}

/// Agreement report between the algebraic solver and the ODE oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub bc: BoundaryCondition,
    pub alpha: f64,
    pub matches: Vec<RootMatch>,
    /// Oracle root count on the scanned region, with multiplicity.
    pub oracle_count: Option<usize>,
    /// Algebraic multiplicity total of the input roots.
    pub algebraic_count: usize,
    pub ok: bool,
}

/// Verifies that every algebraic root is also an oracle root (after local
/// refinement) within [`ORACLE_MATCH_TOL`], and — when a region is given —
/// that the oracle's argument-principle count over the region equals the
/// algebraic multiplicity total, so no root was missed.
pub fn cross_check(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    roots: &[ExponentRoot],
    region: Option<&SearchRegion>,
) -> Result<CrossCheckReport> {
    let pc = PencilCoefficients::new(t);
    let det = |lambda: Complex64| boundary_log_det(&pc, bc, alpha, lambda);
    let mut matches = Vec::with_capacity(roots.len());
    let mut ok = true;
    for r in roots {
        // isolate the oracle root in a small box around the algebraic one
        let half = 1e-2_f64.max(4.0 * ORACLE_MATCH_TOL);
        let local = SearchRegion::new(
            r.lambda.re - half,
            r.lambda.re + half,
            r.lambda.im - half,
            r.lambda.im + half,
        )?;
        let found = find_roots_det(&det, &local)?;
        let nearest = found
            .iter()
            .min_by(|a, b| {
                (a.0 - r.lambda)
                    .norm()
                    .partial_cmp(&(b.0 - r.lambda).norm())
                    .unwrap()
            })
            .copied();
        match nearest {
            Some((oracle_lam, mult, _)) => {
                let dist = (oracle_lam - r.lambda).norm();
                // refined oracle det must be an actual zero relative to the
                // local determinant scale
                let (log_at, _) = det(oracle_lam + Complex64::new(half, half))?;
                let (log_root, _) = det(oracle_lam)?;
                let zero_ok = log_root < log_at + ORACLE_ZERO_TOL.ln();
                let this_ok = dist <= ORACLE_MATCH_TOL && mult == r.multiplicity && zero_ok;
                ok &= this_ok;
                matches.push(RootMatch {
                    algebraic: r.lambda,
                    oracle: oracle_lam,
                    distance: dist,
                    multiplicity: mult,
                });
            }
            None => {
                ok = false;
                matches.push(RootMatch {
                    algebraic: r.lambda,
                    oracle: Complex64::new(f64::NAN, f64::NAN),
                    distance: f64::INFINITY,
                    multiplicity: 0,
                });
            }
        }
    }
    let algebraic_count: usize = roots.iter().map(|r| r.multiplicity).sum();
    let oracle_count = match region {
        Some(reg) => {
            let n = count_roots(&det, reg)?;
            ok &= n == algebraic_count;
            Some(n)
        }
        None => None,
    };
    if !ok {
        let offenders: Vec<String> = matches
            .iter()
            .filter(|m| m.distance > ORACLE_MATCH_TOL)
            .map(|m| format!("{}", m.algebraic))
            .collect();
        return Err(PencilError::Mismatch(format!(
            "oracle disagreement (offending λ: [{}]; oracle count {:?} vs algebraic {})",
            offenders.join(", "),
            oracle_count,
            algebraic_count
        )));
    }
    Ok(CrossCheckReport {
        bc,
        alpha,
        matches,
        oracle_count,
        algebraic_count,
        ok,
    })
}
