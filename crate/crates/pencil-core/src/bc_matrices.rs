//! Boundary-condition matrices `M_{λ,α}` for the three boundary conditions,
//! assembled from branch powers of `Z_α = cos(α)I + D^{1/2}SD^{1/2} sin(α)
//! + iD sin(α)` with exact closed forms at `α ∈ {π, 2π}` and a square-root
//! substitution `Y_α = -Z_α^{1/2}` for reflex angles.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::core_types::{complexify, symmetric_sqrt_pair, AngleRegime};
use crate::matfun::{
    matrix_power, numerical_range_boundary, Branch, CalcFn, SchurForm,
    EIG_TOL, RANGE_TOL,
};
use crate::standard_root::StandardRoot;
use crate::{
    AngleConfig, BoundaryCondition, CMatrix, CVector, EllipticTuple, PencilError, RMatrix, Result,
};

/// λ with modulus below this is rejected: the power representation of
/// solutions excludes λ = 0, which is handled separately.
pub const LAMBDA_ZERO_TOL: f64 = 1e-8;
/// Neumann well-posedness tolerance reused from the classifier.
pub const NWP_TOL: f64 = crate::ellipticity::NWP_TOL;

/// Immutable per-(root, α, bc) context from which `M_{λ,α}` is evaluated for
/// many λ.
#[derive(Debug, Clone)]
pub struct BCContext {
    pub alpha: AngleConfig,
    pub bc: BoundaryCondition,
    /// `Z_α`, complex symmetric.
    pub z_alpha: CMatrix,
    /// `Y_α = -Z_α^{1/2}` (principal), present only for the SuperPi regime.
    pub y_alpha: Option<CMatrix>,
    /// `½[D^{-1/2} S D^{-1/2}, D]`, skew-symmetric.
    pub comm_half: RMatrix,
    /// `E = comm_half + iI`, present only for Neumann.
    pub e_matrix: Option<CMatrix>,
    e_inv: Option<CMatrix>,
    pub root: StandardRoot,
    /// Schur form of the power base (`Z_α` or `Y_α`) and of its conjugate.
    sf_main: Option<SchurForm>,
    sf_conj: Option<SchurForm>,
}

impl BCContext {
    /// Builds the context, verifying the regime-specific invariants:
    /// `Im Z_α ≻ 0` below π, `Y_α² = Z_α` with `W(Y_α) ⊂ UHP` above π, and
    /// for Neumann the well-posedness condition `2i ∉ σ([D⁻¹, C])`.
    pub fn build(root: &StandardRoot, alpha: AngleConfig, bc: BoundaryCondition) -> Result<Self> {
        let ell = root.d.nrows();
        let (d_half, d_half_inv) = symmetric_sqrt_pair(&root.d, "D")?;
        let (sa, ca) = alpha.alpha.sin_cos();
        let core = &d_half * &root.s * &d_half;
        let z_alpha = CMatrix::from_fn(ell, ell, |i, j| {
            let id = if i == j { ca } else { 0.0 };
            Complex64::new(id + core[(i, j)] * sa, root.d[(i, j)] * sa)
        });
        let zsym = (&z_alpha - z_alpha.transpose()).norm();
        if zsym > 1e-12 * z_alpha.norm().max(1.0) {
            return Err(PencilError::NotSymmetric("Z_alpha".into()));
        }

        let x = &d_half_inv * &root.s * &d_half_inv;
        let comm_half = (&x * &root.d - &root.d * &x).scale(0.5);

        let (e_matrix, e_inv) = if bc == BoundaryCondition::Neumann {
            // well-posedness: 2i not in the commutator spectrum
            let k = crate::ellipticity::commutator(root)?;
            let eigs = crate::matfun::spectrum(&complexify(&k))?;
            let dist = eigs
                .iter()
                .map(|z| (z - Complex64::new(0.0, 2.0)).norm())
                .fold(f64::INFINITY, f64::min);
            if dist <= NWP_TOL {
                return Err(PencilError::NotNeumannWellPosed);
            }
            let e = complexify(&comm_half) + CMatrix::identity(ell, ell) * Complex64::i();
            let einv = e
                .clone()
                .try_inverse()
                .ok_or(PencilError::NotNeumannWellPosed)?;
            (Some(e), Some(einv))
        } else {
            (None, None)
        };

        let (y_alpha, sf_main, sf_conj) = match alpha.regime {
            AngleRegime::SubPi => {
                let im_min = (root.d.clone() * sa).symmetric_eigen().eigenvalues.min();
                if im_min <= 0.0 {
                    return Err(PencilError::RangeViolation(
                        "Im Z_alpha not positive definite below pi".into(),
                    ));
                }
                let sf = SchurForm::new(&z_alpha)?;
                let sfc = SchurForm::new(&z_alpha.conjugate())?;
                (None, Some(sf), Some(sfc))
            }
            AngleRegime::SuperPi => {
                let y = -matrix_power(&z_alpha, Complex64::new(0.5, 0.0), Branch::Principal)?;
                let sq_err = (&y * &y - &z_alpha).norm();
                if sq_err > EIG_TOL * z_alpha.norm().max(1.0) * 10.0 {
                    return Err(PencilError::ResidualTooLarge(sq_err));
                }
                let nr = numerical_range_boundary(&y, 128)?;
                if !nr.in_uhp(RANGE_TOL) {
                    return Err(PencilError::RangeViolation(format!(
                        "W(Y_alpha) dips to Im = {:.3e}",
                        nr.min_im()
                    )));
                }
                let sf = SchurForm::new(&y)?;
                let sfc = SchurForm::new(&y.conjugate())?;
                (Some(y), Some(sf), Some(sfc))
            }
            AngleRegime::Pi | AngleRegime::TwoPi => (None, None, None),
        };

        Ok(Self {
            alpha,
            bc,
            z_alpha,
            y_alpha,
            comm_half,
            e_matrix,
            e_inv,
            root: root.clone(),
            sf_main,
            sf_conj,
        })
    }

    fn ell(&self) -> usize {
        self.root.d.nrows()
    }

    fn check_lambda(&self, lambda: Complex64) -> Result<()> {
        if lambda.norm() < LAMBDA_ZERO_TOL {
            return Err(PencilError::ZeroLambda);
        }
        Ok(())
    }

    /// The branch-power pair `(Z_α^{λ_+}, conj(Z_α)^{λ_-})` in whichever form
    /// the regime prescribes.
    fn powers(&self, lambda: Complex64) -> Result<(CMatrix, CMatrix)> {
        let ell = self.ell();
        let id = CMatrix::identity(ell, ell);
        match self.alpha.regime {
            AngleRegime::SubPi => {
                // spectra lie strictly in the half-planes, so λ± coincide
                // with the principal branch
                let sf = self.sf_main.as_ref().expect("SubPi context has Schur form");
                let sfc = self.sf_conj.as_ref().expect("SubPi context has Schur form");
                let p1 = sf.apply(CalcFn::Power {
                    lambda,
                    branch: Branch::Principal,
                })?;
                let p2 = sfc.apply(CalcFn::Power {
                    lambda,
                    branch: Branch::Principal,
                })?;
                Ok((p1, p2))
            }
            AngleRegime::SuperPi => {
                // Z^{λ_+} = Y^{2λ}, conj(Z)^{λ_-} = conj(Y)^{2λ}, principal
                let two_lambda = lambda * 2.0;
                let sf = self.sf_main.as_ref().expect("SuperPi context has Schur form");
                let sfc = self.sf_conj.as_ref().expect("SuperPi context has Schur form");
                let p1 = sf.apply(CalcFn::Power {
                    lambda: two_lambda,
                    branch: Branch::Principal,
                })?;
                let p2 = sfc.apply(CalcFn::Power {
                    lambda: two_lambda,
                    branch: Branch::Principal,
                })?;
                Ok((p1, p2))
            }
            AngleRegime::Pi => {
                let w = (Complex64::i() * PI * lambda).exp();
                Ok((&id * w, &id * w.inv()))
            }
            AngleRegime::TwoPi => {
                let w = (Complex64::i() * 2.0 * PI * lambda).exp();
                Ok((&id * w, &id * w.inv()))
            }
        }
    }

    /// `log det` of one branch power, summed over the spectrum in log space:
    /// `λ_eff Σ_j Log μ_j` (the determinant itself over-/underflows f64 for
    /// |Im λ| large).
    fn log_det_power(&self, lambda: Complex64, conj: bool) -> Complex64 {
        let sign = if conj { -1.0 } else { 1.0 };
        let ell = self.ell() as f64;
        match self.alpha.regime {
            AngleRegime::SubPi | AngleRegime::SuperPi => {
                let sf = if conj { &self.sf_conj } else { &self.sf_main };
                let lam_eff = if self.alpha.regime == AngleRegime::SuperPi {
                    lambda * 2.0
                } else {
                    lambda
                };
                sf.as_ref()
                    .expect("regime has Schur form")
                    .eigenvalues()
                    .iter()
                    .map(|mu| mu.ln())
                    .sum::<Complex64>()
                    * lam_eff
            }
            AngleRegime::Pi => Complex64::i() * PI * lambda * ell * sign,
            AngleRegime::TwoPi => Complex64::i() * 2.0 * PI * lambda * ell * sign,
        }
    }

    /// `M_{λ,α} = Z_α^{λ_+} - conj(Z_α)^{λ_-}` (Dirichlet on both rays).
    pub fn m_dirichlet(&self, lambda: Complex64) -> Result<CMatrix> {
        self.check_lambda(lambda)?;
        let (p1, p2) = self.powers(lambda)?;
        Ok(p1 - p2)
    }

    /// `M_{λ,α} = ½[D^{-1/2}SD^{-1/2}, D](Z^{λ_+} - Z̄^{λ_-})
    /// + i(Z^{λ_+} + Z̄^{λ_-})` (Neumann on `φ=0`, Dirichlet on `φ=α`).
    pub fn m_mixed(&self, lambda: Complex64) -> Result<CMatrix> {
        self.check_lambda(lambda)?;
        let (p1, p2) = self.powers(lambda)?;
        let g = complexify(&self.comm_half);
        Ok(&g * (&p1 - &p2) + (&p1 + &p2) * Complex64::i())
    }

    /// `M_{λ,α} = E Z^{λ_+} E⁻¹ - Ē Z̄^{λ_-} Ē⁻¹` (Neumann on both rays); the
    /// `π`/`2π` closed forms collapse to `(e^{iπλ} - e^{-iπλ})I` and its
    /// doubled-angle analogue.
    pub fn m_neumann(&self, lambda: Complex64) -> Result<CMatrix> {
        self.check_lambda(lambda)?;
        let e = self
            .e_matrix
            .as_ref()
            .ok_or(PencilError::NotNeumannWellPosed)?;
        let einv = self.e_inv.as_ref().expect("E inverse cached with E");
        let (p1, p2) = self.powers(lambda)?;
        match self.alpha.regime {
            AngleRegime::Pi | AngleRegime::TwoPi => Ok(p1 - p2),
            _ => Ok(e * p1 * einv - e.conjugate() * p2 * einv.conjugate()),
        }
    }

    /// `M_{λ,α}` for this context's boundary condition.
    pub fn m(&self, lambda: Complex64) -> Result<CMatrix> {
        match self.bc {
            BoundaryCondition::Dirichlet => self.m_dirichlet(lambda),
            BoundaryCondition::Mixed => self.m_mixed(lambda),
            BoundaryCondition::Neumann => self.m_neumann(lambda),
        }
    }
}

/// Stabilized determinant `(log|det M|, arg det M)`; exact singularity is
/// signalled by `log|det| = -∞` (anything below `-700` should be treated as
/// an exact zero by callers).
///
/// When one branch power dominates the other by many orders of magnitude
/// (|Im λ| large), direct LU loses the determinant to cancellation — the
/// absolute rounding error `ε‖M‖²` exceeds `|det M|`. The dominant power is
/// then factored out of `M` and its determinant accumulated in log space
/// over the spectrum, leaving an O(1) cofactor for the LU.
pub fn det_m(ctx: &BCContext, lambda: Complex64, bc: BoundaryCondition) -> Result<(f64, f64)> {
    ctx.check_lambda(lambda)?;
    let (p1, p2) = ctx.powers(lambda)?;
    let (s1, s2) = (p1.norm(), p2.norm());
    const SPLIT: f64 = 1e8;
    if s1 <= SPLIT * s2 && s2 <= SPLIT * s1 {
        let m = match bc {
            BoundaryCondition::Dirichlet => ctx.m_dirichlet(lambda)?,
            BoundaryCondition::Mixed => ctx.m_mixed(lambda)?,
            BoundaryCondition::Neumann => ctx.m_neumann(lambda)?,
        };
        return Ok(crate::matfun::log_det(&m));
    }

    // q1 = p1⁻¹, q2 = p2⁻¹ exactly: powers of the same base commute
    let (q1, q2) = ctx.powers(-lambda)?;
    let ell = ctx.ell();
    let id = CMatrix::identity(ell, ell);
    let conj_dominant = s2 > s1;
    // `det M = det K · det p_big` with K built from the O(‖p_small/p_big‖)
    // combination; right-factoring is exact since p and q commute
    let k = match bc {
        BoundaryCondition::Dirichlet => {
            if conj_dominant {
                &p1 * &q2 - &id
            } else {
                &id - &p2 * &q1
            }
        }
        BoundaryCondition::Mixed => {
            let g = complexify(&ctx.comm_half);
            let c = if conj_dominant { &p1 * &q2 } else { &p2 * &q1 };
            if conj_dominant {
                &g * (&c - &id) + (&c + &id) * Complex64::i()
            } else {
                &g * (&id - &c) + (&id + &c) * Complex64::i()
            }
        }
        BoundaryCondition::Neumann => {
            let e = ctx
                .e_matrix
                .as_ref()
                .ok_or(PencilError::NotNeumannWellPosed)?;
            let einv = ctx.e_inv.as_ref().expect("E inverse cached with E");
            match ctx.alpha.regime {
                AngleRegime::Pi | AngleRegime::TwoPi => {
                    if conj_dominant {
                        &p1 * &q2 - &id
                    } else {
                        &id - &p2 * &q1
                    }
                }
                _ if conj_dominant => {
                    e * &p1 * einv * e.conjugate() * &q2 * einv.conjugate() - &id
                }
                _ => &id - e.conjugate() * &p2 * einv.conjugate() * e * &q1 * einv,
            }
        }
    };
    let (k_abs, k_arg) = crate::matfun::log_det(&k);
    let big = ctx.log_det_power(lambda, conj_dominant);
    let mut arg = (k_arg + big.im).rem_euclid(2.0 * PI);
    if arg > PI {
        arg -= 2.0 * PI;
    }
    Ok((k_abs + big.re, arg))
}

/// Coefficient pair of the power representation
/// `v(φ) = (cos φ I + sin φ V)^{λ_+} c₁ + (cos φ I + sin φ V̄)^{λ_-} c₂`.
#[derive(Debug, Clone)]
pub struct SolutionCoefficients {
    pub c1: CVector,
    pub c2: CVector,
}

impl SolutionCoefficients {
    /// Splits a null vector of the raw 2ℓ×2ℓ boundary matrix into `(c₁, c₂)`.
    pub fn from_raw_nullvector(w: &CVector) -> Result<Self> {
        let n = w.len();
        if n % 2 != 0 {
            return Err(PencilError::DimensionMismatch(
                "raw null vector length must be even".into(),
            ));
        }
        let ell = n / 2;
        let c1 = w.rows(0, ell).into_owned();
        let c2 = w.rows(ell, ell).into_owned();
        if c1.norm().max(c2.norm()) < 1e-300 {
            return Err(PencilError::InvalidInput("zero null vector".into()));
        }
        Ok(Self { c1, c2 })
    }
}

/// Raw (un-conjugated) 2ℓ×2ℓ boundary matrix acting on `(c₁, c₂)` directly in
/// terms of `V_α = cos(α)I + sin(α)V` and the branch functions; valid for
/// `α < 2π`. Its zero set agrees with `det M_{λ,α} = 0` and its null vectors
/// feed the solution representation.
pub fn raw_boundary_matrix(
    t: &EllipticTuple,
    root: &StandardRoot,
    alpha: AngleConfig,
    bc: BoundaryCondition,
    lambda: Complex64,
) -> Result<CMatrix> {
    if alpha.regime == AngleRegime::TwoPi {
        return Err(PencilError::InvalidInput(
            "raw boundary matrix is defined for alpha < 2*pi".into(),
        ));
    }
    if !t.is_monic() {
        return Err(PencilError::NotMonic);
    }
    let ell = t.ell();
    let (sa, ca) = alpha.alpha.sin_cos();
    let id = CMatrix::identity(ell, ell);
    let v_alpha = &id * Complex64::new(ca, 0.0) + &root.v * Complex64::new(sa, 0.0);
    let v_alpha_bar = v_alpha.conjugate();
    let p_plus = matrix_power(&v_alpha, lambda, Branch::Plus)?;
    let p_minus = matrix_power(&v_alpha_bar, lambda, Branch::Minus)?;
    let a12 = complexify(t.a12());
    let n1 = &a12 + &root.v; // conormal factor pairing with c1
    let n2 = &a12 + root.v.conjugate();

    let (row0_1, row0_2) = match bc {
        BoundaryCondition::Dirichlet => (id.clone(), id.clone()),
        BoundaryCondition::Mixed | BoundaryCondition::Neumann => (n1.clone(), n2.clone()),
    };
    let (row1_1, row1_2) = match bc {
        BoundaryCondition::Dirichlet | BoundaryCondition::Mixed => {
            (p_plus.clone(), p_minus.clone())
        }
        BoundaryCondition::Neumann => (&n1 * &p_plus, &n2 * &p_minus),
    };

    let mut m = CMatrix::zeros(2 * ell, 2 * ell);
    m.view_mut((0, 0), (ell, ell)).copy_from(&row0_1);
    m.view_mut((0, ell), (ell, ell)).copy_from(&row0_2);
    m.view_mut((ell, 0), (ell, ell)).copy_from(&row1_1);
    m.view_mut((ell, ell), (ell, ell)).copy_from(&row1_2);
    Ok(m)
}

/// `v(φ)` from the power representation with coefficients `(c₁, c₂)`.
pub fn represent_solution(
    root: &StandardRoot,
    coeffs: &SolutionCoefficients,
    lambda: Complex64,
    phi: f64,
) -> Result<CVector> {
    let ell = root.d.nrows();
    let id = CMatrix::identity(ell, ell);
    let (sp, cp) = phi.sin_cos();
    let v_phi = &id * Complex64::new(cp, 0.0) + &root.v * Complex64::new(sp, 0.0);
    if phi == 0.0 {
        return Ok(&coeffs.c1 + &coeffs.c2);
    }
    let p_plus = matrix_power(&v_phi, lambda, Branch::Plus)?;
    let p_minus = matrix_power(&v_phi.conjugate(), lambda, Branch::Minus)?;
    Ok(p_plus * &coeffs.c1 + p_minus * &coeffs.c2)
}
