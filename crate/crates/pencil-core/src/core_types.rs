//! Problem data: elliptic coefficient tuples, opening angles, and
//! boundary-condition selectors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, PencilError, RMatrix, Result};

/// Relative symmetry tolerance for coefficient matrices.
pub const SYM_TOL: f64 = 1e-12;
/// Absolute tolerance for snapping an angle onto pi or 2*pi, where the
/// boundary-condition matrices have exact closed forms.
pub const ANGLE_SNAP_TOL: f64 = 1e-9;

/// The triple `(A11, A12, A22)` of real symmetric matrices defining the
/// operator `L_A = A11 dxx + 2 A12 dxy + A22 dyy`, with `A11, A22 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticTuple {
    ell: usize,
    a11: RMatrix,
    a12: RMatrix,
    a22: RMatrix,
}

/// Monic reduction of a tuple together with the conjugator `A22^{1/2}` that
/// pulls solutions back: `v = A22^{-1/2} v_monic`.
#[derive(Debug, Clone)]
pub struct MonicReduction {
    pub tuple: EllipticTuple,
    pub conjugator: RMatrix,
}

impl EllipticTuple {
    /// Validates and builds a tuple. Matrices asymmetric beyond [`SYM_TOL`]
    /// are rejected; within tolerance they are symmetrized.
    pub fn new(a11: RMatrix, a12: RMatrix, a22: RMatrix) -> Result<Self> {
        let ell = a11.nrows();
        for (name, m) in [("A11", &a11), ("A12", &a12), ("A22", &a22)] {
            if m.nrows() != m.ncols() || m.nrows() != ell {
                return Err(PencilError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {ell}x{ell}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if ell == 0 {
            return Err(PencilError::DimensionMismatch("empty matrices".into()));
        }
        let a11 = symmetrize_checked(&a11, "A11")?;
        let a12 = symmetrize_checked(&a12, "A12")?;
        let a22 = symmetrize_checked(&a22, "A22")?;
        check_positive_definite(&a11, "A11")?;
        check_positive_definite(&a22, "A22")?;
        Ok(Self { ell, a11, a12, a22 })
    }

    /// Builds the monic tuple whose standard root is `V = (S + iI)D`,
    /// i.e. `A11 = V*V`, `A12 = -(V + V*)/2`, `A22 = I`.
    pub fn from_standard_root(s: &RMatrix, d: &RMatrix) -> Result<Self> {
        let ell = s.nrows();
        if d.nrows() != ell || d.ncols() != ell || s.ncols() != ell {
            return Err(PencilError::DimensionMismatch(
                "S and D must be square of equal size".into(),
            ));
        }
        let s = symmetrize_checked(s, "S")?;
        let d = symmetrize_checked(d, "D")?;
        check_positive_definite(&d, "D")?;
        let v = (complexify(&s) + CMatrix::identity(ell, ell) * Complex64::i()) * complexify(&d);
        let a11 = (v.adjoint() * &v).map(|z| z.re);
        let a12 = (&v + v.adjoint()).map(|z| -0.5 * z.re);
        Self::new(a11, a12, RMatrix::identity(ell, ell))
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn a11(&self) -> &RMatrix {
        &self.a11
    }
    pub fn a12(&self) -> &RMatrix {
        &self.a12
    }
    pub fn a22(&self) -> &RMatrix {
        &self.a22
    }

    /// Whether `A22 = I` to working precision.
    pub fn is_monic(&self) -> bool {
        let id = RMatrix::identity(self.ell, self.ell);
        (&self.a22 - id).norm() <= 1e-12 * self.ell as f64
    }

    /// Conjugation by `A22^{-1/2}` bringing the tuple to `A22 = I` without
    /// changing exponents. Idempotent on monic tuples.
    pub fn monic_reduction(&self) -> Result<MonicReduction> {
        let (root, inv_root) = symmetric_sqrt_pair(&self.a22, "A22")?;
        let a11 = &inv_root * &self.a11 * &inv_root;
        let a12 = &inv_root * &self.a12 * &inv_root;
        let tuple = EllipticTuple::new(a11, a12, RMatrix::identity(self.ell, self.ell))?;
        Ok(MonicReduction {
            tuple,
            conjugator: root,
        })
    }

    /// `L_A(xi) = A11 xi1^2 + 2 A12 xi1 xi2 + A22 xi2^2`.
    pub fn symbol(&self, xi1: f64, xi2: f64) -> RMatrix {
        &self.a11 * (xi1 * xi1) + &self.a12 * (2.0 * xi1 * xi2) + &self.a22 * (xi2 * xi2)
    }
}

fn symmetrize_checked(m: &RMatrix, name: &str) -> Result<RMatrix> {
    let asym = (m - m.transpose()).norm();
    let scale = m.norm().max(1e-300);
    if asym > SYM_TOL * scale && asym > SYM_TOL {
        return Err(PencilError::NotSymmetric(name.into()));
    }
    Ok((m + m.transpose()).scale(0.5))
}

/// Positive definiteness via an LDL^T sweep with pivot threshold
/// `1e-13 * ||M||`; avoids any eigensolver dependence in validation.
pub fn check_positive_definite(m: &RMatrix, name: &str) -> Result<()> {
    let n = m.nrows();
    let threshold = 1e-13 * m.norm();
    let mut a = m.clone();
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot <= threshold {
            return Err(PencilError::NotPositiveDefinite(name.into()));
        }
        for i in (k + 1)..n {
            let f = a[(i, k)] / pivot;
            for j in k..n {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
        }
    }
    Ok(())
}

/// `(M^{1/2}, M^{-1/2})` of a real symmetric positive-definite matrix via
/// spectral decomposition.
pub fn symmetric_sqrt_pair(m: &RMatrix, name: &str) -> Result<(RMatrix, RMatrix)> {
    let sym = (m + m.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(PencilError::NotPositiveDefinite(name.into()));
    }
    let q = &eig.eigenvectors;
    let sqrt_diag = RMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt_diag = RMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let root = q * sqrt_diag * q.transpose();
    let inv_root = q * inv_sqrt_diag * q.transpose();
    // symmetrize away factorization noise
    Ok((
        (&root + root.transpose()).scale(0.5),
        (&inv_root + inv_root.transpose()).scale(0.5),
    ))
}

pub(crate) fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Boundary-condition selector: `(d+, d-) in {(0,0), (0,1), (1,1)}`.
/// Mixed means Neumann on the ray `φ = 0` and Dirichlet on `φ = α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Mixed,
    Neumann,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
            BoundaryCondition::Mixed => write!(f, "mixed"),
            BoundaryCondition::Neumann => write!(f, "neumann"),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = PencilError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "mixed" => Ok(BoundaryCondition::Mixed),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(PencilError::InvalidInput(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}

/// Angle regime; `Pi` and `TwoPi` dispatch to exact closed-form
/// boundary-condition matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleRegime {
    SubPi,
    Pi,
    SuperPi,
    TwoPi,
}

/// An opening angle in `(0, 2π]` with its derived regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleConfig {
    pub alpha: f64,
    pub regime: AngleRegime,
}

impl AngleConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 * PI + ANGLE_SNAP_TOL {
            return Err(PencilError::InvalidInput(format!(
                "alpha = {alpha} outside (0, 2*pi]"
            )));
        }
        let regime = if (alpha - PI).abs() <= ANGLE_SNAP_TOL {
            AngleRegime::Pi
        } else if (alpha - 2.0 * PI).abs() <= ANGLE_SNAP_TOL {
            AngleRegime::TwoPi
        } else if alpha < PI {
            AngleRegime::SubPi
        } else {
            AngleRegime::SuperPi
        };
        Ok(Self { alpha, regime })
    }
}

/// JSON schema for tuple files: either explicit coefficient matrices or a
/// standard-root pair `(S, D)`. Matrices are row-major arrays of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TupleInput {
    Matrices {
        ell: usize,
        #[serde(rename = "A11")]
        a11: Vec<Vec<f64>>,
        #[serde(rename = "A12")]
        a12: Vec<Vec<f64>>,
        #[serde(rename = "A22")]
        a22: Vec<Vec<f64>>,
    },
    StandardRoot {
        standard_root: StandardRootInput,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardRootInput {
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> Result<RMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PencilError::DimensionMismatch(format!(
            "{name} must be a non-empty square array of rows"
        )));
    }
    Ok(RMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl TupleInput {
    pub fn to_tuple(&self) -> Result<EllipticTuple> {
        match self {
            TupleInput::Matrices { ell, a11, a12, a22 } => {
                let a11 = matrix_from_rows(a11, "A11")?;
                let a12 = matrix_from_rows(a12, "A12")?;
                let a22 = matrix_from_rows(a22, "A22")?;
                if a11.nrows() != *ell {
                    return Err(PencilError::DimensionMismatch(format!(
                        "ell = {ell} does not match matrix size {}",
                        a11.nrows()
                    )));
                }
                EllipticTuple::new(a11, a12, a22)
            }
            TupleInput::StandardRoot { standard_root } => {
                let s = matrix_from_rows(&standard_root.s, "S")?;
                let d = matrix_from_rows(&standard_root.d, "D")?;
                EllipticTuple::from_standard_root(&s, &d)
            }
        }
    }
}

/// The Laplacian tuple `(I, 0, I)`.
pub fn laplacian_tuple(ell: usize) -> EllipticTuple {
    EllipticTuple::new(
        RMatrix::identity(ell, ell),
        RMatrix::zeros(ell, ell),
        RMatrix::identity(ell, ell),
    )
    .expect("laplacian tuple is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn figure1_tuple() -> EllipticTuple {
        EllipticTuple::new(
            RMatrix::from_row_slice(2, 2, &[5.0, 0.6, 0.6, 1.5]),
            RMatrix::from_row_slice(2, 2, &[0.25, -0.4, -0.4, -0.2]),
            RMatrix::identity(2, 2),
        )
        .unwrap()
    }

    #[test]
    fn laplacian_accepted() {
        let t = laplacian_tuple(2);
        assert!(t.is_monic());
    }

    #[test]
    fn figure1_accepted() {
        let t = figure1_tuple();
        assert_eq!(t.ell(), 2);
        assert!(t.is_monic());
    }

    #[test]
    fn indefinite_a11_rejected() {
        let err = EllipticTuple::new(
            RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            RMatrix::zeros(2, 2),
            RMatrix::identity(2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, PencilError::NotPositiveDefinite(ref m) if m == "A11"));
    }

    #[test]
    fn asymmetric_rejected() {
        let err = EllipticTuple::new(
            RMatrix::identity(2, 2),
            RMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            RMatrix::identity(2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, PencilError::NotSymmetric(_)));
    }

    #[test]
    fn monic_reduction_of_monic_is_identity() {
        let t = figure1_tuple();
        let red = t.monic_reduction().unwrap();
        assert!((red.tuple.a11() - t.a11()).norm() < 1e-12);
        assert!((red.tuple.a12() - t.a12()).norm() < 1e-12);
    }

    #[test]
    fn monic_reduction_scales_isotropic_a22() {
        // (I, 0, 4I) -> (I/4, 0, I)
        let t = EllipticTuple::new(
            RMatrix::identity(2, 2),
            RMatrix::zeros(2, 2),
            RMatrix::identity(2, 2).scale(4.0),
        )
        .unwrap();
        let red = t.monic_reduction().unwrap();
        assert!((red.tuple.a11() - RMatrix::identity(2, 2).scale(0.25)).norm() < 1e-12);
        assert!((&red.conjugator - RMatrix::identity(2, 2).scale(2.0)).norm() < 1e-12);
        // idempotence
        let again = red.tuple.monic_reduction().unwrap();
        assert!((again.tuple.a11() - red.tuple.a11()).norm() < 1e-14);
    }

    #[test]
    fn scalar_standard_root_tuple() {
        // V = -10 + i  =>  A11 = 101, A12 = 10, A22 = 1
        let s = RMatrix::from_row_slice(1, 1, &[-10.0]);
        let d = RMatrix::from_row_slice(1, 1, &[1.0]);
        let t = EllipticTuple::from_standard_root(&s, &d).unwrap();
        assert!((t.a11()[(0, 0)] - 101.0).abs() < 1e-12);
        assert!((t.a12()[(0, 0)] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_from_root() {
        // S = 0, D = I -> V = iI -> Laplacian tuple
        let t = EllipticTuple::from_standard_root(&RMatrix::zeros(2, 2), &RMatrix::identity(2, 2))
            .unwrap();
        assert!((t.a11() - RMatrix::identity(2, 2)).norm() < 1e-14);
        assert!(t.a12().norm() < 1e-14);
    }

    #[test]
    fn angle_regimes() {
        assert_eq!(AngleConfig::new(1.0).unwrap().regime, AngleRegime::SubPi);
        assert_eq!(AngleConfig::new(PI).unwrap().regime, AngleRegime::Pi);
        assert_eq!(
            AngleConfig::new(PI + 1e-12).unwrap().regime,
            AngleRegime::Pi
        );
        assert_eq!(AngleConfig::new(5.0).unwrap().regime, AngleRegime::SuperPi);
        assert_eq!(
            AngleConfig::new(2.0 * PI).unwrap().regime,
            AngleRegime::TwoPi
        );
        assert!(AngleConfig::new(0.0).is_err());
        assert!(AngleConfig::new(7.0).is_err());
    }

    #[test]
    fn json_schema_both_forms() {
        let t: TupleInput = serde_json::from_str(
            r#"{"ell":2,"A11":[[5,0.6],[0.6,1.5]],"A12":[[0.25,-0.4],[-0.4,-0.2]],"A22":[[1,0],[0,1]]}"#,
        )
        .unwrap();
        let t = t.to_tuple().unwrap();
        assert_eq!(t.ell(), 2);
        let r: TupleInput =
            serde_json::from_str(r#"{"standard_root":{"S":[[0,0],[0,2]],"D":[[2,1],[1,2]]}}"#)
                .unwrap();
        let r = r.to_tuple().unwrap();
        assert!(r.is_monic());
    }
}
