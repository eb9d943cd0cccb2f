//! Randomized property laboratory for the numerical-range and accretivity
//! lemmas behind the root-exclusion theorems: complex symmetric matrices with
//! positive-definite imaginary part, imaginary powers, the Möbius-transformed
//! operator `K_t`, and the scalar tangent identity of the mixed-condition
//! lattice argument.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;

use crate::matfun::{matrix_power, numerical_range_boundary, spectrum, Branch, DEFAULT_RANGE_SAMPLES};
use crate::{CMatrix, PencilError, RMatrix, Result};

/// Strict-inequality slack below this multiple of the instance scale is
/// reported as inconclusive rather than as a failure.
pub const INCONCLUSIVE_MARGIN: f64 = 1e-8;
/// Default number of randomized instances per suite.
pub const DEFAULT_SUITE_COUNT: usize = 100;
/// Matrix sizes cycled through by the randomized suites.
pub const SUITE_SIZES: [usize; 4] = [1, 2, 3, 5];

/// Complex symmetric matrix with positive-definite imaginary part.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatPlusI {
    z: CMatrix,
}

fn op_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Smallest eigenvalue of a Hermitian matrix.
fn herm_min_eig(h: &CMatrix) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.min()
}

/// Imaginary part of a complex symmetric matrix, as a Hermitian matrix.
fn im_part(z: &CMatrix) -> CMatrix {
    z.map(|w| Complex64::new(w.im, 0.0))
}

fn check_complex_symmetric(z: &CMatrix, name: &str) -> Result<()> {
    if z.nrows() != z.ncols() {
        return Err(PencilError::DimensionMismatch(format!("{name} not square")));
    }
    if (z - z.transpose()).norm() > 1e-12 * z.norm().max(1.0) {
        return Err(PencilError::NotSymmetric(name.into()));
    }
    Ok(())
}

impl MatPlusI {
    pub fn new(z: CMatrix) -> Result<Self> {
        check_complex_symmetric(&z, "z")?;
        if herm_min_eig(&im_part(&z)) <= 0.0 {
            return Err(PencilError::NotPositiveDefinite("Im z".into()));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> &CMatrix {
        &self.z
    }

    pub fn ell(&self) -> usize {
        self.z.nrows()
    }
}

/// Hermitian contraction `K_t = (P - I)(P + I)⁻¹` with `P = Z^{it}(Z^{it})*`.
#[derive(Debug, Clone)]
pub struct KtOperator {
    pub z: MatPlusI,
    pub t: f64,
    pub k: CMatrix,
}

/// Deterministic random element of the class: `A + iB` with `A` symmetric
/// (entries uniform in `[-1, 1]`) and `B = GᵀG + 0.1·I`.
pub fn random_mat_plus_i(ell: usize, rng_seed: u64) -> MatPlusI {
    assert!(ell >= 1, "ell must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut a = RMatrix::zeros(ell, ell);
    for i in 0..ell {
        for j in i..ell {
            let v = rng.gen_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let g = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
    let b = g.transpose() * &g + RMatrix::identity(ell, ell) * 0.1;
    let z = CMatrix::from_fn(ell, ell, |i, j| Complex64::new(a[(i, j)], b[(i, j)]));
    MatPlusI::new(z).expect("construction is positive definite by design")
}

/// The numerical range lies in the open upper half-plane iff the imaginary
/// part is positive definite; returns whether the spectral test and the
/// sampled-boundary test agree.
pub fn check_lemma_symm(z: &CMatrix) -> Result<bool> {
    check_complex_symmetric(z, "z")?;
    let scale = z.norm().max(1.0);
    let algebraic = herm_min_eig(&im_part(z)) > 0.0;
    let nr = numerical_range_boundary(z, DEFAULT_RANGE_SAMPLES)?;
    let geometric = nr.min_im() > -1e-9 * scale && nr.min_im() > 0.0;
    Ok(algebraic == geometric)
}

/// `W(Z^λ) ⊂ sgn(λ)·UHP` for real `λ ∈ [-1, 1] \ {0}`.
pub fn check_lemma_numrang(z: &MatPlusI, lambda: f64) -> Result<bool> {
    Ok(numrang_slack(z, lambda)? > 0.0)
}

/// Signed distance of `W(Z^λ)` from the real axis, positive when the lemma
/// holds strictly.
fn numrang_slack(z: &MatPlusI, lambda: f64) -> Result<f64> {
    if lambda == 0.0 || lambda.abs() > 1.0 {
        return Err(PencilError::InvalidInput(
            "lambda must lie in [-1, 1] and be nonzero".into(),
        ));
    }
    let zl = matrix_power(&z.z, Complex64::new(lambda, 0.0), Branch::Principal)?;
    let nr = numerical_range_boundary(&zl, DEFAULT_RANGE_SAMPLES)?;
    Ok(if lambda > 0.0 { nr.min_im() } else { -nr.max_im() })
}

/// `sgn(λ)(I - (Z^{iλ})* Z^{iλ}) ≻ 0`, plus the divergence surrogate: the
/// smallest eigenvalue of `(Z^{iλ})* Z^{iλ}` grows strictly along
/// `λ ∈ {-1, -2, -4, -8, -16}`.
pub fn check_lemma_chaotisch(z: &MatPlusI, lambda: f64) -> Result<bool> {
    let (slack, _) = chaotisch_slack(z, lambda)?;
    let mut prev = f64::NEG_INFINITY;
    for lam in [-1.0, -2.0, -4.0, -8.0, -16.0] {
        let zi = matrix_power(&z.z, Complex64::new(0.0, lam), Branch::Principal)?;
        // σmin² keeps relative accuracy where the Gram eigensolve loses the
        // small eigenvalue to cancellation against e^{2|λ|·argmax} entries.
        let lo = zi.svd(false, false).singular_values.min().powi(2);
        if lo <= prev {
            return Ok(false);
        }
        prev = lo;
    }
    Ok(slack > 0.0)
}

/// `(Z^{iλ})* Z^{iλ}`.
fn gram_of_imaginary_power(z: &MatPlusI, lambda: f64) -> Result<CMatrix> {
    let zi = matrix_power(&z.z, Complex64::new(0.0, lambda), Branch::Principal)?;
    Ok(zi.adjoint() * &zi)
}

/// `(slack, scale)` of part i of the contraction lemma.
fn chaotisch_slack(z: &MatPlusI, lambda: f64) -> Result<(f64, f64)> {
    if lambda == 0.0 {
        return Err(PencilError::InvalidInput("lambda must be nonzero".into()));
    }
    let p = gram_of_imaginary_power(z, lambda)?;
    let ell = z.ell();
    let m = (CMatrix::identity(ell, ell) - p) * Complex64::new(lambda.signum(), 0.0);
    Ok((herm_min_eig(&m), z.z.norm().max(1.0)))
}

/// Builds `K_t` and asserts the contraction and sign invariants.
pub fn build_kt(z: &MatPlusI, t: f64) -> Result<KtOperator> {
    // K = (P-I)(P+I)⁻¹ with P = (Z^{it})* Z^{it}; from the SVD UΣV* of the
    // contraction Z^{i|t|} (all σ ≤ 1, hence representable) this is
    // V tanh(ln Σ) V* for t ≥ 0 and U tanh(-ln Σ) U* for t < 0 — forming P
    // directly overflows and the SVD of the expansive side loses σmin
    let zc = matrix_power(&z.z, Complex64::new(0.0, t.abs()), Branch::Principal)?;
    let svd = zc.svd(true, true);
    let sign = if t >= 0.0 { 1.0 } else { -1.0 };
    let f = CMatrix::from_diagonal(
        &svd.singular_values
            .map(|s| Complex64::new(sign * s.ln().tanh(), 0.0)),
    );
    let k = if t >= 0.0 {
        let v_t = svd.v_t.ok_or(PencilError::SingularMatrix)?;
        v_t.adjoint() * f * &v_t
    } else {
        let u = svd.u.ok_or(PencilError::SingularMatrix)?;
        &u * f * u.adjoint()
    };
    if (&k - k.adjoint()).norm() > 1e-10 * k.norm().max(1.0) {
        return Err(PencilError::InvariantViolation("K_t not Hermitian".into()));
    }
    // strict in exact arithmetic; (P-I)(P+I)⁻¹ rounds to norm exactly 1 once
    // P saturates (‖P‖ ≳ 1e16), so only flag a genuine excess
    if op_norm(&k) > 1.0 + 1e-12 {
        return Err(PencilError::InvariantViolation(
            "K_t is not a strict contraction".into(),
        ));
    }
    if t != 0.0 && herm_min_eig(&(&k * Complex64::new(-t.signum(), 0.0))) <= 0.0 {
        return Err(PencilError::InvariantViolation(
            "-sgn(t) K_t is not positive definite".into(),
        ));
    }
    Ok(KtOperator {
        z: z.clone(),
        t,
        k,
    })
}

/// Scalar identity behind the mixed half-integer lattice: for
/// `λ = k/2 + it`, `1/tan(λπ) = -i(cosh(2tπ) + (-1)^k)/sinh(2tπ)` to 1e-12,
/// with modulus > 1 for even `k`; additionally checks that the commutator
/// `[A, B]` of the given symmetric matrices has purely imaginary spectrum.
pub fn check_mix2_tangent(a_mat: &RMatrix, b_mat: &RMatrix, k: i64, t: f64) -> Result<bool> {
    if (a_mat - a_mat.transpose()).norm() > 1e-12 * a_mat.norm().max(1.0) {
        return Err(PencilError::NotSymmetric("a_mat".into()));
    }
    if (b_mat - b_mat.transpose()).norm() > 1e-12 * b_mat.norm().max(1.0) {
        return Err(PencilError::NotSymmetric("b_mat".into()));
    }
    let even = k.rem_euclid(2) == 0;
    if even && t == 0.0 {
        return Err(PencilError::InvalidInput(
            "1/tan(kπ) is undefined for even k at t = 0".into(),
        ));
    }
    let lambda = Complex64::new(k as f64 / 2.0, t);
    // cot as cos/sin: tan() overflows to NaN at odd k, t = 0
    let inv_tan = (lambda * PI).cos() / (lambda * PI).sin();
    let closed_form = if t == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let sign = if even { 1.0 } else { -1.0 };
        Complex64::new(0.0, -((2.0 * t * PI).cosh() + sign) / (2.0 * t * PI).sinh())
    };
    let identity_ok = (inv_tan - closed_form).norm() <= 1e-12 * inv_tan.norm().max(1.0);
    let modulus_ok = !even || inv_tan.norm() > 1.0;
    let comm = a_mat * b_mat - b_mat * a_mat;
    let comm_c = comm.map(|x| Complex64::new(x, 0.0));
    let spec_ok = spectrum(&comm_c)?
        .iter()
        .all(|b| b.re.abs() <= 1e-9 * comm.norm().max(1.0));
    Ok(identity_ok && modulus_ok && spec_ok)
}

/// Randomized suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabSuite {
    NumRange,
    Accretive,
    Kt,
    Mix2,
}

impl std::str::FromStr for LabSuite {
    type Err = PencilError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numrange" => Ok(Self::NumRange),
            "accretive" => Ok(Self::Accretive),
            "kt" => Ok(Self::Kt),
            "mix2" => Ok(Self::Mix2),
            other => Err(PencilError::InvalidInput(format!(
                "unknown suite '{other}' (expected numrange|accretive|kt|mix2)"
            ))),
        }
    }
}

/// Outcome of one strict-inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabOutcome {
    Pass,
    Fail,
    Inconclusive,
}

fn classify(slack: f64, scale: f64) -> LabOutcome {
    if slack > INCONCLUSIVE_MARGIN * scale {
        LabOutcome::Pass
    } else if slack > -INCONCLUSIVE_MARGIN * scale {
        LabOutcome::Inconclusive
    } else {
        LabOutcome::Fail
    }
}

/// Aggregated result of a randomized suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabSummary {
    pub suite: LabSuite,
    pub seed: u64,
    pub count: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// JSON dumps of failing instances for replay.
    pub failures: Vec<serde_json::Value>,
}

impl LabSummary {
    pub fn all_passed(&self) -> bool {
        self.fail == 0
    }
}

fn mat_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

/// Random matrix with numerical range in the open right half-plane:
/// positive-definite symmetric part plus a random skew part.
fn random_accretive(ell: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
    let p = g.transpose() * &g + RMatrix::identity(ell, ell) * 0.05;
    let n = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
    let skew = (&n - n.transpose()) * 0.5;
    // real matrix: i·skew would be Hermitian and shift real eigenvalues onto
    // the branch cut instead of tilting the range off the real axis
    (p + skew).map(|x| Complex64::new(x, 0.0))
}

/// Runs one randomized suite with a deterministic seed; failures carry the
/// offending instance as JSON.
pub fn run_suite(suite: LabSuite, seed: u64, count: usize) -> Result<LabSummary> {
    let mut summary = LabSummary {
        suite,
        seed,
        count,
        pass: 0,
        fail: 0,
        inconclusive: 0,
        failures: Vec::new(),
    };
    for idx in 0..count {
        let ell = SUITE_SIZES[idx % SUITE_SIZES.len()];
        let inst_seed = seed.wrapping_add(idx as u64);
        let outcome = run_instance(suite, ell, inst_seed)?;
        match outcome {
            (LabOutcome::Pass, _) => summary.pass += 1,
            (LabOutcome::Inconclusive, _) => summary.inconclusive += 1,
            (LabOutcome::Fail, detail) => {
                summary.fail += 1;
                summary.failures.push(json!({
                    "suite": suite,
                    "ell": ell,
                    "seed": inst_seed,
                    "detail": detail,
                }));
            }
        }
    }
    Ok(summary)
}

fn run_instance(suite: LabSuite, ell: usize, seed: u64) -> Result<(LabOutcome, serde_json::Value)> {
    let mut worst = LabOutcome::Pass;
    let mut detail = json!(null);
    let mut record = |o: LabOutcome, d: serde_json::Value, worst: &mut LabOutcome| {
        let rank = |x: LabOutcome| match x {
            LabOutcome::Pass => 0,
            LabOutcome::Inconclusive => 1,
            LabOutcome::Fail => 2,
        };
        if rank(o) > rank(*worst) {
            *worst = o;
            detail = d;
        }
    };
    match suite {
        LabSuite::NumRange => {
            let z = random_mat_plus_i(ell, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
            let scale = z.z.norm().max(1.0);
            if !check_lemma_symm(z.z())? {
                record(
                    LabOutcome::Fail,
                    json!({"check": "symm", "z": mat_json(z.z())}),
                    &mut worst,
                );
            }
            let mut lam: f64 = rng.gen_range(-1.0..1.0);
            if lam.abs() < 0.05 {
                lam = 0.5_f64.copysign(lam + f64::MIN_POSITIVE);
            }
            let slack = numrang_slack(&z, lam)?;
            record(
                classify(slack, scale),
                json!({"check": "numrang", "lambda": lam, "slack": slack, "z": mat_json(z.z())}),
                &mut worst,
            );
            for lam in [0.7, -0.7] {
                let (slack, sc) = chaotisch_slack(&z, lam)?;
                record(
                    classify(slack, sc),
                    json!({"check": "chaotisch", "lambda": lam, "slack": slack, "z": mat_json(z.z())}),
                    &mut worst,
                );
            }
            let zinv = z
                .z
                .clone()
                .try_inverse()
                .ok_or(PencilError::SingularMatrix)?;
            let uspis = herm_min_eig(&(im_part(&zinv) * Complex64::new(-1.0, 0.0)));
            record(
                classify(uspis, scale),
                json!({"check": "uspis", "slack": uspis, "z": mat_json(z.z())}),
                &mut worst,
            );
            for lam in [0.1, 1.0, 5.0] {
                let zi = matrix_power(&z.z, Complex64::new(0.0, lam), Branch::Principal)?;
                let slack = 1.0 - op_norm(&zi);
                record(
                    classify(slack, 1.0),
                    json!({"check": "contraction", "lambda": lam, "slack": slack, "z": mat_json(z.z())}),
                    &mut worst,
                );
            }
        }
        LabSuite::Accretive => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_accretive(ell, &mut rng);
            for lam in [0.3, 0.7, 1.0] {
                let al = matrix_power(&a, Complex64::new(lam, 0.0), Branch::Principal)?;
                let nr = numerical_range_boundary(&al, DEFAULT_RANGE_SAMPLES)?;
                let max_arg = nr
                    .points
                    .iter()
                    .map(|(re, im)| im.atan2(*re).abs())
                    .fold(0.0_f64, f64::max);
                let slack = lam * PI / 2.0 - max_arg;
                record(
                    classify(slack, 1.0),
                    json!({"check": "sector", "lambda": lam, "slack": slack, "a": mat_json(&a)}),
                    &mut worst,
                );
            }
        }
        LabSuite::Kt => {
            let z = random_mat_plus_i(ell, seed);
            for t in [-1e-3, -1.0, -50.0, 0.5] {
                match build_kt(&z, t) {
                    Ok(kt) => {
                        let ok = match t {
                            t if t == -1e-3 => op_norm(&kt.k) < 0.1,
                            t if t == -50.0 => {
                                op_norm(&(&kt.k - CMatrix::identity(z.ell(), z.ell()))) < 0.1
                            }
                            _ => true,
                        };
                        if !ok {
                            record(
                                LabOutcome::Fail,
                                json!({"check": "kt_limit", "t": t, "z": mat_json(z.z())}),
                                &mut worst,
                            );
                        }
                    }
                    Err(e) => record(
                        LabOutcome::Fail,
                        json!({"check": "kt_invariant", "t": t, "error": e.to_string(), "z": mat_json(z.z())}),
                        &mut worst,
                    ),
                }
            }
        }
        LabSuite::Mix2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
            let a = (&g + g.transpose()) * 0.5;
            let h = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
            let b = (&h + h.transpose()) * 0.5;
            let k = rng.gen_range(0_i64..4);
            let mut t: f64 = rng.gen_range(-2.0..2.0);
            if t.abs() < 0.05 {
                t = 0.3_f64.copysign(t + f64::MIN_POSITIVE);
            }
            if !check_mix2_tangent(&a, &b, k, t)? {
                record(
                    LabOutcome::Fail,
                    json!({"check": "mix2", "k": k, "t": t}),
                    &mut worst,
                );
            }
        }
    }
    Ok((worst, detail))
}
