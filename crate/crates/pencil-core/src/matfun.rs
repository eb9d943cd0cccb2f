//! Matrix functional calculus: spectra, Hermitian square roots, branch-aware
//! complex powers and logarithms, spectral radius, and numerical-range
//! boundary sampling.
//!
//! Matrix functions are evaluated through a complex Schur decomposition with
//! eigenvalue clustering and a block Parlett recurrence; clusters are handled
//! by a truncated Taylor expansion about the cluster mean, so defective and
//! near-defective matrices need no diagonalizability assumption.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{CMatrix, CVector, PencilError, Result};

/// Eigenvalues closer than this to the active branch cut raise
/// [`PencilError::BranchCut`] instead of silently choosing a side.
pub const CUT_TOL: f64 = 1e-10;
/// Relative backward-error tolerance for eigendecompositions.
pub const EIG_TOL: f64 = 1e-10;
/// Margin tolerance for numerical-range membership queries.
pub const RANGE_TOL: f64 = 1e-9;
/// Eigenvalues closer than `CLUSTER_TOL * ||A||` are merged into one
/// Parlett block.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Default sample count for numerical-range boundaries.
pub const DEFAULT_RANGE_SAMPLES: usize = 256;

/// Logarithm branch: the three `arg` conventions of the branch functions
/// `λ_o`, `λ_+`, `λ_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `arg ∈ (-π, π]`, cut on the negative real axis.
    Principal,
    /// `arg ∈ [0, 2π)`, cut on the positive real axis.
    Plus,
    /// `arg ∈ (-2π, 0]`, cut on the positive real axis.
    Minus,
}

impl Branch {
    /// Branch argument of `z`.
    pub fn arg(self, z: Complex64) -> f64 {
        let mut a = z.im.atan2(z.re);
        if a == -PI {
            a = PI;
        }
        match self {
            Branch::Principal => a,
            Branch::Plus => {
                if a < 0.0 {
                    a + 2.0 * PI
                } else {
                    a
                }
            }
            Branch::Minus => {
                if a > 0.0 {
                    a - 2.0 * PI
                } else {
                    a
                }
            }
        }
    }

    /// `log_a(z) = ln|z| + i arg_a(z)`.
    pub fn log(self, z: Complex64) -> Complex64 {
        Complex64::new(z.norm().ln(), self.arg(z))
    }

    /// `z^{λ_a} = exp(λ log_a z)` for scalars.
    pub fn pow(self, z: Complex64, lambda: Complex64) -> Complex64 {
        (lambda * self.log(z)).exp()
    }

    /// Distance from `z` to the branch-cut ray.
    pub fn cut_distance(self, z: Complex64) -> f64 {
        match self {
            Branch::Principal => {
                if z.re <= 0.0 {
                    z.im.abs()
                } else {
                    z.norm()
                }
            }
            Branch::Plus | Branch::Minus => {
                if z.re >= 0.0 {
                    z.im.abs()
                } else {
                    z.norm()
                }
            }
        }
    }
}

/// Holomorphic function admitted by the calculus.
#[derive(Debug, Clone, Copy)]
pub enum CalcFn {
    Power { lambda: Complex64, branch: Branch },
    Log { branch: Branch },
}

impl CalcFn {
    fn branch(&self) -> Branch {
        match self {
            CalcFn::Power { branch, .. } | CalcFn::Log { branch } => *branch,
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            CalcFn::Power { lambda, branch } => branch.pow(z, *lambda),
            CalcFn::Log { branch } => branch.log(z),
        }
    }

    /// Taylor coefficients `f^{(k)}(mu) / k!` for `k = 0..=kmax`.
    fn taylor_coeffs(&self, mu: Complex64, kmax: usize) -> Vec<Complex64> {
        let mut c = Vec::with_capacity(kmax + 1);
        match self {
            CalcFn::Power { lambda, branch } => {
                c.push(branch.pow(mu, *lambda));
                for k in 1..=kmax {
                    let prev = c[k - 1];
                    c.push(prev * (*lambda - (k as f64 - 1.0)) / (k as f64) / mu);
                }
            }
            CalcFn::Log { branch } => {
                c.push(branch.log(mu));
                if kmax >= 1 {
                    c.push(1.0 / mu);
                }
                for k in 2..=kmax {
                    let prev = c[k - 1];
                    c.push(-prev * ((k as f64 - 1.0) / k as f64) / mu);
                }
            }
        }
        c
    }
}

/// Complex Schur decomposition `A = Q T Q*` with `T` upper triangular,
/// reusable across multiple function evaluations of the same matrix.
#[derive(Debug, Clone)]
pub struct SchurForm {
    q: CMatrix,
    t: CMatrix,
    norm: f64,
}

impl SchurForm {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(PencilError::DimensionMismatch("matrix not square".into()));
        }
        let n = a.nrows();
        let norm = a.norm();
        let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 50 * (n + 5) * n)
            .ok_or(PencilError::NonConvergence)?;
        let (q, t) = schur.unpack();
        let residual = (&q * &t * q.adjoint() - a).norm();
        if residual > EIG_TOL * norm.max(1.0) {
            return Err(PencilError::NonConvergence);
        }
        Ok(Self { q, t, norm })
    }

    pub fn size(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues with algebraic multiplicity (diagonal of `T`).
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.t.diagonal().iter().copied().collect()
    }

    /// Evaluates `f(A)` by the clustered block Parlett recurrence.
    pub fn apply(&self, f: CalcFn) -> Result<CMatrix> {
        let n = self.size();
        let scale = self.norm.max(1e-300);
        for z in self.t.diagonal().iter() {
            if z.norm() <= 1e-14 * scale.max(1.0) {
                return Err(PencilError::SingularMatrix);
            }
            let d = f.branch().cut_distance(*z);
            if d < CUT_TOL {
                return Err(PencilError::BranchCut(d));
            }
        }
        let (q, t, blocks) = self.clustered(CLUSTER_TOL * scale)?;
        let ft = parlett_blocks(&t, &blocks, f)?;
        let mut out = &q * ft * q.adjoint();
        // clean roundoff noise below unit roundoff of the result scale
        let out_norm = out.norm();
        for z in out.iter_mut() {
            if z.norm() < 1e-30 * out_norm {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        let _ = n;
        Ok(out)
    }

    /// Reorders the Schur form so the eigenvalues selected by `select`
    /// (indexed by original diagonal position) occupy the leading positions,
    /// preserving relative order. Returns the reordered `(Q, T)`.
    pub fn reorder_front(&self, select: &[bool]) -> Result<(CMatrix, CMatrix)> {
        let mut q = self.q.clone();
        let mut t = self.t.clone();
        let mut sel: Vec<bool> = select.to_vec();
        let n = self.size();
        loop {
            let mut swapped = false;
            for k in 0..n - 1 {
                if !sel[k] && sel[k + 1] {
                    swap_adjacent(&mut q, &mut t, k);
                    sel.swap(k, k + 1);
                    swapped = true;
                }
            }
            if !swapped {
                return Ok((q, t));
            }
        }
    }

    /// Eigenvectors by triangular back substitution; column `j` pairs with
    /// `eigenvalues()[j]`.
    pub fn eigenvectors(&self) -> CMatrix {
        let n = self.size();
        let t = &self.t;
        let scale = self.norm.max(1.0);
        let mut vecs = CMatrix::zeros(n, n);
        for k in 0..n {
            let mu = t[(k, k)];
            let mut y = CVector::zeros(n);
            y[k] = Complex64::new(1.0, 0.0);
            for j in (0..k).rev() {
                let mut s = Complex64::new(0.0, 0.0);
                for m in (j + 1)..=k {
                    s += t[(j, m)] * y[m];
                }
                let mut denom = t[(j, j)] - mu;
                if denom.norm() < 1e-300 + f64::EPSILON * scale {
                    denom = Complex64::new(f64::EPSILON * scale, 0.0);
                }
                y[j] = -s / denom;
            }
            let v = &self.q * y;
            let nrm = v.norm();
            vecs.set_column(k, &(v / Complex64::new(nrm, 0.0)));
        }
        vecs
    }

    /// Groups near-coincident eigenvalues into contiguous blocks.
    fn clustered(&self, delta: f64) -> Result<(CMatrix, CMatrix, Vec<std::ops::Range<usize>>)> {
        let n = self.size();
        let eigs = self.eigenvalues();
        // union-find over eigenvalue indices
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (eigs[i] - eigs[j]).norm() < delta {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        // cluster ids in order of first appearance
        let mut cluster_of = vec![usize::MAX; n];
        let mut order: Vec<usize> = Vec::new();
        for i in 0..n {
            if let Some(pos) = order.iter().position(|&r| r == roots[i]) {
                cluster_of[i] = pos;
            } else {
                cluster_of[i] = order.len();
                order.push(roots[i]);
            }
        }
        let nclusters = order.len();
        if nclusters == n {
            // all singleton: no reordering needed
            let blocks = (0..n).map(|i| i..i + 1).collect();
            return Ok((self.q.clone(), self.t.clone(), blocks));
        }
        // bubble members of each cluster into contiguous leading positions
        let mut q = self.q.clone();
        let mut t = self.t.clone();
        let mut labels = cluster_of;
        let mut start = 0usize;
        let mut blocks = Vec::with_capacity(nclusters);
        for c in 0..nclusters {
            let count = labels.iter().filter(|&&l| l == c).count();
            for p in start..start + count {
                // locate next member at or after p and bubble it to p
                let mut j = p;
                while labels[j] != c {
                    j += 1;
                }
                while j > p {
                    swap_adjacent(&mut q, &mut t, j - 1);
                    labels.swap(j - 1, j);
                    j -= 1;
                }
            }
            blocks.push(start..start + count);
            start += count;
        }
        Ok((q, t, blocks))
    }
}

/// Swaps the diagonal entries `k`, `k+1` of triangular `T` by a unitary
/// similarity, accumulating the rotation into `Q`.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let c = t[(k + 1, k + 1)];
    let x1 = b;
    let x2 = c - a;
    let nrm = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
    if nrm < 1e-300 {
        return; // coincident eigenvalues, swap is a no-op
    }
    let g11 = x1 / nrm;
    let g21 = x2 / nrm;
    // G = [[g11, -conj(g21)], [g21, conj(g11)]]; apply G* T G and Q G
    let n = t.nrows();
    for j in 0..n {
        let r1 = t[(k, j)];
        let r2 = t[(k + 1, j)];
        t[(k, j)] = g11.conj() * r1 + g21.conj() * r2;
        t[(k + 1, j)] = -g21 * r1 + g11 * r2;
    }
    for i in 0..n {
        let c1 = t[(i, k)];
        let c2 = t[(i, k + 1)];
        t[(i, k)] = c1 * g11 + c2 * g21;
        t[(i, k + 1)] = -c1 * g21.conj() + c2 * g11.conj();
    }
    for i in 0..q.nrows() {
        let c1 = q[(i, k)];
        let c2 = q[(i, k + 1)];
        q[(i, k)] = c1 * g11 + c2 * g21;
        q[(i, k + 1)] = -c1 * g21.conj() + c2 * g11.conj();
    }
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    t[(k, k)] = c;
    t[(k + 1, k + 1)] = a;
}

/// `f(T)` for triangular `T` partitioned into the given diagonal blocks.
fn parlett_blocks(t: &CMatrix, blocks: &[std::ops::Range<usize>], f: CalcFn) -> Result<CMatrix> {
    let n = t.nrows();
    let nb = blocks.len();
    let mut ft = CMatrix::zeros(n, n);
    for blk in blocks {
        let tb = t.view((blk.start, blk.start), (blk.len(), blk.len())).into_owned();
        let fb = taylor_block(&tb, f)?;
        ft.view_mut((blk.start, blk.start), (blk.len(), blk.len()))
            .copy_from(&fb);
    }
    for sep in 1..nb {
        for bi in (0..nb - sep).rev() {
            let bj = bi + sep;
            let (ri, rj) = (blocks[bi].clone(), blocks[bj].clone());
            let tij = t.view((ri.start, rj.start), (ri.len(), rj.len())).into_owned();
            let fii = ft.view((ri.start, ri.start), (ri.len(), ri.len())).into_owned();
            let fjj = ft.view((rj.start, rj.start), (rj.len(), rj.len())).into_owned();
            let mut c = &fii * &tij - &tij * &fjj;
            for bk in (bi + 1)..bj {
                let rk = blocks[bk].clone();
                let fik = ft.view((ri.start, rk.start), (ri.len(), rk.len())).into_owned();
                let tkj = t.view((rk.start, rj.start), (rk.len(), rj.len())).into_owned();
                let tik = t.view((ri.start, rk.start), (ri.len(), rk.len())).into_owned();
                let fkj = ft.view((rk.start, rj.start), (rk.len(), rj.len())).into_owned();
                c += &fik * &tkj - &tik * &fkj;
            }
            let tii = t.view((ri.start, ri.start), (ri.len(), ri.len())).into_owned();
            let tjj = t.view((rj.start, rj.start), (rj.len(), rj.len())).into_owned();
            let x = sylvester_triangular(&tii, &tjj, &c)?;
            ft.view_mut((ri.start, rj.start), (ri.len(), rj.len()))
                .copy_from(&x);
        }
    }
    Ok(ft)
}

/// Solves `T1 X - X T2 = C` for upper-triangular `T1`, `T2` with disjoint
/// spectra, column by column.
fn sylvester_triangular(t1: &CMatrix, t2: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    let p = t1.nrows();
    let q = t2.nrows();
    let mut x = CMatrix::zeros(p, q);
    for j in 0..q {
        let mut rhs = c.column(j).into_owned();
        for k in 0..j {
            let tkj = t2[(k, j)];
            rhs += x.column(k) * tkj;
        }
        // (T1 - t2[j,j] I) xj = rhs, upper-triangular backsolve
        let mu = t2[(j, j)];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for m in (i + 1)..p {
                s -= (t1[(i, m)] - if i == m { mu } else { Complex64::default() }) * x[(m, j)];
            }
            let denom = t1[(i, i)] - mu;
            if denom.norm() < 1e-300 {
                return Err(PencilError::NonConvergence);
            }
            x[(i, j)] = s / denom;
        }
    }
    Ok(x)
}

/// `f(muI + N)` by a truncated Taylor expansion about the cluster mean.
fn taylor_block(tb: &CMatrix, f: CalcFn) -> Result<CMatrix> {
    let m = tb.nrows();
    if m == 1 {
        return Ok(CMatrix::from_element(1, 1, f.eval(tb[(0, 0)])));
    }
    let mu = tb.diagonal().iter().sum::<Complex64>() / m as f64;
    let nmat = tb - CMatrix::identity(m, m) * mu;
    let kmax = 20 + 4 * m;
    let coeffs = f.taylor_coeffs(mu, kmax);
    let mut acc = CMatrix::identity(m, m) * coeffs[0];
    let mut pow = CMatrix::identity(m, m);
    let mut stagnant = 0usize;
    for (k, ck) in coeffs.iter().enumerate().skip(1) {
        pow = &pow * &nmat;
        let term = &pow * *ck;
        let tn = term.norm();
        acc += term;
        if tn <= 1e-18 * acc.norm().max(1e-300) {
            stagnant += 1;
            if stagnant >= 2 && k >= m {
                return Ok(acc);
            }
        } else {
            stagnant = 0;
        }
    }
    // cluster diameter is tiny by construction; if the tail did not die off
    // the block was not actually clusterable
    let tail = (&pow * coeffs[kmax]).norm();
    if tail > 1e-10 * acc.norm().max(1e-300) {
        return Err(PencilError::NonConvergence);
    }
    Ok(acc)
}

/// Eigenvalues of a square complex matrix, with multiplicity.
pub fn spectrum(m: &CMatrix) -> Result<Vec<Complex64>> {
    let mut eigs = SchurForm::new(m)?.eigenvalues();
    eigs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(eigs)
}

/// `max |σ(m)|`.
pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    Ok(spectrum(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Unique Hermitian positive-definite square root of a Hermitian
/// positive-definite matrix.
pub fn hermitian_sqrt(p: &CMatrix) -> Result<CMatrix> {
    let herm = (p + p.adjoint()).scale(0.5);
    let eig = herm.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(PencilError::NotPositiveDefinite("hermitian_sqrt input".into()));
    }
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.sqrt(), 0.0)));
    let q = &eig.eigenvectors;
    let root = q * d * q.adjoint();
    Ok((&root + root.adjoint()).scale(0.5))
}

/// `z^{λ_a}` via the functional calculus.
pub fn matrix_power(z: &CMatrix, lambda: Complex64, branch: Branch) -> Result<CMatrix> {
    SchurForm::new(z)?.apply(CalcFn::Power { lambda, branch })
}

/// `log_a(z)` via the functional calculus.
pub fn matrix_log(z: &CMatrix, branch: Branch) -> Result<CMatrix> {
    SchurForm::new(z)?.apply(CalcFn::Log { branch })
}

/// Ordered boundary samples of the numerical range `W(Z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericalRangeBoundary {
    pub points: Vec<(f64, f64)>,
    pub n_samples: usize,
}

impl NumericalRangeBoundary {
    pub fn min_im(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
    pub fn max_im(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn min_re(&self) -> f64 {
        self.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min)
    }
    pub fn max_re(&self) -> f64 {
        self.points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
    }
    /// `W(Z) ⊂ UHP` with the given margin, up to sampling error.
    pub fn in_uhp(&self, margin: f64) -> bool {
        self.min_im() > margin
    }
}

/// Samples the boundary of `W(z)` at `n >= 8` support directions: for each
/// `θ_k = 2πk/n` the maximal eigenpair of the Hermitian part of
/// `e^{-iθ_k} z` yields one boundary point `⟨x, z x⟩`.
pub fn numerical_range_boundary(z: &CMatrix, n: usize) -> Result<NumericalRangeBoundary> {
    if n < 8 {
        return Err(PencilError::InvalidInput("need n >= 8 samples".into()));
    }
    if z.nrows() != z.ncols() {
        return Err(PencilError::DimensionMismatch("matrix not square".into()));
    }
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let theta = 2.0 * PI * k as f64 / n as f64;
        let rot = Complex64::from_polar(1.0, -theta);
        let h = (z * rot + z.adjoint() * rot.conj()).scale(0.5);
        let eig = h.symmetric_eigen();
        let (imax, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty spectrum");
        let x = eig.eigenvectors.column(imax);
        let p = x.dotc(&(z * x));
        points.push((p.re, p.im));
    }
    Ok(NumericalRangeBoundary {
        points,
        n_samples: n,
    })
}

/// Stabilized determinant of a complex matrix: `(log|det|, arg det)`.
/// Returns `log|det| = -inf` when the matrix is exactly singular.
pub fn log_det(m: &CMatrix) -> (f64, f64) {
    let n = m.nrows();
    let lu = m.clone().lu();
    let mut log_abs = 0.0f64;
    let mut arg = 0.0f64;
    for i in 0..n {
        let u = lu.u()[(i, i)];
        if u.norm() == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        log_abs += u.norm().ln();
        arg += u.arg();
    }
    let perm_det: Complex64 = lu.p().determinant();
    if perm_det.re < 0.0 {
        arg += PI;
    }
    // wrap into (-pi, pi]
    arg = arg.rem_euclid(2.0 * PI);
    if arg > PI {
        arg -= 2.0 * PI;
    }
    (log_abs, arg)
}

/// Smallest singular value of `m`.
pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// 2-norm condition number.
pub fn cond_2(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}
