//! Root location for `det M_{λ,α} = 0`: argument-principle counting on
//! rectangles, recursive quadrisection with Newton / contour-centroid
//! polishing, branch continuation in α, and verification of the exponent
//! bounds of the main theorems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::bc_matrices::{det_m, BCContext};
use crate::matfun::smallest_singular_value;
use crate::standard_root::compute_standard_root;
use crate::{
    AngleConfig, AngleRegime, BoundaryCondition, EllipticTuple, PencilError, Result,
};

/// Maximum `σ_min(M)/‖M‖` for an accepted root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Roots closer than this are merged with summed multiplicity.
pub const DEDUP_TOL: f64 = 1e-7;
/// Finite-difference step factor for Newton polishing.
pub const FD_STEP: f64 = 1e-7;
/// Contour-to-root clearance; regions are inflated by multiples of this on
/// boundary-zero retries.
pub const BOUNDARY_CLEARANCE: f64 = 1e-6;
/// Default quadrisection depth limit.
pub const DEFAULT_MAX_DEPTH: u32 = 40;
/// Roots inside this disk around λ = 0 are dropped: the power representation
/// excludes λ = 0, whose solutions are classified separately.
pub const ZERO_EXCLUSION: f64 = 1e-8;

/// Anything that can evaluate a stabilized determinant `(log|det|, arg)`.
pub trait DetEval {
    fn det(&self, lambda: Complex64) -> Result<(f64, f64)>;
}

impl<F> DetEval for F
where
    F: Fn(Complex64) -> Result<(f64, f64)>,
{
    fn det(&self, lambda: Complex64) -> Result<(f64, f64)> {
        self(lambda)
    }
}

/// Determinant evaluator owning its boundary-condition context.
pub struct CtxDet {
    pub ctx: BCContext,
}

impl DetEval for CtxDet {
    fn det(&self, lambda: Complex64) -> Result<(f64, f64)> {
        det_m(&self.ctx, lambda, self.ctx.bc)
    }
}

/// Rectangle in the λ-plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub max_depth: u32,
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max)
            || !re_min.is_finite()
            || !re_max.is_finite()
            || !im_min.is_finite()
            || !im_max.is_finite()
        {
            return Err(PencilError::InvalidInput(
                "search region must satisfy re_min < re_max, im_min < im_max".into(),
            ));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
            max_depth: DEFAULT_MAX_DEPTH,
        })
    }

    pub fn with_max_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn contains_point(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn inflate(&self, pad: f64) -> Self {
        Self {
            re_min: self.re_min - pad,
            re_max: self.re_max + pad,
            im_min: self.im_min - pad,
            im_max: self.im_max + pad,
            max_depth: self.max_depth,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Quadrisection with split lines offset from the midpoint so lattice
    /// roots do not land on internal contours; `attempt` reshuffles the
    /// offsets on boundary-zero retries.
    fn quarters(&self, attempt: usize) -> [Self; 4] {
        const FR: [f64; 4] = [0.5137, 0.4871, 0.5311, 0.4663];
        let f = FR[attempt % FR.len()];
        let rs = self.re_min + f * (self.re_max - self.re_min);
        let is = self.im_min + f * (self.im_max - self.im_min);
        let mk = |a, b, c, d| Self {
            re_min: a,
            re_max: b,
            im_min: c,
            im_max: d,
            max_depth: self.max_depth,
        };
        [
            mk(self.re_min, rs, self.im_min, is),
            mk(rs, self.re_max, self.im_min, is),
            mk(self.re_min, rs, is, self.im_max),
            mk(rs, self.re_max, is, self.im_max),
        ]
    }
}

/// A located pencil eigenvalue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentRoot {
    pub lambda: Complex64,
    pub alpha: f64,
    pub bc: BoundaryCondition,
    pub multiplicity: usize,
    /// `σ_min(M_{λ,α}) / ‖M_{λ,α}‖`.
    pub residual: f64,
    pub newton_iters: usize,
}

fn wrap_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Total argument change of `det` along the segment `a → b`, subdividing
/// until every increment is below `max_inc`. Accumulates `Δ(log|det|)` too
/// so callers can integrate `λ d(log det)`.
///
/// A segment is only accepted after a midpoint probe: a root of even
/// multiplicity near the segment sweeps a full multiple of 2π between two
/// samples, which wraps to a small apparent increment. Such a sweep always
/// leaves a dip in `log|det|` or an inconsistent argument at the midpoint,
/// so those segments are subdivided further.
fn segment_deltas<D: DetEval>(
    det: &D,
    a: Complex64,
    b: Complex64,
    fa: (f64, f64),
    fb: (f64, f64),
    depth: u32,
    max_inc: f64,
    out: &mut Vec<(Complex64, Complex64)>, // (midpoint, Δ log det)
) -> Result<()> {
    if depth > 52 {
        return Err(PencilError::BoundaryZero);
    }
    let m = (a + b) * 0.5;
    let fm = match det.det(m) {
        Ok(v) => v,
        Err(PencilError::ZeroLambda) => return Err(PencilError::BoundaryZero),
        Err(e) => return Err(e),
    };
    if !fm.0.is_finite() {
        return Err(PencilError::BoundaryZero);
    }
    let d_arg = wrap_pi(fb.1 - fa.1);
    let half_args = wrap_pi(fm.1 - fa.1).abs() + wrap_pi(fb.1 - fm.1).abs();
    let dip = fm.0 - 0.5 * (fa.0 + fb.0);
    // a large magnitude swing means a zero near one end of the segment; its
    // phase sweep can hide next to the dipped endpoint, so keep splitting
    let mag_swing = (fb.0 - fa.0).abs();
    if depth >= 3 && d_arg.abs() < max_inc && half_args < max_inc && dip > -0.7 && mag_swing < 2.0
    {
        out.push((
            (a + m) * 0.5,
            Complex64::new(fm.0 - fa.0, wrap_pi(fm.1 - fa.1)),
        ));
        out.push((
            (m + b) * 0.5,
            Complex64::new(fb.0 - fm.0, wrap_pi(fb.1 - fm.1)),
        ));
        return Ok(());
    }
    segment_deltas(det, a, m, fa, fm, depth + 1, max_inc, out)?;
    segment_deltas(det, m, b, fm, fb, depth + 1, max_inc, out)
}

/// Winding number of `det` along the rectangle boundary, plus the contour
/// integral `(2πi)⁻¹ ∮ λ d(log det)` used for centroid refinement.
fn contour_data<D: DetEval>(
    det: &D,
    region: &SearchRegion,
    max_inc: f64,
) -> Result<(i64, Complex64)> {
    let corners = region.corners();
    let mut vals = Vec::with_capacity(4);
    for c in &corners {
        let f = match det.det(*c) {
            Ok(v) => v,
            Err(PencilError::ZeroLambda) => return Err(PencilError::BoundaryZero),
            Err(e) => return Err(e),
        };
        if !f.0.is_finite() {
            return Err(PencilError::BoundaryZero);
        }
        vals.push(f);
    }
    let mut deltas = Vec::new();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        segment_deltas(det, a, b, vals[k], vals[(k + 1) % 4], 0, max_inc, &mut deltas)?;
    }
    let total_arg: f64 = deltas.iter().map(|(_, d)| d.im).sum();
    let winding = total_arg / (2.0 * PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 {
        return Err(PencilError::PhaseJump);
    }
    let moment: Complex64 = deltas.iter().map(|(m, d)| m * d).sum();
    Ok((rounded as i64, moment / Complex64::new(0.0, 2.0 * PI)))
}

fn count_with_retry<D: DetEval>(det: &D, region: &SearchRegion) -> Result<(usize, SearchRegion)> {
    let mut reg = *region;
    let mut last_err = PencilError::BoundaryZero;
    for attempt in 0..4 {
        match contour_data(det, &reg, FRAC_PI_2) {
            Ok((w, _)) => {
                if w < 0 {
                    return Err(PencilError::PhaseJump);
                }
                return Ok((w as usize, reg));
            }
            Err(e @ (PencilError::BoundaryZero | PencilError::PhaseJump)) => {
                last_err = e;
                let pad = BOUNDARY_CLEARANCE * 3.7_f64.powi(attempt as i32 + 1);
                reg = region.inflate(pad);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Number of roots of `det` inside the region, with multiplicity, by the
/// argument principle. On a boundary zero the region is inflated by small
/// clearance multiples and retried up to three times.
pub fn count_roots<D: DetEval>(det: &D, region: &SearchRegion) -> Result<usize> {
    count_with_retry(det, region).map(|(n, _)| n)
}

/// Newton iteration on the determinant with central finite differences.
/// Determinant values are reconstructed from `(log|det|, arg)` relative to a
/// running magnitude reference, so over- and underflow of the raw
/// determinant cannot occur. `mult` scales the step for multiple roots.
fn newton_polish<D: DetEval>(
    det: &D,
    start: Complex64,
    mult: f64,
) -> Result<(Complex64, usize)> {
    let mut lam = start;
    let mut h_scale = FD_STEP;
    let mut best: Option<(f64, Complex64, usize)> = None;
    for it in 0..60 {
        let h = Complex64::new(h_scale * lam.norm().max(1.0), 0.0);
        let (f0, fp, fm) = match (det.det(lam), det.det(lam + h), det.det(lam - h)) {
            (Ok(a), Ok(b), Ok(c)) if b.0.is_finite() && c.0.is_finite() => (a, b, c),
            (Err(PencilError::ZeroLambda), _, _) => return Err(PencilError::ZeroLambda),
            _ => {
                h_scale *= 1.37;
                continue;
            }
        };
        if !f0.0.is_finite() {
            // exact zero hit
            return Ok((lam, it + 1));
        }
        // normalize against the largest magnitude to keep exp() in range
        let r = f0.0.max(fp.0).max(fm.0);
        let val = |f: (f64, f64)| Complex64::from_polar((f.0 - r).exp(), f.1);
        let (v0, vp, vm) = (val(f0), val(fp), val(fm));
        let deriv = (vp - vm) / (h * 2.0);
        if deriv.norm() < 1e-300 {
            return Err(PencilError::NonConvergence);
        }
        let step = -v0 / deriv * mult;
        lam += step;
        if lam.norm() < ZERO_EXCLUSION {
            return Err(PencilError::ZeroLambda);
        }
        if step.norm() < 1e-12 * lam.norm().max(1.0) {
            return Ok((lam, it + 1));
        }
        // remember the smallest |det| seen in case the iteration cycles at
        // finite-difference resolution
        if best.map_or(true, |(b, _, _)| f0.0 < b) {
            best = Some((f0.0, lam, it + 1));
        }
    }
    match best {
        Some((_, lam, iters)) => Ok((lam, iters)),
        None => Err(PencilError::NonConvergence),
    }
}

/// Contour-centroid refinement `λ₀ = ∮ λ d(log det) / ∮ d(log det)`, exact
/// for a single (possibly multiple) root inside the contour; iterates with a
/// shrinking contour. Robust where finite-difference Newton stalls on
/// multiple roots.
fn centroid_polish<D: DetEval>(
    det: &D,
    start: Complex64,
    mut radius: f64,
) -> Result<(Complex64, usize)> {
    let mut lam = start;
    for it in 0..30 {
        let reg = SearchRegion {
            re_min: lam.re - radius,
            re_max: lam.re + radius,
            im_min: lam.im - radius,
            im_max: lam.im + radius,
            max_depth: DEFAULT_MAX_DEPTH,
        };
        let (w, moment) = match contour_data(det, &reg, PI / 8.0) {
            Ok(v) => v,
            Err(PencilError::BoundaryZero | PencilError::PhaseJump) => {
                radius *= 1.618;
                continue;
            }
            Err(e) => return Err(e),
        };
        if w == 0 {
            return Err(PencilError::NonConvergence);
        }
        let next = moment / Complex64::new(w as f64, 0.0);
        let shift = (next - lam).norm();
        lam = next;
        if lam.norm() < ZERO_EXCLUSION {
            return Err(PencilError::ZeroLambda);
        }
        if shift < 1e-12 * lam.norm().max(1.0) || radius < 1e-10 {
            return Ok((lam, it + 1));
        }
        radius = (4.0 * shift).max(radius / 16.0).max(1e-10);
    }
    Err(PencilError::NonConvergence)
}

/// Polishes the root(s) of an isolating box. Newton from the box center can
/// escape to a neighboring root, or wander through the λ = 0 exclusion and
/// abort; the argument-principle count already proved the root is inside, so
/// on escape the contour centroid — exact for a single enclosed root up to
/// quadrature error — re-seeds the iteration.
fn polish_leaf<D: DetEval>(
    det: &D,
    region: &SearchRegion,
    n: usize,
) -> Result<(Complex64, usize)> {
    let hold = region.inflate(1e-9 * region.diameter().max(1.0));
    if n == 1 {
        if let Ok((lam, iters)) = newton_polish(det, region.center(), 1.0) {
            if hold.contains_point(lam) {
                return Ok((lam, iters));
            }
        }
        let (w, centroid) = contour_data(det, region, PI / 8.0)?;
        if w == 1 {
            if let Ok((lam, iters)) = newton_polish(det, centroid, 1.0) {
                if hold.contains_point(lam) {
                    return Ok((lam, iters));
                }
            }
            return centroid_polish(det, centroid, region.diameter() * 0.05);
        }
    }
    centroid_polish(det, region.center(), region.diameter())
}

/// Half-open ownership window: quadrant contours may be inflated past their
/// shared split lines, so each polished root is attributed to exactly one
/// quadrant via `[min, max)` membership.
#[derive(Debug, Clone, Copy)]
struct Clip {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

impl Clip {
    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re < self.re_max && z.im >= self.im_min && z.im < self.im_max
    }
}

/// Recursive quadrisection. Returns the root count of `region` so parents
/// can cross-check it against the sum over their quadrants: a root lying
/// close to (but not on) a contour can silently alias a full 2π of phase out
/// of the winding number, and such a miscount at one level disagrees with
/// the independent contours of the level below. On disagreement the split is
/// re-jittered.
fn subdivide<D: DetEval>(
    det: &D,
    region: &SearchRegion,
    clip: &Clip,
    depth: u32,
    out: &mut Vec<(Complex64, usize, usize)>,
) -> Result<usize> {
    let (n, counted_region) = count_with_retry(det, region)?;
    if n == 0 {
        return Ok(0);
    }
    if n == 1 || counted_region.diameter() < 1e-6 {
        let polished = polish_leaf(det, &counted_region, n);
        match polished {
            Ok((lam, iters)) => {
                if clip.contains(lam) {
                    out.push((lam, n, iters));
                }
            }
            Err(PencilError::ZeroLambda) => {} // λ = 0, excluded by design
            Err(e) => return Err(e),
        }
        return Ok(n);
    }
    if depth >= region.max_depth {
        return Err(PencilError::MaxDepthExceeded);
    }
    for attempt in 0..4 {
        let quarters = counted_region.quarters(attempt);
        // split coordinates shared by the four quadrants
        let rs = quarters[0].re_max;
        let is = quarters[0].im_max;
        let clips = [
            Clip { re_min: clip.re_min, re_max: rs, im_min: clip.im_min, im_max: is },
            Clip { re_min: rs, re_max: clip.re_max, im_min: clip.im_min, im_max: is },
            Clip { re_min: clip.re_min, re_max: rs, im_min: is, im_max: clip.im_max },
            Clip { re_min: rs, re_max: clip.re_max, im_min: is, im_max: clip.im_max },
        ];
        let mut sub = Vec::new();
        let mut total = 0usize;
        let mut failed = false;
        for (q, qc) in quarters.iter().zip(clips.iter()) {
            match subdivide(det, q, qc, depth + 1, &mut sub) {
                Ok(m) => total += m,
                Err(PencilError::BoundaryZero | PencilError::PhaseJump) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !failed && total == n {
            out.extend(sub);
            return Ok(n);
        }
    }
    Err(PencilError::BoundaryZero)
}

/// All roots of `det` in the region: quadrisection to isolation, polishing,
/// then dedup within `DEDUP_TOL` with summed multiplicity. Returned sorted
/// by `(Re λ, Im λ)`.
pub fn find_roots_det<D: DetEval>(
    det: &D,
    region: &SearchRegion,
) -> Result<Vec<(Complex64, usize, usize)>> {
    let mut raw = Vec::new();
    // the outermost window is generous: boundary-zero retries may legally
    // pull lattice roots sitting exactly on the region edge inside
    let pad = 1e-3;
    let top_clip = Clip {
        re_min: region.re_min - pad,
        re_max: region.re_max + pad,
        im_min: region.im_min - pad,
        im_max: region.im_max + pad,
    };
    subdivide(det, region, &top_clip, 0, &mut raw)?;
    let mut merged: Vec<(Complex64, usize, usize)> = Vec::new();
    for (lam, mult, iters) in raw {
        if lam.norm() < ZERO_EXCLUSION {
            continue;
        }
        if let Some(hit) = merged
            .iter_mut()
            .find(|(l, _, _)| (*l - lam).norm() < DEDUP_TOL)
        {
            hit.1 += mult;
        } else {
            merged.push((lam, mult, iters));
        }
    }
    merged.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    Ok(merged)
}

/// Boundary-condition context for the monic reduction of `t`.
pub fn context_for(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
) -> Result<BCContext> {
    let monic = t.monic_reduction()?.tuple;
    let root = compute_standard_root(&monic)?;
    BCContext::build(&root, AngleConfig::new(alpha)?, bc)
}

/// Root count of `det M_{λ,α}` for the tuple in the region.
pub fn count_exponents(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    region: &SearchRegion,
) -> Result<usize> {
    let det = CtxDet {
        ctx: context_for(t, bc, alpha)?,
    };
    count_roots(&det, region)
}

/// All pencil eigenvalues of the tuple in the region, with residuals.
pub fn find_exponents(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    region: &SearchRegion,
) -> Result<Vec<ExponentRoot>> {
    let ctx = context_for(t, bc, alpha)?;
    let det = CtxDet { ctx };
    let found = find_roots_det(&det, region)?;
    let mut roots = Vec::with_capacity(found.len());
    for (lam, mult, iters) in found {
        let m = det.ctx.m(lam)?;
        // scale against M at probe points away from the root, not ‖M(λ)‖
        // itself: for ℓ = 1 the whole matrix vanishes at a root
        let mut scale = m.norm();
        for probe in [Complex64::new(0.37, 0.29), Complex64::new(-0.31, 0.41)] {
            if let Ok(mp) = det.ctx.m(lam + probe) {
                scale = scale.max(mp.norm());
            }
        }
        let residual = if scale < 1e-250 {
            0.0
        } else {
            smallest_singular_value(&m) / scale
        };
        if residual > ROOT_RESIDUAL_TOL {
            return Err(PencilError::ResidualTooLarge(residual));
        }
        roots.push(ExponentRoot {
            lambda: lam,
            alpha,
            bc,
            multiplicity: mult,
            residual,
            newton_iters: iters,
        });
    }
    Ok(roots)
}

/// Termination state of a traced branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchStatus {
    Complete,
    Merged,
    Lost,
}

/// One continuation curve `α ↦ λ(α)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchCurve {
    pub bc: BoundaryCondition,
    pub points: Vec<(f64, Complex64)>,
    pub status: BranchStatus,
}

/// Corrector with a loose convergence target, tolerant of the multiple roots
/// branches pass through at α ∈ {π, 2π}.
fn correct<D: DetEval>(det: &D, guess: Complex64) -> Result<Complex64> {
    let (lam, _) = newton_polish(det, guess, 1.0)?;
    // a corrector that wanders far from the predictor has left the branch
    if (lam - guess).norm() > 0.5 * guess.norm().max(1.0) {
        return Err(PencilError::NonConvergence);
    }
    Ok(lam)
}

/// Predictor–corrector continuation of several branches over a shared α
/// grid, with adaptive sub-stepping and merge detection.
pub fn trace_branches<FAC, D>(
    factory: &FAC,
    bc: BoundaryCondition,
    seeds: &[Complex64],
    alpha_start: f64,
    alpha_end: f64,
    steps: usize,
) -> Result<Vec<BranchCurve>>
where
    FAC: Fn(f64) -> Result<D>,
    D: DetEval,
{
    if steps == 0 || !(alpha_end > alpha_start) {
        return Err(PencilError::InvalidInput(
            "need alpha_end > alpha_start and steps >= 1".into(),
        ));
    }
    // validate seeds against the determinant at alpha_start
    let det0 = factory(alpha_start)?;
    let mut curves: Vec<BranchCurve> = Vec::new();
    let mut lambdas: Vec<Option<Complex64>> = Vec::new();
    for &s in seeds {
        let lam = correct(&det0, s)
            .map_err(|_| PencilError::SeedInvalid(format!("no root near {s} at alpha_start")))?;
        curves.push(BranchCurve {
            bc,
            points: vec![(alpha_start, lam)],
            status: BranchStatus::Complete,
        });
        lambdas.push(Some(lam));
    }
    let h = (alpha_end - alpha_start) / steps as f64;
    for k in 1..=steps {
        let alpha_k = alpha_start + h * k as f64;
        for (bi, slot) in lambdas.iter_mut().enumerate() {
            let Some(lam_prev) = *slot else { continue };
            let pts = &curves[bi].points;
            let slope = if pts.len() >= 2 {
                let (a2, l2) = pts[pts.len() - 1];
                let (a1, l1) = pts[pts.len() - 2];
                (l2 - l1) / (a2 - a1)
            } else {
                Complex64::new(0.0, 0.0)
            };
            // sub-step adaptively from the previous grid point
            let mut alpha_cur = alpha_k - h;
            let mut lam_cur = lam_prev;
            let mut sub_h = h;
            let mut lost = false;
            while alpha_cur < alpha_k - 1e-15 {
                let target = (alpha_cur + sub_h).min(alpha_k);
                let det = factory(target)?;
                let predict = lam_cur + slope * (target - alpha_cur);
                match correct(&det, predict) {
                    Ok(lam_new) => {
                        lam_cur = lam_new;
                        alpha_cur = target;
                        sub_h = (sub_h * 2.0).min(h);
                    }
                    Err(_) => {
                        sub_h *= 0.5;
                        if sub_h < h / (1 << 20) as f64 {
                            lost = true;
                            break;
                        }
                    }
                }
            }
            if lost {
                curves[bi].status = BranchStatus::Lost;
                *slot = None;
            } else {
                curves[bi].points.push((alpha_k, lam_cur));
                *slot = Some(lam_cur);
            }
        }
        // merge detection among live branches
        for i in 0..lambdas.len() {
            for j in (i + 1)..lambdas.len() {
                if let (Some(li), Some(lj)) = (lambdas[i], lambdas[j]) {
                    if (li - lj).norm() < DEDUP_TOL {
                        curves[j].status = BranchStatus::Merged;
                        lambdas[j] = None;
                    }
                }
            }
        }
    }
    Ok(curves)
}

/// Traces one branch of the tuple's exponent set from a seed root.
pub fn trace_branch(
    t: &EllipticTuple,
    seed: &ExponentRoot,
    alpha_end: f64,
    steps: usize,
) -> Result<BranchCurve> {
    if seed.residual > ROOT_RESIDUAL_TOL {
        return Err(PencilError::SeedInvalid(format!(
            "seed residual {:.3e} too large",
            seed.residual
        )));
    }
    let bc = seed.bc;
    let factory = |alpha: f64| -> Result<CtxDet> {
        Ok(CtxDet {
            ctx: context_for(t, bc, alpha)?,
        })
    };
    let mut curves = trace_branches(
        &factory,
        bc,
        &[seed.lambda],
        seed.alpha,
        alpha_end,
        steps,
    )?;
    Ok(curves.remove(0))
}

/// Pass/fail record of one root against the governing theorem clause.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootVerdict {
    pub lambda: Complex64,
    pub multiplicity: usize,
    pub clause: String,
    pub pass: bool,
}

/// Result of checking every root in a region against the exponent bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub bc: BoundaryCondition,
    pub alpha: f64,
    pub contractive: bool,
    pub roots: Vec<RootVerdict>,
    pub all_pass: bool,
}

const LATTICE_TOL: f64 = 1e-7;
const AXIS_TOL: f64 = 1e-6;

fn near_lattice(x: f64, offset: f64, step: f64, tol: f64) -> bool {
    let k = ((x - offset) / step).round();
    (x - offset - k * step).abs() <= tol
}

fn clause_for(
    bc: BoundaryCondition,
    regime: AngleRegime,
    contractive: bool,
    lambda: Complex64,
) -> (String, bool) {
    match bc {
        BoundaryCondition::Dirichlet => match regime {
            AngleRegime::SubPi => (
                "dirichlet i: |Re λ| > 1 for α < π".into(),
                lambda.re.abs() > 1.0 - LATTICE_TOL,
            ),
            AngleRegime::Pi => (
                "dirichlet ii: λ ∈ ℤ∖{0} at α = π".into(),
                lambda.im.abs() <= LATTICE_TOL
                    && near_lattice(lambda.re, 0.0, 1.0, LATTICE_TOL)
                    && lambda.norm() > 0.5,
            ),
            AngleRegime::SuperPi => (
                "dirichlet iii: |Re λ| > 1/2 for π < α < 2π".into(),
                lambda.re.abs() > 0.5 - LATTICE_TOL,
            ),
            AngleRegime::TwoPi => (
                "dirichlet iv: λ ∈ ½ℤ∖{0} at α = 2π".into(),
                lambda.im.abs() <= LATTICE_TOL
                    && near_lattice(lambda.re, 0.0, 0.5, LATTICE_TOL)
                    && lambda.norm() > 0.25,
            ),
        },
        BoundaryCondition::Mixed => {
            if contractive {
                match regime {
                    AngleRegime::SubPi => (
                        "mixed 1.i: |Re λ| > 1/2 for α < π".into(),
                        lambda.re.abs() > 0.5 - LATTICE_TOL,
                    ),
                    AngleRegime::Pi => (
                        "mixed 1.ii: Re λ ∈ ½ + ℤ at α = π".into(),
                        near_lattice(lambda.re, 0.5, 1.0, LATTICE_TOL),
                    ),
                    AngleRegime::SuperPi => (
                        "mixed 1.iii: |Re λ| > 1/4 for π < α < 2π".into(),
                        lambda.re.abs() > 0.25 - LATTICE_TOL,
                    ),
                    AngleRegime::TwoPi => (
                        "mixed 1.iv: Re λ ∈ ¼ + ½ℤ at α = 2π".into(),
                        near_lattice(lambda.re, 0.25, 0.5, LATTICE_TOL),
                    ),
                }
            } else {
                // without contractivity, roots violating the strip bound
                // must sit on the imaginary axis
                let (clause, interior_ok) = match regime {
                    AngleRegime::SubPi => (
                        "mixed 2.a: |Re λ| > 1/2 or Re λ = 0 for α < π",
                        lambda.re.abs() > 0.5 - LATTICE_TOL,
                    ),
                    AngleRegime::Pi => (
                        "mixed 2.b: Re λ ∈ ½ + ℤ or Re λ = 0 at α = π",
                        near_lattice(lambda.re, 0.5, 1.0, LATTICE_TOL),
                    ),
                    AngleRegime::SuperPi => (
                        "mixed 2.c: |Re λ| > 1/4 or Re λ = 0 for π < α < 2π",
                        lambda.re.abs() > 0.25 - LATTICE_TOL,
                    ),
                    AngleRegime::TwoPi => (
                        "mixed 2.c: Re λ ∈ ¼ + ½ℤ or Re λ = 0 at α = 2π",
                        near_lattice(lambda.re, 0.25, 0.5, LATTICE_TOL),
                    ),
                };
                (clause.into(), interior_ok || lambda.re.abs() <= AXIS_TOL)
            }
        }
        BoundaryCondition::Neumann => (
            "neumann: no strip bound asserted; root recorded".into(),
            true,
        ),
    }
}

/// Enumerates roots in the region and checks each against the applicable
/// exponent-bound clause for the boundary condition and angle regime.
pub fn verify_bounds(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    region: &SearchRegion,
) -> Result<BoundVerdict> {
    let report = crate::ellipticity::classify(t)?;
    if !report.strongly_elliptic {
        return Err(PencilError::NotElliptic(
            "exponent bounds apply to strongly elliptic tuples".into(),
        ));
    }
    let contractive = report.contractive_nwp.unwrap_or(false);
    let regime = AngleConfig::new(alpha)?.regime;
    let roots = find_exponents(t, bc, alpha, region)?;
    let mut verdicts = Vec::with_capacity(roots.len());
    let mut all_pass = true;
    for r in &roots {
        let (clause, pass) = clause_for(bc, regime, contractive, r.lambda);
        all_pass &= pass;
        verdicts.push(RootVerdict {
            lambda: r.lambda,
            multiplicity: r.multiplicity,
            clause,
            pass,
        });
    }
    Ok(BoundVerdict {
        bc,
        alpha,
        contractive,
        roots: verdicts,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_types::laplacian_tuple;
    use crate::RMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig1_tuple() -> EllipticTuple {
        EllipticTuple::new(
            RMatrix::from_row_slice(2, 2, &[5.0, 0.6, 0.6, 1.5]),
            RMatrix::from_row_slice(2, 2, &[0.25, -0.4, -0.4, -0.2]),
            RMatrix::identity(2, 2),
        )
        .unwrap()
    }

    #[test]
    fn count_laplacian_sine_roots() {
        let region = SearchRegion::new(1.0, 5.0, -1.0, 1.0).unwrap();
        let n = count_exponents(
            &laplacian_tuple(1),
            BoundaryCondition::Dirichlet,
            PI / 2.0,
            &region,
        )
        .unwrap();
        assert_eq!(n, 2); // λ = 2 and λ = 4
    }

    #[test]
    fn dirichlet_exclusion_strip_is_empty() {
        let region = SearchRegion::new(0.05, 0.95, -5.0, 5.0).unwrap();
        let n = count_exponents(&fig1_tuple(), BoundaryCondition::Dirichlet, 2.0, &region)
            .unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn mixed_half_line_count_at_pi() {
        let region = SearchRegion::new(0.3, 0.7, -10.0, 10.0).unwrap();
        let n =
            count_exponents(&fig1_tuple(), BoundaryCondition::Mixed, PI, &region).unwrap();
        assert_eq!(n, 2); // ℓ roots on the Re = 1/2 line
    }

    #[test]
    fn find_laplacian_roots() {
        let region = SearchRegion::new(0.5, 4.5, -1.0, 1.0).unwrap();
        let roots = find_exponents(
            &laplacian_tuple(1),
            BoundaryCondition::Dirichlet,
            PI / 2.0,
            &region,
        )
        .unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].lambda - c(2.0, 0.0)).norm() < 1e-9);
        assert!((roots[1].lambda - c(4.0, 0.0)).norm() < 1e-9);
        for r in &roots {
            assert_eq!(r.multiplicity, 1);
            assert!(r.residual <= ROOT_RESIDUAL_TOL);
        }
    }

    #[test]
    fn integer_lattice_at_pi_with_multiplicity() {
        let region = SearchRegion::new(0.6, 3.4, -5.0, 5.0).unwrap();
        let roots =
            find_exponents(&fig1_tuple(), BoundaryCondition::Dirichlet, PI, &region).unwrap();
        assert_eq!(roots.len(), 3);
        for (k, r) in roots.iter().enumerate() {
            assert!((r.lambda - c(k as f64 + 1.0, 0.0)).norm() < 1e-8);
            assert_eq!(r.multiplicity, 2);
        }
    }

    #[test]
    fn scalar_mixed_root_matches_bisection() {
        // tuple from V = -10 + i; mixed at α = π/2 reduces to Re(z^λ) = 0
        // with z = -10 + i
        let t = EllipticTuple::new(
            RMatrix::from_element(1, 1, 101.0),
            RMatrix::from_element(1, 1, 10.0),
            RMatrix::identity(1, 1),
        )
        .unwrap();
        let region = SearchRegion::new(0.05, 1.0, -0.5, 0.5).unwrap();
        let roots =
            find_exponents(&t, BoundaryCondition::Mixed, PI / 2.0, &region).unwrap();
        assert_eq!(roots.len(), 1);
        // scalar bisection oracle
        let z = c(-10.0, 1.0);
        let f = |lam: f64| (z.ln() * lam).exp().re;
        let (mut lo, mut hi) = (0.05, 1.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((roots[0].lambda - c(oracle, 0.0)).norm() < 1e-8);
        assert!(roots[0].lambda.im.abs() < 1e-9);
    }

    #[test]
    fn count_matches_multiplicity_sum() {
        for &(alpha, bc) in &[
            (PI, BoundaryCondition::Dirichlet),
            (2.0, BoundaryCondition::Mixed),
            (4.5, BoundaryCondition::Neumann),
        ] {
            let region = SearchRegion::new(0.6, 3.4, -4.0, 4.0).unwrap();
            let t = fig1_tuple();
            let n = count_exponents(&t, bc, alpha, &region).unwrap();
            let roots = find_exponents(&t, bc, alpha, &region).unwrap();
            let total: usize = roots.iter().map(|r| r.multiplicity).sum();
            assert_eq!(n, total, "bc = {bc}, alpha = {alpha}");
        }
    }

    #[test]
    fn conjugate_pairing_of_roots() {
        let region = SearchRegion::new(1.0, 3.0, -3.0, 3.0).unwrap();
        let roots =
            find_exponents(&fig1_tuple(), BoundaryCondition::Dirichlet, 4.5, &region).unwrap();
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(
                roots
                    .iter()
                    .any(|s| (s.lambda - r.lambda.conj()).norm() < 1e-7),
                "no conjugate partner for {}",
                r.lambda
            );
        }
    }

    #[test]
    fn trace_laplacian_branch_closed_form() {
        let t = laplacian_tuple(1);
        let region = SearchRegion::new(2.5, 3.5, -0.5, 0.5).unwrap();
        let seeds =
            find_exponents(&t, BoundaryCondition::Dirichlet, 1.0, &region).unwrap();
        assert_eq!(seeds.len(), 1); // λ = π at α = 1
        let curve = trace_branch(&t, &seeds[0], 2.0 * PI, 128).unwrap();
        assert_eq!(curve.status, BranchStatus::Complete);
        for (alpha, lam) in &curve.points {
            assert!(
                (lam - c(PI / alpha, 0.0)).norm() < 1e-8,
                "alpha = {alpha}: {lam} vs {}",
                PI / alpha
            );
        }
    }

    #[test]
    fn invalid_seed_rejected() {
        let t = laplacian_tuple(1);
        let seed = ExponentRoot {
            lambda: c(2.0, 0.0),
            alpha: 1.0,
            bc: BoundaryCondition::Dirichlet,
            multiplicity: 1,
            residual: 1.0,
            newton_iters: 0,
        };
        assert!(matches!(
            trace_branch(&t, &seed, 3.0, 16),
            Err(PencilError::SeedInvalid(_))
        ));
    }

    #[test]
    fn verify_dirichlet_strip() {
        let region = SearchRegion::new(-0.999, 0.999, -5.0, 5.0).unwrap();
        let v = verify_bounds(&fig1_tuple(), BoundaryCondition::Dirichlet, 2.0, &region)
            .unwrap();
        assert!(v.roots.is_empty());
        assert!(v.all_pass);
    }

    #[test]
    fn verify_mixed_half_lattice_at_pi() {
        let region = SearchRegion::new(-2.0, 2.0, -10.0, 10.0).unwrap();
        let v = verify_bounds(&fig1_tuple(), BoundaryCondition::Mixed, PI, &region).unwrap();
        assert!(v.contractive);
        assert!(!v.roots.is_empty());
        assert!(v.all_pass, "verdicts: {:?}", v.roots);
    }

    #[test]
    fn region_validation() {
        assert!(SearchRegion::new(1.0, 0.0, -1.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, 1.0, 1.0, -1.0).is_err());
    }
}
