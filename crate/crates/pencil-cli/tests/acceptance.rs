//! End-to-end acceptance checks, one test per criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them on success).

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use pencil_core::appendix_lab::{run_suite, LabSuite};
use pencil_core::ellipticity;
use pencil_core::exponent_solver::{count_exponents, find_exponents, ExponentRoot, SearchRegion};
use pencil_core::ode_oracle::cross_check;
use pencil_core::standard_root::compute_standard_root;
use pencil_core::{BoundaryCondition, EllipticTuple, RMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report<F: FnOnce() -> Result<String, String>>(criterion: usize, label: &str, f: F) {
    match f() {
        Ok(detail) => println!("criterion {criterion} ({label}): PASS — {detail}"),
        Err(e) => {
            println!("criterion {criterion} ({label}): FAIL — {e}");
            panic!("criterion {criterion} ({label}) failed: {e}");
        }
    }
}

fn fig1_tuple() -> EllipticTuple {
    EllipticTuple::new(
        RMatrix::from_row_slice(2, 2, &[5.0, 0.6, 0.6, 1.5]),
        RMatrix::from_row_slice(2, 2, &[0.25, -0.4, -0.4, -0.2]),
        RMatrix::identity(2, 2),
    )
    .unwrap()
}

fn fig2left_tuple() -> EllipticTuple {
    EllipticTuple::from_standard_root(
        &RMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]),
        &RMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
    )
    .unwrap()
}

fn random_symmetric(ell: usize, rng: &mut ChaCha8Rng, scale: f64) -> RMatrix {
    let mut m = RMatrix::zeros(ell, ell);
    for i in 0..ell {
        for j in i..ell {
            let x = rng.gen_range(-scale..scale);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn random_spd(ell: usize, rng: &mut ChaCha8Rng) -> RMatrix {
    let g = RMatrix::from_fn(ell, ell, |_, _| rng.gen_range(-1.0..1.0));
    g.transpose() * &g + RMatrix::identity(ell, ell) * 0.1
}

/// Seeded monic elliptic tuple; even seeds go through the root-form
/// construction, odd seeds draw matrices directly and shrink the cross term
/// until strong ellipticity holds.
fn random_elliptic(ell: usize, seed: u64) -> EllipticTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed % 2 == 0 {
        let s = random_symmetric(ell, &mut rng, 1.0);
        let d = random_spd(ell, &mut rng);
        return EllipticTuple::from_standard_root(&s, &d).unwrap();
    }
    let a11 = random_spd(ell, &mut rng);
    let mut a12 = random_symmetric(ell, &mut rng, 0.5);
    loop {
        if let Ok(t) = EllipticTuple::new(a11.clone(), a12.clone(), RMatrix::identity(ell, ell)) {
            if matches!(ellipticity::is_strongly_elliptic(&t), Ok((true, _))) {
                return t;
            }
        }
        a12 *= 0.5;
    }
}

#[test]
fn criterion_1_standard_root_correctness() {
    report(1, "standard-root correctness", || {
        let sizes = [1usize, 2, 3, 5];
        let start = Instant::now();
        let mut worst_res = 0.0_f64;
        for seed in 0..200u64 {
            let ell = sizes[(seed as usize) % sizes.len()];
            let t = random_elliptic(ell, 1000 + seed);
            let root = compute_standard_root(&t.monic_reduction().unwrap().tuple)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if root.residual > 1e-9 {
                return Err(format!("seed {seed}: residual {:.3e}", root.residual));
            }
            worst_res = worst_res.max(root.residual);
            let dmin = root.d.clone().symmetric_eigen().eigenvalues.min();
            if dmin <= 0.0 {
                return Err(format!("seed {seed}: D not positive definite ({dmin:.3e})"));
            }
            let asym = (&root.s - root.s.transpose()).norm();
            if asym > 1e-9 * root.s.norm().max(1.0) {
                return Err(format!("seed {seed}: S asymmetry {asym:.3e}"));
            }
        }
        let secs = start.elapsed().as_secs_f64();
        if secs >= 5.0 {
            return Err(format!("took {secs:.2}s (budget 5s)"));
        }
        Ok(format!(
            "200 tuples, worst residual {worst_res:.2e}, {secs:.2}s"
        ))
    });
}

/// Locates the root nearest a target inside a small box and returns its
/// distance to the target.
fn root_error(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    target: f64,
) -> Result<f64, String> {
    let region = SearchRegion::new(target - 0.063, target + 0.057, -0.061, 0.059)
        .map_err(|e| e.to_string())?;
    let roots = find_exponents(t, bc, alpha, &region)
        .map_err(|e| format!("{bc:?} alpha {alpha} target {target}: {e}"))?;
    roots
        .iter()
        .map(|r| (r.lambda - Complex64::new(target, 0.0)).norm())
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .ok_or_else(|| format!("{bc:?} alpha {alpha}: no root near {target}"))
}

#[test]
fn criterion_2_laplacian_closed_forms() {
    report(2, "Laplacian closed forms", || {
        let t = pencil_core::core_types::laplacian_tuple(1);
        let alphas = [PI / 3.0, PI / 2.0, 1.0, 2.0, PI, 5.0, 2.0 * PI];
        let mut worst = 0.0_f64;
        for &alpha in &alphas {
            for k in [-2i32, -1, 1, 2] {
                let lattice = k as f64 * PI / alpha;
                for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
                    let err = root_error(&t, bc, alpha, lattice)?;
                    if err > 1e-8 {
                        return Err(format!("{bc:?} alpha {alpha} k {k}: error {err:.3e}"));
                    }
                    worst = worst.max(err);
                }
                let mixed = PI / (2.0 * alpha) + lattice;
                let err = root_error(&t, BoundaryCondition::Mixed, alpha, mixed)?;
                if err > 1e-8 {
                    return Err(format!("Mixed alpha {alpha} k {k}: error {err:.3e}"));
                }
                worst = worst.max(err);
            }
        }
        Ok(format!(
            "7 angles x 4 lattice points x 3 BCs, worst error {worst:.2e}"
        ))
    });
}

fn lattice_check(
    roots: &[ExponentRoot],
    expected: &[f64],
    mult: usize,
    tol: f64,
) -> Result<(), String> {
    let mut seen = vec![false; expected.len()];
    for r in roots {
        let Some(idx) = expected
            .iter()
            .position(|&e| (r.lambda - Complex64::new(e, 0.0)).norm() <= tol)
        else {
            return Err(format!("unexpected root {}", r.lambda));
        };
        if r.multiplicity != mult {
            return Err(format!(
                "root {} has multiplicity {} (want {mult})",
                r.lambda, r.multiplicity
            ));
        }
        seen[idx] = true;
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(format!("missing root {}", expected[i]));
    }
    Ok(())
}

#[test]
fn criterion_3_integer_lattice_fig1() {
    report(3, "integer lattice at alpha = pi / 2 pi", || {
        let t = fig1_tuple();
        let region = SearchRegion::new(0.4871, 3.5137, -5.0137, 5.0137).unwrap();
        let at_pi = find_exponents(&t, BoundaryCondition::Dirichlet, PI, &region)
            .map_err(|e| e.to_string())?;
        lattice_check(&at_pi, &[1.0, 2.0, 3.0], 2, 1e-8).map_err(|e| format!("alpha=pi: {e}"))?;
        let at_2pi = find_exponents(&t, BoundaryCondition::Dirichlet, 2.0 * PI, &region)
            .map_err(|e| e.to_string())?;
        lattice_check(&at_2pi, &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5], 2, 1e-8)
            .map_err(|e| format!("alpha=2pi: {e}"))?;
        Ok(format!(
            "pi: {{1,2,3}} x2, 2pi: half-integers x2 ({} + {} roots)",
            at_pi.len(),
            at_2pi.len()
        ))
    });
}

#[test]
fn criterion_4_mixed_half_integer_lines() {
    report(4, "mixed half-integer lines", || {
        for (name, t) in [("fig1", fig1_tuple()), ("fig2left", fig2left_tuple())] {
            let region = SearchRegion::new(-1.9937, 1.9937, -9.9713, 9.9713).unwrap();
            for (alpha, offset, step) in [(PI, 0.5, 1.0), (2.0 * PI, 0.25, 0.5)] {
                let roots = find_exponents(&t, BoundaryCondition::Mixed, alpha, &region)
                    .map_err(|e| format!("{name} alpha {alpha}: {e}"))?;
                if roots.is_empty() {
                    return Err(format!("{name} alpha {alpha}: no mixed roots found"));
                }
                for r in &roots {
                    let k = ((r.lambda.re - offset) / step).round();
                    let dist = (r.lambda.re - (offset + k * step)).abs();
                    if dist > 1e-7 {
                        return Err(format!(
                            "{name} alpha {alpha}: root {} off the line by {dist:.3e}",
                            r.lambda
                        ));
                    }
                }
            }
            // exactly ell roots on the Re = 1/2 line at alpha = pi, |Im| <= 20
            let line = SearchRegion::new(0.4863, 0.5137, -20.0137, 20.0137).unwrap();
            let on_line = find_exponents(&t, BoundaryCondition::Mixed, PI, &line)
                .map_err(|e| format!("{name} line scan: {e}"))?;
            let total: usize = on_line.iter().map(|r| r.multiplicity).sum();
            if total != t.ell() {
                return Err(format!(
                    "{name}: {total} roots on Re=1/2 at alpha=pi (want ell={})",
                    t.ell()
                ));
            }
        }
        Ok("fig1 + fig2left, alpha in {pi, 2pi}, all roots on lines; ell roots on Re=1/2".into())
    });
}

fn random_contractive(ell: usize, seed: u64) -> EllipticTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = random_symmetric(ell, &mut rng, 0.6);
    let d = random_spd(ell, &mut rng);
    loop {
        let t = EllipticTuple::from_standard_root(&s, &d).unwrap();
        if matches!(ellipticity::contractive_nwp(&t), Ok((true, _))) {
            return t;
        }
        s *= 0.5;
    }
}

fn exclusion_count(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha: f64,
    re_lo: f64,
    re_hi: f64,
) -> Result<usize, String> {
    let attempt = |pad: f64| -> pencil_core::Result<usize> {
        let region = SearchRegion::new(re_lo + pad, re_hi - pad, -10.0 + pad, 10.0 - pad)?;
        count_exponents(t, bc, alpha, &region)
    };
    // a boundary-zero verdict may be rerun once on a slightly shrunk window
    attempt(0.0)
        .or_else(|_| attempt(7.3e-4))
        .map_err(|e| format!("{bc:?} alpha {alpha} [{re_lo}, {re_hi}]: {e}"))
}

#[test]
fn criterion_5_bound_exclusion() {
    report(5, "exponent-free zones for contractive tuples", || {
        let sizes = [1usize, 2, 3, 5];
        let mut tested = 0usize;
        for seed in 0..50u64 {
            let ell = sizes[(seed as usize) % sizes.len()];
            let t = random_contractive(ell, 5000 + seed);
            for alpha in [1.0, 2.0, 2.5] {
                for (bc, lo, hi) in [
                    (BoundaryCondition::Mixed, -0.499, -0.001),
                    (BoundaryCondition::Mixed, 0.001, 0.499),
                    (BoundaryCondition::Dirichlet, -0.999, -0.001),
                    (BoundaryCondition::Dirichlet, 0.001, 0.999),
                ] {
                    let n = exclusion_count(&t, bc, alpha, lo, hi)?;
                    if n != 0 {
                        return Err(format!(
                            "seed {seed} {bc:?} alpha {alpha} [{lo}, {hi}]: count {n}"
                        ));
                    }
                    tested += 1;
                }
            }
        }
        Ok(format!("{tested} rectangles, all counts zero"))
    });
}

#[test]
fn criterion_6_noncontractive_dichotomy() {
    report(6, "imaginary-axis root for non-contractive tuple", || {
        // scale the fig2left S until the commutator radius passes 2
        let d = RMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let base = RMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]);
        let mut tuple = None;
        for c in [2.0, 3.0, 4.0, 6.0, 10.0] {
            let t = EllipticTuple::from_standard_root(&(&base * c), &d).unwrap();
            let report = ellipticity::classify(&t).map_err(|e| e.to_string())?;
            if report.commutator_radius.unwrap_or(0.0) > 2.0 {
                tuple = Some((c, t, report.commutator_radius.unwrap()));
                break;
            }
        }
        let (c, t, rho) = tuple.ok_or("no scale pushed the commutator radius past 2")?;
        // track the smallest-|Re| mixed root over alpha and bisect its
        // axis crossing
        let near_axis = |alpha: f64| -> Result<Complex64, String> {
            // jittered window bounds: a root can land on a contour edge
            let mut last = String::new();
            for (re, im_lo, im_hi) in
                [(0.45, 0.0137, 50.0), (0.4531, 0.0141, 49.9713), (0.4463, 0.0129, 50.0241)]
            {
                let region =
                    SearchRegion::new(-re, re, im_lo, im_hi).map_err(|e| e.to_string())?;
                match find_exponents(&t, BoundaryCondition::Mixed, alpha, &region) {
                    Ok(roots) => {
                        return roots
                            .iter()
                            .map(|r| r.lambda)
                            .min_by(|a, b| a.re.abs().partial_cmp(&b.re.abs()).unwrap())
                            .ok_or_else(|| format!("alpha {alpha}: no mixed root in the strip"));
                    }
                    Err(e) => last = e.to_string(),
                }
            }
            Err(format!("alpha {alpha}: {last}"))
        };
        let (mut a_lo, mut a_hi) = (1.2_f64, 2.9_f64);
        let (mut f_lo, f_hi) = (near_axis(a_lo)?.re, near_axis(a_hi)?.re);
        if f_lo.signum() == f_hi.signum() {
            return Err(format!(
                "no sign change of Re over alpha in [{a_lo}, {a_hi}] ({f_lo:.3}, {f_hi:.3})"
            ));
        }
        let mut root = Complex64::new(f_lo, 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (a_lo + a_hi);
            root = near_axis(mid)?;
            if root.re.abs() <= 1e-6 {
                if !(root.im.abs() > 0.0 && root.im.abs() <= 50.0) {
                    return Err(format!("axis root {root} has Im outside (0, 50]"));
                }
                return Ok(format!(
                    "S x {c} gives rho = {rho:.3} > 2; root {root} at alpha = {mid:.6} < pi"
                ));
            }
            if root.re.signum() == f_lo.signum() {
                a_lo = mid;
                f_lo = root.re;
            } else {
                a_hi = mid;
            }
        }
        Err(format!("bisection stalled at Re = {:.3e}", root.re))
    });
}

#[test]
fn criterion_7_oracle_equivalence() {
    report(7, "algebraic vs ODE oracle equivalence", || {
        let t = fig1_tuple();
        let start = Instant::now();
        let mut matched = 0usize;
        for alpha in [2.0, 4.5] {
            for bc in [
                BoundaryCondition::Dirichlet,
                BoundaryCondition::Mixed,
                BoundaryCondition::Neumann,
            ] {
                let region = if bc == BoundaryCondition::Mixed {
                    SearchRegion::new(-1.9937, 2.9871, -2.9713, 2.9713).unwrap()
                } else {
                    SearchRegion::new(0.0137, 2.9871, -2.9713, 2.9713).unwrap()
                };
                let roots = find_exponents(&t, bc, alpha, &region)
                    .map_err(|e| format!("{bc:?} alpha {alpha}: solve: {e}"))?;
                let rep = cross_check(&t, bc, alpha, &roots, Some(&region))
                    .map_err(|e| format!("{bc:?} alpha {alpha}: cross-check: {e}"))?;
                if !rep.ok {
                    return Err(format!("{bc:?} alpha {alpha}: oracle disagreement"));
                }
                if rep.oracle_count != Some(rep.algebraic_count) {
                    return Err(format!(
                        "{bc:?} alpha {alpha}: oracle count {:?} != algebraic {}",
                        rep.oracle_count, rep.algebraic_count
                    ));
                }
                matched += rep.matches.len();
            }
        }
        let secs = start.elapsed().as_secs_f64();
        if secs >= 60.0 {
            return Err(format!("took {secs:.1}s (budget 60s)"));
        }
        Ok(format!(
            "6 configurations, {matched} roots matched bijectively, {secs:.1}s"
        ))
    });
}

/// Real mixed root of the scalar tuple with root `V` at angle `alpha`,
/// computed independently of the solver: the mixed condition for the scalar
/// solution `Im((cos φ + V sin φ)^λ)` reduces to `Re(Z^λ) = 0` with
/// `Z = cos α + V sin α`, i.e. `cos(λ arg Z) = 0`, bisected on the real axis.
fn scalar_mixed_real_root(v: Complex64, alpha: f64) -> Result<f64, String> {
    let theta = (Complex64::new(alpha.cos(), 0.0) + v * alpha.sin()).arg();
    let g = |lam: f64| (lam * theta).cos();
    let (mut lo, mut hi) = (0.0, 0.0);
    let mut prev = g(0.051);
    for i in 1..300 {
        let lam = 0.051 + 1.5 * i as f64 / 299.0;
        let cur = g(lam);
        if prev.signum() != cur.signum() {
            lo = 0.051 + 1.5 * (i - 1) as f64 / 299.0;
            hi = lam;
            break;
        }
        prev = cur;
    }
    if hi == 0.0 {
        return Err(format!("no sign change on (0.05, 1.55) at alpha {alpha}"));
    }
    let mut f_lo = g(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = g(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[test]
fn criterion_8_optimality_sequence() {
    report(8, "scalar optimality sequence", || {
        let alpha = PI / 2.0;
        let mut values = Vec::new();
        for k in [1.0_f64, 10.0, 100.0] {
            let t = EllipticTuple::from_standard_root(
                &RMatrix::from_element(1, 1, -k),
                &RMatrix::from_element(1, 1, 1.0),
            )
            .unwrap();
            let lam = scalar_mixed_real_root(Complex64::new(-k, 1.0), alpha)?;
            // the solver must agree with the bisection value
            let region = SearchRegion::new(lam - 0.0137, lam + 0.0141, -0.0137, 0.0141)
                .map_err(|e| e.to_string())?;
            let solver = find_exponents(&t, BoundaryCondition::Mixed, alpha, &region)
                .map_err(|e| format!("k {k}: {e}"))?;
            let agree = solver
                .iter()
                .any(|r| (r.lambda - Complex64::new(lam, 0.0)).norm() <= 1e-6);
            if !agree {
                return Err(format!("k {k}: solver does not confirm bisection root {lam}"));
            }
            values.push(lam);
        }
        if !(values[0] > values[1] && values[1] > values[2]) {
            return Err(format!("sequence not strictly decreasing: {values:?}"));
        }
        if (values[2] - 0.5).abs() > 0.02 {
            return Err(format!("k=100 root {} not within 0.02 of 1/2", values[2]));
        }
        Ok(format!(
            "roots {:.6}, {:.6}, {:.6} decreasing toward 1/2",
            values[0], values[1], values[2]
        ))
    });
}

#[test]
fn criterion_9_appendix_suites() {
    report(9, "randomized lemma suites", || {
        let mut summary_line = String::new();
        for suite in [
            LabSuite::NumRange,
            LabSuite::Accretive,
            LabSuite::Kt,
            LabSuite::Mix2,
        ] {
            let s = run_suite(suite, 20260823, 100).map_err(|e| format!("{suite:?}: {e}"))?;
            if s.fail != 0 {
                return Err(format!("{suite:?}: {} failures: {:?}", s.fail, s.failures));
            }
            if s.inconclusive > 2 {
                return Err(format!(
                    "{suite:?}: inconclusive rate {}/100 exceeds 2%",
                    s.inconclusive
                ));
            }
            summary_line.push_str(&format!("{suite:?} {}p/{}i ", s.pass, s.inconclusive));
        }
        Ok(format!("100 instances per suite: {summary_line}"))
    });
}

fn read_branch_csv(path: &std::path::Path) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(format!("{}: bad row '{line}'", path.display()));
        }
        let alpha: f64 = cols[1].parse().map_err(|e| format!("{line}: {e}"))?;
        let re: f64 = cols[2].parse().map_err(|e| format!("{line}: {e}"))?;
        out.push((alpha, re));
    }
    Ok(out)
}

fn run_figure(preset: &str, dir: &std::path::Path) -> Result<Vec<String>, String> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_pencil"))
        .args([
            "figure",
            preset,
            "--steps",
            "96",
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "figure {preset} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let reply: serde_json::Value =
        serde_json::from_slice(&out.stdout).map_err(|e| format!("stdout not JSON: {e}"))?;
    Ok(reply["files"]
        .as_array()
        .ok_or("missing files list")?
        .iter()
        .map(|f| f.as_str().unwrap_or_default().to_string())
        .collect())
}

#[test]
fn criterion_10_figure_reproduction() {
    report(10, "figure presets", || {
        let dir = std::env::temp_dir().join(format!("pencil-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        // fig1: mixed curve strictly below Dirichlet and Neumann everywhere
        let files = run_figure("fig1", &dir)?;
        let mut lowest: std::collections::BTreeMap<&str, std::collections::BTreeMap<u64, f64>> =
            Default::default();
        for f in &files {
            let bc = ["dirichlet", "mixed", "neumann"]
                .into_iter()
                .find(|b| f.contains(b))
                .ok_or_else(|| format!("unrecognized file {f}"))?;
            for (alpha, re) in read_branch_csv(&dir.join(f))? {
                let key = alpha.to_bits();
                let slot = lowest.entry(bc).or_default().entry(key).or_insert(re);
                *slot = slot.min(re);
            }
        }
        let mixed = &lowest["mixed"];
        let mut compared = 0usize;
        for (bc, curve) in [&lowest["dirichlet"], &lowest["neumann"]]
            .iter()
            .zip(["dirichlet", "neumann"])
            .map(|(c, n)| (n, c))
        {
            for (key, re) in curve.iter() {
                let Some(m) = mixed.get(key) else { continue };
                if !(m < re) {
                    return Err(format!(
                        "mixed {m} not below {bc} {re} at alpha {}",
                        f64::from_bits(*key)
                    ));
                }
                compared += 1;
            }
        }
        // fig2left: a Neumann point with |Re| < 1/2 strictly inside (pi, 2pi)
        let files2 = run_figure("fig2left", &dir)?;
        let mut found = None;
        for f in &files2 {
            for (alpha, re) in read_branch_csv(&dir.join(f))? {
                if alpha > PI + 1e-9 && alpha < 2.0 * PI - 1e-9 && re.abs() < 0.5 {
                    found = Some((alpha, re));
                }
            }
        }
        let (a, re) =
            found.ok_or("fig2left has no Neumann point with |Re| < 1/2 inside (pi, 2pi)")?;
        let _ = std::fs::remove_dir_all(&dir);
        Ok(format!(
            "fig1 mixed below both curves at {compared} samples; fig2left reaches Re = {re:.4} at alpha = {a:.4}"
        ))
    });
}
