//! Subcommand definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use pencil_core::appendix_lab::{run_suite, LabSuite};
use pencil_core::bc_matrices::det_m;
use pencil_core::ellipticity;
use pencil_core::exponent_solver::{
    context_for, find_exponents, trace_branches, verify_bounds, BranchCurve, CtxDet, SearchRegion,
};
use pencil_core::matfun::{smallest_singular_value, spectrum};
use pencil_core::ode_oracle::{boundary_log_det, cross_check, PencilCoefficients};
use pencil_core::standard_root::compute_standard_root;
use pencil_core::{
    BoundaryCondition, EllipticTuple, PencilError, RMatrix, Result, TupleInput,
};

use crate::manifest::RunManifest;
use crate::output;

#[derive(Parser)]
#[command(name = "pencil", version, about = "Singular exponents for plane-angle elliptic systems")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Dirichlet,
    Mixed,
    Neumann,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Dirichlet => BoundaryCondition::Dirichlet,
            BcArg::Mixed => BoundaryCondition::Mixed,
            BcArg::Neumann => BoundaryCondition::Neumann,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Numrange,
    Accretive,
    Kt,
    Mix2,
}

impl From<SuiteArg> for LabSuite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Numrange => LabSuite::NumRange,
            SuiteArg::Accretive => LabSuite::Accretive,
            SuiteArg::Kt => LabSuite::Kt,
            SuiteArg::Mix2 => LabSuite::Mix2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig1,
    Fig2left,
    Fig2right,
}

/// Rectangular search window in the λ plane.
#[derive(Args)]
struct RegionArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.0137)]
    re_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.4871)]
    re_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -9.9713)]
    im_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 9.9713)]
    im_max: f64,
}

impl RegionArgs {
    fn to_region(&self) -> Result<SearchRegion> {
        SearchRegion::new(self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ellipticity ladder report: strongly elliptic, Neumann well-posed,
    /// contractive, formally positive, with margins and κ.
    Classify { tuple: PathBuf },
    /// Standard root V = (S + iI)D with residual and spectrum.
    Root { tuple: PathBuf },
    /// Boundary determinant det M at one λ: (log|det|, arg).
    Det {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true)]
        im: f64,
    },
    /// All exponents in a rectangle via the argument principle.
    Exponents {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Predictor-corrector continuation of branches over an α interval (CSV).
    Trace {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha_start: f64,
        #[arg(long)]
        alpha_end: f64,
        #[arg(long, default_value_t = 128)]
        steps: usize,
        /// Seed window at α = alpha-start.
        #[command(flatten)]
        region: RegionArgs,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks every root in the window against the governing theorem bound.
    Verify {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// ODE-route boundary determinant at one λ: (log|det|, arg).
    Oracle {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true)]
        im: f64,
    },
    /// Agreement report between the algebraic solver and the ODE oracle.
    Crosscheck {
        tuple: PathBuf,
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Randomized lemma suite (numerical range / accretivity / K_t / tangent).
    Lab {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Built-in branch presets reproducing the reference curves.
    Figure {
        #[arg(value_enum)]
        preset: PresetArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
}

pub fn run(cli: Cli) -> i32 {
    if let Err(msg) = check_thread_env() {
        eprintln!("{}", serde_json::json!({"error": msg, "kind": "input", "exit": 2}));
        return 2;
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                serde_json::json!({"error": e.to_string(), "kind": error_kind(&e), "exit": code})
            );
            code
        }
    }
}

/// PENCIL_THREADS caps worker count; all current paths are single-threaded,
/// so the value is validated and recorded but spawns nothing.
fn check_thread_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var("PENCIL_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| format!("PENCIL_THREADS must be a positive integer, got '{v}'")),
    }
}

fn exit_code(e: &PencilError) -> i32 {
    use PencilError::*;
    match e {
        DimensionMismatch(_) | NotSymmetric(_) | NotPositiveDefinite(_) | NotMonic
        | NotElliptic(_) | InvalidInput(_) | SeedInvalid(_) => 2,
        Mismatch(_) => 1,
        _ => 3,
    }
}

fn error_kind(e: &PencilError) -> &'static str {
    match exit_code(e) {
        1 => "verification",
        2 => "input",
        _ => "numerical",
    }
}

fn load_tuple(path: &PathBuf) -> Result<EllipticTuple> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", path.display())))?;
    let input: TupleInput = serde_json::from_str(&text)
        .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", path.display())))?;
    input.to_tuple()
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Classify { tuple } => {
            let t = load_tuple(&tuple)?;
            let manifest = RunManifest::begin("classify", tuple.to_str());
            let report = ellipticity::classify(&t)?;
            output::emit_report(manifest, "report", report);
            Ok(0)
        }
        Command::Root { tuple } => {
            let t = load_tuple(&tuple)?;
            let manifest = RunManifest::begin("root", tuple.to_str());
            let root = compute_standard_root(&t)?;
            let sigma = spectrum(&root.v)?;
            let body = serde_json::json!({
                "V": root.v, "C": root.c, "D": root.d, "S": root.s,
                "residual": root.residual, "spectrum": sigma,
            });
            output::emit_report(manifest, "root", body);
            Ok(0)
        }
        Command::Det { tuple, bc, alpha, re, im } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let mut manifest = RunManifest::begin("det", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha", alpha);
            manifest.param("lambda", [re, im]);
            let ctx = context_for(&t, bc, alpha)?;
            let (log_abs, arg) = det_m(&ctx, Complex64::new(re, im), bc)?;
            output::emit_report(
                manifest,
                "det",
                serde_json::json!({"log_abs_det": log_abs, "arg_det": arg}),
            );
            Ok(0)
        }
        Command::Exponents { tuple, bc, alpha, region } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let reg = region.to_region()?;
            let mut manifest = RunManifest::begin("exponents", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha", alpha);
            manifest.param("region", reg);
            let roots = find_exponents(&t, bc, alpha, &reg)?;
            output::emit_report(manifest, "roots", roots);
            Ok(0)
        }
        Command::Trace { tuple, bc, alpha_start, alpha_end, steps, region, out } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let reg = region.to_region()?;
            let mut manifest = RunManifest::begin("trace", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha_start", alpha_start);
            manifest.param("alpha_end", alpha_end);
            manifest.param("steps", steps);
            manifest.param("seed_region", reg);
            let curves = trace_tuple(&t, bc, alpha_start, alpha_end, steps, &reg)?;
            let rows = branch_rows(&t, bc, &curves)?;
            let mut buf = Vec::new();
            output::write_branch_csv(&mut buf, &rows)
                .map_err(|e| PencilError::InvalidInput(format!("csv: {e}")))?;
            manifest.finish();
            match out {
                Some(path) => output::write_with_manifest(&path, &buf, &manifest)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            Ok(0)
        }
        Command::Verify { tuple, bc, alpha, region } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let reg = region.to_region()?;
            let mut manifest = RunManifest::begin("verify", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha", alpha);
            manifest.param("region", reg);
            let verdict = verify_bounds(&t, bc, alpha, &reg)?;
            let pass = verdict.all_pass;
            output::emit_report(manifest, "verdict", verdict);
            Ok(if pass { 0 } else { 1 })
        }
        Command::Oracle { tuple, bc, alpha, re, im } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let mut manifest = RunManifest::begin("oracle", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha", alpha);
            manifest.param("lambda", [re, im]);
            let pc = PencilCoefficients::new(&t);
            let (log_abs, arg) = boundary_log_det(&pc, bc, alpha, Complex64::new(re, im))?;
            output::emit_report(
                manifest,
                "det",
                serde_json::json!({"log_abs_det": log_abs, "arg_det": arg}),
            );
            Ok(0)
        }
        Command::Crosscheck { tuple, bc, alpha, region } => {
            let t = load_tuple(&tuple)?;
            let bc: BoundaryCondition = bc.into();
            let reg = region.to_region()?;
            let mut manifest = RunManifest::begin("crosscheck", tuple.to_str());
            manifest.param("bc", bc);
            manifest.param("alpha", alpha);
            manifest.param("region", reg);
            let roots = find_exponents(&t, bc, alpha, &reg)?;
            let report = cross_check(&t, bc, alpha, &roots, Some(&reg))?;
            let ok = report.ok;
            output::emit_report(manifest, "crosscheck", report);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Lab { suite, seed, count } => {
            let suite: LabSuite = suite.into();
            let mut manifest = RunManifest::begin("lab", None);
            manifest.param("suite", suite);
            manifest.param("count", count);
            manifest.seed = Some(seed);
            let summary = run_suite(suite, seed, count)?;
            let ok = summary.all_passed();
            output::emit_report(manifest, "summary", summary);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Figure { preset, out_dir, steps } => figure(preset, &out_dir, steps),
    }
}

fn trace_tuple(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    alpha_start: f64,
    alpha_end: f64,
    steps: usize,
    seed_region: &SearchRegion,
) -> Result<Vec<BranchCurve>> {
    let seeds: Vec<Complex64> = find_exponents(t, bc, alpha_start, seed_region)?
        .iter()
        .map(|r| r.lambda)
        .collect();
    if seeds.is_empty() {
        return Err(PencilError::SeedInvalid(
            "no roots in the seed window at alpha_start".into(),
        ));
    }
    let factory = |alpha: f64| -> Result<CtxDet> {
        Ok(CtxDet {
            ctx: context_for(t, bc, alpha)?,
        })
    };
    trace_branches(&factory, bc, &seeds, alpha_start, alpha_end, steps)
}

/// Flattens curves into CSV rows, recomputing the per-point relative residual
/// σmin(M(λ)) / max ‖M‖ over nearby probes.
fn branch_rows(
    t: &EllipticTuple,
    bc: BoundaryCondition,
    curves: &[BranchCurve],
) -> Result<Vec<(usize, f64, f64, f64, f64)>> {
    let mut rows = Vec::new();
    for (id, curve) in curves.iter().enumerate() {
        for &(alpha, lam) in &curve.points {
            let ctx = context_for(t, bc, alpha)?;
            let m = ctx.m(lam)?;
            let scale = [
                Complex64::new(0.37, 0.29),
                Complex64::new(-0.31, 0.41),
            ]
            .iter()
            .map(|&off| ctx.m(lam + off).map(|p| p.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(m.norm(), f64::max);
            let residual = smallest_singular_value(&m) / scale.max(f64::MIN_POSITIVE);
            rows.push((id, alpha, lam.re, lam.im, residual));
        }
    }
    Ok(rows)
}

fn fig1_tuple() -> Result<EllipticTuple> {
    EllipticTuple::new(
        RMatrix::from_row_slice(2, 2, &[5.0, 0.6, 0.6, 1.5]),
        RMatrix::from_row_slice(2, 2, &[0.25, -0.4, -0.4, -0.2]),
        RMatrix::identity(2, 2),
    )
}

fn fig2left_tuple() -> Result<EllipticTuple> {
    EllipticTuple::from_standard_root(
        &RMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]),
        &RMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
    )
}

fn fig2right_tuple() -> Result<EllipticTuple> {
    // scalar standard root V = -10 + i
    EllipticTuple::from_standard_root(
        &RMatrix::from_element(1, 1, -10.0),
        &RMatrix::from_element(1, 1, 1.0),
    )
}

fn figure(preset: PresetArg, out_dir: &PathBuf, steps: usize) -> Result<i32> {
    use std::f64::consts::PI;
    let (name, t, bcs, a0, a1, seed_region): (
        &str,
        EllipticTuple,
        Vec<BoundaryCondition>,
        f64,
        f64,
        SearchRegion,
    ) = match preset {
        PresetArg::Fig1 => (
            "fig1",
            fig1_tuple()?,
            vec![
                BoundaryCondition::Dirichlet,
                BoundaryCondition::Mixed,
                BoundaryCondition::Neumann,
            ],
            1.0,
            2.0 * PI,
            SearchRegion::new(0.0137, 3.4871, -5.0, 5.0)?,
        ),
        PresetArg::Fig2left => (
            "fig2left",
            fig2left_tuple()?,
            vec![BoundaryCondition::Neumann],
            PI,
            2.0 * PI,
            SearchRegion::new(0.0137, 3.4871, -5.0, 5.0)?,
        ),
        PresetArg::Fig2right => (
            "fig2right",
            fig2right_tuple()?,
            vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
            PI,
            2.0 * PI,
            SearchRegion::new(0.0137, 1.4871, -5.0, 5.0)?,
        ),
    };
    std::fs::create_dir_all(out_dir)
        .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", out_dir.display())))?;
    let mut manifest = RunManifest::begin("figure", None);
    manifest.param("preset", name);
    manifest.param("steps", steps);
    manifest.param("alpha_range", [a0, a1]);
    let mut files = Vec::new();
    for bc in bcs {
        let curves = trace_tuple(&t, bc, a0, a1, steps, &seed_region)?;
        for (id, curve) in curves.iter().enumerate() {
            let rows = branch_rows(&t, bc, std::slice::from_ref(curve))?
                .into_iter()
                .map(|(_, a, re, im, res)| (id, a, re, im, res))
                .collect::<Vec<_>>();
            let mut buf = Vec::new();
            output::write_branch_csv(&mut buf, &rows)
                .map_err(|e| PencilError::InvalidInput(format!("csv: {e}")))?;
            let fname = format!("{name}_{}_branch{id}.csv", bc_slug(bc));
            let path = out_dir.join(&fname);
            std::fs::write(&path, &buf)
                .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", path.display())))?;
            files.push(fname);
        }
    }
    manifest.param("files", &files);
    manifest.finish();
    let mpath = out_dir.join(format!("{name}.manifest.json"));
    std::fs::write(
        &mpath,
        serde_json::to_vec_pretty(&manifest).expect("serializable manifest"),
    )
    .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", mpath.display())))?;
    println!(
        "{}",
        serde_json::json!({"manifest": mpath.display().to_string(), "files": files})
    );
    Ok(0)
}

fn bc_slug(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Dirichlet => "dirichlet",
        BoundaryCondition::Mixed => "mixed",
        BoundaryCondition::Neumann => "neumann",
    }
}
