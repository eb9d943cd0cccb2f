//! Serialization helpers: 17-significant-digit CSV and JSON reports with
//! attached manifests.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use pencil_core::{PencilError, Result};

use crate::manifest::RunManifest;

/// Formats a double with 17 significant digits so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one branch-trace CSV: `branch_id, alpha, re_lambda, im_lambda,
/// residual`, `\n` line endings, header row mandatory.
pub fn write_branch_csv<W: Write>(
    w: W,
    rows: &[(usize, f64, f64, f64, f64)],
) -> std::io::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["branch_id", "alpha", "re_lambda", "im_lambda", "residual"])?;
    for &(id, alpha, re, im, res) in rows {
        wtr.write_record([
            id.to_string(),
            fmt_f64(alpha),
            fmt_f64(re),
            fmt_f64(im),
            fmt_f64(res),
        ])?;
    }
    wtr.flush()
}

/// Prints a JSON report with its manifest to stdout.
pub fn emit_report(mut manifest: RunManifest, key: &str, body: impl serde::Serialize) {
    manifest.finish();
    let out = serde_json::json!({
        "manifest": manifest,
        key: body,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable report"));
}

/// Writes `<path>` and a sibling `<path>.manifest.json`.
pub fn write_with_manifest(
    path: &Path,
    contents: &[u8],
    manifest: &RunManifest,
) -> Result<()> {
    let io = |e: std::io::Error| PencilError::InvalidInput(format!("{}: {e}", path.display()));
    File::create(path).and_then(|mut f| f.write_all(contents)).map_err(io)?;
    let mpath = manifest_path(path);
    let body = serde_json::to_vec_pretty(manifest).expect("serializable manifest");
    File::create(&mpath)
        .and_then(|mut f| f.write_all(&body))
        .map_err(|e| PencilError::InvalidInput(format!("{}: {e}", mpath.display())))?;
    Ok(())
}

pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".manifest.json");
    os.into()
}
