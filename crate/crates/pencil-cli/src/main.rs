//! Command-line front end for the plane-angle singular exponent solver.
//!
//! Subcommands expose the library's stages: `classify` (ellipticity ladder),
//! `root` (standard root), `det` (boundary determinant), `exponents`
//! (argument-principle root search), `trace` (branch continuation), `verify`
//! (theorem bound checks), `oracle`/`crosscheck` (ODE route), `lab`
//! (randomized lemma suites), and `figure` (built-in branch presets).
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
//! failure. Errors are emitted as JSON on stderr.

mod commands;
mod manifest;
mod output;

use clap::Parser;

fn main() {
    let code = match commands::Cli::try_parse() {
        Ok(cli) => commands::run(cli),
        Err(e) => {
            if e.use_stderr() {
                eprintln!(
                    "{}",
                    serde_json::json!({"error": e.to_string(), "kind": "usage", "exit": 2})
                );
                2
            } else {
                // --help / --version go to stdout with success
                print!("{e}");
                0
            }
        }
    };
    std::process::exit(code);
}
