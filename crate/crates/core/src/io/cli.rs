//! The `graphmfd` command line.
//!
//! Exit codes: 0 on success, 1 for parse or validation failures (and a
//! negative `isocheck`), 2 when reduction ends in a diagnosis, 64 for usage
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::canon::{isomorphic, signature};
use crate::graph::{validate, GraphStructure};
use crate::io::gen::{generate, GenParams, Mix};
use crate::io::gsf::{parse, serialize};
use crate::orbifold::format_rational;
use crate::reduce::{reduce, Policy, ReduceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DIAGNOSIS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "graphmfd",
    version,
    about = "Graph structures on open 3-manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a GSF file and list every violation.
    Validate { file: PathBuf },
    /// Print the thin type and Euler characteristic of every piece.
    Classify { file: PathBuf },
    /// Reduce a structure and print the result as GSF.
    Reduce {
        file: PathBuf,
        /// `smallest` or `seed=N`.
        #[arg(long, default_value = "smallest")]
        policy: Policy,
        /// Write one move per line to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the canonical signature as hex.
    Canon { file: PathBuf },
    /// Exit 0 iff the two structures are isomorphic.
    Isocheck { a: PathBuf, b: PathBuf },
    /// Print a random valid structure.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pieces: usize,
        #[arg(long, default_value_t = 0)]
        rays: usize,
        /// Mostly T²×I chains between thick pieces.
        #[arg(long)]
        chain_heavy: bool,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load(path: &Path) -> Result<GraphStructure, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_valid(path: &Path) -> Result<GraphStructure, String> {
    let g = load(path)?;
    validate(&g).map_err(|vs| {
        let lines: Vec<String> = vs.iter().map(ToString::to_string).collect();
        format!(
            "{}: invalid structure\n{}",
            path.display(),
            lines.join("\n")
        )
    })?;
    Ok(g)
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match cmd {
        Command::Validate { file } => {
            let g = load(&file)?;
            match validate(&g) {
                Ok(()) => {
                    writeln!(out, "valid").map_err(io)?;
                    Ok(EXIT_OK)
                }
                Err(vs) => {
                    for v in vs {
                        writeln!(out, "{v}").map_err(io)?;
                    }
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Classify { file } => {
            let g = load(&file)?;
            for (id, p) in g.pieces() {
                let kind = p.classify().map_err(|e| format!("{id}: {e}"))?;
                let chi = format_rational(&p.euler_contribution());
                writeln!(out, "{id}\t{kind}\tchi={chi}").map_err(io)?;
            }
            for (id, r) in g.rays() {
                let kind = if r.is_product() { "ProductRay" } else { "Ray" };
                writeln!(out, "{id}\t{kind}\tperiod={}", r.period.len()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Reduce {
            file,
            policy,
            trace,
        } => {
            let g = load(&file)?;
            match reduce(&g, &policy) {
                Ok(r) => {
                    if let Some(path) = trace {
                        let mut text = String::new();
                        for m in &r.trace {
                            text.push_str(&m.to_string());
                            text.push('\n');
                        }
                        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    }
                    write!(out, "{}", serialize(&r.reduced)).map_err(io)?;
                    Ok(EXIT_OK)
                }
                Err(ReduceError::Diagnosis(d)) => {
                    writeln!(out, "{d}").map_err(io)?;
                    Ok(EXIT_DIAGNOSIS)
                }
                Err(ReduceError::Invalid(vs)) => {
                    for v in vs {
                        writeln!(err, "{v}").map_err(io)?;
                    }
                    Ok(EXIT_FAILURE)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Canon { file } => {
            let g = load_valid(&file)?;
            writeln!(out, "{}", signature(&g)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Isocheck { a, b } => {
            let (ga, gb) = (load_valid(&a)?, load_valid(&b)?);
            match isomorphic(&ga, &gb) {
                Some(iso) => {
                    writeln!(out, "isomorphic").map_err(io)?;
                    for (x, y) in iso.pieces.iter().chain(&iso.edges).chain(&iso.rays) {
                        writeln!(out, "{x} -> {y}").map_err(io)?;
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(out, "not isomorphic").map_err(io)?;
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Gen {
            seed,
            pieces,
            rays,
            chain_heavy,
        } => {
            let mut params = GenParams::new(seed, pieces).with_rays(rays);
            if chain_heavy {
                params = params.with_mix(Mix::chain_heavy());
            }
            match generate(&params) {
                Ok(g) => {
                    write!(out, "{}", serialize(&g)).map_err(io)?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(err, "error: {e}").map_err(io)?;
                    Ok(EXIT_USAGE)
                }
            }
        }
    }
}
