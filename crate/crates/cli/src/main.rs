use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use wobbly_core::basecurve::{CurveFile, DivisorFile, HyperellipticCurve, QuadDifferential, QuadFile};
use wobbly_core::spectral::{build_spectral, divisor_ct_from_file, DivisorCt};
use wobbly_core::wobblylab::{self, SCHEMA};
use wobbly_core::WobblyError;

#[derive(Parser)]
#[command(name = "wobbly", version, about = "Wobbly and very stable bundles from spectral data over F_p")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the direct image of O(D̃).
    Classify {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value_t = 8)]
        effort: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample random effective divisors of a fixed degree.
    Survey {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        degree: i64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        effort: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for a singular wobbly point in |D̃|.
    Singular {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value_t = 8)]
        effort: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissible component indices.
    Spectrum {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        lambda: i64,
    },
    /// Brill-Noether numbers on the spectral curve.
    Bn {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        r: i64,
        #[arg(long)]
        degree: i64,
    },
    /// Run the invariant suite on the standard curves over three primes.
    Check {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<WobblyError> for Failure {
    fn from(e: WobblyError) -> Self {
        match e {
            WobblyError::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(curve: &Path, q: &Path) -> Result<(HyperellipticCurve, QuadDifferential), Failure> {
    let c = read_json::<CurveFile>(curve)?.to_curve()?;
    let q = read_json::<QuadFile>(q)?.to_quad(&c)?;
    Ok((c, q))
}

fn load_divisor(c: &HyperellipticCurve, q: &QuadDifferential, path: &Path) -> Result<DivisorCt, Failure> {
    let s = build_spectral(c, q)?;
    Ok(divisor_ct_from_file(&s, &read_json::<DivisorFile>(path)?)?)
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Invariant(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Classify { curve, q, divisor, effort, seed, out } => {
            let (c, q) = load(&curve, &q)?;
            let d = load_divisor(&c, &q, &divisor)?;
            emit(&wobblylab::classify(&c, &q, &d, effort, seed)?, out.as_deref())
        }
        Cmd::Survey { curve, q, degree, trials, seed, effort, out } => {
            let (c, q) = load(&curve, &q)?;
            emit(&wobblylab::survey(&c, &q, degree, trials, seed, effort)?, out.as_deref())
        }
        Cmd::Singular { curve, q, divisor, effort, out } => {
            let (c, q) = load(&curve, &q)?;
            let d = load_divisor(&c, &q, &divisor)?;
            emit(&wobblylab::detect_singular(&c, &q, &d, effort)?, out.as_deref())
        }
        Cmd::Spectrum { genus, lambda } => {
            if genus < 2 || !(0..=1).contains(&lambda) {
                return Err(Failure::Input("need genus >= 2 and lambda in {0, 1}".into()));
            }
            let ks = wobblylab::component_spectrum(genus, lambda);
            emit(&json!({ "schema": SCHEMA, "genus": genus, "lambda": lambda, "components": ks }), None)
        }
        Cmd::Bn { genus, r, degree } => {
            if genus < 2 || r < 1 {
                return Err(Failure::Input("need genus >= 2 and r >= 1".into()));
            }
            let b = wobblylab::bn_numbers(genus, r, degree);
            emit(&json!({ "schema": SCHEMA, "numbers": b }), None)
        }
        Cmd::Check { trials, seed, out } => {
            if trials == 0 {
                return Err(Failure::Input("trials must be positive".into()));
            }
            let ledgers = wobblylab::check_all(trials, seed)?;
            for l in &ledgers {
                for e in &l.checks {
                    let mark = if e.ok() { "pass" } else { "FAIL" };
                    eprintln!("p={} g={} {mark} {} ({}/{}, {} skipped)", l.curve.p, l.curve.genus, e.name, e.passed, e.instances, e.skipped);
                }
            }
            // the pass pattern must not depend on the prime
            let consistent = [2, 3].iter().all(|&g| {
                let mut it = ledgers.iter().filter(|l| l.curve.genus == g).map(|l| l.outcome());
                let first = it.next();
                it.all(|o| Some(o) == first)
            });
            let all = ledgers.iter().all(|l| l.all_passed);
            emit(&json!({ "schema": SCHEMA, "consistent_across_primes": consistent, "all_passed": all, "ledgers": ledgers }), out.as_deref())?;
            if all && consistent {
                Ok(())
            } else {
                Err(Failure::Invariant("invariant suite failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant failure: {m}");
            ExitCode::from(3)
        }
    }
}
