use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use torus_core::catalog;
use torus_core::codes::{absolute_pairing, construction_a, same_weight_distribution, LinearCode};
use torus_core::congruence::{integral_equivalence, Equivalence};
use torus_core::exact_linalg::parse_rat;
use torus_core::forms::{gram, poisson_check, representation_numbers, EnumerationDomain, LatticeBasis, QuadraticForm};
use torus_core::modular::certify_isospectral;
use torus_core::reduction::schiemann_reduce;
use torus_core::symphony::{run_with, IterationStats, RunOptions};

#[derive(Parser)]
#[command(name = "torus", version, about = "Exact tools for the isospectral problem of flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Full,
    Zstar,
}

#[derive(Subcommand)]
enum Command {
    /// Representation numbers up to a bound.
    Rep {
        /// Form {"dim","Q"} or basis {"dim","A"} JSON.
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        tmax: String,
        #[arg(long, value_enum, default_value = "full")]
        domain: Domain,
    },
    /// Schiemann-reduced coefficient vector of a ternary form.
    Reduce {
        #[arg(long)]
        form: PathBuf,
    },
    /// Integral equivalence search.
    Equiv {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Modular-form isospectrality certificate.
    Certify {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Linear codes over Z/qZ.
    Code {
        /// Modulus; required unless the generator file is a code object.
        #[arg(long)]
        q: Option<u64>,
        /// JSON list of generators, or {"q","n","generators"}.
        #[arg(long)]
        gens: PathBuf,
        #[command(subcommand)]
        action: CodeAction,
    },
    /// Named examples.
    Catalog {
        #[arg(long, required_unless_present = "list")]
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Numeric Poisson summation check.
    Poisson {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Primal radius; defaults to sqrt(160 t).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Covering refinement for ternary forms.
    Symphony {
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        max_iter: u64,
        /// Worker threads; TORUS_SYMPHONY_JOBS takes precedence.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// Per-iteration CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Directory for per-iteration cone dumps.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct PairArgs {
    #[arg(long, requires = "q2", conflicts_with = "pair")]
    q1: Option<PathBuf>,
    #[arg(long, requires = "q1")]
    q2: Option<PathBuf>,
    /// Catalog name, or a file written by `catalog`.
    #[arg(long, required_unless_present = "q1")]
    pair: Option<String>,
}

#[derive(Subcommand)]
enum CodeAction {
    /// Basis of the inverse image of the code in Z^n.
    ConstructionA,
    /// Weight distribution comparison.
    Weights {
        #[arg(long)]
        other: PathBuf,
    },
    /// Absolute-value pairing between two codes.
    Pairing {
        #[arg(long)]
        other: PathBuf,
    },
}

fn read_json(path: &Path) -> Result<(String, Value)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v = serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))?;
    Ok((text, v))
}

fn typed<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).with_context(|| format!("{}: invalid input", path.display()))
}

/// A form, or the Gram form of a basis.
fn load_form(path: &Path) -> Result<QuadraticForm> {
    let (text, v) = read_json(path)?;
    if v.get("Q").is_some() {
        typed(path, &text)
    } else if v.get("A").is_some() {
        Ok(gram(&typed::<LatticeBasis>(path, &text)?))
    } else {
        bail!("{}: expected an object with \"Q\" or \"A\"", path.display())
    }
}

fn form_of(v: &Value) -> Result<QuadraticForm> {
    if v.get("Q").is_some() {
        Ok(serde_json::from_value(v.clone())?)
    } else {
        Ok(gram(&serde_json::from_value::<LatticeBasis>(v.clone())?))
    }
}

fn load_pair(args: &PairArgs) -> Result<(QuadraticForm, QuadraticForm)> {
    if let (Some(a), Some(b)) = (&args.q1, &args.q2) {
        return Ok((load_form(a)?, load_form(b)?));
    }
    let name = args.pair.as_deref().ok_or_else(|| anyhow!("no input pair"))?;
    let v = if Path::new(name).is_file() {
        read_json(Path::new(name))?.1
    } else {
        serde_json::to_value(catalog::get(name)?)?
    };
    match (v.get("kind").and_then(Value::as_str), v.get("payload")) {
        (Some("FormPair" | "LatticePair"), Some(Value::Array(p))) if p.len() == 2 => {
            Ok((form_of(&p[0]).context(name.to_string())?, form_of(&p[1]).context(name.to_string())?))
        }
        _ => bail!("{name}: not a form or lattice pair"),
    }
}

fn load_code(path: &Path, q: Option<u64>) -> Result<LinearCode> {
    let (text, v) = read_json(path)?;
    match v {
        Value::Object(_) => {
            let c: LinearCode = typed(path, &text)?;
            if q.is_some_and(|q| q != c.q) {
                bail!("{}: modulus {} differs from --q", path.display(), c.q);
            }
            Ok(c)
        }
        _ => {
            let gens: Vec<Vec<i64>> = typed(path, &text)?;
            let q = q.ok_or_else(|| anyhow!("--q is required for a bare generator list"))?;
            let n = gens.first().map_or(0, Vec::len);
            Ok(LinearCode::new(q, n, &gens)?)
        }
    }
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct IterationLine {
    iteration: usize,
    active_cones: usize,
    solo_cones: u64,
}

fn symphony(max_iter: u64, jobs: u64, stats: Option<PathBuf>, dump: Option<PathBuf>) -> Result<()> {
    let jobs = match std::env::var("TORUS_SYMPHONY_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(j) if j >= 1 => j,
            _ => bail!("TORUS_SYMPHONY_JOBS must be a positive integer, got {v:?}"),
        },
        Err(_) => jobs as usize,
    };
    let opts = RunOptions { max_iter: max_iter as usize, jobs, dump_dir: dump };
    let mut csv = match &stats {
        Some(p) => {
            let mut w = csv::Writer::from_path(p).with_context(|| format!("creating {}", p.display()))?;
            w.write_record(["iteration", "elapsed_ms", "active_cones", "solo_cones"])?;
            Some(w)
        }
        None => None,
    };
    let mut failed = None;
    let (report, _) = run_with(&opts, |st: &IterationStats| {
        if let Some(w) = csv.as_mut() {
            let row = [st.iteration.to_string(), st.elapsed_ms.to_string(), st.active_cones.to_string(), st.solo_cones.to_string()];
            if let Err(e) = w.write_record(&row).and_then(|_| w.flush().map_err(Into::into)) {
                failed.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    // Timings go to the CSV only so stdout does not depend on --jobs.
    let lines: Vec<IterationLine> = report
        .iterations
        .iter()
        .map(|s| IterationLine { iteration: s.iteration, active_cones: s.active_cones, solo_cones: s.solo_cones })
        .collect();
    print(&json!({
        "iterations": lines,
        "terminated": report.terminated,
        "all_diagonal": report.all_diagonal,
        "cones_computed": report.cones_computed,
        "retune_fallbacks": report.retune_fallbacks,
    }))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Rep { form, tmax, domain } => {
            let q = load_form(&form)?;
            let t = parse_rat(&tmax)?;
            if !t.is_positive() {
                bail!("--tmax must be positive");
            }
            let d = match domain {
                Domain::Full => EnumerationDomain::full(),
                Domain::Zstar => EnumerationDomain::zstar(),
            };
            print(&representation_numbers(&q, &t, d)?)
        }
        Command::Reduce { form } => {
            let q = load_form(&form)?;
            if q.dim() != 3 {
                bail!("reduce needs a ternary form, got dimension {}", q.dim());
            }
            print(&schiemann_reduce(&q)?)
        }
        Command::Equiv { pair } => {
            let (a, b) = load_pair(&pair)?;
            match integral_equivalence(&a, &b)? {
                Equivalence::Equivalent(w) => print(&json!({"equivalent": true, "witness": w.b})),
                Equivalence::NotEquivalent => print(&json!({"equivalent": false})),
            }
        }
        Command::Certify { pair } => {
            let (a, b) = load_pair(&pair)?;
            print(&certify_isospectral(&a, &b)?)
        }
        Command::Code { q, gens, action } => {
            let c = load_code(&gens, q)?;
            match action {
                CodeAction::ConstructionA => print(&construction_a(&c)?),
                CodeAction::Weights { other } => {
                    let d = load_code(&other, Some(c.q))?;
                    print(&json!({"same_weight_distribution": same_weight_distribution(&c, &d)?}))
                }
                CodeAction::Pairing { other } => {
                    let d = load_code(&other, Some(c.q))?;
                    match absolute_pairing(&c, &d)? {
                        Some(p) => print(&json!({"paired": true, "pairing": p})),
                        None => print(&json!({"paired": false})),
                    }
                }
            }
        }
        Command::Catalog { name, list } => {
            if list {
                for n in catalog::NAMES {
                    println!("{n}");
                }
                return Ok(());
            }
            print(&catalog::get(name.as_deref().unwrap_or_default())?)
        }
        Command::Poisson { basis, t, radius } => {
            let (text, _) = read_json(&basis)?;
            let b: LatticeBasis = typed(&basis, &text)?;
            let r = radius.unwrap_or_else(|| (160.0 * t).sqrt());
            print(&poisson_check(&b, t, r)?)
        }
        Command::Symphony { max_iter, jobs, stats, dump } => symphony(max_iter, jobs, stats, dump),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
