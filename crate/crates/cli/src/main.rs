use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmlab_core::exec::Exec;
use dmlab_core::localmodels::verify_model;
use dmlab_core::quotient::{all_rho_stars, verify_injectivity, verify_y_identities, InjectivityConfig};
use dmlab_core::strata::{self, build_a_ell, build_a_ell_real, kind_counts};
use dmlab_core::trees::enumerate_trees;
use dmlab_core::verify::{verify_basis, verify_cr_relations, verify_real_slice};
use dmlab_core::{marks, Error};
use serde_json::{json, Value};

const MAX_L_COMPLEX: usize = 10;
const MAX_L_REAL: usize = 6;
const PRESETS: [&str; 3] = ["real3", "complex2", "aug31"];

#[derive(Parser, Debug)]
#[command(name = "dm-lab", version, about = "Exact verification suites for moduli of marked rational curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate dual trees up to isomorphism.
    Trees(Opts),
    /// List the boundary index set with kinds.
    Strata(Opts),
    /// Blowup order with step types.
    Schedule(Opts),
    /// Cross-ratio symmetry and cocycle relations.
    VerifyCr(Opts),
    /// Chart reconstruction against curve cross ratios (and the real slice with --real).
    VerifyBasis(Opts),
    /// Quotient class keys against the relation closure, and Y identities.
    VerifyQuotient(Opts),
    /// Local blowup models: transitions, cocycle, relation tables.
    VerifyLocalmodels(LocalOpts),
    /// Every suite; exit status is the conjunction.
    All(Opts),
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Number of conjugate pairs with --real, of marks otherwise.
    #[arg(long, default_value_t = 5)]
    l: usize,
    #[arg(long)]
    real: bool,
    /// Sample count; each suite has its own default.
    #[arg(long)]
    samples: Option<usize>,
    /// Coefficient bound for sampled Gaussian rationals.
    #[arg(long, default_value_t = 10)]
    bound: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lift the size guardrails on l.
    #[arg(long)]
    max_l_override: bool,
}

#[derive(Args, Debug, Clone)]
struct LocalOpts {
    #[command(flatten)]
    opts: Opts,
    /// One of real3, complex2, aug31; all three when absent.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(s) => write!(f, "{s}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

/// A suite result: its JSON body and whether it passed.
struct Section {
    body: Value,
    passed: bool,
}

fn section(body: Value, passed: bool) -> Section {
    Section { body, passed }
}

fn exec() -> Exec {
    if cfg!(feature = "parallel") {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn guard(o: &Opts) -> Result<(), Failure> {
    let max = if o.real { MAX_L_REAL } else { MAX_L_COMPLEX };
    if o.l > max && !o.max_l_override {
        return Err(Failure::Usage(format!(
            "l = {} exceeds the {} guardrail of {max}; pass --max-l-override to run anyway",
            o.l,
            if o.real { "real" } else { "complex" }
        )));
    }
    if o.bound < 1 {
        return Err(Failure::Usage("--bound must be at least 1".into()));
    }
    Ok(())
}

fn config(name: &str, o: &Opts, samples: Option<usize>) -> Value {
    json!({
        "command": name,
        "l": o.l,
        "real": o.real,
        "samples": samples,
        "bound": o.bound,
        "seed": o.seed,
        "tolerance": "exact",
    })
}

fn trees(o: &Opts) -> Result<Section, Failure> {
    let ts = enumerate_trees(o.l, o.real)?;
    let body = json!({"count": ts.len(), "trees": ts.iter().map(|t| t.to_json()).collect::<Vec<_>>()});
    Ok(section(body, true))
}

fn strata_report(o: &Opts) -> Result<Section, Failure> {
    if o.real {
        if o.l < 2 {
            return Err(Error::TooFewMarks(o.l).into());
        }
        let (pm, labels) = build_a_ell_real(o.l);
        let [h, e, d1, d2, d3] = kind_counts(&labels);
        let body = json!({
            "a_pm": pm.len(),
            "labels": labels.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "kinds": {"H": h, "E": e, "D1": d1, "D2": d2, "D3": d3},
            "distinct_boundary_divisors": strata::distinct_boundary_divisors(o.l),
        });
        Ok(section(body, true))
    } else {
        if o.l < 3 {
            return Err(Error::TooFewMarks(o.l).into());
        }
        let labels = build_a_ell(o.l);
        let body = json!({
            "count": labels.len(),
            "labels": labels.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        });
        Ok(section(body, true))
    }
}

fn schedule(o: &Opts) -> Result<Section, Failure> {
    Ok(section(strata::schedule(o.l, o.real)?.to_json(), true))
}

fn verify_cr(o: &Opts, n: usize) -> Result<Section, Failure> {
    let r = verify_cr_relations(n, o.bound, o.seed, exec())?;
    Ok(section(r.to_json(), r.passed()))
}

fn verify_basis_report(o: &Opts, n: usize) -> Result<Section, Failure> {
    let r = verify_basis(o.l, o.real, n, o.bound, o.seed, exec())?;
    if !o.real {
        return Ok(section(r.to_json(), r.passed()));
    }
    let s = verify_real_slice(o.l, n, o.bound, o.seed, exec())?;
    let passed = r.passed() && s.passed();
    Ok(section(json!({"basis": r.to_json(), "real_slice": s.to_json()}), passed))
}

fn verify_quotient(o: &Opts, n: usize) -> Result<Section, Failure> {
    let mut runs = Vec::new();
    let mut passed = true;
    for rho_star in all_rho_stars(o.l, o.real) {
        let cfg = InjectivityConfig {
            l: o.l,
            real: o.real,
            rho_star,
            bases_per_tree: 2,
            reps: 2,
            random: n,
            bound: o.bound,
            seed: o.seed,
        };
        let inj = verify_injectivity(&cfg, exec())?;
        let y = verify_y_identities(&cfg, exec())?;
        passed &= inj.passed() && y.passed();
        runs.push(json!({
            "rho_star": rho_star.map(|r| marks::labels(r, o.real)),
            "injectivity": inj.to_json(),
            "y_identities": y.to_json(),
        }));
    }
    Ok(section(json!({"runs": runs}), passed))
}

fn verify_localmodels(o: &Opts, preset: Option<&str>, n: usize) -> Result<Section, Failure> {
    let names: Vec<&str> = match preset {
        Some(p) if PRESETS.contains(&p) => vec![p],
        Some(p) => return Err(Failure::Usage(format!("unknown preset {p}; expected one of {}", PRESETS.join(", ")))),
        None => PRESETS.to_vec(),
    };
    let mut reports = Vec::new();
    let mut passed = true;
    for name in names {
        let r = verify_model(name, n, o.bound, o.seed, exec())?;
        passed &= r.passed();
        reports.push(r.to_json());
    }
    Ok(section(json!({"presets": reports}), passed))
}

fn all(o: &Opts) -> Result<Section, Failure> {
    let parts = [
        ("verify-cr", verify_cr(o, o.samples.unwrap_or(1000))?),
        ("verify-basis", verify_basis_report(o, o.samples.unwrap_or(50))?),
        ("verify-quotient", verify_quotient(o, o.samples.unwrap_or(1000))?),
        ("verify-localmodels", verify_localmodels(o, None, o.samples.unwrap_or(500))?),
    ];
    let passed = parts.iter().all(|(_, s)| s.passed);
    let body: serde_json::Map<String, Value> =
        parts.into_iter().map(|(k, s)| (k.to_string(), json!({"passed": s.passed, "report": s.body}))).collect();
    Ok(section(Value::Object(body), passed))
}

fn dispatch(cmd: &Command) -> Result<(Value, bool, Option<PathBuf>), Failure> {
    let (name, o, samples, sec) = match cmd {
        Command::Trees(o) => ("trees", o, None, None),
        Command::Strata(o) => ("strata", o, None, None),
        Command::Schedule(o) => ("schedule", o, None, None),
        Command::VerifyCr(o) => ("verify-cr", o, Some(o.samples.unwrap_or(1000)), None),
        Command::VerifyBasis(o) => ("verify-basis", o, Some(o.samples.unwrap_or(50)), None),
        Command::VerifyQuotient(o) => ("verify-quotient", o, Some(o.samples.unwrap_or(1000)), None),
        Command::VerifyLocalmodels(lo) => {
            ("verify-localmodels", &lo.opts, Some(lo.opts.samples.unwrap_or(500)), lo.preset.as_deref())
        }
        Command::All(o) => ("all", o, o.samples, None),
    };
    guard(o)?;
    let s = match cmd {
        Command::Trees(_) => trees(o)?,
        Command::Strata(_) => strata_report(o)?,
        Command::Schedule(_) => schedule(o)?,
        Command::VerifyCr(_) => verify_cr(o, samples.unwrap_or_default())?,
        Command::VerifyBasis(_) => verify_basis_report(o, samples.unwrap_or_default())?,
        Command::VerifyQuotient(_) => verify_quotient(o, samples.unwrap_or_default())?,
        Command::VerifyLocalmodels(_) => verify_localmodels(o, sec, samples.unwrap_or_default())?,
        Command::All(_) => all(o)?,
    };
    let report = json!({
        "v": 1,
        "config": config(name, o, samples),
        "passed": s.passed,
        "report": s.body,
    });
    Ok((report, s.passed, o.out.clone()))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn set_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("DM_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("DM_LAB_THREADS must be a positive integer, got {v:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    set_threads()?;
    let (report, passed, out) = dispatch(&cli.command)?;
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    match out {
        Some(p) => {
            write_atomic(&p, &text)?;
            eprintln!("{}: {}", p.display(), if passed { "passed" } else { "FAILED" });
        }
        None => print!("{text}"),
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dm-lab: {e}");
            ExitCode::from(2)
        }
    }
}
