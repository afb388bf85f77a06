//! `mubd`: command-line front end for the mub-delsarte library.
//!
//! Exit status is 0 when every check passes, 1 when checks ran and failed,
//! and 2 for usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mub_delsarte::constructions::{
    self, fourier_matrix, prime_mubs, prime_power_mubs, sidon_row_system, sidon_search, sidon_verify, SidonSet,
};
use mub_delsarte::hadamard::{
    self, detect_grid_order, family_to_points, is_hadamard, matrix_from_json, row_quotient_check, FamilyFile, MubFamily,
};
use mub_delsarte::lp::{
    self, build_orbits, build_pseudo_mub_lp, extract_dual_witness, pseudo_mub_check, solve_lp, RoundProgress, SolveOptions,
    Strategy, Symmetry,
};
use mub_delsarte::lp_format::write_lp;
use mub_delsarte::numfmt::{to_json_pretty, Num17};
use mub_delsarte::torus::{self, enumerate_grid};
use mub_delsarte::witness::{self, check_point_set, delsarte_bound, expand_h, trig_from_json, TrigPolynomialJson};
use serde::Serialize;
use serde_json::{json, Value};

const DEFAULT_SIDON_NODES: u64 = 50_000_000;
const MAX_GRID_ORDER: u32 = 64;

#[derive(Parser)]
#[command(name = "mubd", version, about = "Mutually unbiased bases: constructions, Delsarte bounds and pseudo-MUB programs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Numerical tolerance for floating-point checks.
    #[arg(long, global = true, env = "MUBD_EPS", default_value_t = torus::DEFAULT_EPS)]
    eps: f64,
    /// Largest number of grid points to enumerate.
    #[arg(long, global = true, env = "MUBD_BUDGET", default_value_t = torus::DEFAULT_GRID_BUDGET)]
    budget: u64,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true, env = "MUBD_THREADS")]
    threads: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Prime,
    PrimePower,
    Fourier,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    /// Negation only.
    Negation,
    /// Negation and coordinate permutations.
    Permutations,
    /// Permutations plus the phase shift.
    Shift,
}

impl From<SymmetryArg> for Symmetry {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Negation => Symmetry::negation_only(),
            SymmetryArg::Permutations => Symmetry::default(),
            SymmetryArg::Shift => Symmetry::with_shift(),
        }
    }
}

#[derive(Args)]
struct LpArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: u32,
    /// Symmetry group used to reduce the program.
    #[arg(long, value_enum, default_value = "permutations")]
    symmetry: SymmetryArg,
}

#[derive(Subcommand)]
enum Command {
    /// Build a complete MUB family and write it as a family file.
    Construct {
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Verify a family file (or a single matrix file).
    Verify { file: PathBuf },
    /// Classify the points of the m-grid (CSV by default).
    Grid {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: u32,
    },
    /// Expand the canonical witness and report its bound.
    Witness {
        #[arg(long)]
        d: usize,
        /// Also check the witness on the allowed points of this grid.
        #[arg(long)]
        m: Option<u32>,
        /// Omit the coefficient list from the output.
        #[arg(long)]
        summary: bool,
    },
    /// Compute both sides of the bound for the points of a family file.
    Bound { file: PathBuf },
    /// Find or check a Sidon set modulo d² and its row system.
    Sidon {
        #[arg(long)]
        d: u32,
        /// Check these residues instead of searching, e.g. 0,1,3,8,23,27.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<i64>>,
        /// Search node budget.
        #[arg(long, env = "MUBD_SIDON_NODES", default_value_t = DEFAULT_SIDON_NODES)]
        nodes: u64,
    },
    /// Solve the pseudo-MUB program on the m-grid.
    Lp {
        #[command(flatten)]
        lp: LpArgs,
        /// Feasibility tolerance for the constraints.
        #[arg(long, env = "MUBD_EPS_FEAS", default_value_t = lp::DEFAULT_EPS_FEAS)]
        eps_feas: f64,
        /// Total simplex pivot budget.
        #[arg(long, env = "MUBD_MAX_ITERATIONS", default_value_t = lp::DEFAULT_MAX_ITERATIONS)]
        max_iterations: usize,
        /// Constraints added per round.
        #[arg(long, default_value_t = lp::DEFAULT_BATCH)]
        batch: usize,
        /// Use every constraint from the start.
        #[arg(long)]
        eager: bool,
        /// Directory for resumable checkpoints.
        #[arg(long, env = "MUBD_CHECKPOINT_DIR")]
        checkpoint_dir: Option<PathBuf>,
        /// Write the validated dual witness here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Print one progress line per round to standard error (on by default for m >= 12).
        #[arg(long)]
        progress: bool,
        /// Suppress progress lines.
        #[arg(long, conflicts_with = "progress")]
        quiet: bool,
    },
    /// Check the conditions of a complete pseudo-MUB system.
    PseudoCheck {
        /// Grid function as a polynomial file, or a family file with --family.
        file: PathBuf,
        #[arg(long)]
        d: usize,
        /// Treat the input as a family file and check its difference function.
        #[arg(long)]
        family: bool,
    },
    /// Write the pseudo-MUB program in LP text format.
    ExportLp {
        #[command(flatten)]
        lp: LpArgs,
    },
}

struct Outcome {
    body: String,
    passed: bool,
}

fn render<T: Serialize>(value: &T, format: Format, passed: bool) -> Result<Outcome> {
    let body = match format {
        Format::Json => to_json_pretty(value)?,
        Format::Text => text_summary(&serde_json::to_value(value)?),
        Format::Csv => bail!("CSV output is not available for this command"),
    };
    Ok(Outcome { body, passed })
}

/// Top-level scalars as `key: value` lines; nested values are summarized.
fn text_summary(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            let s = match x {
                Value::Array(a) => format!("[{} items]", a.len()),
                Value::Object(o) => format!("{{{} fields}}", o.len()),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {s}\n"));
        }
    } else {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_family(path: &Path, eps: f64) -> Result<MubFamily> {
    let file: FamilyFile =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a family file", path.display()))?;
    Ok(file.to_family(eps)?)
}

fn family_points(family: &MubFamily, eps: f64) -> Result<Vec<torus::TorusPoint>> {
    let snap = detect_grid_order(family, MAX_GRID_ORDER, eps);
    Ok(family_to_points(family, snap, eps)?)
}

fn cmd_construct(d: u32, kind: Kind, g: &Global) -> Result<Outcome> {
    let mut params = serde_json::Map::new();
    let (family, name) = match kind {
        Kind::Prime => {
            if !constructions::is_prime(d) {
                bail!("{d} is not prime");
            }
            params.insert("p".into(), json!(d));
            (prime_mubs(d)?, "prime")
        }
        Kind::PrimePower => {
            let Some((p, k)) = constructions::prime_power_decomposition(d) else {
                bail!("{d} is not a prime power");
            };
            params.insert("p".into(), json!(p));
            params.insert("k".into(), json!(k));
            (prime_power_mubs(p, k)?, "prime-power")
        }
        Kind::Fourier => {
            if d == 0 {
                bail!("dimension must be positive");
            }
            params.insert("n".into(), json!(d));
            (MubFamily::new(d as usize, vec![fourier_matrix(d as usize)])?, "fourier")
        }
    };
    let report = family.verify(g.eps)?;
    if !report.passes {
        eprintln!("verification failed: max violation {:e}", report.max_violation());
    }
    render(&FamilyFile::new(&family, name, params), g.format.unwrap_or(Format::Json), report.passes)
}

fn cmd_verify(path: &Path, g: &Global) -> Result<Outcome> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let format = g.format.unwrap_or(Format::Json);
    if value.get("manifest").is_some() {
        let file: FamilyFile = serde_json::from_value(value)?;
        let matrices = file
            .matrices
            .iter()
            .map(|m| hadamard::ComplexMatrix::try_from(m.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let individual = matrices.iter().map(|m| is_hadamard(m, g.eps)).collect::<Result<Vec<_>, _>>()?;
        let all_hadamard = individual.iter().all(|r| r.is_hadamard);
        let family = if all_hadamard { Some(file.to_family(g.eps)?.verify(g.eps)?) } else { None };
        let passes = family.as_ref().is_some_and(|r| r.passes && r.bases == file.manifest.count);
        #[derive(Serialize)]
        struct Out {
            passes: bool,
            manifest: hadamard::FamilyManifest,
            family: Option<hadamard::FamilyReport>,
            matrices: Vec<hadamard::HadamardReport>,
        }
        render(&Out { passes, manifest: file.manifest, family, matrices: individual }, format, passes)
    } else {
        let m = matrix_from_json(&text)?;
        let report = is_hadamard(&m, g.eps)?;
        let passes = report.is_hadamard;
        render(&report, format, passes)
    }
}

fn cmd_grid(d: usize, m: u32, g: &Global) -> Result<Outcome> {
    if d < 2 {
        bail!("d must be at least 2");
    }
    let grid = enumerate_grid(d, m, g.budget)?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            grid.write_csv(&mut buf)?;
            Ok(Outcome { body: String::from_utf8(buf)?, passed: true })
        }
        f => {
            let points = |v: &[torus::TorusPoint]| -> Vec<Vec<u32>> {
                v.iter()
                    .filter_map(|p| match p {
                        torus::TorusPoint::Exact { num, .. } => Some(num.clone()),
                        _ => None,
                    })
                    .collect()
            };
            let out = json!({
                "d": d, "m": m,
                "ort_count": grid.ort.len(), "ub_count": grid.ub.len(),
                "ort": points(&grid.ort), "ub": points(&grid.ub),
            });
            render(&out, f, true)
        }
    }
}

fn cmd_witness(d: usize, m: Option<u32>, summary: bool, g: &Global) -> Result<Outcome> {
    let h = expand_h(d)?;
    let samples: Vec<torus::TorusPoint> = match m {
        Some(m) => enumerate_grid(d, m, g.budget)?.allowed().cloned().collect(),
        None => Vec::new(),
    };
    let report = delsarte_bound(&h, &samples, g.eps)?;
    let constant = h.exact_coeff(&vec![0; d - 1]).expect("continuous witness");
    let h0 = h.exact_value_at_zero().expect("continuous witness");
    #[derive(Serialize)]
    struct Out {
        d: usize,
        valid: bool,
        bound: Num17,
        exact_bound: Option<String>,
        constant_term: String,
        value_at_zero: String,
        terms: usize,
        report: witness::DelsarteReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        polynomial: Option<TrigPolynomialJson>,
    }
    let valid = report.valid;
    let out = Out {
        d,
        valid,
        bound: report.bound,
        exact_bound: report.exact_bound.clone(),
        constant_term: witness::rational_string(&constant),
        value_at_zero: witness::rational_string(&h0),
        terms: h.len(),
        report,
        polynomial: (!summary).then(|| (&h).into()),
    };
    render(&out, g.format.unwrap_or(Format::Json), valid)
}

fn cmd_bound(path: &Path, g: &Global) -> Result<Outcome> {
    let family = load_family(path, g.eps)?;
    let points = family_points(&family, g.eps)?;
    let h = expand_h(family.d)?;
    let report = check_point_set(&points, &h, g.eps)?;
    let passed = report.hypothesis_holds && report.within_bound;
    render(&report, g.format.unwrap_or(Format::Json), passed)
}

fn cmd_sidon(d: u32, set: Option<Vec<i64>>, nodes: u64, g: &Global) -> Result<Outcome> {
    let n = d.checked_mul(d).filter(|&n| n > 0).context("d must be positive")?;
    let (set, searched) = match set {
        Some(e) => (Some(SidonSet::new(n, &e)), false),
        None => (sidon_search(d, nodes)?, true),
    };
    #[derive(Serialize)]
    struct Out {
        d: u32,
        searched: bool,
        set: Option<SidonSet>,
        sidon: bool,
        row_quotients: Option<hadamard::RowQuotientReport>,
    }
    let Some(s) = set else {
        return render(&Out { d, searched, set: None, sidon: false, row_quotients: None }, g.format.unwrap_or(Format::Json), false);
    };
    if s.len() != d as usize {
        bail!("a Sidon set for d = {d} needs {d} elements, got {}", s.len());
    }
    let sidon = sidon_verify(&s);
    let rq = row_quotient_check(&sidon_row_system(&s)?, g.eps)?;
    let passed = sidon && rq.passes;
    render(&Out { d, searched, set: Some(s), sidon, row_quotients: Some(rq) }, g.format.unwrap_or(Format::Json), passed)
}

fn problem(a: &LpArgs, g: &Global) -> Result<lp::LpProblem> {
    if a.d < 2 {
        bail!("d must be at least 2");
    }
    Ok(build_pseudo_mub_lp(build_orbits(a.d, a.m, a.symmetry.into(), g.budget)?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_lp(
    a: &LpArgs,
    eps_feas: f64,
    max_iterations: usize,
    batch: usize,
    eager: bool,
    checkpoint_dir: Option<PathBuf>,
    certificate: Option<&Path>,
    progress: bool,
    g: &Global,
) -> Result<Outcome> {
    let p = problem(a, g)?;
    let progress: Option<lp::ProgressFn> = progress.then(|| {
        Box::new(|r: &RoundProgress| {
            eprintln!(
                "round {}: active {} added {} M {:.9} min f^ {:.3e} pivots {}",
                r.round, r.active, r.added, r.objective, r.min_constraint, r.iterations
            );
        }) as lp::ProgressFn
    });
    let opts = SolveOptions {
        eps_feas,
        max_iterations,
        strategy: if eager { Strategy::Eager } else { Strategy::ConstraintGeneration { batch } },
        checkpoint_dir,
        progress,
    };
    let sol = solve_lp(&p, &opts)?;
    let mut passed = sol.status == lp::LpStatus::Optimal && sol.feasible(eps_feas);
    if let Some(path) = certificate {
        let cert = extract_dual_witness(&sol, &p)?;
        passed &= cert.valid;
        fs::write(path, to_json_pretty(&cert.to_json())?).with_context(|| format!("cannot write {}", path.display()))?;
    }
    render(&lp::solution_json(&sol, &p), g.format.unwrap_or(Format::Json), passed)
}

fn cmd_pseudo_check(path: &Path, d: usize, family: bool, g: &Global) -> Result<Outcome> {
    let f = if family {
        let fam = load_family(path, g.eps)?;
        if fam.d != d {
            bail!("family has dimension {}, expected {d}", fam.d);
        }
        let points = family_points(&fam, g.eps)?;
        let m = detect_grid_order(&fam, MAX_GRID_ORDER, g.eps).context("family phases do not lie on a grid")?;
        lp::difference_function(&points, m)?
    } else {
        trig_from_json(&read(path)?)?
    };
    let report = pseudo_mub_check(&f, d, g.eps, g.budget)?;
    let passed = report.is_pseudo_mub;
    render(&report, g.format.unwrap_or(Format::Json), passed)
}

fn cmd_export_lp(a: &LpArgs, g: &Global) -> Result<Outcome> {
    if g.format.is_some_and(|f| f != Format::Text) {
        bail!("export-lp writes LP text only");
    }
    let p = problem(a, g)?;
    let mut buf = Vec::new();
    write_lp(&p, &mut buf)?;
    Ok(Outcome { body: String::from_utf8(buf)?, passed: true })
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    if !(g.eps > 0.0 && g.eps.is_finite()) {
        bail!("--eps must be a positive number");
    }
    let out = match &cli.command {
        Command::Construct { d, kind } => cmd_construct(*d, *kind, g)?,
        Command::Verify { file } => cmd_verify(file, g)?,
        Command::Grid { d, m } => cmd_grid(*d, *m, g)?,
        Command::Witness { d, m, summary } => cmd_witness(*d, *m, *summary, g)?,
        Command::Bound { file } => cmd_bound(file, g)?,
        Command::Sidon { d, set, nodes } => cmd_sidon(*d, set.clone(), *nodes, g)?,
        Command::Lp { lp, eps_feas, max_iterations, batch, eager, checkpoint_dir, certificate, progress, quiet } => {
            let show = !quiet && (*progress || lp.m >= 12);
            cmd_lp(lp, *eps_feas, *max_iterations, *batch, *eager, checkpoint_dir.clone(), certificate.as_deref(), show, g)?
        }
        Command::PseudoCheck { file, d, family } => cmd_pseudo_check(file, *d, *family, g)?,
        Command::ExportLp { lp } => cmd_export_lp(lp, g)?,
    };
    match &g.output {
        Some(path) => fs::write(path, &out.body).with_context(|| format!("cannot write {}", path.display()))?,
        None => io::stdout().write_all(out.body.as_bytes())?,
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
