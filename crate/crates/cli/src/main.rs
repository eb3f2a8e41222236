//! `stabex` command-line front end.
//!
//! Exit codes: 0 success, 1 bad input, 2 capability or size limit, 3 solver
//! failure.

mod manifest;
mod target;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stabex::clifford_dictionaries::{cache_dir, load_dictionary, load_or_build, DictionaryKind};
use stabex::error::Error;
use stabex::extent_pipeline::{
    compute_extent, property_suite, qft_report, synthesis_lower_bound, sweep, t_count_extent, CertificateStatus,
    DictionaryChoice, ExtentOptions, GateFamily, SweepTable, WeakReduction,
};
use stabex::l1_solver::Algorithm;
use stabex::symmetry_reduction::{
    burnside_orbit_count, distinct_projection_counts, enumerate_graph_classes, orbit_counts_by_category,
    symmetric_generators, CodeSource,
};

use manifest::{write_output, DictionaryChecksum, RunManifest};
use target::{read_text, TargetSpec};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Lib(Error::Capability(_) | Error::SizeLimit(_)) => 2,
            CliError::Lib(Error::Solver(_)) => 3,
            CliError::Lib(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "stabex", version, about = "Stabilizer extent of Clifford-hierarchy gates")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extent of a single target.
    Extent(ExtentArgs),
    /// Extent of C^{n-1}P(theta) over a theta grid, as CSV.
    Sweep(SweepArgs),
    /// Diagonal Clifford counts per CZ category, as CSV.
    Counts(CountsArgs),
    /// Orbit counts of diagonal Cliffords under qubit permutations.
    Orbits(OrbitsArgs),
    /// Blocked extent of the textbook QFT.
    Qft(QftArgs),
    /// Inspect, build or verify cached dictionary files.
    Cache(CacheArgs),
    /// Randomized checks of the extent's algebraic properties.
    Properties(PropertiesArgs),
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    /// auto, full, real, diagonal, real-diagonal, transposition-invariant or permutation-invariant.
    #[arg(long, default_value = "auto")]
    dict: String,
    /// auto, off, or a file of permutation generators.
    #[arg(long, default_value = "auto")]
    weak_reduce: String,
    /// Residual and gap tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// interior-point (default) or splitting.
    #[arg(long)]
    solver: Option<String>,
    /// Dictionary file directory (overrides STABEX_CACHE_DIR).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Allow streamed diagonal solves one qubit beyond the caps.
    #[arg(long)]
    extended: bool,
}

impl SolveArgs {
    fn options(&self) -> Result<ExtentOptions, CliError> {
        let mut o = ExtentOptions { dictionary: DictionaryChoice::parse(&self.dict)?, ..ExtentOptions::default() };
        o.weak_reduce = match self.weak_reduce.as_str() {
            "auto" => WeakReduction::Auto,
            "off" => WeakReduction::Off,
            path => WeakReduction::Subgroup(target::parse_permutations(&read_text(Path::new(path))?)?),
        };
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Input("--tol must be positive".into()));
            }
            o.solver.tol_residual = t;
            o.solver.tol_gap = t;
        }
        o.solver.max_iterations = self.max_iter;
        o.solver.algorithm = match self.solver.as_deref() {
            None | Some("auto") => Algorithm::Auto,
            Some("interior-point") => Algorithm::InteriorPoint,
            Some("splitting") => Algorithm::Splitting,
            Some(s) => return Err(CliError::Input(format!("unknown solver '{s}'"))),
        };
        o.extended = self.extended;
        o.cache_dir = self.cache_dir.clone();
        Ok(o)
    }
}

#[derive(Args, Debug, Serialize)]
struct ExtentArgs {
    /// t, cs, ccz, cnz, cns, cnp, fsim or qft-block.
    #[arg(long)]
    gate: Option<String>,
    /// Qubit count for cnz, cns and cnp.
    #[arg(long)]
    n: Option<usize>,
    /// Block index for qft-block.
    #[arg(long)]
    k: Option<usize>,
    /// Angle in radians or as a multiple of pi (`3pi/4`, `0.7048pi`).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Hypergraph file; with --angles, a generalized hypergraph.
    #[arg(long)]
    hypergraph: Option<PathBuf>,
    /// Angle per edge order, e.g. `3=0.6476pi,4=0.7048pi`.
    #[arg(long)]
    angles: Option<String>,
    /// Dense matrix file, one row per line.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Restrict a diagonal dictionary to these CZ counts, e.g. `0,1,3`.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<u32>>,
    /// Decomposition JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// Grid points over [0, 2 pi]; 1001 gives a step of pi/500.
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug, Serialize)]
struct CountsArgs {
    #[arg(long)]
    n: usize,
    /// Count one graph per relabeling class.
    #[arg(long, conflicts_with = "distinct_projections")]
    graph_reduced: bool,
    /// Count S_n orbits per category.
    #[arg(long)]
    distinct_projections: bool,
    /// Real-diagonal Cliffords instead of diagonal ones.
    #[arg(long)]
    real: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OrbitsArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct QftArgs {
    #[arg(long, default_value_t = 5)]
    qubits: usize,
    /// Compare against this many T gates.
    #[arg(long, default_value_t = 100)]
    t_count: u64,
    /// Block extents to take as given, e.g. `4=2.0348`.
    #[arg(long, value_delimiter = ',')]
    known: Vec<String>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct CacheArgs {
    #[command(subcommand)]
    action: CacheAction,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    /// Lists dictionary files.
    List,
    /// Builds and stores one dictionary.
    Build {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
    },
    /// Checks every dictionary file against its checksum.
    Verify,
}

#[derive(Args, Debug, Serialize)]
struct PropertiesArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("invalid input: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let res = match &cli.command {
        Command::Extent(a) => cmd_extent(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Counts(a) => cmd_counts(a),
        Command::Orbits(a) => cmd_orbits(a),
        Command::Qft(a) => cmd_qft(a),
        Command::Cache(a) => cmd_cache(a),
        Command::Properties(a) => cmd_properties(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_extent(a: &ExtentArgs) -> CliResult {
    let started = Instant::now();
    let spec = TargetSpec {
        gate: a.gate.as_deref(),
        n: a.n,
        k: a.k,
        theta: a.theta.as_deref(),
        phi: a.phi.as_deref(),
        hypergraph: a.hypergraph.as_deref(),
        angles: a.angles.as_deref(),
        matrix: a.matrix.as_deref(),
    };
    let t = spec.resolve()?;
    let mut opts = a.solve.options()?;
    opts.categories = a.categories.clone();
    opts.decompose = a.out.is_some();
    for note in &t.notes {
        println!("note: {note}");
    }
    let r = compute_extent(&t.unitary, &t.label, &opts)?;
    println!("target       {} ({} qubits)", r.target, r.n);
    println!(
        "dictionary   {} ({} columns, sha256 {})",
        r.dictionary.name(),
        r.dictionary_columns,
        &r.dictionary_checksum[..16.min(r.dictionary_checksum.len())]
    );
    match &r.reduction {
        Some(red) => println!(
            "reduction    permutation twirl, group order {}, {} columns",
            red.group_order, red.reduced_columns
        ),
        None => println!("reduction    none"),
    }
    println!("extent       {:.5}  ({:.10})", r.extent, r.extent);
    println!("l1           {:.10}", r.l1);
    println!("residual     {:.3e}", r.residual);
    let cert = match r.certificate {
        CertificateStatus::Verified => "verified",
        CertificateStatus::Failed => "FAILED",
        CertificateStatus::Unverified => "unverified",
    };
    println!("certificate  {cert}");
    if let Ok(b) = synthesis_lower_bound(r.extent) {
        println!("T-count lower bound  {b}");
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    println!("time         {:.3} s", r.timings.total.as_secs_f64());
    if let Some(out) = &a.out {
        let mut m = RunManifest::new("extent", a)?;
        m.dictionaries.push(DictionaryChecksum {
            kind: r.dictionary.name().to_string(),
            n: r.n,
            columns: r.dictionary_columns,
            sha256: r.dictionary_checksum.clone(),
        });
        let json = serde_json::to_string_pretty(&r.to_json()).map_err(|e| CliError::Input(e.to_string()))?;
        write_output(out, &(json + "\n"), &mut m, started)?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    let started = Instant::now();
    if a.points < 3 {
        return Err(CliError::Input("--points must be at least 3".into()));
    }
    let opts = a.solve.options()?;
    let grid = SweepTable::default_grid(a.points);
    let table = sweep(GateFamily::MultiControlledPhase, a.n, &grid, &opts)?;
    let csv = table.to_csv();
    let summary = format!(
        "theta_max {:.6} pi, extent {:.5} (fit {:.5}), {} failed points",
        table.theta_max / std::f64::consts::PI,
        table.xi_max,
        table.xi_max_interpolated,
        table.errors.len()
    );
    match &a.out {
        Some(out) => {
            println!("{summary}");
            let mut m = RunManifest::new("sweep", a)?;
            let mut o = opts.clone();
            o.decompose = false;
            let u = GateFamily::MultiControlledPhase.unitary(a.n, table.theta_max)?;
            let r = compute_extent(&u, "sweep", &o)?;
            m.dictionaries.push(DictionaryChecksum {
                kind: r.dictionary.name().to_string(),
                n: r.n,
                columns: r.dictionary_columns,
                sha256: r.dictionary_checksum,
            });
            write_output(out, &csv, &mut m, started)?;
        }
        None => {
            print!("{csv}");
            eprintln!("{summary}");
        }
    }
    for (i, e) in &table.errors {
        eprintln!("warning: theta={} failed: {e}", table.thetas[*i]);
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn cmd_counts(a: &CountsArgs) -> CliResult {
    let started = Instant::now();
    let n = a.n;
    if !(1..=8).contains(&n) {
        return Err(Error::SizeLimit("counts support 1 <= n <= 8".into()).into());
    }
    let pairs = (n * (n - 1) / 2) as u64;
    let phases: u128 = if a.real { 1 << n } else { 1 << (2 * n) };
    let mut csv = String::new();
    let mut total: u128 = 0;
    if a.distinct_projections {
        let orbits = orbit_counts_by_category(n, if a.real { 2 } else { 4 })?;
        // Operator-level dedup is only feasible for the smaller dictionaries.
        let twirls = if n <= 5 {
            let src = if a.real { CodeSource::RealDiagonal(n) } else { CodeSource::Diagonal(n) };
            Some(distinct_projection_counts(src, &symmetric_generators(n))?)
        } else {
            None
        };
        csv.push_str("category,orbits,distinct_twirls\n");
        let mut twirl_total = 0usize;
        for (i, c) in orbits.iter().enumerate() {
            total += c;
            let t = twirls.as_ref().map(|t| t[i]);
            twirl_total += t.unwrap_or(0);
            let _ = writeln!(csv, "{i},{c},{}", t.map(|t| t.to_string()).unwrap_or_default());
        }
        let tt = if twirls.is_some() { twirl_total.to_string() } else { String::new() };
        let _ = writeln!(csv, "total,{total},{tt}");
    } else {
        csv.push_str("category,count\n");
        for i in 0..=pairs {
            let c = if a.graph_reduced {
                phases * enumerate_graph_classes(n, i as usize)?.len() as u128
            } else {
                phases * binomial(pairs, i)
            };
            total += c;
            let _ = writeln!(csv, "{i},{c}");
        }
        let _ = writeln!(csv, "total,{total}");
    }
    match &a.out {
        Some(out) => {
            println!("total {total}");
            let mut m = RunManifest::new("counts", a)?;
            write_output(out, &csv, &mut m, started)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_orbits(a: &OrbitsArgs) -> CliResult {
    let d = burnside_orbit_count(a.n, 4)?;
    let rd = burnside_orbit_count(a.n, 2)?;
    println!("|D_{}/S_{}|  = {d}", a.n, a.n);
    println!("|RD_{}/S_{}| = {rd}", a.n, a.n);
    Ok(())
}

fn cmd_qft(a: &QftArgs) -> CliResult {
    let mut known = BTreeMap::new();
    for kv in &a.known {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("expected block=extent, got '{kv}'")))?;
        let k: usize = k.trim().parse().map_err(|_| CliError::Input(format!("bad block index '{k}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Input(format!("bad extent '{v}'")))?;
        if !(v >= 1.0 && v.is_finite()) {
            return Err(CliError::Input(format!("extent {v} is below 1")));
        }
        known.insert(k, v);
    }
    let opts = a.solve.options()?;
    let rep = qft_report(a.qubits, &known, a.t_count, &opts)?;
    println!("block  extent    source  gates  gate product");
    for row in &rep.blocks.rows {
        println!(
            "{:<6} {:.5}  {:<7} {:<6} {:.5}",
            row.label,
            row.extent,
            if row.solved { "solved" } else { "given" },
            row.gate_extents.len(),
            row.gate_product
        );
    }
    println!("blocked product      {:.5}", rep.blocks.blocked_product);
    println!("gate-by-gate product {:.5}", rep.blocks.gate_product);
    println!("gate/blocked ratio   {:.5}", rep.blocks.ratio());
    let t = t_count_extent(a.t_count);
    match t.value {
        Some(v) => println!("xi(T)^{}            {v:.6e}", a.t_count),
        None => println!("log2 xi(T)^{}       {:.5}", a.t_count, t.log2),
    }
    println!("T-count ratio        {:.4e}", rep.t_ratio);
    Ok(())
}

fn parse_kind(s: &str) -> Result<DictionaryKind, CliError> {
    (0..6)
        .filter_map(DictionaryKind::from_tag)
        .find(|k| k.name() == s)
        .ok_or_else(|| CliError::Input(format!("unknown dictionary kind '{s}'")))
}

fn dictionary_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sxd"))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_cache(a: &CacheArgs) -> CliResult {
    let dir = a.cache_dir.clone().unwrap_or_else(cache_dir);
    match &a.action {
        CacheAction::List | CacheAction::Verify => {
            let files = dictionary_files(&dir)?;
            if files.is_empty() {
                println!("no dictionary files in {}", dir.display());
            }
            let mut bad = 0;
            for f in &files {
                let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                match load_dictionary(f) {
                    Ok(d) => println!(
                        "{name}  {} n={} {} columns sha256 {}{}",
                        d.kind().name(),
                        d.n(),
                        d.ids().len(),
                        d.checksum_hex(),
                        if matches!(a.action, CacheAction::Verify) { "  ok" } else { "" }
                    ),
                    Err(e) => {
                        bad += 1;
                        println!("{name}  BAD: {e}");
                    }
                }
            }
            if bad > 0 {
                return Err(Error::Cache(format!("{bad} unreadable dictionary file(s)")).into());
            }
        }
        CacheAction::Build { kind, n } => {
            let kind = parse_kind(kind)?;
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            let d = load_or_build(&dir, kind, *n, &Default::default())?;
            println!("{} n={} {} columns sha256 {}", kind.name(), d.n(), d.ids().len(), d.checksum_hex());
        }
    }
    Ok(())
}

fn cmd_properties(a: &PropertiesArgs) -> CliResult {
    if a.trials == 0 {
        return Err(CliError::Input("--trials must be positive".into()));
    }
    let rep = property_suite(a.seed, a.trials)?;
    println!("seed {} slack {:.1e}", rep.seed, rep.slack);
    for c in &rep.checks {
        println!("{:<26} {:>4} trials {:>4} violations  max excess {:.3e}", c.name, c.trials, c.violations, c.max_excess);
    }
    Ok(())
}
