use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sfaith::audit::{audit_with_budget, DEFAULT_TRIPLE_BUDGET};
use sfaith::bounds::{bound_table, lower_bound, upper_bound_degree_term};
use sfaith::format::{bounds_csv, parse_dag, parse_weights_for, sweep_csv, write_dag, write_weights};
use sfaith::graph::{make_bipartite, make_cycle, make_random, make_tree, Dag, TripleMode};
use sfaith::sem::DEFAULT_ZERO_THRESHOLD;
use sfaith::structure::Family;
use sfaith::symbolic::{symbolic_k, PolyMatrix};
use sfaith::verify::{run_verification, VerifyOptions};
use sfaith::volume::{estimate, sample_weights, GraphSource, SweepConfig, SweepResult, DEFAULT_FULL_CLASS_MAX_P};
use sfaith::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;

/// Default worker count for `sweep` when `--threads` is not given.
const THREADS_ENV: &str = "SFAITH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "sfaith", version, about = "Strong-faithfulness volumes for Gaussian DAG models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Generate a DAG file, optionally with sampled weights.
    Gen(GenArgs),
    /// Minimum partial correlations and λ verdicts for one weighted DAG.
    Audit(AuditArgs),
    /// Monte Carlo proportions of unfaithful weight vectors.
    Sweep(SweepArgs),
    /// Closed-form lower bounds for the structured families.
    Bounds(BoundsArgs),
    /// Degree-sum factor of the general upper bound for one DAG.
    Degree(DegreeArgs),
    /// Cross-check symbolic, numeric and graphical computations.
    Verify(VerifyArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Tree,
    Cycle,
    Bipartite,
    Random,
}

impl FamilyArg {
    fn structured(self) -> Option<Family> {
        match self {
            FamilyArg::Tree => Some(Family::Tree),
            FamilyArg::Cycle => Some(Family::Cycle),
            FamilyArg::Bipartite => Some(Family::Bipartite),
            FamilyArg::Random => None,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    p: usize,
    /// Expected neighbourhood size (random family only).
    #[arg(long)]
    en: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// DAG file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also sample weights uniformly on [-r,-c] ∪ [c,r] and write them here.
    #[arg(long)]
    weights_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct AuditArgs {
    #[arg(long)]
    dag: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD)]
    zero_threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = DEFAULT_TRIPLE_BUDGET)]
    budget: u128,
    /// JSON report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum, required_unless_present = "dag")]
    family: Option<FamilyArg>,
    /// Fixed DAG file instead of a generated family.
    #[arg(long, conflicts_with = "family")]
    dag: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    /// Expected neighbourhood sizes; accepts `a..b` for integer ranges.
    #[arg(long, default_value = "2")]
    en_list: String,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    lambda_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75")]
    c_list: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, value_delimiter = ',', default_value = "M,N1,N2")]
    classes: Vec<TripleMode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Worker threads; defaults to $SFAITH_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Append the closed-form lower bound as a `bound` column.
    #[arg(long)]
    bounds: bool,
    #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD)]
    zero_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_TRIPLE_BUDGET)]
    budget: u128,
    #[arg(long, default_value_t = DEFAULT_FULL_CLASS_MAX_P)]
    full_class_max_p: usize,
    /// CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, value_delimiter = ',')]
    p_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    lambda_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "M,N1,N2")]
    classes: Vec<TripleMode>,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DegreeArgs {
    #[arg(long)]
    dag: PathBuf,
    #[arg(long, default_value = "M")]
    class: TripleMode,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 5)]
    p_max: usize,
    #[arg(long, default_value_t = 200)]
    random_dags: usize,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    /// Test fixture: perturb K_11 so the suite must fail.
    #[arg(long, hide = true)]
    corrupt_k: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Write the primary output here instead of the recorded path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
struct RunManifest {
    command: String,
    /// Arguments after the program name; replay parses them again.
    argv: Vec<String>,
    config: serde_json::Value,
    seed: Option<u64>,
    version: String,
    wall_time_secs: f64,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::EnumerationTooLarge { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Any rejection of an input file's contents counts as an input error.
fn input_error(path: &Path, e: Error) -> Failure {
    match e {
        Error::EnumerationTooLarge { .. } => e.into(),
        _ => Failure {
            code: EXIT_PARSE,
            msg: format!("{}: {e}", path.display()),
        },
    }
}

fn load_dag(path: &Path) -> CliResult<Dag> {
    parse_dag(&read_input(path)?).map_err(|e| input_error(path, e))
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        msg: format!("{}: {e}", path.display()),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Run<'a> {
    argv: &'a [String],
    start: Instant,
}

impl Run<'_> {
    fn write_manifest(
        &self,
        command: &str,
        config: impl Serialize,
        seed: Option<u64>,
        outputs: Vec<PathBuf>,
        notes: Vec<String>,
    ) -> CliResult<()> {
        let Some(primary) = outputs.first() else {
            return Ok(());
        };
        let manifest = RunManifest {
            command: command.to_string(),
            argv: self.argv.to_vec(),
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: self.start.elapsed().as_secs_f64(),
            outputs: outputs.clone(),
            notes,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_output(Some(&manifest_path(primary)), &text)
    }
}

fn cmd_gen(a: &GenArgs, run: &Run) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let dag = match a.family {
        FamilyArg::Tree => make_tree(a.p, &mut rng)?,
        FamilyArg::Cycle => make_cycle(a.p)?,
        FamilyArg::Bipartite => make_bipartite(a.p)?,
        FamilyArg::Random => {
            let en = a.en.ok_or_else(|| usage("--en is required for the random family"))?;
            make_random(a.p, en, &mut rng)?
        }
    };
    if a.weights_out.is_some() && a.out.is_none() {
        return Err(usage("--weights-out needs --out"));
    }
    write_output(a.out.as_deref(), &write_dag(&dag))?;
    let mut outputs: Vec<PathBuf> = a.out.iter().cloned().collect();
    if let Some(wpath) = &a.weights_out {
        let w = sample_weights(&dag, a.c, a.r, &mut rng)?;
        write_output(Some(wpath), &write_weights(&w))?;
        outputs.push(wpath.clone());
    }
    run.write_manifest("gen", a, Some(a.seed), outputs, vec![])
}

fn cmd_audit(a: &AuditArgs, run: &Run) -> CliResult<()> {
    let dag = load_dag(&a.dag)?;
    let w = parse_weights_for(&dag, &read_input(&a.weights)?, a.r).map_err(|e| input_error(&a.weights, e))?;
    let report = audit_with_budget(&w, &a.lambda, a.zero_threshold, a.budget)?;
    let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes") + "\n";
    write_output(a.out.as_deref(), &text)?;
    run.write_manifest("audit", a, None, a.out.iter().cloned().collect(), vec![])
}

/// `1,2.5,3` or an integer range `1..5` (inclusive).
fn parse_en_list(s: &str) -> CliResult<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| usage(format!("bad range start in `{s}`")))?;
        let hi: u32 = hi.trim().parse().map_err(|_| usage(format!("bad range end in `{s}`")))?;
        if lo > hi {
            return Err(usage(format!("empty range `{s}`")));
        }
        return Ok((lo..=hi).map(f64::from).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("bad number `{x}` in `{s}`"))))
        .collect()
}

fn default_threads() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn cmd_sweep(a: &SweepArgs, run: &Run) -> CliResult<()> {
    let threads = match a.threads {
        Some(t) => t,
        None => default_threads()?,
    };
    let cfg = SweepConfig {
        lambdas: a.lambda_list.clone(),
        cs: a.c_list.clone(),
        r: a.r,
        samples: a.samples,
        seed: a.seed,
        classes: a.classes.clone(),
        zero_threshold: a.zero_threshold,
        budget: a.budget,
        full_class_max_p: a.full_class_max_p,
        threads,
    };

    let mut sources = Vec::new();
    match (a.family, &a.dag) {
        (_, Some(path)) => sources.push(GraphSource::Fixed {
            dag: load_dag(path)?,
            family: "file".into(),
        }),
        (Some(fam), None) => {
            if a.p.is_empty() {
                return Err(usage("--p is required with --family"));
            }
            let ens = if fam == FamilyArg::Random {
                parse_en_list(&a.en_list)?
            } else {
                vec![]
            };
            for &p in &a.p {
                match fam {
                    FamilyArg::Tree => sources.push(GraphSource::Tree { p }),
                    FamilyArg::Cycle => sources.push(GraphSource::Fixed {
                        dag: make_cycle(p)?,
                        family: "cycle".into(),
                    }),
                    FamilyArg::Bipartite => sources.push(GraphSource::Fixed {
                        dag: make_bipartite(p)?,
                        family: "bipartite".into(),
                    }),
                    FamilyArg::Random => {
                        for &en in &ens {
                            sources.push(GraphSource::Random {
                                p,
                                expected_neighborhood: en,
                            });
                        }
                    }
                }
            }
        }
        (None, None) => return Err(usage("one of --family or --dag is required")),
    }

    let mut result = SweepResult::default();
    for src in &sources {
        result.rows.extend(estimate(src, &cfg)?.rows);
    }

    let mut notes = Vec::new();
    for row in &result.rows {
        if let Some(n) = &row.note {
            let line = format!("{} p={} class={}: {n}", row.family, row.p, row.class.label());
            if !notes.contains(&line) {
                eprintln!("note: {line}");
                notes.push(line);
            }
        }
    }
    if a.family == Some(FamilyArg::Random) {
        notes.push("random ensembles include edgeless draws, which count as faithful".into());
    }

    let bounds: Option<Vec<Option<f64>>> = a.bounds.then(|| {
        result
            .rows
            .iter()
            .map(|row| {
                let fam = a.family.and_then(FamilyArg::structured)?;
                (row.c == 0.0)
                    .then(|| lower_bound(fam, row.p, row.lambda, row.class, a.r).ok())
                    .flatten()
            })
            .collect()
    });
    let csv = sweep_csv(&result.rows, bounds.as_deref());
    write_output(a.out.as_deref(), &csv)?;
    run.write_manifest("sweep", a, Some(a.seed), a.out.iter().cloned().collect(), notes)
}

fn family_density(fam: Family, p: usize) -> f64 {
    let edges = match fam {
        Family::Tree => p - 1,
        Family::Cycle => p,
        Family::Bipartite => 2 * (p - 2),
    };
    2.0 * edges as f64 / p as f64
}

fn cmd_bounds(a: &BoundsArgs, run: &Run) -> CliResult<()> {
    let fam = a
        .family
        .structured()
        .ok_or_else(|| usage("bounds are available for tree, cycle and bipartite"))?;
    if a.p_list.is_empty() {
        return Err(usage("--p-list is required"));
    }
    let rows = bound_table(fam, &a.p_list, &a.lambda_list, &a.classes, a.r)?;
    let csv = bounds_csv(&rows, |row| family_density(row.family, row.p));
    write_output(a.out.as_deref(), &csv)?;
    run.write_manifest("bounds", a, None, a.out.iter().cloned().collect(), vec![])
}

fn cmd_degree(a: &DegreeArgs) -> CliResult<()> {
    let dag = load_dag(&a.dag)?;
    let t = upper_bound_degree_term(&dag, a.class)?;
    let out = json!({
        "class": a.class.label(),
        "num_edges": t.num_edges,
        "degree_sum": t.degree_sum,
        "formula": t.formula,
        "constants": "C, c, kappa and k are not known explicitly; no numeric bound is reported",
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    Ok(())
}

fn corrupted_k(g: &Dag) -> PolyMatrix {
    let mut k = symbolic_k(g);
    let one = sfaith::SparsePoly::one(k.nvars());
    let bumped = k.get(0, 0) + &one;
    k.set(0, 0, bumped);
    k
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let opts = VerifyOptions {
        p_max: a.p_max,
        random_dags: a.random_dags,
        points: a.points,
        seed: a.seed,
        k_builder: if a.corrupt_k { corrupted_k } else { symbolic_k },
        ..Default::default()
    };
    let report = run_verification(&opts)?;
    if a.json {
        let out = json!({
            "passed": report.passed(),
            "dags": report.dags,
            "triples": report.triples,
            "checks": report.checks,
            "failure": report.failure.as_ref().map(|f| json!({
                "identity": f.identity,
                "triple": f.triple.as_ref().map(|t| t.to_string()),
                "detail": f.detail,
                "dag": write_dag(&f.dag),
            })),
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    } else {
        println!(
            "checked {} DAGs, {} triples, {} identities",
            report.dags, report.triples, report.checks
        );
    }
    match report.failure {
        None => {
            if !a.json {
                println!("all identities hold");
            }
            Ok(())
        }
        Some(f) => Err(Failure {
            code: EXIT_VERIFY,
            msg: f.to_string(),
        }),
    }
}

fn cmd_replay(a: &ReplayArgs) -> CliResult<()> {
    let text = read_input(&a.manifest)?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        msg: format!("{}: {e}", a.manifest.display()),
    })?;
    let mut cmd = parse_args(&m.argv).map_err(|e| usage(format!("manifest arguments: {e}")))?;
    if let Some(out) = &a.out {
        match &mut cmd {
            Command::Gen(g) => g.out = Some(out.clone()),
            Command::Audit(x) => x.out = Some(out.clone()),
            Command::Sweep(x) => x.out = Some(out.clone()),
            Command::Bounds(x) => x.out = Some(out.clone()),
            _ => return Err(usage("this command has no output file")),
        }
    }
    if matches!(cmd, Command::Replay(_)) {
        return Err(usage("a manifest cannot record a replay"));
    }
    // the replayed run keeps the original argv so its own manifest stays replayable
    dispatch(&cmd, &m.argv)
}

fn parse_args(argv: &[String]) -> std::result::Result<Command, clap::Error> {
    let full = std::iter::once("sfaith".to_string()).chain(argv.iter().cloned());
    Cli::try_parse_from(full).map(|c| c.command)
}

fn dispatch(cmd: &Command, argv: &[String]) -> CliResult<()> {
    let run = Run {
        argv,
        start: Instant::now(),
    };
    match cmd {
        Command::Gen(a) => cmd_gen(a, &run),
        Command::Audit(a) => cmd_audit(a, &run),
        Command::Sweep(a) => cmd_sweep(a, &run),
        Command::Bounds(a) => cmd_bounds(a, &run),
        Command::Degree(a) => cmd_degree(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cmd = match parse_args(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(&cmd, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
