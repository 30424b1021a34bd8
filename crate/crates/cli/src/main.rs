use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use obddproof::bounds::{
    check_fooling, color_split, lemma_matrix_select, selection_target, verify_selection,
    FoolingCertificate, FoolingVerdict, LemmaConstant, MatrixColoring, SelectionOutcome,
};
use obddproof::oracle::{
    canonical_bdd, canonical_export, min_size_over_orders, table_of_cnf, TruthTable,
};
use obddproof::refutation::{trace_to_csv, trace_to_jsonl, Truncation};
use obddproof::*;
use serde::Serialize;

/// Completed without refuting (or a refuted certificate).
const EXIT_NOT_REFUTED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "obddproof",
    version,
    about = "OBDD refutations of pigeonhole formulas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write PHP_n (or PC*_n) as DIMACS plus a pigeon-map sidecar.
    Gen(GenArgs),
    /// Run one refutation and print a summary line.
    Refute(RefuteArgs),
    /// Run every (order, schedule) combination and emit a CSV table.
    Sweep(SweepArgs),
    /// Check a fooling certificate and print the verdict as JSON.
    BoundCheck(BoundCheckArgs),
    /// Run the matrix selection construction on an order-induced or given coloring.
    Lemma(LemmaArgs),
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Only the first n positive clauses.
    #[arg(long)]
    pc_star: bool,
    /// DIMACS output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pigeon-map path; defaults to `<out stem>.map.json` next to `--out`.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct Budgets {
    #[arg(long, default_value_t = RunLimits::default().max_steps, value_parser = positive)]
    max_steps: usize,
    #[arg(long, default_value_t = RunLimits::default().max_nodes, value_parser = positive)]
    max_nodes: usize,
}

impl From<Budgets> for RunLimits {
    fn from(b: Budgets) -> Self {
        RunLimits {
            max_steps: b.max_steps,
            max_nodes: b.max_nodes,
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct RefuteArgs {
    cnf: PathBuf,
    /// row-major | column-major | random:<seed> | file:<path>
    #[arg(long, default_value = "row-major")]
    order: String,
    /// Schedule kind, `random:<seed>`, or a JSON schedule file.
    #[arg(long, default_value = "gz2003")]
    schedule: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    projection: bool,
    /// Pigeon map for column-major orders.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Per-step trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-step trace as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    budgets: Budgets,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(required_unless_present = "php_range", conflicts_with = "php_range")]
    cnf: Option<PathBuf>,
    /// Inclusive range of pigeonhole sizes, e.g. `2..5`.
    #[arg(long)]
    php_range: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "row-major")]
    orders: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "linear,balanced_tree,gz2003,greedy_min_size"
    )]
    schedules: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_parser = positive)]
    jobs: Option<usize>,
    #[command(flatten)]
    budgets: Budgets,
}

#[derive(Args)]
struct BoundCheckArgs {
    #[arg(long, required_unless_present = "table", conflicts_with = "table")]
    cnf: Option<PathBuf>,
    /// Truth table file: `2^n` characters `0`/`1`, bit `v` of the row index is variable `v`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value = "row-major")]
    order: String,
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantArg {
    Proven,
    Conjectured,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(
        long,
        required_unless_present = "coloring",
        conflicts_with = "coloring"
    )]
    n: Option<usize>,
    #[arg(long, default_value = "row-major")]
    order: String,
    /// Matrix file, one row per line of `W`/`B` (or `0`/`1`).
    #[arg(long)]
    coloring: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "proven")]
    constant: ConstantArg,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, required_unless_present = "table", conflicts_with = "table")]
    cnf: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value = "row-major")]
    order: String,
    /// Also search all orders (at most 7 variables).
    #[arg(long)]
    min_order: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Refute(a) => cmd_refute(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::BoundCheck(a) => cmd_bound_check(a),
        Command::Lemma(a) => cmd_lemma(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sidecar_path(cnf: &Path) -> PathBuf {
    let stem = cnf.file_stem().unwrap_or_default().to_string_lossy();
    cnf.with_file_name(format!("{stem}.map.json"))
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let (formula, map) = if a.pc_star {
        (gen_pc_star(a.n)?, PigeonMap::new(a.n))
    } else {
        gen_php(a.n)?
    };
    let text = write_dimacs(&formula);
    match &a.out {
        Some(out) => {
            write(out, &text)?;
            let map_path = a.map.clone().unwrap_or_else(|| sidecar_path(out));
            write(&map_path, &map.to_json())?;
            eprintln!(
                "wrote {} ({} vars, {} clauses) and {}",
                out.display(),
                formula.n_vars(),
                formula.len(),
                map_path.display()
            );
        }
        None => {
            print!("{text}");
            if let Some(map_path) = &a.map {
                write(map_path, &map.to_json())?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Pigeon map from an explicit path, the sidecar next to `cnf`, or by
/// inferring `n` from `n_vars = n(n+1)`.
fn pigeon_map(n_vars: usize, explicit: Option<&Path>, cnf: Option<&Path>) -> Result<PigeonMap> {
    if let Some(p) = explicit {
        return Ok(PigeonMap::from_json(&read(p)?)?);
    }
    if let Some(p) = cnf.map(sidecar_path).filter(|p| p.exists()) {
        return Ok(PigeonMap::from_json(&read(&p)?)?);
    }
    infer_php_size(n_vars)
        .map(PigeonMap::new)
        .ok_or_else(|| anyhow!("{n_vars} variables do not form a pigeonhole instance; pass --map"))
}

fn infer_php_size(n_vars: usize) -> Option<usize> {
    (1..=n_vars)
        .take_while(|n| n * (n + 1) <= n_vars)
        .find(|n| n * (n + 1) == n_vars)
}

fn parse_order(
    spec: &str,
    n_vars: usize,
    map: impl FnOnce() -> Result<PigeonMap>,
) -> Result<VarOrder> {
    let order = match spec.split_once(':') {
        None if spec == "row-major" => VarOrder::row_major(n_vars),
        None if spec == "column-major" => {
            let map = map()?;
            if map.n_vars() != n_vars {
                bail!(
                    "pigeon map covers {} variables, formula has {n_vars}",
                    map.n_vars()
                );
            }
            VarOrder::column_major(&map)
        }
        Some(("random", seed)) => {
            VarOrder::random(n_vars, seed.parse().context("random order seed")?)
        }
        Some(("file", path)) => {
            let vars = read(Path::new(path))?
                .split_whitespace()
                .map(|tok| match tok.parse::<u32>() {
                    Ok(v) if v >= 1 => Ok(VarId(v - 1)),
                    _ => Err(anyhow!("bad variable `{tok}` in order file {path}")),
                })
                .collect::<Result<Vec<_>>>()?;
            VarOrder::explicit(vars)?
        }
        _ => {
            bail!("unknown order `{spec}` (row-major | column-major | random:<seed> | file:<path>)")
        }
    };
    if order.len() != n_vars {
        bail!(
            "order covers {} variables, formula has {n_vars}",
            order.len()
        );
    }
    Ok(order)
}

/// Kind name or `random:<seed>`; plain `random` takes `--seed`.
fn kind_from(name: &str, seed: Option<u64>) -> Result<ScheduleKind> {
    if name == "random" {
        return ScheduleKind::parse(name, seed)
            .map_err(|_| anyhow!("schedule `random` needs --seed (or random:<seed>)"));
    }
    Ok(name.parse::<ScheduleKind>()?)
}

fn budget_hit(e: &ScheduleError) -> bool {
    matches!(e, ScheduleError::Bdd(BddError::NodeBudgetExceeded(_)))
}

fn cmd_refute(a: RefuteArgs) -> Result<ExitCode> {
    let formula = parse_dimacs(&read(&a.cnf)?)?;
    let order = parse_order(&a.order, formula.n_vars(), || {
        pigeon_map(formula.n_vars(), a.map.as_deref(), Some(&a.cnf))
    })?;
    let limits = RunLimits::from(a.budgets);
    let schedule_path = Path::new(&a.schedule);
    let schedule = if schedule_path.is_file() {
        Schedule::from_json(&read(schedule_path)?, a.projection).context("parsing schedule file")?
    } else {
        let kind = kind_from(&a.schedule, a.seed)?;
        if kind.needs_projection() && !a.projection {
            bail!("schedule `{kind}` needs --projection");
        }
        match builtin_schedule(&formula, &order, kind, a.projection, limits) {
            Err(e) if budget_hit(&e) => {
                eprintln!("node budget exceeded while building the {kind} schedule");
                println!("refuted=false max=0 total=0 steps=0");
                return Ok(ExitCode::from(EXIT_BUDGET));
            }
            other => other?,
        }
    };
    let run = match run_schedule(&formula, &order, &schedule, limits) {
        Err(e) if budget_hit(&e) => {
            eprintln!("{e}");
            println!("refuted=false max=0 total=0 steps=0");
            return Ok(ExitCode::from(EXIT_BUDGET));
        }
        other => other?,
    };
    if let Some(path) = &a.trace {
        write(path, &trace_to_jsonl(&run.trace))?;
    }
    if let Some(path) = &a.csv {
        write(path, &trace_to_csv(&run.trace))?;
    }
    eprintln!(
        "{} steps under {} order, store holds {} nodes",
        run.steps(),
        order,
        run.store.node_count()
    );
    println!(
        "refuted={} max={} total={} steps={}",
        run.refuted,
        run.max_intermediate,
        run.total_size,
        run.steps()
    );
    Ok(match run.truncated {
        Some(Truncation::NodeBudget(_)) | Some(Truncation::StepLimit(_)) => {
            eprintln!("run truncated: {:?}", run.truncated.unwrap());
            ExitCode::from(EXIT_BUDGET)
        }
        None if run.refuted => ExitCode::SUCCESS,
        None => ExitCode::from(EXIT_NOT_REFUTED),
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: Option<usize>,
    order: &'a str,
    schedule: &'a str,
    seed: Option<u64>,
    refuted: bool,
    max_intermediate: usize,
    total_size: usize,
    steps: usize,
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("php range must look like a..b"))?;
    let (lo, hi): (usize, usize) = (
        lo.trim().parse()?,
        hi.trim().trim_start_matches('=').parse()?,
    );
    if lo == 0 || lo > hi {
        bail!("php range {lo}..{hi} must satisfy 1 <= a <= b");
    }
    Ok(lo..=hi)
}

fn label(n: Option<usize>) -> String {
    n.map_or_else(|| "input".to_string(), |n| format!("n={n}"))
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let kinds = a
        .schedules
        .iter()
        .map(|s| kind_from(s.trim(), a.seed))
        .collect::<Result<Vec<_>>>()?;
    let instances: Vec<(Option<usize>, CnfFormula, Option<PathBuf>)> = match (&a.php_range, &a.cnf)
    {
        (Some(range), _) => parse_range(range)?
            .map(|n| Ok((Some(n), gen_php(n)?.0, None)))
            .collect::<Result<_>>()?,
        (None, Some(path)) => {
            let f = parse_dimacs(&read(path)?)?;
            (vec![(infer_php_size(f.n_vars()), f, Some(path.clone()))])
                .into_iter()
                .collect()
        }
        (None, None) => bail!("give a CNF file or --php-range"),
    };
    let limits = RunLimits::from(a.budgets);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let mut out: Box<dyn Write> = match &a.csv {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut csv = csv::Writer::from_writer(&mut out);
    let mut any_error = false;
    for (n, formula, path) in &instances {
        let orders = a
            .orders
            .iter()
            .map(|spec| {
                parse_order(spec.trim(), formula.n_vars(), || {
                    pigeon_map(formula.n_vars(), None, path.as_deref())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = pool.install(|| sweep(formula, &orders, &kinds, limits));
        for row in &rows {
            if let Some(err) = &row.error {
                any_error = true;
                eprintln!("{} {} {}: {err}", label(*n), row.order, row.schedule);
            }
            if row.truncated {
                eprintln!("{} {} {}: truncated", label(*n), row.order, row.schedule);
            }
            csv.serialize(CsvRow {
                n: *n,
                order: &row.order,
                schedule: &row.schedule,
                seed: row.seed,
                refuted: row.refuted,
                max_intermediate: row.max_intermediate,
                total_size: row.total_size,
                steps: row.steps,
            })?;
        }
        eprintln!("{}: {} runs", label(*n), rows.len());
    }
    csv.flush()?;
    Ok(if any_error {
        ExitCode::from(EXIT_INPUT)
    } else {
        ExitCode::SUCCESS
    })
}

fn parse_table(text: &str) -> Result<TruthTable> {
    let bits = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(anyhow!("unexpected character `{other}` in truth table")),
        })
        .collect::<Result<Vec<bool>>>()?;
    if bits.len() < 2 || !bits.len().is_power_of_two() {
        bail!("truth table length {} is not 2^n with n >= 1", bits.len());
    }
    Ok(TruthTable::new(bits.len().trailing_zeros() as usize, bits)?)
}

/// Loads the function to inspect and builds it in a fresh store.
fn load_function(
    cnf: Option<&Path>,
    table: Option<&Path>,
    order: &str,
) -> Result<(NodeStore, NodeRef, TruthTableSource)> {
    if let Some(path) = cnf {
        let formula = parse_dimacs(&read(path)?)?;
        let order = parse_order(order, formula.n_vars(), || {
            pigeon_map(formula.n_vars(), None, Some(path))
        })?;
        let mut store = NodeStore::new(order);
        let root = formula_to_bdd(&formula, &mut store)?;
        return Ok((store, root, TruthTableSource::Cnf(formula)));
    }
    let table = parse_table(&read(table.expect("clap enforces one input"))?)?;
    let order = parse_order(order, table.n_vars(), || {
        bail!("column-major needs a pigeonhole CNF")
    })?;
    let mut store = NodeStore::new(order);
    let root = canonical_bdd(&table, &mut store)?;
    Ok((store, root, TruthTableSource::Table(table)))
}

enum TruthTableSource {
    Cnf(CnfFormula),
    Table(TruthTable),
}

#[derive(Serialize)]
struct BoundReport {
    certificate: FoolingCertificate,
    verdict: &'static str,
    bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actual_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<[Vec<u8>; 2]>,
}

/// Exit 0 when the certificate's hypotheses hold, 1 when a counterexample
/// pair is found.
fn cmd_bound_check(a: BoundCheckArgs) -> Result<ExitCode> {
    let cert: FoolingCertificate = serde_json::from_str(&read(&a.cert)?)
        .with_context(|| format!("malformed certificate {}", a.cert.display()))?;
    let (mut store, root, _) = load_function(a.cnf.as_deref(), a.table.as_deref(), &a.order)?;
    let (report, code) = match check_fooling(&mut store, root, &cert)? {
        FoolingVerdict::Certified { bound, actual_size } => {
            eprintln!("certified: size >= {bound} (actual {actual_size})");
            let report = BoundReport {
                certificate: cert,
                verdict: "certified",
                bound: Some(bound),
                actual_size: Some(actual_size),
                counterexample: None,
            };
            (report, ExitCode::SUCCESS)
        }
        FoolingVerdict::Degenerate {
            bound_with_terminals,
            actual_size,
        } => {
            eprintln!("degenerate: |A| = 1 and both cofactors are terminals; {bound_with_terminals} nodes counting terminals");
            let report = BoundReport {
                certificate: cert,
                verdict: "degenerate",
                bound: None,
                actual_size: Some(actual_size),
                counterexample: None,
            };
            (report, ExitCode::SUCCESS)
        }
        FoolingVerdict::Refuted { x1, x2 } => {
            eprintln!("refuted: prefixes {x1:?} and {x2:?} have the same cofactor");
            let report = BoundReport {
                certificate: cert,
                verdict: "refuted",
                bound: None,
                actual_size: None,
                counterexample: Some([x1, x2]),
            };
            (report, ExitCode::from(EXIT_NOT_REFUTED))
        }
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(code)
}

fn cmd_lemma(a: LemmaArgs) -> Result<ExitCode> {
    let constant = match a.constant {
        ConstantArg::Proven => LemmaConstant::Proven,
        ConstantArg::Conjectured => LemmaConstant::Conjectured,
    };
    let matrix = match (&a.coloring, a.n) {
        (Some(path), _) => MatrixColoring::parse(&read(path)?)?,
        (None, Some(n)) => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            let map = PigeonMap::new(n);
            let order = parse_order(&a.order, map.n_vars(), || Ok(map))?;
            MatrixColoring::from_split(&color_split(&order, &map)?, &map)
        }
        (None, None) => bail!("give --n or --coloring"),
    };
    eprint!("{matrix}");
    match lemma_matrix_select(&matrix, constant)? {
        SelectionOutcome::Infeasible { n } => {
            eprintln!("n = {n}: target {}", selection_target(n, constant));
            println!("infeasible: floor(c n)=0");
        }
        SelectionOutcome::Witness(w) => {
            let ok = verify_selection(&w, &matrix);
            eprintln!(
                "{:?}-witness of size {}, verified={ok}",
                w.kind,
                w.pairs.len()
            );
            println!("{}", serde_json::to_string(&w)?);
            if !ok {
                bail!("witness failed verification");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OracleReport {
    n_vars: usize,
    satisfying: usize,
    engine_size: usize,
    oracle_size: usize,
    identical: bool,
    min_size: Option<usize>,
    min_order: Option<String>,
}

fn cmd_oracle(a: OracleArgs) -> Result<ExitCode> {
    let (store, root, source) = load_function(a.cnf.as_deref(), a.table.as_deref(), &a.order)?;
    let table = match source {
        TruthTableSource::Cnf(f) => table_of_cnf(&f)?,
        TruthTableSource::Table(t) => t,
    };
    let oracle = canonical_export(&table, store.order())?;
    let engine = store.export(root)?;
    let min = if a.min_order {
        Some(min_size_over_orders(&table)?)
    } else {
        None
    };
    let report = OracleReport {
        n_vars: table.n_vars(),
        satisfying: table.count_ones(),
        engine_size: engine.nodes.len(),
        oracle_size: oracle.nodes.len(),
        identical: engine == oracle,
        min_size: min.as_ref().map(|m| m.0),
        min_order: min.map(|m| {
            format!(
                "{:?}",
                m.1.vars().iter().map(|v| v.0 + 1).collect::<Vec<_>>()
            )
        }),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(if report.identical {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
