mod output;

use std::env;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jacobsthal::known_h::KNOWN_H_MAX_K;
use jacobsthal::search::DEFAULT_BUDGET;
use jacobsthal::tables::{table_path, DEFAULT_BASE_K, MAX_TABLE_K};
use jacobsthal::{
    coeff_sweep, find_b, kanold_log10, ratio_natural_log, stevens_log10, sweep_b, BoundConfig,
    BoundContext, BoundResult, Budget, Error, KnownH, MemoCache, PrimeBasis, TableSet, TableStatus,
};
use serde::Serialize;

use output::{Format, RowSink, RunManifest};

const TABLES_DIR_ENV: &str = "JACOBSTHAL_TABLES_DIR";

/// Upper bounds on Jacobsthal's function h(k).
#[derive(Debug, Parser, Serialize)]
#[command(name = "jacobsthal", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Largest k answered from exact phi_min tables.
    #[arg(long, global = true, default_value_t = DEFAULT_BASE_K, value_parser = parse_base_k)]
    base_k: usize,
    /// Directory holding phimin_k{k}.bin; JACOBSTHAL_TABLES_DIR overrides it.
    #[arg(long, global = true, default_value = "tables")]
    tables_dir: PathBuf,
    /// Write rows here instead of stdout, with a manifest beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Cap on phi_low evaluations for the whole run.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Manage the exact phi_min tables.
    #[command(subcommand)]
    Tables(TablesCommand),
    /// Least m with phi_low(m, k) > 0 for a single k.
    Bound {
        #[arg(value_parser = parse_k)]
        k: usize,
        #[arg(long, default_value_t = 1, value_parser = parse_m)]
        start_m: u64,
        #[command(flatten)]
        recursion: Recursion,
    },
    /// b(k) for every k in a range, carrying m forward.
    Sweep {
        #[arg(value_parser = parse_k)]
        start_k: usize,
        #[arg(value_parser = parse_k)]
        end_k: usize,
        #[arg(long, default_value_t = 1, value_parser = parse_m)]
        initial_m: u64,
        /// Restart every search from --initial-m.
        #[arg(long)]
        reset_m: bool,
        #[command(flatten)]
        recursion: Recursion,
    },
    /// Scaled coefficients C_k with bound floor(C_k k^2 / 10000).
    CoeffSweep {
        #[arg(value_parser = parse_k)]
        start_k: usize,
        #[arg(value_parser = parse_k)]
        end_k: usize,
        #[arg(default_value_t = 10_000, value_parser = parse_m)]
        initial_c: u64,
        #[command(flatten)]
        recursion: Recursion,
    },
    /// b(k) next to the classical bounds and known h(k), in log10.
    Compare {
        #[arg(value_parser = parse_k)]
        start_k: usize,
        #[arg(value_parser = parse_k)]
        end_k: usize,
        #[command(flatten)]
        recursion: Recursion,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TablesCommand {
    /// Build missing or invalid tables for k = 1..=base-k.
    Build,
}

#[derive(Debug, Args, Serialize)]
struct Recursion {
    /// Cut the recursion off below the known h(k) for k <= 49.
    #[arg(long)]
    use_known_h: bool,
}

/// Empty at k = 1, where ln k vanishes.
fn ratio(bound: u64, k: usize) -> Option<f64> {
    Some(ratio_natural_log(bound, k)).filter(|r| r.is_finite())
}

fn parse_base_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if (1..=MAX_TABLE_K).contains(&k) => Ok(k),
        _ => Err(format!("expected an integer in 1..={MAX_TABLE_K}")),
    }
}

fn parse_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err("expected an integer k >= 1".into()),
    }
}

fn parse_m(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(m) if m >= 1 => Ok(m),
        _ => Err("expected an integer >= 1".into()),
    }
}

#[derive(Serialize)]
struct TableRow {
    k: usize,
    status: &'static str,
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct BoundRow {
    k: usize,
    b: u64,
    evaluations: u64,
    elapsed_ms: f64,
    ratio_natural_log: Option<f64>,
}

impl From<&BoundResult> for BoundRow {
    fn from(r: &BoundResult) -> Self {
        BoundRow {
            k: r.k,
            b: r.b_k,
            evaluations: r.evaluations,
            elapsed_ms: r.elapsed.as_secs_f64() * 1000.0,
            ratio_natural_log: ratio(r.b_k, r.k),
        }
    }
}

#[derive(Serialize)]
struct CoeffRow {
    k: usize,
    c_k: u64,
    bound: u64,
    ratio_natural_log: Option<f64>,
}

#[derive(Serialize)]
struct CompareRow {
    k: usize,
    b: u64,
    log10_b: f64,
    log10_kanold: f64,
    log10_stevens: f64,
    h_known: Option<u64>,
}

enum Failure {
    Usage(String),
    Environment(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Environment(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Environment(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => Failure::Budget(format!("{e}; rows before the breach were kept")),
            Error::Io { .. } | Error::Format { .. } | Error::Checksum { .. } | Error::MissingTable(_) => {
                Failure::Environment(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Environment(format!("writing output: {e}"))
    }
}

fn check_range(start_k: usize, end_k: usize) -> Result<(), Failure> {
    if start_k > end_k {
        return Err(Failure::Usage(format!("empty range: start {start_k} > end {end_k}")));
    }
    Ok(())
}

fn load_tables(common: &Common) -> Result<TableSet, Failure> {
    TableSet::load_dir(&common.tables_dir, common.base_k).map_err(|e| {
        let hint = format!(
            "run `jacobsthal tables build --base-k {} --tables-dir {}` first",
            common.base_k,
            common.tables_dir.display()
        );
        Failure::Environment(format!("{e}\nhint: {hint}"))
    })
}

fn context(tables: TableSet, common: &Common, k_max: usize, recursion: &Recursion) -> Result<BoundContext, Failure> {
    let config = BoundConfig::default()
        .with_base_k(common.base_k)
        .with_known_h(recursion.use_known_h);
    Ok(BoundContext::new(k_max, tables, config)?)
}

fn build_tables(common: &Common, sink: &mut RowSink) -> Result<Vec<[u8; 32]>, Failure> {
    let basis = PrimeBasis::new(common.base_k)?;
    let (set, report) = TableSet::ensure_dir(&common.tables_dir, common.base_k, &basis)?;
    for (k, status) in report {
        let table = set.table(k).expect("ensure_dir returns every table");
        sink.push(&TableRow {
            k,
            status: match status {
                TableStatus::Reused => "reused",
                TableStatus::Built => "built",
            },
            file: table_path(&common.tables_dir, k).display().to_string(),
            sha256: hex::encode(table.checksum()),
        })?;
    }
    Ok(set.tables().iter().map(|t| *t.checksum()).collect())
}

/// Runs the subcommand, streaming rows into `sink`. Returns the table
/// checksums the result depends on.
fn execute(cli: &Cli, sink: &mut RowSink) -> Result<Vec<[u8; 32]>, Failure> {
    let common = &cli.common;
    if let Command::Tables(TablesCommand::Build) = cli.command {
        return build_tables(common, sink);
    }
    let tables = load_tables(common)?;
    let checksums = tables.tables().iter().map(|t| *t.checksum()).collect();
    let mut cache = MemoCache::new();
    let mut budget = Budget::new(common.budget);
    let mut written: io::Result<()> = Ok(());
    match &cli.command {
        Command::Tables(_) => unreachable!(),
        Command::Bound { k, start_m, recursion } => {
            let ctx = context(tables, common, *k, recursion)?;
            let result = find_b(*k, *start_m, &ctx, &mut cache, &mut budget)?;
            sink.push(&BoundRow::from(&result))?;
        }
        Command::Sweep {
            start_k,
            end_k,
            initial_m,
            reset_m,
            recursion,
        } => {
            check_range(*start_k, *end_k)?;
            let ctx = context(tables, common, *end_k, recursion)?;
            let searched = sweep_b(*start_k, *end_k, *initial_m, *reset_m, &ctx, &mut cache, &mut budget, |r| {
                if written.is_ok() {
                    written = sink.push(&BoundRow::from(r));
                }
            });
            written?;
            searched?;
        }
        Command::CoeffSweep {
            start_k,
            end_k,
            initial_c,
            recursion,
        } => {
            check_range(*start_k, *end_k)?;
            let ctx = context(tables, common, *end_k, recursion)?;
            let searched = coeff_sweep(*start_k, *end_k, *initial_c, &ctx, &mut cache, &mut budget, |r| {
                if written.is_ok() {
                    written = sink.push(&CoeffRow {
                        k: r.k,
                        c_k: r.c_k,
                        bound: r.bound,
                        ratio_natural_log: ratio(r.bound, r.k),
                    });
                }
            });
            written?;
            searched?;
        }
        Command::Compare {
            start_k,
            end_k,
            recursion,
        } => {
            check_range(*start_k, *end_k)?;
            let ctx = context(tables, common, *end_k, recursion)?;
            let known = KnownH::hagedorn();
            let searched = sweep_b(*start_k, *end_k, 1, false, &ctx, &mut cache, &mut budget, |r| {
                if written.is_ok() {
                    written = sink.push(&CompareRow {
                        k: r.k,
                        b: r.b_k,
                        log10_b: (r.b_k as f64).log10(),
                        log10_kanold: kanold_log10(r.k),
                        log10_stevens: stevens_log10(r.k),
                        h_known: if r.k <= KNOWN_H_MAX_K { known.get(r.k) } else { None },
                    });
                }
            });
            written?;
            searched?;
        }
    }
    Ok(checksums)
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Tables(TablesCommand::Build) => "tables build",
        Command::Bound { .. } => "bound",
        Command::Sweep { .. } => "sweep",
        Command::CoeffSweep { .. } => "coeff-sweep",
        Command::Compare { .. } => "compare",
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut sink = RowSink::open(cli.common.out.as_deref(), cli.common.format)?;
    let outcome = execute(cli, &mut sink);
    // keep partial rows and record the run even when it stopped early
    sink.finish()?;
    if let Some(out) = &cli.common.out {
        let checksums = outcome.as_ref().map(Vec::as_slice).unwrap_or(&[]);
        let inputs: Vec<&[u8]> = checksums.iter().map(|c| c.as_slice()).collect();
        RunManifest::new(subcommand_name(&cli.command), cli, &inputs).write_beside(out)?;
    }
    outcome.map(|_| ())
}

fn main() -> ExitCode {
    let mut cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(dir) = env::var_os(TABLES_DIR_ENV) {
        cli.common.tables_dir = dir.into();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
