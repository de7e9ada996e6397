//! `xcube` — generate, validate, index, query and benchmark star-schema
//! XML warehouses.
//!
//! Exit codes: 0 success, 1 data errors (unparseable documents, integrity
//! violations, failed queries), 2 usage errors. Diagnostics go to stderr;
//! CSV and XML data go to stdout or `-o` files.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use xcube_cli::bench::{run_bench, size_sweep, Workload};
use xcube_cli::csvout::{bench_csv, cost_sweep_csv, result_table_csv};
use xcube_cli::profile::parse_profile;
use xcube_cli::xml::{
    self, parse_index_with_schema, serialize_dimensions, serialize_facts, serialize_index,
    serialize_schema, DocumentKind,
};
use xcube_core::cost::sweep;
use xcube_core::exec::{eval_no_index, eval_with_index};
use xcube_core::gen::{generate, GenProfile};
use xcube_core::index::build_index;
use xcube_core::model::{validate, Warehouse};
use xcube_core::query::{bind, parse_query, rewrite_for_index};

const SEED_ENV: &str = "XCUBE_SEED";
const FALLBACK_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "xcube", version, about = "Star-schema XML warehouse tool with a join index")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate Schema.xml, Dimensions.xml and Facts.xml from a profile.
    Generate(GenerateArgs),
    /// Check the integrity of a warehouse directory.
    Validate(InputArgs),
    /// Build Index.xml from a warehouse directory.
    BuildIndex(BuildIndexArgs),
    /// Run a decision-support query; prints CSV.
    Query(QueryArgs),
    /// Evaluate the closed-form costs over a list of cell counts; prints CSV.
    Cost(CostArgs),
    /// Generate warehouses and time queries with and without the index.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ProfileSource {
    /// Profile file (TOML).
    #[arg(long, conflicts_with = "preset")]
    profile: Option<PathBuf>,
    /// Built-in profile: `table1` (the five-dimension test warehouse).
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Divide the preset's cell and member counts (e.g. 1000).
    #[arg(long, requires = "preset")]
    scale_div: Option<u64>,
    /// Override the profile seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    profile: ProfileSource,
    /// Output directory for the three documents.
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Warehouse directory holding Schema.xml, Dimensions.xml, Facts.xml.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct BuildIndexArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Index file to write (default: <dir>/Index.xml).
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryPath {
    /// Use the index when one is available, the join otherwise.
    Auto,
    /// Multi-document join over Dimensions.xml and Facts.xml.
    Join,
    /// Scan Index.xml only.
    Index,
}

#[derive(Args)]
struct QueryArgs {
    /// Warehouse directory.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Index document (overrides <dir>/Index.xml).
    #[arg(long)]
    index: Option<PathBuf>,
    /// Query text.
    #[arg(long = "q")]
    query: Option<String>,
    /// File containing the query text.
    #[arg(long, conflicts_with = "query")]
    query_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    path: QueryPath,
    /// Write CSV here instead of stdout.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Cell counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    cells: Vec<u64>,
    #[arg(long)]
    dims: u64,
    /// Members per dimension.
    #[arg(long)]
    members: u64,
    /// Attributes per dimension.
    #[arg(long)]
    attrs: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    profile: ProfileSource,
    /// Warehouse sizes (cells) to sweep, comma separated and ascending;
    /// default is the profile's own cell count.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<u64>>,
    /// Workload queries (repeatable); default is a generated
    /// predicate + group-by query over the first dimension.
    #[arg(long = "q")]
    queries: Vec<String>,
    /// Timed runs per measurement (median is reported).
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data(err: impl std::fmt::Display) -> CliError {
        CliError::Data(err.to_string())
    }

    fn in_file(path: &Path, err: impl std::fmt::Display) -> CliError {
        CliError::Data(format!("{}: {}", path.display(), err))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Validate(args) => cmd_validate(args),
        Cmd::BuildIndex(args) => cmd_build_index(args),
        Cmd::Query(args) => cmd_query(args),
        Cmd::Cost(args) => cmd_cost(args),
        Cmd::Bench(args) => cmd_bench(args),
    }
}

fn env_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(FALLBACK_SEED)
}

fn load_profile(source: &ProfileSource) -> Result<GenProfile, CliError> {
    let mut profile = match (&source.profile, source.preset) {
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
            parse_profile(&text, env_seed()).map_err(|e| CliError::in_file(path, e))?
        }
        (None, Some(Preset::Table1)) => {
            let base = GenProfile::table1().with_seed(env_seed());
            match source.scale_div {
                Some(0) => return Err(CliError::Usage("--scale-div must be positive".into())),
                Some(div) => base.scaled_down(div),
                None => base,
            }
        }
        (None, None) => {
            return Err(CliError::Usage(
                "either --profile or --preset is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(seed) = source.seed {
        profile = profile.with_seed(seed);
    }
    Ok(profile)
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, content).map_err(|e| CliError::in_file(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(CliError::data)
        }
    }
}

fn doc_path(dir: &Path, kind: DocumentKind) -> PathBuf {
    dir.join(kind.file_name())
}

fn load_warehouse(dir: &Path) -> Result<Warehouse, CliError> {
    let schema_path = doc_path(dir, DocumentKind::Schema);
    let schema = open(&schema_path)
        .and_then(|r| xml::parse_schema(r).map_err(|e| CliError::in_file(&schema_path, e)))?;
    let dims_path = doc_path(dir, DocumentKind::Dimensions);
    let dims = open(&dims_path)
        .and_then(|r| xml::parse_dimensions(r).map_err(|e| CliError::in_file(&dims_path, e)))?;
    let facts_path = doc_path(dir, DocumentKind::Facts);
    let facts = open(&facts_path)
        .and_then(|r| xml::parse_facts(r).map_err(|e| CliError::in_file(&facts_path, e)))?;
    Ok(xml::assemble_warehouse(schema, dims, facts))
}

fn open(path: &Path) -> Result<BufReader<fs::File>, CliError> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::in_file(path, e))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let profile = load_profile(&args.profile)?;
    let warehouse = generate(&profile).map_err(CliError::data)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::in_file(&args.out, e))?;
    let write = |kind: DocumentKind, content: String| -> Result<(), CliError> {
        let path = doc_path(&args.out, kind);
        fs::write(&path, content).map_err(|e| CliError::in_file(&path, e))
    };
    write(DocumentKind::Schema, serialize_schema(warehouse.schema()))?;
    write(DocumentKind::Dimensions, serialize_dimensions(&warehouse))?;
    write(DocumentKind::Facts, serialize_facts(&warehouse))?;
    eprintln!(
        "generated {} cells across {} dimensions into {}",
        warehouse.facts().len(),
        warehouse.dimensions().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_validate(args: InputArgs) -> Result<(), CliError> {
    let warehouse = load_warehouse(&args.dir)?;
    let report = validate(&warehouse);
    println!("{report}");
    if report.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!(
            "{} integrity violations in {}",
            report.len(),
            args.dir.display()
        )))
    }
}

fn cmd_build_index(args: BuildIndexArgs) -> Result<(), CliError> {
    let warehouse = load_warehouse(&args.input.dir)?;
    let report = validate(&warehouse);
    if !report.is_empty() {
        return Err(CliError::Data(format!(
            "refusing to index an invalid warehouse: {report}"
        )));
    }
    let index = build_index(&warehouse).map_err(CliError::data)?;
    let out = args
        .out
        .unwrap_or_else(|| doc_path(&args.input.dir, DocumentKind::Index));
    fs::write(&out, serialize_index(&index)).map_err(|e| CliError::in_file(&out, e))?;
    eprintln!("wrote {} ({} cells)", out.display(), index.cells.len());
    Ok(())
}

fn cmd_query(args: QueryArgs) -> Result<(), CliError> {
    let text = match (&args.query, &args.query_file) {
        (Some(q), None) => q.clone(),
        (None, Some(path)) => {
            fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?
        }
        _ => return Err(CliError::Usage("exactly one of --q or --query-file".into())),
    };
    let query = parse_query(text.trim()).map_err(|e| CliError::Data(format!("query: {e}")))?;

    let index_path = args.index.clone().or_else(|| {
        args.dir
            .as_ref()
            .map(|d| doc_path(d, DocumentKind::Index))
            .filter(|p| p.is_file())
    });

    let use_index = match args.path {
        QueryPath::Index => true,
        QueryPath::Join => false,
        QueryPath::Auto => index_path.is_some(),
    };

    let table = if use_index {
        let path = index_path.ok_or_else(|| {
            CliError::Usage("--path index needs --index or an Index.xml in --dir".into())
        })?;
        // Prefer the authoritative schema when the warehouse is present.
        let schema = match &args.dir {
            Some(dir) if doc_path(dir, DocumentKind::Schema).is_file() => {
                let p = doc_path(dir, DocumentKind::Schema);
                Some(open(&p).and_then(|r| {
                    xml::parse_schema(r).map_err(|e| CliError::in_file(&p, e))
                })?)
            }
            _ => None,
        };
        let index = match schema {
            Some(schema) => parse_index_with_schema(open(&path)?, &schema)
                .map_err(|e| CliError::in_file(&path, e))?,
            None => xml::parse_index(open(&path)?).map_err(|e| CliError::in_file(&path, e))?,
        };
        let bound = bind(&query, &index.schema).map_err(|e| CliError::Data(format!("query: {e}")))?;
        let (table, _) = eval_with_index(&rewrite_for_index(bound), &index)
            .map_err(CliError::data)?;
        table
    } else {
        let dir = args
            .dir
            .as_ref()
            .ok_or_else(|| CliError::Usage("--path join needs --dir".into()))?;
        let warehouse = load_warehouse(dir)?;
        let bound =
            bind(&query, warehouse.schema()).map_err(|e| CliError::Data(format!("query: {e}")))?;
        let (table, _) = eval_no_index(&bound, &warehouse).map_err(CliError::data)?;
        table
    };

    write_output(args.out.as_deref(), &result_table_csv(&table))
}

fn cmd_cost(args: CostArgs) -> Result<(), CliError> {
    let rows = sweep(&args.cells, args.dims, args.members, args.attrs)
        .map_err(CliError::data)?;
    write_output(args.out.as_deref(), &cost_sweep_csv(&rows))
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let profile = load_profile(&args.profile)?;
    let mut workload = Vec::new();
    for (i, text) in args.queries.iter().enumerate() {
        let query =
            parse_query(text.trim()).map_err(|e| CliError::Data(format!("query {}: {e}", i + 1)))?;
        workload.push(Workload::new(format!("q{}", i + 1), query));
    }

    let sizes = args.sizes.clone().unwrap_or_else(|| vec![profile.cells]);
    let user_workload = if workload.is_empty() {
        None
    } else {
        Some(workload.as_slice())
    };

    let reports = if sizes == [profile.cells] && user_workload.is_some() {
        // Single size with explicit queries: no rescaling involved.
        let warehouse = generate(&profile).map_err(CliError::data)?;
        let index = build_index(&warehouse).map_err(CliError::data)?;
        vec![run_bench(&warehouse, &index, workload.as_slice(), args.runs)
            .map_err(CliError::data)?]
    } else {
        size_sweep(&profile, &sizes, user_workload, args.runs).map_err(CliError::data)?
    };

    let entries: Vec<_> = reports
        .iter()
        .flat_map(|r| r.entries.iter().cloned())
        .collect();
    for report in &reports {
        for e in &report.entries {
            eprintln!(
                "# cells={} query={} os={} arch={} runs={} memoized_join_ms={:.3}",
                report.cells, e.query_id, report.env.os, report.env.arch, report.env.runs,
                e.t_noindex_memo_ms
            );
        }
        for w in &report.warnings {
            eprintln!("warning: cells={}: {w}", report.cells);
        }
    }
    write_output(args.out.as_deref(), &bench_csv(&entries))
}
