use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use tabverify::config::EngineConfig;
use tabverify::dsl::{execute, type_check, Program};
use tabverify::harness::{
    evaluate_instances, load_dataset, load_table, read_instances, sample, EvalReport, Instance,
    Split,
};
use tabverify::linearize::{linearize_record, prune_columns, LinearizeMode, Scan, SegmentOrder};
use tabverify::linker::link;
use tabverify::ranker::{
    read_dump, train, write_dump, DumpCandidate, DumpRecord, Mode, Scorer, ScorerModel,
};
use tabverify::search::search;
use tabverify::table::{parse_table, ParseOptions, Table, View};

/// Input problems: missing or malformed files. Exit code 2.
#[derive(Debug)]
struct DataError(anyhow::Error);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for DataError {}

fn data_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(DataError(e.into()))
}

#[derive(Parser)]
#[command(
    name = "tabverify",
    version,
    about = "Verify statements against tables by program search"
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TableArgs {
    /// Table file (`#`-delimited, header row first).
    #[arg(long)]
    table: PathBuf,
    /// Table caption.
    #[arg(long, default_value = "")]
    caption: String,
    /// Cell delimiter.
    #[arg(long, default_value_t = '#')]
    delimiter: char,
    /// Reject tables over 50 rows or 10 columns.
    #[arg(long)]
    strict_dims: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    max_step: Option<usize>,
    #[arg(long)]
    max_traces: Option<usize>,
    /// Search the full function set.
    #[arg(long)]
    no_triggers: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a statement is entailed by a table.
    Verify {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        statement: String,
        #[arg(long)]
        mode: Option<Mode>,
        /// Scorer model (needed for weighted and ranking modes).
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// List candidate programs, or write a candidate dump in batch mode.
    Search {
        /// Table file for a single statement.
        #[arg(long, requires = "statement")]
        table: Option<PathBuf>,
        #[arg(long, default_value = "")]
        caption: String,
        #[arg(long, default_value_t = '#')]
        delimiter: char,
        #[arg(long)]
        strict_dims: bool,
        #[arg(long, requires = "table")]
        statement: Option<String>,
        /// Statements as JSON lines (`table_id`, `statement`, `label`).
        #[arg(long, conflicts_with = "statement")]
        batch: Option<PathBuf>,
        /// Directory holding the tables named in the batch file.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Dataset root, as an alternative to `--batch`.
        #[arg(long, conflicts_with = "batch")]
        data: Option<PathBuf>,
        #[arg(long, default_value = "train")]
        split: Split,
        #[arg(long)]
        limit: Option<usize>,
        /// Dump output path (batch mode).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Score candidates with this model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Show entity links for a statement, as JSON.
    Link {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        statement: String,
    },
    /// Execute a program trace against a table.
    Exec {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        program: String,
    },
    /// Serialize a table and statement into one premise string.
    Linearize {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        statement: String,
        #[arg(long)]
        mode: Option<LinearizeMode>,
        #[arg(long)]
        scan: Option<Scan>,
        #[arg(long)]
        order: Option<SegmentOrder>,
        /// Keep only columns linked to the statement.
        #[arg(long)]
        prune: bool,
        /// Print the full record as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Train a scorer from a candidate dump.
    TrainRanker {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add caption-token features.
        #[arg(long)]
        caption: bool,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measure verdict accuracy on a dataset split or an instance file.
    Evaluate {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long, conflicts_with = "data")]
        instances: Option<PathBuf>,
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Evaluate a seeded random sample of this many instances.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-instance results as JSON lines here.
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

fn read_table(args: &TableArgs) -> Result<Table> {
    let bytes = fs::read(&args.table)
        .with_context(|| format!("reading {}", args.table.display()))
        .map_err(data_err)?;
    let id = args
        .table
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let opts = ParseOptions {
        delimiter: args.delimiter,
        strict_dims: args.strict_dims,
    };
    let table = parse_table(&id, &bytes, opts)
        .with_context(|| format!("parsing {}", args.table.display()))
        .map_err(data_err)?;
    Ok(table.with_caption(args.caption.as_str()))
}

fn read_model(path: &Path) -> Result<ScorerModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data_err)?;
    ScorerModel::from_json(&text)
        .with_context(|| format!("loading model {}", path.display()))
        .map_err(data_err)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn apply_search_args(cfg: &mut EngineConfig, args: &SearchArgs) -> Result<()> {
    if let Some(n) = args.max_step {
        cfg.search.max_step = n;
    }
    if let Some(n) = args.max_traces {
        cfg.search.max_traces = n;
    }
    if args.no_triggers {
        cfg.search.trigger_pruning = false;
    }
    cfg.validate().map_err(data_err)
}

/// Instances plus their tables, from a dataset root or an instance file.
fn load_instances(
    data: Option<&Path>,
    split: Split,
    instances: Option<&Path>,
    tables: Option<&Path>,
) -> Result<(Vec<Instance>, BTreeMap<String, Table>)> {
    if let Some(root) = data {
        let ds = load_dataset(root, split).map_err(data_err)?;
        return Ok((ds.instances, ds.tables));
    }
    let path = instances.ok_or_else(|| anyhow!("give --data or an instance file"))?;
    let dir = tables.ok_or_else(|| anyhow!("--tables is required with an instance file"))?;
    let instances = read_instances(path).map_err(data_err)?;
    let mut loaded = BTreeMap::new();
    for inst in &instances {
        if !loaded.contains_key(&inst.table_id) {
            let t = load_table(dir, &inst.table_id, "").map_err(data_err)?;
            loaded.insert(inst.table_id.clone(), t);
        }
    }
    Ok((instances, loaded))
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = io::stdout().lock();
    let mut cfg = match &cli.config {
        Some(p) => EngineConfig::load(p).map_err(data_err)?,
        None => EngineConfig::default(),
    };
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let config_model =
        |cli_model: &Option<PathBuf>, cfg: &EngineConfig| -> Result<Option<ScorerModel>> {
            cli_model
                .as_deref()
                .or(cfg.paths.model.as_deref())
                .map(read_model)
                .transpose()
        };

    match cli.command {
        Command::Verify {
            table,
            statement,
            mode,
            model,
            search,
        } => {
            apply_search_args(&mut cfg, &search)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let table = read_table(&table)?;
            let model = if cfg.mode == Mode::Voting {
                None
            } else {
                config_model(&model, &cfg)?
            };
            let v = cfg.pipeline(model).verify(&table, &statement)?;
            writeln!(stdout, "{}\t{:.4}", v.verdict.label, v.verdict.confidence)?;
            if let Some(p) = &v.verdict.rationale {
                writeln!(stdout, "rationale\t{}", p.trace())?;
            }
            eprintln!(
                "{} candidates{}",
                v.candidates.len(),
                if v.timed_out { " (timed out)" } else { "" }
            );
        }
        Command::Search {
            table,
            caption,
            delimiter,
            strict_dims,
            statement,
            batch,
            tables,
            data,
            split,
            limit,
            out,
            model,
            search: sargs,
        } => {
            apply_search_args(&mut cfg, &sargs)?;
            let model = config_model(&model, &cfg)?;
            if let Some(statement) = statement {
                let table = read_table(&TableArgs {
                    table: table.ok_or_else(|| anyhow!("--table is required with --statement"))?,
                    caption,
                    delimiter,
                    strict_dims,
                })?;
                let linked = link(&statement, &table);
                let set = search(&table, &linked, &cfg.search);
                for c in &set.items {
                    match &model {
                        Some(m) => writeln!(
                            stdout,
                            "{}\t{}\t{:.6}",
                            c.trace,
                            c.result,
                            m.score(&linked, &c.program)
                        )?,
                        None => writeln!(stdout, "{}\t{}\t", c.trace, c.result)?,
                    }
                }
                return Ok(());
            }
            let (mut instances, tables) =
                load_instances(data.as_deref(), split, batch.as_deref(), tables.as_deref())?;
            if let Some(n) = limit {
                instances.truncate(n);
            }
            let out = out.ok_or_else(|| anyhow!("--out is required in batch mode"))?;
            let records: Vec<DumpRecord> = instances
                .par_iter()
                .map(|inst| {
                    let table = &tables[&inst.table_id];
                    let linked = link(&inst.statement, table);
                    let set = search(table, &linked, &cfg.search);
                    DumpRecord {
                        table_id: inst.table_id.clone(),
                        statement: inst.statement.clone(),
                        label: Some(inst.label),
                        candidates: set
                            .items
                            .iter()
                            .map(|c| DumpCandidate {
                                trace: c.trace.clone(),
                                result: c.result,
                            })
                            .collect(),
                        caption: table.caption.clone(),
                        linked: Some(linked),
                    }
                })
                .collect();
            write(&out, &write_dump(&records)?)?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Link { table, statement } => {
            let table = read_table(&table)?;
            writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&link(&statement, &table))?
            )?;
        }
        Command::Exec { table, program } => {
            let table = read_table(&table)?;
            let program = Program::parse(&program).map_err(data_err)?;
            type_check(&program).map_err(data_err)?;
            writeln!(stdout, "{}", execute(&program, &table).map_err(data_err)?)?;
        }
        Command::Linearize {
            table,
            statement,
            mode,
            scan,
            order,
            prune,
            json,
        } => {
            let table = read_table(&table)?;
            let mut spec = cfg.linearization;
            spec.mode = mode.unwrap_or(spec.mode);
            spec.scan = scan.unwrap_or(spec.scan);
            spec.order = order.unwrap_or(spec.order);
            let view = if prune {
                prune_columns(&table, &link(&statement, &table))
            } else {
                View::full(&table)
            };
            let rec = linearize_record(&view, &statement, &spec).map_err(data_err)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&rec)?)?;
            } else {
                writeln!(stdout, "{}", rec.text)?;
            }
        }
        Command::TrainRanker {
            dump,
            out,
            caption,
            epochs,
            seed,
        } => {
            let text = fs::read_to_string(&dump)
                .with_context(|| format!("reading {}", dump.display()))
                .map_err(data_err)?;
            let records = read_dump(&text).map_err(data_err)?;
            let mut tcfg = cfg.train.clone();
            tcfg.use_caption |= caption;
            if let Some(e) = epochs {
                tcfg.epochs = e;
            }
            if let Some(s) = seed {
                tcfg.seed = s;
            }
            let (model, report) = train(&records, &tcfg).map_err(data_err)?;
            write(&out, &model.to_json()?)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Evaluate {
            data,
            split,
            instances,
            tables,
            limit,
            seed,
            mode,
            model,
            out,
            results,
        } => {
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let data = data.or_else(|| cfg.paths.data_root.clone());
            let tables_dir = tables.or_else(|| cfg.paths.tables.clone());
            let (mut insts, tables) = load_instances(
                data.as_deref(),
                split,
                instances.as_deref(),
                tables_dir.as_deref(),
            )?;
            if let Some(n) = limit {
                insts = sample(&insts, n, seed);
            }
            let model = if cfg.mode == Mode::Voting {
                None
            } else {
                Some(
                    config_model(&model, &cfg)?
                        .ok_or_else(|| anyhow!("mode {} needs --model", cfg.mode))?,
                )
            };
            let pipeline = cfg.pipeline(model);
            let res = evaluate_instances(&insts, |id| tables.get(id), &pipeline);
            let mut report = EvalReport::from_results(&res);
            if data.is_some() {
                report.split = Some(split.name().to_string());
            }
            if let Some(p) = results {
                let mut text = String::new();
                for r in &res {
                    text.push_str(&serde_json::to_string(r)?);
                    text.push('\n');
                }
                write(&p, &text)?;
            }
            if let Some(p) = out {
                write(&p, &serde_json::to_string_pretty(&report)?)?;
            }
            write!(stdout, "{}", report.to_table())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (e.g. `| head`) is not a failure.
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<DataError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
