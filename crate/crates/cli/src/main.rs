//! `tasknet`: generate problems, run single episodes or batches, emit
//! reports, and produce or lint method libraries.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tasknet::agent::Condition;
use tasknet::domains::{CellParams, Domain};
use tasknet::gateway::{generate_task_network, BackendConfig, Exhaustion};
use tasknet::harness::{self, EpisodeSetup, ReportFormat};
use tasknet::resources::STANDARD_FILES;
use tasknet::task_network::{load_method_library_with_order, validate_library, SubtaskOrder};

use config::{load_batch_spec, Config, HttpOverrides};

#[derive(Debug, Parser)]
#[command(name = "tasknet", version, about = "Task-network agent experiments")]
struct Cli {
    /// TOML file with backends, reward constants and domain parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the endpoint of every HTTP backend.
    #[arg(long, global = true, env = "TASKNET_ENDPOINT", hide_env_values = true)]
    endpoint: Option<String>,
    /// Overrides the API key of every HTTP backend.
    #[arg(long, global = true, env = "TASKNET_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit generated problem instances as JSON.
    Gen(GenArgs),
    /// Run one episode and print its full result.
    Run(RunArgs),
    /// Run a batch spec, writing per-episode records and a report.
    Batch(BatchArgs),
    /// Rebuild tables and charts from a batch directory.
    Report(ReportArgs),
    /// Ask the generator backend for a method library.
    MakeTn(MakeTnArgs),
    /// Lint a method library.
    ValidateTn(ValidateTnArgs),
}

#[derive(Debug, Args)]
struct CellArgs {
    /// blocksworld (bw), unit-movement (um) or recipe (rg).
    #[arg(long, short)]
    domain: Domain,
    /// Blocks.
    #[arg(long)]
    b: Option<usize>,
    /// Goal tower height.
    #[arg(long)]
    h: Option<usize>,
    /// Units per group.
    #[arg(long)]
    n: Option<usize>,
    /// Units needed per covered location.
    #[arg(long)]
    k: Option<usize>,
    /// Extra ingredients in a recipe request.
    #[arg(long)]
    distractors: Option<usize>,
}

impl CellArgs {
    fn cell(&self, cfg: &Config) -> CellParams {
        match cfg.default_cell(self.domain) {
            CellParams::Blocksworld { b, h } => CellParams::Blocksworld {
                b: self.b.unwrap_or(b),
                h: self.h.unwrap_or(h),
            },
            CellParams::UnitMovement { n, k } => CellParams::UnitMovement {
                n: self.n.unwrap_or(n),
                k: self.k.unwrap_or(k),
            },
            CellParams::Recipe { distractors } => CellParams::Recipe {
                distractors: self.distractors.unwrap_or(distractors),
            },
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    cell: CellArgs,
    /// Seed of the first instance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances to emit, with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Include a known-correct answer.
    #[arg(long)]
    with_answer: bool,
    /// Write one directory per instance instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    cell: CellArgs,
    /// Instance seed; also seeds the episode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// human-tn, llm-tn or no-tn.
    #[arg(long, default_value = "human-tn")]
    condition: Condition,
    /// Method library to use instead of the bundled one.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Act with a scripted oracle that writes a correct answer.
    #[arg(long, conflicts_with = "script")]
    oracle: bool,
    /// JSON list of actor replies, replayed in order.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Copy the final workspace files into this directory.
    #[arg(long)]
    workspace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Batch spec, TOML or JSON.
    spec: PathBuf,
    /// Output directory; finished episodes found here are not rerun.
    #[arg(long)]
    out: PathBuf,
    /// Parallel episodes; overrides the spec.
    #[arg(long)]
    workers: Option<usize>,
    /// Skip writing tables and charts.
    #[arg(long)]
    no_report: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Svg => ReportFormat::Svg,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory written by `batch`.
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_values = ["csv", "svg", "json"])]
    format: Vec<FormatArg>,
    /// Where to write; defaults to the batch directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MakeTnArgs {
    /// Use this domain's bundled problem specification.
    #[arg(long, short, required_unless_present = "spec_file", conflicts_with = "spec_file")]
    domain: Option<Domain>,
    /// Problem specification text file.
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Regeneration attempts after a rejected library; defaults to network_retries.
    #[arg(long)]
    retries: Option<u32>,
    /// Run the highest-numbered subtask first.
    #[arg(long)]
    descending: bool,
    /// Write the library here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateTnArgs {
    /// Method library JSON file.
    library: PathBuf,
    /// Additional workspace files effect lists may name.
    #[arg(long = "known-file")]
    known_files: Vec<String>,
    /// Run the highest-numbered subtask first.
    #[arg(long)]
    descending: bool,
    /// Treat subtasks without a method as errors.
    #[arg(long)]
    strict: bool,
}

fn order(descending: bool) -> SubtaskOrder {
    if descending {
        SubtaskOrder::Descending
    } else {
        SubtaskOrder::Ascending
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn gen(cfg: &Config, args: &GenArgs) -> Result<()> {
    let cell = args.cell.cell(cfg);
    let mut items = Vec::new();
    for seed in args.seed..args.seed + args.count {
        let instance = cell
            .generate(seed)
            .with_context(|| format!("generating {cell} seed {seed}"))?;
        let answer = if args.with_answer {
            Some(
                instance
                    .oracle_answer()
                    .with_context(|| format!("solving {cell} seed {seed}"))?,
            )
        } else {
            None
        };
        if let Some(dir) = &args.out {
            let dir = dir.join(format!(
                "{}-{}-seed{seed}",
                cell.domain(),
                cell.label().replace([',', '='], "")
            ));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("instance.json"), serde_json::to_string_pretty(&instance)?)?;
            fs::write(dir.join("request.txt"), instance.request())?;
            if let Some(answer) = &answer {
                fs::write(dir.join("answer.txt"), answer)?;
            }
            println!("{}", dir.display());
        } else {
            let mut item = json!({"seed": seed, "cell": cell, "instance": instance, "request": instance.request()});
            if let Some(answer) = answer {
                item["answer"] = json!(answer);
            }
            items.push(item);
        }
    }
    if args.out.is_none() {
        write_or_print(None, &serde_json::to_string_pretty(&items)?)?;
    }
    Ok(())
}

fn run(cfg: &Config, overrides: &HttpOverrides, args: &RunArgs) -> Result<()> {
    let cell = args.cell.cell(cfg);
    let instance = cell
        .generate(args.seed)
        .with_context(|| format!("generating {cell} seed {}", args.seed))?;
    let library = match &args.network {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            tasknet::task_network::load_method_library(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => harness::library_for(cell.domain(), args.condition, &cfg.llm_networks).map_err(|e| anyhow!(e))?,
    };
    let mut actor = if args.oracle {
        BackendConfig::Oracle
    } else if let Some(path) = &args.script {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let responses: Vec<String> = serde_json::from_str(&text)
            .with_context(|| format!("{} must hold a JSON list of strings", path.display()))?;
        BackendConfig::Scripted {
            responses,
            on_exhausted: Exhaustion::Error,
        }
    } else {
        cfg.actor
            .clone()
            .context("no actor backend: set [actor] in the config, or pass --oracle or --script")?
    };
    let mut verifier = cfg.verifier.clone().unwrap_or_else(BackendConfig::always_pass);
    overrides.apply(&mut actor);
    overrides.apply(&mut verifier);
    let setup = EpisodeSetup {
        actor: &actor,
        verifier: &verifier,
        reward: cfg.reward,
        env: &cfg.env,
        timing: cfg.timing,
    };
    let result =
        harness::run_instance(&setup, &instance, args.condition, library, args.seed).map_err(|e| anyhow!(e))?;

    if let Some(dir) = &args.workspace {
        for (path, content) in &result.final_files {
            let target = dir.join(path);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&target, content).with_context(|| format!("writing {}", target.display()))?;
        }
    }
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&result)?)?;
    let verdict = result
        .verdict
        .as_ref()
        .map_or_else(|| "no verdict".to_string(), ToString::to_string);
    eprintln!(
        "{cell} seed {}: success={} termination={:?} iterations={} reward={:.2} ({verdict})",
        args.seed, result.success, result.termination, result.iterations, result.reward
    );
    if let Some(error) = &result.error {
        eprintln!("error: {error}");
    }
    Ok(())
}

fn print_cells(result: &harness::BatchResult) {
    println!(
        "{:<32} {:<9} {:>6} {:>7} {:>8} {:>17} {:>6}",
        "cell", "condition", "trials", "success", "rate", "interval", "infra"
    );
    for c in &result.cells {
        let rate = c.success_rate.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"));
        let interval = c
            .interval
            .map_or_else(|| "-".to_string(), |(lo, hi)| format!("[{lo:.3}, {hi:.3}]"));
        println!(
            "{:<32} {:<9} {:>6} {:>7} {:>8} {:>17} {:>6}",
            c.cell.to_string(),
            c.condition.as_str(),
            c.trials,
            c.successes,
            rate,
            interval,
            c.infra_errors
        );
    }
}

fn batch(overrides: &HttpOverrides, args: &BatchArgs) -> Result<()> {
    let mut spec = load_batch_spec(&args.spec)?;
    overrides.apply_spec(&mut spec);
    if let Some(workers) = args.workers {
        spec.workers = workers;
    }
    let result = harness::run_batch(&spec, Some(&args.out)).with_context(|| format!("running batch {}", spec.name))?;
    print_cells(&result);
    if !args.no_report {
        let files = harness::emit_report(&result, &args.out, &ReportFormat::ALL)?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let (_, result) =
        harness::load_batch(&args.dir).with_context(|| format!("loading batch {}", args.dir.display()))?;
    let formats: Vec<ReportFormat> = args.format.iter().map(|&f| f.into()).collect();
    let out = args.out.as_deref().unwrap_or(&args.dir);
    print_cells(&result);
    for f in harness::emit_report(&result, out, &formats)? {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn make_tn(cfg: &Config, overrides: &HttpOverrides, args: &MakeTnArgs) -> Result<()> {
    let spec = match (&args.domain, &args.spec_file) {
        (Some(domain), _) => domain.problem_spec().to_string(),
        (None, Some(path)) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, None) => bail!("pass --domain or --spec-file"),
    };
    let mut backend_cfg = cfg
        .generator
        .clone()
        .or_else(|| cfg.actor.clone())
        .context("no generator backend: set [generator] or [actor] in the config")?;
    overrides.apply(&mut backend_cfg);
    let mut backend = backend_cfg.build(None)?;
    let retries = args.retries.unwrap_or(cfg.network_retries);
    let generated = generate_task_network(backend.as_mut(), &spec, retries, order(args.descending))?;
    eprintln!("accepted after {} attempt(s)", generated.attempts);
    for w in &generated.report.dangling_subtasks {
        eprintln!("warning: subtask `{w}` has no method and runs as a primitive task");
    }
    for (id, file) in &generated.report.unknown_effect_files {
        eprintln!("warning: {id} names unknown file `{file}`");
    }
    write_or_print(
        args.out.as_deref(),
        &serde_json::to_string_pretty(&generated.library.to_json())?,
    )
}

fn validate_tn(args: &ValidateTnArgs) -> Result<bool> {
    let text = fs::read_to_string(&args.library).with_context(|| format!("reading {}", args.library.display()))?;
    let lib = load_method_library_with_order(&text, order(args.descending))
        .with_context(|| format!("loading {}", args.library.display()))?;
    let mut known: Vec<&str> = STANDARD_FILES.to_vec();
    known.extend(args.known_files.iter().map(String::as_str));
    let report = validate_library(&lib, &known);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "methods": lib.len(),
            "warnings": lib.warnings(),
            "report": report,
        }))?
    );
    let ok = report.cycles.is_empty()
        && report.unknown_effect_files.is_empty()
        && (!args.strict || report.dangling_subtasks.is_empty());
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = HttpOverrides {
        endpoint: cli.endpoint.clone(),
        api_key: cli.api_key.clone(),
    };
    let outcome = (|| -> Result<bool> {
        let cfg = Config::load(cli.config.as_deref())?;
        match &cli.command {
            Command::Gen(args) => gen(&cfg, args).map(|_| true),
            Command::Run(args) => run(&cfg, &overrides, args).map(|_| true),
            Command::Batch(args) => batch(&overrides, args).map(|_| true),
            Command::Report(args) => report(args).map(|_| true),
            Command::MakeTn(args) => make_tn(&cfg, &overrides, args).map(|_| true),
            Command::ValidateTn(args) => validate_tn(args),
        }
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // reader went away, e.g. `| head`
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
