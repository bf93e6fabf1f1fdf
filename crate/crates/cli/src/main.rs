//! Command-line driver for program induction over grid scenes.
//!
//! Subcommands: `solve` runs induction on one concept file, `gen` writes
//! concept/ground-truth files from templates or fixed diagnostics, `trace`
//! renders a program's execution step by step, `bench` runs a manifest of
//! concepts under one or more search modes, and `train` writes the built-in
//! transition model and dependency mask to disk.
//!
//! Exit codes: 0 solved/ok, 1 usage or I/O error, 2 budget exhausted,
//! 3 frontier exhausted, 4 unsatisfiable template.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cogscript::corpus::{
    default_mask, fixture, generate, load_concept, load_manifest, save_concept, save_manifest,
    save_program, training_programs, CorpusError, GeneratedConcept, Manifest, ManifestEntry,
};
use cogscript::emulator::{
    execute, execute_untraced, parse_program,
    render::{render_trace, render_trace_svgs},
    Outcome, Program,
};
use cogscript::model::{train, Mask, TransitionModel, DEFAULT_ALPHA, DEFAULT_EPSILON_ARG};
use cogscript::search::{
    induce, InductionResult, SearchConfig, SearchMode, SearchStatus, SubgoalKind, DEFAULT_BUDGET,
};
use cogscript::world::{match_objects, Concept, MatchMode, Scene};

const EXIT_BUDGET: i32 = 2;
const EXIT_FRONTIER: i32 = 3;
const EXIT_UNSATISFIABLE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "cogscript",
    version,
    about = "Induce grid-scene transformation programs from examples",
    after_help = "Exit codes: 0 solved/ok, 1 usage or I/O error, 2 budget exhausted, \
                  3 frontier exhausted, 4 unsatisfiable template.\n\
                  COGSCRIPT_MODEL_DIR names a directory whose model.json/mask.json are \
                  used when --model/--mask are not passed."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Induce a program for one concept file.
    Solve(SolveArgs),
    /// Generate concept files from a template or a fixed diagnostic.
    Gen(GenArgs),
    /// Execute a program on a scene and render every step.
    Trace(TraceArgs),
    /// Run every concept in a manifest under one or more search modes.
    Bench(BenchArgs),
    /// Write the built-in transition model and dependency mask to disk.
    Train(TrainArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Naive,
    Factorized,
}

impl ModeArg {
    fn as_str(self) -> &'static str {
        match self {
            ModeArg::Naive => "naive",
            ModeArg::Factorized => "factorized",
        }
    }
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> SearchMode {
        match m {
            ModeArg::Naive => SearchMode::Naive,
            ModeArg::Factorized => SearchMode::Factorized,
        }
    }
}

/// Search options shared by `solve` and `bench`.
#[derive(Args)]
struct SearchFlags {
    /// Program-evaluation budget per induction run.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Disable the single-edit mutation passes.
    #[arg(long)]
    no_mutation: bool,
    /// Count an object as matched only when its id also agrees.
    #[arg(long)]
    match_by_id: bool,
    /// After a failed run, retry with the first sub-goal's object set banned,
    /// forcing a different placement order on the shared budget.
    #[arg(long)]
    order_retry: bool,
    /// Floor probability for instruction arguments absent from the concept's
    /// input/output differences.
    #[arg(long, default_value_t = DEFAULT_EPSILON_ARG)]
    epsilon_arg: f64,
    /// Recorded in reports; the search itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for batch candidate evaluation (results are identical
    /// for any value).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Transition-model file; overrides COGSCRIPT_MODEL_DIR and the built-in
    /// model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dependency-mask file; the built-in training programs are retrained
    /// under it.
    #[arg(long, conflicts_with = "model")]
    mask: Option<PathBuf>,
}

impl SearchFlags {
    fn config(&self, mode: SearchMode, budget: u64) -> SearchConfig {
        SearchConfig {
            n_progs: budget,
            mode,
            mutation_enabled: !self.no_mutation,
            match_mode: if self.match_by_id {
                MatchMode::ById
            } else {
                MatchMode::ByProperty
            },
            epsilon_arg: self.epsilon_arg,
            seed: self.seed,
            parallel_workers: self.workers,
            order_retry: self.order_retry,
            ..SearchConfig::default()
        }
    }

    fn resolve_model(&self) -> Result<TransitionModel> {
        if let Some(path) = &self.model {
            return TransitionModel::load(path)
                .with_context(|| format!("loading model {}", path.display()));
        }
        if let Some(path) = &self.mask {
            let mask =
                Mask::load(path).with_context(|| format!("loading mask {}", path.display()))?;
            return Ok(train(&training_programs(), DEFAULT_ALPHA, &mask)?);
        }
        if let Ok(dir) = std::env::var("COGSCRIPT_MODEL_DIR") {
            let path = Path::new(&dir).join("model.json");
            if path.exists() {
                return TransitionModel::load(&path)
                    .with_context(|| format!("loading model {}", path.display()));
            }
        }
        Ok(cogscript::corpus::default_model())
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Concept file to solve.
    #[arg(long)]
    concept: PathBuf,
    /// Search mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Factorized)]
    mode: ModeArg,
    /// Where to write the found program (default: the concept path with a
    /// .solved.program extension).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SearchFlags,
}

#[derive(Args)]
struct GenArgs {
    /// Template to sample (recolor_by_color, move_to_corner, touch,
    /// touch_and_recolor, move_and_replace, swap_locations, stack_variable,
    /// k_independent_moves).
    #[arg(long, conflicts_with = "fixture")]
    template: Option<String>,
    /// Fixed diagnostic to emit (wrong_order, mistaken_identity,
    /// faulty_argument, swap_locations, replace_demo, stack_demo).
    #[arg(long)]
    fixture: Option<String>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds to generate.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Manifest filename written inside the output directory.
    #[arg(long, default_value = "corpus.manifest")]
    manifest: String,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// Program file to execute.
    #[arg(long)]
    program: PathBuf,
    /// Scene file (JSON) to run it on.
    #[arg(long, conflicts_with = "concept", required_unless_present = "concept")]
    scene: Option<PathBuf>,
    /// Concept file; the chosen example's input scene is traced.
    #[arg(long)]
    concept: Option<PathBuf>,
    /// Example index within --concept.
    #[arg(long, default_value_t = 0)]
    example: usize,
    /// Also write one SVG per step into this directory.
    #[arg(long)]
    svg_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest listing the concepts to run.
    #[arg(long)]
    manifest: PathBuf,
    /// Search modes to run for every concept.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "factorized,naive")]
    modes: Vec<ModeArg>,
    /// Line-delimited JSON report file, one record per row.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Histogram data file: one "visited wall_ms" pair per completed row.
    #[arg(long)]
    hist: Option<PathBuf>,
    #[command(flatten)]
    flags: SearchFlags,
}

#[derive(Args)]
struct TrainArgs {
    /// Output directory for model.json and mask.json (default:
    /// COGSCRIPT_MODEL_DIR, then the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Laplace smoothing weight added to permitted transitions.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Train(args) => cmd_train(args),
    };
    match result {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(1);
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let concept = load_concept(&args.concept)
        .with_context(|| format!("loading concept {}", args.concept.display()))?;
    let model = args.flags.resolve_model()?;
    let config = args.flags.config(args.mode.into(), args.flags.budget);
    let result = induce(&concept, &model, &config);

    let mut report = String::new();
    let _ = writeln!(
        report,
        "concept: {} ({} examples)",
        concept.name,
        concept.examples.len()
    );
    let _ = writeln!(report, "mode: {}", args.mode.as_str());
    let _ = writeln!(report, "budget: {}", args.flags.budget);
    let _ = writeln!(report, "status: {}", status_str(result.status));
    let _ = writeln!(report, "visited: {}", result.visited);
    if result.mutation_rounds > 0 {
        let _ = writeln!(report, "mutation rounds: {}", result.mutation_rounds);
    }
    if let Some(dl) = result.dl {
        let _ = writeln!(report, "description length: {dl:.6} nats");
    }
    if !result.subgoal_history.is_empty() {
        let _ = writeln!(report, "sub-goals:");
        for (i, rec) in result.subgoal_history.iter().enumerate() {
            let kind = match rec.kind {
                SubgoalKind::Subgoal => "subgoal",
                SubgoalKind::Mutation => "mutation",
                SubgoalKind::LineSwitch => "line-switch",
            };
            let newly: Vec<String> = rec
                .newly_matched
                .iter()
                .map(|ids| {
                    let ids: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
                    format!("[{}]", ids.join(" "))
                })
                .collect();
            let _ = writeln!(
                report,
                "  {i}: {kind} at {} evals, root length {}, newly matched {}",
                rec.visited_at,
                rec.root.len(),
                newly.join(" ")
            );
        }
    }
    match (&result.program, &result.best_partial) {
        (Some(program), _) => {
            let _ = writeln!(report, "program ({} instructions):", program.len());
            for inst in program.instructions() {
                let _ = writeln!(report, "  {inst}");
            }
            let _ = writeln!(report, "matched objects:");
            for line in matched_lines(program, &concept, config.match_mode) {
                let _ = writeln!(report, "{line}");
            }
        }
        (None, Some(partial)) => {
            let _ = writeln!(report, "best partial ({} instructions):", partial.len());
            for inst in partial.instructions() {
                let _ = writeln!(report, "  {inst}");
            }
            let _ = writeln!(report, "matched objects (best partial):");
            for line in matched_lines(partial, &concept, config.match_mode) {
                let _ = writeln!(report, "{line}");
            }
        }
        (None, None) => {}
    }

    if let Some(program) = &result.program {
        let out = args
            .out
            .unwrap_or_else(|| args.concept.with_extension("solved.program"));
        save_program(&out, program)
            .with_context(|| format!("writing program {}", out.display()))?;
        let _ = writeln!(report, "wrote {}", out.display());
    }
    print!("{report}");

    Ok(match result.status {
        SearchStatus::Solved => 0,
        SearchStatus::BudgetExhausted => EXIT_BUDGET,
        SearchStatus::FrontierExhausted => EXIT_FRONTIER,
    })
}

fn status_str(status: SearchStatus) -> &'static str {
    match status {
        SearchStatus::Solved => "solved",
        SearchStatus::BudgetExhausted => "budget_exhausted",
        SearchStatus::FrontierExhausted => "frontier_exhausted",
    }
}

/// Per-example matched-target summary for a candidate program.
fn matched_lines(program: &Program, concept: &Concept, mode: MatchMode) -> Vec<String> {
    concept
        .examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let run = execute_untraced(program, &ex.input);
            match run.outcome {
                Outcome::Error(e) => format!("  example {i}: execution error: {e}"),
                Outcome::Ok => {
                    match match_objects(
                        &run.final_state.working,
                        &ex.output,
                        run.final_state.held,
                        mode,
                    ) {
                        Ok(report) => {
                            let ids: Vec<String> = report
                                .matched_target_ids()
                                .iter()
                                .map(|id| id.to_string())
                                .collect();
                            format!(
                                "  example {i}: {}/{} targets [{}]",
                                report.len(),
                                ex.output.objects().len(),
                                ids.join(" ")
                            )
                        }
                        Err(e) => format!("  example {i}: {e}"),
                    }
                }
            }
        })
        .collect()
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let mut jobs: Vec<(String, Option<u64>, GeneratedConcept)> = Vec::new();
    match (&args.template, &args.fixture) {
        (Some(template), None) => {
            for seed in args.seed..args.seed + args.count.max(1) {
                match generate(template, seed) {
                    Ok(g) => jobs.push((template.clone(), Some(seed), g)),
                    Err(e @ CorpusError::Unsatisfiable { .. }) => {
                        eprintln!("error: {e}");
                        return Ok(EXIT_UNSATISFIABLE);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        (None, Some(name)) => {
            let g = fixture(name)?;
            jobs.push((name.clone(), None, g));
        }
        _ => bail!("exactly one of --template or --fixture is required"),
    }

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let manifest_path = args.out_dir.join(&args.manifest);
    let mut targets: Vec<PathBuf> = vec![manifest_path.clone()];
    for (_, _, g) in &jobs {
        targets.push(args.out_dir.join(format!("{}.concept", g.concept.name)));
        targets.push(args.out_dir.join(format!("{}.program", g.concept.name)));
    }
    if !args.force {
        for path in &targets {
            if path.exists() {
                bail!("refusing to overwrite {} (pass --force)", path.display());
            }
        }
    }

    let mut manifest = Manifest::default();
    for (source, seed, g) in &jobs {
        let concept_file = format!("{}.concept", g.concept.name);
        let program_file = format!("{}.program", g.concept.name);
        save_concept(&args.out_dir.join(&concept_file), &g.concept)?;
        save_program(&args.out_dir.join(&program_file), &g.ground_truth)?;
        println!("wrote {concept_file} + {program_file}");
        manifest.entries.push(ManifestEntry {
            name: g.concept.name.clone(),
            source: source.clone(),
            seed: *seed,
            concept_file,
            ground_truth_file: program_file,
            budget: None,
        });
    }
    save_manifest(&manifest_path, &manifest)?;
    println!(
        "wrote {} ({} entries)",
        manifest_path.display(),
        manifest.entries.len()
    );
    Ok(0)
}

fn cmd_trace(args: TraceArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.program)
        .with_context(|| format!("reading {}", args.program.display()))?;
    let program = parse_program(&text)
        .with_context(|| format!("parsing {}", args.program.display()))?;
    let scene: Scene = match (&args.scene, &args.concept) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing scene {}", path.display()))?
        }
        (None, Some(path)) => {
            let concept = load_concept(path)?;
            concept
                .examples
                .get(args.example)
                .with_context(|| {
                    format!(
                        "concept has {} examples, no index {}",
                        concept.examples.len(),
                        args.example
                    )
                })?
                .input
                .clone()
        }
        _ => bail!("exactly one of --scene or --concept is required"),
    };

    let result = execute(&program, &scene);
    print!("{}", render_trace(&program, &result));
    if let Some(dir) = &args.svg_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let frames = render_trace_svgs(&result);
        let n = frames.len();
        for (name, svg) in frames {
            fs::write(dir.join(&name), svg)?;
        }
        println!("wrote {n} svg frames to {}", dir.display());
    }
    Ok(0)
}

struct BenchRow {
    name: String,
    mode: &'static str,
    status: &'static str,
    visited: u64,
    wall_ms: f64,
    program_len: Option<usize>,
    mutation_rounds: u32,
    dl: Option<f64>,
    error: Option<String>,
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let manifest = load_manifest(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let model = args.flags.resolve_model()?;

    let mut rows: Vec<BenchRow> = Vec::new();
    for entry in &manifest.entries {
        let budget = entry.budget.unwrap_or(args.flags.budget);
        let concept = match load_concept(&base.join(&entry.concept_file)) {
            Ok(c) => c,
            Err(e) => {
                rows.push(BenchRow {
                    name: entry.name.clone(),
                    mode: "-",
                    status: "error",
                    visited: 0,
                    wall_ms: 0.0,
                    program_len: None,
                    mutation_rounds: 0,
                    dl: None,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        for mode in &args.modes {
            let config = args.flags.config((*mode).into(), budget);
            let start = Instant::now();
            let result: InductionResult = induce(&concept, &model, &config);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            rows.push(BenchRow {
                name: entry.name.clone(),
                mode: mode.as_str(),
                status: status_str(result.status),
                visited: result.visited,
                wall_ms,
                program_len: result.program.as_ref().map(Program::len),
                mutation_rounds: result.mutation_rounds,
                dl: result.dl,
                error: None,
            });
        }
    }

    let name_w = rows
        .iter()
        .map(|r| r.name.len())
        .chain(std::iter::once(catalog_header().0.len()))
        .max()
        .unwrap_or(4);
    let (hname, hrest) = catalog_header();
    println!("{hname:<name_w$}  {hrest}");
    for row in &rows {
        let len = row
            .program_len
            .map(|l| l.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<name_w$}  {:<10}  {:<18}  {:>8}  {:>9.1}  {:>4}  {:>4}",
            row.name, row.mode, row.status, row.visited, row.wall_ms, len, row.mutation_rounds
        );
    }
    for mode in &args.modes {
        let of_mode: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.mode == mode.as_str())
            .collect();
        if of_mode.is_empty() {
            continue;
        }
        let solved = of_mode.iter().filter(|r| r.status == "solved").count();
        let visited = median(of_mode.iter().map(|r| r.visited as f64));
        let wall = median(of_mode.iter().map(|r| r.wall_ms));
        println!(
            "mode {}: solved {}/{}, median visited {:.1}, median wall {:.1} ms",
            mode.as_str(),
            solved,
            of_mode.len(),
            visited,
            wall
        );
    }

    if let Some(path) = &args.report {
        let mut text = String::new();
        for row in &rows {
            let record = serde_json::json!({
                "name": row.name,
                "mode": row.mode,
                "status": row.status,
                "visited": row.visited,
                "wall_ms": row.wall_ms,
                "program_len": row.program_len,
                "mutation_rounds": row.mutation_rounds,
                "dl": row.dl,
                "error": row.error,
            });
            let _ = writeln!(text, "{record}");
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.hist {
        let mut text = String::new();
        for row in rows.iter().filter(|r| r.error.is_none()) {
            let _ = writeln!(text, "{} {:.3}", row.visited, row.wall_ms);
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn catalog_header() -> (&'static str, String) {
    (
        "name",
        format!(
            "{:<10}  {:<18}  {:>8}  {:>9}  {:>4}  {:>4}",
            "mode", "status", "visited", "wall_ms", "len", "mut"
        ),
    )
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn cmd_train(args: TrainArgs) -> Result<i32> {
    let dir = args
        .out_dir
        .or_else(|| std::env::var("COGSCRIPT_MODEL_DIR").ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let model_path = dir.join("model.json");
    let mask_path = dir.join("mask.json");
    if !args.force {
        for path in [&model_path, &mask_path] {
            if path.exists() {
                bail!("refusing to overwrite {} (pass --force)", path.display());
            }
        }
    }
    let programs = training_programs();
    let mask = default_mask();
    let model = train(&programs, args.alpha, &mask)?;
    mask.save(&mask_path)?;
    model.save(&model_path)?;
    println!(
        "trained on {} programs over {} instruction states (alpha {})",
        programs.len(),
        model.states().len(),
        args.alpha
    );
    println!("wrote {}", model_path.display());
    println!("wrote {}", mask_path.display());
    Ok(0)
}
