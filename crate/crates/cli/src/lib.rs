//! Command-line front end. [`run`] takes the argument list and output
//! streams so it can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use framesmith::bench::{builtin_cases, mixed_height_case, run_benchmark, DEFAULT_SEED};
use framesmith::format::to_canonical_json;
use framesmith::geometry::{build_topology, steps_to_json};
use framesmith::loads::{derive_loads, LoadSet};
use framesmith::model::TopologyModel;
use framesmith::pipeline::{run_pipeline, GenerationBackend, PartialArtifacts, PipelineResult};
use framesmith::problem::{load_problem, problem_to_json, MaterialSpec};
use framesmith::remote::{backend_from_config, parse_config, PipelineConfig};
use framesmith::render::{render, RenderKind, RenderSpec};
use framesmith::script::{emit_script, parse_script, AnalysisConfig};
use framesmith::solver::{internal_forces, solve_static, AnalysisResult, InternalForceDiagram};
use framesmith::validation::{action_log_text, remap_loads, validate_model};

#[derive(Parser)]
#[command(
    name = "framesmith",
    version,
    about = "2D frame modelling, repair, analysis and script generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a problem description and print it as canonical JSON
    Parse(IoArgs),
    /// Build the topology model of a problem
    Build {
        #[command(flatten)]
        io: IoArgs,
        /// Print construction-step JSON instead of the model
        #[arg(long)]
        steps: bool,
    },
    /// Check a model or script and list corrective actions
    Validate(ValidateArgs),
    /// Run the linear static analysis of a problem or script
    Analyze(IoArgs),
    /// Emit the analysis script of a problem
    Codegen {
        #[command(flatten)]
        io: IoArgs,
        /// Leave out loads
        #[arg(long)]
        unloaded: bool,
    },
    /// Draw SVG views of a problem or script
    Render(RenderArgs),
    /// Run the accuracy benchmark
    Bench(BenchArgs),
    /// Write the benchmark cases as problem files
    Cases {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all stages on a description and write every artifact
    Pipeline {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Backend configuration (TOML); deterministic when omitted
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IoArgs {
    /// Problem description (text or JSON), or a `.py` script where accepted
    input: PathBuf,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, conflicts_with = "script", required_unless_present = "script")]
    model: Option<PathBuf>,
    #[arg(long)]
    script: Option<PathBuf>,
    /// Write the repaired model or script
    #[arg(long)]
    fix: bool,
    #[arg(long, requires = "fix")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    All,
    Geometry,
    Loads,
    Axial,
    Shear,
    Moment,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    kind: KindArg,
    /// Output directory; one `<kind>.svg` per view
    #[arg(long)]
    out: PathBuf,
    /// Pixels per metre
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Add the 3-2-3 case with 5/4/5 m stories
    #[arg(long)]
    mixed_heights: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Loaded frame ready for analysis.
struct Frame {
    model: TopologyModel,
    loads: LoadSet,
    material: MaterialSpec,
    config: AnalysisConfig,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

fn is_script(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "py")
}

fn load_frame(path: &Path) -> Result<Frame, Failure> {
    let text = read(path)?;
    if is_script(path) {
        let parsed = parse_script(&text)?;
        Ok(Frame {
            model: parsed.model,
            loads: parsed.loads,
            material: parsed.material,
            config: parsed.config,
        })
    } else {
        let problem = load_problem(&text)?;
        let model = build_topology(&problem)?;
        let loads = derive_loads(&problem, &model)?;
        Ok(Frame {
            model,
            loads,
            material: problem.material,
            config: AnalysisConfig::default(),
        })
    }
}

#[derive(Serialize)]
struct Results<'a> {
    #[serde(flatten)]
    analysis: &'a AnalysisResult,
    diagrams: &'a [InternalForceDiagram],
}

fn results_json(analysis: &AnalysisResult, diagrams: &[InternalForceDiagram]) -> String {
    to_canonical_json(&Results { analysis, diagrams })
}

fn load_backend(config: Option<&Path>) -> Result<Box<dyn GenerationBackend>, Failure> {
    let (cfg, base) = match config {
        Some(p) => (
            parse_config(&read(p)?)?,
            p.parent().unwrap_or(Path::new(".")).to_path_buf(),
        ),
        None => (PipelineConfig::default(), PathBuf::from(".")),
    };
    Ok(backend_from_config(&cfg, &base)?)
}

fn cmd_validate(args: ValidateArgs, out: &mut dyn Write) -> CmdResult {
    let (path, script) = match (&args.model, &args.script) {
        (Some(m), _) => (m, false),
        (None, Some(s)) => (s, true),
        (None, None) => unreachable!("clap requires one input"),
    };
    let text = read(path)?;
    let parsed = if script { Some(parse_script(&text)?) } else { None };
    let model: TopologyModel = match &parsed {
        Some(p) => p.model.clone(),
        None => serde_json::from_str(&text)?,
    };
    let report = validate_model(&model)?;
    let log = action_log_text(&report.actions);
    if !args.fix {
        if report.is_clean() {
            writeln!(out, "clean: no corrective actions")?;
            return Ok(0);
        }
        out.write_all(log.as_bytes())?;
        return Ok(1);
    }
    let repaired = match &parsed {
        Some(p) => {
            let loads = remap_loads(&p.loads, &p.model, &report.actions);
            emit_script(&report.model, &loads, &p.material, &p.config).text
        }
        None => to_canonical_json(&report.model),
    };
    match &args.out {
        Some(target) => {
            write_file(target, &repaired)?;
            out.write_all(log.as_bytes())?;
        }
        None => out.write_all(repaired.as_bytes())?,
    }
    Ok(0)
}

fn cmd_render(args: RenderArgs, out: &mut dyn Write) -> CmdResult {
    let frame = load_frame(&args.input)?;
    let kinds: Vec<RenderKind> = match args.kind {
        KindArg::All => RenderKind::ALL.to_vec(),
        KindArg::Geometry => vec![RenderKind::Geometry],
        KindArg::Loads => vec![RenderKind::Loads],
        KindArg::Axial => vec![RenderKind::Axial],
        KindArg::Shear => vec![RenderKind::Shear],
        KindArg::Moment => vec![RenderKind::Moment],
    };
    let analysis = if kinds.iter().any(|k| k.needs_result()) {
        Some(solve_static(&frame.model, &frame.loads, &frame.material)?)
    } else {
        None
    };
    for kind in kinds {
        let mut spec = RenderSpec::new(kind);
        if let Some(s) = args.scale {
            spec.geometry_scale = s;
        }
        let svg = render(&frame.model, &frame.loads, analysis.as_ref(), &spec)?;
        let path = args.out.join(format!("{}.svg", kind.file_stem()));
        write_file(&path, &svg)?;
        writeln!(out, "{}", path.display())?;
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> CmdResult {
    let backend = load_backend(args.config.as_deref())?;
    let mut cases = builtin_cases(args.seed);
    if args.mixed_heights {
        cases.push(mixed_height_case());
    }
    let report = run_benchmark(backend.as_ref(), &cases, args.trials)?;
    out.write_all(report.to_table().as_bytes())?;
    if let Some(p) = &args.csv {
        write_file(p, &report.to_csv())?;
    }
    if let Some(p) = &args.json {
        write_file(p, &to_canonical_json(&report))?;
    }
    Ok(0)
}

fn write_partial(dir: &Path, p: &PartialArtifacts) -> Result<(), Failure> {
    if let Some(problem) = &p.problem {
        write_file(&dir.join("problem.json"), &problem_to_json(problem))?;
    }
    if let Some(model) = &p.model {
        write_file(&dir.join("steps.json"), &steps_to_json(model))?;
    }
    if let Some(s) = &p.translated_script {
        write_file(&dir.join("translated.py"), s)?;
    }
    if let Some(v) = &p.validated {
        write_file(&dir.join("actions.txt"), &action_log_text(&v.actions))?;
    }
    if let Some(s) = &p.script {
        write_file(&dir.join("script.py"), s)?;
    }
    Ok(())
}

fn write_result(dir: &Path, r: &PipelineResult) -> Result<(), Failure> {
    write_file(&dir.join("problem.json"), &problem_to_json(&r.problem))?;
    write_file(&dir.join("steps.json"), &steps_to_json(&r.model))?;
    write_file(&dir.join("translated.py"), &r.translated_script)?;
    write_file(&dir.join("actions.txt"), &action_log_text(&r.validated.actions))?;
    write_file(&dir.join("script.py"), &r.script)?;
    write_file(&dir.join("model.json"), &to_canonical_json(&r.final_model))?;
    write_file(&dir.join("results.json"), &results_json(&r.analysis, &r.diagrams))?;
    for (kind, svg) in &r.renders {
        write_file(&dir.join(format!("{}.svg", kind.file_stem())), svg)?;
    }
    Ok(())
}

fn cmd_pipeline(
    input: &Path,
    dir: &Path,
    config: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let backend = load_backend(config)?;
    let text = read(input)?;
    let result = run_pipeline(&text, backend.as_ref());
    let exchanges = backend.exchanges();
    if !exchanges.is_empty() {
        write_file(&dir.join("exchanges.json"), &to_canonical_json(&exchanges))?;
    }
    match result {
        Ok(r) => {
            write_result(dir, &r)?;
            writeln!(
                out,
                "pipeline finished in {:.3} s; artifacts in {}",
                r.total_seconds(),
                dir.display()
            )?;
            for t in &r.timings {
                writeln!(out, "  {:<16} {:.4} s", t.stage.as_str(), t.seconds)?;
            }
            Ok(0)
        }
        Err(e) => {
            write_partial(dir, e.partial())?;
            writeln!(err, "pipeline failed at {} ({}): {e}", e.stage(), e.category())?;
            Ok(1)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Parse(io) => {
            let problem = load_problem(&read(&io.input)?)?;
            emit(out, io.out.as_deref(), &problem_to_json(&problem))?;
            Ok(0)
        }
        Command::Build { io, steps } => {
            let problem = load_problem(&read(&io.input)?)?;
            let model = build_topology(&problem)?;
            let text = if steps {
                steps_to_json(&model)
            } else {
                to_canonical_json(&model)
            };
            emit(out, io.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Validate(args) => cmd_validate(args, out),
        Command::Analyze(io) => {
            let frame = load_frame(&io.input)?;
            let analysis = solve_static(&frame.model, &frame.loads, &frame.material)?;
            let diagrams = internal_forces(&analysis, &frame.model, &frame.loads);
            emit(out, io.out.as_deref(), &results_json(&analysis, &diagrams))?;
            Ok(0)
        }
        Command::Codegen { io, unloaded } => {
            let frame = load_frame(&io.input)?;
            let loads = if unloaded { LoadSet::default() } else { frame.loads };
            let doc = emit_script(&frame.model, &loads, &frame.material, &frame.config);
            emit(out, io.out.as_deref(), &doc.text)?;
            Ok(0)
        }
        Command::Render(args) => cmd_render(args, out),
        Command::Bench(args) => cmd_bench(args, out),
        Command::Cases { seed, out: dir } => {
            for case in builtin_cases(seed) {
                let path = dir.join(format!("{}.json", case.name));
                write_file(&path, &problem_to_json(&case.problem))?;
                writeln!(out, "{}", path.display())?;
            }
            Ok(0)
        }
        Command::Pipeline {
            input,
            out: dir,
            config,
        } => cmd_pipeline(&input, &dir, config.as_deref(), out, err),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status: 0 on success, 1 when the command found problems or failed, 2 for
/// usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}
