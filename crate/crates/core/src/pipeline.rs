//! Five-stage generation pipeline with a pluggable backend.
//!
//! Stages run in order: problem analysis, geometry, translation,
//! validation, loads. The final script is then parsed back, solved with the
//! native solver and rendered. Validation always uses the deterministic
//! passes; backends only generate.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::ErrorCategory;
use crate::geometry::{build_topology, grid_oracle, GeometryError};
use crate::loads::{derive_loads, LoadError, LoadSet};
use crate::model::{grid_point, isomorphic, GridPoint, TopologyModel};
use crate::problem::{load_problem, FrameProblem, ProblemError};
use crate::remote::{Exchange, RemoteError};
use crate::render::{render_all, RenderError, RenderKind};
use crate::script::{emit_script, parse_script, AnalysisConfig, ScriptError};
use crate::solver::{internal_forces, solve_static, AnalysisResult, InternalForceDiagram, SolverError};
use crate::validation::{validate_model, CorrectiveAction, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    ProblemAnalysis,
    Geometry,
    Translation,
    Validation,
    Loads,
    Analysis,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::ProblemAnalysis,
        Stage::Geometry,
        Stage::Translation,
        Stage::Validation,
        Stage::Loads,
        Stage::Analysis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ProblemAnalysis => "problem analysis",
            Stage::Geometry => "geometry",
            Stage::Translation => "translation",
            Stage::Validation => "validation",
            Stage::Loads => "loads",
            Stage::Analysis => "analysis",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a backend could not produce a stage output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error("{message}")]
    Failed { category: ErrorCategory, message: String },
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

impl StageError {
    pub fn failed(category: ErrorCategory, message: impl Into<String>) -> Self {
        StageError::Failed {
            category,
            message: message.into(),
        }
    }
}

impl From<ProblemError> for StageError {
    fn from(e: ProblemError) -> Self {
        StageError::failed(ErrorCategory::Other, e.to_string())
    }
}

impl From<GeometryError> for StageError {
    fn from(e: GeometryError) -> Self {
        StageError::failed(ErrorCategory::GeometryTopology, e.to_string())
    }
}

impl From<ScriptError> for StageError {
    fn from(e: ScriptError) -> Self {
        StageError::failed(e.category, e.to_string())
    }
}

impl From<LoadError> for StageError {
    fn from(e: LoadError) -> Self {
        StageError::failed(ErrorCategory::LoadApplication, e.to_string())
    }
}

pub fn validation_category(e: &ValidationError) -> ErrorCategory {
    match e {
        ValidationError::DanglingReference { .. } | ValidationError::DuplicateElementId(_) => {
            ErrorCategory::ElementDefinition
        }
        ValidationError::DuplicateNodeId(_) => ErrorCategory::NodeDefinition,
        ValidationError::DanglingSupport(_) => ErrorCategory::SupportConditions,
        ValidationError::DegenerateElement(_) => ErrorCategory::GeometryTopology,
    }
}

impl From<ValidationError> for StageError {
    fn from(e: ValidationError) -> Self {
        StageError::failed(validation_category(&e), e.to_string())
    }
}

pub fn solver_category(e: &SolverError) -> ErrorCategory {
    match e {
        SolverError::DegenerateElement(_) => ErrorCategory::GeometryTopology,
        SolverError::UnknownNode { .. } => ErrorCategory::ElementDefinition,
        SolverError::UnknownLoadTarget(_) => ErrorCategory::LoadApplication,
        SolverError::SingularSystem => ErrorCategory::SupportConditions,
    }
}

impl From<SolverError> for StageError {
    fn from(e: SolverError) -> Self {
        StageError::failed(solver_category(&e), e.to_string())
    }
}

impl From<RenderError> for StageError {
    fn from(e: RenderError) -> Self {
        StageError::failed(ErrorCategory::Other, e.to_string())
    }
}

/// Output of the validation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScript {
    pub model: TopologyModel,
    pub actions: Vec<CorrectiveAction>,
    pub script: String,
}

/// Parses a translated script, repairs its model and re-emits it without
/// loads.
pub fn deterministic_validation(script: &str) -> Result<ValidatedScript, StageError> {
    let parsed = parse_script(script)?;
    let report = validate_model(&parsed.model)?;
    let doc = emit_script(&report.model, &LoadSet::default(), &parsed.material, &parsed.config);
    Ok(ValidatedScript {
        model: report.model,
        actions: report.actions,
        script: doc.text,
    })
}

/// Stage handlers. Implementations must be usable from several threads.
pub trait GenerationBackend: Send + Sync {
    fn name(&self) -> String;

    /// Free-form or structured description to a problem.
    fn problem_analysis(&self, description: &str) -> Result<FrameProblem, StageError>;

    /// Problem to a topology model with construction steps.
    fn geometry(&self, problem: &FrameProblem) -> Result<TopologyModel, StageError>;

    /// Model to an analysis script without loads.
    fn translation(&self, problem: &FrameProblem, model: &TopologyModel) -> Result<String, StageError>;

    fn validation(&self, script: &str) -> Result<ValidatedScript, StageError> {
        deterministic_validation(script)
    }

    /// Validated script to the complete script with loads and analysis.
    fn loads(&self, problem: &FrameProblem, validated: &ValidatedScript) -> Result<String, StageError>;

    /// Raw request/response records, for backends that make any.
    fn exchanges(&self) -> Vec<Exchange> {
        Vec::new()
    }
}

/// Reference backend built from the rule engine; a pure function of its
/// inputs.
#[derive(Debug, Clone, Default)]
pub struct DeterministicBackend {
    pub config: AnalysisConfig,
}

impl GenerationBackend for DeterministicBackend {
    fn name(&self) -> String {
        "deterministic".into()
    }

    fn problem_analysis(&self, description: &str) -> Result<FrameProblem, StageError> {
        Ok(load_problem(description)?)
    }

    fn geometry(&self, problem: &FrameProblem) -> Result<TopologyModel, StageError> {
        Ok(build_topology(problem)?)
    }

    fn translation(&self, problem: &FrameProblem, model: &TopologyModel) -> Result<String, StageError> {
        Ok(emit_script(model, &LoadSet::default(), &problem.material, &self.config).text)
    }

    fn loads(&self, problem: &FrameProblem, validated: &ValidatedScript) -> Result<String, StageError> {
        let loads = derive_loads(problem, &validated.model)?;
        let parsed = parse_script(&validated.script)?;
        Ok(emit_script(&validated.model, &loads, &parsed.material, &parsed.config).text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

/// Whatever was produced before a failure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialArtifacts {
    pub problem: Option<FrameProblem>,
    pub model: Option<TopologyModel>,
    pub translated_script: Option<String>,
    pub validated: Option<ValidatedScript>,
    pub script: Option<String>,
    pub timings: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub problem: FrameProblem,
    /// Geometry-stage model, with construction steps.
    pub model: TopologyModel,
    pub translated_script: String,
    pub validated: ValidatedScript,
    /// Final script text.
    pub script: String,
    /// Model, loads and material read back from the final script.
    pub final_model: TopologyModel,
    pub loads: LoadSet,
    pub analysis: AnalysisResult,
    pub diagrams: Vec<InternalForceDiagram>,
    pub renders: Vec<(RenderKind, String)>,
    pub timings: Vec<StageTiming>,
}

impl PipelineResult {
    pub fn total_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.seconds).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("{stage} stage failed ({category}): {message}")]
    StageFailure {
        stage: Stage,
        category: ErrorCategory,
        message: String,
        partial: Box<PartialArtifacts>,
    },
    #[error("remote backend failed during {stage}: {error}")]
    Remote {
        stage: Stage,
        error: RemoteError,
        partial: Box<PartialArtifacts>,
    },
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::StageFailure { stage, .. } | PipelineError::Remote { stage, .. } => *stage,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            PipelineError::StageFailure { category, .. } => *category,
            PipelineError::Remote { .. } => ErrorCategory::Other,
        }
    }

    pub fn partial(&self) -> &PartialArtifacts {
        match self {
            PipelineError::StageFailure { partial, .. } | PipelineError::Remote { partial, .. } => partial,
        }
    }

    pub fn outcome(&self) -> TrialOutcome {
        TrialOutcome::failure(self.stage(), self.category(), self.to_string())
    }
}

struct Runner {
    partial: PartialArtifacts,
}

impl Runner {
    fn time<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T, StageError>) -> Result<T, PipelineError> {
        let start = Instant::now();
        let out = f();
        self.partial.timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        out.map_err(|e| {
            let partial = Box::new(std::mem::take(&mut self.partial));
            match e {
                StageError::Failed { category, message } => PipelineError::StageFailure {
                    stage,
                    category,
                    message,
                    partial,
                },
                StageError::Remote(error) => PipelineError::Remote { stage, error, partial },
            }
        })
    }
}

pub fn run_pipeline(input: &str, backend: &dyn GenerationBackend) -> Result<PipelineResult, PipelineError> {
    let mut r = Runner {
        partial: PartialArtifacts::default(),
    };

    let problem = r.time(Stage::ProblemAnalysis, || backend.problem_analysis(input))?;
    r.partial.problem = Some(problem.clone());

    let model = r.time(Stage::Geometry, || backend.geometry(&problem))?;
    r.partial.model = Some(model.clone());

    let translated = r.time(Stage::Translation, || backend.translation(&problem, &model))?;
    r.partial.translated_script = Some(translated.clone());

    let validated = r.time(Stage::Validation, || backend.validation(&translated))?;
    r.partial.validated = Some(validated.clone());

    let script = r.time(Stage::Loads, || backend.loads(&problem, &validated))?;
    r.partial.script = Some(script.clone());

    let (final_model, loads, analysis, diagrams, renders) = r.time(Stage::Analysis, || {
        let parsed = parse_script(&script)?;
        let report = validate_model(&parsed.model)?;
        if !report.is_clean() {
            return Err(StageError::failed(
                ErrorCategory::GeometryTopology,
                format!("final script needs {} corrective actions", report.actions.len()),
            ));
        }
        let analysis = solve_static(&parsed.model, &parsed.loads, &parsed.material)?;
        let diagrams = internal_forces(&analysis, &parsed.model, &parsed.loads);
        let renders = render_all(&parsed.model, &parsed.loads, &analysis)?;
        Ok((parsed.model, parsed.loads, analysis, diagrams, renders))
    })?;

    let partial = r.partial;
    Ok(PipelineResult {
        problem,
        model,
        translated_script: translated,
        validated,
        script,
        final_model,
        loads,
        analysis,
        diagrams,
        renders,
        timings: partial.timings,
    })
}

// ---------------------------------------------------------------------------
// Trial classification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub failure_stage: Option<Stage>,
    pub error_category: Option<ErrorCategory>,
    pub message: Option<String>,
}

impl TrialOutcome {
    pub fn success() -> Self {
        TrialOutcome {
            success: true,
            failure_stage: None,
            error_category: None,
            message: None,
        }
    }

    pub fn failure(stage: Stage, category: ErrorCategory, message: impl Into<String>) -> Self {
        TrialOutcome {
            success: false,
            failure_stage: Some(stage),
            error_category: Some(category),
            message: Some(message.into()),
        }
    }
}

/// Reference topology and loads a candidate is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub model: TopologyModel,
    pub loads: LoadSet,
}

impl Oracle {
    /// Grid-line enumeration of the problem with its resolved loads.
    pub fn for_problem(problem: &FrameProblem) -> Result<Oracle, LoadError> {
        let model = grid_oracle(problem);
        let loads = derive_loads(problem, &model)?;
        Ok(Oracle { model, loads })
    }
}

type LoadKey = (Vec<(GridPoint, [i64; 3])>, Vec<(GridPoint, GridPoint, [i64; 2])>);

fn quantize(v: f64) -> i64 {
    (v * 1e6).round() as i64
}

/// Label-free view of a load set: nodal loads by position, member loads by
/// segment with their global direction.
fn load_key(model: &TopologyModel, loads: &LoadSet) -> Option<LoadKey> {
    let mut nodal: Vec<(GridPoint, [f64; 3])> = Vec::new();
    for l in &loads.nodal {
        let n = model.node(l.node_id)?;
        let p = grid_point(n.x, n.y);
        match nodal.iter_mut().find(|(q, _)| *q == p) {
            Some((_, f)) => {
                f[0] += l.fx;
                f[1] += l.fy;
                f[2] += l.mz;
            }
            None => nodal.push((p, [l.fx, l.fy, l.mz])),
        }
    }
    let mut nodal: Vec<(GridPoint, [i64; 3])> = nodal
        .into_iter()
        .map(|(p, f)| (p, f.map(quantize)))
        .filter(|(_, f)| *f != [0; 3])
        .collect();
    nodal.sort_unstable();

    let mut member: Vec<(GridPoint, GridPoint, [f64; 2])> = Vec::new();
    for l in &loads.member {
        let e = model.element(l.element_id)?;
        let ((x1, y1), (x2, y2)) = model.segment(e)?;
        let len = (x2 - x1).hypot(y2 - y1);
        let g = [-l.w * (y2 - y1) / len, l.w * (x2 - x1) / len];
        let (a, b) = (grid_point(x1, y1), grid_point(x2, y2));
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match member.iter_mut().find(|(p, q, _)| *p == a && *q == b) {
            Some((_, _, f)) => {
                f[0] += g[0];
                f[1] += g[1];
            }
            None => member.push((a, b, g)),
        }
    }
    let mut member: Vec<(GridPoint, GridPoint, [i64; 2])> = member
        .into_iter()
        .map(|(a, b, f)| (a, b, f.map(quantize)))
        .filter(|(_, _, f)| *f != [0; 2])
        .collect();
    member.sort_unstable();
    Some((nodal, member))
}

/// Judges a candidate script: it must parse, be repairable by the
/// validation passes, match the oracle topology up to relabelling and carry
/// the oracle's loads.
pub fn classify_script(script: &str, oracle: &Oracle) -> TrialOutcome {
    let parsed = match parse_script(script) {
        Ok(p) => p,
        Err(e) => return TrialOutcome::failure(Stage::Translation, e.category, e.to_string()),
    };
    let report = match validate_model(&parsed.model) {
        Ok(r) => r,
        Err(e) => return TrialOutcome::failure(Stage::Validation, validation_category(&e), e.to_string()),
    };
    if !isomorphic(&report.model, &oracle.model) {
        return TrialOutcome::failure(
            Stage::Geometry,
            ErrorCategory::GeometryTopology,
            "topology differs from the reference frame",
        );
    }
    if load_key(&parsed.model, &parsed.loads) != load_key(&oracle.model, &oracle.loads) {
        return TrialOutcome::failure(
            Stage::Loads,
            ErrorCategory::LoadApplication,
            "loads differ from the reference load pattern",
        );
    }
    TrialOutcome::success()
}

pub fn classify_trial(result: &Result<PipelineResult, PipelineError>, oracle: &Oracle) -> TrialOutcome {
    match result {
        Ok(r) => classify_script(&r.script, oracle),
        Err(e) => e.outcome(),
    }
}
