//! Request and response bodies and the endpoint handlers.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use sketchcoach_core::classifier::{argmax, encode, ClassifierModel, Label, TrainingMeta, SEQ_LEN};
use sketchcoach_core::optimize::{DescentConfig, LossWeights, Objective, OptimizationConfig, Proposal};
use sketchcoach_core::pipeline::{run_sequence, MethodSequence};
use sketchcoach_core::render::render_instructions;
use sketchcoach_core::sketch::{CanonicalSketch, Sketch};

use crate::AppState;

/// Structured client or server error: `{"error": code, "reason": text}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub reason: String,
}

impl ApiError {
    fn bad_request(code: &'static str, reason: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code,
            reason: reason.into(),
        }
    }

    fn loading() -> Self {
        Self {
            status: StatusCode::SERVICE_UNAVAILABLE,
            code: "loading",
            reason: "the model is still loading".into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub reason: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.into(),
            reason: self.reason,
        };
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))
}

fn model(state: &AppState) -> Result<Arc<ClassifierModel>, ApiError> {
    state.model().ok_or_else(ApiError::loading)
}

/// Validates a submitted sketch and cuts it to the classifier window.
fn accept_sketch(c: &CanonicalSketch, warnings: &mut Vec<String>) -> Result<Sketch, ApiError> {
    let s = Sketch::try_from(c).map_err(|e| ApiError::bad_request("invalid_sketch", e.to_string()))?;
    if s.len() > SEQ_LEN {
        warnings.push(format!("sketch has {} points; truncated to the first {SEQ_LEN}", s.len()));
        return Ok(s.truncated(SEQ_LEN));
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassifyResponse {
    pub label: Label,
    pub class_name: String,
    pub classes: Vec<String>,
    pub probabilities: Vec<f64>,
    pub warnings: Vec<String>,
}

pub async fn classify(State(state): State<AppState>, body: Bytes) -> Result<Json<ClassifyResponse>, ApiError> {
    let model = model(&state)?;
    let canonical: CanonicalSketch = parse_body(&body)?;
    let mut warnings = Vec::new();
    let s = accept_sketch(&canonical, &mut warnings)?;
    let probabilities = model.forward(&encode(&s));
    let label = argmax(&probabilities);
    Ok(Json(ClassifyResponse {
        label,
        class_name: model.classes()[label].clone(),
        classes: model.classes().to_vec(),
        probabilities,
        warnings,
    }))
}

fn default_label() -> String {
    "auto".into()
}
fn default_method() -> String {
    "removal-ce".into()
}
fn default_objective() -> String {
    "effort".into()
}
fn default_d() -> f64 {
    0.2
}
fn default_beta() -> String {
    "acc-best".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OptimizeRequest {
    pub sketch: CanonicalSketch,
    /// Target class name, or `auto` for the current prediction.
    #[serde(default = "default_label")]
    pub label: String,
    /// A method name (`removal-ce`, `both`, `continuous`, ...) or a
    /// sequence such as `D,B`.
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_objective")]
    pub objective: String,
    #[serde(default = "default_d")]
    pub d: f64,
    #[serde(default)]
    pub seed: u64,
    /// Loss-weight preset or `c,p,e` for continuous stages.
    #[serde(default = "default_beta")]
    pub beta: String,
    /// Iterations per stage; capped by the server.
    #[serde(default)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Prediction {
    pub label: Label,
    pub class_name: String,
    /// Probability of the predicted class.
    pub confidence: f64,
    /// Probability of the target class.
    pub target_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizeResponse {
    pub target: Label,
    pub target_class: String,
    pub proposal: Proposal,
    pub before: Prediction,
    pub after: Prediction,
    pub unchanged: bool,
    /// Numbered, arrowed instruction graphic of the proposal (SVG text).
    pub svg: String,
    pub warnings: Vec<String>,
}

fn prediction(model: &ClassifierModel, s: &Sketch, target: Label) -> Prediction {
    let p = model.forward(&encode(s));
    let label = argmax(&p);
    Prediction {
        label,
        class_name: model.classes()[label].clone(),
        confidence: p[label],
        target_confidence: p[target],
    }
}

pub(crate) fn run_optimize(
    model: &ClassifierModel,
    req: &OptimizeRequest,
    cap: usize,
) -> Result<OptimizeResponse, ApiError> {
    let mut warnings = Vec::new();
    let s = accept_sketch(&req.sketch, &mut warnings)?;
    let target = if req.label == "auto" {
        model.predict(&s)
    } else {
        model
            .class_index(&req.label)
            .ok_or_else(|| ApiError::bad_request("unknown_class", format!("unknown class {:?}", req.label)))?
    };
    let weights: LossWeights = req
        .beta
        .parse()
        .map_err(|e: sketchcoach_core::optimize::OptimizeError| ApiError::bad_request("invalid_beta", e.to_string()))?;
    let seq = MethodSequence::parse(&req.method, weights)
        .map_err(|e| ApiError::bad_request("unknown_method", e.to_string()))?;
    let objective: Objective = req
        .objective
        .parse()
        .map_err(|e: sketchcoach_core::optimize::OptimizeError| ApiError::bad_request("unknown_objective", e.to_string()))?;
    let requested = req.iterations.unwrap_or(cap);
    if requested > cap {
        warnings.push(format!("iterations capped at {cap}"));
    }
    let iterations = requested.min(cap);
    let cfg = OptimizationConfig {
        objective,
        max_distortion: req.d,
        iterations,
        seed: req.seed,
        ..Default::default()
    };
    let dcfg = DescentConfig {
        steps: iterations,
        ..Default::default()
    };
    let proposal = run_sequence(&s, target, model, &seq, &cfg, &dcfg)
        .map_err(|e| ApiError::bad_request("invalid_parameters", e.to_string()))?;
    Ok(OptimizeResponse {
        target,
        target_class: model.classes()[target].clone(),
        before: prediction(model, &proposal.original, target),
        after: prediction(model, &proposal.optimized, target),
        unchanged: proposal.is_unchanged(),
        svg: render_instructions(&proposal.optimized),
        proposal,
        warnings,
    })
}

pub async fn optimize(State(state): State<AppState>, body: Bytes) -> Result<Json<OptimizeResponse>, ApiError> {
    let model = model(&state)?;
    let req: OptimizeRequest = parse_body(&body)?;
    let cap = state.iteration_cap();
    tokio::task::spawn_blocking(move || run_optimize(&model, &req, cap))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            reason: e.to_string(),
        })?
        .map(Json)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelInfo {
    pub classes: Vec<String>,
    pub num_classes: usize,
    pub training: TrainingMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Health {
    pub status: String,
    pub model: Option<ModelInfo>,
}

pub async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(match state.model() {
        Some(m) => Health {
            status: "ready".into(),
            model: Some(ModelInfo {
                classes: m.classes().to_vec(),
                num_classes: m.num_classes(),
                training: m.meta().clone(),
            }),
        },
        None => Health {
            status: "loading".into(),
            model: None,
        },
    })
}
