//! Chain-of-thought orchestration for fine-grained 3D affordance reasoning.
//!
//! Three strictly ordered steps run against a pluggable vision-chat backend:
//! view selection over the annotated surround sweep, affordance grounding in
//! the chosen view, and motion estimation for the grounded elements. Replies
//! are strict JSON embedded in the backend's text; a malformed reply earns
//! one corrective re-ask before the step fails.
//!
//! Backends: [`MockBackend`] replays a scripted reply list (tests, offline
//! runs); [`HttpBackend`] speaks the de-facto chat-completions wire protocol
//! with base64 PNG attachments.

mod backend;
mod error;
mod pipeline;
mod prompts;

pub use backend::{ChatRequest, HttpBackend, HttpConfig, MockBackend, VisionChatBackend};
pub use error::{Error, Result};
pub use pipeline::{
    estimate_motion, ground_affordance, run_task, select_view, MotionEstimate, ReasoningOptions,
    SceneArtifacts, StepTrace, TaskInstruction, TaskTrace,
};
