//! The three-step reasoning pipeline and its trace records.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use afford3d_core::descriptors::{Descriptor, ElementProposal};
use afford3d_core::eval::TripletPrediction;
use afford3d_core::motion::{AxisPrimitive, MotionType};
use afford3d_core::pointcloud::PointCloud;
use afford3d_core::projection::AnnotatedView;
use afford3d_core::Scalar;

use crate::backend::{ChatRequest, VisionChatBackend};
use crate::error::{Error, Result};
use crate::prompts;

/// A natural-language job for one scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstruction {
    pub scene_id: String,
    pub text: String,
}

impl TaskInstruction {
    pub fn new(scene_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::Core(afford3d_core::Error::EmptyInput(
                "task instruction text is empty".into(),
            )));
        }
        Ok(Self {
            scene_id: scene_id.into(),
            text,
        })
    }
}

/// Everything the pipeline needs about one scene, validated on construction:
/// descriptors are the 1-based summaries of `proposals`, and `views` is the
/// annotated surround sweep.
pub struct SceneArtifacts<T> {
    pub cloud: PointCloud<T>,
    pub proposals: Vec<ElementProposal>,
    pub descriptors: Vec<Descriptor<T>>,
    pub views: Vec<AnnotatedView<T>>,
}

impl<T: Scalar> SceneArtifacts<T> {
    pub fn new(
        cloud: PointCloud<T>,
        proposals: Vec<ElementProposal>,
        descriptors: Vec<Descriptor<T>>,
        views: Vec<AnnotatedView<T>>,
    ) -> Result<Self> {
        if proposals.len() != descriptors.len() {
            return Err(Error::Core(afford3d_core::Error::Parameter(format!(
                "{} proposals but {} descriptors",
                proposals.len(),
                descriptors.len()
            ))));
        }
        for (i, d) in descriptors.iter().enumerate() {
            if d.id as usize != i + 1 {
                return Err(Error::Core(afford3d_core::Error::Parameter(format!(
                    "descriptor at position {i} has id {}, expected {}",
                    d.id,
                    i + 1
                ))));
            }
        }
        for p in &proposals {
            p.mask.validate_for(cloud.len()).map_err(Error::Core)?;
        }
        Ok(Self {
            cloud,
            proposals,
            descriptors,
            views,
        })
    }
}

/// Knobs for the pipeline; the default runs step 1 in a single round.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReasoningOptions {
    /// Adds a second step-1 round showing a 2x center crop of the chosen
    /// view before committing to it.
    pub zoom_step1: bool,
}

/// Audit record of one reasoning step: the full prompt, every raw reply
/// (two when a re-ask happened), and the parsed outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: u32,
    pub name: String,
    pub system_text: String,
    pub user_text: String,
    pub image_count: usize,
    pub replies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reask_text: Option<String>,
    pub outcome: Value,
}

/// Trace of one task, one entry per step taken.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskTrace {
    pub task_id: String,
    pub scene_id: String,
    pub instruction: String,
    pub steps: Vec<StepTrace>,
}

/// Extracts the first balanced JSON object embedded in free-form reply text.
fn extract_first_json(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_reply_json(reply: &str) -> std::result::Result<Value, String> {
    let raw = extract_first_json(reply)
        .ok_or_else(|| "the reply contains no JSON object".to_string())?;
    serde_json::from_str(raw).map_err(|e| format!("the reply's JSON does not parse: {e}"))
}

/// Sends `request`, validates the reply with `parse`, and re-asks once with a
/// corrective note appended before giving up with a protocol error. All raw
/// replies land in `trace`.
fn ask_validated<V>(
    backend: &dyn VisionChatBackend,
    request: ChatRequest,
    step_name: &str,
    trace: &mut StepTrace,
    parse: impl Fn(&str) -> std::result::Result<V, String>,
) -> Result<V> {
    let reply = backend.complete(&request)?;
    trace.replies.push(reply.clone());
    let first_error = match parse(&reply) {
        Ok(v) => return Ok(v),
        Err(why) => why,
    };

    let reask = ChatRequest {
        system_text: request.system_text.clone(),
        user_text: format!(
            "{}\n\nYour previous reply was invalid: {first_error}. \
             Answer again, following the required JSON format exactly.",
            request.user_text
        ),
        images: request.images.clone(),
    };
    trace.reask_text = Some(reask.user_text.clone());
    let reply = backend.complete(&reask)?;
    trace.replies.push(reply.clone());
    parse(&reply).map_err(|why| Error::Protocol(format!("{step_name}: {why} (after one re-ask)")))
}

fn png_of<T: Scalar>(view: &AnnotatedView<T>) -> Result<Vec<u8>> {
    view.image.encode_png().map_err(Error::Core)
}

fn parse_view_choice(reply: &str, valid: &[u32]) -> std::result::Result<u32, String> {
    let value = parse_reply_json(reply)?;
    let idx = value
        .get("view")
        .and_then(Value::as_u64)
        .ok_or_else(|| "expected {\"view\": <integer>}".to_string())?;
    let idx = u32::try_from(idx).map_err(|_| format!("view index {idx} is out of range"))?;
    if valid.contains(&idx) {
        Ok(idx)
    } else {
        Err(format!(
            "view {idx} does not exist; valid views are {valid:?}"
        ))
    }
}

/// Step 1: shows every annotated view (ascending view index) and asks for the
/// most informative one. Returns a validated view index.
pub fn select_view<T: Scalar>(
    views: &[AnnotatedView<T>],
    instr: &TaskInstruction,
    backend: &dyn VisionChatBackend,
    options: &ReasoningOptions,
    trace: &mut Vec<StepTrace>,
) -> Result<u32> {
    if views.is_empty() {
        return Err(Error::Core(afford3d_core::Error::EmptyInput(
            "view selection needs at least one view".into(),
        )));
    }
    let mut order: Vec<&AnnotatedView<T>> = views.iter().collect();
    order.sort_by_key(|v| v.base.view_index);
    let indices: Vec<u32> = order.iter().map(|v| v.base.view_index).collect();
    let images: Vec<Vec<u8>> = order.iter().map(|v| png_of(v)).collect::<Result<_>>()?;

    let request = ChatRequest {
        system_text: prompts::SYSTEM_TEXT.to_string(),
        user_text: prompts::view_selection(&instr.text, &indices),
        images,
    };
    let mut step = StepTrace {
        step: 1,
        name: "active_view_selection".into(),
        system_text: request.system_text.clone(),
        user_text: request.user_text.clone(),
        image_count: request.images.len(),
        replies: Vec::new(),
        reask_text: None,
        outcome: Value::Null,
    };
    let mut chosen = ask_validated(backend, request, "view selection", &mut step, |r| {
        parse_view_choice(r, &indices)
    });
    if let Ok(first_round) = chosen {
        step.outcome = json!({ "view": first_round });
        trace.push(step);

        if options.zoom_step1 {
            let view = order
                .iter()
                .find(|v| v.base.view_index == first_round)
                .expect("validated index");
            let crop = view.image.center_crop_zoom2();
            let request = ChatRequest {
                system_text: prompts::SYSTEM_TEXT.to_string(),
                user_text: prompts::view_selection_zoom(&instr.text, first_round, &indices),
                images: vec![crop.encode_png().map_err(Error::Core)?],
            };
            let mut zoom_step = StepTrace {
                step: 1,
                name: "active_view_selection_zoom".into(),
                system_text: request.system_text.clone(),
                user_text: request.user_text.clone(),
                image_count: 1,
                replies: Vec::new(),
                reask_text: None,
                outcome: Value::Null,
            };
            chosen = ask_validated(backend, request, "view selection (zoom)", &mut zoom_step, |r| {
                parse_view_choice(r, &indices)
            });
            if let Ok(v) = chosen {
                zoom_step.outcome = json!({ "view": v });
            }
            trace.push(zoom_step);
        }
    } else {
        trace.push(step);
    }
    chosen
}

fn parse_grounded_ids(reply: &str, valid: &[u32]) -> std::result::Result<Vec<u32>, String> {
    let value = parse_reply_json(reply)?;
    let arr = value
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| "expected {\"elements\": [<ids>]}".to_string())?;
    let mut out = Vec::new();
    for item in arr {
        let id = item
            .as_u64()
            .ok_or_else(|| format!("element id {item} is not an integer"))?;
        let id = u32::try_from(id).map_err(|_| format!("element id {id} is out of range"))?;
        if !valid.contains(&id) {
            return Err(format!(
                "element {id} does not exist; valid ids are {valid:?}"
            ));
        }
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

/// Step 2: localizes the referenced elements in the selected view. An empty
/// id list is a grounding failure, reported as `Ok(vec![])`, not an error.
pub fn ground_affordance<T: Scalar>(
    view: &AnnotatedView<T>,
    instr: &TaskInstruction,
    descriptors: &[Descriptor<T>],
    backend: &dyn VisionChatBackend,
    trace: &mut Vec<StepTrace>,
) -> Result<Vec<u32>> {
    let valid: Vec<u32> = descriptors.iter().map(|d| d.id).collect();
    let request = ChatRequest {
        system_text: prompts::SYSTEM_TEXT.to_string(),
        user_text: prompts::grounding(&instr.text, descriptors),
        images: vec![png_of(view)?],
    };
    let mut step = StepTrace {
        step: 2,
        name: "affordance_grounding".into(),
        system_text: request.system_text.clone(),
        user_text: request.user_text.clone(),
        image_count: 1,
        replies: Vec::new(),
        reask_text: None,
        outcome: Value::Null,
    };
    let result = ask_validated(backend, request, "affordance grounding", &mut step, |r| {
        parse_grounded_ids(r, &valid)
    });
    if let Ok(ids) = &result {
        step.outcome = json!({ "elements": ids });
    }
    trace.push(step);
    result
}

/// One element's inferred interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionEstimate {
    pub element_id: u32,
    pub motion_type: MotionType,
    pub axis_primitive: AxisPrimitive,
}

fn parse_motions(
    reply: &str,
    grounded: &[u32],
) -> std::result::Result<Vec<MotionEstimate>, String> {
    let value = parse_reply_json(reply)?;
    let arr = value
        .get("motions")
        .and_then(Value::as_array)
        .ok_or_else(|| "expected {\"motions\": [...]}".to_string())?;
    let mut out: Vec<MotionEstimate> = Vec::new();
    for item in arr {
        let id = item
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| "every motion needs an integer \"id\"".to_string())?;
        let id = u32::try_from(id).map_err(|_| format!("element id {id} is out of range"))?;
        if !grounded.contains(&id) {
            return Err(format!(
                "motion for unknown element {id}; grounded ids are {grounded:?}"
            ));
        }
        if out.iter().any(|m| m.element_id == id) {
            return Err(format!("element {id} appears more than once"));
        }
        let motion_type: MotionType = item
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| "every motion needs a string \"type\"".to_string())?
            .parse()
            .map_err(|e| format!("{e}"))?;
        let axis: AxisPrimitive = item
            .get("axis")
            .and_then(Value::as_str)
            .ok_or_else(|| "every motion needs a string \"axis\"".to_string())?
            .parse()
            .map_err(|e| format!("{e}"))?;
        if !axis.consistent_with(motion_type) {
            return Err(format!(
                "axis {axis} cannot pair with motion type {motion_type}"
            ));
        }
        out.push(MotionEstimate {
            element_id: id,
            motion_type,
            axis_primitive: axis,
        });
    }
    let missing: Vec<u32> = grounded
        .iter()
        .copied()
        .filter(|g| !out.iter().any(|m| m.element_id == *g))
        .collect();
    if !missing.is_empty() {
        return Err(format!("missing motions for elements {missing:?}"));
    }
    Ok(out)
}

/// Step 3: infers motion type and axis primitive for every grounded element.
pub fn estimate_motion<T: Scalar>(
    view: &AnnotatedView<T>,
    instr: &TaskInstruction,
    grounded: &[Descriptor<T>],
    backend: &dyn VisionChatBackend,
    trace: &mut Vec<StepTrace>,
) -> Result<Vec<MotionEstimate>> {
    if grounded.is_empty() {
        return Err(Error::Core(afford3d_core::Error::EmptyInput(
            "motion estimation needs at least one grounded element".into(),
        )));
    }
    let ids: Vec<u32> = grounded.iter().map(|d| d.id).collect();
    let request = ChatRequest {
        system_text: prompts::SYSTEM_TEXT.to_string(),
        user_text: prompts::motion(&instr.text, grounded),
        images: vec![png_of(view)?],
    };
    let mut step = StepTrace {
        step: 3,
        name: "motion_estimation".into(),
        system_text: request.system_text.clone(),
        user_text: request.user_text.clone(),
        image_count: 1,
        replies: Vec::new(),
        reask_text: None,
        outcome: Value::Null,
    };
    let result = ask_validated(backend, request, "motion estimation", &mut step, |r| {
        parse_motions(r, &ids)
    });
    if let Ok(motions) = &result {
        step.outcome = json!({
            "motions": motions
                .iter()
                .map(|m| json!({
                    "id": m.element_id,
                    "type": m.motion_type.as_str(),
                    "axis": m.axis_primitive.as_str(),
                }))
                .collect::<Vec<_>>()
        });
    }
    trace.push(step);
    result
}

/// Runs steps 1 -> 2 -> 3 for one task and joins the grounded ids back to
/// their proposal masks. A grounding failure (step 2 returns no elements)
/// yields an empty prediction list, not an error. The trace is returned in
/// both cases.
pub fn run_task<T: Scalar>(
    task_id: &str,
    scene: &SceneArtifacts<T>,
    instr: &TaskInstruction,
    backend: &dyn VisionChatBackend,
    options: &ReasoningOptions,
) -> (TaskTrace, Result<Vec<TripletPrediction>>) {
    let mut trace = TaskTrace {
        task_id: task_id.to_string(),
        scene_id: instr.scene_id.clone(),
        instruction: instr.text.clone(),
        steps: Vec::new(),
    };
    let result = run_task_inner(scene, instr, backend, options, &mut trace.steps);
    (trace, result)
}

fn run_task_inner<T: Scalar>(
    scene: &SceneArtifacts<T>,
    instr: &TaskInstruction,
    backend: &dyn VisionChatBackend,
    options: &ReasoningOptions,
    steps: &mut Vec<StepTrace>,
) -> Result<Vec<TripletPrediction>> {
    let chosen = select_view(&scene.views, instr, backend, options, steps)?;
    let view = scene
        .views
        .iter()
        .find(|v| v.base.view_index == chosen)
        .expect("select_view returns an existing index");

    let grounded_ids = ground_affordance(view, instr, &scene.descriptors, backend, steps)?;
    if grounded_ids.is_empty() {
        return Ok(Vec::new());
    }

    let grounded: Vec<Descriptor<T>> = grounded_ids
        .iter()
        .map(|id| scene.descriptors[(*id - 1) as usize].clone())
        .collect();
    let motions = estimate_motion(view, instr, &grounded, backend, steps)?;

    motions
        .into_iter()
        .map(|m| {
            let proposal = &scene.proposals[(m.element_id - 1) as usize];
            TripletPrediction::new(
                m.element_id,
                proposal.mask.clone(),
                m.motion_type,
                m.axis_primitive,
                proposal.confidence,
            )
            .map_err(Error::Core)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_extraction_handles_prose_and_nesting() {
        assert_eq!(
            extract_first_json("Sure! {\"view\": 3} ... done."),
            Some("{\"view\": 3}")
        );
        assert_eq!(
            extract_first_json("{\"a\": {\"b\": \"}\"}} trailing"),
            Some("{\"a\": {\"b\": \"}\"}}")
        );
        assert_eq!(extract_first_json("no json here"), None);
        assert_eq!(extract_first_json("{truncated"), None);
    }

    #[test]
    fn instruction_text_must_be_non_empty() {
        assert!(TaskInstruction::new("s", " ").is_err());
        assert!(TaskInstruction::new("s", "open").is_ok());
    }
}
