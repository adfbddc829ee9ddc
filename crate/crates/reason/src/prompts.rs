//! Prompt builders for the three reasoning steps.
//!
//! Every prompt spells out its closed vocabulary (valid view indices, valid
//! element ids, or the motion type / axis direction sets) so a conforming
//! backend can always answer within it.

use std::fmt::Write as _;

use afford3d_core::descriptors::Descriptor;
use afford3d_core::motion::{AxisPrimitive, MotionType};
use afford3d_core::Scalar;

pub const SYSTEM_TEXT: &str = "You are an embodied assistant analyzing an indoor 3D scene. \
The scene is shown as rendered surround views in which functional elements \
(handles, knobs, buttons, plugs) are marked with numbered boxes labeled \
'id:affordance_type'. Answer every question with a single JSON object and \
nothing else.";

fn list_u32(values: impl Iterator<Item = u32>) -> String {
    values
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn descriptor_table<T: Scalar>(descriptors: &[Descriptor<T>]) -> String {
    let mut out = String::from("id | affordance_type | centroid x,y,z (m) | extents x,y,z (m)\n");
    for d in descriptors {
        let _ = writeln!(
            out,
            "{} | {} | {:.2},{:.2},{:.2} | {:.2},{:.2},{:.2}",
            d.id,
            d.affordance_type,
            d.centroid.x,
            d.centroid.y,
            d.centroid.z,
            d.extents.x,
            d.extents.y,
            d.extents.z,
        );
    }
    out
}

pub fn view_selection(instruction: &str, view_indices: &[u32]) -> String {
    format!(
        "Task instruction: {instruction}\n\n\
         You are given {} surround views of the scene, attached in order; \
         their view indices are: {}.\n\
         Pick the single view in which all elements referenced by the \
         instruction are visible and their identifiers are clearly shown.\n\
         Reply with JSON: {{\"view\": <view index>}}",
        view_indices.len(),
        list_u32(view_indices.iter().copied()),
    )
}

/// Second round of step 1 when zooming is enabled: the crop of the chosen
/// view is attached so the choice can be confirmed or corrected.
pub fn view_selection_zoom(instruction: &str, chosen: u32, view_indices: &[u32]) -> String {
    format!(
        "Task instruction: {instruction}\n\n\
         Attached is a 2x center crop of view {chosen}, which you selected. \
         Confirm it is the most informative view for the instruction, or name \
         a better one. Valid view indices: {}.\n\
         Reply with JSON: {{\"view\": <view index>}}",
        list_u32(view_indices.iter().copied()),
    )
}

pub fn grounding<T: Scalar>(instruction: &str, descriptors: &[Descriptor<T>]) -> String {
    format!(
        "Task instruction: {instruction}\n\n\
         Attached is the selected annotated view. The scene contains these \
         segmented elements:\n{}\n\
         Valid element ids: {}.\n\
         Identify the element or elements the instruction refers to.\n\
         Reply with JSON: {{\"elements\": [<ids>]}}; reply an empty list if none match.",
        descriptor_table(descriptors),
        list_u32(descriptors.iter().map(|d| d.id)),
    )
}

pub fn motion<T: Scalar>(instruction: &str, grounded: &[Descriptor<T>]) -> String {
    let translation_axes = [
        AxisPrimitive::HorizontalInwards,
        AxisPrimitive::HorizontalOutwards,
        AxisPrimitive::VerticalInwards,
        AxisPrimitive::VerticalOutwards,
    ]
    .map(AxisPrimitive::as_str)
    .join(", ");
    let rotation_axes = [AxisPrimitive::Horizontal, AxisPrimitive::Vertical]
        .map(AxisPrimitive::as_str)
        .join(", ");
    format!(
        "Task instruction: {instruction}\n\n\
         Attached is the selected annotated view. These grounded elements \
         must be actuated:\n{}\n\
         For each element, infer how it moves.\n\
         Motion types: {}, {}.\n\
         Axis directions for translation: {translation_axes}.\n\
         Axis directions for rotation: {rotation_axes}.\n\
         Reply with JSON: {{\"motions\": [{{\"id\": <element id>, \
         \"type\": <motion type>, \"axis\": <axis direction>}}, ...]}} \
         covering every listed element exactly once.",
        descriptor_table(grounded),
        MotionType::Rotation,
        MotionType::Translation,
    )
}
