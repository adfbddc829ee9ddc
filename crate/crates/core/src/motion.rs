//! Motion-type vocabulary and discretization of continuous axis vectors into
//! the six motion-direction primitives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// How an element moves when actuated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionType {
    Rotation,
    Translation,
}

impl MotionType {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionType::Rotation => "rotation",
            MotionType::Translation => "translation",
        }
    }
}

impl fmt::Display for MotionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotation" => Ok(MotionType::Rotation),
            "translation" => Ok(MotionType::Translation),
            other => Err(Error::Vocabulary(format!("unknown motion type {other:?}"))),
        }
    }
}

/// The six discrete axis-direction categories. The suffixed four pair with
/// translation, the bare two with rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisPrimitive {
    HorizontalInwards,
    HorizontalOutwards,
    VerticalInwards,
    VerticalOutwards,
    Horizontal,
    Vertical,
}

impl AxisPrimitive {
    pub const ALL: [AxisPrimitive; 6] = [
        AxisPrimitive::HorizontalInwards,
        AxisPrimitive::HorizontalOutwards,
        AxisPrimitive::VerticalInwards,
        AxisPrimitive::VerticalOutwards,
        AxisPrimitive::Horizontal,
        AxisPrimitive::Vertical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxisPrimitive::HorizontalInwards => "horizontal_inwards",
            AxisPrimitive::HorizontalOutwards => "horizontal_outwards",
            AxisPrimitive::VerticalInwards => "vertical_inwards",
            AxisPrimitive::VerticalOutwards => "vertical_outwards",
            AxisPrimitive::Horizontal => "horizontal",
            AxisPrimitive::Vertical => "vertical",
        }
    }

    /// True when this primitive may appear with the given motion type.
    pub fn consistent_with(self, motion_type: MotionType) -> bool {
        match self {
            AxisPrimitive::Horizontal | AxisPrimitive::Vertical => {
                motion_type == MotionType::Rotation
            }
            _ => motion_type == MotionType::Translation,
        }
    }
}

impl fmt::Display for AxisPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisPrimitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Vocabulary(format!("unknown axis primitive {s:?}")))
    }
}

/// Annotated interaction for one element: type, unit axis, and the point the
/// axis passes through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionGroundTruth<T> {
    pub motion_type: MotionType,
    pub axis: Vec3<T>,
    pub origin: Vec3<T>,
}

impl<T: Scalar> MotionGroundTruth<T> {
    pub fn new(motion_type: MotionType, axis: Vec3<T>, origin: Vec3<T>) -> Result<Self> {
        let norm = axis.norm().to_f64_lossy();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Parameter(format!(
                "motion axis must be unit length, got norm {norm}"
            )));
        }
        Ok(Self {
            motion_type,
            axis,
            origin,
        })
    }
}

/// Dot products within this margin of zero count as ties (resolved outwards).
const DOT_TIE_EPSILON: f64 = 1e-9;

/// Collapses a continuous axis vector into one of the six primitives.
///
/// The dominant axis is the component with the highest absolute magnitude
/// (ties prefer z, then x, then y): z-dominant means the vertical family,
/// otherwise horizontal. Rotations keep just the family. Translations get an
/// inwards/outwards suffix from the sign of `axis . (element - reference)`;
/// an exact tie resolves outwards.
///
/// `reference_centroid` stands in for the parent object's centroid, which the
/// scene model does not carry; callers that know the true parent centroid
/// should pass it, everything else passes the scene's observation center.
pub fn discretize_axis<T: Scalar>(
    axis: Vec3<T>,
    motion_type: MotionType,
    element_centroid: Vec3<T>,
    reference_centroid: Vec3<T>,
) -> Result<AxisPrimitive> {
    if axis == Vec3::zero() {
        return Err(Error::Parameter("motion axis must be non-zero".into()));
    }
    let (ax, ay, az) = (axis.x.abs(), axis.y.abs(), axis.z.abs());
    let vertical = az >= ax && az >= ay;

    if motion_type == MotionType::Rotation {
        return Ok(if vertical {
            AxisPrimitive::Vertical
        } else {
            AxisPrimitive::Horizontal
        });
    }

    let dot = axis
        .dot(element_centroid - reference_centroid)
        .to_f64_lossy();
    let outwards = dot >= -DOT_TIE_EPSILON;
    Ok(match (vertical, outwards) {
        (true, true) => AxisPrimitive::VerticalOutwards,
        (true, false) => AxisPrimitive::VerticalInwards,
        (false, true) => AxisPrimitive::HorizontalOutwards,
        (false, false) => AxisPrimitive::HorizontalInwards,
    })
}
