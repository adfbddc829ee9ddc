//! Synthetic apartment scene with planted affordance elements, for demos and
//! end-to-end tests. Every element's mask, motion type, and axis are known,
//! and a matching mock-backend script can be generated so the whole pipeline
//! closes the loop without a live model.

use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{Context, Result};

use afford3d_core::descriptors::{AffordanceType, ElementProposal};
use afford3d_core::eval::{GroundTruthLine, GroundTruthTriplet};
use afford3d_core::motion::{discretize_axis, AxisPrimitive, MotionType};
use afford3d_core::pointcloud::{save_ply, PlyEncoding, PointCloud, PointMask};
use afford3d_core::Vec3;

use crate::commands::TaskLine;

pub const SCENE_ID: &str = "synthetic_apartment";

struct PlantedElement {
    name: &'static str,
    center: Vec3<f64>,
    affordance_type: AffordanceType,
    motion_type: MotionType,
    /// Continuous motion axis; discretized against the observation center.
    axis: Vec3<f64>,
    color: [u8; 3],
}

/// One task instruction plus the 1-based element ids it refers to.
pub struct PlantedTask {
    pub task_id: String,
    pub text: String,
    pub element_ids: Vec<u32>,
}

pub struct SyntheticScene {
    pub cloud: PointCloud<f64>,
    pub proposals: Vec<ElementProposal>,
    pub tasks: Vec<PlantedTask>,
    /// Discretized GT primitive per element (index = id - 1).
    pub primitives: Vec<AxisPrimitive>,
    motion_types: Vec<MotionType>,
    centroids: Vec<Vec3<f64>>,
    observation_center_xy: (f64, f64),
}

fn elements() -> Vec<PlantedElement> {
    use AffordanceType::*;
    use MotionType::*;
    vec![
        PlantedElement {
            name: "drawer handle",
            center: Vec3::new(2.9, -0.5, 1.0),
            affordance_type: HookPull,
            motion_type: Translation,
            axis: Vec3::new(1.0, 0.0, 0.0),
            color: [200, 30, 30],
        },
        PlantedElement {
            name: "drawer knob",
            center: Vec3::new(2.9, 0.7, 1.1),
            affordance_type: PinchPull,
            motion_type: Translation,
            axis: Vec3::new(1.0, 0.0, 0.0),
            color: [30, 30, 200],
        },
        PlantedElement {
            name: "light switch",
            center: Vec3::new(-0.4, 2.9, 1.3),
            affordance_type: KeyPress,
            motion_type: Translation,
            axis: Vec3::new(0.0, -1.0, 0.0),
            color: [30, 160, 30],
        },
        PlantedElement {
            name: "door knob",
            center: Vec3::new(-2.9, 0.8, 1.05),
            affordance_type: HookTurn,
            motion_type: Rotation,
            axis: Vec3::new(1.0, 0.0, 0.0),
            color: [200, 140, 0],
        },
        PlantedElement {
            name: "plug",
            center: Vec3::new(-0.6, -2.9, 0.3),
            affordance_type: Unplug,
            motion_type: Translation,
            axis: Vec3::new(0.0, -1.0, 0.0),
            color: [160, 30, 160],
        },
        PlantedElement {
            name: "valve",
            center: Vec3::new(1.5, 1.5, 0.95),
            affordance_type: Rotate,
            motion_type: Rotation,
            axis: Vec3::new(0.0, 0.0, 1.0),
            color: [30, 160, 160],
        },
        PlantedElement {
            name: "foot pedal",
            center: Vec3::new(-1.5, -1.5, 0.1),
            affordance_type: FootPush,
            motion_type: Translation,
            axis: Vec3::new(0.0, 0.0, -1.0),
            color: [120, 80, 20],
        },
    ]
}

impl SyntheticScene {
    pub fn build() -> Self {
        let planted = elements();
        let mut positions = Vec::new();
        let mut colors = Vec::new();

        // Floor and walls of a 6 x 6 x 2.5 m room, 10 cm grid.
        let steps = 61;
        let grid = |i: usize| -3.0 + i as f64 * 0.1;
        for i in 0..steps {
            for j in 0..steps {
                positions.push(Vec3::new(grid(i), grid(j), 0.0));
                colors.push([150, 140, 130]);
            }
        }
        for k in 0..26 {
            let z = k as f64 * 0.1;
            for i in 0..steps {
                for (x, y) in [
                    (grid(i), -3.0),
                    (grid(i), 3.0),
                    (-3.0, grid(i)),
                    (3.0, grid(i)),
                ] {
                    positions.push(Vec3::new(x, y, z));
                    colors.push([205, 205, 200]);
                }
            }
        }
        // Pedestal under the valve.
        for k in 0..9 {
            let z = k as f64 * 0.1;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    positions.push(Vec3::new(
                        1.5 + dx as f64 * 0.05,
                        1.5 + dy as f64 * 0.05,
                        z,
                    ));
                    colors.push([120, 120, 125]);
                }
            }
        }

        // Element clusters: dense 6x6x6 blocks, 1 cm spacing.
        let mut proposals = Vec::new();
        let mut centroids = Vec::new();
        for e in &planted {
            let start = positions.len();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        positions.push(
                            e.center
                                + Vec3::new(
                                    (i as f64 - 2.5) * 0.01,
                                    (j as f64 - 2.5) * 0.01,
                                    (k as f64 - 2.5) * 0.01,
                                ),
                        );
                        colors.push(e.color);
                    }
                }
            }
            let mask = PointMask::new((start..positions.len()).collect());
            proposals.push(ElementProposal::new(mask, e.affordance_type, 1.0).unwrap());
            centroids.push(e.center);
        }

        let cloud = PointCloud::new(positions, Some(colors)).unwrap();

        let n = centroids.len() as f64;
        let cx = centroids.iter().map(|c| c.x).sum::<f64>() / n;
        let cy = centroids.iter().map(|c| c.y).sum::<f64>() / n;
        let reference = Vec3::new(cx, cy, 0.0);

        let primitives: Vec<AxisPrimitive> = planted
            .iter()
            .map(|e| {
                discretize_axis(
                    e.axis,
                    e.motion_type,
                    Vec3::new(e.center.x, e.center.y, 0.0),
                    reference,
                )
                .unwrap()
            })
            .collect();
        let motion_types: Vec<MotionType> = planted.iter().map(|e| e.motion_type).collect();

        let mut tasks: Vec<PlantedTask> = planted
            .iter()
            .enumerate()
            .map(|(i, e)| PlantedTask {
                task_id: format!("task_{:02}", i + 1),
                text: format!("actuate the {} ({})", e.name, e.affordance_type),
                element_ids: vec![i as u32 + 1],
            })
            .collect();
        tasks.push(PlantedTask {
            task_id: format!("task_{:02}", planted.len() + 1),
            text: "open both drawers on the east wall".into(),
            element_ids: vec![1, 2],
        });

        Self {
            cloud,
            proposals,
            tasks,
            primitives,
            motion_types,
            centroids,
            observation_center_xy: (cx, cy),
        }
    }

    pub fn ground_truth_lines(&self) -> Vec<GroundTruthLine> {
        self.tasks
            .iter()
            .map(|task| {
                let triplets: Vec<GroundTruthTriplet> = task
                    .element_ids
                    .iter()
                    .map(|&id| {
                        let i = (id - 1) as usize;
                        GroundTruthTriplet::new(
                            task.task_id.clone(),
                            self.proposals[i].mask.clone(),
                            self.motion_types[i],
                            self.primitives[i],
                            self.proposals[i].affordance_type,
                        )
                        .unwrap()
                    })
                    .collect();
                GroundTruthLine::new(task.task_id.clone(), &triplets)
            })
            .collect()
    }

    /// The 8-view sweep index whose yaw points closest to the elements of a
    /// task, seen from the observation center.
    fn view_for(&self, element_ids: &[u32], n_views: u32) -> u32 {
        let (cx, cy) = self.observation_center_xy;
        let n = element_ids.len() as f64;
        let mx = element_ids
            .iter()
            .map(|&id| self.centroids[(id - 1) as usize].x)
            .sum::<f64>()
            / n;
        let my = element_ids
            .iter()
            .map(|&id| self.centroids[(id - 1) as usize].y)
            .sum::<f64>()
            / n;
        let phi = (my - cy).atan2(mx - cx).rem_euclid(TAU);
        let step = TAU / n_views as f64;
        ((phi / step).round() as u32) % n_views + 1
    }

    /// Scripted replies answering every task correctly, in task order.
    /// `wrong_axis_task` flips the first element's axis primitive of that
    /// task (0-based index) to a different but still consistent one.
    pub fn mock_script(&self, n_views: u32, wrong_axis_task: Option<usize>) -> Vec<String> {
        let mut replies = Vec::new();
        for (t, task) in self.tasks.iter().enumerate() {
            replies.push(format!(
                r#"{{"view": {}}}"#,
                self.view_for(&task.element_ids, n_views)
            ));
            let ids: Vec<String> = task.element_ids.iter().map(u32::to_string).collect();
            replies.push(format!(r#"{{"elements": [{}]}}"#, ids.join(", ")));
            let motions: Vec<String> = task
                .element_ids
                .iter()
                .enumerate()
                .map(|(j, &id)| {
                    let i = (id - 1) as usize;
                    let mut primitive = self.primitives[i];
                    if wrong_axis_task == Some(t) && j == 0 {
                        primitive = flip(primitive);
                    }
                    format!(
                        r#"{{"id": {id}, "type": "{}", "axis": "{}"}}"#,
                        self.motion_types[i], primitive
                    )
                })
                .collect();
            replies.push(format!(r#"{{"motions": [{}]}}"#, motions.join(", ")));
        }
        replies
    }

    /// Writes scene.ply, proposals.json, tasks.jsonl, and ground_truth.jsonl
    /// into `dir`.
    pub fn write_inputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        save_ply(
            dir.join("scene.ply"),
            &self.cloud,
            PlyEncoding::BinaryLittleEndian,
        )?;

        let proposals = serde_json::to_string_pretty(&self.proposals)?;
        std::fs::write(dir.join("proposals.json"), proposals)?;

        let mut tasks = String::new();
        for task in &self.tasks {
            let line = TaskLine {
                task_id: task.task_id.clone(),
                scene_id: SCENE_ID.into(),
                text: task.text.clone(),
            };
            tasks.push_str(&serde_json::to_string(&line)?);
            tasks.push('\n');
        }
        std::fs::write(dir.join("tasks.jsonl"), tasks)?;

        let mut gt = String::new();
        for line in self.ground_truth_lines() {
            gt.push_str(&serde_json::to_string(&line)?);
            gt.push('\n');
        }
        std::fs::write(dir.join("ground_truth.jsonl"), gt)?;
        Ok(())
    }
}

fn flip(p: AxisPrimitive) -> AxisPrimitive {
    use AxisPrimitive::*;
    match p {
        HorizontalInwards => HorizontalOutwards,
        HorizontalOutwards => HorizontalInwards,
        VerticalInwards => VerticalOutwards,
        VerticalOutwards => VerticalInwards,
        Horizontal => Vertical,
        Vertical => Horizontal,
    }
}
