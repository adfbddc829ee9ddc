//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime. Oracles here are written independently of the library
//! implementations they check.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use afford3d_core::camera::{intrinsics_from_fov, project_point, CameraPose, Intrinsics};
use afford3d_core::descriptors::{AffordanceType, Descriptor};
use afford3d_core::eval::{
    evaluate, EvalReport, GroundTruthTriplet, TaskEval, TripletPrediction,
};
use afford3d_core::motion::{discretize_axis, AxisPrimitive, MotionType};
use afford3d_core::pointcloud::{dilate_mask, dilation_radius, PointCloud, PointMask};
use afford3d_core::projection::{place_labels, project_element_box, Anchor, Box2D};
use afford3d_core::render::{render_view, Image};
use afford3d_core::Vec3;

fn pass(criterion: u32, name: &str, started: Instant) {
    println!(
        "ACCEPTANCE {criterion} PASS: {name} ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// 1. Geometry: exact projection examples + box-projection oracle.
// ---------------------------------------------------------------------------

/// Independent corner-projection oracle mirroring the stated rules: skip
/// behind-camera corners, floor/ceil to pixels, clip, minimum span area 4.
fn oracle_box(
    centroid: [f64; 3],
    extents: [f64; 3],
    cam_pos: [f64; 3],
    yaw: f64,
    intr: &Intrinsics<f64>,
) -> Option<(i32, i32, i32, i32)> {
    let fwd = [yaw.cos(), yaw.sin(), 0.0];
    let right = [yaw.sin(), -yaw.cos(), 0.0];
    let up = [0.0, 0.0, 1.0];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let project = |p: [f64; 3]| -> Option<(f64, f64)> {
        let rel = [p[0] - cam_pos[0], p[1] - cam_pos[1], p[2] - cam_pos[2]];
        let f = dot(rel, fwd);
        if f <= 1e-6 {
            return None;
        }
        Some((
            intr.cx + intr.fx * dot(rel, right) / f,
            intr.cy - intr.fy * dot(rel, up) / f,
        ))
    };

    project(centroid)?;
    let mut bounds: Option<(f64, f64, f64, f64)> = None;
    for sx in [-0.5, 0.5] {
        for sy in [-0.5, 0.5] {
            for sz in [-0.5, 0.5] {
                let corner = [
                    centroid[0] + sx * extents[0],
                    centroid[1] + sy * extents[1],
                    centroid[2] + sz * extents[2],
                ];
                if let Some((u, v)) = project(corner) {
                    bounds = Some(match bounds {
                        None => (u, v, u, v),
                        Some((u0, v0, u1, v1)) => (u0.min(u), v0.min(v), u1.max(u), v1.max(v)),
                    });
                }
            }
        }
    }
    let (u0, v0, u1, v1) = bounds?;
    let x_min = (u0.floor() as i64).max(0);
    let y_min = (v0.floor() as i64).max(0);
    let x_max = (u1.ceil() as i64).min(intr.width as i64 - 1);
    let y_max = (v1.ceil() as i64).min(intr.height as i64 - 1);
    if x_min > x_max || y_min > y_max {
        return None;
    }
    if (x_max - x_min) * (y_max - y_min) < 4 {
        return None;
    }
    Some((x_min as i32, y_min as i32, x_max as i32, y_max as i32))
}

#[test]
fn criterion_1_geometry() {
    let started = Instant::now();
    let intr = intrinsics_from_fov(90.0f64, 680, 680).unwrap();
    let pose = CameraPose::new(Vec3::zero(), 0.0).unwrap();

    // On-axis point lands on the principal point, exactly.
    let p = project_point(&intr, &pose, Vec3::new(1.0, 0.0, 0.0)).unwrap();
    assert!((p.u - 340.0).abs() < 1e-6 && (p.v - 340.0).abs() < 1e-6);
    // A 45-degree ray reaches the image edge at fov 90.
    let p = project_point(&intr, &pose, Vec3::new(1.0, 0.0, 1.0)).unwrap();
    assert!((p.u - 340.0).abs() < 1e-6 && p.v.abs() < 1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut visible = 0;
    for case in 0..200 {
        let cam_pos = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.5..2.0),
        ];
        let yaw = rng.random_range(0.0..std::f64::consts::TAU);
        let phi = yaw + rng.random_range(-0.9..0.9);
        let dist = rng.random_range(0.5..4.0);
        let centroid = [
            cam_pos[0] + phi.cos() * dist,
            cam_pos[1] + phi.sin() * dist,
            cam_pos[2] + rng.random_range(-1.0..1.0),
        ];
        let extents = [
            rng.random_range(0.05..0.5),
            rng.random_range(0.05..0.5),
            rng.random_range(0.05..0.5),
        ];

        let d = Descriptor {
            id: 1,
            centroid: Vec3::new(centroid[0], centroid[1], centroid[2]),
            extents: Vec3::new(extents[0], extents[1], extents[2]),
            affordance_type: AffordanceType::HookPull,
            confidence: 1.0,
        };
        let pose = CameraPose::new(
            Vec3::new(cam_pos[0], cam_pos[1], cam_pos[2]),
            yaw,
        )
        .unwrap();
        let got = project_element_box(&d, &pose, &intr);
        let want = oracle_box(centroid, extents, cam_pos, yaw, &intr);
        match (got, want) {
            (None, None) => {}
            (Some(g), Some(w)) => {
                visible += 1;
                assert!(
                    (g.x_min - w.0).abs() <= 1
                        && (g.y_min - w.1).abs() <= 1
                        && (g.x_max - w.2).abs() <= 1
                        && (g.y_max - w.3).abs() <= 1,
                    "case {case}: {g:?} vs {want:?}"
                );
            }
            (g, w) => panic!("case {case}: visibility disagrees: {g:?} vs {w:?}"),
        }
    }
    assert!(visible >= 50, "only {visible} visible cases; oracle too weak");
    assert!(started.elapsed().as_secs_f64() < 5.0, "geometry suite too slow");
    pass(1, "geometry suite", started);
}

// ---------------------------------------------------------------------------
// 2. Renderer: brute-force z-buffer equivalence + determinism.
// ---------------------------------------------------------------------------

fn brute_force_render(
    cloud: &PointCloud<f64>,
    pose: &CameraPose<f64>,
    intr: &Intrinsics<f64>,
    splat_radius: i64,
) -> Image {
    let (w, h) = (intr.width as i64, intr.height as i64);
    // Projected centers, computed once.
    let centers: Vec<Option<(i64, i64, f64)>> = cloud
        .positions()
        .iter()
        .map(|&p| {
            project_point(intr, pose, p).and_then(|proj| {
                let cu = proj.u.round() as i64;
                let cv = proj.v.round() as i64;
                (cu >= 0 && cu < w && cv >= 0 && cv < h).then_some((cu, cv, proj.depth))
            })
        })
        .collect();

    let mut img = Image::new(intr.width, intr.height, afford3d_core::render::BACKGROUND);
    for y in 0..h {
        for x in 0..w {
            let mut best: Option<(f64, [u8; 3])> = None;
            for (i, c) in centers.iter().enumerate() {
                let Some((cu, cv, depth)) = c else { continue };
                if (x - cu).abs() <= splat_radius && (y - cv).abs() <= splat_radius {
                    // Strict comparison: the earliest point wins depth ties.
                    if best.is_none_or(|(d, _)| *depth < d) {
                        best = Some((*depth, cloud.color(i)));
                    }
                }
            }
            if let Some((_, color)) = best {
                img.set(x as u32, y as u32, color);
            }
        }
    }
    img
}

#[test]
fn criterion_2_renderer() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let intr = intrinsics_from_fov(85.0, 100, 100).unwrap();

    for case in 0..20 {
        let n = rng.random_range(50..=200);
        let positions: Vec<Vec3<f64>> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(0.0..2.5),
                )
            })
            .collect();
        let colors: Vec<[u8; 3]> = (0..n).map(|_| rng.random()).collect();
        let cloud = PointCloud::new(positions, Some(colors)).unwrap();
        let pose = CameraPose::new(
            Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..2.0),
            ),
            rng.random_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        let r = rng.random_range(0..3u32);

        let fast = render_view(&cloud, &pose, &intr, r);
        let slow = brute_force_render(&cloud, &pose, &intr, r as i64);
        assert_eq!(fast, slow, "case {case} (splat {r}) diverged");
    }

    // Determinism at full resolution, down to the PNG bytes.
    let intr_big = intrinsics_from_fov(90.0, 680, 680).unwrap();
    let positions: Vec<Vec3<f64>> = (0..3000)
        .map(|_| {
            Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..2.5),
            )
        })
        .collect();
    let colors: Vec<[u8; 3]> = (0..3000).map(|_| rng.random()).collect();
    let cloud = PointCloud::new(positions, Some(colors)).unwrap();
    let pose = CameraPose::new(Vec3::new(0.0, 0.0, 1.2), 0.4).unwrap();
    let a = render_view(&cloud, &pose, &intr_big, 2);
    let b = render_view(&cloud, &pose, &intr_big, 2);
    assert_eq!(a, b);
    assert_eq!(a.encode_png().unwrap(), b.encode_png().unwrap());

    assert!(started.elapsed().as_secs_f64() < 30.0, "renderer suite too slow");
    pass(2, "renderer suite", started);
}

// ---------------------------------------------------------------------------
// 3. Adaptive labeling: straight-line oracle over 500 random layouts.
// ---------------------------------------------------------------------------

/// Direct transliteration of the labeling procedure over exclusive
/// rectangles (x0, y0, x1, y1).
fn oracle_labels(
    boxes: &BTreeMap<u32, Box2D>,
    sizes: &BTreeMap<u32, (u32, u32)>,
    img_w: i64,
    img_h: i64,
) -> Vec<(u32, i64, i64, i64, i64, bool)> {
    type R = (i64, i64, i64, i64);
    let overlap = |a: R, b: R| a.0 < b.2 && b.0 < a.2 && a.1 < b.3 && b.1 < a.3;
    let mut occupied: Vec<R> = Vec::new();
    let mut out = Vec::new();
    for (&id, b) in boxes {
        let eb: R = (
            b.x_min as i64,
            b.y_min as i64,
            b.x_max as i64 + 1,
            b.y_max as i64 + 1,
        );
        occupied.push(eb);
        let (w, h) = sizes[&id];
        let (w, h) = (w as i64, h as i64);
        let dy = ((eb.3 - eb.1) - h) / 2;
        let candidates: [R; 4] = [
            (eb.0 - w, eb.1 - h, eb.0, eb.1),                 // top-left
            (eb.2, eb.1 - h, eb.2 + w, eb.1),                 // top-right
            (eb.0 - w, eb.1 + dy, eb.0, eb.1 + dy + h),       // left
            (eb.2, eb.1 + dy, eb.2 + w, eb.1 + dy + h),       // right
        ];
        let mut placed = None;
        for r in candidates {
            let inside = r.0 >= 0 && r.1 >= 0 && r.2 <= img_w && r.3 <= img_h;
            if inside && !occupied.iter().any(|o| overlap(r, *o)) {
                placed = Some((r, false));
                break;
            }
        }
        let (r, fallback) = placed.unwrap_or(((eb.2, eb.1 - h, eb.2 + w, eb.1), true));
        occupied.push(r);
        out.push((id, r.0, r.1, r.2, r.3, fallback));
    }
    out
}

#[test]
fn criterion_3_adaptive_labeling() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    for case in 0..500 {
        let n = rng.random_range(1..=14u32);
        let mut boxes = BTreeMap::new();
        let mut sizes = BTreeMap::new();
        for id in 1..=n {
            let x = rng.random_range(0..640);
            let y = rng.random_range(0..640);
            let w = rng.random_range(4..120);
            let h = rng.random_range(4..120);
            boxes.insert(id, Box2D::new(x, y, (x + w).min(679), (y + h).min(679)));
            sizes.insert(id, (rng.random_range(16..100u32), 16u32));
        }
        let got = place_labels(&boxes, &sizes, (680, 680));
        let want = oracle_labels(&boxes, &sizes, 680, 680);
        assert_eq!(got.len(), want.len(), "case {case}");
        for (g, (id, x0, y0, x1, y1, fallback)) in got.iter().zip(&want) {
            assert_eq!(g.element_id, *id, "case {case}");
            assert_eq!(
                (
                    g.rect.x_min as i64,
                    g.rect.y_min as i64,
                    g.rect.x_max as i64 + 1,
                    g.rect.y_max as i64 + 1
                ),
                (*x0, *y0, *x1, *y1),
                "case {case} id {id}"
            );
            assert_eq!(*fallback, g.anchor_used == Anchor::Fallback, "case {case}");
        }

        // Zero overlaps among non-fallback labels; all fully in bounds.
        let non_fallback: Vec<_> = got
            .iter()
            .filter(|p| p.anchor_used != Anchor::Fallback)
            .collect();
        for (i, p) in non_fallback.iter().enumerate() {
            assert!(p.rect.inside(680, 680), "case {case}: label out of bounds");
            for q in &non_fallback[..i] {
                assert!(
                    !p.rect.intersects(&q.rect),
                    "case {case}: labels {} and {} overlap",
                    p.element_id,
                    q.element_id
                );
            }
        }
    }
    assert!(started.elapsed().as_secs_f64() < 10.0, "labeling suite too slow");
    pass(3, "adaptive labeling suite", started);
}

// ---------------------------------------------------------------------------
// 4. Dilation: all-pairs oracle, monotonicity, and the decay schedule.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_dilation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);

    for case in 0..100 {
        let n = rng.random_range(100..=1000);
        let positions: Vec<Vec3<f64>> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(0.0..2.0),
                    rng.random_range(0.0..2.0),
                    rng.random_range(0.0..2.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(positions.clone(), None).unwrap();
        let mask: PointMask = (0..rng.random_range(1..30))
            .map(|_| rng.random_range(0..n))
            .collect();
        let radius = rng.random_range(0.0..0.3);

        let got = dilate_mask(&cloud, &mask, radius).unwrap();

        // All-pairs oracle with the strict inequality and r=0 special case.
        let want: PointMask = if radius == 0.0 {
            mask.clone()
        } else {
            (0..n)
                .filter(|&i| {
                    mask.iter().any(|j| {
                        let d = positions[i] - positions[j];
                        (d.x * d.x + d.y * d.y + d.z * d.z).sqrt() < radius
                    })
                })
                .collect()
        };
        assert_eq!(got, want, "case {case} radius {radius}");

        // Monotone in radius.
        let grown = dilate_mask(&cloud, &mask, radius + 0.05).unwrap();
        assert!(got.iter().all(|i| grown.contains(i)), "case {case}");
    }

    // Decay schedule, exactly.
    let (delta0, beta, tau) = (0.1f64, 0.5f64, 200u64);
    for t in [0, tau - 1, tau, 2 * tau] {
        let want = delta0 * beta.powi((t / tau) as i32);
        assert_eq!(dilation_radius(t, delta0, beta, tau).unwrap(), want, "t={t}");
    }
    pass(4, "dilation suite", started);
}

// ---------------------------------------------------------------------------
// 5. Axis discretization: truth table, scale invariance, rotation suffixes.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_discretization() {
    let started = Instant::now();
    use AxisPrimitive::*;
    use MotionType::*;

    // Exhaustive canonical-axis truth table; element sits at (1, 1, 1)
    // relative to the reference, so outwards = positive axis sign.
    let element = Vec3::new(1.0, 1.0, 1.0);
    let reference = Vec3::zero();
    let table: [((f64, f64, f64), MotionType, AxisPrimitive); 12] = [
        ((1.0, 0.0, 0.0), Rotation, Horizontal),
        ((-1.0, 0.0, 0.0), Rotation, Horizontal),
        ((0.0, 1.0, 0.0), Rotation, Horizontal),
        ((0.0, -1.0, 0.0), Rotation, Horizontal),
        ((0.0, 0.0, 1.0), Rotation, Vertical),
        ((0.0, 0.0, -1.0), Rotation, Vertical),
        ((1.0, 0.0, 0.0), Translation, HorizontalOutwards),
        ((-1.0, 0.0, 0.0), Translation, HorizontalInwards),
        ((0.0, 1.0, 0.0), Translation, HorizontalOutwards),
        ((0.0, -1.0, 0.0), Translation, HorizontalInwards),
        ((0.0, 0.0, 1.0), Translation, VerticalOutwards),
        ((0.0, 0.0, -1.0), Translation, VerticalInwards),
    ];
    let mut reached = HashSet::new();
    for ((x, y, z), mt, want) in table {
        let got = discretize_axis(Vec3::new(x, y, z), mt, element, reference).unwrap();
        assert_eq!(got, want, "axis ({x},{y},{z}) {mt:?}");
        reached.insert(got);
    }
    assert_eq!(reached.len(), 6, "exactly six primitives reachable");

    // Scale invariance over random axes and scales in [1e-3, 1e3].
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    for _ in 0..1000 {
        let axis = Vec3::new(
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if axis == Vec3::zero() {
            continue;
        }
        let elem = Vec3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let mt = if rng.random::<bool>() { Rotation } else { Translation };
        let base = discretize_axis(axis, mt, elem, reference).unwrap();
        let s = 10f64.powf(rng.random_range(-3.0..3.0));
        assert_eq!(
            discretize_axis(axis * s, mt, elem, reference).unwrap(),
            base,
            "scale {s}"
        );
        if mt == Rotation {
            assert!(matches!(base, Horizontal | Vertical), "suffixed rotation");
        }
    }
    pass(5, "discretization suite", started);
}

// ---------------------------------------------------------------------------
// 6. Metrics: second-implementation oracle + invariants.
// ---------------------------------------------------------------------------

/// Independent second implementation of the metric definitions over
/// HashSet masks.
mod metrics_oracle {
    use super::*;

    fn iou(a: &PointMask, b: &PointMask) -> f64 {
        let sa: HashSet<usize> = a.iter().collect();
        let sb: HashSet<usize> = b.iter().collect();
        let union = sa.union(&sb).count();
        if union == 0 {
            return 0.0;
        }
        sa.intersection(&sb).count() as f64 / union as f64
    }

    fn constraint_ok(p: &TripletPrediction, g: &GroundTruthTriplet, mode: u8) -> bool {
        match mode {
            0 => true,
            1 => p.motion_type == g.motion_type,
            _ => p.motion_type == g.motion_type && p.axis_primitive == g.axis_primitive,
        }
    }

    /// Returns per-prediction TP flags for one task.
    fn tp_flags(task: &TaskEval, thr: f64, mode: u8) -> Vec<bool> {
        let mut order: Vec<usize> = (0..task.predictions.len()).collect();
        order.sort_by(|&a, &b| {
            task.predictions[b]
                .confidence
                .total_cmp(&task.predictions[a].confidence)
                .then(task.predictions[a].element_id.cmp(&task.predictions[b].element_id))
        });
        let mut taken = vec![false; task.ground_truth.len()];
        let mut tp = vec![false; task.predictions.len()];
        for pi in order {
            let pred = &task.predictions[pi];
            let mut best: Option<(usize, f64)> = None;
            for (gi, gt) in task.ground_truth.iter().enumerate() {
                if taken[gi] || !constraint_ok(pred, gt, mode) {
                    continue;
                }
                let v = iou(&pred.mask, &gt.mask);
                if v >= thr && best.is_none_or(|(_, b)| v > b) {
                    best = Some((gi, v));
                }
            }
            if let Some((gi, _)) = best {
                taken[gi] = true;
                tp[pi] = true;
            }
        }
        tp
    }

    pub fn ap(tasks: &[TaskEval], thr: f64, mode: u8) -> f64 {
        let total_gt: usize = tasks.iter().map(|t| t.ground_truth.len()).sum();
        if total_gt == 0 {
            return 0.0;
        }
        let mut pool: Vec<(f64, String, u32, bool)> = Vec::new();
        for task in tasks {
            let tp = tp_flags(task, thr, mode);
            for (pi, pred) in task.predictions.iter().enumerate() {
                pool.push((pred.confidence, task.task_id.clone(), pred.element_id, tp[pi]));
            }
        }
        pool.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        let mut precisions = Vec::new();
        let mut recalls = Vec::new();
        let (mut tp_cum, mut fp_cum) = (0f64, 0f64);
        for (_, _, _, tp) in &pool {
            if *tp {
                tp_cum += 1.0;
            } else {
                fp_cum += 1.0;
            }
            precisions.push(tp_cum / (tp_cum + fp_cum));
            recalls.push(tp_cum / total_gt as f64);
        }

        // All-point interpolation, the slow way: p_interp(r) is the best
        // precision at any recall >= r.
        let mut acc = 0.0;
        let mut prev_recall = 0.0;
        for i in 0..pool.len() {
            let p_interp = precisions[i..]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            acc += (recalls[i] - prev_recall) * p_interp;
            prev_recall = recalls[i];
        }
        acc
    }

    pub fn miou(tasks: &[TaskEval]) -> f64 {
        if tasks.is_empty() {
            return 0.0;
        }
        let per_task: Vec<f64> = tasks
            .iter()
            .map(|t| {
                let pred_union: PointMask =
                    t.predictions.iter().flat_map(|p| p.mask.iter()).collect();
                let gt_union: PointMask =
                    t.ground_truth.iter().flat_map(|g| g.mask.iter()).collect();
                iou(&pred_union, &gt_union)
            })
            .collect();
        per_task.iter().sum::<f64>() / per_task.len() as f64
    }

    pub struct Row {
        pub miou: f64,
        pub ap: f64,
        pub ap50: f64,
        pub ap25: f64,
        pub ap25_t: f64,
        pub ap25_td: f64,
    }

    pub fn row(tasks: &[TaskEval]) -> Row {
        let mut mean_ap = 0.0;
        for i in 0..10 {
            mean_ap += ap(tasks, 0.50 + 0.05 * i as f64, 0);
        }
        Row {
            miou: miou(tasks),
            ap: mean_ap / 10.0,
            ap50: ap(tasks, 0.50, 0),
            ap25: ap(tasks, 0.25, 0),
            ap25_t: ap(tasks, 0.25, 1),
            ap25_td: ap(tasks, 0.25, 2),
        }
    }
}

fn mask_range(range: std::ops::Range<usize>) -> PointMask {
    range.collect()
}

fn planted_dataset() -> Vec<TaskEval> {
    use AffordanceType::*;
    use AxisPrimitive::*;
    use MotionType::*;

    let gt = |task: &str, m: PointMask, mt, ap, ty| {
        GroundTruthTriplet::new(task.into(), m, mt, ap, ty).unwrap()
    };
    let pred = |id, m: PointMask, mt, ap, conf| {
        TripletPrediction::new(id, m, mt, ap, conf).unwrap()
    };

    vec![
        // Perfect single-element task.
        TaskEval {
            task_id: "t1".into(),
            predictions: vec![pred(
                1,
                mask_range(0..10),
                Translation,
                HorizontalOutwards,
                0.95,
            )],
            ground_truth: vec![gt(
                "t1",
                mask_range(0..10),
                Translation,
                HorizontalOutwards,
                HookPull,
            )],
        },
        // Two GTs: one decent match, one borderline match with a wrong type.
        TaskEval {
            task_id: "t2".into(),
            predictions: vec![
                pred(
                    1,
                    PointMask::new((20..28).chain(30..32).collect()),
                    Rotation,
                    Vertical,
                    0.9,
                ),
                pred(
                    2,
                    PointMask::new((40..44).chain(50..56).collect()),
                    Rotation,
                    Horizontal,
                    0.85,
                ),
            ],
            ground_truth: vec![
                gt("t2", mask_range(20..30), Rotation, Vertical, Rotate),
                gt("t2", mask_range(40..50), Translation, VerticalInwards, FootPush),
            ],
        },
        // Exact mask, right type, wrong axis direction.
        TaskEval {
            task_id: "t3".into(),
            predictions: vec![pred(
                1,
                mask_range(60..70),
                Translation,
                HorizontalInwards,
                0.8,
            )],
            ground_truth: vec![gt(
                "t3",
                mask_range(60..70),
                Translation,
                HorizontalOutwards,
                HookPull,
            )],
        },
        // Missed entirely.
        TaskEval {
            task_id: "t4".into(),
            predictions: vec![],
            ground_truth: vec![gt("t4", mask_range(80..90), Rotation, Horizontal, HookTurn)],
        },
        // Spurious prediction on a task with no ground truth.
        TaskEval {
            task_id: "t5".into(),
            predictions: vec![pred(3, mask_range(100..110), Rotation, Vertical, 0.7)],
            ground_truth: vec![],
        },
    ]
}

#[test]
fn criterion_6_metrics() {
    let started = Instant::now();
    let tol = 1e-9;

    // Planted-error dataset vs the independent oracle, every field.
    let tasks = planted_dataset();
    let report = evaluate(&tasks).unwrap();
    let want = metrics_oracle::row(&tasks);
    assert!((report.miou - want.miou).abs() < tol, "miou");
    assert!((report.ap - want.ap).abs() < tol, "ap");
    assert!((report.ap50 - want.ap50).abs() < tol, "ap50");
    assert!((report.ap25 - want.ap25).abs() < tol, "ap25");
    assert!((report.ap25_t - want.ap25_t).abs() < tol, "ap25_t");
    assert!((report.ap25_td - want.ap25_td).abs() < tol, "ap25_td");

    // Per-type breakdown: tasks whose GT contains the type, scored at AP50.
    for (&ty, &got) in &report.per_type {
        let subset: Vec<TaskEval> = tasks
            .iter()
            .filter(|t| t.ground_truth.iter().any(|g| g.affordance_type == ty))
            .cloned()
            .collect();
        let oracle = metrics_oracle::ap(&subset, 0.50, 0);
        assert!((got - oracle).abs() < tol, "per_type {ty:?}");
    }

    // Per-cardinality rows.
    let unique: Vec<TaskEval> = tasks
        .iter()
        .filter(|t| t.ground_truth.len() == 1)
        .cloned()
        .collect();
    let multiple: Vec<TaskEval> = tasks
        .iter()
        .filter(|t| t.ground_truth.len() >= 2)
        .cloned()
        .collect();
    for (got, subset) in [
        (&report.per_cardinality.unique, &unique),
        (&report.per_cardinality.multiple, &multiple),
    ] {
        let want = metrics_oracle::row(subset);
        assert!((got.miou - want.miou).abs() < tol);
        assert!((got.ap - want.ap).abs() < tol);
        assert!((got.ap50 - want.ap50).abs() < tol);
        assert!((got.ap25 - want.ap25).abs() < tol);
        assert!((got.ap25_t - want.ap25_t).abs() < tol);
        assert!((got.ap25_td - want.ap25_td).abs() < tol);
        assert_eq!(got.task_count, subset.len());
    }

    // The planted errors actually bite in the right order.
    assert!(report.ap25_td < report.ap25_t && report.ap25_t < report.ap25);

    // Constraint monotonicity over 100 random datasets.
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    for _ in 0..100 {
        let tasks = random_dataset(&mut rng);
        let r = evaluate(&tasks).unwrap();
        assert!(
            r.ap25_td <= r.ap25_t + 1e-12 && r.ap25_t <= r.ap25 + 1e-12,
            "constraint monotonicity violated: {} / {} / {}",
            r.ap25_td,
            r.ap25_t,
            r.ap25
        );
    }

    // Perfect predictions score exactly 1.0 everywhere.
    let perfect: Vec<TaskEval> = planted_dataset()
        .into_iter()
        .filter(|t| !t.ground_truth.is_empty())
        .map(|t| TaskEval {
            predictions: t
                .ground_truth
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    TripletPrediction::new(
                        i as u32 + 1,
                        g.mask.clone(),
                        g.motion_type,
                        g.axis_primitive,
                        1.0,
                    )
                    .unwrap()
                })
                .collect(),
            task_id: t.task_id,
            ground_truth: t.ground_truth,
        })
        .collect();
    let r = evaluate(&perfect).unwrap();
    assert_eq!(
        (r.miou, r.ap, r.ap50, r.ap25, r.ap25_t, r.ap25_td),
        (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    );
    pass(6, "metrics suite", started);
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Vec<TaskEval> {
    let translations = [
        AxisPrimitive::HorizontalInwards,
        AxisPrimitive::HorizontalOutwards,
        AxisPrimitive::VerticalInwards,
        AxisPrimitive::VerticalOutwards,
    ];
    let motion = |rng: &mut ChaCha8Rng| {
        if rng.random::<bool>() {
            (
                MotionType::Rotation,
                if rng.random::<bool>() {
                    AxisPrimitive::Horizontal
                } else {
                    AxisPrimitive::Vertical
                },
            )
        } else {
            (
                MotionType::Translation,
                translations[rng.random_range(0..4)],
            )
        }
    };
    (0..rng.random_range(2..6))
        .map(|t| {
            let n_gt = rng.random_range(0..4);
            let ground_truth: Vec<GroundTruthTriplet> = (0..n_gt)
                .map(|_| {
                    let (mt, ap) = motion(rng);
                    let mask: PointMask =
                        (0..10).map(|_| rng.random_range(0..60usize)).collect();
                    GroundTruthTriplet::new(
                        format!("t{t}"),
                        mask,
                        mt,
                        ap,
                        AffordanceType::ALL[rng.random_range(0..9)],
                    )
                    .unwrap()
                })
                .collect();
            let predictions: Vec<TripletPrediction> = (0..rng.random_range(0..5))
                .map(|i| {
                    let mask: PointMask = if !ground_truth.is_empty() && rng.random::<bool>() {
                        let base = &ground_truth[rng.random_range(0..ground_truth.len())];
                        PointMask::new(
                            base.mask
                                .iter()
                                .chain((0..rng.random_range(0..5)).map(|_| rng.random_range(0..60)))
                                .collect(),
                        )
                    } else {
                        (0..8).map(|_| rng.random_range(0..60usize)).collect()
                    };
                    let (mt, ap) = motion(rng);
                    TripletPrediction::new(i + 1, mask, mt, ap, rng.random_range(0.01..1.0))
                        .unwrap()
                })
                .collect();
            TaskEval {
                task_id: format!("t{t}"),
                predictions,
                ground_truth,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 7. End-to-end closed loop through the CLI binary.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_end_to_end() {
    let started = Instant::now();
    use afford3d_cli::synthetic::SyntheticScene;

    let dir = tempfile::tempdir().unwrap();
    let scene = SyntheticScene::build();
    scene.write_inputs(dir.path()).unwrap();
    let out = dir.path().join("out");

    let script_path = dir.path().join("mock_script.json");
    let write_script = |script: &[String]| {
        std::fs::write(&script_path, serde_json::to_string(script).unwrap()).unwrap();
    };

    let run = |cmd: &str| {
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_afford3d"))
            .args([
                cmd,
                "--cloud",
                dir.path().join("scene.ply").to_str().unwrap(),
                "--proposals",
                dir.path().join("proposals.json").to_str().unwrap(),
                "--tasks",
                dir.path().join("tasks.jsonl").to_str().unwrap(),
                "--ground-truth",
                dir.path().join("ground_truth.jsonl").to_str().unwrap(),
                "--mock-script",
                script_path.to_str().unwrap(),
                "--output",
                out.to_str().unwrap(),
            ])
            .output()
            .expect("spawn afford3d");
        assert!(
            output.status.success(),
            "{cmd} failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    };
    let read_report = || -> EvalReport {
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
    };

    // Default configuration: 8 views at 680 x 680.
    write_script(&scene.mock_script(8, None));
    run("render");
    for i in 1..=8 {
        let img = Image::load_png(out.join(format!("view_{i}.png"))).unwrap();
        assert_eq!((img.width(), img.height()), (680, 680));
    }
    run("annotate");
    run("run");
    run("eval");

    let report1 = read_report();
    assert_eq!(report1.miou, 1.0, "mIoU");
    assert_eq!(report1.ap, 1.0, "AP");
    assert_eq!(report1.ap50, 1.0, "AP50");
    assert_eq!(report1.ap25, 1.0, "AP25");
    assert_eq!(report1.ap25_t, 1.0, "+T");
    assert_eq!(report1.ap25_td, 1.0, "+TD");
    assert_eq!(report1.per_cardinality.multiple.ap25_td, 1.0);

    // One planted wrong axis: +TD drops below +T, everything else unchanged.
    write_script(&scene.mock_script(8, Some(0)));
    run("run");
    run("eval");
    let report2 = read_report();
    assert_eq!(report2.miou, report1.miou);
    assert_eq!(report2.ap, report1.ap);
    assert_eq!(report2.ap50, report1.ap50);
    assert_eq!(report2.ap25, report1.ap25);
    assert_eq!(report2.ap25_t, report1.ap25_t);
    assert!(
        report2.ap25_td < report2.ap25_t,
        "+TD {} must drop below +T {}",
        report2.ap25_td,
        report2.ap25_t
    );

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "end-to-end loop took {elapsed:.1}s");
    pass(7, "end-to-end closed loop", started);
}

// ---------------------------------------------------------------------------
// 8. Transport equivalence: HTTP backend vs in-process mock.
// ---------------------------------------------------------------------------

mod stub_server {
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::thread;
    use std::time::Duration;

    pub fn spawn(replies: Vec<String>) -> (String, thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
        let addr = listener.local_addr().unwrap();
        let handle = thread::spawn(move || {
            for reply in replies {
                let (mut stream, _) = listener.accept().expect("accept");
                stream
                    .set_read_timeout(Some(Duration::from_secs(10)))
                    .unwrap();
                let mut buf = Vec::new();
                let mut chunk = [0u8; 4096];
                let header_end = loop {
                    let n = stream.read(&mut chunk).expect("read");
                    assert!(n > 0);
                    buf.extend_from_slice(&chunk[..n]);
                    if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                        break pos + 4;
                    }
                };
                let headers = String::from_utf8_lossy(&buf[..header_end]).to_lowercase();
                let content_length: usize = headers
                    .lines()
                    .find_map(|l| l.strip_prefix("content-length:"))
                    .map(|v| v.trim().parse().unwrap())
                    .unwrap_or(0);
                while buf.len() < header_end + content_length {
                    let n = stream.read(&mut chunk).expect("read body");
                    assert!(n > 0);
                    buf.extend_from_slice(&chunk[..n]);
                }
                let body = serde_json::json!({
                    "choices": [{"message": {"role": "assistant", "content": reply}}]
                })
                .to_string();
                let response = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\n\
                     Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(response.as_bytes()).expect("write");
            }
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }
}

#[test]
fn criterion_8_transport_equivalence() {
    let started = Instant::now();
    use afford3d_cli::synthetic::SyntheticScene;
    use afford3d_core::descriptors::build_descriptors;
    use afford3d_core::projection::annotate_view;
    use afford3d_core::render::render_sweep;
    use afford3d_reason::{
        run_task, HttpBackend, HttpConfig, MockBackend, ReasoningOptions, SceneArtifacts,
        TaskInstruction,
    };

    // In-memory scene at reduced resolution; one multi-element task.
    let synth = SyntheticScene::build();
    let descriptors = build_descriptors(&synth.cloud, &synth.proposals).unwrap();
    let center = afford3d_core::camera::observation_center(&synth.cloud, &descriptors).unwrap();
    let intr = intrinsics_from_fov(90.0, 128, 128).unwrap();
    let views: Vec<_> = render_sweep(&synth.cloud, center, 4, &intr, 1)
        .unwrap()
        .iter()
        .map(|v| annotate_view(v, &descriptors).unwrap())
        .collect();
    let scene = SceneArtifacts::new(
        synth.cloud.clone(),
        synth.proposals.clone(),
        descriptors,
        views,
    )
    .unwrap();

    let script: Vec<String> = synth.mock_script(4, None)[..3].to_vec();
    let task = &synth.tasks[0];
    let instr = TaskInstruction::new("synthetic_apartment", task.text.clone()).unwrap();

    let mock = MockBackend::from_replies(script.clone());
    let (_, mock_result) = run_task(
        &task.task_id,
        &scene,
        &instr,
        &mock,
        &ReasoningOptions::default(),
    );
    let mock_preds = mock_result.unwrap();

    let (endpoint, server) = stub_server::spawn(script);
    let http = HttpBackend::new(HttpConfig {
        endpoint,
        model: "stub".into(),
        timeout: std::time::Duration::from_secs(10),
        temperature: 0.0,
        max_retries: 0,
        bearer_token: None,
    })
    .unwrap();
    let (_, http_result) = run_task(
        &task.task_id,
        &scene,
        &instr,
        &http,
        &ReasoningOptions::default(),
    );
    let http_preds = http_result.unwrap();
    server.join().unwrap();

    assert_eq!(
        serde_json::to_vec(&mock_preds).unwrap(),
        serde_json::to_vec(&http_preds).unwrap(),
        "HTTP and mock predictions must be byte-identical"
    );
    assert!(!mock_preds.is_empty());
    pass(8, "transport equivalence", started);
}
