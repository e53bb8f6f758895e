//! Acceptance suite: one test per release criterion. Each test prints a
//! `[PASS]` line (visible with `--nocapture`) once its assertions hold,
//! and stated runtime budgets are enforced in-test.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{lane_db, pack_instance, random_db};
use synopsis_core::energy::{
    max_finite_interaction_distance, max_start_gap, total_energy,
};
use synopsis_core::grouping::group_tubes;
use synopsis_core::io::{render_scene_frames, synth_scene, ObjectSpec, SceneSpec, SynthScene};
use synopsis_core::render::{solve_channel, Patch, RgbImage, SolverOptions};
use synopsis_core::scheduler::{
    brute_force_optimal_length, minimize_length, sweep, SweepAxis,
};
use synopsis_core::tracker::track_frames;
use synopsis_core::tube::{GroupingMode, Mapping, Tube};
use synopsis_core::{Fps, Params, TrackerConfig};

/// Three stock lane scenes: objects in disjoint lanes, staggered entries,
/// mildly fragmented tracks. No two boxes ever intersect in the original.
fn lane_scene(seed: u64) -> SceneSpec {
    SceneSpec {
        width: 640,
        height: 480,
        fps: Fps::default(),
        duration: 700,
        objects: (0..4)
            .map(|j| ObjectSpec {
                entry_frame: 120 * j,
                entry: (4.0, 40.0 + 90.0 * j as f64),
                velocity: (1.2, 0.0),
                size: (16, 12),
                intensity: None,
            })
            .collect(),
        seed,
        fragmentation_rate: 1.0,
        background_level: 30,
    }
}

#[test]
fn c01_identity_mapping_zero_energy() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    for case in 0..100 {
        let n = rng.gen_range(5..=30);
        let db = lane_db(rng.gen(), n);
        let p = Params::default();
        let e = total_energy(&db, &Mapping::identity(&db), &p, &[]).unwrap();
        assert_eq!(e.total, 0.0, "case {case}: identity energy must be 0");
        assert_eq!(e.activity, 0.0);
        assert_eq!(e.temporal, 0.0);
        assert_eq!(e.chrono, 0.0);
        assert_eq!(e.collision, 0.0);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("[PASS] criterion 1: identity mapping scores E(M) = 0 on 100 random databases ({elapsed:?})");
}

#[test]
fn c02_grouping_threshold_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    for case in 0..100 {
        let n = rng.gen_range(2..=20);
        let db = random_db(rng.gen(), n);
        let low = Params {
            alpha: 0.0,
            beta: 0.0,
            grouping_mode: GroupingMode::Transitive,
            ..Params::default()
        };
        let g = group_tubes(&db, &low).unwrap();
        assert_eq!(g.groups.len(), db.len(), "case {case}: low thresholds");

        let max_ds = max_finite_interaction_distance(&db, &low).unwrap_or(0.0);
        let max_gap = max_start_gap(&db).unwrap_or(0) as f64;
        let high = Params {
            alpha: max_ds + 1.0,
            beta: max_gap + 1.0,
            ..low
        };
        let g = group_tubes(&db, &high).unwrap();
        assert_eq!(g.groups.len(), 1, "case {case}: high thresholds");
    }
    println!("[PASS] criterion 2: grouping limits (singletons below, one group above) on 100 random databases");
}

#[test]
fn c03_within_group_pairs_cost_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let mut grouped_pairs = 0usize;
    for case in 0..25 {
        let db = if case % 2 == 0 {
            lane_db(rng.gen(), rng.gen_range(5..=16))
        } else {
            random_db(rng.gen(), rng.gen_range(5..=16))
        };
        let p = Params {
            alpha: [0.0, 2.0, 5.0][case % 3],
            beta: rng.gen_range(0.0..40.0),
            ..Params::default()
        };
        let g = group_tubes(&db, &p).unwrap();
        let s = minimize_length(&db, &g, &p).unwrap();
        assert!(s.mapping.is_rigid_for(&g.groups));
        for pe in &s.energy.per_pair {
            if g.group_of(pe.a) == g.group_of(pe.b) {
                grouped_pairs += 1;
                assert_eq!(pe.temporal, 0.0, "case {case}: E_t within group");
                assert_eq!(pe.chrono, 0.0, "case {case}: E_o within group");
            }
        }
    }
    assert!(grouped_pairs > 50, "groupings too trivial to be probative");
    println!("[PASS] criterion 3: within-group pairs score E_t = E_o = 0 exactly ({grouped_pairs} pairs checked)");
}

#[test]
fn c04_sweep_endpoints_and_plateau() {
    for seed in [11, 22, 33] {
        let scene = synth_scene(&lane_scene(seed)).unwrap();
        let db = &scene.db;
        let p = Params::default();

        let max_gap = max_start_gap(db).unwrap() as f64;
        let rows = sweep(
            db,
            SweepAxis::Beta,
            &[0.0, max_gap / 4.0, max_gap / 2.0, max_gap + 1.0],
            &p,
        )
        .unwrap();
        let tail = rows.last().unwrap();
        assert_eq!(tail.length, db.original_length(), "scene {seed}: beta tail length");
        assert_eq!(tail.energy, 0.0, "scene {seed}: beta tail energy");

        let max_ds = max_finite_interaction_distance(db, &p).unwrap();
        let rows = sweep(
            db,
            SweepAxis::Alpha,
            &[max_ds * 1.000_001, max_ds * 2.0, max_ds * 8.0],
            &p,
        )
        .unwrap();
        assert_eq!(rows[0].length, rows[1].length, "scene {seed}: alpha plateau");
        assert_eq!(rows[1].length, rows[2].length, "scene {seed}: alpha plateau");
    }
    println!("[PASS] criterion 4: beta-sweep endpoint recovers the original video; alpha-sweep plateaus past max d_s (3 scenes)");
}

#[test]
fn c05_tradeoff_endpoint_and_nonnegativity() {
    for seed in [11, 22, 33] {
        let scene = synth_scene(&lane_scene(seed)).unwrap();
        let db = &scene.db;
        let p = Params::default();
        let max_gap = max_start_gap(db).unwrap() as f64;
        let max_ds = max_finite_interaction_distance(db, &p).unwrap();

        let beta_rows = sweep(
            db,
            SweepAxis::Beta,
            &[0.0, max_gap / 3.0, max_gap / 1.5, max_gap + 1.0],
            &p,
        )
        .unwrap();
        let alpha_rows = sweep(
            db,
            SweepAxis::Alpha,
            &[0.0, max_ds / 2.0, max_ds * 2.0],
            &p,
        )
        .unwrap();
        let budget_rows = sweep(db, SweepAxis::Budget, &[0.0, 40.0, 160.0], &p).unwrap();

        let mut span_samples = 0;
        for row in beta_rows.iter().chain(&alpha_rows).chain(&budget_rows) {
            assert!(row.energy >= 0.0, "scene {seed}: negative energy");
            if row.length == db.original_length() {
                span_samples += 1;
                assert_eq!(row.energy, 0.0, "scene {seed}: span-length sample must have zero energy");
            }
        }
        assert!(span_samples >= 1, "scene {seed}: no span-length sample seen");
    }
    println!("[PASS] criterion 5: every span-length sweep sample has E(M) = 0 and no sample is negative (3 scenes)");
}

#[test]
fn c06_packing_oracle() {
    let start = Instant::now();
    let mut ratio_sum = 0.0;
    let mut small_equal = 0usize;
    for seed in 0..50u64 {
        let (db, g, p) = pack_instance(seed * 31 + 7);
        let greedy = minimize_length(&db, &g, &p).unwrap();
        let optimal = brute_force_optimal_length(&db, &g, &p, greedy.length).unwrap();
        assert!(
            greedy.length >= optimal,
            "seed {seed}: greedy {} below optimal {optimal}",
            greedy.length
        );
        if g.groups.len() <= 2 {
            assert_eq!(greedy.length, optimal, "seed {seed}: <=2 groups must match");
            small_equal += 1;
        }
        ratio_sum += greedy.length as f64 / optimal as f64;
    }
    let mean_ratio = ratio_sum / 50.0;
    assert!(mean_ratio <= 1.25, "mean greedy/optimal ratio {mean_ratio}");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "[PASS] criterion 6: greedy within bound of exhaustive optimum on 50 instances \
         (mean ratio {mean_ratio:.4}, {small_equal} small instances exact, {elapsed:?})"
    );
}

#[test]
fn c07_collision_budget_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    let mut checked = 0usize;
    for case in 0..10 {
        let db = random_db(rng.gen(), rng.gen_range(6..=14));
        for budget in [0.0, 50.0, 300.0] {
            let p = Params {
                beta: rng.gen_range(0.0..30.0),
                collision_budget: budget,
                ..Params::default()
            };
            let g = group_tubes(&db, &p).unwrap();
            let s = minimize_length(&db, &g, &p).unwrap();
            // Independent exhaustive scan over cross-group pairs and
            // every shared synopsis frame.
            let tubes: Vec<&Tube> = db.tubes().collect();
            for i in 0..tubes.len() {
                for j in (i + 1)..tubes.len() {
                    let (a, b) = (tubes[i], tubes[j]);
                    if g.group_of(a.id()) == g.group_of(b.id()) {
                        continue;
                    }
                    let da = s.mapping.shift(a.id()).unwrap();
                    let db_ = s.mapping.shift(b.id()).unwrap();
                    let lo = (a.start_frame() + da).max(b.start_frame() + db_);
                    let hi = (a.end_frame() + da).min(b.end_frame() + db_);
                    for t in lo..=hi {
                        let inter = a
                            .box_at(t - da)
                            .unwrap()
                            .intersection_area(b.box_at(t - db_).unwrap());
                        assert!(
                            inter as f64 <= budget,
                            "case {case}: pair ({}, {}) overlaps {inter} px^2 at frame {t}, budget {budget}",
                            a.id(),
                            b.id()
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    println!("[PASS] criterion 7: packing respects the collision budget (exhaustive scan, {checked} frame-pairs)");
}

#[test]
fn c08_tracker_recovers_synthetic_motion() {
    // One square entering from the left at (2, 1) px/frame: fully in view
    // exactly over frames [6, 50].
    let spec = SceneSpec {
        width: 100,
        height: 80,
        fps: Fps::default(),
        duration: 60,
        objects: vec![ObjectSpec {
            entry_frame: 0,
            entry: (-12.0, 4.0),
            velocity: (2.0, 1.0),
            size: (12, 12),
            intensity: Some(220),
        }],
        seed: 0,
        fragmentation_rate: 0.0,
        background_level: 30,
    };
    let frames = render_scene_frames(&spec).unwrap();
    let cfg = TrackerConfig {
        min_area: 140,
        ..TrackerConfig::default()
    };
    let db = track_frames(&frames, &cfg).unwrap();
    assert_eq!(db.len(), 1, "exactly one tube expected");
    let tube = db.tubes().next().unwrap();
    assert_eq!(tube.start_frame(), 6, "entry endpoint");
    assert_eq!(tube.end_frame(), 50, "exit endpoint");
    for f in 6..=50 {
        let (cx, cy) = tube.center(f).unwrap();
        let gt = ((-12 + 2 * f) as f64 + 6.0, (4 + f) as f64 + 6.0);
        let err = ((cx - gt.0).powi(2) + (cy - gt.1).powi(2)).sqrt();
        assert!(err < 1.0, "frame {f}: center error {err}");
    }

    // A fragmentation-free multi-object scene tracks to one tube per
    // object, each in its own lane.
    let spec = SceneSpec {
        width: 200,
        height: 120,
        fps: Fps::default(),
        duration: 150,
        objects: (0..3)
            .map(|j| ObjectSpec {
                entry_frame: 30 * j,
                entry: (-12.0, 12.0 + 38.0 * j as f64),
                velocity: (2.0, 0.0),
                size: (12, 12),
                intensity: Some(190 + 20 * j as u8),
            })
            .collect(),
        seed: 0,
        fragmentation_rate: 0.0,
        background_level: 30,
    };
    let frames = render_scene_frames(&spec).unwrap();
    let db = track_frames(&frames, &cfg).unwrap();
    assert_eq!(db.len(), 3, "one tube per object");
    for (j, expected_cy) in [(0usize, 18.0), (1, 56.0), (2, 94.0)] {
        let hits = db
            .tubes()
            .filter(|t| {
                let (_, cy) = t.center(t.start_frame()).unwrap();
                (cy - expected_cy).abs() < 6.0
            })
            .count();
        assert_eq!(hits, 1, "object {j} must map to exactly one tube");
    }
    println!("[PASS] criterion 8: tracker recovers the moving square exactly and one tube per object at fragmentation 0");
}

#[test]
fn c09_poisson_solver_matches_dense_solve() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA9);
    let opts = SolverOptions {
        max_iters: 10_000,
        tolerance: 1e-5,
    };
    let (w, h) = (16usize, 16usize);
    for case in 0..20 {
        let init: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0..256) as f64).collect();
        let source: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0..256) as f64).collect();
        let mut mask = vec![false; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                mask[y * w + x] = true;
            }
        }
        let gs = solve_channel(w, h, &init, &source, &mask, &opts);
        assert!(gs.converged, "case {case}: solver must converge");

        // Dense oracle: assemble the masked system and LU-solve it.
        let masked: Vec<usize> = (0..w * h).filter(|&i| mask[i]).collect();
        let index_of = |i: usize| masked.binary_search(&i).ok();
        let n = masked.len();
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut b = nalgebra::DVector::<f64>::zeros(n);
        for (row, &i) in masked.iter().enumerate() {
            let (x, y) = (i % w, i / w);
            a[(row, row)] = 4.0;
            let lap_p = 4.0 * source[i]
                - source[i - 1]
                - source[i + 1]
                - source[i - w]
                - source[i + w];
            b[row] = lap_p;
            for nb in [y * w + x - 1, y * w + x + 1, (y - 1) * w + x, (y + 1) * w + x] {
                match index_of(nb) {
                    Some(col) => a[(row, col)] = -1.0,
                    None => b[row] += init[nb],
                }
            }
        }
        let dense = a.lu().solve(&b).expect("poisson system is nonsingular");
        for (row, &i) in masked.iter().enumerate() {
            let diff = (gs.values[i] - dense[row]).abs();
            assert!(diff <= 1e-3, "case {case}: pixel {i} off by {diff}");
        }
    }

    // Maximum principle: constant patch into constant background stays at
    // the background constant across the mask interior.
    let bg = RgbImage::filled(16, 16, [77, 77, 77]);
    let patch = Patch::with_box_mask(RgbImage::filled(10, 10, [200, 30, 90]), 3, 3).unwrap();
    let result = synopsis_core::render::poisson_blend(&bg, &patch, &opts).unwrap();
    for y in 0..16 {
        for x in 0..16 {
            assert_eq!(result.image.get(x, y), [77, 77, 77]);
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!("[PASS] criterion 9: Gauss-Seidel matches dense solve within 1e-3 on 20 instances; maximum principle holds ({elapsed:?})");
}

/// Count appearance discontinuities: for one source object, a maximal run
/// of >= 2 inactive synopsis frames strictly between active segments.
/// (One-frame holes are the generator's fragmentation gaps; they exist
/// even in the original video.)
fn discontinuities(scene: &SynthScene, mapping: &Mapping, object: usize) -> usize {
    let spans: Vec<_> = scene
        .tube_objects
        .iter()
        .filter(|(_, o)| *o == object)
        .map(|(id, _)| {
            let t = scene.db.get(*id).unwrap();
            t.span().shifted(mapping.shift(*id).unwrap())
        })
        .collect();
    if spans.is_empty() {
        return 0;
    }
    let lo = spans.iter().map(|s| s.start).min().unwrap();
    let hi = spans.iter().map(|s| s.end).max().unwrap();
    let mut active = vec![false; (hi - lo + 1) as usize];
    for s in &spans {
        for t in s.start..=s.end {
            active[(t - lo) as usize] = true;
        }
    }
    let mut count = 0;
    let mut gap = 0usize;
    for &a in &active {
        if a {
            if gap >= 2 {
                count += 1;
            }
            gap = 0;
        } else {
            gap += 1;
        }
    }
    count
}

#[test]
fn c10_grouping_removes_appearance_discontinuities() {
    // Three objects sharing one spatial lane with interleaved lifetimes
    // and heavy track fragmentation. Any two boxes in this scene
    // intersect, so at budget 0 an ungrouped packing is a pure
    // concatenation in start order, which interleaves the objects'
    // fragments and tears their timelines apart.
    let spec = SceneSpec {
        width: 200,
        height: 100,
        fps: Fps::default(),
        duration: 200,
        objects: (0..3)
            .map(|j| ObjectSpec {
                entry_frame: 40 * j,
                entry: (10.0, 40.0),
                velocity: (0.1, 0.0),
                size: (46, 18),
                intensity: None,
            })
            .collect(),
        seed: 0xC10,
        fragmentation_rate: 8.0,
        background_level: 30,
    };
    let scene = synth_scene(&spec).unwrap();
    let db = &scene.db;
    let fragmented_objects = (0..3)
        .filter(|k| scene.tube_objects.iter().filter(|(_, o)| o == k).count() >= 2)
        .count();
    assert!(fragmented_objects >= 1, "scene must actually fragment");

    // Ungrouped: alpha = beta = 0, every tube its own group.
    let p0 = Params::default();
    let ungrouped = minimize_length(db, &group_tubes(db, &p0).unwrap(), &p0).unwrap();

    // Grouped: beta large enough to chain every fragment of an object
    // back together (over-grouping across objects is fine; rigidity is
    // what matters).
    let pg = Params {
        beta: 150.0,
        ..Params::default()
    };
    let grouping = group_tubes(db, &pg).unwrap();
    for k in 0..3 {
        let groups_of_object: std::collections::BTreeSet<_> = scene
            .tube_objects
            .iter()
            .filter(|(_, o)| *o == k)
            .map(|(id, _)| grouping.group_of(*id).unwrap())
            .collect();
        assert_eq!(groups_of_object.len(), 1, "object {k} must be reunited");
    }
    let grouped = minimize_length(db, &grouping, &pg).unwrap();

    let ungrouped_total: usize = (0..3)
        .map(|k| discontinuities(&scene, &ungrouped.mapping, k))
        .sum();
    let grouped_total: usize = (0..3)
        .map(|k| discontinuities(&scene, &grouped.mapping, k))
        .sum();
    assert!(
        ungrouped_total >= 1,
        "ungrouped schedule shows no discontinuities; scene too easy"
    );
    assert_eq!(grouped_total, 0, "grouping must remove every discontinuity");
    assert!(grouped_total < ungrouped_total);
    println!(
        "[PASS] criterion 10: grouping removes appearance discontinuities \
         ({ungrouped_total} ungrouped vs {grouped_total} grouped)"
    );
}
