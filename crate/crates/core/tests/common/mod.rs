//! Shared generators for the integration and acceptance suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use synopsis_core::grouping::GroupingResult;
use synopsis_core::tube::{BoundingBox, Fps, Params, Tube, TubeDatabase, TubeId};
use synopsis_core::Scalar;

/// A tube moving linearly from (x0, y0), positions clamped into the scene.
pub fn moving_tube(
    id: u64,
    start: i64,
    len: i64,
    (x0, y0): (i32, i32),
    (vx, vy): (i32, i32),
    (w, h): (u32, u32),
    (scene_w, scene_h): (u32, u32),
) -> Tube {
    let boxes = (0..len)
        .map(|dt| {
            let x = (x0 + vx * dt as i32).clamp(0, scene_w as i32 - w as i32);
            let y = (y0 + vy * dt as i32).clamp(0, scene_h as i32 - h as i32);
            BoundingBox::new(start + dt, x, y, w, h)
        })
        .collect();
    Tube::new(TubeId(id), boxes).unwrap()
}

/// Random database where every tube lives in its own horizontal lane:
/// boxes of different tubes never intersect, at any frame, so the
/// original layout is collision-free.
pub fn lane_db(seed: u64, n: usize) -> TubeDatabase {
    assert!(n <= 30, "only 30 disjoint lanes available");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = TubeDatabase::new(640, 480, Fps::default()).unwrap();
    for i in 0..n {
        let lane = i as i32;
        let y = lane * 16 + 1;
        let h = rng.gen_range(4..=12);
        let w = rng.gen_range(4..=14);
        let len = rng.gen_range(3..=40);
        let start = rng.gen_range(0..=200);
        let x0 = rng.gen_range(0..=(640 - w as i32 - 1));
        let vx = rng.gen_range(-2..=2);
        db.insert(moving_tube(
            i as u64,
            start,
            len,
            (x0, y),
            (vx, 0),
            (w as u32, h as u32),
            (640, 480),
        ))
        .unwrap();
    }
    db
}

/// Fully random database; tubes may overlap spatially and temporally.
pub fn random_db(seed: u64, n: usize) -> TubeDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = TubeDatabase::new(400, 300, Fps::default()).unwrap();
    for i in 0..n {
        let w = rng.gen_range(4..=24);
        let h = rng.gen_range(4..=24);
        let len = rng.gen_range(3..=50);
        let start = rng.gen_range(0..=150);
        let x0 = rng.gen_range(0..=(400 - w as i32));
        let y0 = rng.gen_range(0..=(300 - h as i32));
        let vx = rng.gen_range(-3..=3);
        let vy = rng.gen_range(-2..=2);
        db.insert(moving_tube(
            i as u64,
            start,
            len,
            (x0, y0),
            (vx, vy),
            (w as u32, h as u32),
            (400, 300),
        ))
        .unwrap();
    }
    db
}

/// Packing-oracle instance: singleton groups with constant (static)
/// boxes. For such instances greedy earliest-fit is provably optimal at
/// two or fewer groups, which is exactly what the oracle asserts.
#[allow(dead_code)] // not every test target packs
pub fn pack_instance(seed: u64) -> (TubeDatabase, GroupingResult<Scalar>, Params<Scalar>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6usize);
    let mut db = TubeDatabase::new(300, 300, Fps::default()).unwrap();
    for i in 0..n {
        let w = rng.gen_range(10..=40);
        let h = rng.gen_range(10..=40);
        // Crowded instances force real packing decisions.
        let (x, y) = if rng.gen_bool(0.5) {
            (rng.gen_range(100..=150), rng.gen_range(100..=150))
        } else {
            (rng.gen_range(0..=240), rng.gen_range(0..=240))
        };
        let len = rng.gen_range(5..=20);
        let start = rng.gen_range(0..=60);
        let boxes = (start..start + len)
            .map(|f| BoundingBox::new(f, x, y, w, h))
            .collect();
        db.insert(Tube::new(TubeId(i as u64), boxes).unwrap())
            .unwrap();
    }
    let p = Params::default();
    let g = GroupingResult::singletons(&db, &p);
    (db, g, p)
}
