//! Pairwise energy model scoring how much a synopsis distorts the original
//! video: interaction distortion, chronological-order violation, object
//! collisions, and dropped activity.
//!
//! All terms are symmetric in their two tubes, non-negative, and exactly
//! zero under the identity mapping (and under any rigid shift of the whole
//! database).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::tube::{
    EnergyBreakdown, FrameIndex, FrameSpan, Mapping, PairEnergy, Params, SigmaMode, Tube,
    TubeDatabase, TubeId,
};

/// Euclidean distance in pixels between two tubes' box centers at frame
/// `f`, which must lie in both spans.
pub fn frame_distance<R: Real>(a: &Tube, b: &Tube, f: FrameIndex) -> Result<R> {
    let (ax, ay) = a.center(f)?;
    let (bx, by) = b.center(f)?;
    Ok(R::of_f64(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()))
}

/// Object-size normalizer for a pair of tubes: the mean of the two tubes'
/// time-averaged box areas, either as an area (pixels²) or as the
/// characteristic length `sqrt(area)` (pixels, the default).
pub fn sigma_area<R: Real>(a: &Tube, b: &Tube, mode: SigmaMode) -> R {
    let mean = (a.mean_area() + b.mean_area()) / 2.0;
    match mode {
        SigmaMode::Area => R::of_f64(mean),
        SigmaMode::SqrtArea => R::of_f64(mean.sqrt()),
    }
}

fn center_distance(abox: &crate::tube::BoundingBox, bbox: &crate::tube::BoundingBox) -> f64 {
    let (ax, ay) = abox.center();
    let (bx, by) = bbox.center();
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

/// Spatio-temporal interaction distance `exp(min distance / sigma)` over
/// the frames the two tubes share. Infinity when the (possibly shifted)
/// spans are disjoint; grouping treats that as "never interacts".
///
/// Under a mapping, both tubes are walked in synopsis time, each reading
/// its own box at the corresponding original frame.
pub fn interaction_distance<R: Real>(
    a: &Tube,
    b: &Tube,
    m: Option<&Mapping>,
    p: &Params<R>,
) -> Result<R> {
    let (da, db) = match m {
        Some(m) => (m.shift(a.id())?, m.shift(b.id())?),
        None => (0, 0),
    };
    let shared = match a.span().shifted(da).intersect(&b.span().shifted(db)) {
        Some(s) => s,
        None => return Ok(R::infinity()),
    };
    let mut min_d = f64::INFINITY;
    for t in shared.frames() {
        let abox = a.box_at(t - da).expect("t - da lies in a's span");
        let bbox = b.box_at(t - db).expect("t - db lies in b's span");
        min_d = min_d.min(center_distance(abox, bbox));
    }
    let sigma = sigma_area::<R>(a, b, p.sigma_mode);
    Ok((R::of_f64(min_d) / sigma).exp_capped())
}

/// Interaction term of the energy: zero when the spans are disjoint,
/// otherwise the finite interaction distance.
pub fn interaction<R: Real>(a: &Tube, b: &Tube, m: Option<&Mapping>, p: &Params<R>) -> Result<R> {
    let d = interaction_distance(a, b, m, p)?;
    Ok(if d.is_infinite() { R::zero() } else { d })
}

/// Spatio-temporal consistency cost: how much the pair's interaction
/// changed between original and synopsis. Taken as an absolute difference
/// so that opposite distortions cannot cancel in the sum; the zero cases
/// are unchanged.
pub fn temporal_consistency_cost<R: Real>(
    a: &Tube,
    b: &Tube,
    m: &Mapping,
    p: &Params<R>,
) -> Result<R> {
    let original = interaction(a, b, None, p)?;
    let shifted = interaction(a, b, Some(m), p)?;
    Ok((original - shifted).abs())
}

/// Which timeline a chronological distance is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSide {
    Original,
    Synopsis,
}

/// Signed chronological distance of a pair on one timeline:
/// `(start gap) * d_ch`, zeroed when the pair's spans overlap on that
/// timeline. `d_ch` is 0 when the synopsis preserves the pair's original
/// start offset, else the constant order-violation cost.
pub fn chrono_distance<R: Real>(
    a: &Tube,
    b: &Tube,
    m: &Mapping,
    p: &Params<R>,
    side: TimeSide,
) -> Result<R> {
    let (da, db) = (m.shift(a.id())?, m.shift(b.id())?);
    let (gap, overlaps) = match side {
        TimeSide::Original => (
            a.start_frame() - b.start_frame(),
            a.span().intersect(&b.span()).is_some(),
        ),
        TimeSide::Synopsis => (
            (a.start_frame() + da) - (b.start_frame() + db),
            a.span()
                .shifted(da)
                .intersect(&b.span().shifted(db))
                .is_some(),
        ),
    };
    if overlaps {
        return Ok(R::zero());
    }
    let original_gap = a.start_frame() - b.start_frame();
    let synopsis_gap = (a.start_frame() + da) - (b.start_frame() + db);
    let d_ch = if original_gap == synopsis_gap {
        R::zero()
    } else {
        p.chrono_constant
    };
    Ok(R::of_i64(gap) * d_ch)
}

/// Chronological appearance cost: absolute change of the chronological
/// distance between original and synopsis.
pub fn chronological_cost<R: Real>(a: &Tube, b: &Tube, m: &Mapping, p: &Params<R>) -> Result<R> {
    let original = chrono_distance(a, b, m, p, TimeSide::Original)?;
    let shifted = chrono_distance(a, b, m, p, TimeSide::Synopsis)?;
    Ok((original - shifted).abs())
}

/// Collision cost of a pair in the synopsis: weighted sum over shared
/// synopsis frames of the two boxes' intersection area, normalized by the
/// scene area. Zero when the shifted spans are disjoint or the boxes never
/// meet.
pub fn collision_cost<R: Real>(
    a: &Tube,
    b: &Tube,
    m: &Mapping,
    p: &Params<R>,
    scene_area: u64,
) -> Result<R> {
    let (da, db) = (m.shift(a.id())?, m.shift(b.id())?);
    let shared = match a.span().shifted(da).intersect(&b.span().shifted(db)) {
        Some(s) => s,
        None => return Ok(R::zero()),
    };
    let mut overlap = R::zero();
    let scene = R::of_u64(scene_area);
    for t in shared.frames() {
        let abox = a.box_at(t - da).expect("t - da lies in a's span");
        let bbox = b.box_at(t - db).expect("t - db lies in b's span");
        overlap = overlap + R::of_u64(abox.intersection_area(bbox)) / scene;
    }
    Ok(p.collision_weight * overlap)
}

/// Activity cost of tube segments left out of the synopsis: sum of the
/// excluded boxes' areas normalized by scene area. The scheduler keeps
/// every frame, so its schedules always score zero here.
pub fn activity_cost<R: Real>(
    excluded: &[(TubeId, FrameSpan)],
    db: &TubeDatabase,
) -> Result<R> {
    let scene = R::of_u64(db.scene_area());
    let mut cost = R::zero();
    for (id, span) in excluded {
        let tube = db.get(*id)?;
        for f in span.frames() {
            let b = tube.box_at(f).ok_or(Error::FrameOutOfRange {
                tube: *id,
                frame: f,
                start: tube.start_frame(),
                end: tube.end_frame(),
            })?;
            cost = cost + R::of_u64(b.area()) / scene;
        }
    }
    Ok(cost)
}

/// Total energy of a mapping: activity cost plus the three pairwise terms
/// summed over every unordered tube pair (ascending id order, so the
/// floating-point sum is reproducible).
pub fn total_energy<R: Real>(
    db: &TubeDatabase,
    m: &Mapping,
    p: &Params<R>,
    excluded: &[(TubeId, FrameSpan)],
) -> Result<EnergyBreakdown<R>> {
    m.validate(db)?;
    let tubes: Vec<&Tube> = db.tubes().collect();
    let scene_area = db.scene_area();
    let mut per_pair = Vec::new();
    let (mut e_t, mut e_o, mut e_c) = (R::zero(), R::zero(), R::zero());
    for i in 0..tubes.len() {
        for j in (i + 1)..tubes.len() {
            let (a, b) = (tubes[i], tubes[j]);
            let temporal = temporal_consistency_cost(a, b, m, p)?;
            let chrono = chronological_cost(a, b, m, p)?;
            let collision = collision_cost(a, b, m, p, scene_area)?;
            e_t = e_t + temporal;
            e_o = e_o + chrono;
            e_c = e_c + collision;
            per_pair.push(PairEnergy {
                a: a.id(),
                b: b.id(),
                temporal,
                chrono,
                collision,
            });
        }
    }
    let e_a = activity_cost(excluded, db)?;
    Ok(EnergyBreakdown {
        activity: e_a,
        temporal: e_t,
        chrono: e_o,
        collision: e_c,
        total: e_a + e_t + e_o + e_c,
        per_pair,
    })
}

/// Memo of original-time pairwise quantities: the interaction distance and
/// the start-frame gap. Entries always equal a fresh recomputation; the
/// cache only saves the per-frame scans during grouping and sweeps.
#[derive(Debug, Clone)]
pub struct DistanceCache<R: Real> {
    ds: HashMap<(TubeId, TubeId), R>,
    gaps: HashMap<(TubeId, TubeId), i64>,
}

impl<R: Real> DistanceCache<R> {
    pub fn new() -> Self {
        DistanceCache {
            ds: HashMap::new(),
            gaps: HashMap::new(),
        }
    }

    /// Eagerly fill the cache for every unordered pair in the database.
    pub fn precompute(db: &TubeDatabase, p: &Params<R>) -> Self {
        let mut cache = DistanceCache::new();
        let tubes: Vec<&Tube> = db.tubes().collect();
        for i in 0..tubes.len() {
            for j in (i + 1)..tubes.len() {
                cache.insert_pair(tubes[i], tubes[j], p);
            }
        }
        cache
    }

    fn key(a: TubeId, b: TubeId) -> (TubeId, TubeId) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn insert_pair(&mut self, a: &Tube, b: &Tube, p: &Params<R>) {
        let key = Self::key(a.id(), b.id());
        let d = interaction_distance(a, b, None, p).expect("no mapping involved");
        self.ds.insert(key, d);
        self.gaps
            .insert(key, (a.start_frame() - b.start_frame()).abs());
    }

    /// Original-time interaction distance, memoized.
    pub fn interaction_distance(&mut self, a: &Tube, b: &Tube, p: &Params<R>) -> R {
        let key = Self::key(a.id(), b.id());
        if let Some(d) = self.ds.get(&key) {
            return *d;
        }
        self.insert_pair(a, b, p);
        self.ds[&key]
    }

    /// Absolute start-frame gap, memoized.
    pub fn start_gap(&mut self, a: &Tube, b: &Tube) -> i64 {
        let key = Self::key(a.id(), b.id());
        *self
            .gaps
            .entry(key)
            .or_insert_with(|| (a.start_frame() - b.start_frame()).abs())
    }

    /// Read-only lookup for precomputed caches.
    pub fn get(&self, a: TubeId, b: TubeId) -> Option<(R, i64)> {
        let key = Self::key(a, b);
        match (self.ds.get(&key), self.gaps.get(&key)) {
            (Some(d), Some(g)) => Some((*d, *g)),
            _ => None,
        }
    }
}

impl<R: Real> Default for DistanceCache<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Largest finite pairwise interaction distance in the database, if any
/// pair of tubes shares frames. Useful for picking sweep ranges.
pub fn max_finite_interaction_distance<R: Real>(
    db: &TubeDatabase,
    p: &Params<R>,
) -> Option<R> {
    let tubes: Vec<&Tube> = db.tubes().collect();
    let mut max: Option<R> = None;
    for i in 0..tubes.len() {
        for j in (i + 1)..tubes.len() {
            let d = interaction_distance(tubes[i], tubes[j], None, p).expect("no mapping");
            if d.is_finite() {
                max = Some(match max {
                    Some(m) if m >= d => m,
                    _ => d,
                });
            }
        }
    }
    max
}

/// Largest absolute start-frame gap over all tube pairs.
pub fn max_start_gap(db: &TubeDatabase) -> Option<i64> {
    let starts: Vec<i64> = db.tubes().map(Tube::start_frame).collect();
    if starts.len() < 2 {
        return None;
    }
    let min = *starts.iter().min().unwrap();
    let max = *starts.iter().max().unwrap();
    Some(max - min)
}
