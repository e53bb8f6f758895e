//! Domain types: tracked-object tubes, the tube database, groups, temporal
//! mappings, scheduling parameters, and energy breakdowns.
//!
//! A *tube* is one tracked object's per-frame bounding boxes over a
//! contiguous frame range. A *mapping* assigns each tube an integer frame
//! shift; the shifted tubes form the synopsis. All types are immutable once
//! constructed and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Frame index. Signed so that shift arithmetic never wraps; database
/// frames are always `>= 0`.
pub type FrameIndex = i64;

/// Unique tube identifier.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TubeId(pub u64);

impl std::fmt::Display for TubeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for TubeId {
    fn from(v: u64) -> Self {
        TubeId(v)
    }
}

/// Closed frame interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameSpan {
    pub start: FrameIndex,
    pub end: FrameIndex,
}

impl FrameSpan {
    pub fn new(start: FrameIndex, end: FrameIndex) -> Self {
        debug_assert!(end >= start);
        FrameSpan { start, end }
    }

    pub fn len(&self) -> i64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // constructed non-empty; kept for readability at call sites
    }

    pub fn contains(&self, f: FrameIndex) -> bool {
        self.start <= f && f <= self.end
    }

    pub fn shifted(&self, delta: i64) -> FrameSpan {
        FrameSpan::new(self.start + delta, self.end + delta)
    }

    /// `[max(starts), min(ends)]` when the spans meet, `None` otherwise.
    pub fn intersect(&self, other: &FrameSpan) -> Option<FrameSpan> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        if start <= end {
            Some(FrameSpan::new(start, end))
        } else {
            None
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = FrameIndex> {
        self.start..=self.end
    }
}

/// Frame rate as an exact positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fps {
    pub num: u32,
    pub den: u32,
}

impl Fps {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParams(format!(
                "fps must be a positive rational, got {num}/{den}"
            )));
        }
        Ok(Fps { num, den })
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Fps {
    fn default() -> Self {
        Fps { num: 30, den: 1 }
    }
}

/// One object's axis-aligned extent at a single frame. `(x, y)` is the
/// top-left corner; `w, h >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub frame: FrameIndex,
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(frame: FrameIndex, x: i32, y: i32, w: u32, h: u32) -> Self {
        BoundingBox { frame, x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Box center in pixels.
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    /// Intersection area with another box in pixels². Two boxes that only
    /// touch edge-to-edge intersect with area 0.
    pub fn intersection_area(&self, other: &BoundingBox) -> u64 {
        let x0 = self.x.max(other.x) as i64;
        let x1 = (self.x as i64 + self.w as i64).min(other.x as i64 + other.w as i64);
        let y0 = self.y.max(other.y) as i64;
        let y1 = (self.y as i64 + self.h as i64).min(other.y as i64 + other.h as i64);
        if x1 > x0 && y1 > y0 {
            (x1 - x0) as u64 * (y1 - y0) as u64
        } else {
            0
        }
    }
}

/// One tracked object: a contiguous run of per-frame bounding boxes.
///
/// Invariant: `boxes` covers exactly the frames `start..=end`, ascending,
/// no gaps, no duplicates, every box at least 1x1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tube {
    id: TubeId,
    boxes: Vec<BoundingBox>,
}

impl Tube {
    pub fn new(id: TubeId, boxes: Vec<BoundingBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidTube {
                tube: id,
                index: 0,
                reason: "tube has no boxes".into(),
            });
        }
        let start = boxes[0].frame;
        for (i, b) in boxes.iter().enumerate() {
            if b.frame != start + i as i64 {
                return Err(Error::InvalidTube {
                    tube: id,
                    index: i,
                    reason: format!(
                        "frames must be contiguous: expected {}, got {}",
                        start + i as i64,
                        b.frame
                    ),
                });
            }
            if b.frame < 0 {
                return Err(Error::InvalidTube {
                    tube: id,
                    index: i,
                    reason: format!("negative frame {}", b.frame),
                });
            }
            if b.w < 1 || b.h < 1 {
                return Err(Error::InvalidTube {
                    tube: id,
                    index: i,
                    reason: format!("degenerate box {}x{}", b.w, b.h),
                });
            }
        }
        Ok(Tube { id, boxes })
    }

    pub fn id(&self) -> TubeId {
        self.id
    }

    pub fn start_frame(&self) -> FrameIndex {
        self.boxes[0].frame
    }

    pub fn end_frame(&self) -> FrameIndex {
        self.boxes[self.boxes.len() - 1].frame
    }

    pub fn span(&self) -> FrameSpan {
        FrameSpan::new(self.start_frame(), self.end_frame())
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a tube always has at least one box
    }

    pub fn boxes(&self) -> &[BoundingBox] {
        &self.boxes
    }

    pub fn box_at(&self, f: FrameIndex) -> Option<&BoundingBox> {
        if self.span().contains(f) {
            Some(&self.boxes[(f - self.start_frame()) as usize])
        } else {
            None
        }
    }

    /// Box center at frame `f`.
    pub fn center(&self, f: FrameIndex) -> Result<(f64, f64)> {
        self.box_at(f)
            .map(BoundingBox::center)
            .ok_or(Error::FrameOutOfRange {
                tube: self.id,
                frame: f,
                start: self.start_frame(),
                end: self.end_frame(),
            })
    }

    /// Time-averaged box area in pixels².
    pub fn mean_area(&self) -> f64 {
        let total: u64 = self.boxes.iter().map(BoundingBox::area).sum();
        total as f64 / self.boxes.len() as f64
    }
}

/// Temporal intersection of two tubes, on shifted spans when a mapping is
/// given. Returns `None` when the (possibly shifted) spans are disjoint.
pub fn span_intersection(a: &Tube, b: &Tube, m: Option<&Mapping>) -> Result<Option<FrameSpan>> {
    let (sa, sb) = match m {
        Some(m) => (
            a.span().shifted(m.shift(a.id())?),
            b.span().shifted(m.shift(b.id())?),
        ),
        None => (a.span(), b.span()),
    };
    Ok(sa.intersect(&sb))
}

/// The original video: a set of tubes plus scene metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeDatabase {
    tubes: BTreeMap<TubeId, Tube>,
    scene_width: u32,
    scene_height: u32,
    fps: Fps,
    background: Option<String>,
}

impl TubeDatabase {
    pub fn new(scene_width: u32, scene_height: u32, fps: Fps) -> Result<Self> {
        if scene_width == 0 || scene_height == 0 {
            return Err(Error::InvalidParams(format!(
                "scene must be non-degenerate, got {scene_width}x{scene_height}"
            )));
        }
        Ok(TubeDatabase {
            tubes: BTreeMap::new(),
            scene_width,
            scene_height,
            fps,
            background: None,
        })
    }

    /// Insert a tube, rejecting duplicate ids and out-of-scene boxes.
    pub fn insert(&mut self, tube: Tube) -> Result<()> {
        if self.tubes.contains_key(&tube.id()) {
            return Err(Error::DuplicateTube(tube.id()));
        }
        for (i, b) in tube.boxes().iter().enumerate() {
            let in_bounds = b.x >= 0
                && b.y >= 0
                && b.x as i64 + b.w as i64 <= self.scene_width as i64
                && b.y as i64 + b.h as i64 <= self.scene_height as i64;
            if !in_bounds {
                return Err(Error::InvalidTube {
                    tube: tube.id(),
                    index: i,
                    reason: format!(
                        "box ({}, {}) {}x{} outside {}x{} scene",
                        b.x, b.y, b.w, b.h, self.scene_width, self.scene_height
                    ),
                });
            }
        }
        self.tubes.insert(tube.id(), tube);
        Ok(())
    }

    pub fn get(&self, id: TubeId) -> Result<&Tube> {
        self.tubes.get(&id).ok_or(Error::UnknownTube(id))
    }

    /// Tubes in ascending id order.
    pub fn tubes(&self) -> impl Iterator<Item = &Tube> {
        self.tubes.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = TubeId> + '_ {
        self.tubes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    pub fn scene_width(&self) -> u32 {
        self.scene_width
    }

    pub fn scene_height(&self) -> u32 {
        self.scene_height
    }

    pub fn scene_area(&self) -> u64 {
        self.scene_width as u64 * self.scene_height as u64
    }

    pub fn fps(&self) -> Fps {
        self.fps
    }

    pub fn background(&self) -> Option<&str> {
        self.background.as_deref()
    }

    pub fn set_background(&mut self, path: Option<String>) {
        self.background = path;
    }

    /// Overall frame span covered by any tube.
    pub fn span(&self) -> Option<FrameSpan> {
        let start = self.tubes.values().map(Tube::start_frame).min()?;
        let end = self.tubes.values().map(Tube::end_frame).max()?;
        Some(FrameSpan::new(start, end))
    }

    /// Length of the original video in frames (span of all activity).
    pub fn original_length(&self) -> i64 {
        self.span().map(|s| s.len()).unwrap_or(0)
    }
}

/// A set of tubes whose relative timing and geometry are frozen: the
/// scheduler shifts a group rigidly as one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    members: BTreeSet<TubeId>,
}

impl Group {
    pub fn new(members: BTreeSet<TubeId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidGrouping("group must be non-empty".into()));
        }
        Ok(Group { members })
    }

    pub fn singleton(id: TubeId) -> Self {
        Group {
            members: std::iter::once(id).collect(),
        }
    }

    pub fn members(&self) -> impl Iterator<Item = TubeId> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, id: TubeId) -> bool {
        self.members.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn min_id(&self) -> TubeId {
        *self.members.iter().next().expect("group is non-empty")
    }
}

/// Per-tube integer frame shift defining the synopsis: a tube starting at
/// frame `s` plays at synopsis frame `s + shift`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Mapping {
    shifts: BTreeMap<TubeId, i64>,
}

impl Mapping {
    pub fn new() -> Self {
        Mapping::default()
    }

    /// All shifts zero: the synopsis is the original video.
    pub fn identity(db: &TubeDatabase) -> Self {
        Mapping {
            shifts: db.ids().map(|id| (id, 0)).collect(),
        }
    }

    pub fn set(&mut self, id: TubeId, shift: i64) {
        self.shifts.insert(id, shift);
    }

    pub fn shift(&self, id: TubeId) -> Result<i64> {
        self.shifts
            .get(&id)
            .copied()
            .ok_or_else(|| Error::InvalidMapping(format!("no shift for tube {id}")))
    }

    pub fn shifted_span(&self, tube: &Tube) -> Result<FrameSpan> {
        Ok(tube.span().shifted(self.shift(tube.id())?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (TubeId, i64)> + '_ {
        self.shifts.iter().map(|(id, s)| (*id, *s))
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// Checks that every database tube has exactly one shift, no stray
    /// entries exist, and every shifted start is `>= 0`.
    pub fn validate(&self, db: &TubeDatabase) -> Result<()> {
        for id in self.shifts.keys() {
            if db.get(*id).is_err() {
                return Err(Error::InvalidMapping(format!(
                    "shift for unknown tube {id}"
                )));
            }
        }
        for tube in db.tubes() {
            let shift = self.shift(tube.id())?;
            let start = tube.start_frame() + shift;
            if start < 0 {
                return Err(Error::InvalidMapping(format!(
                    "tube {} shifted to negative start {start}",
                    tube.id()
                )));
            }
        }
        Ok(())
    }

    /// True when all members of each group carry one common shift.
    pub fn is_rigid_for(&self, groups: &[Group]) -> bool {
        groups.iter().all(|g| {
            let mut members = g.members();
            let first = members.next().and_then(|id| self.shift(id).ok());
            match first {
                Some(s0) => members.all(|id| self.shift(id).ok() == Some(s0)),
                None => false,
            }
        })
    }
}

/// How tubes pair up into groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingMode {
    /// Single-pass pairing: a fresh group absorbs at most one partner.
    Literal,
    /// Connected components of the groupable relation (default).
    Transitive,
}

impl std::fmt::Display for GroupingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupingMode::Literal => write!(f, "literal"),
            GroupingMode::Transitive => write!(f, "transitive"),
        }
    }
}

/// Normalization used for the object-size term in the interaction distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Mean time-averaged box area, pixels².
    Area,
    /// Square root of that mean: a characteristic length in pixels (default).
    SqrtArea,
}

impl std::fmt::Display for SigmaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SigmaMode::Area => write!(f, "area"),
            SigmaMode::SqrtArea => write!(f, "sqrt_area"),
        }
    }
}

/// Thresholds and weights steering grouping, packing, and energy scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<R: Real> {
    /// Spatio-temporal grouping threshold: pairs with interaction distance
    /// below it group together.
    pub alpha: R,
    /// Chronological grouping threshold in frames: pairs whose start times
    /// differ by less than it group together.
    pub beta: R,
    /// Constant cost charged when a pair's start offset changes between
    /// original and synopsis.
    pub chrono_constant: R,
    /// Weight on the collision term of the energy.
    pub collision_weight: R,
    /// Max allowed pairwise per-frame box intersection (pixels²) when
    /// packing groups.
    pub collision_budget: R,
    pub grouping_mode: GroupingMode,
    pub sigma_mode: SigmaMode,
}

impl<R: Real> Default for Params<R> {
    fn default() -> Self {
        Params {
            alpha: R::zero(),
            beta: R::zero(),
            chrono_constant: R::one(),
            collision_weight: R::one(),
            collision_budget: R::zero(),
            grouping_mode: GroupingMode::Transitive,
            sigma_mode: SigmaMode::SqrtArea,
        }
    }
}

impl<R: Real> Params<R> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("collision_weight", self.collision_weight),
            ("collision_budget", self.collision_budget),
        ] {
            if v < R::zero() || v.is_nan() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Per-pair cost terms of a mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEnergy<R: Real> {
    pub a: TubeId,
    pub b: TubeId,
    pub temporal: R,
    pub chrono: R,
    pub collision: R,
}

/// Full cost decomposition of a mapping: activity lost, interaction
/// distortion, chronological-order violation, and object collisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown<R: Real> {
    pub activity: R,
    pub temporal: R,
    pub chrono: R,
    pub collision: R,
    pub total: R,
    pub per_pair: Vec<PairEnergy<R>>,
}

impl<R: Real> EnergyBreakdown<R> {
    pub fn zero() -> Self {
        EnergyBreakdown {
            activity: R::zero(),
            temporal: R::zero(),
            chrono: R::zero(),
            collision: R::zero(),
            total: R::zero(),
            per_pair: Vec::new(),
        }
    }
}
