//! Online phase: background modeling, foreground extraction, connected
//! components, and Kalman multi-object tracking from raw grayscale frames
//! to a [`TubeDatabase`].
//!
//! The tracker is deliberately plain — greedy nearest-neighbor
//! association with a gating radius, no re-identification — so broken
//! tracks fragment into several tubes exactly the way the grouping stage
//! expects to repair.

mod background;
mod components;
mod kalman;

pub use background::{BackgroundModel, GrayFrame, Mask};
pub use components::{connected_components, Detection};
pub use kalman::KalmanFilter;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::tube::{BoundingBox, Fps, FrameIndex, Tube, TubeDatabase, TubeId};

/// Tunables of the online phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig<R: Real> {
    /// Background blend rate per frame, in (0, 1].
    pub learning_rate: R,
    /// Foreground threshold in standard deviations.
    pub k_sigma: R,
    /// Lower bound on the per-pixel standard deviation.
    pub std_floor: R,
    /// Prior variance when seeding the model from the first frame.
    pub initial_variance: R,
    /// Smallest accepted component, pixels.
    pub min_area: u64,
    /// Max center distance for matching a detection to a prediction.
    pub gating_radius: R,
    /// Consecutive misses before a track terminates.
    pub max_missed: u32,
    /// Shortest track kept as a tube, frames.
    pub min_length: u32,
    pub process_noise_pos: R,
    pub process_noise_vel: R,
    pub measurement_noise: R,
    pub initial_velocity_variance: R,
    pub fps: Fps,
}

impl<R: Real> Default for TrackerConfig<R> {
    fn default() -> Self {
        TrackerConfig {
            learning_rate: R::of_f64(0.05),
            k_sigma: R::of_f64(3.0),
            std_floor: R::of_f64(2.0),
            initial_variance: R::of_f64(25.0),
            min_area: 20,
            gating_radius: R::of_f64(40.0),
            max_missed: 5,
            min_length: 3,
            process_noise_pos: R::of_f64(1.0),
            process_noise_vel: R::of_f64(0.1),
            measurement_noise: R::of_f64(1.0),
            initial_velocity_variance: R::of_f64(100.0),
            fps: Fps { num: 30, den: 1 },
        }
    }
}

/// One live track: filter state, last matched box size, the boxes emitted
/// so far (misses filled with predictions), and the current miss streak.
struct TrackState<R: Real> {
    id: u64,
    filter: KalmanFilter<R>,
    size: (u32, u32),
    boxes: Vec<BoundingBox>,
    missed: u32,
}

impl<R: Real> TrackState<R> {
    /// Box centered on the filter's position estimate, clamped into the
    /// scene.
    fn predicted_box(&self, frame: FrameIndex, scene_w: u32, scene_h: u32) -> BoundingBox {
        let (cx, cy) = self.filter.position();
        let (w, h) = (self.size.0.min(scene_w), self.size.1.min(scene_h));
        let x = (cx.as_f64() - w as f64 / 2.0).round() as i64;
        let y = (cy.as_f64() - h as f64 / 2.0).round() as i64;
        let x = x.clamp(0, (scene_w - w) as i64) as i32;
        let y = y.clamp(0, (scene_h - h) as i64) as i32;
        BoundingBox::new(frame, x, y, w, h)
    }

    /// Drop trailing predicted fills and keep the track if long enough.
    fn into_tube(mut self, min_length: u32) -> Option<Tube> {
        let keep = self.boxes.len() - self.missed as usize;
        self.boxes.truncate(keep);
        if self.boxes.len() >= min_length as usize {
            Some(Tube::new(TubeId(self.id), self.boxes).expect("track boxes are contiguous"))
        } else {
            None
        }
    }
}

/// Run the online phase over a frame sequence.
///
/// Per frame: segment foreground against the running background model,
/// extract components, predict every live track, greedily match
/// detections to predictions within the gating radius (closest pair
/// first), spawn tracks for leftovers, and coast unmatched tracks on
/// their prediction. The model only learns from background pixels.
pub fn track_frames<R: Real>(
    frames: &[GrayFrame],
    cfg: &TrackerConfig<R>,
) -> Result<TubeDatabase> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames to track".into()));
    }
    let (scene_w, scene_h) = (frames[0].width(), frames[0].height());
    for f in frames {
        if f.width() != scene_w || f.height() != scene_h {
            return Err(Error::DimensionMismatch {
                expected_w: scene_w,
                expected_h: scene_h,
                got_w: f.width(),
                got_h: f.height(),
            });
        }
    }

    let mut model = BackgroundModel::from_frame(&frames[0], cfg.initial_variance);
    let mut live: Vec<TrackState<R>> = Vec::new();
    let mut finished: Vec<Tube> = Vec::new();
    let mut next_id = 0u64;

    for (fi, frame) in frames.iter().enumerate() {
        let frame_index = fi as FrameIndex;
        let mask = model.foreground_mask(frame, cfg.k_sigma, cfg.std_floor)?;
        let detections = connected_components(&mask, cfg.min_area);

        for track in &mut live {
            track.filter.predict();
        }

        // All (track, detection) pairs within the gate, closest first.
        let mut candidates: Vec<(R, usize, usize)> = Vec::new();
        for (ti, track) in live.iter().enumerate() {
            let (px, py) = track.filter.position();
            for (di, det) in detections.iter().enumerate() {
                let (dx, dy) = det.center();
                let dist = ((px.as_f64() - dx).powi(2) + (py.as_f64() - dy).powi(2)).sqrt();
                let dist = R::of_f64(dist);
                if dist <= cfg.gating_radius {
                    candidates.push((dist, ti, di));
                }
            }
        }
        candidates.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("distances are finite")
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        let mut track_matched = vec![false; live.len()];
        let mut det_matched = vec![false; detections.len()];
        for (_, ti, di) in candidates {
            if track_matched[ti] || det_matched[di] {
                continue;
            }
            track_matched[ti] = true;
            det_matched[di] = true;
            let det = &detections[di];
            let (cx, cy) = det.center();
            let track = &mut live[ti];
            track.filter.update(R::of_f64(cx), R::of_f64(cy));
            track.size = (det.w, det.h);
            track
                .boxes
                .push(BoundingBox::new(frame_index, det.x, det.y, det.w, det.h));
            track.missed = 0;
        }

        // Coast unmatched tracks on the prediction; retire long misses.
        let mut still_live = Vec::with_capacity(live.len());
        for (ti, mut track) in live.into_iter().enumerate() {
            if track_matched[ti] {
                still_live.push(track);
                continue;
            }
            track.missed += 1;
            track
                .boxes
                .push(track.predicted_box(frame_index, scene_w, scene_h));
            if track.missed >= cfg.max_missed {
                if let Some(tube) = track.into_tube(cfg.min_length) {
                    finished.push(tube);
                }
            } else {
                still_live.push(track);
            }
        }
        live = still_live;

        for (di, det) in detections.iter().enumerate() {
            if det_matched[di] {
                continue;
            }
            let (cx, cy) = det.center();
            live.push(TrackState {
                id: next_id,
                filter: KalmanFilter::new(
                    R::of_f64(cx),
                    R::of_f64(cy),
                    cfg.process_noise_pos,
                    cfg.process_noise_vel,
                    cfg.measurement_noise,
                    cfg.initial_velocity_variance,
                ),
                size: (det.w, det.h),
                boxes: vec![BoundingBox::new(frame_index, det.x, det.y, det.w, det.h)],
                missed: 0,
            });
            next_id += 1;
        }

        model.update_masked(frame, cfg.learning_rate, &mask)?;
    }

    for track in live {
        if let Some(tube) = track.into_tube(cfg.min_length) {
            finished.push(tube);
        }
    }

    let mut db = TubeDatabase::new(scene_w, scene_h, cfg.fps)?;
    finished.sort_by_key(Tube::id);
    for tube in finished {
        db.insert(tube)?;
    }
    Ok(db)
}
