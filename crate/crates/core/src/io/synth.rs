//! Synthetic scene generation: seeded scenes of linearly moving objects,
//! with optional track fragmentation that splits one object's trajectory
//! into several tubes the way a failing tracker would.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tracker::GrayFrame;
use crate::tube::{BoundingBox, Fps, FrameIndex, Tube, TubeDatabase, TubeId};

/// One scripted object: enters at a frame and point, moves linearly, and
/// lives until it would leave the scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub entry_frame: FrameIndex,
    pub entry: (f64, f64),
    /// Pixels per frame.
    pub velocity: (f64, f64),
    pub size: (u32, u32),
    /// Fill intensity when rendering frames; defaults spread objects apart.
    #[serde(default)]
    pub intensity: Option<u8>,
}

/// A whole scripted scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub fps: Fps,
    pub duration: FrameIndex,
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Probability that a track splits, per 100 frames. Fragments are
    /// separated by a one-frame gap.
    #[serde(default)]
    pub fragmentation_rate: f64,
    /// Background intensity for rendered frames.
    #[serde(default = "default_background_level")]
    pub background_level: u8,
}

fn default_background_level() -> u8 {
    30
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidScene(format!(
                "scene must be non-degenerate, got {}x{}",
                self.width, self.height
            )));
        }
        if self.duration < 1 {
            return Err(Error::InvalidScene(format!(
                "duration must be >= 1, got {}",
                self.duration
            )));
        }
        if !(0.0..=100.0).contains(&self.fragmentation_rate) {
            return Err(Error::InvalidScene(format!(
                "fragmentation_rate must lie in [0, 100], got {}",
                self.fragmentation_rate
            )));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.size.0 == 0 || o.size.1 == 0 {
                return Err(Error::InvalidScene(format!(
                    "object {i} has degenerate size {}x{}",
                    o.size.0, o.size.1
                )));
            }
            if o.entry_frame < 0 {
                return Err(Error::InvalidScene(format!(
                    "object {i} enters at negative frame {}",
                    o.entry_frame
                )));
            }
        }
        Ok(())
    }

    /// Box of object `k` at frame `f` if it is fully inside the scene.
    fn box_at(&self, k: usize, f: FrameIndex) -> Option<BoundingBox> {
        let o = &self.objects[k];
        if f < o.entry_frame || f >= self.duration {
            return None;
        }
        let dt = (f - o.entry_frame) as f64;
        let x = (o.entry.0 + o.velocity.0 * dt).round() as i64;
        let y = (o.entry.1 + o.velocity.1 * dt).round() as i64;
        let inside = x >= 0
            && y >= 0
            && x + o.size.0 as i64 <= self.width as i64
            && y + o.size.1 as i64 <= self.height as i64;
        if inside {
            Some(BoundingBox::new(f, x as i32, y as i32, o.size.0, o.size.1))
        } else {
            None
        }
    }

    /// Contiguous in-scene lifetime of object `k`, clipped at first exit.
    fn lifetime(&self, k: usize) -> Option<(FrameIndex, FrameIndex)> {
        let o = &self.objects[k];
        let mut f = o.entry_frame;
        // Find the first fully-visible frame.
        let start = loop {
            if f >= self.duration {
                return None;
            }
            if self.box_at(k, f).is_some() {
                break f;
            }
            f += 1;
        };
        let mut end = start;
        while self.box_at(k, end + 1).is_some() {
            end += 1;
        }
        Some((start, end))
    }

    fn object_intensity(&self, k: usize) -> u8 {
        self.objects[k]
            .intensity
            .unwrap_or(150 + ((k * 37) % 100) as u8)
    }
}

/// A generated scene: the tube database plus which object each tube came
/// from, so fragmentation effects stay traceable.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub db: TubeDatabase,
    /// (tube id, index of the source object in the spec).
    pub tube_objects: Vec<(TubeId, usize)>,
}

impl SynthScene {
    pub fn object_of(&self, id: TubeId) -> Option<usize> {
        self.tube_objects
            .iter()
            .find(|(t, _)| *t == id)
            .map(|(_, o)| *o)
    }
}

/// Build the tube database for a scene. Deterministic under the spec's
/// seed. With fragmentation rate 0 every object yields exactly one tube;
/// otherwise tracks split into contiguous fragments with one-frame gaps.
pub fn synth_scene(spec: &SceneSpec) -> Result<SynthScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let split_p = spec.fragmentation_rate / 100.0;
    let mut db = TubeDatabase::new(spec.width, spec.height, spec.fps)?;
    let mut tube_objects = Vec::new();
    let mut next_id = 0u64;

    for k in 0..spec.objects.len() {
        let (start, end) = match spec.lifetime(k) {
            Some(l) => l,
            None => continue, // never fully visible
        };
        let mut boxes: Vec<BoundingBox> = Vec::new();
        let mut f = start;
        while f <= end {
            // A split ends the current fragment and skips one frame.
            if !boxes.is_empty() && split_p > 0.0 && rng.gen_bool(split_p) {
                let tube = Tube::new(TubeId(next_id), std::mem::take(&mut boxes))?;
                db.insert(tube)?;
                tube_objects.push((TubeId(next_id), k));
                next_id += 1;
                f += 1; // dropped frame between fragments
                continue;
            }
            boxes.push(spec.box_at(k, f).expect("frame within clipped lifetime"));
            f += 1;
        }
        if !boxes.is_empty() {
            let tube = Tube::new(TubeId(next_id), boxes)?;
            db.insert(tube)?;
            tube_objects.push((TubeId(next_id), k));
            next_id += 1;
        }
    }
    Ok(SynthScene { db, tube_objects })
}

/// Render the scene as grayscale frames: flat background with each object
/// drawn as a filled square at its scripted position (partially visible
/// objects are clipped). Independent of fragmentation, which only affects
/// the tube database.
pub fn render_scene_frames(spec: &SceneSpec) -> Result<Vec<GrayFrame>> {
    spec.validate()?;
    let mut frames = Vec::with_capacity(spec.duration as usize);
    for f in 0..spec.duration {
        let mut frame = GrayFrame::filled(spec.width, spec.height, spec.background_level);
        for (k, o) in spec.objects.iter().enumerate() {
            if f < o.entry_frame {
                continue;
            }
            let dt = (f - o.entry_frame) as f64;
            let x = (o.entry.0 + o.velocity.0 * dt).round() as i64;
            let y = (o.entry.1 + o.velocity.1 * dt).round() as i64;
            frame.fill_rect(x, y, o.size.0, o.size.1, spec.object_intensity(k));
        }
        frames.push(frame);
    }
    Ok(frames)
}
