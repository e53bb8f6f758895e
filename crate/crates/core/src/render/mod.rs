//! Rendering a schedule to image sequences: annotated boxes for
//! inspection, or object patches stitched into a background with
//! gradient-domain blending.

mod poisson;

pub use poisson::{poisson_blend, solve_channel, BlendResult, ChannelSolve, SolverOptions};

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::scheduler::SynopsisSchedule;
use crate::tracker::GrayFrame;
use crate::tube::{FrameIndex, Tube, TubeDatabase, TubeId};

/// 8-bit RGB image, interleaved row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != 3 * (width as usize) * (height as usize) {
            return Err(Error::InvalidParams(format!(
                "rgb data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(3 * width as usize * height as usize);
        for _ in 0..(width as usize * height as usize) {
            data.extend_from_slice(&color);
        }
        RgbImage {
            width,
            height,
            data,
        }
    }

    pub fn from_gray(gray: &GrayFrame) -> Self {
        let mut data = Vec::with_capacity(3 * gray.data().len());
        for &v in gray.data() {
            data.extend_from_slice(&[v, v, v]);
        }
        RgbImage {
            width: gray.width(),
            height: gray.height(),
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * ((y as usize) * (self.width as usize) + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * ((y as usize) * (self.width as usize) + x as usize);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Set with bounds clipping; silently ignores out-of-frame pixels.
    pub fn set_clipped(&mut self, x: i64, y: i64, rgb: [u8; 3]) {
        if x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64 {
            self.set(x as u32, y as u32, rgb);
        }
    }

    pub fn crop(&self, x: i32, y: i32, w: u32, h: u32) -> Result<RgbImage> {
        if x < 0
            || y < 0
            || x as i64 + w as i64 > self.width as i64
            || y as i64 + h as i64 > self.height as i64
        {
            return Err(Error::OutOfBounds(format!(
                "crop ({x}, {y}) {w}x{h} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(3 * w as usize * h as usize);
        for yy in 0..h {
            for xx in 0..w {
                data.extend_from_slice(&self.get(x as u32 + xx, y as u32 + yy));
            }
        }
        RgbImage::new(w, h, data)
    }
}

/// A source region, its mask, and where it lands in the target image.
/// The mask keeps a one-pixel margin inside the patch so the Poisson
/// boundary always exists.
#[derive(Debug, Clone)]
pub struct Patch {
    pub image: RgbImage,
    pub mask: Vec<bool>,
    pub x: i32,
    pub y: i32,
}

impl Patch {
    pub fn new(image: RgbImage, mask: Vec<bool>, x: i32, y: i32) -> Result<Self> {
        let (w, h) = (image.width() as usize, image.height() as usize);
        if mask.len() != w * h {
            return Err(Error::InvalidParams(format!(
                "mask length {} does not match {}x{} patch",
                mask.len(),
                w,
                h
            )));
        }
        for yy in 0..h {
            for xx in 0..w {
                let border = xx == 0 || yy == 0 || xx == w - 1 || yy == h - 1;
                if border && mask[yy * w + xx] {
                    return Err(Error::InvalidParams(
                        "mask must keep a one-pixel margin inside the patch".into(),
                    ));
                }
            }
        }
        Ok(Patch { image, mask, x, y })
    }

    /// Mask covering the whole patch except the one-pixel margin.
    pub fn with_box_mask(image: RgbImage, x: i32, y: i32) -> Result<Self> {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let mut mask = vec![false; w * h];
        if w > 2 && h > 2 {
            for yy in 1..h - 1 {
                for xx in 1..w - 1 {
                    mask[yy * w + xx] = true;
                }
            }
        }
        Patch::new(image, mask, x, y)
    }
}

/// Deterministic display color: hue picked per group on the golden-angle
/// wheel, brightness varied slightly per tube so groupmates share hue but
/// stay tellable apart.
pub fn tube_color(group_index: usize, tube_id: TubeId) -> [u8; 3] {
    let hue = group_hue(group_index);
    let value = 0.72 + 0.28 * (((tube_id.0 as f64) * 0.381_966) % 1.0);
    hsv_to_rgb(hue, 0.85, value)
}

/// Hue in degrees assigned to a group.
pub fn group_hue(group_index: usize) -> f64 {
    (group_index as f64 * 137.507_764) % 360.0
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}

fn draw_rect_outline(img: &mut RgbImage, x: i64, y: i64, w: u32, h: u32, color: [u8; 3]) {
    for xx in x..x + w as i64 {
        img.set_clipped(xx, y, color);
        img.set_clipped(xx, y + h as i64 - 1, color);
    }
    for yy in y..y + h as i64 {
        img.set_clipped(x, yy, color);
        img.set_clipped(x + w as i64 - 1, yy, color);
    }
}

// 3x5 digit glyphs, one bit per pixel, row-major from the top.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111], // 0
    [0b010, 0b110, 0b010, 0b010, 0b111], // 1
    [0b111, 0b001, 0b111, 0b100, 0b111], // 2
    [0b111, 0b001, 0b111, 0b001, 0b111], // 3
    [0b101, 0b101, 0b111, 0b001, 0b001], // 4
    [0b111, 0b100, 0b111, 0b001, 0b111], // 5
    [0b111, 0b100, 0b111, 0b101, 0b111], // 6
    [0b111, 0b001, 0b010, 0b010, 0b010], // 7
    [0b111, 0b101, 0b111, 0b101, 0b111], // 8
    [0b111, 0b101, 0b111, 0b001, 0b111], // 9
];

/// Small label box with the given number in white on a dark strip.
fn draw_label(img: &mut RgbImage, x: i64, y: i64, number: i64) {
    let text = number.to_string();
    let width = 4 * text.len() as i64 + 1;
    for yy in y..y + 7 {
        for xx in x..x + width {
            img.set_clipped(xx, yy, [20, 20, 20]);
        }
    }
    for (i, ch) in text.chars().enumerate() {
        let glyph = match ch.to_digit(10) {
            Some(d) => DIGITS[d as usize],
            None => continue, // '-' never occurs for frame numbers
        };
        let gx = x + 1 + 4 * i as i64;
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..3 {
                if bits & (0b100 >> col) != 0 {
                    img.set_clipped(gx + col as i64, y + 1 + row as i64, [255, 255, 255]);
                }
            }
        }
    }
}

fn active_tubes<'a, R: Real>(
    db: &'a TubeDatabase,
    schedule: &SynopsisSchedule<R>,
    t: FrameIndex,
) -> Result<Vec<(&'a Tube, i64)>> {
    let mut out = Vec::new();
    for tube in db.tubes() {
        let shift = schedule.mapping.shift(tube.id())?;
        if tube.span().shifted(shift).contains(t) {
            out.push((tube, shift));
        }
    }
    Ok(out)
}

/// One annotated frame per synopsis instant: every active tube drawn as a
/// colored rectangle (hue per group) labeled with its original start
/// frame.
pub fn render_boxes<R: Real>(
    db: &TubeDatabase,
    schedule: &SynopsisSchedule<R>,
    background: &RgbImage,
) -> Result<Vec<RgbImage>> {
    schedule.mapping.validate(db)?;
    let mut frames = Vec::with_capacity(schedule.length.max(0) as usize);
    for t in 0..schedule.length {
        let mut canvas = background.clone();
        for (tube, shift) in active_tubes(db, schedule, t)? {
            let b = tube.box_at(t - shift).expect("t - shift lies in span");
            let group = schedule.groups.group_of(tube.id()).unwrap_or(0);
            let color = tube_color(group, tube.id());
            draw_rect_outline(&mut canvas, b.x as i64, b.y as i64, b.w, b.h, color);
            draw_label(&mut canvas, b.x as i64, b.y as i64 - 8, tube.start_frame());
        }
        frames.push(canvas);
    }
    Ok(frames)
}

/// Lazily loaded original frames backing the stitched render.
struct SourceFrames {
    files: Vec<PathBuf>,
    cache: HashMap<usize, RgbImage>,
}

impl SourceFrames {
    fn scan(dir: &Path) -> Result<Self> {
        let entries =
            std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|s| s.to_str()),
                    Some("pgm") | Some("ppm")
                )
            })
            .collect();
        files.sort();
        Ok(SourceFrames {
            files,
            cache: HashMap::new(),
        })
    }

    fn get(&mut self, index: FrameIndex) -> Result<&RgbImage> {
        if index < 0 || index as usize >= self.files.len() {
            return Err(Error::MissingSourceFrame(format!(
                "index {index} (have {} source frames)",
                self.files.len()
            )));
        }
        let idx = index as usize;
        if !self.cache.contains_key(&idx) {
            let img = crate::io::netpbm::read_rgb_any(&self.files[idx])?;
            self.cache.insert(idx, img);
        }
        Ok(&self.cache[&idx])
    }
}

/// One stitched frame per synopsis instant: every active tube's box
/// region is cropped from its original source frame and Poisson-blended
/// into the background at its original spatial position (the synopsis
/// shifts time only). Tubes blend in ascending id order.
pub fn render_stitched<R: Real>(
    db: &TubeDatabase,
    schedule: &SynopsisSchedule<R>,
    background: &RgbImage,
    frames_dir: &Path,
    solver: &SolverOptions<R>,
) -> Result<Vec<RgbImage>> {
    schedule.mapping.validate(db)?;
    let mut sources = SourceFrames::scan(frames_dir)?;
    let mut frames = Vec::with_capacity(schedule.length.max(0) as usize);
    for t in 0..schedule.length {
        let mut canvas = background.clone();
        for (tube, shift) in active_tubes(db, schedule, t)? {
            let b = *tube.box_at(t - shift).expect("t - shift lies in span");
            let source = sources.get(t - shift)?;
            let region = source.crop(b.x, b.y, b.w, b.h)?;
            let patch = Patch::with_box_mask(region, b.x, b.y)?;
            canvas = poisson_blend(&canvas, &patch, solver)?.image;
        }
        frames.push(canvas);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::GroupingResult;
    use crate::scheduler::minimize_length;
    use crate::tube::{BoundingBox, Fps, Params, Tube, TubeDatabase};

    fn const_tube(id: u64, start: i64, end: i64, x: i32, y: i32, w: u32, h: u32) -> Tube {
        let boxes = (start..=end)
            .map(|f| BoundingBox::new(f, x, y, w, h))
            .collect();
        Tube::new(TubeId(id), boxes).unwrap()
    }

    fn solver() -> SolverOptions<f64> {
        SolverOptions {
            max_iters: 10_000,
            tolerance: 1e-5,
        }
    }

    #[test]
    fn constant_patch_into_constant_background() {
        let bg = RgbImage::filled(20, 20, [90, 90, 90]);
        let patch_img = RgbImage::filled(8, 8, [200, 10, 10]);
        let patch = Patch::with_box_mask(patch_img, 5, 5).unwrap();
        let result = poisson_blend(&bg, &patch, &solver()).unwrap();
        assert!(result.converged);
        // Zero guidance with a constant boundary stays at the boundary
        // constant everywhere inside the mask.
        for y in 0..20 {
            for x in 0..20 {
                assert_eq!(result.image.get(x, y), [90, 90, 90]);
            }
        }
    }

    #[test]
    fn blending_background_into_itself_is_identity() {
        let mut bg = RgbImage::filled(24, 24, [0, 0, 0]);
        for y in 0..24 {
            for x in 0..24 {
                bg.set(x, y, [(x * 10) as u8, (y * 10) as u8, ((x + y) * 5) as u8]);
            }
        }
        let region = bg.crop(6, 8, 10, 9).unwrap();
        let patch = Patch::with_box_mask(region, 6, 8).unwrap();
        let result = poisson_blend(&bg, &patch, &solver()).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert_eq!(result.max_residual, 0.0);
        assert_eq!(result.image, bg);
    }

    #[test]
    fn out_of_mask_pixels_untouched() {
        let bg = RgbImage::filled(30, 30, [13, 57, 101]);
        let mut patch_img = RgbImage::filled(10, 10, [240, 240, 240]);
        patch_img.set(4, 4, [0, 255, 0]);
        let patch = Patch::with_box_mask(patch_img, 10, 10).unwrap();
        let result = poisson_blend(&bg, &patch, &solver()).unwrap();
        for y in 0..30u32 {
            for x in 0..30u32 {
                let inside = (11..19).contains(&x) && (11..19).contains(&y);
                if !inside {
                    assert_eq!(result.image.get(x, y), [13, 57, 101], "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn placement_out_of_bounds_is_an_error() {
        let bg = RgbImage::filled(16, 16, [0, 0, 0]);
        let patch = Patch::with_box_mask(RgbImage::filled(8, 8, [1, 1, 1]), 12, 2).unwrap();
        assert!(poisson_blend(&bg, &patch, &solver()).is_err());
    }

    #[test]
    fn reported_residual_matches_recomputation() {
        // Starve the solver so it stops unconverged, then recompute the
        // residual from the returned image.
        let mut bg = RgbImage::filled(20, 20, [0, 0, 0]);
        for y in 0..20u32 {
            for x in 0..20u32 {
                let v = |a: u32, b: u32, c: u32| ((a * x * x + b * y * y + c * x * y) % 251) as u8;
                bg.set(x, y, [v(3, 2, 1), v(5, 7, 2), v(1, 9, 4)]);
            }
        }
        let mut patch_img = RgbImage::filled(12, 12, [0, 0, 0]);
        for y in 0..12u32 {
            for x in 0..12u32 {
                let v = |a: u32, b: u32| ((a * x * x + b * y * y + x * 19 + y * 3) % 241) as u8;
                patch_img.set(x, y, [v(7, 2), v(2, 11), v(4, 4)]);
            }
        }
        let patch = Patch::with_box_mask(patch_img.clone(), 3, 3).unwrap();
        let opts = SolverOptions {
            max_iters: 2,
            tolerance: 1e-9,
        };
        let result = poisson_blend(&bg, &patch, &opts).unwrap();
        assert!(!result.converged);

        let mut worst: f64 = 0.0;
        for c in 0..3 {
            for y in 1..11i64 {
                for x in 1..11i64 {
                    let f = |xx: i64, yy: i64| {
                        result.image.get((3 + xx) as u32, (3 + yy) as u32)[c] as f64
                    };
                    let p = |xx: i64, yy: i64| patch_img.get(xx as u32, yy as u32)[c] as f64;
                    let lap_f = 4.0 * f(x, y) - f(x - 1, y) - f(x + 1, y) - f(x, y - 1) - f(x, y + 1);
                    let lap_p = 4.0 * p(x, y) - p(x - 1, y) - p(x + 1, y) - p(x, y - 1) - p(x, y + 1);
                    worst = worst.max((lap_f - lap_p).abs());
                }
            }
        }
        // The solver reports the pre-rounding residual; 8-bit quantization
        // adds at most 4 * 0.5 per neighbor stencil.
        assert!((worst - result.max_residual.as_f64()).abs() <= 4.0);
    }

    #[test]
    fn render_boxes_frame_count_and_positions() {
        let mut db = TubeDatabase::new(64, 48, Fps::default()).unwrap();
        db.insert(const_tube(1, 10, 14, 20, 12, 8, 6)).unwrap();
        let p: Params<f64> = Params::default();
        let g = GroupingResult::singletons(&db, &p);
        let s = minimize_length(&db, &g, &p).unwrap();
        assert_eq!(s.length, 5);
        let bg = RgbImage::filled(64, 48, [0, 0, 0]);
        let frames = render_boxes(&db, &s, &bg).unwrap();
        assert_eq!(frames.len(), 5);
        let color = tube_color(0, TubeId(1));
        for frame in &frames {
            assert_eq!(frame.get(20, 12), color); // top-left corner drawn
            assert_eq!(frame.get(27, 17), color); // bottom-right corner
        }
    }

    #[test]
    fn render_boxes_empty_schedule() {
        let db = TubeDatabase::new(32, 32, Fps::default()).unwrap();
        let p: Params<f64> = Params::default();
        let g = GroupingResult::singletons(&db, &p);
        let s = minimize_length(&db, &g, &p).unwrap();
        let frames = render_boxes(&db, &s, &RgbImage::filled(32, 32, [0, 0, 0])).unwrap();
        assert!(frames.is_empty());
    }

    #[test]
    fn group_hues_distinct_for_small_counts() {
        let mut hues: Vec<f64> = (0..12).map(group_hue).collect();
        hues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in hues.windows(2) {
            assert!((w[1] - w[0]).abs() > 1.0);
        }
    }

    #[test]
    fn groupmates_share_hue() {
        let a = tube_color(3, TubeId(1));
        let b = tube_color(3, TubeId(2));
        let hue = |rgb: [u8; 3]| {
            let (r, g, bl) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
            let max = r.max(g).max(bl);
            let min = r.min(g).min(bl);
            let d = max - min;
            if d == 0.0 {
                0.0
            } else if max == r {
                60.0 * (((g - bl) / d) % 6.0)
            } else if max == g {
                60.0 * ((bl - r) / d + 2.0)
            } else {
                60.0 * ((r - g) / d + 4.0)
            }
        };
        assert!((hue(a) - hue(b)).abs() < 6.0);
    }
}
