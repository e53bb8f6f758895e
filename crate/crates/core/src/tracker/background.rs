//! Per-pixel running Gaussian background model and thresholded
//! foreground extraction.

use crate::error::{Error, Result};
use crate::num::Real;

/// 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidParams(format!(
                "frame data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        GrayFrame {
            width,
            height,
            data: vec![value; (width as usize) * (height as usize)],
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

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[(y as usize) * (self.width as usize) + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.data[(y as usize) * (self.width as usize) + x as usize] = v;
    }

    /// Fill an axis-aligned rectangle, clipped to the frame.
    pub fn fill_rect(&mut self, x: i64, y: i64, w: u32, h: u32, v: u8) {
        let x0 = x.max(0) as u32;
        let y0 = y.max(0) as u32;
        let x1 = ((x + w as i64).max(0) as u64).min(self.width as u64) as u32;
        let y1 = ((y + h as i64).max(0) as u64).min(self.height as u64) as u32;
        for yy in y0..y1 {
            for xx in x0..x1 {
                self.set(xx, yy, v);
            }
        }
    }
}

/// Binary per-pixel mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            data: vec![false; (width as usize) * (height as usize)],
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidParams(format!(
                "mask data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Mask {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y as usize) * (self.width as usize) + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[(y as usize) * (self.width as usize) + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Per-pixel running mean and variance of the scene background.
#[derive(Debug, Clone)]
pub struct BackgroundModel<R: Real> {
    width: u32,
    height: u32,
    mean: Vec<R>,
    variance: Vec<R>,
}

impl<R: Real> BackgroundModel<R> {
    /// Seed the model from an initial frame with a fixed prior variance.
    pub fn from_frame(frame: &GrayFrame, initial_variance: R) -> Self {
        BackgroundModel {
            width: frame.width(),
            height: frame.height(),
            mean: frame.data().iter().map(|&v| R::of_u64(v as u64)).collect(),
            variance: vec![initial_variance; frame.data().len()],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn mean(&self) -> &[R] {
        &self.mean
    }

    fn check_dims(&self, frame: &GrayFrame) -> Result<()> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: frame.width(),
                got_h: frame.height(),
            });
        }
        Ok(())
    }

    /// Blend a frame into the model: `mean <- (1-rate)*mean + rate*pixel`,
    /// variance updated from the pre-update deviation.
    pub fn update(&mut self, frame: &GrayFrame, rate: R) -> Result<()> {
        self.check_dims(frame)?;
        self.update_where(frame, rate, |_| true);
        Ok(())
    }

    /// Like [`update`](Self::update) but skipping pixels flagged in
    /// `foreground`, so moving objects do not bleed into the model.
    pub fn update_masked(&mut self, frame: &GrayFrame, rate: R, foreground: &Mask) -> Result<()> {
        self.check_dims(frame)?;
        if foreground.width() != self.width || foreground.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: foreground.width(),
                got_h: foreground.height(),
            });
        }
        let data = &foreground.data;
        self.update_where(frame, rate, |i| !data[i]);
        Ok(())
    }

    fn update_where(&mut self, frame: &GrayFrame, rate: R, include: impl Fn(usize) -> bool) {
        let one = R::one();
        for (i, &px) in frame.data().iter().enumerate() {
            if !include(i) {
                continue;
            }
            let v = R::of_u64(px as u64);
            let diff = v - self.mean[i];
            self.mean[i] = self.mean[i] + rate * diff;
            self.variance[i] = (one - rate) * self.variance[i] + rate * diff * diff;
        }
    }

    /// Pixels deviating from the model by more than `k` standard
    /// deviations are foreground. The floor keeps the threshold sane on
    /// noise-free scenes where the learned variance collapses to zero.
    pub fn foreground_mask(&self, frame: &GrayFrame, k: R, std_floor: R) -> Result<Mask> {
        self.check_dims(frame)?;
        let mut mask = Mask::new(self.width, self.height);
        for (i, &px) in frame.data().iter().enumerate() {
            let v = R::of_u64(px as u64);
            let std = self.variance[i].sqrt().max(std_floor);
            if (v - self.mean[i]).abs() > k * std {
                mask.data[i] = true;
            }
        }
        Ok(mask)
    }
}
