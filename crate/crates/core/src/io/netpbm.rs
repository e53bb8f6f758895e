//! Binary netpbm readers and writers: PGM (P5) for grayscale frames and
//! PPM (P6) for rendered output. Maxval is fixed at 255.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::render::RgbImage;
use crate::tracker::GrayFrame;

struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> HeaderParser<'a> {
    fn new(bytes: &'a [u8], path: &Path) -> Self {
        HeaderParser {
            bytes,
            pos: 0,
            path: path.display().to_string(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path.clone(), msg)
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("unexpected end of header"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("expected a number, got {:?}", tok)))
    }

    /// Consume magic + dimensions + maxval and return (w, h) with `pos`
    /// at the first raster byte.
    fn header(&mut self, magic: &[u8]) -> Result<(u32, u32)> {
        let m = self.token()?;
        if m != magic {
            return Err(self.err(format!(
                "expected {} file, got magic {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(m)
            )));
        }
        let w = self.number()?;
        let h = self.number()?;
        let maxval = self.number()?;
        if w == 0 || h == 0 {
            return Err(self.err(format!("degenerate dimensions {w}x{h}")));
        }
        if maxval == 0 || maxval > 255 {
            return Err(self.err(format!("unsupported maxval {maxval}")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(self.err("missing separator before raster"));
        }
        self.pos += 1;
        Ok((w, h))
    }

    fn raster(&self, len: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < len {
            return Err(self.err(format!("raster truncated: need {len} bytes, have {available}")));
        }
        Ok(&self.bytes[self.pos..self.pos + len])
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut p = HeaderParser::new(&bytes, path);
    let (w, h) = p.header(b"P5")?;
    let raster = p.raster((w as usize) * (h as usize))?;
    GrayFrame::new(w, h, raster.to_vec())
}

pub fn write_pgm(frame: &GrayFrame, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(frame.data().len() + 32);
    write!(out, "P5\n{} {}\n255\n", frame.width(), frame.height()).expect("vec write");
    out.extend_from_slice(frame.data());
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut p = HeaderParser::new(&bytes, path);
    let (w, h) = p.header(b"P6")?;
    let raster = p.raster(3 * (w as usize) * (h as usize))?;
    RgbImage::new(w, h, raster.to_vec())
}

pub fn write_ppm(img: &RgbImage, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 32);
    write!(out, "P6\n{} {}\n255\n", img.width(), img.height()).expect("vec write");
    out.extend_from_slice(img.data());
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read either format as RGB; grayscale replicates into three channels.
pub fn read_rgb_any(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut probe = HeaderParser::new(&bytes, path);
    match probe.token()? {
        b"P5" => Ok(RgbImage::from_gray(&read_pgm(path)?)),
        b"P6" => read_ppm(path),
        other => Err(Error::parse(
            path.display().to_string(),
            format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
        )),
    }
}
