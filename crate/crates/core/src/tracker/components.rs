//! 8-connected component extraction from a binary mask.

use super::background::Mask;

/// A detected foreground blob: tight bounding rectangle plus pixel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
    pub area: u64,
}

impl Detection {
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }
}

/// Tight bounding boxes of all 8-connected foreground components with at
/// least `min_area` pixels, ordered by (y, x) of the box top-left corner.
pub fn connected_components(mask: &Mask, min_area: u64) -> Vec<Detection> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let mut visited = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    let mut stack = Vec::new();

    for sy in 0..h {
        for sx in 0..w {
            if visited[idx(sx, sy)] || !mask.get(sx as u32, sy as u32) {
                continue;
            }
            visited[idx(sx, sy)] = true;
            stack.push((sx, sy));
            let (mut min_x, mut min_y, mut max_x, mut max_y) = (sx, sy, sx, sy);
            let mut area = 0u64;
            while let Some((x, y)) = stack.pop() {
                area += 1;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        if !visited[idx(nx, ny)] && mask.get(nx as u32, ny as u32) {
                            visited[idx(nx, ny)] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            if area >= min_area {
                out.push(Detection {
                    x: min_x as i32,
                    y: min_y as i32,
                    w: (max_x - min_x + 1) as u32,
                    h: (max_y - min_y + 1) as u32,
                    area,
                });
            }
        }
    }
    out.sort_by_key(|d| (d.y, d.x));
    out
}
