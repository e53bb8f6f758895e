//! Gradient-domain compositing: paste a patch into a background so that
//! the result's Laplacian matches the patch's inside the mask, with the
//! background held fixed on the boundary. Solved per channel by
//! Gauss–Seidel in natural raster order.

use super::{Patch, RgbImage};
use crate::error::{Error, Result};
use crate::num::Real;

/// Iteration controls for the Gauss–Seidel solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<R: Real> {
    pub max_iters: u32,
    /// Stop when the max residual |Lap(result) − Lap(patch)| over masked
    /// pixels drops below this.
    pub tolerance: R,
}

impl<R: Real> Default for SolverOptions<R> {
    fn default() -> Self {
        SolverOptions {
            max_iters: 10_000,
            tolerance: R::of_f64(1e-3),
        }
    }
}

/// One channel's solved field plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct ChannelSolve<R: Real> {
    pub values: Vec<R>,
    pub converged: bool,
    pub iterations: u32,
    pub max_residual: R,
}

/// Solve the discrete Poisson equation on one scalar field over a
/// `width` x `height` region. `init` supplies the starting guess and the
/// Dirichlet values read at unmasked pixels; `source` supplies the
/// guidance Laplacian. The mask must keep a one-pixel margin so every
/// 4-neighbor of a masked pixel exists.
pub fn solve_channel<R: Real>(
    width: usize,
    height: usize,
    init: &[R],
    source: &[R],
    mask: &[bool],
    opts: &SolverOptions<R>,
) -> ChannelSolve<R> {
    debug_assert_eq!(init.len(), width * height);
    debug_assert_eq!(source.len(), width * height);
    debug_assert_eq!(mask.len(), width * height);
    let masked: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let mut f = init.to_vec();
    if masked.is_empty() {
        return ChannelSolve {
            values: f,
            converged: true,
            iterations: 0,
            max_residual: R::zero(),
        };
    }

    let w = width as i64;
    let at = |x: i64, y: i64| (y * w + x) as usize;
    let four = R::of_f64(4.0);
    let mut g = vec![R::zero(); mask.len()];
    for &i in &masked {
        let (x, y) = ((i as i64) % w, (i as i64) / w);
        g[i] = four * source[i]
            - source[at(x - 1, y)]
            - source[at(x + 1, y)]
            - source[at(x, y - 1)]
            - source[at(x, y + 1)];
    }

    let residual = |f: &[R]| {
        let mut worst = R::zero();
        for &i in &masked {
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            let r = (four * f[i]
                - f[at(x - 1, y)]
                - f[at(x + 1, y)]
                - f[at(x, y - 1)]
                - f[at(x, y + 1)]
                - g[i])
                .abs();
            if r > worst {
                worst = r;
            }
        }
        worst
    };

    let mut iterations = 0u32;
    let (converged, max_residual) = loop {
        let r = residual(&f);
        if r < opts.tolerance {
            break (true, r);
        }
        if iterations >= opts.max_iters {
            break (false, r);
        }
        for &i in &masked {
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            f[i] = (f[at(x - 1, y)] + f[at(x + 1, y)] + f[at(x, y - 1)] + f[at(x, y + 1)] + g[i])
                / four;
        }
        iterations += 1;
    };

    ChannelSolve {
        values: f,
        converged,
        iterations,
        max_residual,
    }
}

/// Outcome of a blend: the composited image plus convergence diagnostics.
/// Non-convergence is reported, not raised; the image is still usable.
#[derive(Debug, Clone)]
pub struct BlendResult<R: Real> {
    pub image: RgbImage,
    pub converged: bool,
    pub iterations: u32,
    pub max_residual: R,
}

/// Blend `patch` into `background` at the patch's target position.
/// Pixels outside the mask are returned bit-identical to the background;
/// masked pixels solve the discrete Poisson equation with the patch
/// gradients as guidance. Quantization back to 8 bits happens only here,
/// after the solve.
pub fn poisson_blend<R: Real>(
    background: &RgbImage,
    patch: &Patch,
    opts: &SolverOptions<R>,
) -> Result<BlendResult<R>> {
    let (pw, ph) = (patch.image.width() as i64, patch.image.height() as i64);
    let (bw, bh) = (background.width() as i64, background.height() as i64);
    let (px, py) = (patch.x as i64, patch.y as i64);
    if px < 0 || py < 0 || px + pw > bw || py + ph > bh {
        return Err(Error::OutOfBounds(format!(
            "patch {}x{} at ({}, {}) exceeds {}x{} background",
            pw, ph, px, py, bw, bh
        )));
    }

    let mut out = background.clone();
    let mut total_iters = 0u32;
    let mut worst_residual = R::zero();
    let mut all_converged = true;

    for c in 0..3 {
        let init: Vec<R> = (0..ph)
            .flat_map(|y| (0..pw).map(move |x| ((px + x) as u32, (py + y) as u32)))
            .map(|(x, y)| R::of_u64(background.get(x, y)[c] as u64))
            .collect();
        let source: Vec<R> = (0..(pw * ph) as usize)
            .map(|i| R::of_u64(patch.image.data()[i * 3 + c] as u64))
            .collect();
        let solve = solve_channel(
            pw as usize,
            ph as usize,
            &init,
            &source,
            &patch.mask,
            opts,
        );
        for (i, &masked) in patch.mask.iter().enumerate() {
            if !masked {
                continue;
            }
            let (x, y) = ((i as i64) % pw, (i as i64) / pw);
            let v = solve.values[i].as_f64().round().clamp(0.0, 255.0) as u8;
            let mut px_val = out.get((px + x) as u32, (py + y) as u32);
            px_val[c] = v;
            out.set((px + x) as u32, (py + y) as u32, px_val);
        }
        total_iters = total_iters.max(solve.iterations);
        if solve.max_residual > worst_residual {
            worst_residual = solve.max_residual;
        }
        all_converged &= solve.converged;
    }

    Ok(BlendResult {
        image: out,
        converged: all_converged,
        iterations: total_iters,
        max_residual: worst_residual,
    })
}
