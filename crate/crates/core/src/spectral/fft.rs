//! Unitary n-dimensional FFT on row-major buffers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::GridSpec;

type Plan = Arc<dyn Fft<f64>>;

fn plan(len: usize, dir: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (len, matches!(dir, FftDirection::Forward));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(len, dir))
        .clone()
}

const LINES_PER_TASK: usize = 64;

fn transform(grid: &GridSpec, data: &mut [Complex64], dir: FftDirection) {
    let m = grid.points();
    let d = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(m, dir);
    let total = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(m * LINES_PER_TASK).for_each(|c| fft.process(c));
            continue;
        }
        let block = m * stride;
        // gather lines of this axis into contiguous storage
        scratch
            .par_chunks_mut(block)
            .zip(data.par_chunks(block))
            .for_each(|(dst, src)| {
                for i in 0..m {
                    for r in 0..stride {
                        dst[r * m + i] = src[i * stride + r];
                    }
                }
            });
        scratch.par_chunks_mut(m * LINES_PER_TASK).for_each(|c| fft.process(c));
        data.par_chunks_mut(block)
            .zip(scratch.par_chunks(block))
            .for_each(|(dst, src)| {
                for i in 0..m {
                    for r in 0..stride {
                        dst[i * stride + r] = src[r * m + i];
                    }
                }
            });
    }
    let scale = 1.0 / (total as f64).sqrt();
    data.par_iter_mut().for_each(|z| *z *= scale);
}

/// In-place unitary forward transform.
pub fn forward(grid: &GridSpec, data: &mut [Complex64]) {
    transform(grid, data, FftDirection::Forward);
}

/// In-place unitary inverse transform.
pub fn inverse(grid: &GridSpec, data: &mut [Complex64]) {
    transform(grid, data, FftDirection::Inverse);
}
