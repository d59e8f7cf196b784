//! Periodic-box spectral representation: grids, fields, transforms, norms and projections.

pub mod cutoff;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod project;
pub mod snapshot;

pub use cutoff::{smooth_step, CutoffProfile};
pub use field::SpectralField;
pub use grid::{make_grid, GridSpec, MAX_DIM};
pub use norms::{lebesgue_norm, sobolev_norm};
pub use project::{
    directional_identity_residual, directional_project, fattened_project, low_pass, lp_project,
    unit_lattice, unit_project, Projected,
};
pub use snapshot::{read_snapshot, write_snapshot};

/// Block length of parallel reductions.
const REDUCE_BLOCK: usize = 4096;

/// Reduces `f(j)` over `0..n` in fixed blocks, sequentially inside each block and across blocks.
pub(crate) fn block_reduce<T, F, A>(n: usize, zero: T, f: F, add: A) -> T
where
    T: Copy + Send + Sync,
    F: Fn(usize) -> T + Sync,
    A: Fn(T, T) -> T + Sync,
{
    use rayon::prelude::*;
    let partial: Vec<T> = (0..n.div_ceil(REDUCE_BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * REDUCE_BLOCK;
            (lo..(lo + REDUCE_BLOCK).min(n)).fold(zero, |acc, j| add(acc, f(j)))
        })
        .collect();
    partial.into_iter().fold(zero, &add)
}
