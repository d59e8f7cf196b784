//! Fixtures shared by the benchmarks.

use nlslab::{make_grid, Complex64, GridSpec, SpectralField};

pub fn grid(dim: usize, points: usize) -> GridSpec {
    make_grid(dim, points, std::f64::consts::PI).expect("supported grid")
}

/// A modulated Gaussian, smooth and well resolved on every bench grid.
pub fn packet(grid: GridSpec) -> SpectralField {
    SpectralField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::from_polar((-r2).exp(), 0.5 * x[0])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_is_normalizable() {
        let u = packet(grid(2, 32));
        assert!(u.mass() > 0.0 && u.is_finite());
    }
}
