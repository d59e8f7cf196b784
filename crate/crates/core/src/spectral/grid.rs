use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 4;

/// A uniform periodic grid on the box `[-L, L)^d` with `m` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    dim: usize,
    points: usize,
    half_len: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    points: usize,
    half_len: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = NlsError;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.dim, r.points, r.half_len)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid { dim: g.dim, points: g.points, half_len: g.half_len }
    }
}

/// Accepted resolutions: even, at least 8, and with no prime factor besides 2 and 3.
pub fn is_supported_resolution(m: usize) -> bool {
    if m < 8 || !m.is_multiple_of(2) {
        return false;
    }
    let mut r = m;
    while r.is_multiple_of(2) {
        r /= 2;
    }
    while r.is_multiple_of(3) {
        r /= 3;
    }
    r == 1
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_len: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(NlsError::InvalidGrid(format!("dimension {dim} outside 1..=4")));
        }
        if !is_supported_resolution(points) {
            return Err(NlsError::InvalidGrid(format!(
                "{points} points per axis; need an even count >= 8 of the form 2^a 3^b"
            )));
        }
        if !(half_len.is_finite() && half_len > 0.0) {
            return Err(NlsError::InvalidGrid(format!("half length {half_len} must be positive")));
        }
        let total = (points as u128).pow(dim as u32);
        if total > (1u128 << 28) {
            return Err(NlsError::InvalidGrid(format!("{total} grid points is too many")));
        }
        Ok(GridSpec { dim, points, half_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn half_len(&self) -> f64 {
        self.half_len
    }
    /// Total number of grid points `m^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_len / self.points as f64
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_len).powi(self.dim as i32)
    }
    /// Spacing of the frequency lattice, `pi / L`.
    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_len
    }
    /// Nyquist frequency along one axis.
    pub fn nyquist(&self) -> f64 {
        self.freq_spacing() * (self.points / 2) as f64
    }
    /// Largest `|xi|` present on the grid.
    pub fn max_radial_freq(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    /// Signed wavenumber for FFT index `i` (Nyquist counted as negative).
    pub fn wavenumber(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    pub fn is_nyquist_index(&self, i: usize) -> bool {
        i == self.points / 2
    }

    /// Frequencies along one axis in FFT order.
    pub fn axis_freqs(&self) -> Vec<f64> {
        let dk = self.freq_spacing();
        (0..self.points).map(|i| dk * self.wavenumber(i) as f64).collect()
    }

    /// Physical coordinates along one axis, starting at `-L`.
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| -self.half_len + h * i as f64).collect()
    }

    /// Multi-index of a flat (row-major, last axis fastest) position.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Physical position of a flat index; unused axes are zero.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = -self.half_len + h * idx[a] as f64;
        }
        x
    }

    /// Wavevector of a flat mode index; unused axes are zero.
    pub fn wavevector(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let dk = self.freq_spacing();
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = dk * self.wavenumber(idx[a]) as f64;
        }
        xi
    }

    /// `|xi|^2` for every mode, in FFT order.
    pub fn freq_sq_table(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.wavevector(j).iter().map(|x| x * x).sum())
            .collect()
    }

    /// Dyadic scales `N = 2^j` whose annulus `[N/2, 2N]` meets the nonzero frequencies of the grid.
    pub fn dyadic_band(&self) -> Vec<f64> {
        let lo = self.freq_spacing();
        let hi = self.max_radial_freq();
        let jmin = (lo / 2.0).log2().floor() as i32;
        let jmax = (2.0 * hi).log2().ceil() as i32;
        (jmin..=jmax)
            .map(|j| 2f64.powi(j))
            .filter(|&n| 2.0 * n > lo && n / 2.0 < hi)
            .collect()
    }

    /// Whether `N` is one of the dyadic scales in [`Self::dyadic_band`].
    pub fn resolves_scale(&self, n: f64) -> bool {
        self.dyadic_band().iter().any(|&b| (b - n).abs() <= 1e-12 * n.abs())
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(NlsError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Validates a 1-based axis index.
    pub(crate) fn check_axis(&self, ell: usize) -> Result<usize> {
        if ell == 0 || ell > self.dim {
            return Err(NlsError::InvalidParameter(format!(
                "axis {ell} outside 1..={}",
                self.dim
            )));
        }
        Ok(ell - 1)
    }
}

/// Convenience constructor.
pub fn make_grid(dim: usize, points: usize, half_len: f64) -> Result<GridSpec> {
    GridSpec::new(dim, points, half_len)
}
