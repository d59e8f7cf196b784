use std::sync::OnceLock;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::{GridSpec, MAX_DIM};
use crate::error::{NlsError, Result};

/// A complex field sampled on a [`GridSpec`], with its Fourier modes computed on demand.
///
/// Modes are unitary DFT coefficients, so `||f||_{L^2}^2 = cell_volume * sum |f_hat|^2`.
#[derive(Debug)]
pub struct SpectralField {
    grid: GridSpec,
    values: Vec<Complex64>,
    modes: OnceLock<Vec<Complex64>>,
}

impl Clone for SpectralField {
    fn clone(&self) -> Self {
        let modes = OnceLock::new();
        if let Some(m) = self.modes.get() {
            let _ = modes.set(m.clone());
        }
        SpectralField { grid: self.grid, values: self.values.clone(), modes }
    }
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_values_unchecked(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<Complex64>) -> Self {
        SpectralField { grid, values, modes: OnceLock::new() }
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        Self::from_values(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_modes(grid: GridSpec, modes: Vec<Complex64>) -> Result<Self> {
        if modes.len() != grid.len() {
            return Err(NlsError::GridMismatch(format!(
                "{} modes for a grid of {} points",
                modes.len(),
                grid.len()
            )));
        }
        let mut values = modes.clone();
        fft::inverse(&grid, &mut values);
        let f = Self::from_values_unchecked(grid, values);
        let _ = f.modes.set(modes);
        Ok(f)
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> Complex64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|j| f(&grid.position(j))).collect();
        Self::from_values_unchecked(grid, values)
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> f64 + Sync) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn modes(&self) -> &[Complex64] {
        self.modes.get_or_init(|| {
            let mut m = self.values.clone();
            fft::forward(&self.grid, &mut m);
            m
        })
    }

    /// Multiplies the modes by a real multiplier `mult(xi)`.
    pub fn apply_multiplier(&self, mult: impl Fn(&[f64; MAX_DIM]) -> f64 + Sync) -> SpectralField {
        let g = self.grid;
        let modes: Vec<Complex64> = self
            .modes()
            .par_iter()
            .enumerate()
            .map(|(j, c)| {
                let w = mult(&g.wavevector(j));
                if w == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * w
                }
            })
            .collect();
        SpectralField::from_modes(g, modes).expect("same grid")
    }

    /// Multiplies the modes by a complex multiplier given per flat index.
    pub fn apply_mode_table(&self, table: &[Complex64]) -> Result<SpectralField> {
        if table.len() != self.grid.len() {
            return Err(NlsError::GridMismatch("multiplier table length".into()));
        }
        let modes = self.modes().par_iter().zip(table).map(|(a, b)| a * b).collect();
        SpectralField::from_modes(self.grid, modes)
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> SpectralField {
        let v = self.values.par_iter().map(|&z| f(z)).collect();
        SpectralField::from_values_unchecked(self.grid, v)
    }

    pub fn scale(&self, c: Complex64) -> SpectralField {
        self.map_values(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> SpectralField {
        self.map_values(|z| z * c)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let v = self.values.par_iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(SpectralField::from_values_unchecked(self.grid, v))
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `L^2` inner product `int f conj(g) dx`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `||f||_{L^2}^2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `||grad f||_{L^2}^2 = int |xi|^2 |f_hat|^2`.
    pub fn grad_norm_sq(&self) -> f64 {
        let g = self.grid;
        self.modes()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let xi = g.wavevector(j);
                xi.iter().map(|x| x * x).sum::<f64>() * c.norm_sqr()
            })
            .sum::<f64>()
            * g.cell_volume()
    }

    /// Spectral partial derivative along 0-based `axis`; the Nyquist mode of that axis is dropped.
    pub fn partial(&self, axis: usize) -> SpectralField {
        let g = self.grid;
        let modes = self
            .modes()
            .par_iter()
            .enumerate()
            .map(|(j, c)| {
                let idx = g.unflatten(j)[axis];
                if g.is_nyquist_index(idx) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, g.freq_spacing() * g.wavenumber(idx) as f64)
                }
            })
            .collect();
        SpectralField::from_modes(g, modes).expect("same grid")
    }

    /// Pointwise `|grad f|`.
    pub fn gradient_magnitude(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for a in 0..self.grid.dim() {
            let p = self.partial(a);
            acc.par_iter_mut().zip(p.values()).for_each(|(s, z)| *s += z.norm_sqr());
        }
        acc.par_iter_mut().for_each(|s| *s = s.sqrt());
        acc
    }

    /// Translation `f(. - y)` by a Fourier phase.
    pub fn translate(&self, y: &[f64]) -> SpectralField {
        let g = self.grid;
        let modes = self
            .modes()
            .par_iter()
            .enumerate()
            .map(|(j, c)| {
                let xi = g.wavevector(j);
                let ph: f64 = (0..g.dim()).map(|a| xi[a] * y.get(a).copied().unwrap_or(0.0)).sum();
                c * Complex64::from_polar(1.0, -ph)
            })
            .collect();
        SpectralField::from_modes(g, modes).expect("same grid")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parseval_holds() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::new((x[0] * x[1]).sin(), x[0].cos()));
        let lhs = f.mass();
        let rhs: f64 = f.modes().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_volume();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let df = f.partial(0);
        for (a, b) in df.values().iter().zip(f.values()) {
            assert!((a - b * Complex64::new(0.0, 3.0)).norm() < 1e-12);
        }
        assert!((f.grad_norm_sq() - 9.0 * f.mass()).abs() < 1e-10);
    }

    #[test]
    fn translation_by_grid_step_is_a_roll() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = SpectralField::from_real_fn(g, |x| (x[0]).cos() + 0.3 * (2.0 * x[0]).sin());
        let t = f.translate(&[g.spacing()]);
        for j in 0..16 {
            assert!((t.values()[(j + 1) % 16] - f.values()[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = SpectralField::zeros(GridSpec::new(1, 8, 1.0).unwrap());
        let b = SpectralField::zeros(GridSpec::new(1, 16, 1.0).unwrap());
        assert!(a.add(&b).is_err());
        assert!(SpectralField::from_values(*a.grid(), vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}
