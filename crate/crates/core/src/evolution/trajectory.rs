use rustfft::num_complex::Complex64;

use crate::error::{invalid, NlsError, Result};
use crate::spectral::{GridSpec, SpectralField};

/// Time-stamped fields on an interval `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct TrajectorySeries {
    grid: GridSpec,
    times: Vec<f64>,
    fields: Vec<SpectralField>,
    /// Set when the producing integrator stopped early on a blowup check.
    pub blowup_suspect: bool,
}

impl TrajectorySeries {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return invalid("trajectory needs matching, nonempty times and fields");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("trajectory times must be strictly increasing");
        }
        let grid = *fields[0].grid();
        for f in &fields {
            if *f.grid() != grid {
                return Err(NlsError::GridMismatch("trajectory fields on different grids".into()));
            }
        }
        Ok(TrajectorySeries { grid, times, fields, blowup_suspect: false })
    }

    /// Uniformly spaced copy of one field (useful for time-independent inputs).
    pub fn constant(field: SpectralField, t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t1 > t0) {
            return invalid("constant trajectory needs t1 > t0 and at least one step");
        }
        let dt = (t1 - t0) / steps as f64;
        let times = (0..=steps).map(|i| if i == steps { t1 } else { t0 + dt * i as f64 }).collect();
        Self::new(times, vec![field; steps + 1])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }
    pub fn last(&self) -> &SpectralField {
        self.fields.last().unwrap()
    }

    /// The common step if the times are uniform to `1e-12` (relative to the step).
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let (t0, t1) = self.interval();
        let dt = (t1 - t0) / (self.len() - 1) as f64;
        let ok = self.times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-12 * dt.abs().max(1.0));
        ok.then_some(dt)
    }

    /// Trapezoid quadrature weights; a single node gets weight zero.
    pub fn time_weights(&self) -> Vec<f64> {
        let n = self.len();
        let mut w = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = self.times[i + 1] - self.times[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        w
    }

    /// Nodes `i..=j` as a new series.
    pub fn window(&self, i: usize, j: usize) -> Result<Self> {
        if i > j || j >= self.len() {
            return invalid(format!("window {i}..={j} outside 0..{}", self.len()));
        }
        let mut s = Self::new(self.times[i..=j].to_vec(), self.fields[i..=j].to_vec())?;
        s.blowup_suspect = self.blowup_suspect;
        Ok(s)
    }

    /// Splits into `parts` consecutive windows sharing their endpoints.
    pub fn split(&self, parts: usize) -> Result<Vec<Self>> {
        let segs = self.len().saturating_sub(1);
        if parts == 0 || parts > segs {
            return invalid(format!("cannot split {segs} steps into {parts} parts"));
        }
        let mut out = Vec::with_capacity(parts);
        for p in 0..parts {
            let a = p * segs / parts;
            let b = (p + 1) * segs / parts;
            out.push(self.window(a, b)?);
        }
        Ok(out)
    }

    /// Applies `f` to every snapshot.
    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        TrajectorySeries {
            grid: self.grid,
            times: self.times.clone(),
            fields: self.fields.iter().map(f).collect(),
            blowup_suspect: self.blowup_suspect,
        }
    }

    fn check_aligned(&self, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.len() != other.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return invalid("trajectories sampled at different times");
        }
        Ok(())
    }

    /// Pointwise `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_aligned(other)?;
        let fields = self.fields.iter().zip(&other.fields).map(|(a, b)| a.axpy(c, b)).collect::<Result<_>>()?;
        Ok(TrajectorySeries {
            grid: self.grid,
            times: self.times.clone(),
            fields,
            blowup_suspect: self.blowup_suspect || other.blowup_suspect,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|f| f.scale_real(c))
    }
}
