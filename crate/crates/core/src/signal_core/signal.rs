use std::ops::{Add, Mul, Range};

use num_complex::Complex64;

use super::{SignalError, TimeGrid};

/// Scalar types a [`Signal`] can carry.
pub trait Sample: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync + 'static {
    fn is_finite_sample(&self) -> bool;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Immutable sampled signal with a per-sample validity mask.
///
/// Samples flagged invalid (edge regions after a delay, detector guard bands)
/// keep whatever value the producing operation left there; consumers decide
/// whether to skip them.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    grid: TimeGrid,
    samples: Vec<T>,
    valid: Vec<bool>,
}

pub type RealSignal = Signal<f64>;
pub type ComplexSignal = Signal<Complex64>;

impl<T: Sample> Signal<T> {
    pub fn new(grid: TimeGrid, samples: Vec<T>) -> Result<Self, SignalError> {
        let valid = vec![true; samples.len()];
        Self::with_mask(grid, samples, valid)
    }

    pub fn with_mask(grid: TimeGrid, samples: Vec<T>, valid: Vec<bool>) -> Result<Self, SignalError> {
        if samples.len() != grid.len() || valid.len() != grid.len() {
            return Err(SignalError::LengthMismatch { expected: grid.len(), got: samples.len().min(valid.len()) });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite_sample()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Self { grid, samples, valid })
    }

    /// Builds a signal by evaluating `f` at every sample time.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> T) -> Result<Self, SignalError> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn constant(grid: TimeGrid, value: T) -> Result<Self, SignalError> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub(crate) fn from_parts_unchecked(grid: TimeGrid, samples: Vec<T>, valid: Vec<bool>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        debug_assert_eq!(valid.len(), grid.len());
        Self { grid, samples, valid }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Maximal runs of consecutive valid samples.
    pub fn valid_runs(&self) -> Vec<Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &v) in self.valid.iter().enumerate() {
            match (v, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.valid.len());
        }
        runs
    }

    pub fn largest_valid_run(&self) -> Option<Range<usize>> {
        self.valid_runs().into_iter().max_by_key(|r| (r.len(), std::cmp::Reverse(r.start)))
    }

    /// Relabels the time origin without touching samples.
    pub fn retimed(&self, start: f64) -> Self {
        Self { grid: self.grid.with_start(start), samples: self.samples.clone(), valid: self.valid.clone() }
    }

    /// Marks additional samples invalid.
    pub fn invalidate(mut self, range: Range<usize>) -> Self {
        let end = range.end.min(self.valid.len());
        for v in &mut self.valid[range.start.min(end)..end] {
            *v = false;
        }
        self
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Result<Signal<U>, SignalError> {
        Signal::with_mask(self.grid, self.samples.iter().map(|&s| f(s)).collect(), self.valid.clone())
    }

    /// Sample-wise combination on a shared grid; validity is the logical AND.
    pub fn zip_map<U: Sample, V: Sample>(
        &self,
        other: &Signal<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Signal<V>, SignalError> {
        self.grid.ensure_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        let valid = self.valid.iter().zip(&other.valid).map(|(&a, &b)| a && b).collect();
        Signal::with_mask(self.grid, samples, valid)
    }

    pub fn scale(&self, k: f64) -> Result<Self, SignalError> {
        self.map(|s| s * k)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SignalError> {
        self.zip_map(other, |a, b| a + b)
    }

    /// Time of sample `i` on this signal's grid.
    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }
}

impl RealSignal {
    /// Largest absolute value over valid samples.
    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().zip(&self.valid).filter(|(_, &v)| v).fold(0.0_f64, |m, (&s, _)| m.max(s.abs()))
    }

    /// RMS over valid samples, or 0 when none are valid.
    pub fn rms(&self) -> f64 {
        let (sum, n) = self
            .samples
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .fold((0.0, 0usize), |(s, n), (&x, _)| (s + x * x, n + 1));
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }
}

impl ComplexSignal {
    /// Sample-wise `|z|^2`.
    pub fn intensity(&self) -> RealSignal {
        Signal::from_parts_unchecked(self.grid, self.samples.iter().map(|z| z.norm_sqr()).collect(), self.valid.clone())
    }
}
