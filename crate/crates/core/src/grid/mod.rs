//! Sampled functions on rectangular grids, with the transform pair and
//! convolution used throughout the calculus.
//!
//! Fourier convention: `hat g(s) = \int g(t) exp(-i s.t) dt`, inverse with
//! the factor `(2 pi)^-n`.

mod breaks;
mod convolve;
mod csvio;
mod fourier;
mod sampled;
pub mod spectral;

pub use convolve::{convolve, convolve_windowed};
pub use csvio::{read_csv, read_csv_from, write_csv, write_csv_to};
pub use fourier::{fourier_forward, fourier_forward_with, fourier_inverse, fourier_inverse_with};
pub use sampled::{extrapolate_limit, Break, EvalContext, SampledFunction};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One axis of a rectangular grid.
///
/// A `half_line` axis samples `(0, inf)` log-uniformly between `min` and
/// `max`; otherwise nodes are uniform in the coordinate itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub half_line: bool,
}

impl Axis {
    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self {
            min,
            max,
            count,
            half_line: false,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn half_line(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self {
            min,
            max,
            count,
            half_line: true,
        };
        axis.validate()?;
        Ok(axis)
    }

    /// Uniform axis `{k * step : |k| <= half_count}`; the origin is a node.
    pub fn symmetric(step: f64, half_count: usize) -> Result<Self> {
        let extent = step * half_count as f64;
        Self::uniform(-extent, extent, 2 * half_count + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis bounds must be finite, got [{}, {}]",
                self.min, self.max
            )));
        }
        if !(self.min < self.max) {
            return Err(Error::InvalidGrid(format!(
                "axis requires min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis requires at least 2 points, got {}",
                self.count
            )));
        }
        if self.half_line && self.min <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "half-line axis requires min > 0, got {}",
                self.min
            )));
        }
        Ok(())
    }

    /// Spacing in the sampling variable (the coordinate, or its logarithm on
    /// half-line axes).
    pub fn step(&self) -> f64 {
        let (lo, hi) = self.sampling_bounds();
        (hi - lo) / (self.count - 1) as f64
    }

    /// Bounds in the sampling variable.
    pub fn sampling_bounds(&self) -> (f64, f64) {
        if self.half_line {
            (self.min.ln(), self.max.ln())
        } else {
            (self.min, self.max)
        }
    }

    /// Node `i` in the sampling variable.
    pub fn sample_coord(&self, i: usize) -> f64 {
        let (lo, hi) = self.sampling_bounds();
        if i + 1 == self.count {
            hi
        } else {
            lo + i as f64 * self.step()
        }
    }

    /// Node `i` as a point of the physical domain.
    pub fn coordinate(&self, i: usize) -> f64 {
        if self.half_line {
            if i == 0 {
                self.min
            } else if i + 1 == self.count {
                self.max
            } else {
                self.sample_coord(i).exp()
            }
        } else {
            self.sample_coord(i)
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.coordinate(i)).collect()
    }

    /// Trapezoid weight of node `i` for integration against `dx`.
    pub fn weight(&self, i: usize) -> f64 {
        let end = if i == 0 || i + 1 == self.count { 0.5 } else { 1.0 };
        let w = end * self.step();
        if self.half_line {
            // dx = x d(log x)
            w * self.coordinate(i)
        } else {
            w
        }
    }

    /// Fractional node position of `x`, or `None` outside the hull.
    pub fn locate(&self, x: f64) -> Option<f64> {
        let v = if self.half_line {
            if x <= 0.0 {
                return None;
            }
            x.ln()
        } else {
            x
        };
        let (lo, _) = self.sampling_bounds();
        let p = (v - lo) / self.step();
        let last = (self.count - 1) as f64;
        let slack = 1e-9;
        if p < -slack || p > last + slack {
            None
        } else {
            Some(p.clamp(0.0, last))
        }
    }

    /// Nearest node to `x` when `x` sits on a node within `rel_tol` of a step.
    pub fn node_index(&self, x: f64, rel_tol: f64) -> Option<usize> {
        let p = self.locate(x)?;
        let k = p.round();
        ((p - k).abs() <= rel_tol).then_some(k as usize)
    }

    /// Same spacing and node alignment (within `tol` of a step).
    pub fn compatible_spacing(&self, other: &Axis, tol: f64) -> bool {
        self.half_line == other.half_line && (self.step() - other.step()).abs() <= tol * self.step()
    }
}

/// A rectangular grid in dimension 1 or 2; axis 0 varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "grid dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(Self { axes })
    }

    pub fn line(axis: Axis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self> {
        Ok(Self::line(Axis::uniform(min, max, count)?))
    }

    pub fn half_line(min: f64, max: f64, count: usize) -> Result<Self> {
        Ok(Self::line(Axis::half_line(min, max, count)?))
    }

    /// `[-half_count*step, half_count*step]` in every one of `dim` axes.
    pub fn symmetric(dim: usize, step: f64, half_count: usize) -> Result<Self> {
        Self::new(vec![Axis::symmetric(step, half_count)?; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat position `flat` (axis 0 slowest).
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [flat, 0],
            _ => [flat / self.axes[1].count, flat % self.axes[1].count],
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        match self.axes.len() {
            1 => idx[0],
            _ => idx[0] * self.axes[1].count + idx[1],
        }
    }

    /// Physical coordinates of flat node `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.coordinate(idx[k]))
            .collect()
    }

    /// Sampling-variable coordinates of flat node `flat`.
    pub fn sample_point(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.sample_coord(idx[k]))
            .collect()
    }

    /// Product trapezoid weight of flat node `flat`.
    pub fn weight(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.weight(idx[k]))
            .product()
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.axes.len() != other.axes.len() {
            return Err(Error::GridMismatch(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        for (a, b) in self.axes.iter().zip(&other.axes) {
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
            if a.count != b.count
                || a.half_line != b.half_line
                || !close(a.min, b.min)
                || !close(a.max, b.max)
            {
                return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
            }
        }
        Ok(())
    }

    pub(crate) fn ensure_uniform(&self, what: &str) -> Result<()> {
        if self.axes.iter().any(|a| a.half_line) {
            return Err(Error::InvalidGrid(format!(
                "{what} requires uniform axes, got a half-line axis"
            )));
        }
        Ok(())
    }
}

/// Warnings and counters collected while running a pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }

    pub fn extend(&mut self, other: Diagnostics) {
        for w in other.warnings {
            self.warn(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_invariants() {
        assert!(Axis::uniform(1.0, 1.0, 5).is_err());
        assert!(Axis::uniform(0.0, 1.0, 1).is_err());
        assert!(Axis::half_line(0.0, 1.0, 5).is_err());
        assert!(Axis::uniform(0.0, f64::INFINITY, 5).is_err());
        let a = Axis::uniform(0.0, 1.0, 11).unwrap();
        assert!((a.step() - 0.1).abs() < 1e-15);
        assert_eq!(a.coordinate(10), 1.0);
    }

    #[test]
    fn symmetric_axis_contains_origin() {
        let a = Axis::symmetric(0.01, 3000).unwrap();
        assert_eq!(a.count, 6001);
        assert!(a.coordinate(3000).abs() < 1e-12);
        assert_eq!(a.node_index(0.0, 1e-9), Some(3000));
        assert_eq!(a.node_index(-1.0, 1e-9), Some(2900));
    }

    #[test]
    fn half_line_axis_is_log_uniform() {
        let a = Axis::half_line(1e-2, 1e2, 5).unwrap();
        let xs = a.coordinates();
        for (x, e) in xs.iter().zip([1e-2, 1e-1, 1.0, 1e1, 1e2]) {
            assert!((x / e - 1.0).abs() < 1e-13);
        }
        assert_eq!(a.locate(-1.0), None);
        assert!(a.locate(1.0).is_some());
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = Grid::new(vec![
            Axis::uniform(0.0, 1.0, 3).unwrap(),
            Axis::uniform(0.0, 2.0, 5).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.len(), 15);
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(flat)), flat);
        }
        assert_eq!(g.point(7), vec![0.5, 1.0]);
        assert!(Grid::new(vec![]).is_err());
    }
}
