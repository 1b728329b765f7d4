use super::breaks::{jump_series, scaled_derivatives, FIT_DEGREE};
use super::{Axis, Grid};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::atomic::{AtomicU64, Ordering};

/// A declared jump or kink at a node of a one-dimensional uniform grid.
///
/// The node value of a function with breaks is the mean of the one-sided
/// limits, which is what the trapezoid rule needs there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Break {
    pub index: usize,
    pub left: Complex64,
    pub right: Complex64,
}

impl Break {
    /// A break where the function is continuous but not smooth.
    pub fn kink(index: usize, value: Complex64) -> Self {
        Self {
            index,
            left: value,
            right: value,
        }
    }
}

/// Counters for off-grid evaluations; shared across threads.
#[derive(Debug, Default)]
pub struct EvalContext {
    evaluations: AtomicU64,
    out_of_domain: AtomicU64,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn out_of_domain(&self) -> u64 {
        self.out_of_domain.load(Ordering::Relaxed)
    }

    pub(crate) fn record(&self, evaluations: u64, out_of_domain: u64) {
        self.evaluations.fetch_add(evaluations, Ordering::Relaxed);
        self.out_of_domain.fetch_add(out_of_domain, Ordering::Relaxed);
    }
}

/// Complex samples of a function over a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    breaks: Vec<Break>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!(
                "sample {i} at {:?} is {}",
                grid.point(i),
                values[i]
            )));
        }
        Ok(Self {
            grid,
            values,
            breaks: Vec::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
            breaks: Vec::new(),
        }
    }

    /// Samples `f` at every node (physical coordinates).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64 + Sync + Send) -> Result<Self> {
        let values = crate::par::map_range(grid.len(), |i| f(&grid.point(i)));
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Attaches breaks; node values at break indices are replaced by the
    /// mean of the limits.
    pub fn with_breaks(mut self, mut breaks: Vec<Break>) -> Result<Self> {
        if breaks.is_empty() {
            self.breaks.clear();
            return Ok(self);
        }
        if self.grid.dim() != 1 || self.grid.axis(0).half_line {
            return Err(Error::InvalidGrid(
                "breaks are supported on one-dimensional uniform grids only".into(),
            ));
        }
        breaks.sort_by_key(|b| b.index);
        breaks.dedup_by_key(|b| b.index);
        for b in &breaks {
            if b.index >= self.values.len() {
                return Err(Error::OutOfRange(format!(
                    "break index {} on a grid of {} nodes",
                    b.index,
                    self.values.len()
                )));
            }
            for v in [b.left, b.right] {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite(format!("break limit {v}")));
                }
            }
            self.values[b.index] = 0.5 * (b.left + b.right);
        }
        self.breaks = breaks;
        Ok(self)
    }

    pub fn without_breaks(mut self) -> Self {
        self.breaks.clear();
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn breaks(&self) -> &[Break] {
        &self.breaks
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn break_at(&self, index: usize) -> Option<&Break> {
        self.breaks
            .binary_search_by_key(&index, |b| b.index)
            .ok()
            .map(|k| &self.breaks[k])
    }

    /// Left limit at node `i` (equals the node value away from breaks).
    pub fn left_value(&self, i: usize) -> Complex64 {
        self.break_at(i).map_or(self.values[i], |b| b.left)
    }

    /// Right limit at node `i`.
    pub fn right_value(&self, i: usize) -> Complex64 {
        self.break_at(i).map_or(self.values[i], |b| b.right)
    }

    /// Pointwise map applied to values and break limits.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> Result<Self> {
        let values = crate::par::map_slice(&self.values, |&v| f(v));
        let breaks = self
            .breaks
            .iter()
            .map(|b| Break {
                index: b.index,
                left: f(b.left),
                right: f(b.right),
            })
            .collect();
        Self::new(self.grid.clone(), values)?.with_breaks(breaks)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c).expect("scaling preserves finiteness")
    }

    /// `self + other` on identical grids; breaks are merged.
    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        let mut indices: Vec<usize> = self
            .breaks
            .iter()
            .chain(&other.breaks)
            .map(|b| b.index)
            .collect();
        indices.sort_unstable();
        indices.dedup();
        let breaks = indices
            .into_iter()
            .map(|i| Break {
                index: i,
                left: self.left_value(i) + other.left_value(i),
                right: self.right_value(i) + other.right_value(i),
            })
            .collect();
        Self::new(self.grid.clone(), values)?.with_breaks(breaks)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over the nodes on the boundary of the grid.
    pub fn boundary_max_abs(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&flat| {
                let idx = g.multi_index(flat);
                g.axes()
                    .iter()
                    .enumerate()
                    .any(|(k, a)| idx[k] == 0 || idx[k] + 1 == a.count)
            })
            .map(|flat| self.values[flat].norm())
            .fold(0.0, f64::max)
    }

    /// `boundary_max_abs / max_abs`, zero for the zero function.
    pub fn boundary_decay_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            0.0
        } else {
            self.boundary_max_abs() / m
        }
    }

    /// Multilinear interpolation; zero outside the grid hull.
    pub fn interpolate(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok(self.sample_at(x).unwrap_or_default())
    }

    /// As [`interpolate`](Self::interpolate), counting out-of-hull queries in `ctx`.
    pub fn interpolate_with(&self, x: &[f64], ctx: &EvalContext) -> Result<Complex64> {
        self.check_point(x)?;
        let v = self.sample_at(x);
        ctx.record(1, u64::from(v.is_none()));
        Ok(v.unwrap_or_default())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} for a {}-dimensional grid",
                x.len(),
                self.grid.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("interpolation point {x:?}")));
        }
        Ok(())
    }

    /// Interpolated value, or `None` outside the hull. No validation.
    pub(crate) fn sample_at(&self, x: &[f64]) -> Option<Complex64> {
        match self.grid.dim() {
            1 => self.sample_1d(x[0]),
            _ => {
                let a0 = self.grid.axis(0);
                let a1 = self.grid.axis(1);
                let (i0, f0) = cell(a0, a0.locate(x[0])?);
                let (i1, f1) = cell(a1, a1.locate(x[1])?);
                let n1 = a1.count;
                let v = |i: usize, j: usize| self.values[i * n1 + j];
                let lower = v(i0, i1) * (1.0 - f1) + v(i0, i1 + 1) * f1;
                let upper = v(i0 + 1, i1) * (1.0 - f1) + v(i0 + 1, i1 + 1) * f1;
                Some(lower * (1.0 - f0) + upper * f0)
            }
        }
    }

    pub(crate) fn sample_1d(&self, x: f64) -> Option<Complex64> {
        let axis = self.grid.axis(0);
        let p = axis.locate(x)?;
        let (i, frac) = cell(axis, p);
        if frac == 0.0 {
            return Some(self.values[i]);
        }
        if self.breaks.is_empty() {
            return Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac);
        }
        let a = self.right_value(i);
        let b = self.left_value(i + 1);
        Some(a * (1.0 - frac) + b * frac)
    }

    /// Four-point Lagrange interpolation on a 1-D uniform grid; stencils
    /// never straddle a break, using the one-sided limit at the break node.
    /// Falls back to [`sample_at`](Self::sample_at) on other grids. `None`
    /// outside the hull.
    pub(crate) fn sample_cubic(&self, x: f64) -> Option<Complex64> {
        if self.grid.dim() != 1 || self.grid.axis(0).half_line {
            return self.sample_at(&[x]);
        }
        let axis = self.grid.axis(0);
        let p = axis.locate(x)?;
        let (i, frac) = cell(axis, p);
        if frac == 0.0 {
            return Some(self.values[i]);
        }
        let n = self.values.len();
        let lo = self
            .breaks
            .iter()
            .rev()
            .find(|b| b.index <= i)
            .map_or(0, |b| b.index);
        let hi = self
            .breaks
            .iter()
            .find(|b| b.index > i)
            .map_or(n - 1, |b| b.index);
        let value = |j: usize| {
            if j == lo && j <= i {
                self.right_value(j)
            } else if j == hi && j > i {
                self.left_value(j)
            } else {
                self.values[j]
            }
        };
        if hi - lo < 3 {
            return Some(value(i) * (1.0 - frac) + value(i + 1) * frac);
        }
        let start = i.saturating_sub(1).max(lo).min(hi - 3);
        let x = p - start as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (x - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += value(start + a) * w;
        }
        Some(acc)
    }

    /// Trapezoidal L2 norm, with break corrections on 1-D grids.
    pub fn norm_l2(&self) -> f64 {
        let g = &self.grid;
        let mut sum: f64 = (0..g.len())
            .map(|i| g.weight(i) * self.values[i].norm_sqr())
            .sum();
        if !self.breaks.is_empty() {
            let h = g.axis(0).step();
            for b in &self.breaks {
                let w = g.weight(b.index);
                sum += w * (0.5 * (b.left.norm_sqr() + b.right.norm_sqr()) - self.values[b.index].norm_sqr());
            }
            let sq = |v: Complex64| Complex64::new(v.norm_sqr(), 0.0);
            for b in &self.breaks {
                let (left, right) = self.one_sided_samples(b.index, sq);
                let gl = scaled_derivatives(&left, -1.0);
                let gr = scaled_derivatives(&right, 1.0);
                sum -= h * jump_series(&gl, &gr, Complex64::new(0.0, 0.0)).re;
            }
        }
        sum.max(0.0).sqrt()
    }

    /// Samples of `transform(f)` on each side of break `index`, starting with
    /// the one-sided limit and stopping before the next break or grid end.
    pub(crate) fn one_sided_samples(
        &self,
        index: usize,
        transform: impl Fn(Complex64) -> Complex64,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.values.len();
        let mut left = vec![transform(self.left_value(index))];
        for j in 1..=FIT_DEGREE {
            if j > index || self.break_at(index - j).is_some() {
                break;
            }
            left.push(transform(self.values[index - j]));
        }
        let mut right = vec![transform(self.right_value(index))];
        for j in 1..=FIT_DEGREE {
            if index + j >= n || self.break_at(index + j).is_some() {
                break;
            }
            right.push(transform(self.values[index + j]));
        }
        (left, right)
    }

    /// Largest pointwise modulus of `self - other` on identical grids.
    pub fn distance_linf(&self, other: &SampledFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `|self - other|_inf / |other|_inf`.
    pub fn relative_linf(&self, reference: &SampledFunction) -> Result<f64> {
        let d = self.distance_linf(reference)?;
        let m = reference.max_abs();
        Ok(if m == 0.0 { d } else { d / m })
    }

    /// `|self - other|_2 / |other|_2` (plain trapezoid, breaks ignored).
    pub fn relative_l2(&self, reference: &SampledFunction) -> Result<f64> {
        self.grid.ensure_same(&reference.grid)?;
        let g = &self.grid;
        let (num, den) = (0..g.len()).fold((0.0, 0.0), |(n, d), i| {
            let w = g.weight(i);
            (
                n + w * (self.values[i] - reference.values[i]).norm_sqr(),
                d + w * reference.values[i].norm_sqr(),
            )
        });
        Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
    }
}

/// Value at position 0 of the polynomial through `samples[j]` at positions
/// `1..=samples.len()`.
pub fn extrapolate_limit(samples: &[Complex64]) -> Complex64 {
    let p = samples.len();
    let mut binom = 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in samples.iter().enumerate() {
        let j = j + 1;
        binom *= (p + 1 - j) as f64 / j as f64;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        acc += v * (sign * binom);
    }
    acc
}

/// Cell index and fraction for a fractional node position.
fn cell(axis: &Axis, p: f64) -> (usize, f64) {
    let last = axis.count - 1;
    let i = (p.floor() as usize).min(last - 1);
    (i, p - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn linear_function_is_reproduced() {
        let f = SampledFunction::from_real_fn(Grid::uniform(0.0, 1.0, 11).unwrap(), |x| x[0]).unwrap();
        assert!((f.interpolate(&[0.5]).unwrap() - c(0.5)).norm() < 1e-15);
        assert!((f.interpolate(&[0.37]).unwrap() - c(0.37)).norm() < 1e-15);
    }

    #[test]
    fn outside_hull_is_zero_and_counted() {
        let f = SampledFunction::from_real_fn(Grid::uniform(0.0, 1.0, 11).unwrap(), |_| 1.0).unwrap();
        let ctx = EvalContext::new();
        assert_eq!(f.interpolate_with(&[1.5], &ctx).unwrap(), c(0.0));
        assert_eq!(f.interpolate_with(&[-0.1], &ctx).unwrap(), c(0.0));
        assert_eq!(f.interpolate_with(&[0.5], &ctx).unwrap(), c(1.0));
        assert_eq!(ctx.evaluations(), 3);
        assert_eq!(ctx.out_of_domain(), 2);
        assert!(f.interpolate(&[f64::NAN]).is_err());
    }

    #[test]
    fn quadratic_interpolation_oracle() {
        let f = SampledFunction::from_real_fn(Grid::uniform(0.0, 1.0, 1001).unwrap(), |x| x[0] * x[0])
            .unwrap();
        let x = 0.3333;
        assert!((f.interpolate(&[x]).unwrap().re - x * x).abs() < 1e-6);
    }

    #[test]
    fn bilinear_reproduces_bilinear() {
        let g = Grid::new(vec![
            super::super::Axis::uniform(-1.0, 1.0, 5).unwrap(),
            super::super::Axis::uniform(0.0, 2.0, 7).unwrap(),
        ])
        .unwrap();
        let f = SampledFunction::from_real_fn(g, |x| 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[0] * x[1]).unwrap();
        let (a, b) = (0.13, 1.41);
        let exact = 1.0 + a - 2.0 * b + 0.5 * a * b;
        assert!((f.interpolate(&[a, b]).unwrap().re - exact).abs() < 1e-13);
    }

    #[test]
    fn half_line_interpolates_in_log() {
        let g = Grid::half_line(1e-3, 1e3, 601).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x[0].ln()).unwrap();
        assert!((f.interpolate(&[7.0]).unwrap().re - 7.0f64.ln()).abs() < 1e-13);
        assert_eq!(f.interpolate(&[0.0]).unwrap(), c(0.0));
    }

    #[test]
    fn gaussian_norm() {
        let f = SampledFunction::from_real_fn(Grid::uniform(-20.0, 20.0, 4001).unwrap(), |x| {
            (-x[0] * x[0] / 2.0).exp()
        })
        .unwrap();
        assert!((f.norm_l2() - PI.powf(0.25)).abs() < 1e-8);
        assert_eq!(SampledFunction::zeros(Grid::uniform(0.0, 1.0, 3).unwrap()).norm_l2(), 0.0);
        assert_eq!(f.distance_linf(&f).unwrap(), 0.0);
    }

    #[test]
    fn norm_with_jump_is_corrected() {
        // e^{t/2} on t < 0: squared norm is 1
        let g = Grid::line(super::super::Axis::symmetric(0.02, 3000).unwrap());
        let f = SampledFunction::from_real_fn(g, |t| if t[0] < 0.0 { (t[0] / 2.0).exp() } else { 0.0 })
            .unwrap()
            .with_breaks(vec![Break {
                index: 3000,
                left: c(1.0),
                right: c(0.0),
            }])
            .unwrap();
        assert!((f.norm_l2() - 1.0).abs() < 1e-12);
        assert_eq!(f.values()[3000], c(0.5));
        // interpolation does not smear across the jump
        assert!((f.interpolate(&[0.01]).unwrap()).norm() < 1e-15);
        assert!((f.interpolate(&[-0.01]).unwrap().re - (-0.005f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn cubic_respects_jumps() {
        let g = Grid::line(super::super::Axis::symmetric(0.1, 50).unwrap());
        let f = SampledFunction::from_real_fn(g, |t| if t[0] < 0.0 { (t[0] / 2.0).exp() } else { 0.0 })
            .unwrap()
            .with_breaks(vec![Break { index: 50, left: c(1.0), right: c(0.0) }])
            .unwrap();
        for x in [-0.05, -0.13, -0.77, -2.31] {
            let v = f.sample_cubic(x).unwrap().re;
            assert!((v - (x / 2.0).exp()).abs() < 1e-6, "x = {x}");
        }
        assert_eq!(f.sample_cubic(0.05).unwrap(), c(0.0));
        assert!(f.sample_cubic(6.0).is_none());
    }

    #[test]
    fn extrapolation_reproduces_polynomials() {
        let poly = |x: f64| 2.0 - x + 0.5 * x * x * x;
        let s: Vec<Complex64> = (1..=6).map(|j| c(poly(j as f64))).collect();
        assert!((extrapolate_limit(&s) - c(2.0)).norm() < 1e-11);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = SampledFunction::zeros(Grid::uniform(0.0, 1.0, 3).unwrap());
        let b = SampledFunction::zeros(Grid::uniform(0.0, 1.0, 4).unwrap());
        assert!(a.distance_linf(&b).is_err());
        assert!(SampledFunction::new(Grid::uniform(0.0, 1.0, 3).unwrap(), vec![c(0.0); 2]).is_err());
        assert!(SampledFunction::new(Grid::uniform(0.0, 1.0, 2).unwrap(), vec![c(f64::NAN); 2]).is_err());
    }
}
