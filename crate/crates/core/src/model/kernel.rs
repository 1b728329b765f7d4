use super::expr::Expr;
use super::family::MatrixFamily;
use super::octant::{mask_signs, octant_count, sign_mask};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use num_complex::Complex64;

/// Where a kernel may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Full,
    /// 1-based octant indices.
    Octants(Vec<usize>),
    /// Per-axis open intervals; infinite ends allowed.
    Box(Vec<(f64, f64)>),
}

impl Support {
    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            Support::Full => true,
            Support::Octants(list) => sign_mask(u).is_some_and(|m| list.contains(&(m + 1))),
            Support::Box(bounds) => u.iter().zip(bounds).all(|(&x, &(lo, hi))| x > lo && x < hi),
        }
    }

    /// Interval hull of the support along axis `k`.
    pub fn bounds(&self, k: usize, dim: usize) -> (f64, f64) {
        match self {
            Support::Full => (f64::NEG_INFINITY, f64::INFINITY),
            Support::Box(b) => b[k],
            Support::Octants(list) => {
                let signs: Vec<i8> = list.iter().map(|&i| mask_signs(i - 1, dim)[k]).collect();
                let lo = if signs.iter().all(|&s| s > 0) { 0.0 } else { f64::NEG_INFINITY };
                let hi = if signs.iter().all(|&s| s < 0) { 0.0 } else { f64::INFINITY };
                (lo, hi)
            }
        }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Support::Full => Ok(()),
            Support::Octants(list) => {
                if let Some(&bad) = list.iter().find(|&&i| i == 0 || i > octant_count(dim)) {
                    return Err(Error::Config(format!("octant {bad} outside 1..={}", octant_count(dim))));
                }
                Ok(())
            }
            Support::Box(b) => {
                if b.len() != dim || b.iter().any(|(lo, hi)| !(lo < hi)) {
                    return Err(Error::Config(format!("support box {b:?} for dimension {dim}")));
                }
                Ok(())
            }
        }
    }
}

/// Kernel stored in log coordinates: one `Q_eps(t)` per sign class.
#[derive(Debug, Clone, PartialEq)]
pub struct LogKernel {
    pub family: MatrixFamily,
    /// Indexed by sign-class mask; `None` means zero on that class.
    pub classes: Vec<Option<SampledFunction>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    Expression(Expr),
    /// Samples over `u`; zero outside the grid hull.
    Tabulated(SampledFunction),
    LogTabulated(LogKernel),
}

/// A kernel `K(u)` on `R^n` with its declared support.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    dim: usize,
    source: KernelSource,
    support: Support,
    label: String,
}

impl KernelSpec {
    pub fn expression(dim: usize, expr: Expr, support: Support) -> Result<Self> {
        expr.check_dimension(dim)?;
        support.validate(dim)?;
        Ok(Self {
            dim,
            label: expr.to_string(),
            source: KernelSource::Expression(expr),
            support,
        })
    }

    pub fn parse(dim: usize, text: &str, support: Support) -> Result<Self> {
        Self::expression(dim, Expr::parse(text)?, support)
    }

    pub fn tabulated(f: SampledFunction, support: Support) -> Result<Self> {
        let dim = f.grid().dim();
        support.validate(dim)?;
        Ok(Self {
            dim,
            source: KernelSource::Tabulated(f),
            support,
            label: "tabulated".into(),
        })
    }

    pub fn log_tabulated(kernel: LogKernel) -> Result<Self> {
        let dim = kernel.family.dim();
        if kernel.classes.len() != octant_count(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} log-kernel classes for dimension {dim}",
                kernel.classes.len()
            )));
        }
        for q in kernel.classes.iter().flatten() {
            if q.grid().dim() != dim || q.grid().axes().iter().any(|a| a.half_line) {
                return Err(Error::InvalidGrid("log kernels need uniform t-grids".into()));
            }
        }
        Ok(Self {
            dim,
            source: KernelSource::LogTabulated(kernel),
            support: Support::Full,
            label: "log-tabulated".into(),
        })
    }

    /// The zero kernel.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            source: KernelSource::Expression(Expr::Num(0.0)),
            support: Support::Full,
            label: "0".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &KernelSource {
        &self.source
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        match &self.source {
            KernelSource::Expression(Expr::Num(x)) => *x == 0.0,
            KernelSource::Tabulated(f) => f.max_abs() == 0.0,
            KernelSource::LogTabulated(k) => k.classes.iter().flatten().all(|q| q.max_abs() == 0.0),
            _ => false,
        }
    }

    /// `K(u)`; zero outside the declared support.
    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} for a {}-dimensional kernel",
                u.len(),
                self.dim
            )));
        }
        if !self.support.contains(u) {
            return Ok(0.0);
        }
        let v = match &self.source {
            KernelSource::Expression(e) => e.eval(u, &[]),
            KernelSource::Tabulated(f) => f.sample_at(u).unwrap_or_default().re,
            KernelSource::LogTabulated(k) => k.evaluate(u)?,
        };
        if v.is_nan() {
            return Err(Error::Evaluation(format!("kernel {} is NaN at u = {u:?}", self.label)));
        }
        Ok(v)
    }

    /// Candidate non-smooth points along axis `k`, support ends included.
    pub fn breakpoints(&self, k: usize) -> Vec<f64> {
        let mut out = match &self.source {
            KernelSource::Expression(e) => e.breakpoints(k),
            _ => Vec::new(),
        };
        let (lo, hi) = self.support.bounds(k, self.dim);
        out.extend([lo, hi].into_iter().filter(|x| x.is_finite()));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Interval hull of the support along axis `k`, tightened by indicator
    /// factors and tabulation ranges.
    pub fn support_bounds(&self, k: usize) -> (f64, f64) {
        let (mut lo, mut hi) = self.support.bounds(k, self.dim);
        match &self.source {
            KernelSource::Expression(e) => {
                let (l, h) = e.indicator_bounds(k);
                lo = lo.max(l);
                hi = hi.min(h);
            }
            KernelSource::Tabulated(f) => {
                let (l, h) = f.grid().axis(k).sampling_bounds();
                lo = lo.max(l);
                hi = hi.min(h);
            }
            KernelSource::LogTabulated(_) => {}
        }
        (lo, hi)
    }
}

impl LogKernel {
    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        let a = self.family.eigenvalues(u)?;
        let Some(class) = sign_mask(&a) else {
            return Ok(0.0);
        };
        let Some(q) = &self.classes[class] else {
            return Ok(0.0);
        };
        let t: Vec<f64> = a.iter().map(|x| x.abs().ln()).collect();
        let value = match t.len() {
            1 => q.sample_cubic(t[0]),
            _ => q.sample_at(&t),
        };
        let Some(value) = value else {
            return Ok(0.0);
        };
        let jac = self.family.inverse_for_class(class)?.jacobian_at(&t).abs();
        let sum: f64 = t.iter().sum();
        Ok((0.5 * sum).exp() * value.re / jac)
    }

    pub fn class(&self, mask: usize) -> Option<&SampledFunction> {
        self.classes.get(mask).and_then(Option::as_ref)
    }

    pub(crate) fn value_at(&self, mask: usize, t: &[f64]) -> Complex64 {
        match self.class(mask) {
            Some(q) if t.len() == 1 => q.sample_cubic(t[0]).unwrap_or_default(),
            Some(q) => q.sample_at(t).unwrap_or_default(),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_masks_evaluation() {
        let k = KernelSpec::parse(1, "1/(u*max(1,u))", Support::Box(vec![(0.0, f64::INFINITY)])).unwrap();
        assert_eq!(k.evaluate(&[2.0]).unwrap(), 0.25);
        assert_eq!(k.evaluate(&[-2.0]).unwrap(), 0.0);
        assert_eq!(k.breakpoints(0), vec![0.0, 1.0]);
    }

    #[test]
    fn octant_support_bounds() {
        let s = Support::Octants(vec![1, 3]);
        assert_eq!(s.bounds(0, 2), (0.0, f64::INFINITY));
        assert_eq!(s.bounds(1, 2), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(s.contains(&[1.0, -1.0]));
        assert!(!s.contains(&[-1.0, 1.0]));
    }

    #[test]
    fn indicator_bounds_tighten_support() {
        let k = KernelSpec::parse(1, "chi(-1,0)(u)", Support::Full).unwrap();
        assert_eq!(k.support_bounds(0), (-1.0, 0.0));
        assert!(KernelSpec::zero(2).is_zero());
    }
}
