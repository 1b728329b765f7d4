//! Direct application of `(H f)(x) = \int K(u) f(A(u) x) du`.
//!
//! Positive-definite families integrate in log coordinates, where the
//! operator reads `\int L(t) e^{sum t / 2} f(e^t x) dt` (with the conjugator
//! applied to `e^t` when present). When `f` lives on a one-dimensional
//! half-line grid and the output is requested on that same grid, `t` is
//! stepped by the grid's log spacing so that every `f(e^t x)` is a node
//! value. Other families are integrated by composite Gauss-Legendre in `u`.

use crate::error::{Error, Result};
use crate::grid::{Axis, Diagnostics, Grid, SampledFunction};
use crate::model::{admissibility_check, to_log_coordinates, AdmissibilityReport, KernelSpec, MatrixFamily};
use crate::par;
use crate::quadrature::{composite, Rule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Integration settings for [`apply`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Log-coordinate truncation `|t| <= t_max`.
    pub t_max: f64,
    /// Log-coordinate step away from the matched mode (1-D).
    pub t_step: f64,
    /// Log-coordinate truncation and step for 2-D positive-definite families.
    pub t_max_2d: f64,
    pub t_step_2d: f64,
    /// Truncation radius of unbounded support intervals in `u`.
    pub u_radius: f64,
    pub u_order: usize,
    pub u_panel: f64,
    pub u_panel_2d: f64,
    /// Largest tolerated ratio of the out-of-domain to the in-domain
    /// contribution, both measured in `L^2` over the x-grid.
    pub out_of_domain_limit: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            t_max: 30.0,
            t_step: 0.002,
            t_max_2d: 10.0,
            t_step_2d: 0.05,
            u_radius: 10.0,
            u_order: 8,
            u_panel: 0.25,
            u_panel_2d: 0.5,
            out_of_domain_limit: 0.1,
        }
    }
}

/// A Hausdorff operator with checked admissibility.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    kernel: KernelSpec,
    family: MatrixFamily,
    settings: QuadratureSettings,
    admissibility: AdmissibilityReport,
}

impl OperatorSpec {
    pub fn new(kernel: KernelSpec, family: MatrixFamily) -> Result<Self> {
        Self::with_settings(kernel, family, QuadratureSettings::default())
    }

    pub fn with_settings(kernel: KernelSpec, family: MatrixFamily, settings: QuadratureSettings) -> Result<Self> {
        let admissibility = admissibility_check(&kernel, &family)?;
        if !admissibility.admissible {
            return Err(Error::Inadmissible(format!(
                "kernel {}: integral estimate {:.3e}, tail ratio {:.3e} at window {}",
                kernel.label(),
                admissibility.bound,
                admissibility.tail_ratio,
                admissibility.window
            )));
        }
        Ok(Self {
            kernel,
            family,
            settings,
            admissibility,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn family(&self) -> &MatrixFamily {
        &self.family
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.admissibility
    }

    pub fn set_settings(&mut self, settings: QuadratureSettings) {
        self.settings = settings;
    }
}

/// Result of [`apply_with`] together with its diagnostics.
#[derive(Debug, Clone)]
pub struct Applied {
    pub result: SampledFunction,
    pub evaluations: u64,
    pub out_of_domain: u64,
    /// Weighted out-of-domain mass relative to in-domain mass.
    pub out_of_domain_fraction: f64,
    /// Sum of the per-step fractions for iterated application.
    pub accumulated_fraction: f64,
    pub diagnostics: Diagnostics,
}

/// `H f` on `x_grid`.
pub fn apply(op: &OperatorSpec, f: &SampledFunction, x_grid: &Grid) -> Result<SampledFunction> {
    apply_with(op, f, x_grid).map(|a| a.result)
}

/// `H^l f`, re-sampling each iterate on `x_grid`.
pub fn apply_iterated(op: &OperatorSpec, l: usize, f: &SampledFunction, x_grid: &Grid) -> Result<SampledFunction> {
    apply_iterated_with(op, l, f, x_grid).map(|a| a.result)
}

pub fn apply_iterated_with(op: &OperatorSpec, l: usize, f: &SampledFunction, x_grid: &Grid) -> Result<Applied> {
    if l == 0 {
        return Err(Error::InvalidArgument("iteration count must be positive".into()));
    }
    let mut out = apply_with(op, f, x_grid)?;
    let mut accumulated = out.out_of_domain_fraction;
    for _ in 1..l {
        let mut next = apply_with(op, &out.result, x_grid)?;
        accumulated += next.out_of_domain_fraction;
        next.evaluations += out.evaluations;
        next.out_of_domain += out.out_of_domain;
        next.diagnostics.extend(out.diagnostics);
        out = next;
    }
    out.accumulated_fraction = accumulated;
    Ok(out)
}

/// Per-x partial sums: value, in-domain mass, out-of-domain mass, counts.
struct Partial {
    value: Complex64,
    inside: f64,
    outside: f64,
    evaluations: u64,
    missed: u64,
}

impl Partial {
    fn new() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            inside: 0.0,
            outside: 0.0,
            evaluations: 0,
            missed: 0,
        }
    }

    /// Adds `w f(y)`; off the grid, `|w|` times [`edge_value`] counts as
    /// out-of-domain mass.
    fn add(&mut self, w: f64, f: &SampledFunction, y: &[f64]) {
        self.evaluations += 1;
        match f.sample_at(y) {
            Some(v) => {
                self.value += w * v;
                self.inside += (w * v).norm();
            }
            None => {
                self.missed += 1;
                self.outside += w.abs() * edge_value(f, y);
            }
        }
    }
}

/// Stand-in for `|f(y)|` off the grid: the value at the nearest hull point,
/// decaying like `|y|^(-1/2)` past the far ends (the slowest decay an `L^2`
/// tail can sustain).
fn edge_value(f: &SampledFunction, y: &[f64]) -> f64 {
    let mut decay = 1.0;
    let clamped: Vec<f64> = y
        .iter()
        .zip(f.grid().axes())
        .map(|(&v, a)| {
            let c = v.clamp(a.min, a.max);
            if c != 0.0 && v.abs() > c.abs() {
                decay *= (c.abs() / v.abs()).sqrt();
            }
            c
        })
        .collect();
    f.sample_at(&clamped).map_or(0.0, |v| v.norm() * decay)
}

pub fn apply_with(op: &OperatorSpec, f: &SampledFunction, x_grid: &Grid) -> Result<Applied> {
    let dim = op.family.dim();
    if f.grid().dim() != dim || x_grid.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "family dimension {dim}, f dimension {}, x-grid dimension {}",
            f.grid().dim(),
            x_grid.dim()
        )));
    }
    let partials: Vec<Partial> = if op.kernel.is_zero() {
        (0..x_grid.len()).map(|_| Partial::new()).collect()
    } else if op.family.is_positive_definite() {
        if dim == 1 && f.grid().axis(0).half_line && x_grid == f.grid() {
            matched(op, f)?
        } else {
            log_general(op, f, x_grid)?
        }
    } else {
        u_general(op, f, x_grid)?
    };
    let mut diagnostics = Diagnostics::default();
    let (mut num, mut den) = (0.0, 0.0);
    let (mut evaluations, mut missed) = (0, 0);
    for (i, p) in partials.iter().enumerate() {
        let w = x_grid.weight(i);
        num += w * p.outside * p.outside;
        den += w * p.inside * p.inside;
        evaluations += p.evaluations;
        missed += p.missed;
    }
    let fraction = if num == 0.0 { 0.0 } else { (num / den).sqrt() };
    if fraction > op.settings.out_of_domain_limit {
        return Err(Error::OutOfDomain {
            fraction,
            limit: op.settings.out_of_domain_limit,
            detail: format!(
                "{missed} of {evaluations} evaluations of f fell outside its grid; widen the f grid"
            ),
        });
    }
    if missed > 0 {
        diagnostics.warn(format!(
            "apply: {missed} of {evaluations} evaluations outside the f grid (mass fraction {fraction:.3e})"
        ));
    }
    let result = SampledFunction::new(x_grid.clone(), partials.iter().map(|p| p.value).collect())?;
    Ok(Applied {
        result,
        evaluations,
        out_of_domain: missed,
        out_of_domain_fraction: fraction,
        accumulated_fraction: fraction,
        diagnostics,
    })
}

/// Trapezoid weights `h L(t) e^{t/2}` on `t = k h`, `|t| <= t_max`.
fn log_weights(op: &OperatorSpec, h: f64, t_max: f64) -> Result<(Grid, Vec<f64>)> {
    let half = (t_max / h).floor() as usize;
    let t = Grid::symmetric(1, h, half)?;
    let l = to_log_coordinates(&op.kernel, &op.family, (1, 1), &t)?;
    let w = (0..t.len())
        .map(|k| {
            let tk = t.point(k)[0];
            h * l.values()[k].re * (0.5 * tk).exp()
        })
        .collect();
    Ok((t, w))
}

fn matched(op: &OperatorSpec, f: &SampledFunction) -> Result<Vec<Partial>> {
    let axis = f.grid().axis(0);
    let h = axis.step();
    let (_, w) = log_weights(op, h, op.settings.t_max)?;
    let half = (w.len() - 1) / 2;
    let n = axis.count as isize;
    let values = f.values();
    let (first, last) = (values[0].norm(), values[axis.count - 1].norm());
    Ok(par::map_range(axis.count, |i| {
        let mut p = Partial::new();
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let j = i as isize + k as isize - half as isize;
            p.evaluations += 1;
            if (0..n).contains(&j) {
                let v = values[j as usize];
                p.value += wk * v;
                p.inside += (wk * v).norm();
            } else {
                p.missed += 1;
                p.outside += wk.abs()
                    * if j < 0 {
                        first
                    } else {
                        last * (-0.5 * (j - n + 1) as f64 * h).exp()
                    };
            }
        }
        p
    }))
}

fn log_general(op: &OperatorSpec, f: &SampledFunction, x_grid: &Grid) -> Result<Vec<Partial>> {
    let dim = op.family.dim();
    let s = &op.settings;
    if dim == 1 {
        let (t, w) = log_weights(op, s.t_step, s.t_max)?;
        let scales: Vec<(f64, f64)> = (0..t.len())
            .filter(|&k| w[k] != 0.0)
            .map(|k| (t.point(k)[0].exp(), w[k]))
            .collect();
        return Ok(par::map_range(x_grid.len(), |i| {
            let x = x_grid.point(i)[0];
            let mut p = Partial::new();
            for &(e, wk) in &scales {
                p.add(wk, f, &[e * x]);
            }
            p
        }));
    }
    let half = (s.t_max_2d / s.t_step_2d).floor() as usize;
    let t = Grid::symmetric(dim, s.t_step_2d, half)?;
    let l = to_log_coordinates(&op.kernel, &op.family, (1, 1), &t)?;
    let mut nodes = Vec::new();
    for k in 0..t.len() {
        let v = l.values()[k].re;
        if v == 0.0 {
            continue;
        }
        let tk = t.point(k);
        let e: Vec<f64> = tk.iter().map(|x| x.exp()).collect();
        let sum: f64 = tk.iter().sum();
        nodes.push((e, t.weight(k) * v * (0.5 * sum).exp()));
    }
    Ok(par::map_range(x_grid.len(), |i| {
        let x = x_grid.point(i);
        let mut p = Partial::new();
        for (e, wk) in &nodes {
            let y = op.family.apply_eigenvalues(e, &x);
            p.add(*wk, f, &y);
        }
        p
    }))
}

fn u_rule(op: &OperatorSpec, k: usize) -> Rule {
    let s = &op.settings;
    let (lo, hi) = op.kernel.support_bounds(k);
    let lo = lo.max(-s.u_radius);
    let hi = hi.min(s.u_radius);
    let panel = if op.family.dim() == 1 { s.u_panel } else { s.u_panel_2d };
    let mut breaks = op.kernel.breakpoints(k);
    breaks.push(0.0);
    composite(lo, hi, panel, s.u_order, &breaks, true)
}

fn u_general(op: &OperatorSpec, f: &SampledFunction, x_grid: &Grid) -> Result<Vec<Partial>> {
    let dim = op.family.dim();
    let rules: Vec<Rule> = (0..dim).map(|k| u_rule(op, k)).collect();
    let mut nodes = Vec::new();
    let mut push = |u: Vec<f64>, w: f64| -> Result<()> {
        let k = op.kernel.evaluate(&u)?;
        if k != 0.0 {
            let a = op.family.eigenvalues(&u)?;
            nodes.push((a, w * k));
        }
        Ok(())
    };
    match dim {
        1 => {
            for (&u, &w) in rules[0].nodes.iter().zip(&rules[0].weights) {
                push(vec![u], w)?;
            }
        }
        _ => {
            for (&u0, &w0) in rules[0].nodes.iter().zip(&rules[0].weights) {
                for (&u1, &w1) in rules[1].nodes.iter().zip(&rules[1].weights) {
                    push(vec![u0, u1], w0 * w1)?;
                }
            }
        }
    }
    Ok(par::map_range(x_grid.len(), |i| {
        let x = x_grid.point(i);
        let mut p = Partial::new();
        for (a, w) in &nodes {
            let y = op.family.apply_eigenvalues(a, &x);
            p.add(*w, f, &y);
        }
        p
    }))
}

/// Log-uniform half-line grid `[min, max]` with `count` nodes, the layout
/// that enables the matched mode of [`apply`].
pub fn half_line_grid(min: f64, max: f64, count: usize) -> Result<Grid> {
    Ok(Grid::line(Axis::half_line(min, max, count)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn cesaro_on_identity() {
        let (k, fam) = presets::cesaro();
        let op = OperatorSpec::new(k, fam).unwrap();
        let g = Grid::uniform(0.0, 10.0, 2001).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| x[0]).unwrap();
        let x = Grid::uniform(1.0, 3.0, 3).unwrap();
        let y = apply(&op, &f, &x).unwrap();
        assert!((y.values()[1].re - 1.0).abs() < 1e-4, "{}", y.values()[1]);
        let y2 = apply_iterated(&op, 2, &f, &g).unwrap();
        let i = g.axis(0).node_index(2.0, 1e-9).unwrap();
        assert!((y2.values()[i].re - 0.5).abs() < 1e-3);
    }

    #[test]
    fn calderon_on_indicator() {
        let (k, fam) = presets::calderon();
        let op = OperatorSpec::new(k, fam).unwrap();
        let g = Grid::uniform(0.0, 50.0, 50001).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| if x[0] < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let x = Grid::uniform(0.5, 0.6, 2).unwrap();
        let y = apply(&op, &f, &x).unwrap();
        assert!((y.values()[0].re - (1.0 + 2f64.ln())).abs() < 1e-3, "{}", y.values()[0]);
    }

    #[test]
    fn zero_kernel_and_domain_errors() {
        let fam = presets::dilation_family();
        let op = OperatorSpec::new(KernelSpec::zero(1), fam).unwrap();
        let g = Grid::uniform(0.0, 1.0, 11).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| x[0]).unwrap();
        assert_eq!(apply(&op, &f, &g).unwrap().max_abs(), 0.0);
        // f = 1 on [0.9, 1] only covers a sliver of u x
        let (k, fam) = presets::calderon();
        let op = OperatorSpec::new(k, fam).unwrap();
        let g = Grid::uniform(0.9, 1.0, 11).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |_| 1.0).unwrap();
        assert!(matches!(apply(&op, &f, &g), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn matched_mode_reproduces_cesaro() {
        let (k, fam) = presets::cesaro();
        let op = OperatorSpec::new(k, fam).unwrap();
        let g = half_line_grid(1e-4, 1e4, 4096).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-(x[0] - 2.0).powi(2)).exp()).unwrap();
        let y = apply(&op, &f, &g).unwrap();
        // (1/x) \int_0^x f
        let x = g.axis(0).coordinate(3000);
        let exact = 0.5 * std::f64::consts::PI.sqrt() * (erf(x - 2.0) + erf(2.0)) / x;
        assert!((y.values()[3000].re - exact).abs() < 1e-4 * exact.abs().max(1e-3), "x = {x}");
    }

    fn erf(x: f64) -> f64 {
        let n = 20000;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = 0.5 * (f(0.0) + f(x));
        for k in 1..n {
            s += f(k as f64 * h);
        }
        2.0 / std::f64::consts::PI.sqrt() * s * h
    }
}
