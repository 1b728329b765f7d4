use super::breaks::{jump_series, scaled_derivatives};
use super::{Diagnostics, Grid, SampledFunction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Boundary-to-peak ratio above which the transforms warn about truncation.
pub const DECAY_WARN_RATIO: f64 = 1e-12;

/// Re-seed interval of the phase recurrence.
const RESEED: usize = 32;

/// `hat g(s) = \int g(t) exp(-i s.t) dt` by the trapezoid rule on the
/// t-grid, evaluated at every node of `s_grid`.
///
/// On one-dimensional grids, declared breaks of `g` receive Euler-Maclaurin
/// jump corrections, so piecewise-smooth inputs converge at the smooth rate.
pub fn fourier_forward(g: &SampledFunction, s_grid: &Grid) -> Result<SampledFunction> {
    fourier_forward_with(g, s_grid, &mut Diagnostics::default())
}

pub fn fourier_forward_with(
    g: &SampledFunction,
    s_grid: &Grid,
    diagnostics: &mut Diagnostics,
) -> Result<SampledFunction> {
    transform(g, s_grid, -1.0, 1.0, "fourier_forward", diagnostics)
}

/// `g(t) = (2 pi)^-n \int hat g(s) exp(i s.t) ds`, trapezoidal.
pub fn fourier_inverse(hat: &SampledFunction, t_grid: &Grid) -> Result<SampledFunction> {
    fourier_inverse_with(hat, t_grid, &mut Diagnostics::default())
}

pub fn fourier_inverse_with(
    hat: &SampledFunction,
    t_grid: &Grid,
    diagnostics: &mut Diagnostics,
) -> Result<SampledFunction> {
    let scale = (2.0 * PI).powi(-(hat.grid().dim() as i32));
    transform(hat, t_grid, 1.0, scale, "fourier_inverse", diagnostics)
}

fn transform(
    g: &SampledFunction,
    out_grid: &Grid,
    sign: f64,
    scale: f64,
    what: &str,
    diagnostics: &mut Diagnostics,
) -> Result<SampledFunction> {
    if g.grid().is_empty() || out_grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{what}: empty grid")));
    }
    if g.grid().dim() != out_grid.dim() {
        return Err(Error::GridMismatch(format!(
            "{what}: input dimension {} vs output dimension {}",
            g.grid().dim(),
            out_grid.dim()
        )));
    }
    g.grid().ensure_uniform(what)?;
    out_grid.ensure_uniform(what)?;
    let ratio = g.boundary_decay_ratio();
    if ratio > DECAY_WARN_RATIO {
        diagnostics.warn(format!(
            "{what}: input boundary/peak ratio {ratio:.3e} exceeds {DECAY_WARN_RATIO:.0e}"
        ));
    }
    let values = match g.grid().dim() {
        1 => {
            let tails = if ratio > DECAY_WARN_RATIO {
                algebraic_tails(g)
            } else {
                Vec::new()
            };
            if !tails.is_empty() {
                let exponents: Vec<String> = tails.iter().map(|t| format!("{:.3}", t.exponent)).collect();
                diagnostics.warn(format!(
                    "{what}: algebraic tail extrapolation applied (exponents {})",
                    exponents.join(", ")
                ));
            }
            let mut v = transform_1d(g, out_grid, sign);
            if !tails.is_empty() {
                let axis = *out_grid.axis(0);
                let extra = crate::par::map_range(axis.count, |k| {
                    let s = axis.sample_coord(k);
                    tails.iter().map(|t| t.integral(sign * s)).sum::<Complex64>()
                });
                for (a, b) in v.iter_mut().zip(extra) {
                    *a += b;
                }
            }
            v
        }
        _ => transform_2d(g, out_grid, sign),
    };
    let values = values.into_iter().map(|v| v * scale).collect();
    SampledFunction::new(out_grid.clone(), values)
}

/// Trapezoid-weighted samples along one axis.
fn weighted(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = if j == 0 || j + 1 == n { 0.5 * h } else { h };
            v * w
        })
        .collect()
}

/// `sum_j a_j exp(i sign s t_j)` with `t_j = t0 + j h`.
fn phase_sum(a: &[Complex64], t0: f64, h: f64, s: f64, sign: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, sign * s * h);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut j = 0;
    while j < a.len() {
        let mut phase = Complex64::from_polar(1.0, sign * s * (t0 + j as f64 * h));
        let end = (j + RESEED).min(a.len());
        for v in &a[j..end] {
            acc += v * phase;
            phase *= step;
        }
        j = end;
    }
    acc
}

struct BreakCorrection {
    position: f64,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

fn transform_1d(g: &SampledFunction, out_grid: &Grid, sign: f64) -> Vec<Complex64> {
    let axis = g.grid().axis(0);
    let h = axis.step();
    let t0 = axis.sample_coord(0);
    let a = weighted(g.values(), h);
    let n = g.values().len();
    let corrections: Vec<BreakCorrection> = g
        .breaks()
        .iter()
        .filter(|b| b.index > 0 && b.index + 1 < n)
        .map(|b| {
            let (left, right) = g.one_sided_samples(b.index, |v| v);
            BreakCorrection {
                position: axis.sample_coord(b.index),
                left: scaled_derivatives(&left, -1.0),
                right: scaled_derivatives(&right, 1.0),
            }
        })
        .collect();
    let out_axis = *out_grid.axis(0);
    crate::par::map_range(out_axis.count, |k| {
        let s = out_axis.sample_coord(k);
        let mut v = phase_sum(&a, t0, h, s, sign);
        let w = Complex64::new(0.0, sign * s);
        for c in &corrections {
            let series = jump_series(&c.left, &c.right, w * h);
            if series != Complex64::new(0.0, 0.0) {
                v -= h * (w * c.position).exp() * series;
            }
        }
        v
    })
}

/// Continuation of a slowly decaying input beyond one end of its grid,
/// modelled as `g(e) (|x| / |e|)^-p` for `|x| > |e|`.
struct AlgebraicTail {
    edge: f64,
    value: Complex64,
    exponent: f64,
}

impl AlgebraicTail {
    /// `\int_{beyond} g(x) exp(i w x) dx`.
    fn integral(&self, w: f64) -> Complex64 {
        let e = self.edge.abs();
        let omega = w * self.edge;
        self.value * e * tail_kernel(omega, self.exponent)
    }
}

fn algebraic_tails(g: &SampledFunction) -> Vec<AlgebraicTail> {
    let axis = g.grid().axis(0);
    let n = axis.count;
    if n < 3 {
        return Vec::new();
    }
    let v = g.values();
    [(0, 1), (n - 1, n - 2)]
        .into_iter()
        .filter_map(|(end, inner)| {
            let (e, ei) = (axis.sample_coord(end), axis.sample_coord(inner));
            // the continuation must move away from the origin
            if e.abs() <= ei.abs() || ei == 0.0 || v[end].norm() == 0.0 || v[inner].norm() == 0.0 {
                return None;
            }
            let p = (v[inner].norm() / v[end].norm()).ln() / (e.abs() / ei.abs()).ln();
            (p.is_finite() && p > 1.001 && p < 64.0).then_some(AlgebraicTail {
                edge: e,
                value: v[end],
                exponent: p,
            })
        })
        .collect()
}

/// `\int_1^inf x^-p exp(i omega x) dx` for `p > 1`, by rotating the path
/// onto `x = 1 + i sgn(omega) z`.
fn tail_kernel(omega: f64, p: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(1.0 / (p - 1.0), 0.0);
    }
    let sigma = omega.signum();
    let decay = omega.abs();
    let (gx, gw) = crate::quadrature::gauss_legendre(16);
    let mut acc = Complex64::new(0.0, 0.0);
    let (mut a, mut width) = (0.0, (1.0 / decay).min(1.0));
    loop {
        let b = a + width;
        for (x, w) in gx.iter().zip(&gw) {
            let z = a + 0.5 * width * (1.0 + x);
            let base = Complex64::new(1.0, sigma * z);
            acc += (-p * base.ln()).exp() * (-decay * z).exp() * (0.5 * width * w);
        }
        a = b;
        width *= 2.0;
        if decay * a > 40.0 || a.powf(1.0 - p) < 1e-16 {
            break;
        }
    }
    Complex64::new(0.0, sigma) * Complex64::from_polar(1.0, omega) * acc
}

fn transform_2d(g: &SampledFunction, out_grid: &Grid, sign: f64) -> Vec<Complex64> {
    let (a0, a1) = (g.grid().axis(0), g.grid().axis(1));
    let (n0, n1) = (a0.count, a1.count);
    let (o0, o1) = (*out_grid.axis(0), *out_grid.axis(1));
    let (h0, h1) = (a0.step(), a1.step());
    let (t00, t10) = (a0.sample_coord(0), a1.sample_coord(0));
    // inner transform along axis 1, one row of the input at a time
    let rows: Vec<Vec<Complex64>> = crate::par::map_range(n0, |i| {
        let row = weighted(&g.values()[i * n1..(i + 1) * n1], h1);
        (0..o1.count)
            .map(|k| phase_sum(&row, t10, h1, o1.sample_coord(k), sign))
            .collect()
    });
    let out: Vec<Vec<Complex64>> = crate::par::map_range(o1.count, |k| {
        let column: Vec<Complex64> = (0..n0).map(|i| rows[i][k]).collect();
        let column = weighted(&column, h0);
        (0..o0.count)
            .map(|m| phase_sum(&column, t00, h0, o0.sample_coord(m), sign))
            .collect()
    });
    let mut values = vec![Complex64::new(0.0, 0.0); o0.count * o1.count];
    for (k, col) in out.into_iter().enumerate() {
        for (m, v) in col.into_iter().enumerate() {
            values[m * o1.count + k] = v;
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::super::{Axis, Break};
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn abs_exponential_at_zero() {
        let g = Grid::line(Axis::symmetric(0.01, 6000).unwrap());
        let f = SampledFunction::from_real_fn(g, |t| (-t[0].abs() / 2.0).exp())
            .unwrap()
            .with_breaks(vec![Break::kink(6000, c(1.0))])
            .unwrap();
        let s = Grid::uniform(-1.0, 1.0, 3).unwrap();
        let hat = fourier_forward(&f, &s).unwrap();
        assert!((hat.values()[1] - c(4.0)).norm() < 1e-6);
        // 1/(s^2 + 1/4) elsewhere too
        assert!((hat.values()[2] - c(1.0 / 1.25)).norm() < 1e-6);
    }

    #[test]
    fn gaussian_transform() {
        let g = Grid::uniform(-20.0, 20.0, 4001).unwrap();
        let f = SampledFunction::from_real_fn(g, |t| (-t[0] * t[0] / 2.0).exp()).unwrap();
        let hat = fourier_forward(&f, &Grid::uniform(0.0, 2.0, 3).unwrap()).unwrap();
        let expected = (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!((hat.values()[1] - c(expected)).norm() < 1e-8);
        assert!(hat.values()[1].im.abs() < 1e-14);
    }

    #[test]
    fn zero_maps_to_zero() {
        let f = SampledFunction::zeros(Grid::uniform(-1.0, 1.0, 11).unwrap());
        let hat = fourier_forward(&f, &Grid::uniform(-3.0, 3.0, 7).unwrap()).unwrap();
        assert_eq!(hat.max_abs(), 0.0);
        let back = fourier_inverse(&hat, &Grid::uniform(-1.0, 1.0, 5).unwrap()).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }

    #[test]
    fn lorentzian_inverse_at_origin() {
        let s = Grid::uniform(-200.0, 200.0, 40001).unwrap();
        let hat = SampledFunction::from_real_fn(s, |s| 1.0 / (s[0] * s[0] + 0.25)).unwrap();
        let t = Grid::uniform(-1.0, 1.0, 3).unwrap();
        let mut diag = Diagnostics::default();
        let back = fourier_inverse_with(&hat, &t, &mut diag).unwrap();
        assert!((back.values()[1] - c(1.0)).norm() < 1e-3);
        assert!(!diag.warnings.is_empty(), "slow tail should be flagged");
    }

    #[test]
    fn tail_kernel_against_direct_quadrature() {
        // independent check: truncated trapezoid of x^-3 e^{i omega x} on [1, 400]
        for omega in [0.0, 0.7, -2.5] {
            let h = 1e-3;
            let n = 399_000;
            let f = |x: f64| Complex64::from_polar(x.powi(-3), omega * x);
            let mut direct = (f(1.0) + f(400.0)) * 0.5;
            for k in 1..n {
                direct += f(1.0 + k as f64 * h);
            }
            direct *= h;
            assert!((tail_kernel(omega, 3.0) - direct).norm() < 1e-5, "omega {omega}");
        }
    }

    #[test]
    fn gaussian_round_trip() {
        let t = Grid::uniform(-12.0, 12.0, 1201).unwrap();
        let f = SampledFunction::from_real_fn(t.clone(), |t| (-t[0] * t[0] / 2.0).exp()).unwrap();
        let s = Grid::uniform(-12.0, 12.0, 1201).unwrap();
        let back = fourier_inverse(&fourier_forward(&f, &s).unwrap(), &t).unwrap();
        assert!(back.relative_linf(&f).unwrap() < 1e-6);
    }

    #[test]
    fn separable_two_dimensional_gaussian() {
        let g = Grid::symmetric(2, 0.1, 100).unwrap();
        let f = SampledFunction::from_real_fn(g, |t| (-(t[0] * t[0] + t[1] * t[1]) / 2.0).exp()).unwrap();
        let s = Grid::new(vec![Axis::uniform(0.0, 1.0, 2).unwrap(), Axis::uniform(-2.0, 2.0, 3).unwrap()])
            .unwrap();
        let hat = fourier_forward(&f, &s).unwrap();
        for flat in 0..s.len() {
            let p = s.point(flat);
            let exact = 2.0 * PI * (-(p[0] * p[0] + p[1] * p[1]) / 2.0).exp();
            assert!((hat.values()[flat] - c(exact)).norm() < 1e-10);
        }
    }

    #[test]
    fn half_line_input_is_rejected() {
        let f = SampledFunction::zeros(Grid::half_line(0.1, 1.0, 5).unwrap());
        assert!(fourier_forward(&f, &Grid::uniform(0.0, 1.0, 2).unwrap()).is_err());
    }
}
