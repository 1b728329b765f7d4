//! Discrete transform pair on symmetric grids.
//!
//! For a symmetric t-axis with `N = 2M + 1` nodes of step `h`, the paired
//! s-axis has nodes `s_m = 2 pi (m - M) / (N h)`. The forward map is the
//! periodic trapezoid sum `h sum_k g_k exp(-i s_m t_k)` and the inverse
//! carries `1 / (N h)`, so the pair inverts exactly up to rounding.

use super::{Axis, Grid, SampledFunction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// The s-axis paired with a symmetric t-axis.
pub fn paired_axis(t: &Axis) -> Result<Axis> {
    let n = t.count;
    if t.half_line || n % 2 == 0 || (t.min + t.max).abs() > 1e-9 * t.max.abs() {
        return Err(Error::InvalidGrid(format!(
            "spectral pair needs a symmetric uniform axis with an odd node count, got {t:?}"
        )));
    }
    let m = (n - 1) / 2;
    let ds = 2.0 * PI / (n as f64 * t.step());
    Axis::uniform(-(m as f64) * ds, m as f64 * ds, n)
}

pub fn paired_grid(t: &Grid) -> Result<Grid> {
    Grid::new(t.axes().iter().map(paired_axis).collect::<Result<_>>()?)
}

/// Forward transform of samples on a symmetric grid, returned on the paired grid.
pub fn forward(g: &SampledFunction) -> Result<SampledFunction> {
    let s_grid = paired_grid(g.grid())?;
    let values = apply(g.values(), g.grid(), -1.0);
    SampledFunction::new(s_grid, values)
}

/// Inverse of [`forward`]: samples on the paired s-grid back onto `t_grid`.
pub fn inverse(hat: &SampledFunction, t_grid: &Grid) -> Result<SampledFunction> {
    let expected = paired_grid(t_grid)?;
    hat.grid().ensure_same(&expected)?;
    let values = apply(hat.values(), t_grid, 1.0);
    SampledFunction::new(t_grid.clone(), values)
}

/// Separable transform; `sign = -1` forward (scaled by `h`), `+1` inverse
/// (scaled by `1 / (N h)`), per axis of the t-grid.
fn apply(values: &[Complex64], t_grid: &Grid, sign: f64) -> Vec<Complex64> {
    let mut out = values.to_vec();
    let mut planner = FftPlanner::new();
    let dims: Vec<usize> = t_grid.axes().iter().map(|a| a.count).collect();
    for (k, axis) in t_grid.axes().iter().enumerate() {
        let n = axis.count;
        let scale = if sign < 0.0 { axis.step() } else { 1.0 / (n as f64 * axis.step()) };
        let fft = if sign < 0.0 {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let (stride, lines) = match (dims.len(), k) {
            (1, _) => (1, 1),
            (_, 0) => (dims[1], dims[1]),
            _ => (1, dims[0]),
        };
        let line_start = |l: usize| if dims.len() == 2 && k == 1 { l * dims[1] } else { l };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let pre = twiddles(n, -sign);
        for l in 0..lines {
            let start = line_start(l);
            for j in 0..n {
                line[j] = out[start + j * stride] * pre[j];
            }
            fft.process(&mut line);
            for j in 0..n {
                out[start + j * stride] = line[j] * pre[j] * shift_phase(n, sign) * scale;
            }
        }
    }
    out
}

/// `exp(i sign' 2 pi M j / N)`: centres the index ranges on the origin.
fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    let m = ((n - 1) / 2) as u64;
    (0..n as u64)
        .map(|j| {
            let e = (m * j) % n as u64;
            Complex64::from_polar(1.0, sign * 2.0 * PI * e as f64 / n as f64)
        })
        .collect()
}

/// `exp(i sign 2 pi M^2 / N)`.
fn shift_phase(n: usize, sign: f64) -> Complex64 {
    let m = ((n - 1) / 2) as u64;
    let e = (m * m) % n as u64;
    Complex64::from_polar(1.0, sign * 2.0 * PI * e as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(values: &[Complex64], t: &Axis, s: f64) -> Complex64 {
        values
            .iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::from_polar(t.step(), -s * t.sample_coord(k)))
            .sum()
    }

    #[test]
    fn forward_matches_direct_sum() {
        let t = Grid::symmetric(1, 0.1, 40).unwrap();
        let g = SampledFunction::from_fn(t.clone(), |x| Complex64::new((-x[0].abs()).exp(), x[0].sin()))
            .unwrap();
        let hat = forward(&g).unwrap();
        let axis = hat.grid().axis(0);
        for m in [0, 17, 40, 63, 80] {
            let d = direct(g.values(), t.axis(0), axis.sample_coord(m));
            assert!((hat.values()[m] - d).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let t = Grid::symmetric(1, 0.05, 301).unwrap();
        let g = SampledFunction::from_real_fn(t.clone(), |x| (-x[0].abs() / 2.0).exp()).unwrap();
        let back = inverse(&forward(&g).unwrap(), &t).unwrap();
        assert!(back.distance_linf(&g).unwrap() < 1e-13);
    }

    #[test]
    fn two_dimensional_round_trip() {
        let t = Grid::new(vec![Axis::symmetric(0.1, 20).unwrap(), Axis::symmetric(0.2, 15).unwrap()]).unwrap();
        let g = SampledFunction::from_fn(t.clone(), |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), x[1]))
            .unwrap();
        let hat = forward(&g).unwrap();
        // compare one entry against the double sum
        let (a0, a1) = (*t.axis(0), *t.axis(1));
        let s = hat.grid().point(hat.grid().flat_index([13, 4]));
        let mut d = Complex64::new(0.0, 0.0);
        for flat in 0..t.len() {
            let p = t.point(flat);
            d += g.values()[flat] * Complex64::from_polar(a0.step() * a1.step(), -(s[0] * p[0] + s[1] * p[1]));
        }
        assert!((hat.values()[hat.grid().flat_index([13, 4])] - d).norm() < 1e-12);
        let back = inverse(&hat, &t).unwrap();
        assert!(back.distance_linf(&g).unwrap() < 1e-12);
    }

    #[test]
    fn even_count_is_rejected() {
        assert!(paired_axis(&Axis::uniform(-1.0, 1.0, 10).unwrap()).is_err());
        assert!(paired_axis(&Axis::uniform(0.0, 1.0, 11).unwrap()).is_err());
    }
}
