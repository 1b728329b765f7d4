use super::breaks::{jump_series, scaled_derivatives, FIT_DEGREE};
use super::{Axis, Break, Grid, SampledFunction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// `(f * g)(t) = \int f(tau) g(t - tau) dtau` on the sum-support grid.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    convolve_windowed(f, g, None)
}

/// As [`convolve`], keeping only output nodes inside `window` (one
/// `(lo, hi)` pair per axis).
///
/// Both inputs must live on uniform grids with a common step per axis.
/// Breaks of one-dimensional inputs are honoured: the integrand's one-sided
/// limits replace the node products, jump corrections are applied, and the
/// output carries kinks at the sums of the input break positions.
pub fn convolve_windowed(
    f: &SampledFunction,
    g: &SampledFunction,
    window: Option<&[(f64, f64)]>,
) -> Result<SampledFunction> {
    let dim = f.grid().dim();
    if g.grid().dim() != dim {
        return Err(Error::GridMismatch(format!(
            "convolution of {dim}-dimensional and {}-dimensional samples",
            g.grid().dim()
        )));
    }
    f.grid().ensure_uniform("convolve")?;
    g.grid().ensure_uniform("convolve")?;
    for (a, b) in f.grid().axes().iter().zip(g.grid().axes()) {
        if !a.compatible_spacing(b, 1e-9) {
            return Err(Error::GridMismatch(format!(
                "convolution needs a common spacing, got {} and {}",
                a.step(),
                b.step()
            )));
        }
    }
    if let Some(w) = window {
        if w.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "window has {} intervals for dimension {dim}",
                w.len()
            )));
        }
    }

    let full_axes: Vec<Axis> = f
        .grid()
        .axes()
        .iter()
        .zip(g.grid().axes())
        .map(|(a, b)| Axis {
            min: a.min + b.min,
            max: a.max + b.max,
            count: a.count + b.count - 1,
            half_line: false,
        })
        .collect();
    let cell: f64 = f.grid().axes().iter().map(Axis::step).product();

    let mut values = match dim {
        1 => fft_convolve_1d(f.values(), g.values()),
        _ => fft_convolve_2d(f, g, &full_axes),
    };
    for v in &mut values {
        *v *= cell;
    }

    let mut out_breaks = Vec::new();
    if dim == 1 && (!f.breaks().is_empty() || !g.breaks().is_empty()) {
        correct_breaks_1d(f, g, full_axes[0].step(), &mut values);
        for bf in f.breaks() {
            for bg in g.breaks() {
                let k = bf.index + bg.index;
                out_breaks.push(Break::kink(k, values[k]));
            }
        }
    }

    // window selection in node indices
    let mut ranges = Vec::with_capacity(dim);
    for (k, axis) in full_axes.iter().enumerate() {
        let (lo, hi) = match window {
            Some(w) => w[k],
            None => (axis.min, axis.max),
        };
        let h = axis.step();
        let first = ((lo - axis.min) / h - 1e-9).ceil().max(0.0) as usize;
        let last = (((hi - axis.min) / h + 1e-9).floor() as isize).min(axis.count as isize - 1);
        if last < first as isize + 1 {
            return Err(Error::InvalidGrid(format!(
                "convolution window [{lo}, {hi}] holds fewer than 2 nodes"
            )));
        }
        ranges.push((first, last as usize));
    }
    let out_axes: Vec<Axis> = full_axes
        .iter()
        .zip(&ranges)
        .map(|(a, &(first, last))| Axis {
            min: a.sample_coord(first),
            max: a.sample_coord(last),
            count: last - first + 1,
            half_line: false,
        })
        .collect();
    let out_grid = Grid::new(out_axes)?;
    let kept: Vec<Complex64> = match dim {
        1 => values[ranges[0].0..=ranges[0].1].to_vec(),
        _ => {
            let stride = full_axes[1].count;
            let mut kept = Vec::with_capacity(out_grid.len());
            for i in ranges[0].0..=ranges[0].1 {
                kept.extend_from_slice(&values[i * stride + ranges[1].0..=i * stride + ranges[1].1]);
            }
            kept
        }
    };
    let breaks = out_breaks
        .into_iter()
        .filter(|b| b.index >= ranges[0].0 && b.index <= ranges[0].1)
        .map(|b| Break {
            index: b.index - ranges[0].0,
            ..b
        })
        .collect();
    SampledFunction::new(out_grid, kept)?.with_breaks(breaks)
}

fn fft_convolve_1d(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len() + b.len() - 1;
    let size = n.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut fa = vec![Complex64::new(0.0, 0.0); size];
    let mut fb = vec![Complex64::new(0.0, 0.0); size];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let norm = 1.0 / size as f64;
    fa.truncate(n);
    fa.iter_mut().for_each(|v| *v *= norm);
    fa
}

fn fft_convolve_2d(f: &SampledFunction, g: &SampledFunction, full: &[Axis]) -> Vec<Complex64> {
    let (fn0, fn1) = (f.grid().axis(0).count, f.grid().axis(1).count);
    let (gn0, gn1) = (g.grid().axis(0).count, g.grid().axis(1).count);
    let (p0, p1) = (full[0].count.next_power_of_two(), full[1].count.next_power_of_two());
    let mut planner = FftPlanner::new();
    let fwd0 = planner.plan_fft_forward(p0);
    let fwd1 = planner.plan_fft_forward(p1);
    let inv0 = planner.plan_fft_inverse(p0);
    let inv1 = planner.plan_fft_inverse(p1);

    let spectrum = |values: &[Complex64], n0: usize, n1: usize| {
        let mut buf = vec![Complex64::new(0.0, 0.0); p0 * p1];
        for i in 0..n0 {
            buf[i * p1..i * p1 + n1].copy_from_slice(&values[i * n1..(i + 1) * n1]);
        }
        fft_2d(&mut buf, p0, p1, &*fwd0, &*fwd1);
        buf
    };
    let mut a = spectrum(f.values(), fn0, fn1);
    let b = spectrum(g.values(), gn0, gn1);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_2d(&mut a, p0, p1, &*inv0, &*inv1);
    let norm = 1.0 / (p0 * p1) as f64;
    let mut out = Vec::with_capacity(full[0].count * full[1].count);
    for i in 0..full[0].count {
        out.extend(a[i * p1..i * p1 + full[1].count].iter().map(|v| v * norm));
    }
    out
}

fn fft_2d(
    buf: &mut [Complex64],
    p0: usize,
    p1: usize,
    along0: &dyn rustfft::Fft<f64>,
    along1: &dyn rustfft::Fft<f64>,
) {
    for row in buf.chunks_mut(p1) {
        along1.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); p0];
    for k in 0..p1 {
        for i in 0..p0 {
            column[i] = buf[i * p1 + k];
        }
        along0.process(&mut column);
        for i in 0..p0 {
            buf[i * p1 + k] = column[i];
        }
    }
}

/// Replaces node products by the integrand's mean limit at every integrand
/// break and subtracts the Euler-Maclaurin jump terms.
fn correct_breaks_1d(f: &SampledFunction, g: &SampledFunction, h: f64, out: &mut [Complex64]) {
    let (nf, ng) = (f.values().len(), g.values().len());
    let zero = Complex64::new(0.0, 0.0);
    let corrections: Vec<(usize, Complex64)> = crate::par::map_range(out.len(), |k| {
        // integrand P(j) = f(j) g(k - j) on j in [lo, hi]
        let lo = k.saturating_sub(ng - 1);
        let hi = k.min(nf - 1);
        let mut nodes: Vec<usize> = f
            .breaks()
            .iter()
            .map(|b| b.index)
            .chain(g.breaks().iter().filter(|b| b.index <= k).map(|b| k - b.index))
            .filter(|&j| j >= lo && j <= hi)
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let is_break = |j: usize| nodes.binary_search(&j).is_ok();
        let mut delta = zero;
        for &j in &nodes {
            let m = k - j;
            let left = f.left_value(j) * g.right_value(m);
            let right = f.right_value(j) * g.left_value(m);
            delta += h * (0.5 * (left + right) - f.values()[j] * g.values()[m]);
            if j == lo || j == hi {
                continue;
            }
            let mut below = vec![left];
            for r in 1..=FIT_DEGREE {
                if j < lo + r || is_break(j - r) {
                    break;
                }
                below.push(f.values()[j - r] * g.values()[m + r]);
            }
            let mut above = vec![right];
            for r in 1..=FIT_DEGREE {
                if j + r > hi || is_break(j + r) {
                    break;
                }
                above.push(f.values()[j + r] * g.values()[m - r]);
            }
            let gl = scaled_derivatives(&below, -1.0);
            let gr = scaled_derivatives(&above, 1.0);
            delta -= h * jump_series(&gl, &gr, zero);
        }
        (k, delta)
    });
    for (k, d) in corrections {
        out[k] += d;
    }
}
