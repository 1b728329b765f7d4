//! The change of variables `|a_k(u)| = e^{t_k}`.
//!
//! On sign class `eps` with inverse map `b` and Jacobian `J`, the log kernel
//! is `L_eps(t) = K(b(t)) e^{-sum t / 2} |J(t)|`, and a log kernel `Q_eps`
//! resynthesizes `K(b(t)) = e^{sum t / 2} Q_eps(t) / |J(t)|`.

use super::family::MatrixFamily;
use super::kernel::{KernelSource, KernelSpec, LogKernel};
use super::octant::{octant_count, pair_class};
use crate::error::{Error, Result};
use crate::grid::{Axis, Break, Grid, SampledFunction};
use crate::par;
use num_complex::Complex64;

/// Offset used to read one-sided limits at a break.
const LIMIT_OFFSET: f64 = 1e-7;

/// Samples of the log kernel for the pair `(i, j)` on `t_grid`; positive
/// definite families always use the pair `(1, 1)`.
///
/// On one-dimensional grids, images of the kernel's breakpoints that fall
/// on nodes are declared as breaks with one-sided limits.
pub fn to_log_coordinates(
    kernel: &KernelSpec,
    family: &MatrixFamily,
    pair: (usize, usize),
    t_grid: &Grid,
) -> Result<SampledFunction> {
    let dim = family.dim();
    if kernel.dim() != dim || t_grid.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {}, family dimension {dim}, t-grid dimension {}",
            kernel.dim(),
            t_grid.dim()
        )));
    }
    let pair = if family.is_positive_definite() { (1, 1) } else { pair };
    let class = pair_class(pair.0, pair.1, dim)?;
    log_kernel_for_class(kernel, family, class, t_grid)
}

pub(crate) fn log_kernel_for_class(
    kernel: &KernelSpec,
    family: &MatrixFamily,
    class: usize,
    t_grid: &Grid,
) -> Result<SampledFunction> {
    if let KernelSource::LogTabulated(lk) = kernel.source() {
        if lk.family != *family {
            return Err(Error::InvalidFamily("log kernel belongs to a different family".into()));
        }
        return resample_class(lk, class, t_grid);
    }
    if kernel.is_zero() {
        return Ok(SampledFunction::zeros(t_grid.clone()));
    }
    let map = family.inverse_for_class(class)?;
    let eval = |t: &[f64]| -> Result<f64> {
        let u = map.point(t);
        let k = kernel.evaluate(&u)?;
        if k == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = t.iter().sum();
        Ok(k * (-0.5 * sum).exp() * map.jacobian_at(t).abs())
    };
    let values = par::try_map_range(t_grid.len(), |i| {
        eval(&t_grid.sample_point(i)).map(|v| Complex64::new(v, 0.0))
    })?;
    let f = SampledFunction::new(t_grid.clone(), values)?;
    if dim_one_uniform(t_grid) {
        let breaks = log_breaks(kernel, family, class)?
            .into_iter()
            .filter_map(|tb| t_grid.axis(0).node_index(tb, 1e-9).map(|i| (i, tb)))
            .map(|(i, tb)| {
                let d = LIMIT_OFFSET * tb.abs().max(1.0);
                // linear extrapolation from two one-sided points
                let left = 2.0 * eval(&[tb - d])? - eval(&[tb - 2.0 * d])?;
                let right = 2.0 * eval(&[tb + d])? - eval(&[tb + 2.0 * d])?;
                Ok(Break {
                    index: i,
                    left: Complex64::new(left, 0.0),
                    right: Complex64::new(right, 0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return f.with_breaks(breaks);
    }
    Ok(f)
}

fn dim_one_uniform(g: &Grid) -> bool {
    g.dim() == 1 && !g.axis(0).half_line
}

/// Log-coordinate images of the kernel's breakpoints on a 1-D class.
pub(crate) fn log_breaks(kernel: &KernelSpec, family: &MatrixFamily, class: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    if let KernelSource::LogTabulated(lk) = kernel.source() {
        if let Some(q) = lk.class(class) {
            out.extend(q.breaks().iter().map(|b| q.grid().axis(0).coordinate(b.index)));
        }
        return Ok(out);
    }
    for u in kernel.breakpoints(0) {
        let Ok(a) = family.eigenvalues(&[u]) else { continue };
        if a[0] != 0.0 && family.sign_class(&[u]).ok() == Some(class) {
            out.push(a[0].abs().ln());
        }
    }
    // breakpoints of the eigenvalue map itself, e.g. |u| or max(1, u)
    for e in family.eigenvalue_exprs() {
        for u in e.breakpoints(0) {
            if let Ok(a) = family.eigenvalues(&[u]) {
                if a[0] != 0.0 && a[0].is_finite() {
                    out.push(a[0].abs().ln());
                }
            }
        }
    }
    out.retain(|t| t.is_finite());
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(out)
}

fn resample_class(lk: &LogKernel, class: usize, t_grid: &Grid) -> Result<SampledFunction> {
    let Some(q) = lk.class(class) else {
        return Ok(SampledFunction::zeros(t_grid.clone()));
    };
    if q.grid() == t_grid {
        return Ok(q.clone());
    }
    let values = par::map_range(t_grid.len(), |i| lk.value_at(class, &t_grid.sample_point(i)));
    let f = SampledFunction::new(t_grid.clone(), values)?;
    if dim_one_uniform(t_grid) && !q.breaks().is_empty() {
        let axis = q.grid().axis(0);
        let breaks = q
            .breaks()
            .iter()
            .filter_map(|b| {
                t_grid.axis(0).node_index(axis.coordinate(b.index), 1e-9).map(|i| Break {
                    index: i,
                    left: b.left,
                    right: b.right,
                })
            })
            .collect();
        return f.with_breaks(breaks);
    }
    Ok(f)
}

/// Resynthesizes a kernel from a log kernel; positive-definite families only.
pub fn from_log_coordinates(q: SampledFunction, family: &MatrixFamily) -> Result<KernelSpec> {
    if !family.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(format!(
            "family {} has no scalar log coordinates; use per-class log kernels",
            family.name()
        )));
    }
    let mut classes = vec![None; octant_count(family.dim())];
    classes[0] = Some(q);
    from_log_classes(classes, family)
}

/// Resynthesizes a kernel from one log kernel per sign class.
pub fn from_log_classes(classes: Vec<Option<SampledFunction>>, family: &MatrixFamily) -> Result<KernelSpec> {
    for (c, q) in classes.iter().enumerate() {
        if q.is_some() {
            family.inverse_for_class(c)?;
        }
    }
    KernelSpec::log_tabulated(LogKernel {
        family: family.clone(),
        classes,
    })
}

/// Checks that a log kernel covers `log a(u)` for every `u` in `u_range`.
pub fn ensure_covers(kernel: &KernelSpec, u_range: (f64, f64)) -> Result<()> {
    let KernelSource::LogTabulated(lk) = kernel.source() else {
        return Ok(());
    };
    for u in [u_range.0, u_range.1] {
        let a = lk.family.eigenvalues(&vec![u; lk.family.dim()])?;
        let class = lk.family.sign_class(&vec![u; lk.family.dim()])?;
        if let Some(q) = lk.class(class) {
            for (k, x) in a.iter().enumerate() {
                let t = x.abs().ln();
                if q.grid().axis(k).locate(t).is_none() {
                    return Err(Error::OutOfRange(format!(
                        "t-grid {:?} does not cover log a(u) = {t} for u = {u}",
                        q.grid().axis(k).sampling_bounds()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Per-axis `t` intervals outside which `|L_eps| < 1e-15 * peak`, found by
/// a coarse scan; `None` when the log kernel vanishes on the scan.
pub fn log_extent(kernel: &KernelSpec, family: &MatrixFamily, class: usize) -> Result<Option<Vec<(f64, f64)>>> {
    if let KernelSource::LogTabulated(lk) = kernel.source() {
        return Ok(lk.class(class).and_then(|q| {
            let peak = q.max_abs();
            if peak == 0.0 {
                return None;
            }
            let mut ext = vec![(f64::INFINITY, f64::NEG_INFINITY); q.grid().dim()];
            for i in 0..q.grid().len() {
                if q.values()[i].norm() > 1e-15 * peak {
                    for (k, &t) in q.grid().point(i).iter().enumerate() {
                        ext[k] = (ext[k].0.min(t), ext[k].1.max(t));
                    }
                }
            }
            Some(ext)
        }));
    }
    if !family.has_inverse_for_class(class) || kernel.is_zero() {
        return Ok(None);
    }
    let dim = family.dim();
    let (reach, step) = if dim == 1 { (400.0, 0.25) } else { (60.0, 0.5) };
    let half = (reach / step) as usize;
    let scan = Grid::new(vec![Axis::symmetric(step, half)?; dim])?;
    let l = log_kernel_for_class(kernel, family, class, &scan)?;
    let peak = l.max_abs();
    if peak == 0.0 {
        return Ok(None);
    }
    let mut ext = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for i in 0..scan.len() {
        if l.values()[i].norm() > 1e-15 * peak {
            for (k, &t) in scan.point(i).iter().enumerate() {
                ext[k] = (ext[k].0.min(t - step), ext[k].1.max(t + step));
            }
        }
    }
    Ok(Some(ext))
}

/// Symmetric t-grid with step `step` reaching `max |extent|` over all
/// classes (or `t_max` when given).
pub fn auto_log_grid(
    kernels: &[&KernelSpec],
    family: &MatrixFamily,
    step: f64,
    t_max: Option<f64>,
) -> Result<Grid> {
    let reach = match t_max {
        Some(t) => t,
        None => {
            let mut r: f64 = 1.0;
            for k in kernels {
                for class in 0..octant_count(family.dim()) {
                    if let Some(ext) = log_extent(k, family, class)? {
                        for (lo, hi) in ext {
                            r = r.max(lo.abs()).max(hi.abs());
                        }
                    }
                }
            }
            r
        }
    };
    let half = (reach / step).ceil() as usize;
    Grid::symmetric(family.dim(), step, half.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn cesaro_log_kernel() {
        let (k, fam) = presets::cesaro();
        let t = Grid::symmetric(1, 0.5, 40).unwrap();
        let l = to_log_coordinates(&k, &fam, (1, 1), &t).unwrap();
        let at = |x: f64| l.values()[t.axis(0).node_index(x, 1e-9).unwrap()].re;
        assert!((at(-2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(at(3.0), 0.0);
        let b = l.breaks()[0];
        assert!((b.left.re - 1.0).abs() < 1e-8 && b.right.re == 0.0);
    }

    #[test]
    fn calderon_log_kernel_both_branches() {
        let (k, fam) = presets::calderon();
        let t = Grid::symmetric(1, 0.25, 40).unwrap();
        let l = to_log_coordinates(&k, &fam, (1, 1), &t).unwrap();
        for i in 0..t.len() {
            let x = t.point(i)[0];
            assert!((l.values()[i].re - (-x.abs() / 2.0).exp()).abs() < 1e-14, "t = {x}");
        }
    }

    #[test]
    fn round_trip_on_shared_grid() {
        let (k, fam) = presets::calderon();
        let t = Grid::symmetric(1, 0.01, 3000).unwrap();
        let l = to_log_coordinates(&k, &fam, (1, 1), &t).unwrap();
        let back = from_log_coordinates(l.clone(), &fam).unwrap();
        assert!((back.evaluate(&[2.0]).unwrap() - 0.25).abs() < 1e-10);
        let again = to_log_coordinates(&back, &fam, (1, 1), &t).unwrap();
        assert!(again.distance_linf(&l).unwrap() < 1e-12);
        for u in [0.3, 0.77, 1.5, 9.0] {
            let want = k.evaluate(&[u]).unwrap();
            assert!((back.evaluate(&[u]).unwrap() - want).abs() < 1e-8 * want, "u = {u}");
        }
    }

    #[test]
    fn extents_follow_decay() {
        let (k, fam) = presets::calderon();
        let e = log_extent(&k, &fam, 0).unwrap().unwrap();
        assert!(e[0].0 < -60.0 && e[0].1 > 60.0 && e[0].1 < 80.0);
        assert!(log_extent(&KernelSpec::zero(1), &fam, 0).unwrap().is_none());
    }
}
