use super::family::MatrixFamily;
use super::kernel::{KernelSource, KernelSpec};
use super::octant::{mask_signs, octant_count};
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{gauss_legendre, Rule};
use serde::Serialize;

/// Relative increment between successive windows below which the
/// integral counts as converged.
pub const TAIL_RATIO_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Estimate of `\int |det A(u)|^{-1/2} |K(u)| du`.
    pub bound: f64,
    pub tail_ratio: f64,
    /// Half-width of the last `log |u|` window used.
    pub window: f64,
}

/// Estimates `\int |det A(u)|^{-1/2} |K(u)| du` on growing windows in
/// `tau = log |u_k|` (factor-2 refinement) and applies the ratio test.
pub fn admissibility_check(kernel: &KernelSpec, family: &MatrixFamily) -> Result<AdmissibilityReport> {
    if kernel.dim() != family.dim() {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {} vs family dimension {}",
            kernel.dim(),
            family.dim()
        )));
    }
    if kernel.is_zero() {
        return Ok(AdmissibilityReport {
            admissible: true,
            bound: 0.0,
            tail_ratio: 0.0,
            window: 0.0,
        });
    }
    if let KernelSource::LogTabulated(lk) = kernel.source() {
        let bound: f64 = lk
            .classes
            .iter()
            .flatten()
            .map(|q| (0..q.grid().len()).map(|i| q.grid().weight(i) * q.values()[i].norm()).sum::<f64>())
            .sum();
        return Ok(AdmissibilityReport {
            admissible: bound.is_finite(),
            bound,
            tail_ratio: 0.0,
            window: 0.0,
        });
    }
    let dim = family.dim();
    let cap = if dim == 1 { 640.0 } else { 160.0 };
    let mut window = 10.0;
    let mut previous: Option<f64> = None;
    loop {
        let total = window_integral(kernel, family, window)?;
        if !total.is_finite() {
            return Ok(AdmissibilityReport {
                admissible: false,
                bound: f64::INFINITY,
                tail_ratio: f64::INFINITY,
                window,
            });
        }
        if let Some(prev) = previous {
            let ratio = if total == 0.0 { 0.0 } else { (total - prev).abs() / total };
            if ratio < TAIL_RATIO_LIMIT {
                return Ok(AdmissibilityReport {
                    admissible: true,
                    bound: total,
                    tail_ratio: ratio,
                    window,
                });
            }
            if window >= cap {
                return Ok(AdmissibilityReport {
                    admissible: false,
                    bound: total,
                    tail_ratio: ratio,
                    window,
                });
            }
        }
        previous = Some(total);
        window *= 2.0;
    }
}

fn window_integral(kernel: &KernelSpec, family: &MatrixFamily, window: f64) -> Result<f64> {
    let dim = family.dim();
    let mut total = 0.0;
    for mask in 0..octant_count(dim) {
        let signs = mask_signs(mask, dim);
        let rules: Vec<Rule> = (0..dim)
            .map(|k| {
                let (lo, hi) = kernel.support_bounds(k);
                let s = f64::from(signs[k]);
                // tau-range of the quadrant intersected with the support
                let (ulo, uhi) = if s > 0.0 { (lo.max(0.0), hi) } else { (-hi.min(0.0), -lo) };
                let tlo = if ulo > 0.0 { ulo.ln().max(-window) } else { -window };
                let thi = if uhi.is_finite() { uhi.ln().min(window) } else { window };
                let breaks: Vec<f64> = kernel
                    .breakpoints(k)
                    .into_iter()
                    .filter(|b| b * s > 0.0)
                    .map(|b| b.abs().ln())
                    .collect();
                graded_rule(tlo, thi, &breaks)
            })
            .collect();
        if rules.iter().any(Rule::is_empty) {
            continue;
        }
        let integrand = |tau: &[f64]| -> Result<f64> {
            let u: Vec<f64> = tau.iter().zip(&signs).map(|(t, &s)| f64::from(s) * t.exp()).collect();
            let k = kernel.evaluate(&u)?;
            if k == 0.0 {
                return Ok(0.0);
            }
            let a = family.eigenvalues(&u)?;
            let det: f64 = a.iter().product::<f64>().abs();
            let jac: f64 = tau.iter().sum::<f64>().exp();
            Ok(k.abs() * det.powf(-0.5) * jac)
        };
        total += match dim {
            1 => {
                let r = &rules[0];
                par::try_map_range(r.len(), |i| integrand(&[r.nodes[i]]).map(|v| r.weights[i] * v))?
                    .into_iter()
                    .sum::<f64>()
            }
            _ => {
                let (r0, r1) = (&rules[0], &rules[1]);
                par::try_map_range(r0.len(), |i| {
                    let mut row = 0.0;
                    for j in 0..r1.len() {
                        row += r1.weights[j] * integrand(&[r0.nodes[i], r1.nodes[j]])?;
                    }
                    Ok::<f64, Error>(r0.weights[i] * row)
                })?
                .into_iter()
                .sum::<f64>()
            }
        };
    }
    Ok(total)
}

/// 8-point Gauss-Legendre on panels of width 0.25 for `|tau| < 8`, growing
/// geometrically by 1.0625 beyond.
fn graded_rule(lo: f64, hi: f64, breaks: &[f64]) -> Rule {
    let mut rule = Rule::default();
    if !(hi > lo) {
        return rule;
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    let mut edge = 0.0;
    let mut width = 0.25;
    while edge < hi.abs().max(lo.abs()) {
        if edge >= 8.0 {
            width *= 1.0625;
        }
        edge += width;
        for c in [edge, -edge] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
    }
    if lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let (gx, gw) = gauss_legendre(8);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let half = 0.5 * (b - a);
        for (x, w) in gx.iter().zip(&gw) {
            rule.nodes.push(a + half * (1.0 + x));
            rule.weights.push(half * w);
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kernel::Support;
    use crate::model::presets;

    #[test]
    fn cesaro_bound_is_two() {
        let (k, fam) = presets::cesaro();
        let r = admissibility_check(&k, &fam).unwrap();
        assert!(r.admissible);
        assert!((r.bound - 2.0).abs() < 1e-6, "bound = {}", r.bound);
    }

    #[test]
    fn singular_kernel_diverges() {
        let fam = presets::dilation_family();
        let k = KernelSpec::parse(1, "chi(0,1)(u) * u^(-1)", Support::Full).unwrap();
        assert!(!admissibility_check(&k, &fam).unwrap().admissible);
    }

    #[test]
    fn zero_and_calderon() {
        let fam = presets::dilation_family();
        let r = admissibility_check(&KernelSpec::zero(1), &fam).unwrap();
        assert!(r.admissible && r.bound == 0.0);
        let (k, fam) = presets::calderon();
        let r = admissibility_check(&k, &fam).unwrap();
        assert!(r.admissible && (r.bound - 4.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn two_dimensional_gaussian() {
        let (k, fam) = presets::dilation_diag_2d();
        let r = admissibility_check(&k, &fam).unwrap();
        assert!(r.admissible && r.bound > 0.0);
    }
}
