//! Products, holomorphic functions and fractional powers of Hausdorff
//! operators, realized on log kernels and symbols.

mod closed;

pub use closed::{boyd_power_kernel, boyd_symbol, calderon_fractional_kernel, calderon_q};

use crate::error::{Error, Result};
use crate::grid::{convolve_windowed, extrapolate_limit, spectral, Break, Diagnostics, Grid, SampledFunction};
use crate::model::{
    auto_log_grid, from_log_classes, from_log_coordinates, log_extent, octant_count, to_log_coordinates,
    KernelSource, KernelSpec, MatrixFamily,
};
use crate::operator::OperatorSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Nodes used on each side to extrapolate one-sided limits at a jump.
const LIMIT_NODES: usize = 6;

/// Log-coordinate grids for [`product_kernel_with`], [`holomorphic_kernel_with`]
/// and [`fractional_kernel_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalculusSettings {
    /// Step of the t-grid; `None` picks 0.01 in 1-D and 0.2 in 2-D.
    pub t_step: Option<f64>,
    /// Half-width of the t-grid; `None` derives it from the kernels.
    pub t_max: Option<f64>,
    /// Largest accepted ratio `|F(phi)|` at the Nyquist edge over its peak.
    pub decay_limit: f64,
    /// Symbol values below `-negative_tol` fail the fractional power.
    pub negative_tol: f64,
}

impl Default for CalculusSettings {
    fn default() -> Self {
        Self {
            t_step: None,
            t_max: None,
            decay_limit: 1e-2,
            negative_tol: 1e-10,
        }
    }
}

impl CalculusSettings {
    fn step(&self, dim: usize) -> f64 {
        self.t_step.unwrap_or(if dim == 1 { 0.01 } else { 0.2 })
    }
}

/// Kernel of the product `H_K H_L` over a shared family.
pub fn product_kernel(k: &KernelSpec, l: &KernelSpec, family: &MatrixFamily) -> Result<KernelSpec> {
    product_kernel_with(k, l, family, &CalculusSettings::default())
}

/// Per sign class `eps`, `Q_eps = sum_e1 K_e1 * L_(e1 xor eps)`.
pub fn product_kernel_with(
    k: &KernelSpec,
    l: &KernelSpec,
    family: &MatrixFamily,
    settings: &CalculusSettings,
) -> Result<KernelSpec> {
    let dim = family.dim();
    for kernel in [k, l] {
        if kernel.dim() != dim {
            return Err(Error::GridMismatch(format!(
                "kernel dimension {} with a family of dimension {dim}",
                kernel.dim()
            )));
        }
        if let KernelSource::LogTabulated(lk) = kernel.source() {
            if lk.family != *family {
                return Err(Error::InvalidFamily(format!(
                    "kernel '{}' belongs to family {}, not {}",
                    kernel.label(),
                    lk.family.name(),
                    family.name()
                )));
            }
        }
    }
    let classes = octant_count(dim);
    if k.is_zero() || l.is_zero() {
        return from_log_classes(vec![None; classes], family).map(|z| z.with_label("0"));
    }
    let step = tabulated_step(k).or_else(|| tabulated_step(l)).unwrap_or(settings.step(dim));
    let t_max = settings.t_max.or(if dim == 2 { Some(40.0) } else { None });
    let grid = auto_log_grid(&[k, l], family, step, t_max)?;
    let window: Vec<(f64, f64)> = grid.axes().iter().map(|a| a.sampling_bounds()).map(|(lo, hi)| {
        let pad = 0.5 * step;
        (lo - pad, hi + pad)
    }).collect();
    let present = |kernel: &KernelSpec, c: usize| -> Result<bool> { Ok(log_extent(kernel, family, c)?.is_some()) };
    let mut kl = Vec::with_capacity(classes);
    let mut ll = Vec::with_capacity(classes);
    for c in 0..classes {
        kl.push(if present(k, c)? { Some(class_log_kernel(k, family, c, &grid)?) } else { None });
        ll.push(if present(l, c)? { Some(class_log_kernel(l, family, c, &grid)?) } else { None });
    }
    let mut out = Vec::with_capacity(classes);
    for eps in 0..classes {
        let mut acc: Option<SampledFunction> = None;
        for e1 in 0..classes {
            let (Some(a), Some(b)) = (&kl[e1], &ll[e1 ^ eps]) else { continue };
            let c = convolve_windowed(a, b, Some(&window))?;
            acc = Some(match acc {
                None => c,
                Some(prev) => prev.add(&c)?,
            });
        }
        out.push(acc);
    }
    Ok(from_log_classes(out, family)?.with_label(format!("({})*({})", k.label(), l.label())))
}

fn tabulated_step(k: &KernelSpec) -> Option<f64> {
    match k.source() {
        KernelSource::LogTabulated(lk) => lk.classes.iter().flatten().next().map(|q| q.grid().axis(0).step()),
        _ => None,
    }
}

fn class_log_kernel(k: &KernelSpec, family: &MatrixFamily, class: usize, grid: &Grid) -> Result<SampledFunction> {
    if family.is_positive_definite() {
        return to_log_coordinates(k, family, (1, 1), grid);
    }
    crate::model::log_kernel_for_class(k, family, class, grid)
}

/// A function `F` holomorphic near the range of the symbol, with `F(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HoloFunctionSpec {
    /// `sum_k c_k z^k` with real coefficients, `c_0 = 0`.
    Polynomial { coefficients: Vec<f64> },
    /// `e^z - 1`.
    Expm1,
    /// Principal power `z^alpha` on `Re z >= 0`, `alpha > 0`.
    Power { alpha: f64 },
    /// Piecewise-linear interpolation of real samples on the real axis.
    Table { points: Vec<(f64, f64)> },
}

impl HoloFunctionSpec {
    /// Parses `poly:c0,c1,..`, `expm1`, `power:alpha` or `table:x:y,x:y,..`.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, rest) = text.split_once(':').unwrap_or((text, ""));
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{s}' in function '{text}'")))
        };
        let spec = match head.trim() {
            "poly" => HoloFunctionSpec::Polynomial {
                coefficients: rest.split(',').map(num).collect::<Result<_>>()?,
            },
            "expm1" if rest.is_empty() => HoloFunctionSpec::Expm1,
            "power" => HoloFunctionSpec::Power { alpha: num(rest)? },
            "table" => HoloFunctionSpec::Table {
                points: rest
                    .split(',')
                    .map(|p| {
                        let (x, y) = p
                            .split_once(':')
                            .ok_or_else(|| Error::Config(format!("table entry '{p}' is not x:y")))?;
                        Ok((num(x)?, num(y)?))
                    })
                    .collect::<Result<_>>()?,
            },
            _ => return Err(Error::Config(format!("unknown function '{text}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HoloFunctionSpec::Polynomial { coefficients } if coefficients.is_empty() => {
                Err(Error::Config("polynomial without coefficients".into()))
            }
            HoloFunctionSpec::Power { alpha } if !(*alpha > 0.0) || !alpha.is_finite() => {
                Err(Error::InvalidArgument(format!("power needs alpha > 0, got {alpha}")))
            }
            HoloFunctionSpec::Table { points } => {
                if points.len() < 2 || points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Config("table needs at least two increasing abscissae".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }?;
        let f0 = self.eval(Complex64::new(0.0, 0.0))?;
        if f0.norm() > 1e-14 {
            return Err(Error::NonZeroAtOrigin(f0.to_string()));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            HoloFunctionSpec::Polynomial { coefficients } => {
                Ok(coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c))
            }
            HoloFunctionSpec::Expm1 => {
                // e^z - 1 without cancellation near 0
                let (re, im) = (z.re.exp_m1(), z.im);
                let e = re + 1.0;
                Ok(Complex64::new(re * im.cos() - 2.0 * (0.5 * im).sin().powi(2), e * im.sin()))
            }
            HoloFunctionSpec::Power { alpha } => {
                if z.re < -1e-12 * z.norm().max(1e-300) {
                    return Err(Error::OutsideFunctionDomain(format!(
                        "z^{alpha} is restricted to Re z >= 0, got {z}"
                    )));
                }
                if z == Complex64::new(0.0, 0.0) {
                    return Ok(z);
                }
                Ok(z.powf(*alpha))
            }
            HoloFunctionSpec::Table { points } => {
                let (lo, hi) = (points[0].0, points[points.len() - 1].0);
                let scale = z.norm().max(1.0);
                if z.im.abs() > 1e-8 * scale || z.re < lo || z.re > hi {
                    return Err(Error::OutsideFunctionDomain(format!(
                        "table covers [{lo}, {hi}] on the real axis, got {z}"
                    )));
                }
                let i = points.partition_point(|p| p.0 <= z.re).clamp(1, points.len() - 1);
                let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
                Ok(Complex64::new(y0 + (y1 - y0) * (z.re - x0) / (x1 - x0), 0.0))
            }
        }
    }
}

/// Kernel of `F(H)` for a positive-definite family.
pub fn holomorphic_kernel(op: &OperatorSpec, f: &HoloFunctionSpec) -> Result<KernelSpec> {
    holomorphic_kernel_with(op, f, &CalculusSettings::default(), &mut Diagnostics::default())
}

/// `Q_F` is the discrete inverse transform of `F(phi)`, where `phi` is the
/// discrete transform of the log kernel on a symmetric grid.
pub fn holomorphic_kernel_with(
    op: &OperatorSpec,
    f: &HoloFunctionSpec,
    settings: &CalculusSettings,
    diagnostics: &mut Diagnostics,
) -> Result<KernelSpec> {
    f.validate()?;
    let label = format!("F({})", op.kernel().label());
    synthesize(op, settings, diagnostics, &label, |_| Ok(()), |z| f.eval(z))
}

/// Kernel of the real power `H^alpha`; the symbol must be real and non-negative.
pub fn fractional_kernel(op: &OperatorSpec, alpha: f64) -> Result<KernelSpec> {
    fractional_kernel_with(op, alpha, &CalculusSettings::default(), &mut Diagnostics::default())
}

pub fn fractional_kernel_with(
    op: &OperatorSpec,
    alpha: f64,
    settings: &CalculusSettings,
    diagnostics: &mut Diagnostics,
) -> Result<KernelSpec> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("fractional power needs alpha > 0, got {alpha}")));
    }
    let tol = settings.negative_tol;
    let check = |phi: &SampledFunction| -> Result<()> {
        let peak = phi.max_abs();
        for (i, v) in phi.values().iter().enumerate() {
            if v.im.abs() > 1e-8 * peak {
                return Err(Error::NotNonNegative(format!(
                    "symbol has imaginary part {:.3e} at s = {:?}",
                    v.im,
                    phi.grid().point(i)
                )));
            }
            if v.re < -tol {
                return Err(Error::NotNonNegative(format!(
                    "symbol is {:.3e} at s = {:?}",
                    v.re,
                    phi.grid().point(i)
                )));
            }
        }
        Ok(())
    };
    let power = move |z: Complex64| -> Result<Complex64> { Ok(Complex64::new(z.re.max(0.0).powf(alpha), 0.0)) };
    let label = format!("({})^{alpha}", op.kernel().label());
    synthesize(op, settings, diagnostics, &label, check, power)
}

fn synthesize(
    op: &OperatorSpec,
    settings: &CalculusSettings,
    diagnostics: &mut Diagnostics,
    label: &str,
    check: impl Fn(&SampledFunction) -> Result<()>,
    f: impl Fn(Complex64) -> Result<Complex64> + Sync + Send,
) -> Result<KernelSpec> {
    let family = op.family();
    if !family.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(format!(
            "functional calculus needs a positive-definite family, got {}",
            family.name()
        )));
    }
    let dim = family.dim();
    let step = settings.step(dim);
    let reach = match settings.t_max {
        Some(t) => t,
        None => {
            let ext = log_extent(op.kernel(), family, 0)?;
            let r = ext.map_or(1.0, |e| e.iter().fold(1.0f64, |r, &(lo, hi)| r.max(lo.abs()).max(hi.abs())));
            (3.0 * r).min(if dim == 1 { 600.0 } else { 60.0 })
        }
    };
    let grid = Grid::symmetric(dim, step, (reach / step).ceil() as usize)?;
    let l = to_log_coordinates(op.kernel(), family, (1, 1), &grid)?;
    let phi = spectral::forward(&l.clone().without_breaks())?;
    check(&phi)?;
    let values = crate::par::try_map_range(phi.values().len(), |i| f(phi.values()[i]))?;
    let fphi = SampledFunction::new(phi.grid().clone(), values)?;
    let peak = fphi.max_abs();
    if peak > 0.0 {
        let ratio = nyquist_max(&fphi) / peak;
        if ratio > settings.decay_limit {
            return Err(Error::InsufficientDecay {
                what: format!("F(phi) at the Nyquist edge of a t-grid with step {step}"),
                ratio,
                limit: settings.decay_limit,
            });
        }
        if ratio > 1e-6 {
            diagnostics.warn(format!("F(phi) edge-to-peak ratio {ratio:.3e}; Wiener-algebra membership not certified"));
        }
    }
    let q = spectral::inverse(&fphi, &grid)?;
    let q = reattach_breaks(q, &l)?;
    Ok(from_log_coordinates(q, family)?.with_label(label.to_string()))
}

/// Largest `|F(phi)|` on the outermost layer of the s-grid.
fn nyquist_max(f: &SampledFunction) -> f64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&i| {
            let idx = g.multi_index(i);
            g.axes().iter().enumerate().any(|(k, a)| idx[k] == 0 || idx[k] + 1 == a.count)
        })
        .map(|i| f.values()[i].norm())
        .fold(0.0, f64::max)
}

/// Carries the breaks of `l` over to `q`: kinks keep the node value, jumps
/// get limits extrapolated from either side.
fn reattach_breaks(q: SampledFunction, l: &SampledFunction) -> Result<SampledFunction> {
    if l.breaks().is_empty() {
        return Ok(q);
    }
    let n = q.values().len();
    let v = q.values();
    let breaks = l
        .breaks()
        .iter()
        .map(|b| {
            let i = b.index;
            let jump = (b.left - b.right).norm() > 1e-12 * b.left.norm().max(b.right.norm());
            if !jump || i < LIMIT_NODES || i + LIMIT_NODES >= n {
                return Break::kink(i, v[i]);
            }
            let left: Vec<Complex64> = (1..=LIMIT_NODES).map(|d| v[i - d]).collect();
            let right: Vec<Complex64> = (1..=LIMIT_NODES).map(|d| v[i + d]).collect();
            Break {
                index: i,
                left: extrapolate_limit(&left),
                right: extrapolate_limit(&right),
            }
        })
        .collect();
    q.with_breaks(breaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use crate::operator::OperatorSpec;
    use crate::symbol::{scalar_symbol, SymbolMethod};

    fn op(pair: (KernelSpec, MatrixFamily)) -> OperatorSpec {
        OperatorSpec::new(pair.0, pair.1).unwrap()
    }

    #[test]
    fn cesaro_squared_by_product() {
        let (k, fam) = presets::cesaro();
        let q = product_kernel(&k, &k, &fam).unwrap();
        let u = (-1.0f64).exp();
        assert!((q.evaluate(&[u]).unwrap() - 1.0).abs() < 1e-3);
        assert!((q.evaluate(&[0.3]).unwrap() - (1.0 / 0.3f64).ln()).abs() < 1e-3);
        assert!(q.evaluate(&[1.5]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn product_with_zero_is_zero() {
        let (k, fam) = presets::cesaro();
        let z = product_kernel(&k, &KernelSpec::zero(1), &fam).unwrap();
        assert_eq!(z.evaluate(&[0.5]).unwrap(), 0.0);
    }

    #[test]
    fn boyd_squared_symbol_at_origin() {
        let (k, fam) = presets::boyd(0.25).unwrap();
        let q = product_kernel(&k, &k, &fam).unwrap();
        let s = Grid::uniform(-1.0, 1.0, 3).unwrap();
        let phi = scalar_symbol(&OperatorSpec::new(q, fam).unwrap(), &s, SymbolMethod::Direct).unwrap();
        assert!((phi.values()[1] - 16.0).norm() < 1e-4, "{}", phi.values()[1]);
    }

    #[test]
    fn mismatched_families_fail() {
        let (k, fam) = presets::cesaro();
        let q = product_kernel(&k, &k, &fam).unwrap();
        let (c, inv) = presets::calderon();
        assert!(matches!(product_kernel(&q, &c, &inv), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn holomorphic_identity_and_square() {
        let o = op(presets::cesaro());
        let id = holomorphic_kernel(&o, &HoloFunctionSpec::parse("poly:0,1").unwrap()).unwrap();
        for u in [0.05, 0.3, 0.7, 0.95] {
            assert!((id.evaluate(&[u]).unwrap() - 1.0).abs() < 1e-6, "u = {u}");
        }
        let sq = holomorphic_kernel(&o, &HoloFunctionSpec::parse("poly:0,0,1").unwrap()).unwrap();
        assert!((sq.evaluate(&[(-1.0f64).exp()]).unwrap() - 1.0).abs() < 1e-3);
        let both = holomorphic_kernel(&o, &HoloFunctionSpec::parse("poly:0,1,1").unwrap()).unwrap();
        for u in [0.1, 0.4, 0.8] {
            let expect = 1.0 + (1.0 / u as f64).ln();
            assert!((both.evaluate(&[u]).unwrap() - expect).abs() < 1e-3, "u = {u}");
        }
    }

    #[test]
    fn nonzero_at_origin_rejected() {
        let o = op(presets::cesaro());
        assert!(matches!(
            holomorphic_kernel(&o, &HoloFunctionSpec::Polynomial { coefficients: vec![1.0, 1.0] }),
            Err(Error::NonZeroAtOrigin(_))
        ));
        assert!(matches!(HoloFunctionSpec::parse("poly:2"), Err(Error::NonZeroAtOrigin(_))));
    }

    #[test]
    fn function_evaluation() {
        let e = HoloFunctionSpec::Expm1.eval(Complex64::new(0.3, 0.2)).unwrap();
        assert!((e - (Complex64::new(0.3, 0.2).exp() - 1.0)).norm() < 1e-15);
        let t = HoloFunctionSpec::parse("table:0:0,1:2,3:4").unwrap();
        assert_eq!(t.eval(Complex64::new(2.0, 0.0)).unwrap().re, 3.0);
        assert!(matches!(t.eval(Complex64::new(4.0, 0.0)), Err(Error::OutsideFunctionDomain(_))));
        let p = HoloFunctionSpec::Power { alpha: 0.5 };
        assert!(matches!(p.eval(Complex64::new(-1.0, 0.0)), Err(Error::OutsideFunctionDomain(_))));
    }

    #[test]
    fn cesaro_power_outside_domain() {
        // the Cesaro symbol circle reaches Re z = 0 only at infinity, but is complex
        let o = op(presets::cesaro());
        assert!(matches!(fractional_kernel(&o, 0.5), Err(Error::NotNonNegative(_))));
    }

    #[test]
    fn calderon_fractional_alpha_one() {
        let o = op(presets::calderon());
        let k1 = fractional_kernel(&o, 1.0).unwrap();
        assert!((k1.evaluate(&[2.0]).unwrap() - 0.25).abs() < 1e-6);
        assert!((k1.evaluate(&[0.5]).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn calderon_fractional_half_at_e() {
        let o = op(presets::calderon());
        let k = fractional_kernel(&o, 0.5).unwrap();
        let e = std::f64::consts::E;
        let expect = calderon_fractional_kernel(0.5, e).unwrap();
        assert!((expect - 0.0657).abs() < 1e-3);
        assert!((k.evaluate(&[e]).unwrap() - expect).abs() < 1e-3);
    }

    #[test]
    fn calderon_fractional_two_is_product() {
        let (c, fam) = presets::calderon();
        let o = OperatorSpec::new(c.clone(), fam.clone()).unwrap();
        let k2 = fractional_kernel(&o, 2.0).unwrap();
        let p = product_kernel(&c, &c, &fam).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let u = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
            let (a, b) = (k2.evaluate(&[u]).unwrap(), p.evaluate(&[u]).unwrap());
            worst = worst.max((a - b).abs() / b.abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn non_positive_definite_rejected() {
        let o = op(presets::reflected_cesaro());
        assert!(matches!(
            holomorphic_kernel(&o, &HoloFunctionSpec::Expm1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
