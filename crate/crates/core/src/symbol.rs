//! Scalar and matrix symbols.
//!
//! On sign class `eps` the symbol is
//! `phi_eps(s) = \int_{Omega_eps} K(u) |a(u)|^{-1/2 - i s} du`, and the matrix
//! symbol has entries `Phi_ij = phi_{eps(i,j)}`. Each class is computed once,
//! so `Phi_ij = Phi_ji` holds exactly.

use crate::error::{Error, Result};
use crate::grid::{fourier_forward_with, Diagnostics, Grid, SampledFunction};
use crate::model::{
    auto_log_grid, log_kernel_for_class, mask_signs, octant_count, pair_class, sign_mask, KernelSource, KernelSpec,
    MatrixFamily,
};
use crate::operator::OperatorSpec;
use crate::par;
use crate::quadrature::{composite, Rule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Re-seed interval of the phase recurrence.
const RESEED: usize = 32;

/// Relative magnitude below which the integrand counts as negligible.
const EXTENT_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolMethod {
    /// Gauss-Legendre quadrature of the defining integral in `log |u|`.
    Direct,
    /// Fourier transform of the log kernel.
    LogFourier,
}

/// Log-coordinate settings of the log-fourier route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSettings {
    pub t_step: f64,
    /// `None` picks the reach from a scan of the log kernel.
    pub t_max: Option<f64>,
}

impl Default for SymbolSettings {
    fn default() -> Self {
        Self {
            t_step: 0.01,
            t_max: None,
        }
    }
}

/// The default s-grid: `[-20, 20]` with 4001 nodes.
pub fn default_s_grid() -> Grid {
    Grid::uniform(-20.0, 20.0, 4001).expect("default s-grid")
}

/// `phi_{K,A}` on `s_grid`; positive-definite families only.
pub fn scalar_symbol(op: &OperatorSpec, s_grid: &Grid, method: SymbolMethod) -> Result<SampledFunction> {
    scalar_symbol_with(op, s_grid, method, &SymbolSettings::default(), &mut Diagnostics::default())
}

pub fn scalar_symbol_with(
    op: &OperatorSpec,
    s_grid: &Grid,
    method: SymbolMethod,
    settings: &SymbolSettings,
    diagnostics: &mut Diagnostics,
) -> Result<SampledFunction> {
    if !op.family().is_positive_definite() {
        return Err(Error::NotPositiveDefinite(format!(
            "family {} is not positive definite; use matrix_symbol",
            op.family().name()
        )));
    }
    let classes = class_symbols(op.kernel(), op.family(), s_grid, method, settings, diagnostics)?;
    Ok(classes.into_iter().next().expect("class 0"))
}

/// Symbol of every sign class, indexed by class mask.
pub fn class_symbols(
    kernel: &KernelSpec,
    family: &MatrixFamily,
    s_grid: &Grid,
    method: SymbolMethod,
    settings: &SymbolSettings,
    diagnostics: &mut Diagnostics,
) -> Result<Vec<SampledFunction>> {
    let dim = family.dim();
    if kernel.dim() != dim || s_grid.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {}, family dimension {dim}, s-grid dimension {}",
            kernel.dim(),
            s_grid.dim()
        )));
    }
    if s_grid.axes().iter().any(|a| a.half_line) {
        return Err(Error::InvalidGrid("s-grids must be uniform".into()));
    }
    let count = octant_count(dim);
    if kernel.is_zero() {
        return Ok(vec![SampledFunction::zeros(s_grid.clone()); count]);
    }
    let log_route = method == SymbolMethod::LogFourier || matches!(kernel.source(), KernelSource::LogTabulated(_));
    if log_route {
        let t_grid = match kernel.source() {
            KernelSource::LogTabulated(_) => None,
            _ => Some(auto_log_grid(&[kernel], family, settings.t_step, settings.t_max)?),
        };
        return (0..count)
            .map(|class| {
                if !family.has_inverse_for_class(class) {
                    return Ok(SampledFunction::zeros(s_grid.clone()));
                }
                let l = match (&t_grid, kernel.source()) {
                    (_, KernelSource::LogTabulated(lk)) => match lk.class(class) {
                        Some(q) => q.clone(),
                        None => return Ok(SampledFunction::zeros(s_grid.clone())),
                    },
                    (Some(t), _) => log_kernel_for_class(kernel, family, class, t)?,
                    (None, _) => unreachable!(),
                };
                fourier_forward_with(&l, s_grid, diagnostics)
            })
            .collect();
    }
    let nodes = direct_nodes(kernel, family, s_grid)?;
    let mut out = Vec::with_capacity(count);
    for class in 0..count {
        let nodes = &nodes[class];
        if nodes.is_empty() {
            out.push(SampledFunction::zeros(s_grid.clone()));
            continue;
        }
        if !family.has_inverse_for_class(class) {
            let j = class + 1;
            return Err(Error::MissingInverseMap { i: 1, j });
        }
        let values = match nodes {
            ClassNodes::Line { theta, weight } => line_sum(theta, weight, s_grid),
            ClassNodes::Separable { theta0, theta1, weight } => separable_sum(theta0, theta1, weight, s_grid),
            ClassNodes::Scattered { theta, weight } => scattered_sum(theta, weight, s_grid),
        };
        out.push(SampledFunction::new(s_grid.clone(), values)?);
    }
    if family.is_positive_definite() && out.iter().skip(1).any(|f| f.max_abs() > 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "kernel {} has mass where a(u) is not positive",
            kernel.label()
        )));
    }
    Ok(out)
}

/// Quadrature nodes of one sign class: `theta = log |a(u)|` and weights
/// `K |det a|^{-1/2} du`.
enum ClassNodes {
    Line {
        theta: Vec<f64>,
        weight: Vec<f64>,
    },
    /// `theta_k` depends on the k-th rule node only; `weight` is row-major.
    Separable {
        theta0: Vec<f64>,
        theta1: Vec<f64>,
        weight: Vec<f64>,
    },
    Scattered {
        theta: Vec<[f64; 2]>,
        weight: Vec<f64>,
    },
}

impl ClassNodes {
    fn is_empty(&self) -> bool {
        match self {
            ClassNodes::Line { weight, .. }
            | ClassNodes::Separable { weight, .. }
            | ClassNodes::Scattered { weight, .. } => weight.iter().all(|&w| w == 0.0),
        }
    }
}

/// `|K(u)| |det a(u)|^{-1/2} prod |u_k|` at `u_k = sign_k e^{tau_k}`, with `theta`
/// and the sign class.
fn integrand(kernel: &KernelSpec, family: &MatrixFamily, tau: &[f64], signs: &[i8]) -> Result<Option<(f64, Vec<f64>, usize)>> {
    let u: Vec<f64> = tau.iter().zip(signs).map(|(t, &s)| f64::from(s) * t.exp()).collect();
    let k = kernel.evaluate(&u)?;
    if k == 0.0 {
        return Ok(None);
    }
    let a = family.eigenvalues(&u)?;
    let class = sign_mask(&a).ok_or_else(|| Error::SingularMatrix(u.clone()))?;
    let theta: Vec<f64> = a.iter().map(|x| x.abs().ln()).collect();
    let sum_theta: f64 = theta.iter().sum();
    let sum_tau: f64 = tau.iter().sum();
    Ok(Some((k * (sum_tau - 0.5 * sum_theta).exp(), theta, class)))
}

/// `tau`-interval of one quadrant along axis `k`, clipped to the support.
fn quadrant_range(kernel: &KernelSpec, k: usize, sign: i8, reach: f64) -> (f64, f64) {
    let (lo, hi) = kernel.support_bounds(k);
    let (ulo, uhi) = if sign > 0 { (lo.max(0.0), hi) } else { (-hi.min(0.0), -lo) };
    let tlo = if ulo > 0.0 { ulo.ln().max(-reach) } else { -reach };
    let thi = if uhi.is_finite() { uhi.ln().min(reach) } else { reach };
    (tlo, thi)
}

/// Images in `tau` of the non-smooth points of the kernel and of the
/// eigenvalue maps along axis `k` in one quadrant.
fn tau_breaks(kernel: &KernelSpec, family: &MatrixFamily, k: usize, sign: i8) -> Vec<f64> {
    let mut points = kernel.breakpoints(k);
    for e in family.eigenvalue_exprs() {
        points.extend(e.breakpoints(k));
    }
    points
        .into_iter()
        .filter(|&b| b * f64::from(sign) > 0.0)
        .map(|b| b.abs().ln())
        .collect()
}

fn direct_nodes(kernel: &KernelSpec, family: &MatrixFamily, s_grid: &Grid) -> Result<Vec<ClassNodes>> {
    let dim = family.dim();
    let count = octant_count(dim);
    let s_max = s_grid
        .axes()
        .iter()
        .map(|a| a.min.abs().max(a.max.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let (reach, scan_step, panel) = if dim == 1 {
        (400.0, 0.25, (5.0 / s_max).min(0.25))
    } else {
        (60.0, 0.5, (5.0 / s_max).min(1.0))
    };
    // coarse scan for the extents of each quadrant
    let mut extents: Vec<Option<Vec<(f64, f64)>>> = Vec::with_capacity(count);
    let mut peak: f64 = 0.0;
    let mut scans = Vec::with_capacity(count);
    for q in 0..count {
        let signs = mask_signs(q, dim);
        let ranges: Vec<(f64, f64)> = (0..dim).map(|k| quadrant_range(kernel, k, signs[k], reach)).collect();
        if ranges.iter().any(|(lo, hi)| !(hi > lo)) {
            scans.push(Vec::new());
            continue;
        }
        let axes: Vec<Vec<f64>> = ranges
            .iter()
            .map(|&(lo, hi)| {
                let n = ((hi - lo) / scan_step).ceil() as usize;
                (0..=n).map(|i| lo + (hi - lo) * i as f64 / n.max(1) as f64).collect()
            })
            .collect();
        let points: Vec<Vec<f64>> = match dim {
            1 => axes[0].iter().map(|&t| vec![t]).collect(),
            _ => axes[0]
                .iter()
                .flat_map(|&a| axes[1].iter().map(move |&b| vec![a, b]))
                .collect(),
        };
        let values = par::try_map_range(points.len(), |i| {
            integrand(kernel, family, &points[i], &signs).map(|v| v.map_or(0.0, |(w, _, _)| w.abs()))
        })?;
        peak = values.iter().fold(peak, |m, &v| m.max(v));
        scans.push(points.into_iter().zip(values).collect::<Vec<_>>());
    }
    for (q, scan) in scans.iter().enumerate() {
        let signs = mask_signs(q, dim);
        let mut ext: Option<Vec<(f64, f64)>> = None;
        for (p, v) in scan {
            if *v > EXTENT_THRESHOLD * peak {
                let e = ext.get_or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); dim]);
                for k in 0..dim {
                    e[k] = (e[k].0.min(p[k] - scan_step), e[k].1.max(p[k] + scan_step));
                }
            }
        }
        // clip to the quadrant's support range
        extents.push(ext.map(|e| {
            e.into_iter()
                .enumerate()
                .map(|(k, (lo, hi))| {
                    let (rlo, rhi) = quadrant_range(kernel, k, signs[k], reach);
                    (lo.max(rlo), hi.min(rhi))
                })
                .collect()
        }));
    }

    let separable = dim == 2 && family.is_separable();
    let mut classes: Vec<ClassNodes> = (0..count)
        .map(|_| match (dim, separable) {
            (1, _) => ClassNodes::Line {
                theta: Vec::new(),
                weight: Vec::new(),
            },
            _ => ClassNodes::Scattered {
                theta: Vec::new(),
                weight: Vec::new(),
            },
        })
        .collect();
    let mut separable_parts: Vec<Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>> = vec![Vec::new(); count];
    for (q, ext) in extents.iter().enumerate() {
        let Some(ext) = ext else { continue };
        let signs = mask_signs(q, dim);
        let rules: Vec<Rule> = (0..dim)
            .map(|k| composite(ext[k].0, ext[k].1, panel, 16, &tau_breaks(kernel, family, k, signs[k]), true))
            .collect();
        if rules.iter().any(Rule::is_empty) {
            continue;
        }
        if dim == 1 {
            let r = &rules[0];
            let evals = par::try_map_range(r.len(), |i| integrand(kernel, family, &[r.nodes[i]], &signs))?;
            for (i, e) in evals.into_iter().enumerate() {
                if let Some((w, theta, class)) = e {
                    if let ClassNodes::Line { theta: th, weight } = &mut classes[class] {
                        th.push(theta[0]);
                        weight.push(w * r.weights[i]);
                    }
                }
            }
            continue;
        }
        let (r0, r1) = (&rules[0], &rules[1]);
        let evals = par::try_map_range(r0.len(), |i| {
            (0..r1.len())
                .map(|j| integrand(kernel, family, &[r0.nodes[i], r1.nodes[j]], &signs))
                .collect::<Result<Vec<_>>>()
        })?;
        if separable {
            // theta_k and the class bit of axis k depend on tau_k only
            let mut theta0 = vec![f64::NAN; r0.len()];
            let mut theta1 = vec![f64::NAN; r1.len()];
            let mut per_class = vec![vec![0.0; r0.len() * r1.len()]; count];
            for (i, row) in evals.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if let Some((w, theta, class)) = e {
                        theta0[i] = theta[0];
                        theta1[j] = theta[1];
                        per_class[*class][i * r1.len() + j] = w * r0.weights[i] * r1.weights[j];
                    }
                }
            }
            // rows or columns with no mass carry no theta; any value works
            theta0.iter_mut().filter(|x| x.is_nan()).for_each(|x| *x = 0.0);
            theta1.iter_mut().filter(|x| x.is_nan()).for_each(|x| *x = 0.0);
            for (class, weight) in per_class.into_iter().enumerate() {
                if weight.iter().any(|&w| w != 0.0) {
                    separable_parts[class].push((theta0.clone(), theta1.clone(), weight));
                }
            }
        } else {
            for (i, row) in evals.into_iter().enumerate() {
                for (j, e) in row.into_iter().enumerate() {
                    if let Some((w, theta, class)) = e {
                        if let ClassNodes::Scattered { theta: th, weight } = &mut classes[class] {
                            th.push([theta[0], theta[1]]);
                            weight.push(w * r0.weights[i] * r1.weights[j]);
                        }
                    }
                }
            }
        }
    }
    if separable {
        for (class, parts) in separable_parts.into_iter().enumerate() {
            classes[class] = merge_separable(parts);
        }
    }
    Ok(classes)
}

/// Stacks per-quadrant separable blocks into one block-diagonal layout.
fn merge_separable(parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>) -> ClassNodes {
    let n0: usize = parts.iter().map(|p| p.0.len()).sum();
    let n1: usize = parts.iter().map(|p| p.1.len()).sum();
    let mut theta0 = Vec::with_capacity(n0);
    let mut theta1 = Vec::with_capacity(n1);
    let mut weight = vec![0.0; n0 * n1];
    let (mut o0, mut o1) = (0, 0);
    for (t0, t1, w) in parts {
        for i in 0..t0.len() {
            for j in 0..t1.len() {
                weight[(o0 + i) * n1 + o1 + j] = w[i * t1.len() + j];
            }
        }
        o0 += t0.len();
        o1 += t1.len();
        theta0.extend(t0);
        theta1.extend(t1);
    }
    ClassNodes::Separable { theta0, theta1, weight }
}

/// `sum_n w_n exp(-i s theta_n)` along a uniform s-axis, by a phase
/// recurrence re-seeded every [`RESEED`] steps.
fn phase_rows(theta: &[f64], weight: &[f64], axis: &crate::grid::Axis) -> Vec<Complex64> {
    let n = axis.count;
    let ds = axis.step();
    let chunks = n.div_ceil(RESEED);
    par::map_range(chunks, |c| {
        let start = c * RESEED;
        let len = RESEED.min(n - start);
        let s0 = axis.sample_coord(start);
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for (&th, &w) in theta.iter().zip(weight) {
            if w == 0.0 {
                continue;
            }
            let step = Complex64::from_polar(1.0, -ds * th);
            let mut z = Complex64::from_polar(w, -s0 * th);
            for a in acc.iter_mut() {
                *a += z;
                z *= step;
            }
        }
        acc
    })
    .into_iter()
    .flatten()
    .collect()
}

fn line_sum(theta: &[f64], weight: &[f64], s_grid: &Grid) -> Vec<Complex64> {
    phase_rows(theta, weight, s_grid.axis(0))
}

/// `E0 W E1^T` with `E_k[s, n] = exp(-i s theta_k[n])`.
fn separable_sum(theta0: &[f64], theta1: &[f64], weight: &[f64], s_grid: &Grid) -> Vec<Complex64> {
    let (a0, a1) = (s_grid.axis(0), s_grid.axis(1));
    let n1 = theta1.len();
    let e = |axis: &crate::grid::Axis, theta: &[f64]| -> Vec<Vec<Complex64>> {
        (0..axis.count)
            .map(|m| {
                let s = axis.sample_coord(m);
                theta.iter().map(|&t| Complex64::from_polar(1.0, -s * t)).collect()
            })
            .collect()
    };
    let e0 = e(a0, theta0);
    let e1 = e(a1, theta1);
    // T[i][m1] = sum_j W[i][j] E1[m1][j]
    let t: Vec<Vec<Complex64>> = par::map_range(theta0.len(), |i| {
        let row = &weight[i * n1..(i + 1) * n1];
        if row.iter().all(|&w| w == 0.0) {
            return vec![Complex64::new(0.0, 0.0); a1.count];
        }
        e1.iter()
            .map(|e1m| row.iter().zip(e1m).map(|(&w, z)| w * z).sum())
            .collect()
    });
    par::map_range(a0.count * a1.count, |flat| {
        let (m0, m1) = (flat / a1.count, flat % a1.count);
        e0[m0].iter().zip(&t).map(|(z, ti)| z * ti[m1]).sum()
    })
}

fn scattered_sum(theta: &[[f64; 2]], weight: &[f64], s_grid: &Grid) -> Vec<Complex64> {
    par::map_range(s_grid.len(), |flat| {
        let s = s_grid.sample_point(flat);
        theta
            .iter()
            .zip(weight)
            .map(|(t, &w)| Complex64::from_polar(w, -(s[0] * t[0] + s[1] * t[1])))
            .sum()
    })
}

/// The matrix symbol `Phi(s)`: a `2^n x 2^n` array over a shared s-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    dim: usize,
    classes: Vec<SampledFunction>,
}

impl SymbolMatrix {
    pub fn from_classes(dim: usize, classes: Vec<SampledFunction>) -> Result<Self> {
        if classes.len() != octant_count(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} class symbols for dimension {dim}",
                classes.len()
            )));
        }
        for c in &classes[1..] {
            c.grid().ensure_same(classes[0].grid())?;
        }
        Ok(Self { dim, classes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        octant_count(self.dim)
    }

    pub fn s_grid(&self) -> &Grid {
        self.classes[0].grid()
    }

    /// Entry `(i, j)`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> Result<&SampledFunction> {
        Ok(&self.classes[pair_class(i, j, self.dim)?])
    }

    /// Symbol of sign class `mask`.
    pub fn class(&self, mask: usize) -> &SampledFunction {
        &self.classes[mask]
    }

    /// `Phi(s)` at flat s-index `k`, row-major.
    pub fn matrix_at(&self, k: usize) -> Vec<Vec<Complex64>> {
        let m = self.size();
        (0..m)
            .map(|i| (0..m).map(|j| self.classes[i ^ j].values()[k]).collect())
            .collect()
    }
}

pub fn matrix_symbol(op: &OperatorSpec, s_grid: &Grid) -> Result<SymbolMatrix> {
    matrix_symbol_with(op, s_grid, &SymbolSettings::default(), &mut Diagnostics::default())
}

pub fn matrix_symbol_with(
    op: &OperatorSpec,
    s_grid: &Grid,
    settings: &SymbolSettings,
    diagnostics: &mut Diagnostics,
) -> Result<SymbolMatrix> {
    let classes = class_symbols(op.kernel(), op.family(), s_grid, SymbolMethod::Direct, settings, diagnostics)?;
    SymbolMatrix::from_classes(op.family().dim(), classes)
}

/// `sup_s |Phi(s)|_op`, the largest singular value over the grid.
pub fn symbol_norm(phi: &SymbolMatrix) -> f64 {
    let n = phi.s_grid().len();
    par::map_range(n, |k| largest_singular_value(&phi.matrix_at(k)))
        .into_iter()
        .fold(0.0, f64::max)
}

/// `sup_s |phi(s)|` for a scalar symbol.
pub fn scalar_symbol_norm(phi: &SampledFunction) -> f64 {
    phi.max_abs()
}

/// Largest singular value of a small complex matrix: the square root of the
/// top eigenvalue of `M^H M`, via cyclic Jacobi on its real embedding.
pub fn largest_singular_value(m: &[Vec<Complex64>]) -> f64 {
    let rows = m.len();
    if rows == 0 {
        return 0.0;
    }
    let cols = m[0].len();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); cols]; cols];
    for a in 0..cols {
        for b in 0..cols {
            gram[a][b] = (0..rows).map(|r| m[r][a].conj() * m[r][b]).sum();
        }
    }
    // [[Re G, -Im G], [Im G, Re G]] is real symmetric with each eigenvalue of G twice
    let n = 2 * cols;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..cols {
        for j in 0..cols {
            let g = gram[i][j];
            a[i][j] = g.re;
            a[i + cols][j + cols] = g.re;
            a[i][j + cols] = -g.im;
            a[i + cols][j] = g.im;
        }
    }
    let eig = jacobi_eigenvalues(a, 1e-12);
    eig.into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// sweeping until the off-diagonal norm falls below `tol` times the norm.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>, tol: f64) -> Vec<f64> {
    let n = a.len();
    let frob = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= tol * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Sampled range of a scalar symbol with its interval hull.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub points: Vec<Complex64>,
    /// `[0, max phi]` for real non-negative symbols.
    pub hull: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Boundary-to-peak ratio above which the spectrum estimate warns.
pub const SPECTRUM_DECAY_RATIO: f64 = 1e-3;

pub fn spectrum_estimate(phi: &SampledFunction) -> SpectrumEstimate {
    let points = phi.values().to_vec();
    let max = phi.max_abs();
    let mut warnings = Vec::new();
    if max > 0.0 {
        let ratio = phi.boundary_max_abs() / max;
        if ratio > SPECTRUM_DECAY_RATIO {
            warnings.push(format!(
                "symbol boundary/peak ratio {ratio:.3e} exceeds {SPECTRUM_DECAY_RATIO:.0e}; the s-grid may miss part of the range"
            ));
        }
    }
    let tol = 1e-10 * max.max(f64::MIN_POSITIVE);
    let real_nonneg = points.iter().all(|z| z.im.abs() <= tol && z.re >= -tol);
    let hull = real_nonneg.then(|| (0.0, points.iter().map(|z| z.re).fold(0.0, f64::max)));
    SpectrumEstimate { points, hull, warnings }
}
