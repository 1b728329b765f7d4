//! Built-in kernels and matrix families.
//!
//! | name | kernel | family |
//! |------|--------|--------|
//! | `cesaro` | `chi(0,1)(u)` | dilation `a(u) = u` |
//! | `boyd` | `chi(0,1)(u) u^(-alpha)`, default `alpha = 0.25` | dilation |
//! | `calderon` | `1/(u max(1,u))` on `u > 0` | inversion `a(u) = 1/u` |
//! | `reflected-cesaro` | `chi(-1,0)(u)` | signed dilation, all sign classes |
//! | `dilation-diag-2d` | `exp(-((u1-0.5)^2 + (u2+0.25)^2))` | `diag(u1, u2)`, all sign classes |

use super::expr::Expr;
use super::family::{InverseMap, MatrixFamily};
use super::kernel::{KernelSpec, Support};
use super::octant::{mask_signs, octant_count};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

pub const DEFAULT_BOYD_ALPHA: f64 = 0.25;

pub const PRESET_NAMES: [&str; 5] = ["cesaro", "boyd", "calderon", "reflected-cesaro", "dilation-diag-2d"];

pub const FAMILY_NAMES: [&str; 4] = ["dilation", "signed-dilation", "inversion", "diagonal-2d"];

fn expr(text: &str) -> Expr {
    Expr::parse(text).expect("preset expression")
}

fn map(b: &[&str], jac: &str) -> InverseMap {
    InverseMap {
        b: b.iter().map(|s| expr(s)).collect(),
        jacobian: expr(jac),
    }
}

/// `A(u) = u` on `u > 0`.
pub fn dilation_family() -> MatrixFamily {
    let maps = BTreeMap::from([((1, 1), map(&["exp(t)"], "exp(t)"))]);
    MatrixFamily::new(1, vec![expr("u")], maps, true)
        .expect("preset family")
        .with_name("dilation")
}

/// `A(u) = u` on the whole line, with both sign classes.
pub fn signed_dilation_family() -> MatrixFamily {
    diagonal_family(1).with_name("signed-dilation")
}

/// `A(u) = 1/u` on `u > 0`.
pub fn inversion_family() -> MatrixFamily {
    let maps = BTreeMap::from([((1, 1), map(&["exp(-t)"], "-exp(-t)"))]);
    MatrixFamily::new(1, vec![expr("1/u")], maps, true)
        .expect("preset family")
        .with_name("inversion")
}

/// `A(u) = diag(u1, ..., un)` with an inverse map for every sign class.
pub fn diagonal_family(dim: usize) -> MatrixFamily {
    let var = |k: usize, name: char| if dim == 1 { name.to_string() } else { format!("{name}{}", k + 1) };
    let a = (0..dim).map(|k| expr(&var(k, 'u'))).collect();
    let mut maps = BTreeMap::new();
    for mask in 0..octant_count(dim) {
        let signs = mask_signs(mask, dim);
        let b: Vec<String> = (0..dim)
            .map(|k| format!("{}exp({})", if signs[k] < 0 { "-" } else { "" }, var(k, 't')))
            .collect();
        let b: Vec<&str> = b.iter().map(String::as_str).collect();
        let sign: i8 = signs.iter().product();
        let sum = (0..dim).map(|k| var(k, 't')).collect::<Vec<_>>().join(" + ");
        let jac = format!("{}exp({sum})", if sign < 0 { "-" } else { "" });
        maps.insert((1, mask + 1), map(&b, &jac));
    }
    MatrixFamily::new(dim, a, maps, false)
        .expect("preset family")
        .with_name(if dim == 2 { "diagonal-2d" } else { "diagonal" })
}

pub fn cesaro() -> (KernelSpec, MatrixFamily) {
    let k = KernelSpec::expression(1, expr("chi(0,1)(u)"), Support::Full)
        .expect("preset kernel")
        .with_label("cesaro");
    (k, dilation_family())
}

/// Boyd kernel `chi(0,1)(u) u^(-alpha)`; bounded on `L^2` for `alpha < 1/2`.
pub fn boyd(alpha: f64) -> Result<(KernelSpec, MatrixFamily)> {
    if !(alpha < 0.5) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("Boyd kernel needs alpha < 1/2, got {alpha}")));
    }
    let k = KernelSpec::expression(1, expr(&format!("chi(0,1)(u) * u^({})", -alpha)), Support::Full)?
        .with_label(format!("boyd(alpha={alpha})"));
    Ok((k, dilation_family()))
}

pub fn calderon() -> (KernelSpec, MatrixFamily) {
    let k = KernelSpec::expression(1, expr("1/(u*max(1,u))"), Support::Box(vec![(0.0, f64::INFINITY)]))
        .expect("preset kernel")
        .with_label("calderon");
    (k, inversion_family())
}

pub fn reflected_cesaro() -> (KernelSpec, MatrixFamily) {
    let k = KernelSpec::expression(1, expr("chi(-1,0)(u)"), Support::Full)
        .expect("preset kernel")
        .with_label("reflected-cesaro");
    (k, signed_dilation_family())
}

pub fn dilation_diag_2d() -> (KernelSpec, MatrixFamily) {
    let k = KernelSpec::expression(2, expr("exp(-((u1 - 0.5)^2 + (u2 + 0.25)^2))"), Support::Full)
        .expect("preset kernel")
        .with_label("dilation-diag-2d");
    (k, diagonal_family(2))
}

/// Looks up a preset; `alpha` applies to `boyd` only.
pub fn preset(name: &str, alpha: Option<f64>) -> Result<(KernelSpec, MatrixFamily)> {
    match name {
        "cesaro" => Ok(cesaro()),
        "boyd" => boyd(alpha.unwrap_or(DEFAULT_BOYD_ALPHA)),
        "calderon" => Ok(calderon()),
        "reflected-cesaro" => Ok(reflected_cesaro()),
        "dilation-diag-2d" => Ok(dilation_diag_2d()),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

pub fn family_preset(name: &str) -> Result<MatrixFamily> {
    match name {
        "dilation" => Ok(dilation_family()),
        "signed-dilation" => Ok(signed_dilation_family()),
        "inversion" => Ok(inversion_family()),
        "diagonal-2d" => Ok(diagonal_family(2)),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for name in PRESET_NAMES {
            let (k, f) = preset(name, None).unwrap();
            assert_eq!(k.dim(), f.dim());
            f.validate(&[]).unwrap();
        }
        for name in FAMILY_NAMES {
            family_preset(name).unwrap();
        }
        assert!(matches!(preset("nosuch", None), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn boyd_kernel_values() {
        let (k, _) = boyd(0.25).unwrap();
        assert!((k.evaluate(&[0.5]).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(k.evaluate(&[-0.5]).unwrap(), 0.0);
        assert!(boyd(0.5).is_err());
    }
}
