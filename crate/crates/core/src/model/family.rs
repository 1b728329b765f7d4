use super::expr::Expr;
use super::octant::{octant_count, pair_class, sign_mask, OctantIndex};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Inverse of `|a(u)| = e^t` on one sign class, with its Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseMap {
    /// `u = b(t)`, one expression in `t1..tn` per coordinate.
    pub b: Vec<Expr>,
    /// `J(t) = det(db/dt)`.
    pub jacobian: Expr,
}

impl InverseMap {
    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        self.b.iter().map(|e| e.eval(&[], t)).collect()
    }

    pub fn jacobian_at(&self, t: &[f64]) -> f64 {
        self.jacobian.eval(&[], t)
    }
}

/// A commuting self-adjoint family `A(u) = C diag(a(u)) C^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    name: String,
    dim: usize,
    eigenvalues: Vec<Expr>,
    conjugator: Option<Vec<Vec<f64>>>,
    inverse_maps: BTreeMap<(usize, usize), InverseMap>,
    positive_definite: bool,
}

impl MatrixFamily {
    pub fn new(
        dim: usize,
        eigenvalues: Vec<Expr>,
        inverse_maps: BTreeMap<(usize, usize), InverseMap>,
        positive_definite: bool,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidFamily(format!("dimension must be 1 or 2, got {dim}")));
        }
        if eigenvalues.len() != dim {
            return Err(Error::InvalidFamily(format!(
                "{} eigenvalue maps for dimension {dim}",
                eigenvalues.len()
            )));
        }
        for e in &eigenvalues {
            e.check_dimension(dim)?;
        }
        for (&(i, j), map) in &inverse_maps {
            pair_class(i, j, dim)?;
            if map.b.len() != dim {
                return Err(Error::InvalidFamily(format!(
                    "inverse map for ({i},{j}) has {} components",
                    map.b.len()
                )));
            }
            for e in map.b.iter().chain(std::iter::once(&map.jacobian)) {
                e.check_dimension(dim)?;
            }
        }
        Ok(Self {
            name: "custom".into(),
            dim,
            eigenvalues,
            conjugator: None,
            inverse_maps,
            positive_definite,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Attaches an orthogonal conjugator `C` (checked to 1e-12).
    pub fn with_conjugator(mut self, c: Vec<Vec<f64>>) -> Result<Self> {
        let n = self.dim;
        if c.len() != n || c.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidFamily(format!("conjugator must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| c[i][k] * c[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-12 {
                    return Err(Error::InvalidFamily(format!(
                        "conjugator is not orthogonal: (C C^T)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        self.conjugator = Some(c);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn eigenvalue_exprs(&self) -> &[Expr] {
        &self.eigenvalues
    }

    pub fn conjugator(&self) -> Option<&Vec<Vec<f64>>> {
        self.conjugator.as_ref()
    }

    pub fn inverse_maps(&self) -> &BTreeMap<(usize, usize), InverseMap> {
        &self.inverse_maps
    }

    pub fn eigenvalues(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .map(|e| {
                let v = e.eval(u, &[]);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation(format!("eigenvalue {e} is {v} at u = {u:?}")))
                }
            })
            .collect()
    }

    /// Sign class of `a(u)`; errors where some eigenvalue vanishes.
    pub fn sign_class(&self, u: &[f64]) -> Result<usize> {
        let a = self.eigenvalues(u)?;
        sign_mask(&a).ok_or_else(|| Error::SingularMatrix(u.to_vec()))
    }

    /// Inverse map registered for the pair, or for another pair of the same
    /// sign class.
    pub fn inverse_for_pair(&self, i: usize, j: usize) -> Result<&InverseMap> {
        let class = pair_class(i, j, self.dim)?;
        if let Some(m) = self.inverse_maps.get(&(i, j)) {
            return Ok(m);
        }
        self.inverse_for_class(class).map_err(|_| Error::MissingInverseMap { i, j })
    }

    /// Inverse map for a sign class, preferring the pair `(1, class + 1)`.
    pub fn inverse_for_class(&self, class: usize) -> Result<&InverseMap> {
        let j = OctantIndex::from_mask(class).get();
        if let Some(m) = self.inverse_maps.get(&(1, j)) {
            return Ok(m);
        }
        self.inverse_maps
            .iter()
            .find(|(&(a, b), _)| (a - 1) ^ (b - 1) == class)
            .map(|(_, m)| m)
            .ok_or(Error::MissingInverseMap { i: 1, j })
    }

    pub fn has_inverse_for_class(&self, class: usize) -> bool {
        self.inverse_for_class(class).is_ok()
    }

    /// `A(u) x`.
    pub fn apply(&self, u: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let a = self.eigenvalues(u)?;
        Ok(self.apply_eigenvalues(&a, x))
    }

    pub(crate) fn apply_eigenvalues(&self, a: &[f64], x: &[f64]) -> Vec<f64> {
        match &self.conjugator {
            None => a.iter().zip(x).map(|(ai, xi)| ai * xi).collect(),
            Some(c) => {
                let n = self.dim;
                // C diag(a) C^T x
                let y: Vec<f64> = (0..n)
                    .map(|k| a[k] * (0..n).map(|m| c[m][k] * x[m]).sum::<f64>())
                    .collect();
                (0..n).map(|m| (0..n).map(|k| c[m][k] * y[k]).sum()).collect()
            }
        }
    }

    /// True when eigenvalue `k` reads no coordinate other than `u_k`.
    pub fn is_separable(&self) -> bool {
        self.eigenvalues
            .iter()
            .enumerate()
            .all(|(k, e)| e.u_slots().iter().all(|&s| s == k))
    }

    /// Checks the inverse maps on sampled `t` and positivity on `u_samples`.
    pub fn validate(&self, u_samples: &[Vec<f64>]) -> Result<()> {
        let ts: Vec<f64> = (0..=20).map(|k| -5.0 + 0.5 * k as f64).collect();
        let points: Vec<Vec<f64>> = match self.dim {
            1 => ts.iter().map(|&t| vec![t]).collect(),
            _ => ts
                .iter()
                .step_by(2)
                .flat_map(|&a| ts.iter().step_by(2).map(move |&b| vec![a, b]))
                .collect(),
        };
        for (&(i, j), map) in &self.inverse_maps {
            let class = pair_class(i, j, self.dim)?;
            for t in &points {
                let u = map.point(t);
                let a = self.eigenvalues(&u)?;
                for k in 0..self.dim {
                    let target = t[k].exp();
                    if (a[k].abs() - target).abs() > 1e-10 * target {
                        return Err(Error::InvalidFamily(format!(
                            "inverse map ({i},{j}): |a_{}(b(t))| = {} but e^t = {target} at t = {t:?}",
                            k + 1,
                            a[k].abs()
                        )));
                    }
                }
                if sign_mask(&a) != Some(class) {
                    return Err(Error::InvalidFamily(format!(
                        "inverse map ({i},{j}) lands outside its sign class at t = {t:?}"
                    )));
                }
                let jac = map.jacobian_at(t);
                if !jac.is_finite() || jac == 0.0 {
                    return Err(Error::InvalidFamily(format!(
                        "Jacobian of ({i},{j}) is {jac} at t = {t:?}"
                    )));
                }
            }
        }
        if self.positive_definite {
            for u in u_samples {
                let a = self.eigenvalues(u)?;
                if a.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::NotPositiveDefinite(format!(
                        "a(u) = {a:?} at u = {u:?}"
                    )));
                }
            }
            if !self.has_inverse_for_class(0) {
                return Err(Error::MissingInverseMap { i: 1, j: 1 });
            }
        }
        Ok(())
    }

    pub fn class_count(&self) -> usize {
        octant_count(self.dim)
    }
}

/// Whether `a(u)` has the sign pattern `eps(i, j)`.
pub fn omega_membership(u: &[f64], i: usize, j: usize, family: &MatrixFamily) -> Result<bool> {
    let class = pair_class(i, j, family.dim())?;
    Ok(family.sign_class(u)? == class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn membership_of_worked_points() {
        let f = presets::signed_dilation_family();
        assert!(omega_membership(&[0.5], 1, 1, &f).unwrap());
        assert!(!omega_membership(&[-0.5], 1, 1, &f).unwrap());
        assert!(omega_membership(&[-0.5], 1, 2, &f).unwrap());
        assert!(matches!(omega_membership(&[0.0], 1, 1, &f), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn preset_families_validate() {
        presets::dilation_family().validate(&[vec![0.5]]).unwrap();
        presets::inversion_family().validate(&[vec![3.0]]).unwrap();
        presets::signed_dilation_family().validate(&[]).unwrap();
        presets::diagonal_family(2).validate(&[]).unwrap();
        assert!(presets::dilation_family().validate(&[vec![-0.5]]).is_err());
    }

    #[test]
    fn inconsistent_inverse_map_is_rejected() {
        let mut maps = BTreeMap::new();
        maps.insert(
            (1, 1),
            InverseMap {
                b: vec![Expr::parse("exp(2*t)").unwrap()],
                jacobian: Expr::parse("2*exp(2*t)").unwrap(),
            },
        );
        let f = MatrixFamily::new(1, vec![Expr::parse("u").unwrap()], maps, true).unwrap();
        assert!(matches!(f.validate(&[]), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn conjugated_action() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = presets::diagonal_family(2)
            .with_conjugator(vec![vec![s, -s], vec![s, s]])
            .unwrap();
        // eigenvectors (1,1)/sqrt2 -> a1, (-1,1)/sqrt2 -> a2
        let y = f.apply(&[2.0, 3.0], &[1.0, 1.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-14 && (y[1] - 2.0).abs() < 1e-14);
        let y = f.apply(&[2.0, 3.0], &[-1.0, 1.0]).unwrap();
        assert!((y[0] + 3.0).abs() < 1e-14 && (y[1] - 3.0).abs() < 1e-14);
        assert!(presets::diagonal_family(2)
            .with_conjugator(vec![vec![1.0, 1.0], vec![0.0, 1.0]])
            .is_err());
    }

    #[test]
    fn class_lookup_falls_back_to_same_sign_pattern() {
        let f = presets::diagonal_family(2);
        assert!(f.inverse_for_pair(3, 2).is_ok());
        let f = presets::dilation_family();
        assert!(matches!(f.inverse_for_pair(1, 2), Err(Error::MissingInverseMap { i: 1, j: 2 })));
    }
}
