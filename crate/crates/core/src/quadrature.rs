//! Composite Gauss-Legendre rules on panel partitions.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: quadrature nodes with weights.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite Gauss-Legendre rule on `[lo, hi]`.
///
/// Panels have width at most `panel_width`; the points in `breaks` that fall
/// inside `(lo, hi)` are forced to be panel boundaries, and so is the origin
/// when `align_origin` is set and `0` lies inside.
pub fn composite(
    lo: f64,
    hi: f64,
    panel_width: f64,
    order: usize,
    breaks: &[f64],
    align_origin: bool,
) -> Rule {
    let mut rule = Rule::default();
    if !(hi > lo) {
        return rule;
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    if align_origin && lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let (gx, gw) = gauss_legendre(order);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = ((b - a) / panel_width).ceil().max(1.0) as usize;
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let left = a + p as f64 * width;
            let mid = left + 0.5 * width;
            for (x, w) in gx.iter().zip(&gw) {
                rule.nodes.push(mid + 0.5 * width * x);
                rule.weights.push(0.5 * width * w);
            }
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            for degree in 0..(2 * n) {
                let exact = if degree % 2 == 1 {
                    0.0
                } else {
                    2.0 / (degree as f64 + 1.0)
                };
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(degree as i32))
                    .sum();
                assert!((approx - exact).abs() < 1e-13, "n={n} degree={degree}");
            }
        }
    }

    #[test]
    fn composite_respects_breaks() {
        let rule = composite(-2.0, 3.0, 0.7, 8, &[0.5, 10.0], true);
        // a step at 0.5 is integrated exactly when it is a panel boundary
        let v = rule.integrate(|x| if x < 0.5 { 1.0 } else { 2.0 });
        assert!((v - (2.5 + 5.0)).abs() < 1e-13);
        let v = rule.integrate(|x| x.abs());
        assert!((v - (2.0 + 4.5)).abs() < 1e-13);
    }

    #[test]
    fn composite_empty_interval() {
        assert!(composite(1.0, 1.0, 0.5, 4, &[], false).is_empty());
    }
}
