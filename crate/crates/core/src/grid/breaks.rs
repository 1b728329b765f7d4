//! Euler-Maclaurin corrections for trapezoid sums across interior jumps or
//! kinks of a piecewise-smooth integrand.
//!
//! For `F(t) = g(t) exp(w t)` sampled with step `h`, with `g` smooth on each
//! side of a break at `c` and the trapezoid using the mean of the one-sided
//! limits at `c`,
//!
//! ```text
//! sum - integral = h e^{wc} sum_k B_2k/(2k)! D_{2k-1}(wh),
//! D_j(omega) = sum_r binom(j, r) omega^(j-r) (G_r(c-) - G_r(c+)),
//! ```
//!
//! where `G_r = h^r g^(r)` are estimated from one-sided polynomial fits. The
//! series in `k` converges for `|wh| < 2 pi`; corrections are applied only
//! for `|wh| < pi`.

use num_complex::Complex64;

/// Highest degree of the one-sided fits.
pub(crate) const FIT_DEGREE: usize = 6;

/// `B_2k / (2k)!` for `k = 1..=15`.
fn bernoulli_ratios() -> &'static [f64; 15] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; 15]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let bernoulli: [(f64, f64); 15] = [
            (1.0, 6.0),
            (-1.0, 30.0),
            (1.0, 42.0),
            (-1.0, 30.0),
            (5.0, 66.0),
            (-691.0, 2730.0),
            (7.0, 6.0),
            (-3617.0, 510.0),
            (43867.0, 798.0),
            (-174_611.0, 330.0),
            (854_513.0, 138.0),
            (-236_364_091.0, 2730.0),
            (8_553_103.0, 6.0),
            (-23_749_461_029.0, 870.0),
            (8_615_841_276_005.0, 14322.0),
        ];
        let mut out = [0.0; 15];
        let mut factorial = 1.0;
        for (k, (num, den)) in bernoulli.iter().enumerate() {
            let n = 2 * (k + 1);
            factorial *= (n - 1) as f64 * n as f64;
            out[k] = num / den / factorial;
        }
        out
    })
}

/// Signed Stirling numbers of the first kind `s(k, r)` for `k, r <= FIT_DEGREE`.
fn stirling_first() -> &'static [[f64; FIT_DEGREE + 1]; FIT_DEGREE + 1] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[[f64; FIT_DEGREE + 1]; FIT_DEGREE + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut s = [[0.0; FIT_DEGREE + 1]; FIT_DEGREE + 1];
        s[0][0] = 1.0;
        for k in 0..FIT_DEGREE {
            for r in 0..=FIT_DEGREE {
                let prev = if r > 0 { s[k][r - 1] } else { 0.0 };
                s[k + 1][r] = prev - k as f64 * s[k][r];
            }
        }
        s
    })
}

/// Scaled one-sided derivatives `G_r = h^r g^(r)(c)` from samples
/// `samples[j] = g(c + j * direction * h)`, `direction = +-1`.
pub(crate) fn scaled_derivatives(samples: &[Complex64], direction: f64) -> Vec<Complex64> {
    let p = samples.len().saturating_sub(1).min(FIT_DEGREE);
    let mut diffs: Vec<Complex64> = samples[..=p].to_vec();
    // forward differences: leading[k] = Delta^k y_0
    let mut leading = Vec::with_capacity(p + 1);
    for k in 0..=p {
        leading.push(diffs[0]);
        for j in 0..(p - k) {
            diffs[j] = diffs[j + 1] - diffs[j];
        }
    }
    let s = stirling_first();
    let mut factorial_r = 1.0;
    let mut out = vec![Complex64::new(0.0, 0.0); p + 1];
    for (r, slot) in out.iter_mut().enumerate() {
        if r > 0 {
            factorial_r *= r as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut factorial_k = 1.0;
        for (k, d) in leading.iter().enumerate() {
            if k > 0 {
                factorial_k *= k as f64;
            }
            if k >= r {
                acc += d * (s[k][r] * factorial_r / factorial_k);
            }
        }
        *slot = acc * direction.powi(r as i32);
    }
    out
}

/// `sum_k B_2k/(2k)! D_{2k-1}(omega)` for one break.
///
/// `left` and `right` are the scaled derivatives on either side. Returns
/// zero when `|omega| >= pi`, where the trapezoid sum itself is aliased.
pub(crate) fn jump_series(left: &[Complex64], right: &[Complex64], omega: Complex64) -> Complex64 {
    if omega.norm() >= std::f64::consts::PI {
        return Complex64::new(0.0, 0.0);
    }
    let p = left.len().max(right.len());
    let zero = Complex64::new(0.0, 0.0);
    let jump: Vec<Complex64> = (0..p)
        .map(|r| left.get(r).copied().unwrap_or(zero) - right.get(r).copied().unwrap_or(zero))
        .collect();
    let ratios = bernoulli_ratios();
    let mut total = zero;
    for (k, c) in ratios.iter().enumerate() {
        let j = 2 * k + 1;
        // D_j = sum_r binom(j, r) omega^(j-r) jump_r
        let mut d = zero;
        let mut binom = 1.0;
        for (r, jr) in jump.iter().enumerate().take(j + 1) {
            if r > 0 {
                binom *= (j + 1 - r) as f64 / r as f64;
            }
            d += jr * binom * omega.powu((j - r) as u32);
        }
        total += d * *c;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_polynomial_are_exact() {
        // g(t) = 1 + 2t - t^3 with h = 0.1 at c = 0.3
        let h = 0.1;
        let c = 0.3;
        let g = |t: f64| 1.0 + 2.0 * t - t.powi(3);
        for direction in [1.0, -1.0] {
            let samples: Vec<Complex64> = (0..7)
                .map(|j| Complex64::new(g(c + direction * j as f64 * h), 0.0))
                .collect();
            let d = scaled_derivatives(&samples, direction);
            assert!((d[0].re - g(c)).abs() < 1e-12);
            assert!((d[1].re - h * (2.0 - 3.0 * c * c)).abs() < 1e-12);
            assert!((d[2].re - h * h * (-6.0 * c)).abs() < 1e-12);
            assert!((d[3].re - h.powi(3) * -6.0).abs() < 1e-12);
            assert!(d[4].norm() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_table_leading_terms() {
        let r = bernoulli_ratios();
        assert!((r[0] - 1.0 / 12.0).abs() < 1e-16);
        assert!((r[1] + 1.0 / 720.0).abs() < 1e-17);
        assert!((r[2] - 1.0 / 30240.0).abs() < 1e-18);
    }

    #[test]
    fn corrected_one_sided_exponential_is_exact() {
        // \int_0^inf e^{-t/2} e^{-ist} dt with a jump to zero at t = 0
        let h = 0.05;
        let s = 3.0;
        let w = Complex64::new(-0.5, -s);
        let n = 2000;
        let mut sum = Complex64::new(0.5, 0.0); // mean of the limits 0 and 1 at t = 0
        for k in 1..n {
            sum += (w * (k as f64 * h)).exp();
        }
        let trapezoid = sum * h;
        let right: Vec<Complex64> = (0..7).map(|j| Complex64::new((-0.5 * j as f64 * h).exp(), 0.0)).collect();
        let left = vec![Complex64::new(0.0, 0.0); 7];
        let gr = scaled_derivatives(&right, 1.0);
        let gl = scaled_derivatives(&left, -1.0);
        let corrected = trapezoid - h * jump_series(&gl, &gr, Complex64::new(0.0, -s * h));
        let exact = Complex64::new(1.0, 0.0) / Complex64::new(0.5, s);
        assert!((corrected - exact).norm() < 1e-11, "{corrected} vs {exact}");
        assert!((trapezoid - exact).norm() > 1e-5);
    }
}
