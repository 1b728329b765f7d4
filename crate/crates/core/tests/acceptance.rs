//! Acceptance criteria, one PASS/FAIL line each.

use hausdorff::calculus::calderon_fractional_kernel;
use hausdorff::grid::{Axis, Grid, SampledFunction};
use hausdorff::model::presets;
use hausdorff::operator::OperatorSpec;
use hausdorff::symbol::{default_s_grid, matrix_symbol, scalar_symbol, spectrum_estimate, SymbolMethod};
use hausdorff::verify::{run_suite, VerifyOptions};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn calderon_op() -> hausdorff::Result<OperatorSpec> {
    let (k, f) = presets::calderon();
    OperatorSpec::new(k, f)
}

fn suite(name: &str) -> hausdorff::Result<Outcome> {
    let report = run_suite(name, &VerifyOptions::default())?;
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} (error {:.3e}, tol {:.0e})", c.name, c.error, c.tol))
        .collect();
    if failed.is_empty() {
        Ok(outcome(true, format!("{} checks passed", report.checks.len())))
    } else {
        Ok(outcome(false, failed.join("; ")))
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> hausdorff::Result<Outcome>) -> hausdorff::Result<Outcome> {
    let start = Instant::now();
    let o = f()?;
    let elapsed = start.elapsed();
    let ok = elapsed < limit;
    Ok(outcome(
        o.pass && ok,
        format!("{}, {:.2} s (limit {} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs()),
    ))
}

fn calderon_symbol() -> hausdorff::Result<Outcome> {
    timed(Duration::from_secs(5), || {
        let s = default_s_grid();
        let phi = scalar_symbol(&calderon_op()?, &s, SymbolMethod::Direct)?;
        let exact = SampledFunction::from_real_fn(s, |x| 1.0 / (x[0] * x[0] + 0.25))?;
        let err = phi.relative_linf(&exact)?;
        Ok(outcome(err <= 1e-6, format!("rel-Linf {err:.3e}")))
    })
}

fn calderon_spectrum() -> hausdorff::Result<Outcome> {
    let phi = scalar_symbol(&calderon_op()?, &default_s_grid(), SymbolMethod::Direct)?;
    let est = spectrum_estimate(&phi);
    Ok(match est.hull {
        Some((lo, hi)) => outcome(lo == 0.0 && (hi - 4.0).abs() <= 1e-6, format!("hull [{lo}, {hi}]")),
        None => outcome(false, "no real hull"),
    })
}

fn fractional_alpha1() -> hausdorff::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let u = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
        let exact = 1.0 / (u * u.max(1.0));
        worst = worst.max((calderon_fractional_kernel(1.0, u)? - exact).abs() / exact);
    }
    Ok(outcome(worst <= 1e-8, format!("max rel {worst:.3e}")))
}

fn matrix_structure() -> hausdorff::Result<Outcome> {
    let s = Grid::uniform(-5.0, 5.0, 11)?;
    let (k, f) = presets::reflected_cesaro();
    let phi = matrix_symbol(&OperatorSpec::new(k, f)?, &s)?;
    let diag = phi.entry(1, 1)?.max_abs().max(phi.entry(2, 2)?.max_abs());
    let zero = s.axis(0).node_index(0.0, 1e-12).expect("s = 0 on grid");
    let off = phi.entry(1, 2)?.values()[zero];
    let sym = phi.entry(1, 2)? == phi.entry(2, 1)?;
    let mut pass = diag <= 1e-10 && (off.re - 2.0).abs() <= 1e-6 && off.im.abs() <= 1e-6 && sym;

    let axis = Axis::uniform(-2.0, 2.0, 9)?;
    let s2 = Grid::new(vec![axis.clone(), axis])?;
    let (k, f) = presets::dilation_diag_2d();
    let phi2 = matrix_symbol(&OperatorSpec::new(k, f)?, &s2)?;
    let mut entries = 0;
    let mut sym2 = true;
    for i in 1..=phi2.size() {
        for j in 1..=phi2.size() {
            let e = phi2.entry(i, j)?;
            entries += usize::from(e.values().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            sym2 &= e == phi2.entry(j, i)?;
        }
    }
    pass &= entries == 16 && sym2;
    Ok(outcome(
        pass,
        format!(
            "1-D diag max {diag:.1e}, phi12(0) = {:.9}, symmetric {sym}; 2-D {entries} entries, symmetric {sym2}",
            off.re
        ),
    ))
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> hausdorff::Result<Outcome>>)> = vec![
        ("Calderon symbol vs 1/(s^2+1/4)", Box::new(calderon_symbol)),
        ("Calderon spectrum hull [0, 4]", Box::new(calderon_spectrum)),
        (
            "Boyd power formula",
            Box::new(|| timed(Duration::from_secs(30), || suite("boyd-power"))),
        ),
        ("fractional alpha = 1 recovery", Box::new(fractional_alpha1)),
        ("fractional semigroup", Box::new(|| suite("frac-semigroup"))),
        ("multiplicativity", Box::new(|| suite("multiplicativity"))),
        ("commutativity", Box::new(|| suite("commutativity"))),
        ("norm bound", Box::new(|| suite("norm-bound"))),
        ("Balakrishnan pointwise identity", Box::new(|| suite("balakrishnan-pointwise"))),
        ("special functions", Box::new(|| suite("specfun-reference"))),
        ("matrix symbol structure", Box::new(matrix_structure)),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failures += usize::from(!o.pass);
        println!("{} criterion {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, n + 1, o.detail);
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
