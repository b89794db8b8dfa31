//! Closed forms against independent oracles: composite Simpson quadrature
//! written here, and constants computed offline with 40-digit arithmetic from the
//! hypergeometric closed form of the interference integral.

use std::f64::consts::PI;

use cellcov::analytic::{
    beta_integral, beta_integral_detailed, empty_cell_probability, nearest_distance_pdf,
    outage_exact, voronoi_area_pdf,
};
use cellcov::QuadratureSpec;

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `θ^{2/α}∫ dx/(1+x^{α/2})` by substituting `x = L·s^{-1/(k-1)}` with
/// `k = α/2`, which maps the infinite range onto `(0, 1]` and leaves the
/// bounded integrand `L/((k-1)(s^{k/(k-1)} + L^k))`.
fn beta_simpson(theta: f64, alpha: f64) -> f64 {
    let k = alpha / 2.0;
    let lower = theta.powf(-1.0 / k);
    let e = k / (k - 1.0);
    let g = |s: f64| lower / ((k - 1.0) * (s.powf(e) + lower.powf(k)));
    theta.powf(1.0 / k) * simpson(g, 0.0, 1.0, 200_000)
}

#[test]
fn beta_matches_high_precision_constants() {
    let quad = QuadratureSpec::default();
    let cases = [
        (10f64.powf(0.3), 3.0, 2.987_072_591_083_584),
        (0.5, 2.5, 1.867_417_416_525_282_1),
        (10.0, 5.0, 2.345_985_618_480_540_9),
        (1.0, 3.0, 1.671_297_696_529_442_1),
    ];
    for (theta, alpha, want) in cases {
        let got = beta_integral(theta, alpha, &quad).unwrap();
        assert!(
            (got - want).abs() < 1e-13,
            "theta={theta} alpha={alpha}: {got} vs {want}"
        );
    }
}

#[test]
fn beta_matches_simpson() {
    let quad = QuadratureSpec::default();
    for (theta, alpha) in [(10f64.powf(0.3), 3.0), (0.5, 2.5), (10.0, 5.0), (3.0, 4.0)] {
        let got = beta_integral(theta, alpha, &quad).unwrap();
        let oracle = beta_simpson(theta, alpha);
        assert!(
            (got - oracle).abs() < 1e-6,
            "theta={theta} alpha={alpha}: {got} vs {oracle}"
        );
    }
}

#[test]
fn beta_error_estimate_covers_actual_error() {
    let r = beta_integral_detailed(10f64.powf(0.3), 3.0, &QuadratureSpec::default()).unwrap();
    assert!((r.value - 2.987_072_591_083_584).abs() <= r.abs_error.max(1e-15) * 10.0);
    assert!(r.abs_error < 1e-10);
}

#[test]
fn beta_at_alpha_four_has_arctan_form() {
    let quad = QuadratureSpec::default();
    for theta in [0.01f64, 0.1, 1.0, 7.0, 100.0] {
        let oracle = theta.sqrt() * (PI / 2.0 - theta.powf(-0.5).atan());
        assert!((beta_integral(theta, 4.0, &quad).unwrap() - oracle).abs() < 1e-13);
    }
}

#[test]
fn voronoi_area_pdf_is_normalized_with_mean_one_over_lambda() {
    for lambda_b in [0.05, 1.0, 3.0] {
        let upper = 40.0 / lambda_b;
        let f = |x: f64| voronoi_area_pdf(x, lambda_b).unwrap();
        let mass = simpson(f, 0.0, upper, 200_000);
        let mean = simpson(|x| x * f(x), 0.0, upper, 200_000);
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
        assert!((mean * lambda_b - 1.0).abs() < 1e-6, "mean {mean}");
    }
}

#[test]
fn empty_cell_probability_is_laplace_transform_of_area_pdf() {
    // p = E[exp(-λ_u A)] under the gamma area law
    let (lambda_b, lambda_u) = (0.2, 0.02);
    let f = |x: f64| voronoi_area_pdf(x, lambda_b).unwrap() * (-lambda_u * x).exp();
    let oracle = simpson(f, 0.0, 200.0, 200_000);
    let got = empty_cell_probability(lambda_b, lambda_u).unwrap();
    assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
}

#[test]
fn nearest_distance_pdf_mean() {
    for lambda_b in [0.25f64, 1.0, 4.0] {
        let upper = 10.0 / lambda_b.sqrt();
        let f = |r: f64| nearest_distance_pdf(r, lambda_b).unwrap();
        let mass = simpson(f, 0.0, upper, 100_000);
        let mean = simpson(|r| r * f(r), 0.0, upper, 100_000);
        assert!((mass - 1.0).abs() < 1e-9);
        assert!((mean - 0.5 / lambda_b.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn reference_outage_values() {
    let quad = QuadratureSpec::default();
    let beta = beta_integral(10f64.powf(0.3), 3.0, &quad).unwrap();
    let p = empty_cell_probability(0.2, 0.02).unwrap();
    // offline: 1 - 1/(1 + (1-p)β) with p = (1 + 1/35)^-3.5
    assert!((outage_exact(p, beta).unwrap() - 0.219_034_151_861_383).abs() < 1e-12);
    assert!((outage_exact(0.0, beta).unwrap() - 0.749_189_417_259_086).abs() < 1e-12);
}
