use cellcov::analytic::{beta_integral, cable_length_density};
use cellcov::montecarlo::{
    all_transmit_outage, estimate_cable_length, estimate_link_distance, estimate_outage_pair,
    row_seed, sample_link_distances, sweep_outage,
};
use cellcov::{ModelParams, QuadratureSpec, SimConfig};

fn sim(trials: u64, seed: u64) -> SimConfig {
    SimConfig {
        trials,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn cable_estimates_match_both_normalizations() {
    let (lambda_b, lambda_s) = (0.2, 0.01);
    let e = estimate_cable_length(lambda_b, lambda_s, &sim(2000, 4)).unwrap();
    let per_area = lambda_b / (2.0 * lambda_s.sqrt());
    let per_cell = cable_length_density(lambda_b, lambda_s).unwrap();
    assert!(
        e.per_unit_area.within_std_errors(per_area, 4.0),
        "{:?}",
        e.per_unit_area
    );
    assert!(
        e.per_sc_cell.within_std_errors(per_cell, 4.0),
        "{:?}",
        e.per_sc_cell
    );
}

#[test]
fn link_distance_ks_test() {
    let lambda_b = 0.5;
    let (mut d, discards) = sample_link_distances(lambda_b, &sim(5000, 8)).unwrap();
    assert_eq!(discards, 0);
    d.sort_by(f64::total_cmp);
    let n = d.len() as f64;
    let cdf = |r: f64| 1.0 - (-std::f64::consts::PI * lambda_b * r * r).exp();
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = cdf(r);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // asymptotic 1% critical value
    assert!(ks < 1.628 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn standard_error_shrinks_like_inverse_root_trials() {
    let se: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&t| estimate_link_distance(1.0, &sim(t, 21)).unwrap().std_error)
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 10f64.sqrt()).abs() < 0.4, "ratio {ratio}");
    }
}

#[test]
fn small_sweep_orders_and_brackets() {
    let model = ModelParams::default();
    let grid = [0.04, 0.1, 0.2, 0.4];
    let rows = sweep_outage(&model, &grid, &sim(3000, 2), &QuadratureSpec::default()).unwrap();
    assert_eq!(rows.len(), 4);
    let beta = beta_integral(model.theta, model.alpha, &QuadratureSpec::default()).unwrap();
    let all = all_transmit_outage(beta).unwrap();
    let mut prev = f64::INFINITY;
    for row in &rows {
        let s = row.outcome.as_ref().unwrap();
        assert!(s.analytic_exact <= s.analytic_asymptotic);
        assert!(s.analytic_exact < prev);
        prev = s.analytic_exact;
        assert!(s.silent.mean < s.all_transmit.mean);
        assert!(
            s.all_transmit.within_std_errors(all, 4.0),
            "{:?}",
            s.all_transmit
        );
        assert!(s.silent.ci_low <= s.silent.mean && s.silent.mean <= s.silent.ci_high);
    }
}

#[test]
fn sweep_row_zero_reproduces_direct_estimate() {
    let model = ModelParams::default().with_lambda_b(0.3);
    let cfg = sim(500, 17);
    assert_eq!(row_seed(17, 0), 17);
    let rows = sweep_outage(&model, &[0.3], &cfg, &QuadratureSpec::default()).unwrap();
    let direct = estimate_outage_pair(&model, &cfg).unwrap();
    assert_eq!(rows[0].outcome.as_ref().unwrap().silent, direct.silent);
}

#[test]
fn estimates_are_deterministic() {
    let model = ModelParams::default();
    let a = estimate_outage_pair(&model, &sim(400, 5)).unwrap();
    let b = estimate_outage_pair(&model, &sim(400, 5)).unwrap();
    let c = estimate_outage_pair(&model, &sim(400, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
