use std::io::Write;
use std::path::{Path, PathBuf};

use cellcov::analytic::{
    beta_integral, cable_length_density, cost_breakdown, empty_cell_probability,
    empty_cell_probability_asymptotic, k_ratio, linear_to_db, network_power,
    optimal_density_closed_form, outage_asymptotic, outage_exact,
};
use cellcov::montecarlo::{
    all_transmit_outage, estimate_cable_length, estimate_empty_cell_prob, estimate_link_distance,
    sweep_outage,
};
use cellcov::optimizer::{gap_study, minimize_cost};
use cellcov::output::{fmt_f64, gap_csv, sweep_csv};
use cellcov::{Estimate, Mode, QuadratureSpec, TransmitMode};

use crate::args::{Cli, Command, Figure, SimulateWhat};
use crate::config::{ConfigFile, RunConfig};
use crate::CliError;

/// Default trial count of `reproduce fig2`.
pub const FIG2_TRIALS: u64 = 100_000;
/// Default trial count of every other Monte Carlo command.
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const FIG3_K_GRID: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

/// `0.04, 0.06, …, 0.40`.
pub fn fig2_lambda_b_grid() -> Vec<f64> {
    (0..19).map(|i| f64::from(4 + 2 * i) / 100.0).collect()
}

type Out<'a> = &'a mut dyn Write;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

fn say(out: Out, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text)
        .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
}

/// Path of the provenance file written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Command-specific defaults, applied beneath the config file and flags.
fn command_defaults(cli: &Cli) -> (ConfigFile, u64) {
    let mut d = ConfigFile::default();
    match cli.command {
        Command::Reproduce {
            figure: Figure::Fig2,
        } => {
            d.grids.lambda_b = Some(fig2_lambda_b_grid());
            (d, FIG2_TRIALS)
        }
        Command::Reproduce {
            figure: Figure::Fig3,
        } => {
            d.grids.k = Some(FIG3_K_GRID.to_vec());
            (d, DEFAULT_TRIALS)
        }
        _ => (d, DEFAULT_TRIALS),
    }
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let (mut cfg, default_trials) = command_defaults(cli);
    if let Some(path) = &cli.global.config {
        cfg.overlay(&ConfigFile::load(path)?);
    }
    cfg.overlay(&cli.flag_layer());
    let rc = cfg.resolve(default_trials)?;
    rc.model.validate()?;
    rc.costs.validate()?;
    rc.sim.validate()?;
    Ok(rc)
}

/// Writes `body` to the configured output path with its sidecar, or to
/// `stdout` when no path is set.
fn emit_table(rc: &RunConfig, label: &str, body: &str, stdout: Out) -> Result<(), CliError> {
    match &rc.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| io_err(path, e))?;
            let meta = sidecar_path(path);
            std::fs::write(&meta, rc.to_sidecar(label)?).map_err(|e| io_err(&meta, e))?;
            say(
                stdout,
                format_args!("wrote {} and {}\n", path.display(), meta.display()),
            )
        }
        None => say(stdout, format_args!("{body}")),
    }
}

pub fn execute(cli: &Cli, stdout: Out, stderr: Out) -> Result<(), CliError> {
    let rc = resolve(cli)?;
    let label = cli.command_label();
    let quad = QuadratureSpec::default();
    match &cli.command {
        Command::Analytic => analytic(&rc, &label, &quad, stdout),
        Command::Simulate { what } => match what {
            SimulateWhat::Outage(_) => outage_sweep(&rc, &label, &quad, stdout, stderr),
            SimulateWhat::EmptyCells => {
                let m = &rc.model;
                let est = estimate_empty_cell_prob(m.lambda_b, m.lambda_u, &rc.sim)?;
                let exact = empty_cell_probability(m.lambda_b, m.lambda_u)?;
                scalar_report(&rc, &label, &[("empty_cell_fraction", est, exact)], stdout)
            }
            SimulateWhat::LinkDistance => {
                let lb = rc.model.lambda_b;
                let est = estimate_link_distance(lb, &rc.sim)?;
                let exact = 0.5 / lb.sqrt();
                scalar_report(&rc, &label, &[("mean_link_distance", est, exact)], stdout)
            }
            SimulateWhat::Cable => {
                let m = &rc.model;
                let est = estimate_cable_length(m.lambda_b, m.lambda_s, &rc.sim)?;
                let rows = [
                    (
                        "cable_per_unit_area",
                        est.per_unit_area,
                        m.lambda_b / (2.0 * m.lambda_s.sqrt()),
                    ),
                    (
                        "cable_per_sc_cell",
                        est.per_sc_cell,
                        cable_length_density(m.lambda_b, m.lambda_s)?,
                    ),
                ];
                scalar_report(&rc, &label, &rows, stdout)
            }
        },
        Command::Optimize(_) => optimize(&rc, &label, &quad, stdout, stderr),
        Command::Reproduce {
            figure: Figure::Fig2,
        } => outage_sweep(&rc, &label, &quad, stdout, stderr),
        Command::Reproduce {
            figure: Figure::Fig3,
        } => optimize(&rc, &label, &quad, stdout, stderr),
    }
}

fn analytic(
    rc: &RunConfig,
    label: &str,
    quad: &QuadratureSpec,
    stdout: Out,
) -> Result<(), CliError> {
    let m = &rc.model;
    let beta = beta_integral(m.theta, m.alpha, quad)?;
    let p = empty_cell_probability(m.lambda_b, m.lambda_u)?;
    let p_asym = empty_cell_probability_asymptotic(m.lambda_b, m.lambda_u)?;
    let out_asym = outage_asymptotic(m.lambda_b, m.lambda_u, beta)?;
    let exact = cost_breakdown(m.lambda_b, m, &rc.costs, beta, Mode::Exact)?;
    let asym = cost_breakdown(m.lambda_b, m, &rc.costs, beta, Mode::Asymptotic)?;

    let mut fields: Vec<(&str, f64)> = vec![
        ("theta", m.theta),
        ("theta_db", linear_to_db(m.theta)),
        ("beta", beta),
        ("empty_cell_prob", p),
        ("empty_cell_prob_asymptotic", p_asym.value),
        ("outage_exact", outage_exact(p, beta)?),
        ("outage_asymptotic", out_asym.value),
        ("outage_all_transmit", all_transmit_outage(beta)?),
        ("mean_link_distance", 0.5 / m.lambda_b.sqrt()),
        (
            "cable_length",
            cable_length_density(m.lambda_b, m.lambda_s)?,
        ),
        ("power_exact", network_power(m, p, Mode::Exact)?),
        ("power_asymptotic", network_power(m, p, Mode::Asymptotic)?),
        ("cost_exact", exact.total()),
        ("cost_asymptotic", asym.total()),
    ];
    // K and the optimum need a positive per-BS cost
    if let Ok(k) = k_ratio(&rc.costs, m.lambda_s, m.pa_b) {
        fields.push(("k_ratio", k));
        fields.push((
            "optimal_lambda_b_closed_form",
            optimal_density_closed_form(m, &rc.costs, beta)?,
        ));
    }

    let mut text = String::new();
    for (name, v) in &fields {
        text.push_str(&format!("{name:<30} {v:.10}\n"));
    }
    if !out_asym.in_regime {
        text.push_str("note: lambda_b/lambda_u < 5, asymptotic values are outside their regime\n");
    }
    say(stdout, format_args!("{text}"))?;

    if let Some(path) = &rc.out {
        let mut csv = String::from("quantity,value\n");
        for (name, v) in &fields {
            csv.push_str(&format!("{name},{}\n", fmt_f64(*v)));
        }
        std::fs::write(path, csv).map_err(|e| io_err(path, e))?;
        let meta = sidecar_path(path);
        std::fs::write(&meta, rc.to_sidecar(label)?).map_err(|e| io_err(&meta, e))?;
    }
    Ok(())
}

fn scalar_report(
    rc: &RunConfig,
    label: &str,
    rows: &[(&str, Estimate, f64)],
    stdout: Out,
) -> Result<(), CliError> {
    let mut csv = String::from("quantity,mc_mean,mc_stderr,ci_low,ci_high,analytic,discards\n");
    for (name, e, analytic) in rows {
        csv.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            fmt_f64(e.mean),
            fmt_f64(e.std_error),
            fmt_f64(e.ci_low),
            fmt_f64(e.ci_high),
            fmt_f64(*analytic),
            e.discards
        ));
    }
    if rc.out.is_some() {
        for (name, e, analytic) in rows {
            say(
                stdout,
                format_args!(
                    "{name}: {:.6} ± {:.6} (analytic {:.6}, {} trials)\n",
                    e.mean, e.std_error, analytic, e.trials_used
                ),
            )?;
        }
    }
    emit_table(rc, label, &csv, stdout)
}

fn outage_sweep(
    rc: &RunConfig,
    label: &str,
    quad: &QuadratureSpec,
    stdout: Out,
    stderr: Out,
) -> Result<(), CliError> {
    let grid = rc
        .lambda_b_grid
        .clone()
        .unwrap_or_else(|| vec![rc.model.lambda_b]);
    let rows = sweep_outage(&rc.model, &grid, &rc.sim, quad)?;
    let mut failed = 0;
    for row in &rows {
        match &row.outcome {
            Ok(s) => {
                let e = match rc.sim.mode {
                    TransmitMode::SilentEmptyCells => s.silent,
                    TransmitMode::AllTransmit => s.all_transmit,
                };
                if e.is_imprecise() {
                    let _ = writeln!(
                        stderr,
                        "warning: lambda_b={}: standard error {:.3e} exceeds 10% of the mean",
                        row.lambda_b, e.std_error
                    );
                }
                if rc.out.is_some() {
                    say(
                        stdout,
                        format_args!(
                            "lambda_b={:<6} outage={:.5} ± {:.5}  exact={:.5}  asymptotic={:.5}\n",
                            row.lambda_b,
                            e.mean,
                            e.std_error,
                            s.analytic_exact,
                            s.analytic_asymptotic
                        ),
                    )?;
                }
            }
            Err(err) => {
                failed += 1;
                let _ = writeln!(stderr, "error: lambda_b={}: {err}", row.lambda_b);
            }
        }
    }
    emit_table(rc, label, &sweep_csv(&rows), stdout)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} of {} rows failed",
            rows.len()
        )));
    }
    Ok(())
}

fn optimize(
    rc: &RunConfig,
    label: &str,
    quad: &QuadratureSpec,
    stdout: Out,
    stderr: Out,
) -> Result<(), CliError> {
    let m = &rc.model;
    let beta = beta_integral(m.theta, m.alpha, quad)?;
    let Some(k_grid) = &rc.k_grid else {
        // single problem from the configured cost coefficients
        let k = k_ratio(&rc.costs, m.lambda_s, m.pa_b)?;
        let spec = rc.optimize_spec(k, beta);
        let closed = optimal_density_closed_form(m, &rc.costs, beta)?;
        let exact = minimize_cost(m, &rc.costs, beta, Mode::Exact, &spec)?;
        let asym = minimize_cost(m, &rc.costs, beta, Mode::Asymptotic, &spec)?;
        let mut text = format!(
            "K                      {k:.10}\n\
             closed_form            {closed:.10}\n\
             numeric_exact          {:.10}\n\
             numeric_asymptotic     {:.10}\n",
            exact.density, asym.density
        );
        if exact.at_lower_boundary {
            text.push_str("note: exact minimum sits on the lower search bound\n");
        }
        return say(stdout, format_args!("{text}"));
    };
    let k_max = k_grid.iter().copied().fold(0.0, f64::max);
    let spec = rc.optimize_spec(k_max, beta);
    let rows = gap_study(k_grid, m, beta, &spec)?;
    let mut failed = 0;
    for row in &rows {
        if let Err(err) = &row.outcome {
            failed += 1;
            let _ = writeln!(stderr, "error: K={}: {err}", row.k);
        }
    }
    emit_table(rc, label, &gap_csv(&rows), stdout)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} of {} rows failed",
            rows.len()
        )));
    }
    Ok(())
}
