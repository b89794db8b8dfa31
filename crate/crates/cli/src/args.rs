use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{
    ConfigFile, CostSection, EstimatorName, GridSection, ModeName, ModelSection, OptimizeSection,
    SimSection,
};

#[derive(Debug, Parser)]
#[command(
    name = "cellcov",
    version,
    about = "Outage, cost and optimal base-station density for Poisson cellular networks with silent empty cells"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every closed-form quantity at one parameter point.
    Analytic,
    /// Monte Carlo estimation.
    Simulate {
        #[command(subcommand)]
        what: SimulateWhat,
    },
    /// Closed-form versus numerically optimal BS density over cost ratios K.
    Optimize(OptimizeArgs),
    /// Regenerate the data behind one of the two reference figures.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Outage versus BS density (Monte Carlo and analytic, both transmit modes).
    Fig2,
    /// Optimal density gap versus K.
    Fig3,
}

#[derive(Debug, Subcommand)]
pub enum SimulateWhat {
    /// Outage probability over a BS density grid (sweep table).
    Outage(OutageArgs),
    /// Fraction of base stations with empty cells.
    EmptyCells,
    /// Typical mobile to serving BS distance.
    LinkDistance,
    /// Cable length from BSs to their nearest switching centers.
    Cable,
}

#[derive(Debug, Args)]
pub struct OutageArgs {
    /// Transmit mode used for the printed summary; the CSV always has both.
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorName>,
    /// Comma-separated BS densities; defaults to --lambda-b alone.
    #[arg(long, value_delimiter = ',')]
    pub lambda_b_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Comma-separated cost ratios K; defaults to the K implied by the cost flags.
    #[arg(long = "k", value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
    #[arg(long)]
    pub search_low: Option<f64>,
    #[arg(long)]
    pub search_high: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <width>x<height>, got `{s}`"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    Ok((w, h))
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path; a `.meta` provenance file is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Simulation window as <width>x<height>.
    #[arg(long, global = true, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    #[arg(long, global = true, overrides_with = "no_torus")]
    pub torus: bool,
    #[arg(long, global = true)]
    pub no_torus: bool,
    /// Keep the window size even when it holds fewer than 100 BSs on average.
    #[arg(long, global = true)]
    pub fixed_window: bool,
    /// Drop the mean interference from beyond the torus images.
    #[arg(long, global = true)]
    pub no_far_field: bool,
    #[arg(long, global = true)]
    pub ci_level: Option<f64>,
    /// SIR threshold in dB.
    #[arg(
        long,
        global = true,
        conflicts_with = "theta",
        allow_hyphen_values = true
    )]
    pub theta_db: Option<f64>,
    /// SIR threshold, linear.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long = "lambda-b", global = true)]
    pub lambda_b: Option<f64>,
    #[arg(long = "lambda-u", global = true)]
    pub lambda_u: Option<f64>,
    #[arg(long = "lambda-s", global = true)]
    pub lambda_s: Option<f64>,
    /// BS transmit power.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Power-model slope A.
    #[arg(long = "pa-a", global = true)]
    pub pa_a: Option<f64>,
    /// Power-model offset B.
    #[arg(long = "pa-b", global = true)]
    pub pa_b: Option<f64>,
    #[arg(long, global = true)]
    pub c1: Option<f64>,
    #[arg(long, global = true)]
    pub c2: Option<f64>,
    #[arg(long, global = true)]
    pub c3: Option<f64>,
    /// Outage penalty.
    #[arg(long, global = true)]
    pub phi: Option<f64>,
}

impl Cli {
    /// The configuration layer contributed by command-line flags.
    pub fn flag_layer(&self) -> ConfigFile {
        let g = &self.global;
        let torus = if g.no_torus {
            Some(false)
        } else if g.torus {
            Some(true)
        } else {
            None
        };
        let mut file = ConfigFile {
            out: g.out.clone(),
            model: ModelSection {
                lambda_b: g.lambda_b,
                lambda_u: g.lambda_u,
                lambda_s: g.lambda_s,
                theta: g.theta,
                theta_db: g.theta_db,
                alpha: g.alpha,
                mu: g.mu,
                pa_a: g.pa_a,
                pa_b: g.pa_b,
            },
            costs: CostSection {
                c1: g.c1,
                c2: g.c2,
                c3: g.c3,
                phi: g.phi,
            },
            sim: SimSection {
                seed: g.seed,
                trials: g.trials,
                width: g.window.map(|w| w.0),
                height: g.window.map(|w| w.1),
                torus,
                ci_level: g.ci_level,
                auto_scale: g.fixed_window.then_some(false),
                far_field: g.no_far_field.then_some(false),
                ..SimSection::default()
            },
            optimize: OptimizeSection::default(),
            grids: GridSection::default(),
            meta: Default::default(),
        };
        match &self.command {
            Command::Simulate {
                what: SimulateWhat::Outage(o),
            } => {
                file.sim.mode = o.mode;
                file.sim.estimator = o.estimator;
                file.grids.lambda_b = o.lambda_b_grid.clone();
            }
            Command::Optimize(o) => {
                file.grids.k = o.k.clone();
                file.optimize = OptimizeSection {
                    search_low: o.search_low,
                    search_high: o.search_high,
                    rel_tol: o.rel_tol,
                    max_iters: o.max_iters,
                };
            }
            _ => {}
        }
        file
    }

    /// Short command label recorded in the provenance sidecar.
    pub fn command_label(&self) -> String {
        match &self.command {
            Command::Analytic => "analytic".into(),
            Command::Simulate { what } => format!(
                "simulate {}",
                match what {
                    SimulateWhat::Outage(_) => "outage",
                    SimulateWhat::EmptyCells => "empty-cells",
                    SimulateWhat::LinkDistance => "link-distance",
                    SimulateWhat::Cable => "cable",
                }
            ),
            Command::Optimize(_) => "optimize".into(),
            Command::Reproduce { figure } => format!(
                "reproduce {}",
                match figure {
                    Figure::Fig2 => "fig2",
                    Figure::Fig3 => "fig3",
                }
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parser() {
        assert_eq!(parse_window("50x40").unwrap(), (50.0, 40.0));
        assert_eq!(parse_window("2.5X3").unwrap(), (2.5, 3.0));
        assert!(parse_window("50").is_err());
        assert!(parse_window("ax3").is_err());
    }

    #[test]
    fn theta_units_conflict() {
        let r = Cli::try_parse_from(["cellcov", "analytic", "--theta", "2", "--theta-db", "3"]);
        assert!(r.is_err());
    }

    #[test]
    fn negative_db_threshold_parses() {
        let c = Cli::try_parse_from(["cellcov", "analytic", "--theta-db", "-3"]).unwrap();
        assert_eq!(c.global.theta_db, Some(-3.0));
    }
}
