//! Run configuration: built-in defaults, overridden by a TOML file, overridden
//! by command-line flags.
//!
//! A complete file looks like this (every key is optional):
//!
//! ```toml
//! out = "fig2.csv"
//!
//! [model]
//! lambda_b = 0.2
//! lambda_u = 0.02
//! lambda_s = 0.01
//! theta_db = 3.0        # or: theta = 1.9952623149688795 (linear)
//! alpha = 3.0
//! mu = 1.0
//! pa_a = 1.0
//! pa_b = 0.0
//!
//! [costs]
//! c1 = 0.0
//! c2 = 1.0
//! c3 = 0.0
//! phi = 1.0
//!
//! [sim]
//! seed = 7
//! trials = 100000
//! width = 50.0
//! height = 50.0
//! torus = true
//! ci_level = 0.95
//! mode = "silent"              # or "all-transmit"
//! estimator = "one-typical"    # or "all-served"
//! auto_scale = true
//! far_field = true
//!
//! [optimize]
//! search_low = 0.002
//! search_high = 24.4
//! rel_tol = 1e-8
//! max_iters = 500
//!
//! [grids]
//! lambda_b = [0.04, 0.1, 0.2, 0.4]
//! k = [1.0, 2.0, 5.0, 10.0]
//! ```
//!
//! Every run writes `<out>.meta` in this same format with all values
//! resolved, so passing it back through `--config` reproduces the run.

use std::path::{Path, PathBuf};

use cellcov::analytic::db_to_linear;
use cellcov::{
    CostParams, EstimatorKind, ModelParams, OptimizeSpec, SimConfig, TransmitMode, Window,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub lambda_b: Option<f64>,
    pub lambda_u: Option<f64>,
    pub lambda_s: Option<f64>,
    pub theta: Option<f64>,
    pub theta_db: Option<f64>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub pa_a: Option<f64>,
    pub pa_b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Silent,
    AllTransmit,
}

impl From<ModeName> for TransmitMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Silent => TransmitMode::SilentEmptyCells,
            ModeName::AllTransmit => TransmitMode::AllTransmit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    OneTypical,
    AllServed,
}

impl From<EstimatorName> for EstimatorKind {
    fn from(e: EstimatorName) -> Self {
        match e {
            EstimatorName::OneTypical => EstimatorKind::OneTypical,
            EstimatorName::AllServed => EstimatorKind::AllServed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub torus: Option<bool>,
    pub ci_level: Option<f64>,
    pub mode: Option<ModeName>,
    pub estimator: Option<EstimatorName>,
    pub auto_scale: Option<bool>,
    pub far_field: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub search_low: Option<f64>,
    pub search_high: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub lambda_b: Option<Vec<f64>>,
    pub k: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSection {
    pub command: Option<String>,
    pub tool_version: Option<String>,
}

/// Partial configuration as read from a file or assembled from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub model: ModelSection,
    pub costs: CostSection,
    pub sim: SimSection,
    pub optimize: OptimizeSection,
    pub grids: GridSection,
    pub meta: MetaSection,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),+) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )+
    };
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(&mut self, top: &ConfigFile) {
        if top.out.is_some() {
            self.out = top.out.clone();
        }
        // a θ given in either unit replaces both
        if top.model.theta.is_some() || top.model.theta_db.is_some() {
            self.model.theta = top.model.theta;
            self.model.theta_db = top.model.theta_db;
        }
        overlay!(self.model, top.model; lambda_b, lambda_u, lambda_s, alpha, mu, pa_a, pa_b);
        overlay!(self.costs, top.costs; c1, c2, c3, phi);
        overlay!(self.sim, top.sim; seed, trials, width, height, torus, ci_level, mode, estimator, auto_scale, far_field);
        overlay!(self.optimize, top.optimize; search_low, search_high, rel_tol, max_iters);
        overlay!(self.grids, top.grids; lambda_b, k);
    }

    pub fn resolve(&self, default_trials: u64) -> Result<RunConfig, CliError> {
        let m = &self.model;
        let dm = ModelParams::default();
        let theta = match (m.theta, m.theta_db) {
            (Some(_), Some(_)) => {
                return Err(CliError::Input(
                    "give theta either linear or in dB, not both".into(),
                ))
            }
            (Some(t), None) => t,
            (None, Some(db)) => db_to_linear(db),
            (None, None) => dm.theta,
        };
        let model = ModelParams {
            lambda_b: m.lambda_b.unwrap_or(dm.lambda_b),
            lambda_u: m.lambda_u.unwrap_or(dm.lambda_u),
            lambda_s: m.lambda_s.unwrap_or(dm.lambda_s),
            theta,
            alpha: m.alpha.unwrap_or(dm.alpha),
            mu: m.mu.unwrap_or(dm.mu),
            pa_a: m.pa_a.unwrap_or(dm.pa_a),
            pa_b: m.pa_b.unwrap_or(dm.pa_b),
        };
        let dc = CostParams::default();
        let costs = CostParams {
            c1: self.costs.c1.unwrap_or(dc.c1),
            c2: self.costs.c2.unwrap_or(dc.c2),
            c3: self.costs.c3.unwrap_or(dc.c3),
            phi: self.costs.phi.unwrap_or(dc.phi),
        };
        let ds = SimConfig::default();
        let s = &self.sim;
        let sim = SimConfig {
            window: Window {
                width: s.width.unwrap_or(ds.window.width),
                height: s.height.unwrap_or(ds.window.height),
                torus: s.torus.unwrap_or(ds.window.torus),
            },
            trials: s.trials.unwrap_or(default_trials),
            seed: s.seed.unwrap_or(ds.seed),
            ci_level: s.ci_level.unwrap_or(ds.ci_level),
            mode: s.mode.map_or(ds.mode, Into::into),
            estimator: s.estimator.map_or(ds.estimator, Into::into),
            auto_scale: s.auto_scale.unwrap_or(ds.auto_scale),
            far_field: s.far_field.unwrap_or(ds.far_field),
        };
        Ok(RunConfig {
            model,
            costs,
            sim,
            optimize: self.optimize.clone(),
            lambda_b_grid: self.grids.lambda_b.clone(),
            k_grid: self.grids.k.clone(),
            out: self.out.clone(),
        })
    }
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub costs: CostParams,
    pub sim: SimConfig,
    /// Bracket overrides; unset fields are derived from the problem.
    pub optimize: OptimizeSection,
    pub lambda_b_grid: Option<Vec<f64>>,
    pub k_grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn optimize_spec(&self, k_max: f64, beta: f64) -> OptimizeSpec {
        let auto = OptimizeSpec::for_problem(self.model.lambda_u, k_max, beta);
        OptimizeSpec {
            search_low: self.optimize.search_low.unwrap_or(auto.search_low),
            search_high: self.optimize.search_high.unwrap_or(auto.search_high),
            rel_tol: self.optimize.rel_tol.unwrap_or(auto.rel_tol),
            max_iters: self.optimize.max_iters.unwrap_or(auto.max_iters),
        }
    }

    /// Sidecar contents: every value resolved, θ stored linear.
    pub fn to_sidecar(&self, command: &str) -> Result<String, CliError> {
        let m = &self.model;
        let s = &self.sim;
        let file = ConfigFile {
            out: self.out.clone(),
            model: ModelSection {
                lambda_b: Some(m.lambda_b),
                lambda_u: Some(m.lambda_u),
                lambda_s: Some(m.lambda_s),
                theta: Some(m.theta),
                theta_db: None,
                alpha: Some(m.alpha),
                mu: Some(m.mu),
                pa_a: Some(m.pa_a),
                pa_b: Some(m.pa_b),
            },
            costs: CostSection {
                c1: Some(self.costs.c1),
                c2: Some(self.costs.c2),
                c3: Some(self.costs.c3),
                phi: Some(self.costs.phi),
            },
            sim: SimSection {
                seed: Some(s.seed),
                trials: Some(s.trials),
                width: Some(s.window.width),
                height: Some(s.window.height),
                torus: Some(s.window.torus),
                ci_level: Some(s.ci_level),
                mode: Some(match s.mode {
                    TransmitMode::SilentEmptyCells => ModeName::Silent,
                    TransmitMode::AllTransmit => ModeName::AllTransmit,
                }),
                estimator: Some(match s.estimator {
                    EstimatorKind::OneTypical => EstimatorName::OneTypical,
                    EstimatorKind::AllServed => EstimatorName::AllServed,
                }),
                auto_scale: Some(s.auto_scale),
                far_field: Some(s.far_field),
            },
            optimize: self.optimize.clone(),
            grids: GridSection {
                lambda_b: self.lambda_b_grid.clone(),
                k: self.k_grid.clone(),
            },
            meta: MetaSection {
                command: Some(command.to_string()),
                tool_version: Some(env!("CARGO_PKG_VERSION").to_string()),
            },
        };
        toml::to_string(&file).map_err(|e| CliError::Io(format!("cannot serialize sidecar: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let mut base: ConfigFile = toml::from_str(
            r#"
            [model]
            lambda_b = 0.3
            theta_db = 3.0
            [sim]
            seed = 5
            trials = 10
            "#,
        )
        .unwrap();
        let mut flags = ConfigFile::default();
        flags.sim.seed = Some(9);
        flags.model.theta = Some(2.0);
        base.overlay(&flags);
        let rc = base.resolve(1000).unwrap();
        assert_eq!(rc.model.lambda_b, 0.3);
        assert_eq!(rc.model.theta, 2.0);
        assert_eq!(rc.sim.seed, 9);
        assert_eq!(rc.sim.trials, 10);
        assert_eq!(rc.model.alpha, 3.0);
    }

    #[test]
    fn both_theta_units_in_one_file_is_an_error() {
        let f: ConfigFile = toml::from_str("[model]\ntheta = 2.0\ntheta_db = 3.0\n").unwrap();
        assert!(matches!(f.resolve(1), Err(CliError::Input(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[model]\nlambda = 1.0\n").is_err());
    }

    #[test]
    fn sidecar_round_trips() {
        let mut f = ConfigFile::default();
        f.model.theta_db = Some(3.0);
        f.grids.k = Some(vec![1.0, 2.5]);
        f.sim.mode = Some(ModeName::AllTransmit);
        let rc = f.resolve(77).unwrap();
        let text = rc.to_sidecar("optimize").unwrap();
        let back: ConfigFile = toml::from_str(&text).unwrap();
        assert_eq!(back.resolve(1).unwrap(), rc);
        assert_eq!(back.meta.command.as_deref(), Some("optimize"));
    }

    #[test]
    fn module_doc_example_parses() {
        let doc = include_str!("config.rs");
        let start = doc.find("//! ```toml").unwrap();
        let body: String = doc[start..]
            .lines()
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start_matches(' '))
            .map(|l| format!("{l}\n"))
            .collect();
        let f: ConfigFile = toml::from_str(&body).unwrap();
        assert!(f.resolve(1).is_ok());
    }
}
