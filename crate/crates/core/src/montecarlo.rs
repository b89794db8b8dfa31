//! Monte Carlo estimators over independent network realizations.
//!
//! Trial `i` of a run draws everything from `RngStream::new(seed, i)`, and
//! per-trial results are reduced in trial order, so estimates do not depend
//! on how rayon schedules the work.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::analytic::{
    self, beta_integral, empty_cell_probability, outage_asymptotic, outage_exact, quadrature,
    ModelParams, QuadratureSpec,
};
use crate::error::{require, Error, Result};
use crate::pointprocess::{
    associate, sample_ppp, uniform_point, Densities, NearestIndex, NetworkRealization,
    PointPattern, RngStream, Window,
};
use crate::stats::{self, Estimate};

/// Redraws allowed per trial before giving up.
pub const MAX_ATTEMPTS_PER_TRIAL: u64 = 1000;

/// Smallest expected BS count the default window is grown to.
pub const MIN_EXPECTED_BS: f64 = 100.0;

const PAR_MIN_LEN: usize = 64;

fn trial_indices(trials: u64) -> impl IndexedParallelIterator<Item = u64> {
    (0..trials as usize)
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|i| i as u64)
}

/// Which base stations radiate in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransmitMode {
    /// BSs whose cells hold no mobile stay silent.
    SilentEmptyCells,
    /// Every BS transmits.
    AllTransmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// One typical active mobile per realization; trials are i.i.d.
    OneTypical,
    /// Every served mobile of a realization is measured, with errors taken
    /// over realizations.
    AllServed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub window: Window,
    pub trials: u64,
    pub seed: u64,
    pub ci_level: f64,
    pub mode: TransmitMode,
    pub estimator: EstimatorKind,
    /// Grow the window so it holds at least [`MIN_EXPECTED_BS`] base
    /// stations on average.
    pub auto_scale: bool,
    /// Add the mean interference of transmitters beyond the torus' nearest
    /// images (torus windows only).
    pub far_field: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            window: Window {
                width: 50.0,
                height: 50.0,
                torus: true,
            },
            trials: 10_000,
            seed: 1,
            ci_level: 0.95,
            mode: TransmitMode::SilentEmptyCells,
            estimator: EstimatorKind::OneTypical,
            auto_scale: true,
            far_field: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        require(self.trials >= 1, "trials", "must be >= 1")?;
        require(
            self.ci_level > 0.0 && self.ci_level < 1.0,
            "ci_level",
            "must lie in (0, 1)",
        )
    }

    /// Window actually simulated for base-station density `lambda_b`.
    pub fn window_for(&self, lambda_b: f64) -> Window {
        let mut w = self.window;
        let expected = lambda_b * w.area();
        if self.auto_scale && lambda_b > 0.0 && expected < MIN_EXPECTED_BS {
            let s = (MIN_EXPECTED_BS / expected).sqrt();
            w.width *= s;
            w.height *= s;
        }
        w
    }
}

/// `∫ r^{-α} dA` over the plane outside the `width × height` rectangle
/// centered on the receiver.
///
/// On a torus with the nearest-image metric every receiver sees exactly that
/// rectangle; transmitters of density ρ beyond it add mean interference
/// `ρ · far_field_integral(..)` under unit-mean fading.
pub fn far_field_integral(width: f64, height: f64, alpha: f64) -> Result<f64> {
    require(alpha > 2.0, "alpha", "must exceed 2")?;
    let (hw, hh) = (0.5 * width, 0.5 * height);
    // radial integral of r^{1-α} from the rectangle edge to infinity
    let radial = |phi: f64| {
        let rho = (hw / phi.cos()).min(hh / phi.sin());
        rho.powf(2.0 - alpha) / (alpha - 2.0)
    };
    let corner = (hh / hw).atan();
    let r = quadrature::integrate_partitioned(radial, &[0.0, corner, FRAC_PI_2], 1e-13, 1000)?;
    Ok(4.0 * r.value)
}

#[derive(Clone, Copy)]
enum PathLoss {
    Cube,
    Fourth,
    General(f64),
}

impl PathLoss {
    fn new(alpha: f64) -> Self {
        if alpha == 3.0 {
            PathLoss::Cube
        } else if alpha == 4.0 {
            PathLoss::Fourth
        } else {
            PathLoss::General(-0.5 * alpha)
        }
    }

    /// `d^{-α}` from the squared distance.
    #[inline]
    fn gain(self, d2: f64) -> f64 {
        match self {
            PathLoss::Cube => 1.0 / (d2 * d2.sqrt()),
            PathLoss::Fourth => 1.0 / (d2 * d2),
            PathLoss::General(e) => d2.powf(e),
        }
    }
}

/// Outage indicators of one trial under both transmit modes, sharing the
/// geometry and fading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutageCounts {
    pub silent: u64,
    pub all_transmit: u64,
    /// Number of measured mobiles (1 for the one-typical estimator).
    pub measured: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePair {
    pub silent: Estimate,
    pub all_transmit: Estimate,
}

impl OutagePair {
    pub fn get(&self, mode: TransmitMode) -> Estimate {
        match mode {
            TransmitMode::SilentEmptyCells => self.silent,
            TransmitMode::AllTransmit => self.all_transmit,
        }
    }
}

struct OutageContext {
    densities: Densities,
    window: Window,
    theta: f64,
    path_loss: PathLoss,
    far_coeff: f64,
    estimator: EstimatorKind,
}

fn sample_valid<R: Rng>(
    densities: &Densities,
    window: &Window,
    rng: &mut R,
) -> Result<(NetworkRealization, u64)> {
    let mut discards = 0;
    loop {
        match NetworkRealization::sample(densities, window, rng) {
            Ok(r) => return Ok((r, discards)),
            Err(Error::EmptyBs | Error::NoActiveBs) => {
                discards += 1;
                if discards >= MAX_ATTEMPTS_PER_TRIAL {
                    return Err(Error::TooManyDiscards { attempts: discards });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

impl OutageContext {
    fn new(model: &ModelParams, sim: &SimConfig) -> Result<Self> {
        model.validate()?;
        sim.validate()?;
        let window = sim.window_for(model.lambda_b);
        let far_coeff = if sim.far_field && window.torus {
            far_field_integral(window.width, window.height, model.alpha)? / window.area()
        } else {
            0.0
        };
        Ok(OutageContext {
            densities: Densities {
                lambda_b: model.lambda_b,
                lambda_u: model.lambda_u,
                lambda_s: 0.0,
            },
            window,
            theta: model.theta,
            path_loss: PathLoss::new(model.alpha),
            far_coeff,
            estimator: sim.estimator,
        })
    }

    /// Returns the counts and the number of discarded draws.
    fn trial(&self, seed: u64, index: u64) -> Result<(OutageCounts, u64)> {
        let mut rng = RngStream::new(seed, index);
        let (real, discards) = sample_valid(&self.densities, &self.window, &mut rng)?;
        let counts = match self.estimator {
            EstimatorKind::OneTypical => {
                let fading = &real.fading;
                self.measure(&real, real.schedule.typical_mobile, |b| fading[b])
            }
            EstimatorKind::AllServed => {
                let mut total = OutageCounts::default();
                let served: Vec<usize> = real
                    .schedule
                    .served_mobile
                    .iter()
                    .flatten()
                    .copied()
                    .collect();
                let mut gains = vec![0.0; real.bs.len()];
                for m in served {
                    for g in gains.iter_mut() {
                        *g = Exp1.sample(&mut rng);
                    }
                    let c = self.measure(&real, m, |b| gains[b]);
                    total.silent += c.silent;
                    total.all_transmit += c.all_transmit;
                    total.measured += 1;
                }
                total
            }
        };
        Ok((counts, discards))
    }

    /// SIR test for mobile `m`. Transmit power multiplies signal and every
    /// interference term alike, so it is left out.
    fn measure(
        &self,
        real: &NetworkRealization,
        m: usize,
        fading: impl Fn(usize) -> f64,
    ) -> OutageCounts {
        let window = real.window();
        let u = real.mobiles.points[m];
        let server = real.association.assoc[m];
        let mut signal = 0.0;
        let mut active_sum = 0.0;
        let mut idle_sum = 0.0;
        for (b, &p) in real.bs.points.iter().enumerate() {
            let power = fading(b) * self.path_loss.gain(window.distance_sq(u, p));
            if b == server {
                signal = power;
            } else if real.association.is_active(b) {
                active_sum += power;
            } else {
                idle_sum += power;
            }
        }
        let n_active = real.association.active_count() as f64;
        let n_all = real.bs.len() as f64;
        let interference_silent = active_sum + self.far_coeff * n_active;
        let interference_all = active_sum + idle_sum + self.far_coeff * n_all;
        OutageCounts {
            silent: (signal < self.theta * interference_silent) as u64,
            all_transmit: (signal < self.theta * interference_all) as u64,
            measured: 1,
        }
    }
}

/// Per-trial outage counts in trial order, with discard counts.
pub fn outage_trials(model: &ModelParams, sim: &SimConfig) -> Result<Vec<(OutageCounts, u64)>> {
    let ctx = OutageContext::new(model, sim)?;
    trial_indices(sim.trials)
        .map(|i| ctx.trial(sim.seed, i))
        .collect()
}

/// Outage estimates for both transmit modes from the same realizations.
pub fn estimate_outage_pair(model: &ModelParams, sim: &SimConfig) -> Result<OutagePair> {
    let trials = outage_trials(model, sim)?;
    let discards: u64 = trials.iter().map(|t| t.1).sum();
    match sim.estimator {
        EstimatorKind::OneTypical => {
            let silent: u64 = trials.iter().map(|t| t.0.silent).sum();
            let all: u64 = trials.iter().map(|t| t.0.all_transmit).sum();
            Ok(OutagePair {
                silent: stats::proportion(silent, sim.trials, discards, sim.ci_level)?,
                all_transmit: stats::proportion(all, sim.trials, discards, sim.ci_level)?,
            })
        }
        EstimatorKind::AllServed => {
            let pairs = |f: fn(&OutageCounts) -> u64| -> Vec<(f64, f64)> {
                trials
                    .iter()
                    .map(|(c, _)| (f(c) as f64, c.measured as f64))
                    .collect()
            };
            Ok(OutagePair {
                silent: stats::ratio_of_sums(&pairs(|c| c.silent), discards, sim.ci_level)?,
                all_transmit: stats::ratio_of_sums(
                    &pairs(|c| c.all_transmit),
                    discards,
                    sim.ci_level,
                )?,
            })
        }
    }
}

/// `Pr(SIR < θ)` for the typical active mobile under `sim.mode`.
pub fn estimate_outage(model: &ModelParams, sim: &SimConfig) -> Result<Estimate> {
    estimate_outage_pair(model, sim).map(|p| p.get(sim.mode))
}

/// Fraction of base stations whose cell holds no mobile, pooled over
/// realizations.
pub fn estimate_empty_cell_prob(lambda_b: f64, lambda_u: f64, sim: &SimConfig) -> Result<Estimate> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    require(lambda_u >= 0.0, "lambda_u", "must be >= 0")?;
    sim.validate()?;
    let window = sim.window_for(lambda_b);
    let per_trial: Vec<((f64, f64), u64)> = trial_indices(sim.trials)
        .map(|i| {
            let mut rng = RngStream::new(sim.seed, i);
            let mut discards = 0;
            loop {
                let bs = sample_ppp(lambda_b, &window, &mut rng)?;
                let mobiles = sample_ppp(lambda_u, &window, &mut rng)?;
                if bs.is_empty() {
                    discards += 1;
                    if discards >= MAX_ATTEMPTS_PER_TRIAL {
                        return Err(Error::TooManyDiscards { attempts: discards });
                    }
                    continue;
                }
                let a = associate(&mobiles, &bs)?;
                let empty = (bs.len() - a.active_count()) as f64;
                return Ok(((empty, bs.len() as f64), discards));
            }
        })
        .collect::<Result<_>>()?;
    let discards = per_trial.iter().map(|t| t.1).sum();
    let pairs: Vec<(f64, f64)> = per_trial.into_iter().map(|t| t.0).collect();
    stats::ratio_of_sums(&pairs, discards, sim.ci_level)
}

/// Distances from a typical mobile to its nearest BS, one per trial.
///
/// By Slivnyak's theorem the typical mobile of a PPP sits at a uniform
/// location independent of the BS process.
pub fn sample_link_distances(lambda_b: f64, sim: &SimConfig) -> Result<(Vec<f64>, u64)> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    sim.validate()?;
    let window = sim.window_for(lambda_b);
    let per_trial: Vec<(f64, u64)> = trial_indices(sim.trials)
        .map(|i| {
            let mut rng = RngStream::new(sim.seed, i);
            let mut discards = 0;
            loop {
                let bs = sample_ppp(lambda_b, &window, &mut rng)?;
                let u = uniform_point(&mut rng, &window);
                match NearestIndex::new(&bs).nearest(u) {
                    Some((_, d2)) => return Ok((d2.sqrt(), discards)),
                    None => {
                        discards += 1;
                        if discards >= MAX_ATTEMPTS_PER_TRIAL {
                            return Err(Error::TooManyDiscards { attempts: discards });
                        }
                    }
                }
            }
        })
        .collect::<Result<_>>()?;
    let discards = per_trial.iter().map(|t| t.1).sum();
    Ok((per_trial.into_iter().map(|t| t.0).collect(), discards))
}

/// Mean typical-link distance; `1/(2√λ_b)` in the plane.
pub fn estimate_link_distance(lambda_b: f64, sim: &SimConfig) -> Result<Estimate> {
    let (d, discards) = sample_link_distances(lambda_b, sim)?;
    stats::sample_mean(&d, discards, sim.ci_level)
}

/// Total BS-to-nearest-switching-center cable length of a realization under
/// two normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableEstimate {
    /// Cable length divided by the window area; `λ_b/(2√λ_s)` in the plane.
    pub per_unit_area: Estimate,
    /// Cable length divided by the switching-center count; `λ_b/(2λ_s^{3/2})`.
    pub per_sc_cell: Estimate,
}

pub fn estimate_cable_length(
    lambda_b: f64,
    lambda_s: f64,
    sim: &SimConfig,
) -> Result<CableEstimate> {
    require(lambda_b >= 0.0, "lambda_b", "must be >= 0")?;
    require(lambda_s > 0.0, "lambda_s", "must be > 0")?;
    sim.validate()?;
    // sized for whichever process is sparser
    let window = sim.window_for(if lambda_b > 0.0 {
        lambda_b.min(lambda_s)
    } else {
        lambda_s
    });
    let per_trial: Vec<((f64, f64), u64)> = trial_indices(sim.trials)
        .map(|i| {
            let mut rng = RngStream::new(sim.seed, i);
            let mut discards = 0;
            loop {
                let bs = sample_ppp(lambda_b, &window, &mut rng)?;
                let sc = sample_ppp(lambda_s, &window, &mut rng)?;
                if sc.is_empty() {
                    discards += 1;
                    if discards >= MAX_ATTEMPTS_PER_TRIAL {
                        return Err(Error::TooManyDiscards { attempts: discards });
                    }
                    continue;
                }
                let total = total_cable(&bs, &sc);
                return Ok(((total / window.area(), total / sc.len() as f64), discards));
            }
        })
        .collect::<Result<_>>()?;
    let discards = per_trial.iter().map(|t| t.1).sum();
    let area: Vec<f64> = per_trial.iter().map(|t| t.0 .0).collect();
    let cell: Vec<f64> = per_trial.iter().map(|t| t.0 .1).collect();
    Ok(CableEstimate {
        per_unit_area: stats::sample_mean(&area, discards, sim.ci_level)?,
        per_sc_cell: stats::sample_mean(&cell, discards, sim.ci_level)?,
    })
}

fn total_cable(bs: &PointPattern, sc: &PointPattern) -> f64 {
    let index = NearestIndex::new(sc);
    stats::compensated_sum(
        bs.points
            .iter()
            .map(|&p| index.nearest(p).map_or(0.0, |(_, d2)| d2.sqrt())),
    )
}

/// Monte Carlo and analytic outage at one BS density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub silent: Estimate,
    pub all_transmit: Estimate,
    pub analytic_exact: f64,
    pub analytic_asymptotic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda_b: f64,
    pub outcome: Result<SweepStats>,
}

/// Seed of sweep row `row`; row 0 uses the base seed itself.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    seed.wrapping_add((row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Outage versus BS density: silent-mode and all-transmit Monte Carlo next to
/// the exact and asymptotic closed forms. Row failures are kept in the table.
pub fn sweep_outage(
    template: &ModelParams,
    lambda_b_grid: &[f64],
    sim: &SimConfig,
    quad: &QuadratureSpec,
) -> Result<Vec<SweepRow>> {
    require(
        !lambda_b_grid.is_empty(),
        "lambda_b_grid",
        "must not be empty",
    )?;
    require(
        lambda_b_grid.windows(2).all(|w| w[0] < w[1]),
        "lambda_b_grid",
        "must be strictly ascending",
    )?;
    template.validate()?;
    let beta = beta_integral(template.theta, template.alpha, quad)?;
    Ok(lambda_b_grid
        .iter()
        .enumerate()
        .map(|(row, &lambda_b)| {
            let model = template.with_lambda_b(lambda_b);
            let sim = SimConfig {
                seed: row_seed(sim.seed, row),
                ..*sim
            };
            let outcome = (|| {
                let pair = estimate_outage_pair(&model, &sim)?;
                let p = empty_cell_probability(lambda_b, model.lambda_u)?;
                Ok(SweepStats {
                    silent: pair.silent,
                    all_transmit: pair.all_transmit,
                    analytic_exact: outage_exact(p, beta)?,
                    analytic_asymptotic: outage_asymptotic(lambda_b, model.lambda_u, beta)?.value,
                })
            })();
            SweepRow { lambda_b, outcome }
        })
        .collect())
}

/// All-transmit outage of a PPP network, `1 − 1/(1+β)`.
pub fn all_transmit_outage(beta: f64) -> Result<f64> {
    analytic::outage_exact(0.0, beta)
}
