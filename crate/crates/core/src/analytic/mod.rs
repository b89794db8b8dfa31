//! Closed-form coverage and cost quantities for a downlink network whose base
//! stations, mobiles and switching centers are independent homogeneous
//! Poisson point processes, with base stations in empty cells kept silent.
//!
//! Everything here is a pure function of its arguments.

pub mod quadrature;

use std::f64::consts::PI;

use crate::error::{require, Error, Result};

/// Shape parameter of the gamma fit to the normalized Voronoi cell area.
pub const VORONOI_SHAPE: f64 = 3.5;

/// Γ(3.5) = 15√π / 8.
const GAMMA_3_5: f64 = 3.323_350_970_447_842_6;

/// Below this λ_b/λ_u ratio the large-ratio approximations are flagged.
pub const ASYMPTOTIC_RATIO_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Base-station density (points per unit area).
    pub lambda_b: f64,
    /// Mobile density.
    pub lambda_u: f64,
    /// Switching-center density.
    pub lambda_s: f64,
    /// SIR threshold, linear scale.
    pub theta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Transmit power of every base station (W).
    pub mu: f64,
    /// Slope of the per-BS power model `P_b = A·μ + B`.
    pub pa_a: f64,
    /// Offset power drawn whether or not the BS transmits (W).
    pub pa_b: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda_b: 0.2,
            lambda_u: 0.02,
            lambda_s: 0.01,
            theta: db_to_linear(3.0),
            alpha: 3.0,
            mu: 1.0,
            pa_a: 1.0,
            pa_b: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        require(
            self.lambda_b > 0.0 && self.lambda_b.is_finite(),
            "lambda_b",
            "must be > 0",
        )?;
        require(
            self.lambda_u >= 0.0 && self.lambda_u.is_finite(),
            "lambda_u",
            "must be >= 0",
        )?;
        require(
            self.lambda_s > 0.0 && self.lambda_s.is_finite(),
            "lambda_s",
            "must be > 0",
        )?;
        require(
            self.theta > 0.0 && self.theta.is_finite(),
            "theta",
            "must be > 0",
        )?;
        if !(self.alpha > 2.0) {
            return Err(Error::DivergentIntegral(format!(
                "path-loss exponent alpha = {} must exceed 2; interference is infinite otherwise",
                self.alpha
            )));
        }
        require(self.mu > 0.0, "mu", "must be > 0")?;
        require(self.pa_a >= 0.0, "pa_a", "must be >= 0")?;
        require(self.pa_b >= 0.0, "pa_b", "must be >= 0")?;
        Ok(())
    }

    pub fn with_lambda_b(mut self, lambda_b: f64) -> Self {
        self.lambda_b = lambda_b;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Cost per unit cable length.
    pub c1: f64,
    /// Hardware cost per base station.
    pub c2: f64,
    /// Price per unit power.
    pub c3: f64,
    /// Penalty per outage event.
    pub phi: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams::normalized(1.0)
    }
}

impl CostParams {
    /// Costs whose per-BS aggregate equals one, so the outage penalty is the
    /// ratio `K` itself.
    pub fn normalized(k: f64) -> Self {
        CostParams {
            c1: 0.0,
            c2: 1.0,
            c3: 0.0,
            phi: k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("phi", self.phi),
        ] {
            require(v >= 0.0 && v.is_finite(), name, "must be >= 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_error_bound: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_error_bound: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        require(self.abs_tol > 0.0, "abs_tol", "must be > 0")?;
        require(
            self.max_subdivisions >= 1,
            "max_subdivisions",
            "must be >= 1",
        )?;
        require(
            self.tail_error_bound > 0.0,
            "tail_error_bound",
            "must be > 0",
        )
    }
}

/// Whether the cost or power expression uses the exact empty-cell terms or
/// their large-λ_b/λ_u limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Asymptotic,
}

/// Value of a large-ratio approximation together with its validity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticValue {
    pub value: f64,
    /// The raw formula left its range and was clamped.
    pub clamped: bool,
    /// λ_b/λ_u is large enough for the approximation to be meaningful.
    pub in_regime: bool,
}

fn ratio_in_regime(lambda_b: f64, lambda_u: f64) -> bool {
    lambda_u == 0.0 || lambda_b / lambda_u >= ASYMPTOTIC_RATIO_THRESHOLD
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Gamma(3.5, 3.5·λ_b) approximation to the pdf of a typical Voronoi cell's area.
pub fn voronoi_area_pdf(x: f64, lambda_b: f64) -> Result<f64> {
    require(x >= 0.0, "x", "area must be >= 0")?;
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let k = VORONOI_SHAPE;
    let log_pdf =
        k * k.ln() - GAMMA_3_5.ln() + k * lambda_b.ln() + (k - 1.0) * x.ln() - k * lambda_b * x;
    Ok(log_pdf.exp())
}

/// Probability that a typical base station has no mobile in its cell,
/// `(1 + λ_u / (3.5 λ_b))^-3.5`.
pub fn empty_cell_probability(lambda_b: f64, lambda_u: f64) -> Result<f64> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    require(lambda_u >= 0.0, "lambda_u", "must be >= 0")?;
    Ok((-VORONOI_SHAPE * (lambda_u / (VORONOI_SHAPE * lambda_b)).ln_1p()).exp())
}

/// `1 − λ_u/λ_b`, clamped at zero.
pub fn empty_cell_probability_asymptotic(lambda_b: f64, lambda_u: f64) -> Result<AsymptoticValue> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    require(lambda_u >= 0.0, "lambda_u", "must be >= 0")?;
    let raw = 1.0 - lambda_u / lambda_b;
    Ok(AsymptoticValue {
        value: raw.max(0.0),
        clamped: raw < 0.0,
        in_regime: ratio_in_regime(lambda_b, lambda_u),
    })
}

/// Interference integral `θ^{2/α} ∫_{θ^{-2/α}}^∞ dx / (1 + x^{α/2})`.
///
/// The finite part `[θ^{-2/α}, X]` goes through adaptive Gauss-Kronrod; the
/// tail beyond `X` uses the first three terms of the expansion
/// `1/(1+x^k) = x^-k − x^-2k + x^-3k − …`, whose remainder is bounded by
/// `X^{1-4k}/(4k-1)`. `X` is chosen so that bound is 1% of
/// `quad.tail_error_bound`. Both tolerances apply to the returned β.
pub fn beta_integral(theta: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    beta_integral_detailed(theta, alpha, quad).map(|r| r.value)
}

pub fn beta_integral_detailed(
    theta: f64,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<quadrature::QuadResult> {
    require(theta > 0.0 && theta.is_finite(), "theta", "must be > 0")?;
    if !(alpha > 2.0) {
        return Err(Error::DivergentIntegral(format!(
            "beta integral diverges for alpha = {alpha} <= 2"
        )));
    }
    require(alpha.is_finite(), "alpha", "must be finite")?;
    quad.validate()?;

    let k = 0.5 * alpha;
    let lower = theta.powf(-1.0 / k);
    let prefactor = theta.powf(1.0 / k);

    let tail_target = quad.tail_error_bound / prefactor;
    let quad_target = quad.abs_tol / prefactor;

    // remainder after three series terms: X^{1-4k}/(4k-1) <= tail_target/100,
    // so the truncation sits well inside the budget instead of on its edge
    let m = 4.0 * k - 1.0;
    let cutoff = (100.0 / (m * tail_target)).powf(1.0 / m).max(2.0);
    let tail_from = |x: f64| {
        x.powf(1.0 - k) / (k - 1.0) - x.powf(1.0 - 2.0 * k) / (2.0 * k - 1.0)
            + x.powf(1.0 - 3.0 * k) / (3.0 * k - 1.0)
    };
    let tail_bound = |x: f64| x.powf(1.0 - 4.0 * k) / (4.0 * k - 1.0);

    let integrand = |x: f64| 1.0 / (1.0 + x.powf(k));

    if lower >= cutoff {
        return Ok(quadrature::QuadResult {
            value: prefactor * tail_from(lower),
            abs_error: prefactor * tail_bound(lower),
            subdivisions: 0,
        });
    }

    // geometric initial partition; the integrand varies on a log scale
    const PIECES: usize = 16;
    let ratio = (cutoff / lower).powf(1.0 / PIECES as f64);
    let mut breaks: Vec<f64> = (0..PIECES).map(|i| lower * ratio.powi(i as i32)).collect();
    breaks.push(cutoff);
    breaks.dedup_by(|a, b| !(*b < *a));

    let body = quadrature::integrate_partitioned(
        integrand,
        &breaks,
        quad_target,
        quad.max_subdivisions.max(breaks.len()),
    )?;
    Ok(quadrature::QuadResult {
        value: prefactor * (body.value + tail_from(cutoff)),
        abs_error: prefactor * (body.abs_error + tail_bound(cutoff)),
        subdivisions: body.subdivisions,
    })
}

/// `1 − 1/(1 + (1−p)β)`.
pub fn outage_exact(p: f64, beta: f64) -> Result<f64> {
    require((0.0..=1.0).contains(&p), "p", "must lie in [0, 1]")?;
    require(beta >= 0.0 && beta.is_finite(), "beta", "must be >= 0")?;
    let x = (1.0 - p) * beta;
    Ok(x / (1.0 + x))
}

/// `β·λ_u/λ_b`, unclamped. Values at or above one are flagged out of regime.
pub fn outage_asymptotic(lambda_b: f64, lambda_u: f64, beta: f64) -> Result<AsymptoticValue> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    require(lambda_u >= 0.0, "lambda_u", "must be >= 0")?;
    require(beta >= 0.0, "beta", "must be >= 0")?;
    let value = beta * lambda_u / lambda_b;
    Ok(AsymptoticValue {
        value,
        clamped: false,
        in_regime: ratio_in_regime(lambda_b, lambda_u) && value < 1.0,
    })
}

/// Density of the distance from a typical mobile to its nearest base station.
pub fn nearest_distance_pdf(r: f64, lambda_b: f64) -> Result<f64> {
    require(r >= 0.0, "r", "must be >= 0")?;
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    if r.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 * PI * lambda_b * r * (-PI * lambda_b * r * r).exp())
}

/// Cable length `λ_b / (2 λ_s^{3/2})`.
///
/// The mean BS-to-nearest-switching-center distance is `1/(2√λ_s)`, so this
/// expression is the cable per switching-center cell; per unit area it would
/// be `λ_b/(2√λ_s)`. The two coincide at `λ_s = 1`. See
/// [`crate::montecarlo::estimate_cable_length`], which reports both.
pub fn cable_length_density(lambda_b: f64, lambda_s: f64) -> Result<f64> {
    require(lambda_b > 0.0, "lambda_b", "must be > 0")?;
    require(lambda_s > 0.0, "lambda_s", "must be > 0")?;
    Ok(lambda_b / (2.0 * lambda_s.powf(1.5)))
}

/// Total BS power per unit area.
pub fn network_power(params: &ModelParams, p: f64, mode: Mode) -> Result<f64> {
    params.validate()?;
    require((0.0..=1.0).contains(&p), "p", "must lie in [0, 1]")?;
    let ModelParams {
        lambda_b,
        lambda_u,
        mu,
        pa_a,
        pa_b,
        ..
    } = *params;
    Ok(match mode {
        Mode::Exact => (pa_a * mu + pa_b) * (1.0 - p) * lambda_b + pa_b * p * lambda_b,
        Mode::Asymptotic => pa_a * mu * lambda_u + pa_b * lambda_b,
    })
}

/// The four weighted terms of the network cost at a given BS density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub cable: f64,
    pub hardware: f64,
    pub power: f64,
    pub outage: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.cable + self.hardware + self.power + self.outage
    }
}

/// `c1·L + c2·λ_b + c3·P_Σ + φ·P_out` evaluated at `lambda_b` (the density in
/// `model` is ignored).
pub fn cost_breakdown(
    lambda_b: f64,
    model: &ModelParams,
    costs: &CostParams,
    beta: f64,
    mode: Mode,
) -> Result<CostBreakdown> {
    costs.validate()?;
    require(
        lambda_b > 0.0 && lambda_b.is_finite(),
        "lambda_b",
        "must be > 0",
    )?;
    require(beta >= 0.0, "beta", "must be >= 0")?;
    let model = model.with_lambda_b(lambda_b);
    model.validate()?;

    let cable = cable_length_density(lambda_b, model.lambda_s)?;
    let (power, outage) = match mode {
        Mode::Exact => {
            let p = empty_cell_probability(lambda_b, model.lambda_u)?;
            (network_power(&model, p, mode)?, outage_exact(p, beta)?)
        }
        Mode::Asymptotic => (
            network_power(&model, 0.0, mode)?,
            outage_asymptotic(lambda_b, model.lambda_u, beta)?.value,
        ),
    };
    Ok(CostBreakdown {
        cable: costs.c1 * cable,
        hardware: costs.c2 * lambda_b,
        power: costs.c3 * power,
        outage: costs.phi * outage,
    })
}

pub fn cost(
    lambda_b: f64,
    model: &ModelParams,
    costs: &CostParams,
    beta: f64,
    mode: Mode,
) -> Result<f64> {
    cost_breakdown(lambda_b, model, costs, beta, mode).map(|c| c.total())
}

/// Aggregate cost of one base station, `c1/(2λ_s^{3/2}) + c2 + c3·B`.
pub fn per_bs_cost(costs: &CostParams, lambda_s: f64, pa_b: f64) -> Result<f64> {
    costs.validate()?;
    require(lambda_s > 0.0, "lambda_s", "must be > 0")?;
    require(pa_b >= 0.0, "pa_b", "must be >= 0")?;
    let denom = costs.c1 / (2.0 * lambda_s.powf(1.5)) + costs.c2 + costs.c3 * pa_b;
    if denom > 0.0 {
        Ok(denom)
    } else {
        Err(Error::ZeroDenominator(
            "c1/(2 lambda_s^1.5) + c2 + c3*B vanishes; at least one cost must be positive",
        ))
    }
}

/// Outage penalty divided by the aggregate per-BS cost.
pub fn k_ratio(costs: &CostParams, lambda_s: f64, pa_b: f64) -> Result<f64> {
    Ok(costs.phi / per_bs_cost(costs, lambda_s, pa_b)?)
}

/// Minimizer of the asymptotic cost, `√(K·β·λ_u)`.
pub fn optimal_density_closed_form(
    model: &ModelParams,
    costs: &CostParams,
    beta: f64,
) -> Result<f64> {
    require(beta >= 0.0, "beta", "must be >= 0")?;
    require(model.lambda_u >= 0.0, "lambda_u", "must be >= 0")?;
    let k = k_ratio(costs, model.lambda_s, model.pa_b)?;
    Ok((k * beta * model.lambda_u).sqrt())
}
