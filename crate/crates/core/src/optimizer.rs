//! Numerical minimization of the network cost over the BS density, and the
//! comparison of the closed-form optimum against the exact-cost minimizer.

use crate::analytic::{cost, optimal_density_closed_form, CostParams, Mode, ModelParams};
use crate::error::{require, Error, Result};

/// Upper-bracket doublings tried before giving up.
pub const MAX_EXPANSIONS: u32 = 4;

const SCAN_POINTS: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSpec {
    pub search_low: f64,
    pub search_high: f64,
    /// Relative tolerance on the minimizing density.
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        OptimizeSpec {
            search_low: 1e-3,
            search_high: 10.0,
            rel_tol: 1e-8,
            max_iters: 500,
        }
    }
}

impl OptimizeSpec {
    /// Bracket `[λ_u/10, 10·√(K_max·β·λ_u)]`.
    pub fn for_problem(lambda_u: f64, k_max: f64, beta: f64) -> Self {
        let low = if lambda_u > 0.0 {
            lambda_u / 10.0
        } else {
            1e-6
        };
        let high = (10.0 * (k_max * beta * lambda_u).sqrt()).max(10.0 * low);
        OptimizeSpec {
            search_low: low,
            search_high: high,
            ..OptimizeSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.search_low > 0.0, "search_low", "must be > 0")?;
        require(
            self.search_high > self.search_low && self.search_high.is_finite(),
            "search_high",
            "must exceed search_low",
        )?;
        require(self.rel_tol > 0.0, "rel_tol", "must be > 0")?;
        require(self.max_iters >= 1, "max_iters", "must be >= 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub density: f64,
    pub cost: f64,
    pub iterations: usize,
    /// The minimizer sits on `search_low`; the cost may keep falling below it.
    pub at_lower_boundary: bool,
}

/// Minimizes `f` over `[low, high]` by golden-section search in `ln x`.
///
/// The bracket's upper end is doubled up to [`MAX_EXPANSIONS`] times while
/// the cost still decreases there. A coarse log-spaced scan rejects costs with
/// more than one interior local minimum.
pub fn minimize_scalar<F>(f: F, spec: &OptimizeSpec) -> Result<Minimum>
where
    F: Fn(f64) -> Result<f64>,
{
    spec.validate()?;
    let low = spec.search_low;
    let mut high = spec.search_high;
    let mut expansions = 0;

    let (grid, values) = loop {
        let (lu, hu) = (low.ln(), high.ln());
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lu + (hu - lu) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let values = grid
            .iter()
            .map(|&u| f(u.exp()))
            .collect::<Result<Vec<_>>>()?;
        if argmin(&values) < SCAN_POINTS - 1 {
            break (grid, values);
        }
        if expansions == MAX_EXPANSIONS {
            return Err(Error::BracketFailure {
                upper: high,
                expansions,
            });
        }
        high *= 2.0;
        expansions += 1;
    };

    if interior_minima(&values) > 1 {
        return Err(Error::NonUnimodal { low, high });
    }

    let best = argmin(&values);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SCAN_POINTS - 1)];
    let g = |u: f64| f(u.exp());

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c)?;
    let mut fd = g(d)?;
    let mut iterations = 0;
    while b - a > spec.rel_tol && iterations < spec.max_iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d)?;
        }
        iterations += 1;
    }

    let (u, fu) = if fc <= fd { (c, fc) } else { (d, fd) };
    if best == 0 {
        // the interior probes never touch the bracket end itself
        let f_low = f(low)?;
        if f_low <= fu {
            return Ok(Minimum {
                density: low,
                cost: f_low,
                iterations,
                at_lower_boundary: true,
            });
        }
    }
    Ok(Minimum {
        density: u.exp(),
        cost: fu,
        iterations,
        at_lower_boundary: false,
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < values[best] { i } else { best })
}

/// Number of descending-then-ascending turns, ignoring round-off-level steps.
fn interior_minima(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut minima = 0;
    let mut descending = false;
    for w in values.windows(2) {
        let step = w[1] - w[0];
        if step < -eps {
            descending = true;
        } else if step > eps {
            if descending {
                minima += 1;
            }
            descending = false;
        }
    }
    minima
}

/// Density minimizing the exact or asymptotic network cost.
pub fn minimize_cost(
    model: &ModelParams,
    costs: &CostParams,
    beta: f64,
    mode: Mode,
    spec: &OptimizeSpec,
) -> Result<Minimum> {
    model.validate()?;
    costs.validate()?;
    minimize_scalar(|x| cost(x, model, costs, beta, mode), spec)
}

/// Closed-form versus numerically optimal density at one cost ratio `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub k: f64,
    pub closed_form: f64,
    pub numeric_exact: f64,
    pub numeric_asymptotic: f64,
    pub abs_gap: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub k: f64,
    pub outcome: Result<GapReport>,
}

/// Per `K`: the closed form `√(Kβλ_u)` against the minimizers of the exact
/// and asymptotic costs, with the per-BS cost normalized to one and `φ = K`.
pub fn gap_study(
    k_grid: &[f64],
    model: &ModelParams,
    beta: f64,
    spec: &OptimizeSpec,
) -> Result<Vec<GapRow>> {
    require(!k_grid.is_empty(), "k_grid", "must not be empty")?;
    require(
        k_grid.iter().all(|&k| k > 0.0),
        "k_grid",
        "ratios must be > 0",
    )?;
    require(
        k_grid.windows(2).all(|w| w[0] < w[1]),
        "k_grid",
        "must be strictly ascending",
    )?;
    require(beta >= 0.0, "beta", "must be >= 0")?;
    model.validate()?;
    spec.validate()?;

    Ok(k_grid
        .iter()
        .map(|&k| {
            let costs = CostParams::normalized(k);
            let outcome = (|| {
                let closed_form = optimal_density_closed_form(model, &costs, beta)?;
                let exact = minimize_cost(model, &costs, beta, Mode::Exact, spec)?;
                let asym = minimize_cost(model, &costs, beta, Mode::Asymptotic, spec)?;
                let abs_gap = (closed_form - exact.density).abs();
                Ok(GapReport {
                    k,
                    closed_form,
                    numeric_exact: exact.density,
                    numeric_asymptotic: asym.density,
                    abs_gap,
                    rel_error: abs_gap / exact.density,
                })
            })();
            GapRow { k, outcome }
        })
        .collect())
}
