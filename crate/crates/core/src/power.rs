//! Waterfilling solvers, ergodic capacity and an empirical power check.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fading::{DiscreteFadingDistribution, FadingLaw};
use crate::rng::rng_from_seed;

pub const SCALAR_TOL: f64 = 1e-10;
pub const SPACETIME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub water_level: f64,
    /// `P*(h_s)` in support order.
    pub allocations: Vec<f64>,
    /// Support indices receiving positive power.
    pub active_set: Vec<usize>,
}

impl WaterfillSolution {
    pub fn power_for(&self, dist: &DiscreteFadingDistribution, h: f64) -> Result<f64> {
        dist.index_of(h).map(|k| self.allocations[k]).ok_or(Error::OutOfSupport(h))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSolution {
    pub water_level: f64,
    /// `P_i^(s)` for every stream `s` and draw `i`.
    pub allocations: Vec<Vec<f64>>,
    /// Sample-average power of each stream.
    pub stream_powers: Vec<f64>,
}

fn budget_used(c: f64, gains: &[f64], weights: &[f64]) -> f64 {
    gains
        .iter()
        .zip(weights)
        .filter(|(&g, _)| g > 0.0)
        .map(|(&g, &w)| w * (c - 1.0 / g).max(0.0))
        .sum()
}

/// Solves `sum_k w_k (c - 1/g_k)^+ = budget` for the level `c`.
fn water_level(gains: &[f64], weights: &[f64], budget: f64, tol: f64) -> Result<f64> {
    let live: Vec<(f64, f64)> = gains
        .iter()
        .zip(weights)
        .filter(|(&g, &w)| g > 0.0 && w > 0.0)
        .map(|(&g, &w)| (g, w))
        .collect();
    if live.is_empty() {
        return Err(Error::InvalidDistribution("no state with positive gain".into()));
    }
    let inv_min = live.iter().map(|p| 1.0 / p.0).fold(f64::INFINITY, f64::min);
    let inv_max = live.iter().map(|p| 1.0 / p.0).fold(0.0, f64::max);
    let mass: f64 = live.iter().map(|p| p.1).sum();
    let (mut lo, mut hi) = (inv_min, inv_max + budget / mass);
    let mut c = 0.5 * (lo + hi);
    for _ in 0..400 {
        c = 0.5 * (lo + hi);
        let r = budget_used(c, gains, weights) - budget;
        if r.abs() <= tol * 1e-3 * budget.max(1.0) {
            break;
        }
        if r > 0.0 {
            hi = c;
        } else {
            lo = c;
        }
    }
    // closed form on the active set found by bisection
    let (mut sw, mut swg) = (0.0, 0.0);
    for &(g, w) in &live {
        if c > 1.0 / g {
            sw += w;
            swg += w / g;
        }
    }
    if sw > 0.0 {
        let polished = (budget + swg) / sw;
        let consistent = live.iter().all(|&(g, _)| (c > 1.0 / g) == (polished > 1.0 / g) || (polished - 1.0 / g).abs() < 1e-12);
        if consistent && (budget_used(polished, gains, weights) - budget).abs() <= (budget_used(c, gains, weights) - budget).abs() {
            c = polished;
        }
    }
    let resid = (budget_used(c, gains, weights) - budget).abs();
    if resid > tol * budget.max(1.0) {
        return Err(Error::InvalidParameter(format!("waterfilling did not converge (residual {resid})")));
    }
    Ok(c)
}

/// Per-state waterfilling `P*(h) = (c - 1/h^2)^+` with `E[P*] = rho`.
pub fn waterfill_scalar(dist: &DiscreteFadingDistribution, rho: f64) -> Result<WaterfillSolution> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::NonPositivePower(rho));
    }
    let gains: Vec<f64> = dist.support().iter().map(|h| h * h).collect();
    let c = water_level(&gains, dist.probs(), rho, SCALAR_TOL)?;
    let allocations: Vec<f64> = gains.iter().map(|&g| if g > 0.0 { (c - 1.0 / g).max(0.0) } else { 0.0 }).collect();
    let active_set = allocations.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(k, _)| k).collect();
    Ok(WaterfillSolution { water_level: c, allocations, active_set })
}

/// `1/2 E[log2(1 + h^2 P*(h))]` under waterfilling.
pub fn ergodic_capacity_csit(dist: &DiscreteFadingDistribution, rho: f64) -> Result<f64> {
    let sol = waterfill_scalar(dist, rho)?;
    Ok(csit_capacity_for(dist, &sol))
}

pub(crate) fn csit_capacity_for(dist: &DiscreteFadingDistribution, sol: &WaterfillSolution) -> f64 {
    dist.support()
        .iter()
        .zip(dist.probs())
        .zip(&sol.allocations)
        .map(|((h, mu), p)| 0.5 * mu * (1.0 + h * h * p).log2())
        .sum()
}

/// Waterfilling over streams and time: `sum_s mean_i (c - 1/l_{s,i}^2)^+ = budget`,
/// expectations replaced by sample averages.
pub fn waterfill_spacetime(singular_values: &[Vec<f64>], budget: f64) -> Result<SpaceTimeSolution> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::NonPositivePower(budget));
    }
    if singular_values.is_empty() || singular_values.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidParameter("space-time waterfilling needs nonempty samples".into()));
    }
    let mut gains = Vec::new();
    let mut weights = Vec::new();
    for stream in singular_values {
        let w = 1.0 / stream.len() as f64;
        for &l in stream {
            gains.push(l * l);
            weights.push(w);
        }
    }
    let c = water_level(&gains, &weights, budget, SPACETIME_TOL)?;
    let allocations: Vec<Vec<f64>> = singular_values
        .iter()
        .map(|s| s.iter().map(|&l| if l != 0.0 { (c - 1.0 / (l * l)).max(0.0) } else { 0.0 }).collect())
        .collect();
    let stream_powers = allocations.iter().map(|a| a.iter().sum::<f64>() / a.len() as f64).collect();
    Ok(SpaceTimeSolution { water_level: c, allocations, stream_powers })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// `1/2 log2 det(I_M + rho' H^T H)` with `rho' = rho / M`.
pub fn white_log_det(h: &DMatrix<f64>, rho: f64) -> f64 {
    let m = h.ncols();
    let psi = DMatrix::identity(m, m) + h.transpose() * h * (rho / m as f64);
    // psi is symmetric positive definite
    let chol = psi.cholesky().expect("I + rho' H^T H is positive definite");
    let l = chol.l();
    (0..m).map(|i| l[(i, i)].log2()).sum()
}

/// Monte Carlo white-input MIMO capacity with i.i.d. entries from `law`.
pub fn mimo_capacity_white(law: &FadingLaw, tx: usize, rx: usize, rho: f64, draws: usize, seed: u64) -> Result<CapacityEstimate> {
    let mats = draw_channel_matrices(law, tx, rx, draws, seed)?;
    mimo_capacity_white_on(&mats, rho)
}

/// White-input capacity averaged over a fixed set of channel draws.
pub fn mimo_capacity_white_on(mats: &[DMatrix<f64>], rho: f64) -> Result<CapacityEstimate> {
    if !(rho >= 0.0) {
        return Err(Error::NonPositivePower(rho));
    }
    if mats.is_empty() {
        return Err(Error::InvalidParameter("no channel draws".into()));
    }
    let vals: Vec<f64> = mats.iter().map(|h| white_log_det(h, rho)).collect();
    Ok(mean_and_stderr(&vals))
}

pub fn draw_channel_matrices(law: &FadingLaw, tx: usize, rx: usize, draws: usize, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    if tx == 0 || rx == 0 {
        return Err(Error::InvalidParameter("antenna counts must be positive".into()));
    }
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..draws)
        .map(|_| {
            let e: Vec<f64> = (0..tx * rx).map(|_| law.draw(&mut rng)).collect();
            DMatrix::from_row_slice(rx, tx, &e)
        })
        .collect())
}

pub(crate) fn mean_and_stderr(vals: &[f64]) -> CapacityEstimate {
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let stderr = if vals.len() > 1 {
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    CapacityEstimate { mean, stderr }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    pub mean_power: f64,
    pub pass: bool,
}

/// Empirical `(1/n) E||x'||^2` over the given precoded vectors.
pub fn verify_power_constraint(samples: &[Vec<f64>], rho: f64, tol: f64) -> Result<PowerCheck> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no precoded samples".into()));
    }
    let mean_power = samples
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64)
        .sum::<f64>()
        / samples.len() as f64;
    Ok(PowerCheck { mean_power, pass: mean_power <= rho * (1.0 + tol) })
}
