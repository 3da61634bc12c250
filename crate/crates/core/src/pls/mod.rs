//! Parallel local search: separable CMA-ES refinement launched from each
//! archive center under a shared evaluation budget.
//!
//! The strategy keeps a diagonal covariance. Strategy constants follow the
//! separable-variant convention: standard c_sigma / d_sigma / c_c, and the
//! covariance learning rate of full CMA-ES scaled up by (dim + 2) / 3.
//! Fitness passed to [`SepCmaState::tell`] uses the internal minimization
//! sign; the round-robin driver negates benchmark fitness at the boundary.

use crate::benchmark::{BudgetedEvaluator, SolutionSet};
use crate::error::{Error, Result};
use crate::fpd::PeakArchive;
use crate::rng::{stage_rng, Stage};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepCmaConfig {
    /// Population size (lambda).
    pub population: usize,
    /// Initial global step size, in problem coordinate units.
    pub sigma0: f64,
    /// Generation cap per launch.
    pub max_generations: usize,
    /// Early-stop improvement threshold.
    pub stop_tol: f64,
    /// Early-stop window, in evaluations.
    pub stop_evals: usize,
}

impl SepCmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.sigma0 <= 0.0 || self.max_generations < 1 {
            return Err(Error::InvalidConfig(
                "sep-CMA-ES needs population >= 2, sigma0 > 0, generations >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Full strategy state for one launch.
#[derive(Debug, Clone)]
pub struct SepCmaState {
    dim: usize,
    lambda: usize,
    mu: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    /// Diagonal covariance learning rate, already scaled by (dim + 2) / 3.
    c_cov: f64,
    chi_n: f64,
    pub mean: Vec<f64>,
    pub sigma: f64,
    /// Per-coordinate variances (the covariance diagonal).
    pub diag: Vec<f64>,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    pub generation: u64,
    pub best_value: f64,
    pub best_point: Option<Vec<f64>>,
    evals_since_improvement: usize,
    stop_tol: f64,
}

impl SepCmaState {
    /// Start a launch at `center` with unit diagonal covariance and zero
    /// evolution paths. Recombination weights are the positive log-rank
    /// scheme over mu = floor(lambda / 2) parents, normalized to sum one.
    pub fn new(center: &[f64], config: &SepCmaConfig) -> Self {
        let dim = center.len();
        let n = dim as f64;
        let lambda = config.population;
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu)
            .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 3.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = 4.0 / (n + 4.0);
        let c_cov_full = (1.0 / mu_eff) * 2.0 / (n + 2f64.sqrt()).powi(2)
            + (1.0 - 1.0 / mu_eff)
                * (1.0f64).min((2.0 * mu_eff - 1.0) / ((n + 2.0).powi(2) + mu_eff));
        let c_cov = ((n + 2.0) / 3.0 * c_cov_full).min(0.95);
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        SepCmaState {
            dim,
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_cov,
            chi_n,
            mean: center.to_vec(),
            sigma: config.sigma0,
            diag: vec![1.0; dim],
            p_sigma: vec![0.0; dim],
            p_c: vec![0.0; dim],
            generation: 0,
            best_value: f64::INFINITY,
            best_point: None,
            evals_since_improvement: 0,
            stop_tol: config.stop_tol,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn evals_since_improvement(&self) -> usize {
        self.evals_since_improvement
    }

    /// Sample lambda candidates `m + sigma * sqrt(c) .* z`, clamped to the
    /// box bounds.
    pub fn ask<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        lower: &[f64],
        upper: &[f64],
    ) -> Vec<Vec<f64>> {
        (0..self.lambda)
            .map(|_| {
                (0..self.dim)
                    .map(|j| {
                        let z: f64 = rng.sample(StandardNormal);
                        (self.mean[j] + self.sigma * self.diag[j].sqrt() * z)
                            .clamp(lower[j], upper[j])
                    })
                    .collect()
            })
            .collect()
    }

    /// Track best-so-far and the stagnation counter for a run of evaluated
    /// candidates, in evaluation order. Improvement resets the counter only
    /// when it exceeds the early-stop threshold.
    pub fn record_evaluations(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) {
        for (x, &f) in candidates.iter().zip(fitnesses) {
            self.evals_since_improvement += 1;
            if f < self.best_value - self.stop_tol {
                self.evals_since_improvement = 0;
            }
            if f < self.best_value {
                self.best_value = f;
                self.best_point = Some(x.clone());
            }
        }
    }

    /// One full-generation update from ranked candidates (internal
    /// minimization sign).
    pub fn tell(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) -> Result<()> {
        assert_eq!(candidates.len(), self.lambda);
        assert_eq!(fitnesses.len(), self.lambda);
        if fitnesses.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite {
                context: "local-search fitness",
            });
        }
        self.record_evaluations(candidates, fitnesses);

        let mut order: Vec<usize> = (0..self.lambda).collect();
        order.sort_by(|&a, &b| {
            fitnesses[a]
                .partial_cmp(&fitnesses[b])
                .unwrap()
                .then(a.cmp(&b))
        });

        let old_mean = self.mean.clone();
        let mut new_mean = vec![0.0; self.dim];
        for (wi, &idx) in self.weights.iter().zip(&order) {
            for j in 0..self.dim {
                new_mean[j] += wi * candidates[idx][j];
            }
        }

        // whitened and plain recombined displacements
        let mut z_w = vec![0.0; self.dim];
        let mut y_w = vec![0.0; self.dim];
        for j in 0..self.dim {
            let y = (new_mean[j] - old_mean[j]) / self.sigma;
            y_w[j] = y;
            z_w[j] = y / self.diag[j].sqrt();
        }

        let cs = self.c_sigma;
        let path_scale = (cs * (2.0 - cs) * self.mu_eff).sqrt();
        for j in 0..self.dim {
            self.p_sigma[j] = (1.0 - cs) * self.p_sigma[j] + path_scale * z_w[j];
        }
        let ps_norm = self.p_sigma.iter().map(|v| v * v).sum::<f64>().sqrt();

        let gen_decay = 1.0 - (1.0 - cs).powi(2 * (self.generation as i32 + 1));
        let h_sigma = if ps_norm / gen_decay.sqrt()
            < (1.4 + 2.0 / (self.dim as f64 + 1.0)) * self.chi_n
        {
            1.0
        } else {
            0.0
        };

        let cc = self.c_c;
        let pc_scale = h_sigma * (cc * (2.0 - cc) * self.mu_eff).sqrt();
        for j in 0..self.dim {
            self.p_c[j] = (1.0 - cc) * self.p_c[j] + pc_scale * y_w[j];
        }

        // diagonal covariance: rank-one plus rank-mu with the separable rate
        let ccov = self.c_cov;
        let delta_h = (1.0 - h_sigma) * cc * (2.0 - cc);
        for j in 0..self.dim {
            let mut rank_mu = 0.0;
            for (wi, &idx) in self.weights.iter().zip(&order) {
                let yij = (candidates[idx][j] - old_mean[j]) / self.sigma;
                rank_mu += wi * yij * yij;
            }
            self.diag[j] = (1.0 - ccov) * self.diag[j]
                + (ccov / self.mu_eff) * (self.p_c[j] * self.p_c[j] + delta_h * self.diag[j])
                + ccov * (1.0 - 1.0 / self.mu_eff) * rank_mu;
            if !(self.diag[j].is_finite() && self.diag[j] > 0.0) {
                return Err(Error::NonFinite {
                    context: "sep-CMA-ES covariance diagonal",
                });
            }
        }

        self.sigma *= ((cs / self.d_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::NonFinite {
                context: "sep-CMA-ES step size",
            });
        }
        self.mean = new_mean;
        self.generation += 1;
        Ok(())
    }
}

/// Outcome of one local-search launch.
#[derive(Debug, Clone)]
pub struct LaunchResult {
    pub best_point: Vec<f64>,
    /// Raw fitness of the best point (maximization convention).
    pub best_fitness: f64,
    pub evals_used: u64,
    pub generations: u64,
    pub stopped_early: bool,
}

/// Run one ask/tell loop from `center` until the generation cap, stagnation
/// (no improvement above the threshold within the configured window of
/// evaluations), or budget exhaustion. A final partial generation evaluates
/// only as many candidates as the budget allows.
pub fn run_local_search<R: Rng + ?Sized>(
    evaluator: &BudgetedEvaluator,
    center: &[f64],
    config: &SepCmaConfig,
    rng: &mut R,
) -> Result<LaunchResult> {
    config.validate()?;
    if evaluator.remaining() == 0 {
        return Err(Error::ZeroBudget);
    }
    let spec = evaluator.problem().spec().clone();
    let mut state = SepCmaState::new(center, config);
    let mut evals_used = 0u64;
    let mut stopped_early = false;
    for _ in 0..config.max_generations {
        let remaining = evaluator.remaining();
        if remaining == 0 {
            break;
        }
        let candidates = state.ask(rng, &spec.lower, &spec.upper);
        if (remaining as usize) < candidates.len() {
            let partial = &candidates[..remaining as usize];
            let raw = evaluator.evaluate_batch(partial)?;
            evals_used += raw.len() as u64;
            let internal: Vec<f64> = raw.iter().map(|&f| -f).collect();
            state.record_evaluations(partial, &internal);
            break;
        }
        let raw = evaluator.evaluate_batch(&candidates)?;
        evals_used += raw.len() as u64;
        let internal: Vec<f64> = raw.iter().map(|&f| -f).collect();
        state.tell(&candidates, &internal)?;
        if state.evals_since_improvement() >= config.stop_evals {
            stopped_early = true;
            break;
        }
    }
    let best_point = state.best_point.clone().unwrap_or_else(|| center.to_vec());
    Ok(LaunchResult {
        best_fitness: -state.best_value,
        best_point,
        evals_used,
        generations: state.generation,
        stopped_early,
    })
}

/// Cycle through the archive centers in sorted order, launching one local
/// search per visit with a fresh per-launch stream, until the evaluator's
/// budget is gone. Every launch's best point lands in the returned set.
pub fn round_robin_search(
    evaluator: &BudgetedEvaluator,
    archive: &PeakArchive,
    config: &SepCmaConfig,
    master_seed: u64,
) -> Result<SolutionSet> {
    if archive.is_empty() {
        return Err(Error::EmptyArchive);
    }
    let mut solutions = SolutionSet::new();
    let mut launch: u64 = 0;
    let mut k = 0usize;
    while evaluator.remaining() > 0 {
        let center = &archive.centers[k].point;
        let mut rng = stage_rng(master_seed, Stage::LocalSearch(launch));
        let result = run_local_search(evaluator, center, config, &mut rng)?;
        solutions.push(result.best_point, result.best_fitness);
        launch += 1;
        k = (k + 1) % archive.len();
    }
    Ok(solutions)
}

#[cfg(test)]
mod tests;
