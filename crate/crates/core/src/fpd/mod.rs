//! Free-of-trial peak detection: multi-start gradient descent on the trained
//! surrogate (consuming zero true evaluations), density clustering of the
//! converged points, and extraction of the sorted candidate-peak archive.

pub mod dbscan;

pub use dbscan::{dbscan as cluster_points, dbscan_reference, ClusterConfig, NOISE};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::activation::Mode;
use crate::model::{forward, grad_input, ModelParams};
use crate::rng::{stage_rng, Stage};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DescentOptimizer {
    /// Plain fixed-step descent `x <- x - eta * grad`.
    Vanilla,
    /// Per-point Adam-style update with step size eta (no weight decay).
    AdamW,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub n_starts: usize,
    pub step_size: f64,
    pub steps: usize,
    pub optimizer: DescentOptimizer,
    /// Starts are processed in chunks of this size; peak memory is bounded by
    /// the chunk, results are independent of it.
    pub chunk_size: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            n_starts: 100_000,
            step_size: 0.005,
            steps: 3000,
            optimizer: DescentOptimizer::AdamW,
            chunk_size: 2048,
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Run `steps` descent updates from `n_starts` uniform points in the model's
/// normalized coordinate cube [-1, 1]^d, clamping after every step. Returns
/// the converged points (normalized coordinates). Touches no evaluator.
pub fn multistart_descent(
    params: &ModelParams,
    config: &DescentConfig,
    seed: u64,
) -> Result<Mat> {
    assert!(config.n_starts >= 1 && config.steps >= 1 && config.step_size > 0.0);
    let dim = params.config().input_dim;
    let mut rng = stage_rng(seed, Stage::Descent);
    let mut points = Mat::zeros(config.n_starts, dim);
    for v in points.data.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }

    let chunk = config.chunk_size.max(1);
    let n = config.n_starts;
    let mut start = 0;
    while start < n {
        let rows = (n - start).min(chunk);
        let mut x = Mat::from_vec(
            rows,
            dim,
            points.data[start * dim..(start + rows) * dim].to_vec(),
        );
        descend_chunk(params, config, &mut x)?;
        points.data[start * dim..(start + rows) * dim].copy_from_slice(&x.data);
        start += rows;
    }
    Ok(points)
}

fn descend_chunk(params: &ModelParams, config: &DescentConfig, x: &mut Mat) -> Result<()> {
    let len = x.data.len();
    let mut m = vec![0.0; len];
    let mut v = vec![0.0; len];
    for step in 1..=config.steps {
        let g = grad_input(params, x)?;
        match config.optimizer {
            DescentOptimizer::Vanilla => {
                for (xv, gv) in x.data.iter_mut().zip(&g.data) {
                    *xv = (*xv - config.step_size * gv).clamp(-1.0, 1.0);
                }
            }
            DescentOptimizer::AdamW => {
                let bc1 = 1.0 - ADAM_BETA1.powi(step as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(step as i32);
                for i in 0..len {
                    let gv = g.data[i];
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * gv;
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * gv * gv;
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    x.data[i] =
                        (x.data[i] - config.step_size * m_hat / (v_hat.sqrt() + ADAM_EPS))
                            .clamp(-1.0, 1.0);
                }
            }
        }
    }
    Ok(())
}

/// One candidate peak: problem coordinates plus the surrogate's prediction
/// in standardized internal (minimization) units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub point: Vec<f64>,
    pub predicted: f64,
}

/// Cluster-center candidates sorted ascending by predicted value, so the most
/// promising basin comes first under the internal minimization convention.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PeakArchive {
    pub centers: Vec<ArchiveEntry>,
}

impl PeakArchive {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Map descent output from [-1, 1] to the unit hypercube for clustering.
pub fn to_unit_cube(points: &Mat) -> Mat {
    let mut out = points.clone();
    for v in out.data.iter_mut() {
        *v = 0.5 * (*v + 1.0);
    }
    out
}

/// Pick each cluster's member with the lowest predicted value (ties to the
/// lowest point index), discard noise, denormalize to problem coordinates,
/// and sort ascending by prediction.
pub fn build_archive(
    points_norm: &Mat,
    labels: &[isize],
    params: &ModelParams,
) -> Result<PeakArchive> {
    assert_eq!(points_norm.rows, labels.len());
    let n_clusters = labels.iter().filter(|&&l| l >= 0).map(|&l| l + 1).max();
    let Some(n_clusters) = n_clusters else {
        return Err(Error::EmptyArchive);
    };
    let n_clusters = n_clusters as usize;

    // predictions for all converged points, chunked to bound memory
    let mut preds = Vec::with_capacity(points_norm.rows);
    let dim = points_norm.cols;
    for chunk in points_norm.data.chunks(4096 * dim) {
        let rows = chunk.len() / dim;
        let x = Mat::from_vec(rows, dim, chunk.to_vec());
        preds.extend(forward(params, &x, Mode::Eval)?);
    }

    let mut best: Vec<Option<usize>> = vec![None; n_clusters];
    for (i, &l) in labels.iter().enumerate() {
        if l < 0 {
            continue;
        }
        let slot = &mut best[l as usize];
        let replace = match slot {
            None => true,
            Some(j) => preds[i] < preds[*j],
        };
        if replace {
            *slot = Some(i);
        }
    }
    let mut centers: Vec<ArchiveEntry> = best
        .into_iter()
        .flatten()
        .map(|i| ArchiveEntry {
            point: params.norm.denormalize_point(points_norm.row(i)),
            predicted: preds[i],
        })
        .collect();
    if centers.is_empty() {
        return Err(Error::EmptyArchive);
    }
    centers.sort_by(|a, b| a.predicted.partial_cmp(&b.predicted).unwrap());
    Ok(PeakArchive { centers })
}
