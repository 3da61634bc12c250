//! Default pipeline parameter sets.
//!
//! The full-scale profile matches the published settings (hidden width 128,
//! five blocks, 400 epochs, one million descent starts). That scale assumes a
//! GPU; the desk profile keeps the same pipeline shape on one CPU core by
//! shrinking the surrogate and the descent schedule, which is enough for the
//! low-dimensional suite. Everything here can be overridden per run.

use crate::fpd::{ClusterConfig, DescentConfig, DescentOptimizer};
use crate::glf::{AdamWConstants, TrainConfig};
use crate::model::BlockKind;
use crate::pls::SepCmaConfig;
use serde::{Deserialize, Serialize};

/// Fully resolved stage parameters for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model_hidden: usize,
    pub model_depth: usize,
    pub block_kind: BlockKind,
    pub train: TrainConfig,
    pub descent: DescentConfig,
    pub cluster: ClusterConfig,
    pub cma: SepCmaConfig,
    /// Random local-search centers used by the no-detection variant and the
    /// empty-archive fallback.
    pub no_fpd_centers: usize,
}

fn cluster_for_dim(dim: usize) -> ClusterConfig {
    if dim < 5 {
        ClusterConfig { eps: 0.1, min_pts: 2 }
    } else if dim < 10 {
        ClusterConfig { eps: 0.1, min_pts: 20 }
    } else {
        ClusterConfig { eps: 0.2, min_pts: 40 }
    }
}

fn cma_for_dim(dim: usize) -> SepCmaConfig {
    let population = if dim < 5 {
        8
    } else if dim < 20 {
        10
    } else {
        20
    };
    SepCmaConfig {
        population,
        sigma0: if dim < 5 { 0.1 } else { 0.5 },
        max_generations: 200,
        stop_tol: 1e-5,
        stop_evals: 20 * population,
    }
}

/// Published full-scale settings.
pub fn paper_profile(dim: usize) -> PipelineConfig {
    PipelineConfig {
        model_hidden: 128,
        model_depth: 5,
        block_kind: BlockKind::Nla,
        train: TrainConfig {
            epochs: 400,
            batch_size: 400,
            learning_rate: 5e-4,
            levels: 10,
            adamw: AdamWConstants::default(),
            seed: 0,
        },
        descent: DescentConfig {
            n_starts: 1_000_000,
            step_size: 0.005,
            steps: if dim < 20 { 3000 } else { 5000 },
            optimizer: DescentOptimizer::AdamW,
            chunk_size: 4096,
        },
        cluster: cluster_for_dim(dim),
        cma: cma_for_dim(dim),
        no_fpd_centers: 100,
    }
}

/// Single-core settings: 100k descent starts, a narrower surrogate, and a
/// shorter (but larger-stepped) descent schedule. Values fixed by the
/// calibration runs described in the project readme.
pub fn desk_profile(dim: usize) -> PipelineConfig {
    let (hidden, depth, epochs) = if dim <= 2 {
        (48, 1, 120)
    } else if dim <= 5 {
        (56, 1, 100)
    } else {
        (64, 1, 60)
    };
    PipelineConfig {
        model_hidden: hidden,
        model_depth: depth,
        block_kind: BlockKind::Nla,
        train: TrainConfig {
            epochs,
            batch_size: 400,
            learning_rate: 5e-4,
            levels: 10,
            adamw: AdamWConstants::default(),
            seed: 0,
        },
        descent: DescentConfig {
            n_starts: 100_000,
            step_size: 0.02,
            steps: 120,
            optimizer: DescentOptimizer::AdamW,
            chunk_size: 2048,
        },
        cluster: cluster_for_dim(dim),
        cma: cma_for_dim(dim),
        no_fpd_centers: 100,
    }
}
