//! Global landscape fitting: budgeted uniform sampling, objective-value
//! level stratification, and surrogate training with level-balanced
//! mini-batches under AdamW.

pub mod adamw;

pub use adamw::{adamw_step, AdamWConstants, AdamWState};

use crate::benchmark::BudgetedEvaluator;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::activation::Mode;
use crate::model::{loss_and_param_grads, ModelParams, Normalization};
use crate::rng::{stage_rng, Stage};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Floor for the target standard deviation; constant objectives standardize
/// to all zeros instead of dividing by zero.
const STD_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Number of objective-value levels for stratified batch sampling.
    pub levels: usize,
    pub adamw: AdamWConstants,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 400,
            batch_size: 400,
            learning_rate: 5e-4,
            levels: 10,
            adamw: AdamWConstants::default(),
            seed: 0,
        }
    }
}

/// The sampled training set in raw and model coordinates, with per-sample
/// level labels. Targets carry the internal minimization sign.
#[derive(Debug, Clone)]
pub struct TrainingDataset {
    pub x_raw: Mat,
    pub x_norm: Mat,
    /// Internal-sign objective values (negated benchmark fitness).
    pub y_raw: Vec<f64>,
    pub y_std: Vec<f64>,
    pub level: Vec<usize>,
    pub levels: usize,
    pub norm: Normalization,
    by_level: Vec<Vec<usize>>,
}

impl TrainingDataset {
    pub fn len(&self) -> usize {
        self.y_raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_raw.is_empty()
    }

    /// Indices per nonempty level, ascending by level.
    pub fn nonempty_levels(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.by_level.iter().filter(|v| !v.is_empty())
    }

    /// Dump as columnar text (x..., y_raw) for external cross-checks.
    pub fn dump<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        for i in 0..self.len() {
            for v in self.x_raw.row(i) {
                write!(w, "{v} ")?;
            }
            writeln!(w, "{}", self.y_raw[i])?;
        }
        Ok(())
    }
}

/// Draw `floor(r * max_fes)` uniform points, evaluate them (consuming budget),
/// and build the stratified dataset plus normalization metadata.
pub fn build_dataset(
    evaluator: &BudgetedEvaluator,
    r: f64,
    levels: usize,
    seed: u64,
) -> Result<TrainingDataset> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train ratio must be in (0,1), got {r}"
        )));
    }
    let spec = evaluator.problem().spec().clone();
    let m = (r * spec.max_fes as f64).floor() as usize;
    let dim = spec.dim;
    let mut rng = stage_rng(seed, Stage::Dataset);
    let mut x_raw = Mat::zeros(m, dim);
    for i in 0..m {
        let row = x_raw.row_mut(i);
        for d in 0..dim {
            row[d] = rng.gen_range(spec.lower[d]..spec.upper[d]);
        }
    }
    let fitness = evaluator.evaluate_flat(&x_raw.data)?;
    // internal minimization sign
    let y_raw: Vec<f64> = fitness.iter().map(|&f| -f).collect();

    let mut norm = Normalization::from_bounds(&spec.lower, &spec.upper);
    let mean = y_raw.iter().sum::<f64>() / m as f64;
    let var = y_raw.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / m as f64;
    let std = var.sqrt();
    norm.y_mean = mean;
    norm.y_std = if std > STD_GUARD { std } else { 1.0 };
    let y_std: Vec<f64> = y_raw.iter().map(|&y| norm.standardize_y(y)).collect();

    let mut x_norm = Mat::zeros(m, dim);
    for i in 0..m {
        norm.normalize_into(x_raw.row(i), x_norm.row_mut(i));
    }

    let (level, by_level) = assign_levels(&y_raw, levels);
    Ok(TrainingDataset {
        x_raw,
        x_norm,
        y_raw,
        y_std,
        level,
        levels,
        norm,
        by_level,
    })
}

/// Equal-width level bins over [min y, max y]; the top edge folds into the
/// last bin.
fn assign_levels(y: &[f64], levels: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / levels as f64;
    let mut label = vec![0usize; y.len()];
    let mut by_level = vec![Vec::new(); levels];
    for (i, &v) in y.iter().enumerate() {
        let l = if width > 0.0 {
            (((v - lo) / width) as usize).min(levels - 1)
        } else {
            0
        };
        label[i] = l;
        by_level[l].push(i);
    }
    (label, by_level)
}

/// Level-balanced mini-batch: each nonempty level contributes
/// `n_batch / L` indices (the remainder spread over the first levels);
/// levels smaller than their quota sample with replacement.
pub fn sample_epm_batch<R: Rng>(
    dataset: &TrainingDataset,
    n_batch: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(!dataset.is_empty(), "dataset must be nonempty");
    let nonempty: Vec<&Vec<usize>> = dataset.nonempty_levels().collect();
    let l = nonempty.len();
    let base = n_batch / l;
    let rem = n_batch % l;
    let mut batch = Vec::with_capacity(n_batch);
    for (li, members) in nonempty.iter().enumerate() {
        let quota = base + usize::from(li < rem);
        if members.len() >= quota {
            // partial Fisher-Yates: quota distinct members
            let mut pool: Vec<usize> = (*members).clone();
            for i in 0..quota {
                let j = rng.gen_range(i..pool.len());
                pool.swap(i, j);
                batch.push(pool[i]);
            }
        } else {
            for _ in 0..quota {
                batch.push(members[rng.gen_range(0..members.len())]);
            }
        }
    }
    batch
}

/// Train the surrogate: `epochs` epochs of `ceil(M / batch_size)` stratified
/// batches each. Installs the dataset's normalization metadata into the
/// model, returns the per-epoch mean batch loss.
pub fn train(
    params: &mut ModelParams,
    dataset: &TrainingDataset,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    if params.config().input_dim != dataset.x_norm.cols {
        return Err(Error::DimMismatch {
            expected: params.config().input_dim,
            got: dataset.x_norm.cols,
        });
    }
    params.norm = dataset.norm.clone();
    let m = dataset.len();
    let dim = dataset.x_norm.cols;
    let batches_per_epoch = m.div_ceil(config.batch_size);
    let mut rng = stage_rng(config.seed, Stage::Training);
    let mut opt = AdamWState::new(params.num_params());
    let mut trace = Vec::with_capacity(config.epochs);
    let mut xb = Mat::zeros(config.batch_size, dim);
    let mut yb = vec![0.0; config.batch_size];
    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for _ in 0..batches_per_epoch {
            let idx = sample_epm_batch(dataset, config.batch_size, &mut rng);
            for (bi, &si) in idx.iter().enumerate() {
                xb.row_mut(bi).copy_from_slice(dataset.x_norm.row(si));
                yb[bi] = dataset.y_std[si];
            }
            let step = loss_and_param_grads(params, &xb, &yb, Mode::Train(&mut rng))
                .and_then(|(loss, grads)| {
                    adamw_step(
                        &mut opt,
                        params.flat_mut(),
                        &grads,
                        config.learning_rate,
                        &config.adamw,
                    )?;
                    Ok(loss)
                });
            match step {
                Ok(loss) => epoch_loss += loss,
                Err(Error::NonFinite { .. }) => {
                    return Err(Error::TrainingDiverged { epoch, trace });
                }
                Err(e) => return Err(e),
            }
        }
        trace.push(epoch_loss / batches_per_epoch as f64);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{make_problem, ProblemId};
    use crate::model::{init_model, BlockKind, ModelConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dataset_size_is_floor_r_maxfes() {
        let (_, ev) = make_problem(ProblemId(1), 0).unwrap();
        let ds = build_dataset(&ev, 3.0 / 8.0, 10, 7).unwrap();
        assert_eq!(ds.len(), 18750);
        assert_eq!(ev.used_fes(), 18750);
    }

    #[test]
    fn standardized_targets_have_unit_moments() {
        let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
        let ds = build_dataset(&ev, 0.1, 10, 3).unwrap();
        let n = ds.len() as f64;
        let mean = ds.y_std.iter().sum::<f64>() / n;
        let var = ds.y_std.iter().map(|y| y * y).sum::<f64>() / n - mean * mean;
        assert!(mean.abs() < 1e-9, "mean {mean}");
        assert!((var - 1.0).abs() < 1e-6, "var {var}");
        // round trip back to raw units
        for i in 0..ds.len() {
            let back = ds.norm.destandardize_y(ds.y_std[i]);
            assert!((back - ds.y_raw[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let (_, ev1) = make_problem(ProblemId(2), 0).unwrap();
        let (_, ev2) = make_problem(ProblemId(2), 0).unwrap();
        let a = build_dataset(&ev1, 0.2, 10, 42).unwrap();
        let b = build_dataset(&ev2, 0.2, 10, 42).unwrap();
        assert_eq!(a.x_raw.data, b.x_raw.data);
        assert_eq!(a.y_raw, b.y_raw);
        assert_eq!(a.level, b.level);
    }

    #[test]
    fn levels_partition_and_match_targets() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev, 0.1, 10, 5).unwrap();
        let lo = ds.y_raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ds.y_raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / 10.0;
        for (i, &l) in ds.level.iter().enumerate() {
            assert!(l < 10);
            let expect = (((ds.y_raw[i] - lo) / width) as usize).min(9);
            assert_eq!(l, expect);
        }
    }

    #[test]
    fn epm_batch_counts_differ_by_at_most_one() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev, 0.1, 10, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = sample_epm_batch(&ds, 400, &mut rng);
        assert_eq!(batch.len(), 400);
        let l = ds.nonempty_levels().count();
        let mut counts = vec![0usize; 10];
        for &i in &batch {
            counts[ds.level[i]] += 1;
        }
        let nonzero: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        assert_eq!(nonzero.len(), l);
        let max = *nonzero.iter().max().unwrap();
        let min = *nonzero.iter().min().unwrap();
        assert!(max - min <= 1, "counts {nonzero:?}");
    }

    #[test]
    fn epm_remainder_rule() {
        // build a tiny synthetic dataset with exactly 3 nonempty levels
        let y_raw = vec![0.0, 0.0, 5.0, 5.0, 10.0, 10.0];
        let (level, by_level) = assign_levels(&y_raw, 3);
        let ds = TrainingDataset {
            x_raw: Mat::zeros(6, 1),
            x_norm: Mat::zeros(6, 1),
            y_std: vec![0.0; 6],
            y_raw,
            level,
            levels: 3,
            norm: Normalization::identity(1),
            by_level,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = sample_epm_batch(&ds, 400, &mut rng);
        let mut counts = [0usize; 3];
        for &i in &batch {
            counts[ds.level[i]] += 1;
        }
        assert_eq!(counts, [134, 133, 133]);
    }

    #[test]
    fn single_level_batch_is_plain_uniform() {
        let y_raw = vec![3.3; 50];
        let (level, by_level) = assign_levels(&y_raw, 10);
        assert!(level.iter().all(|&l| l == 0));
        let ds = TrainingDataset {
            x_raw: Mat::zeros(50, 1),
            x_norm: Mat::zeros(50, 1),
            y_std: vec![0.0; 50],
            y_raw,
            level,
            levels: 10,
            norm: Normalization::identity(1),
            by_level,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = sample_epm_batch(&ds, 64, &mut rng);
        assert_eq!(batch.len(), 64);
        assert!(batch.iter().all(|&i| i < 50));
    }

    #[test]
    fn constant_objective_standardizes_to_zero() {
        // F1 region [27.5, 30) is linear, but a constant comes from clamping:
        // use a table override instead - simplest is a direct check of the
        // guard through assign/standardize on synthetic constant data.
        let y = vec![-4.0; 100];
        let mean = -4.0;
        let std = 0.0;
        let mut norm = Normalization::identity(1);
        norm.y_mean = mean;
        norm.y_std = if std > STD_GUARD { std } else { 1.0 };
        assert!(y.iter().all(|&v| norm.standardize_y(v) == 0.0));
    }

    #[test]
    fn training_is_reproducible_and_loss_decreases() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev, 0.04, 10, 11).unwrap(); // 2000 points
        let cfg = TrainConfig {
            epochs: 12,
            batch_size: 200,
            levels: 10,
            seed: 5,
            ..Default::default()
        };
        let mc = ModelConfig::new(1, 16, 1, BlockKind::Nla);
        let mut p1 = init_model(mc, 9);
        let t1 = train(&mut p1, &ds, &cfg).unwrap();
        let mut p2 = init_model(mc, 9);
        let t2 = train(&mut p2, &ds, &cfg).unwrap();
        assert_eq!(p1.flat(), p2.flat(), "training must be bit-reproducible");
        assert_eq!(t1, t2);
        assert_eq!(t1.len(), 12);
        assert!(
            t1.last().unwrap() <= &t1[0],
            "loss should not increase: {t1:?}"
        );
        // normalization metadata got installed
        assert_eq!(p1.norm.y_mean, ds.norm.y_mean);
    }
}
