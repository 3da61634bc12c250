use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::glf::{build_dataset, sample_epm_batch, train, TrainConfig};
use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, init_model, BlockKind, ModelConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let (prob, ev) = make_problem(ProblemId(2), 0).unwrap();
    let spec = prob.spec().clone();
    for levels in [1usize, 3, 10] {
        let (_, ev2) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev2, 0.1, levels, 1).unwrap();
        let mc = ModelConfig::new(1, 32, 1, BlockKind::Nla);
        let mut p = init_model(mc, 1);
        let cfg = TrainConfig { epochs: 100, learning_rate: 2e-3, levels, seed: 1, ..Default::default() };
        let trace = train(&mut p, &ds, &cfg).unwrap();
        let n = 1001;
        let mut xs = Mat::zeros(n, 1);
        let mut ys = vec![0.0; n];
        for i in 0..n {
            let x = spec.lower[0] + (spec.upper[0] - spec.lower[0]) * i as f64 / (n - 1) as f64;
            xs.data[i] = p.norm.normalize_point(&[x])[0];
            ys[i] = p.norm.standardize_y(-prob.value(&[x]));
        }
        let preds = forward(&p, &xs, Mode::Eval).unwrap();
        let mse = preds.iter().zip(&ys).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
        println!("levels={levels}: trace {:.3} -> {:.4}, heldout MSE {mse:.2e}", trace[0], trace.last().unwrap());
        // batch composition peek
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = sample_epm_batch(&ds, 400, &mut rng);
        let distinct: std::collections::HashSet<usize> = batch.iter().cloned().collect();
        let mut lvl_sizes = vec![0usize; levels];
        for &l in &ds.level { lvl_sizes[l] += 1; }
        println!("  level sizes {:?}, batch distinct {}/400", lvl_sizes, distinct.len());
    }
    drop(ev);
}
