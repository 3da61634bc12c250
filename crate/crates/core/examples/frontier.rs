use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn main() {
    let (prob, _) = make_problem(ProblemId(2), 0).unwrap();
    let spec = prob.spec().clone();
    let grid: Vec<(usize, usize, f64, usize)> = vec![
        (48, 1, 2e-3, 200),
        (64, 1, 2e-3, 200),
        (64, 1, 2e-3, 400),
        (64, 2, 1e-3, 200),
        (96, 1, 2e-3, 200),
        (64, 1, 5e-3, 200),
        (64, 1, 5e-4, 400),
    ];
    for (h, k, lr, epochs) in grid {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev, 0.1, 10, 1).unwrap();
        let mc = ModelConfig::new(1, h, k, BlockKind::Nla);
        let mut p = init_model(mc, 1);
        let t = Instant::now();
        let cfg = TrainConfig { epochs, learning_rate: lr, seed: 1, ..Default::default() };
        let trace = train(&mut p, &ds, &cfg).unwrap();
        let secs = t.elapsed().as_secs_f64();
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
        println!("h={h} K={k} lr={lr:.0e} T={epochs}: heldout {mse:.2e}, trace end {:.4} ({secs:.0}s)", trace.last().unwrap());
    }
}
