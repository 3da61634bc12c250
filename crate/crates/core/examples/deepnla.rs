use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn main() {
    let (prob, _) = make_problem(ProblemId(2), 0).unwrap();
    let spec = prob.spec().clone();
    let args: Vec<String> = std::env::args().collect();
    let h: usize = args[1].parse().unwrap();
    let k: usize = args[2].parse().unwrap();
    let lr: f64 = args[3].parse().unwrap();
    let t: usize = args[4].parse().unwrap();
    let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
    let ds = build_dataset(&ev, 0.1, 10, 1).unwrap();
    let mc = ModelConfig::new(1, h, k, BlockKind::Nla);
    let mut p = init_model(mc, 1);
    let t0 = Instant::now();
    let cfg = TrainConfig { epochs: t, learning_rate: lr, seed: 1, ..Default::default() };
    let trace = train(&mut p, &ds, &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
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
    // quarter-trace milestones to see convergence speed
    let q = t / 4;
    println!("NLA h={h} K={k} lr={lr} T={t}: heldout {mse:.2e} | trace@[{q},{},{},{}] = {:.4} {:.4} {:.4} {:.4} | {secs:.0}s",
        2*q, 3*q, t, trace[q-1], trace[2*q-1], trace[3*q-1], trace[t-1]);
}
