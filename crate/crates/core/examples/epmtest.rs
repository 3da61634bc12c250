use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, init_model, BlockKind, ModelConfig};

fn main() {
    let (prob, _) = make_problem(ProblemId(2), 0).unwrap();
    let spec = prob.spec().clone();
    for (kind, h, k, lr, t, levels, label) in [
        (BlockKind::Mlp, 32, 2, 2e-3, 300, 10, "MLP h32K2 EPM10"),
        (BlockKind::Mlp, 32, 2, 2e-3, 300, 1, "MLP h32K2 uniform"),
        (BlockKind::Nla, 48, 1, 2e-3, 400, 10, "NLA h48K1 EPM10 T400"),
        (BlockKind::Nla, 48, 1, 2e-3, 400, 1, "NLA h48K1 uniform T400"),
    ] {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ds = build_dataset(&ev, 0.1, levels, 1).unwrap();
        let mc = ModelConfig::new(1, h, k, kind);
        let mut p = init_model(mc, 1);
        let cfg = TrainConfig { epochs: t, learning_rate: lr, levels, seed: 1, ..Default::default() };
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
        println!("{label}: heldout {mse:.2e}, trace end {:.4}", trace.last().unwrap());
    }
}
