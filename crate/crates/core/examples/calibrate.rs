// Desk-profile calibration: quality vs cost for candidate settings.
use apdmmo::benchmark::{count_found_optima, make_problem, ProblemId};
use apdmmo::fpd::{build_archive, cluster_points, multistart_descent, to_unit_cube, DescentConfig, DescentOptimizer};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::harness::{run_apdmmo, RunConfig, Overrides, Variant};
use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn mse_oracle(problem_id: u8, h: usize, k: usize, epochs: usize, m_ratio: f64, seed: u64) -> (f64, f64) {
    let (prob, ev) = make_problem(ProblemId(problem_id), 0).unwrap();
    let ds = build_dataset(&ev, m_ratio, 10, seed).unwrap();
    let mc = ModelConfig::new(prob.spec().dim, h, k, BlockKind::Nla);
    let mut p = init_model(mc, seed);
    let t = Instant::now();
    train(&mut p, &ds, &TrainConfig { epochs, seed, ..Default::default() }).unwrap();
    let train_s = t.elapsed().as_secs_f64();
    // held-out uniform grid, standardized MSE
    let spec = prob.spec();
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
    (mse, train_s)
}

fn e2e(problem_id: u8, h: usize, epochs: usize, g: usize, eta: f64, n_starts: usize, seed: u64) -> (usize, usize, f64) {
    let mut cfg = RunConfig::new(ProblemId(problem_id), seed);
    cfg.overrides = Overrides {
        hidden_dim: Some(h),
        depth: Some(1),
        epochs: Some(epochs),
        n_starts: Some(n_starts),
        descent_steps: Some(g),
        step_size: Some(eta),
        ..Default::default()
    };
    cfg.variant = Variant::Full;
    let t = Instant::now();
    let r = run_apdmmo(&cfg).unwrap();
    (r.npf_at(1e-4).unwrap(), r.archive_size, t.elapsed().as_secs_f64())
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("mse");
    match mode {
        "mse" => {
            // spec oracle: F2, M=5000 (r=0.1), threshold 5e-3
            for (h, t) in [(24, 60), (32, 60), (32, 100), (32, 140), (48, 60)] {
                let (mse, secs) = mse_oracle(2, h, 1, t, 0.1, 1);
                println!("F2 M=5000 h={h} K=1 T={t}: held-out MSE {mse:.2e} ({secs:.0}s)");
            }
        }
        "e2e1d" => {
            for pid in [1u8, 2, 3] {
                for seed in [1u64, 2] {
                    let (npf, arch, secs) = e2e(pid, 32, 60, 25, 0.045, 100_000, seed);
                    println!("F{pid} seed {seed}: NPF@1e-4 = {npf}, archive {arch}, {secs:.0}s");
                }
            }
        }
        "e2e2d" => {
            for pid in [4u8, 5] {
                for seed in [1u64, 2] {
                    let (npf, arch, secs) = e2e(pid, 32, 100, 35, 0.05, 100_000, seed);
                    println!("F{pid} seed {seed}: NPF@1e-4 = {npf}, archive {arch}, {secs:.0}s");
                }
            }
        }
        "f6" => {
            let h: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(32);
            let t: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(60);
            let (npf, arch, secs) = e2e(6, h, t, 40, 0.05, 100_000, 1);
            println!("F6 h={h} T={t}: NPF@1e-4 = {npf}/18, archive {arch}, {secs:.0}s");
        }
        "fpdtest" => {
            // archive quality on F2: centers within 0.05 normalized of optima
            let (prob, ev) = make_problem(ProblemId(2), 0).unwrap();
            let ds = build_dataset(&ev, 0.1, 10, 1).unwrap();
            let mc = ModelConfig::new(1, 32, 1, BlockKind::Nla);
            let mut p = init_model(mc, 1);
            train(&mut p, &ds, &TrainConfig { epochs: 60, seed: 1, ..Default::default() }).unwrap();
            let dcfg = DescentConfig { n_starts: 20_000, steps: 25, step_size: 0.045, optimizer: DescentOptimizer::AdamW, chunk_size: 2048 };
            let pts = multistart_descent(&p, &dcfg, 1).unwrap();
            let unit = to_unit_cube(&pts);
            let labels = cluster_points(&unit, &apdmmo::fpd::ClusterConfig::new(0.1, 2));
            let archive = build_archive(&pts, &labels, &p).unwrap();
            println!("F2 archive size {}", archive.len());
            for c in &archive.centers {
                let nearest = prob.known_optima().iter()
                    .map(|o| (o[0] - c.point[0]).abs())
                    .fold(f64::INFINITY, f64::min);
                println!("  center {:.4} pred {:.3} nearest optimum {:.4} away (raw)", c.point[0], c.predicted, nearest);
            }
        }
        _ => eprintln!("unknown mode"),
    }
}
