use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::fpd::{
    build_archive, cluster_points, multistart_descent, to_unit_cube, ClusterConfig,
    DescentConfig, DescentOptimizer,
};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::model::{init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let h: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let t: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
    let lr: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(2e-3);
    let g: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(50);
    let eta: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.04);
    let n_fpd: usize = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(30_000);
    let pid: u8 = args.get(8).and_then(|s| s.parse().ok()).unwrap_or(4);

    let (prob, ev) = make_problem(ProblemId(pid), 0).unwrap();
    let t0 = Instant::now();
    let ds = build_dataset(&ev, 3.0 / 8.0, 10, 1).unwrap();
    let spec = prob.spec().clone();
    let mc = ModelConfig::new(spec.dim, h, k, BlockKind::Nla);
    let mut p = init_model(mc, 1);
    let trace = train(
        &mut p,
        &ds,
        &TrainConfig { epochs: t, learning_rate: lr, seed: 1, ..Default::default() },
    )
    .unwrap();
    let t_train = t0.elapsed().as_secs_f64();

    // surrogate quality on a grid (2D only)
    let mut gridmse = f64::NAN;
    if spec.dim == 2 {
        let n = 101;
        let mut err = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = spec.lower[0]
                    + (spec.upper[0] - spec.lower[0]) * i as f64 / (n - 1) as f64;
                let y = spec.lower[1]
                    + (spec.upper[1] - spec.lower[1]) * j as f64 / (n - 1) as f64;
                let xn = p.norm.normalize_point(&[x, y]);
                let pred = apdmmo::model::forward(
                    &p,
                    &apdmmo::linalg::Mat::from_vec(1, 2, xn),
                    apdmmo::model::activation::Mode::Eval,
                )
                .unwrap()[0];
                let truth = p.norm.standardize_y(-prob.value(&[x, y]));
                err += (pred - truth) * (pred - truth);
            }
        }
        gridmse = err / (n * n) as f64;
    }
    let t1 = Instant::now();
    let dcfg = DescentConfig {
        n_starts: n_fpd,
        steps: g,
        step_size: eta,
        optimizer: DescentOptimizer::AdamW,
        chunk_size: 2048,
    };
    let pts = multistart_descent(&p, &dcfg, 1).unwrap();
    let unit = to_unit_cube(&pts);
    let labels = cluster_points(&unit, &ClusterConfig::new(0.1, 2));
    let t_fpd = t1.elapsed().as_secs_f64();
    let archive = build_archive(&pts, &labels, &p).unwrap();
    let n_noise = labels.iter().filter(|&&l| l < 0).count();
    println!(
        "F{pid} h={h} K={k} T={t} lr={lr} G={g} eta={eta} N={n_fpd}: grid MSE {gridmse:.2e}, trace end {:.4}, archive {}, noise {}, train {t_train:.0}s fpd {t_fpd:.0}s",
        trace.last().unwrap(),
        archive.len(),
        n_noise
    );
    for c in archive.centers.iter().take(10) {
        let nearest = prob
            .known_optima()
            .iter()
            .map(|o| {
                o.iter()
                    .zip(&c.point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        println!(
            "  center {:?} pred {:+.3} nearest-opt {:.3}",
            c.point.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            c.predicted,
            nearest
        );
    }
    let covered = prob
        .known_optima()
        .iter()
        .filter(|o| {
            archive.centers.iter().any(|c| {
                o.iter()
                    .zip(&c.point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    < 1.0
            })
        })
        .count();
    println!("  optima covered within 1.0 raw: {covered}/{}", spec.nkp);
}
