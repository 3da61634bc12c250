// quick throughput probe
use apdmmo::benchmark::{make_problem, ProblemId};
use apdmmo::glf::{build_dataset, train, TrainConfig};
use apdmmo::fpd::{multistart_descent, DescentConfig, DescentOptimizer};
use apdmmo::model::{init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn main() {
    let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
    let ds = build_dataset(&ev, 3.0/8.0, 10, 1).unwrap();
    println!("dataset {} points", ds.len());

    for (h, k) in [(32usize, 1usize), (48, 1), (64, 1), (48, 2)] {
        let mc = ModelConfig::new(1, h, k, BlockKind::Nla);
        let mut p = init_model(mc, 1);
        let cfg = TrainConfig { epochs: 2, batch_size: 400, seed: 1, ..Default::default() };
        let t = Instant::now();
        train(&mut p, &ds, &cfg).unwrap();
        let per_epoch = t.elapsed().as_secs_f64() / 2.0;
        let t2 = Instant::now();
        let dcfg = DescentConfig { n_starts: 4000, steps: 50, step_size: 0.02, optimizer: DescentOptimizer::AdamW, chunk_size: 2048 };
        multistart_descent(&p, &dcfg, 1).unwrap();
        let per_pointstep = t2.elapsed().as_secs_f64() / (4000.0 * 50.0);
        println!("h={h} K={k}: train epoch {:.2}s ({} batches) | descent {:.2}us/point-step | 1e5x120 descent would take {:.0}s",
            per_epoch, ds.len().div_ceil(400), per_pointstep * 1e6, per_pointstep * 1e5 * 120.0);
    }
}
