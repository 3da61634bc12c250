use apdmmo::linalg::Mat;
use apdmmo::model::{activation::Mode, forward, grad_input, init_model, BlockKind, ModelConfig};
use std::time::Instant;

fn main() {
    let h = 32;
    let mc = ModelConfig::new(1, h, 1, BlockKind::Nla);
    let p = init_model(mc, 1);
    let n = 2048;
    let x = Mat::from_vec(n, 1, (0..n).map(|i| (i as f64 / n as f64) * 2.0 - 1.0).collect());
    let reps = 50;

    let t = Instant::now();
    for _ in 0..reps {
        forward(&p, std::hint::black_box(&x), Mode::Eval).unwrap();
    }
    println!("forward (no cache): {:.1} us/point", t.elapsed().as_micros() as f64 / (reps * n) as f64);

    let t = Instant::now();
    for _ in 0..reps {
        grad_input(&p, std::hint::black_box(&x)).unwrap();
    }
    println!("grad_input:         {:.1} us/point", t.elapsed().as_micros() as f64 / (reps * n) as f64);
}
