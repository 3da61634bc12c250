use apdmmo::linalg::{dot, matmul_nt};
use std::time::Instant;

fn main() {
    let k = 704usize;
    let a: Vec<f64> = (0..k).map(|i| (i as f64).sin()).collect();
    let b: Vec<f64> = (0..k).map(|i| (i as f64).cos()).collect();
    let t = Instant::now();
    let mut acc = 0.0;
    let reps = 2_000_000;
    for _ in 0..reps {
        acc += dot(std::hint::black_box(&a), std::hint::black_box(&b));
    }
    let el = t.elapsed().as_secs_f64();
    println!("dot k=704: {:.2} GFLOP/s (acc {acc:.3})", (2.0 * k as f64 * reps as f64) / el / 1e9);

    // matmul: 2048x704 * (32x704)^T
    let n = 2048; let m = 32;
    let a: Vec<f64> = (0..n*k).map(|i| (i as f64 * 0.001).sin()).collect();
    let bm: Vec<f64> = (0..m*k).map(|i| (i as f64 * 0.002).cos()).collect();
    let mut c = vec![0.0; n*m];
    let t = Instant::now();
    let reps = 20;
    for _ in 0..reps {
        matmul_nt(std::hint::black_box(&a), std::hint::black_box(&bm), &mut c, n, k, m);
    }
    let el = t.elapsed().as_secs_f64();
    println!("matmul_nt 2048x704x32: {:.2} GFLOP/s", (2.0 * (n*k*m) as f64 * reps as f64) / el / 1e9);

    // transcendental probe
    let t = Instant::now();
    let mut s = 0.0f64;
    for i in 0..10_000_000 {
        s += std::hint::black_box(i as f64 * 1e-6).exp();
    }
    println!("exp: {:.1} ns/call (s={s:.1})", t.elapsed().as_nanos() as f64 / 1e7);
    let t = Instant::now();
    let mut s2 = 0.0f64;
    for i in 0..10_000_000 {
        s2 += libm::erf(std::hint::black_box(i as f64 * 1e-6));
    }
    println!("erf: {:.1} ns/call (s={s2:.1})", t.elapsed().as_nanos() as f64 / 1e7);
    let t = Instant::now();
    let mut s3 = 0.0f64;
    for i in 0..10_000_000 {
        s3 += std::hint::black_box(i as f64 * 1e-6).tanh();
    }
    println!("tanh: {:.1} ns/call (s={s3:.1})", t.elapsed().as_nanos() as f64 / 1e7);
}
