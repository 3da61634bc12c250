//! Weighted composition functions (F11-F20).
//!
//! Standard construction: each component function is shifted to its own
//! optimum, stretched, optionally rotated, normalized to a common amplitude,
//! and blended with Gaussian distance weights. Every shift point is a global
//! optimum with value exactly 0 (maximization convention), because the
//! nearest component dominates with weight 1 there and every basic function
//! vanishes at its origin.
//!
//! Shift points and rotation matrices are drawn from a seeded stream, so the
//! landscapes are reproducible from `(kind, dim, seed)` but intentionally not
//! identical to any external benchmark data files.

use super::ProblemSpec;
use crate::rng::{stage_rng, Stage};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

const AMPLITUDE: f64 = 2000.0;
const WEIERSTRASS_A: f64 = 0.5;
const WEIERSTRASS_B: f64 = 3.0;
const WEIERSTRASS_KMAX: usize = 20;

#[derive(Debug, Clone, Copy)]
pub(crate) enum CompositionKind {
    Cf1,
    Cf2,
    Cf3,
    Cf4,
}

#[derive(Debug, Clone, Copy)]
enum BasicFn {
    Sphere,
    Rastrigin,
    Grienwank,
    Weierstrass,
    /// Expanded Griewank-of-Rosenbrock, shifted so its optimum sits at 0.
    Ef8F2,
}

impl BasicFn {
    fn value(self, z: &[f64]) -> f64 {
        match self {
            BasicFn::Sphere => z.iter().map(|v| v * v).sum(),
            BasicFn::Rastrigin => z
                .iter()
                .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BasicFn::Grienwank => griewank(z),
            BasicFn::Weierstrass => weierstrass(z),
            BasicFn::Ef8F2 => ef8f2(z),
        }
    }
}

fn griewank(z: &[f64]) -> f64 {
    let s: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let p: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    s - p + 1.0
}

fn weierstrass(z: &[f64]) -> f64 {
    let mut total = 0.0;
    for &v in z {
        for k in 0..=WEIERSTRASS_KMAX {
            let ak = WEIERSTRASS_A.powi(k as i32);
            let bk = WEIERSTRASS_B.powi(k as i32);
            total += ak * (2.0 * PI * bk * (v + 0.5)).cos();
        }
    }
    // Subtract the per-dimension value at 0 using the same expression so the
    // function is exactly 0 at the origin.
    let mut base = 0.0;
    for k in 0..=WEIERSTRASS_KMAX {
        let ak = WEIERSTRASS_A.powi(k as i32);
        let bk = WEIERSTRASS_B.powi(k as i32);
        base += ak * (2.0 * PI * bk * 0.5).cos();
    }
    total - z.len() as f64 * base
}

fn ef8f2(z: &[f64]) -> f64 {
    let d = z.len();
    let mut s = 0.0;
    for i in 0..d {
        let u = z[i] + 1.0;
        let v = z[(i + 1) % d] + 1.0;
        let f2 = 100.0 * (u * u - v).powi(2) + (1.0 - u).powi(2);
        s += f2 * f2 / 4000.0 - f2.cos() + 1.0;
    }
    s
}

#[derive(Debug)]
struct Part {
    func: BasicFn,
    sigma: f64,
    lambda: f64,
    shift: Vec<f64>,
    /// Row-major dim x dim orthogonal matrix; `None` means identity.
    rotation: Option<Vec<f64>>,
    fmax: f64,
}

#[derive(Debug)]
pub(crate) struct Composition {
    dim: usize,
    parts: Vec<Part>,
    shifts: Vec<Vec<f64>>,
}

impl CompositionKind {
    fn layout(self) -> (Vec<BasicFn>, Vec<f64>, Vec<f64>, bool) {
        use BasicFn::*;
        match self {
            CompositionKind::Cf1 => (
                vec![Grienwank, Grienwank, Weierstrass, Weierstrass, Sphere, Sphere],
                vec![1.0; 6],
                vec![1.0, 1.0, 8.0, 8.0, 0.2, 0.2],
                false,
            ),
            CompositionKind::Cf2 => (
                vec![
                    Rastrigin,
                    Rastrigin,
                    Weierstrass,
                    Weierstrass,
                    Grienwank,
                    Grienwank,
                    Sphere,
                    Sphere,
                ],
                vec![1.0; 8],
                vec![1.0, 1.0, 10.0, 10.0, 0.1, 0.1, 1.0 / 7.0, 1.0 / 7.0],
                false,
            ),
            CompositionKind::Cf3 => (
                vec![Ef8F2, Ef8F2, Weierstrass, Weierstrass, Grienwank, Grienwank],
                vec![1.0, 1.0, 2.0, 2.0, 2.0, 2.0],
                vec![0.25, 0.1, 2.0, 1.0, 2.0, 5.0],
                true,
            ),
            CompositionKind::Cf4 => (
                vec![
                    Rastrigin,
                    Rastrigin,
                    Ef8F2,
                    Ef8F2,
                    Weierstrass,
                    Weierstrass,
                    Grienwank,
                    Grienwank,
                ],
                vec![1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
                vec![4.0, 1.0, 4.0, 1.0, 0.1, 0.2, 0.1, 1.0 / 40.0],
                true,
            ),
        }
    }
}

impl Composition {
    pub fn generate(kind: CompositionKind, spec: &ProblemSpec, seed: u64) -> Self {
        let dim = spec.dim;
        let (funcs, sigmas, lambdas, rotated) = kind.layout();
        let n = funcs.len();
        assert_eq!(
            n, spec.nkp,
            "composition component count must equal the spec's optimum count"
        );
        let mut rng = stage_rng(seed, Stage::ProblemData);
        // keep stream layout stable across problems of the same seed
        let shifts = draw_shifts(&mut rng, spec, n);

        let mut parts = Vec::with_capacity(n);
        for i in 0..n {
            let rotation = if rotated {
                Some(random_orthogonal(&mut rng, dim))
            } else {
                None
            };
            let probe: Vec<f64> = vec![5.0 / lambdas[i]; dim];
            let probe_rot = apply_rotation(&probe, rotation.as_deref(), dim);
            let fmax = funcs[i].value(&probe_rot).abs().max(1e-12);
            parts.push(Part {
                func: funcs[i],
                sigma: sigmas[i],
                lambda: lambdas[i],
                shift: shifts[i].clone(),
                rotation,
                fmax,
            });
        }
        Composition { dim, parts, shifts }
    }

    pub fn shift_points(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    /// Maximization-convention value: 0 at every shift point, negative
    /// elsewhere.
    pub fn value(&self, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        let n = self.parts.len();
        let mut w = vec![0.0; n];
        for (i, p) in self.parts.iter().enumerate() {
            let dist2: f64 = x
                .iter()
                .zip(&p.shift)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            w[i] = (-dist2 / (2.0 * d * p.sigma * p.sigma)).exp();
        }
        let (im, &wm) = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let damp = 1.0 - wm.powi(10);
        for (i, wi) in w.iter_mut().enumerate() {
            if i != im {
                *wi *= damp;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum > 0.0 {
            for wi in w.iter_mut() {
                *wi /= sum;
            }
        } else {
            w.fill(1.0 / n as f64);
        }

        let mut acc = 0.0;
        let mut y = vec![0.0; self.dim];
        for (i, p) in self.parts.iter().enumerate() {
            if w[i] == 0.0 {
                continue;
            }
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = (x[j] - p.shift[j]) / p.lambda;
            }
            let z = apply_rotation(&y, p.rotation.as_deref(), self.dim);
            acc += w[i] * (AMPLITUDE * p.func.value(&z) / p.fmax);
        }
        -acc
    }
}

/// z = y * M, row vector times row-major matrix.
fn apply_rotation(y: &[f64], m: Option<&[f64]>, dim: usize) -> Vec<f64> {
    match m {
        None => y.to_vec(),
        Some(m) => {
            let mut z = vec![0.0; dim];
            for (l, &yl) in y.iter().enumerate() {
                if yl != 0.0 {
                    for (j, zj) in z.iter_mut().enumerate() {
                        *zj += yl * m[l * dim + j];
                    }
                }
            }
            z
        }
    }
}

/// Uniform shift points inside a 5%-margin box, pairwise separated by at
/// least one tenth of the smallest range (relaxed if rejection stalls).
fn draw_shifts<R: Rng>(rng: &mut R, spec: &ProblemSpec, n: usize) -> Vec<Vec<f64>> {
    let min_range = spec
        .lower
        .iter()
        .zip(&spec.upper)
        .map(|(l, u)| u - l)
        .fold(f64::INFINITY, f64::min);
    let mut min_sep = 0.1 * min_range;
    let mut shifts: Vec<Vec<f64>> = Vec::with_capacity(n);
    while shifts.len() < n {
        let mut attempts = 0;
        loop {
            let cand: Vec<f64> = (0..spec.dim)
                .map(|d| {
                    let margin = 0.05 * (spec.upper[d] - spec.lower[d]);
                    rng.gen_range(spec.lower[d] + margin..spec.upper[d] - margin)
                })
                .collect();
            let ok = shifts.iter().all(|s| {
                let d2: f64 = s
                    .iter()
                    .zip(&cand)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2.sqrt() >= min_sep
            });
            if ok {
                shifts.push(cand);
                break;
            }
            attempts += 1;
            if attempts > 10_000 {
                min_sep *= 0.5;
                attempts = 0;
            }
        }
    }
    shifts
}

/// Random orthogonal matrix: modified Gram-Schmidt over Gaussian columns.
fn random_orthogonal<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for j in 0..dim {
            for i in 0..j {
                let proj: f64 = cols[j].iter().zip(&cols[i]).map(|(a, b)| a * b).sum();
                for k in 0..dim {
                    cols[j][k] -= proj * cols[i][k];
                }
            }
            let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for v in cols[j].iter_mut() {
                *v /= norm;
            }
        }
        if ok {
            let mut m = vec![0.0; dim * dim];
            for (j, col) in cols.iter().enumerate() {
                for i in 0..dim {
                    m[i * dim + j] = col[i];
                }
            }
            return m;
        }
    }
}
