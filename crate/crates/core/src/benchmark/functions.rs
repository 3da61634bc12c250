//! Analytic test functions F1-F10 and dispatch into the composition
//! functions for F11-F20. All values use the maximization convention.

use super::composition::{Composition, CompositionKind};
use super::ProblemSpec;
use std::f64::consts::PI;

/// Shubert 1D factor: positions where `g` attains its global minimum.
/// `g(x) = sum_{j=1..5} j cos((j+1)x + j)` on [-10, 10].
pub(crate) const SHUBERT_ARGMIN: [f64; 3] =
    [-7.7083137354993472, -1.4251284283197609, 4.8580568788598253];
/// Positions where `g` attains its global maximum.
pub(crate) const SHUBERT_ARGMAX: [f64; 3] =
    [-7.0835064076515595, -0.80032110047197313, 5.482864206707613];

/// Single global optimum of the uneven decreasing maxima function.
const F3_ARGMAX: f64 = 0.07969977961179582;

const HIMMELBLAU_OPTIMA: [[f64; 2]; 4] = [
    [3.0, 2.0],
    [-2.8051180869527448, 3.131312518250573],
    [-3.779310253377747, -3.2831859912861696],
    [3.5844283403304917, -1.8481265269644036],
];

const SIX_HUMP_OPTIMA: [[f64; 2]; 2] = [
    [0.08984201310031806, -0.7126564030207396],
    [-0.08984201310031806, 0.7126564030207396],
];

#[derive(Debug)]
pub(crate) enum Objective {
    FiveUnevenPeakTrap,
    EqualMaxima,
    UnevenDecreasingMaxima,
    Himmelblau,
    SixHumpCamel,
    Shubert,
    Vincent,
    ModifiedRastrigin,
    Composition(Composition),
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Objective::FiveUnevenPeakTrap => five_uneven_peak_trap(x[0]),
            Objective::EqualMaxima => equal_maxima(x[0]),
            Objective::UnevenDecreasingMaxima => uneven_decreasing_maxima(x[0]),
            Objective::Himmelblau => himmelblau(x[0], x[1]),
            Objective::SixHumpCamel => six_hump_camel(x[0], x[1]),
            Objective::Shubert => shubert(x),
            Objective::Vincent => vincent(x),
            Objective::ModifiedRastrigin => modified_rastrigin(x),
            Objective::Composition(c) => c.value(x),
        }
    }
}

fn five_uneven_peak_trap(x: f64) -> f64 {
    if x < 2.5 {
        80.0 * (2.5 - x)
    } else if x < 5.0 {
        64.0 * (x - 2.5)
    } else if x < 7.5 {
        64.0 * (7.5 - x)
    } else if x < 12.5 {
        28.0 * (x - 7.5)
    } else if x < 17.5 {
        28.0 * (17.5 - x)
    } else if x < 22.5 {
        32.0 * (x - 17.5)
    } else if x < 27.5 {
        32.0 * (27.5 - x)
    } else {
        80.0 * (x - 27.5)
    }
}

fn equal_maxima(x: f64) -> f64 {
    (5.0 * PI * x).sin().powi(6)
}

fn uneven_decreasing_maxima(x: f64) -> f64 {
    let envelope = (-2.0 * 2f64.ln() * ((x - 0.08) / 0.854).powi(2)).exp();
    let ripple = (5.0 * PI * (x.powf(0.75) - 0.05)).sin().powi(6);
    envelope * ripple
}

fn himmelblau(x: f64, y: f64) -> f64 {
    200.0 - (x * x + y - 11.0).powi(2) - (x + y * y - 7.0).powi(2)
}

fn six_hump_camel(x: f64, y: f64) -> f64 {
    let t = (4.0 - 2.1 * x * x + x.powi(4) / 3.0) * x * x + x * y + (-4.0 + 4.0 * y * y) * y * y;
    -t
}

fn shubert_factor(x: f64) -> f64 {
    let mut s = 0.0;
    for j in 1..=5 {
        let jf = j as f64;
        s += jf * ((jf + 1.0) * x + jf).cos();
    }
    s
}

fn shubert(x: &[f64]) -> f64 {
    -x.iter().map(|&xi| shubert_factor(xi)).product::<f64>()
}

fn vincent(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (10.0 * xi.ln()).sin()).sum::<f64>() / x.len() as f64
}

/// Modified Rastrigin (all-global-optima variant), k = (3, 4) in 2D.
fn modified_rastrigin(x: &[f64]) -> f64 {
    const K: [f64; 2] = [3.0, 4.0];
    -x.iter()
        .zip(K.iter())
        .map(|(&xi, &k)| 10.0 + 9.0 * (2.0 * PI * k * xi).cos())
        .sum::<f64>()
}

/// Build the objective and the catalogue of global optima for a spec.
pub(crate) fn build(spec: &ProblemSpec, seed: u64) -> (Objective, Vec<Vec<f64>>) {
    match spec.id.0 {
        1 => (Objective::FiveUnevenPeakTrap, vec![vec![0.0], vec![30.0]]),
        2 => (
            Objective::EqualMaxima,
            (0..5).map(|i| vec![0.1 + 0.2 * i as f64]).collect(),
        ),
        3 => (Objective::UnevenDecreasingMaxima, vec![vec![F3_ARGMAX]]),
        4 => (
            Objective::Himmelblau,
            HIMMELBLAU_OPTIMA.iter().map(|o| o.to_vec()).collect(),
        ),
        5 => (
            Objective::SixHumpCamel,
            SIX_HUMP_OPTIMA.iter().map(|o| o.to_vec()).collect(),
        ),
        6 => {
            // 18 optima: one coordinate at a factor argmin, the other at an
            // argmax, both orders.
            let mut opt = Vec::new();
            for &a in &SHUBERT_ARGMIN {
                for &b in &SHUBERT_ARGMAX {
                    opt.push(vec![a, b]);
                    opt.push(vec![b, a]);
                }
            }
            (Objective::Shubert, opt)
        }
        7 => (Objective::Vincent, vincent_optima(2)),
        8 => {
            // 81 optima: exactly one coordinate at an argmin, the others at
            // argmaxes (the product of one negative and two positive extremes).
            let mut opt = Vec::new();
            for slot in 0..3 {
                for &a in &SHUBERT_ARGMIN {
                    for &b1 in &SHUBERT_ARGMAX {
                        for &b2 in &SHUBERT_ARGMAX {
                            let mut p = vec![b1, b2];
                            p.insert(slot, a);
                            opt.push(p);
                        }
                    }
                }
            }
            (Objective::Shubert, opt)
        }
        9 => (Objective::Vincent, vincent_optima(3)),
        10 => {
            let mut opt = Vec::new();
            for i in 0..3 {
                for j in 0..4 {
                    opt.push(vec![
                        (2.0 * i as f64 + 1.0) / 6.0,
                        (2.0 * j as f64 + 1.0) / 8.0,
                    ]);
                }
            }
            (Objective::ModifiedRastrigin, opt)
        }
        11..=20 => {
            let kind = match spec.id.0 {
                11 => CompositionKind::Cf1,
                12 => CompositionKind::Cf2,
                13 | 14 | 16 | 18 => CompositionKind::Cf3,
                _ => CompositionKind::Cf4,
            };
            let comp = Composition::generate(kind, spec, seed);
            let optima = comp.shift_points().to_vec();
            (Objective::Composition(comp), optima)
        }
        _ => unreachable!("ids are validated at parse time"),
    }
}

/// Vincent optima per dimension: sin(10 ln x) = 1 at x = exp(pi/20 + k pi/5),
/// six roots inside [0.25, 10].
fn vincent_optima(dim: usize) -> Vec<Vec<f64>> {
    let roots: Vec<f64> = (-2..=3)
        .map(|k| ((PI / 2.0 + 2.0 * PI * k as f64) / 10.0).exp())
        .collect();
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * roots.len());
        for prefix in &out {
            for &r in &roots {
                let mut p = prefix.clone();
                p.push(r);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trap_has_five_local_peaks() {
        for (x, v) in [(0.0, 200.0), (5.0, 160.0), (12.5, 140.0), (22.5, 160.0), (30.0, 200.0)] {
            assert!((five_uneven_peak_trap(x) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn himmelblau_peak_at_3_2() {
        assert_eq!(himmelblau(3.0, 2.0), 200.0);
    }

    #[test]
    fn shubert_2d_peak_value() {
        let v = shubert(&[SHUBERT_ARGMIN[0], SHUBERT_ARGMAX[0]]);
        assert!((v - 186.73090883102384).abs() < 1e-9);
    }

    #[test]
    fn vincent_root_count() {
        assert_eq!(vincent_optima(2).len(), 36);
        assert_eq!(vincent_optima(3).len(), 216);
        for p in vincent_optima(2) {
            assert!((vincent(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn modified_rastrigin_peak() {
        assert!((modified_rastrigin(&[1.0 / 6.0, 1.0 / 8.0]) + 2.0).abs() < 1e-12);
    }
}
