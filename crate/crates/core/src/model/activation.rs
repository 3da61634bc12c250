//! The 22 activation units and their pointwise derivatives.
//!
//! Constants follow the usual conventions: ELU/CELU alpha = 1, LeakyReLU
//! slope = 0.01, Hardshrink/Softshrink lambda = 0.5, SELU's fixed
//! (lambda, alpha) pair, RReLU slope interval [1/8, 1/3] (midpoint in eval
//! mode), PReLU slope learnable with one slope per block.
//!
//! Derivative conventions at kinks: ReLU, ReLU6, Hardtanh, Hardshrink and
//! Softshrink take the closed-side value 0 exactly at their thresholds;
//! Hardsigmoid and Hardswish take the outside-branch value at +-3; the
//! leaky family (LeakyReLU, PReLU, RReLU) and SELU take the negative-side
//! slope at 0.

use rand::Rng;

pub const ELU_ALPHA: f64 = 1.0;
pub const CELU_ALPHA: f64 = 1.0;
pub const LEAKY_SLOPE: f64 = 0.01;
pub const HARDSHRINK_LAMBDA: f64 = 0.5;
pub const SOFTSHRINK_LAMBDA: f64 = 0.5;
pub const SELU_LAMBDA: f64 = 1.0507009873554805;
pub const SELU_ALPHA: f64 = 1.6732632423543772;
pub const RRELU_LO: f64 = 0.125;
pub const RRELU_HI: f64 = 1.0 / 3.0;
pub const PRELU_INIT: f64 = 0.25;

const SQRT_2PI: f64 = 2.5066282746310002;

/// The 22 units in their canonical order. `SEQ_NLA` composes them in exactly
/// this order; the multi-head block concatenates their outputs in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    Elu,
    Hardshrink,
    Hardsigmoid,
    Hardtanh,
    Hardswish,
    LeakyRelu,
    LogSigmoid,
    PRelu,
    Relu,
    Relu6,
    RRelu,
    Selu,
    Celu,
    Gelu,
    Sigmoid,
    Silu,
    Mish,
    Softplus,
    Softshrink,
    Softsign,
    Tanh,
    Tanhshrink,
}

pub const ALL_KINDS: [ActivationKind; 22] = [
    ActivationKind::Elu,
    ActivationKind::Hardshrink,
    ActivationKind::Hardsigmoid,
    ActivationKind::Hardtanh,
    ActivationKind::Hardswish,
    ActivationKind::LeakyRelu,
    ActivationKind::LogSigmoid,
    ActivationKind::PRelu,
    ActivationKind::Relu,
    ActivationKind::Relu6,
    ActivationKind::RRelu,
    ActivationKind::Selu,
    ActivationKind::Celu,
    ActivationKind::Gelu,
    ActivationKind::Sigmoid,
    ActivationKind::Silu,
    ActivationKind::Mish,
    ActivationKind::Softplus,
    ActivationKind::Softshrink,
    ActivationKind::Softsign,
    ActivationKind::Tanh,
    ActivationKind::Tanhshrink,
];

pub const NUM_KINDS: usize = 22;

/// Forward/eval mode switch. Train mode draws RReLU slopes from the given
/// stream; eval mode is deterministic.
pub enum Mode<'r> {
    Eval,
    Train(&'r mut dyn rand::RngCore),
}

impl Mode<'_> {
    pub fn is_train(&self) -> bool {
        matches!(self, Mode::Train(_))
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    // log(1 + e^x) without overflow on either side
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl ActivationKind {
    /// Value and derivative of the unit at `x`.
    ///
    /// `prelu_slope` is the block's learnable slope (ignored by other kinds);
    /// `rrelu_slope` is the negative-side slope the caller decided for this
    /// element (sampled in train mode, interval midpoint in eval mode).
    #[inline]
    pub fn apply(self, x: f64, prelu_slope: f64, rrelu_slope: f64) -> (f64, f64) {
        match self {
            ActivationKind::Elu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    let e = ELU_ALPHA * x.exp();
                    (e - ELU_ALPHA, e)
                }
            }
            ActivationKind::Hardshrink => {
                if x > HARDSHRINK_LAMBDA || x < -HARDSHRINK_LAMBDA {
                    (x, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            ActivationKind::Hardsigmoid => {
                if x <= -3.0 {
                    (0.0, 0.0)
                } else if x >= 3.0 {
                    (1.0, 0.0)
                } else {
                    (x / 6.0 + 0.5, 1.0 / 6.0)
                }
            }
            ActivationKind::Hardtanh => {
                if x <= -1.0 {
                    (-1.0, 0.0)
                } else if x >= 1.0 {
                    (1.0, 0.0)
                } else {
                    (x, 1.0)
                }
            }
            ActivationKind::Hardswish => {
                if x <= -3.0 {
                    (0.0, 0.0)
                } else if x >= 3.0 {
                    (x, 1.0)
                } else {
                    (x * (x + 3.0) / 6.0, (2.0 * x + 3.0) / 6.0)
                }
            }
            ActivationKind::LeakyRelu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    (LEAKY_SLOPE * x, LEAKY_SLOPE)
                }
            }
            ActivationKind::LogSigmoid => (-softplus(-x), sigmoid(-x)),
            ActivationKind::PRelu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    (prelu_slope * x, prelu_slope)
                }
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            ActivationKind::Relu6 => {
                if x <= 0.0 {
                    (0.0, 0.0)
                } else if x >= 6.0 {
                    (6.0, 0.0)
                } else {
                    (x, 1.0)
                }
            }
            ActivationKind::RRelu => {
                if x > 0.0 {
                    (x, 1.0)
                } else {
                    (rrelu_slope * x, rrelu_slope)
                }
            }
            ActivationKind::Selu => {
                if x > 0.0 {
                    (SELU_LAMBDA * x, SELU_LAMBDA)
                } else {
                    let e = SELU_ALPHA * x.exp();
                    (SELU_LAMBDA * (e - SELU_ALPHA), SELU_LAMBDA * e)
                }
            }
            ActivationKind::Celu => {
                if x >= 0.0 {
                    (x, 1.0)
                } else {
                    let e = (x / CELU_ALPHA).exp();
                    (CELU_ALPHA * (e - 1.0), e)
                }
            }
            ActivationKind::Gelu => {
                let phi = 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
                let pdf = (-0.5 * x * x).exp() / SQRT_2PI;
                (x * phi, phi + x * pdf)
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                (s, s * (1.0 - s))
            }
            ActivationKind::Silu => {
                let s = sigmoid(x);
                (x * s, s * (1.0 + x * (1.0 - s)))
            }
            ActivationKind::Mish => {
                let sp = softplus(x);
                let t = sp.tanh();
                (x * t, t + x * (1.0 - t * t) * sigmoid(x))
            }
            ActivationKind::Softplus => (softplus(x), sigmoid(x)),
            ActivationKind::Softshrink => {
                if x > SOFTSHRINK_LAMBDA {
                    (x - SOFTSHRINK_LAMBDA, 1.0)
                } else if x < -SOFTSHRINK_LAMBDA {
                    (x + SOFTSHRINK_LAMBDA, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            ActivationKind::Softsign => {
                let d = 1.0 + x.abs();
                (x / d, 1.0 / (d * d))
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                (t, 1.0 - t * t)
            }
            ActivationKind::Tanhshrink => {
                let t = x.tanh();
                (x - t, t * t)
            }
        }
    }

    /// Spec-level entry point: decides the RReLU slope from the mode.
    pub fn apply_mode(self, x: f64, prelu_slope: f64, mode: &mut Mode) -> (f64, f64) {
        let rrelu = match mode {
            Mode::Eval => 0.5 * (RRELU_LO + RRELU_HI),
            Mode::Train(rng) => rng.gen_range(RRELU_LO..RRELU_HI),
        };
        self.apply(x, prelu_slope, rrelu)
    }

    /// Distance from `x` to the nearest derivative discontinuity of this
    /// unit, or infinity for units whose implemented derivative is smooth
    /// enough for central differences. Used by gradient checks to certify a
    /// sample point as smooth.
    pub fn kink_distance(self, x: f64) -> f64 {
        match self {
            ActivationKind::Elu
            | ActivationKind::Celu
            | ActivationKind::LeakyRelu
            | ActivationKind::PRelu
            | ActivationKind::Relu
            | ActivationKind::RRelu
            | ActivationKind::Selu
            | ActivationKind::Softsign => x.abs(),
            ActivationKind::Hardshrink | ActivationKind::Softshrink => {
                (x.abs() - HARDSHRINK_LAMBDA).abs()
            }
            ActivationKind::Hardsigmoid | ActivationKind::Hardswish => (x.abs() - 3.0).abs(),
            ActivationKind::Hardtanh => (x.abs() - 1.0).abs(),
            ActivationKind::Relu6 => x.abs().min((x - 6.0).abs()),
            _ => f64::INFINITY,
        }
    }
}

/// Apply all 22 units to one feature vector at once, writing values and
/// derivatives into 22 consecutive h-wide slices laid out in [`ALL_KINDS`]
/// order. Shares the transcendental subexpressions (`exp(-|x|)`, `tanh`,
/// `erf`) across units; every formula matches [`ActivationKind::apply`]
/// bit for bit, which `fused_matches_per_kind_apply` pins down.
pub fn apply_all(
    input: &[f64],
    prelu_slope: f64,
    rrelu_slopes: Option<&[f64]>,
    values: &mut [f64],
    derivs: &mut [f64],
) {
    let h = input.len();
    debug_assert_eq!(values.len(), NUM_KINDS * h);
    debug_assert_eq!(derivs.len(), NUM_KINDS * h);
    for (j, &x) in input.iter().enumerate() {
        // shared subexpressions
        let e_negabs = (-x.abs()).exp();
        let softplus_x = x.max(0.0) + e_negabs.ln_1p();
        let sigmoid_x = if x >= 0.0 {
            1.0 / (1.0 + e_negabs)
        } else {
            e_negabs / (1.0 + e_negabs)
        };
        let sigmoid_negx = if x >= 0.0 {
            e_negabs / (1.0 + e_negabs)
        } else {
            1.0 / (1.0 + e_negabs)
        };
        let tanh_x = x.tanh();
        // for x < 0 this equals exp(x), which the ELU family needs
        let exp_x_neg = e_negabs;

        let mut put = |k: usize, v: f64, d: f64| {
            values[k * h + j] = v;
            derivs[k * h + j] = d;
        };

        // 0: ELU (alpha = 1)
        if x > 0.0 {
            put(0, x, 1.0);
        } else {
            put(0, exp_x_neg - ELU_ALPHA, exp_x_neg);
        }
        // 1: Hardshrink
        if x > HARDSHRINK_LAMBDA || x < -HARDSHRINK_LAMBDA {
            put(1, x, 1.0);
        } else {
            put(1, 0.0, 0.0);
        }
        // 2: Hardsigmoid
        if x <= -3.0 {
            put(2, 0.0, 0.0);
        } else if x >= 3.0 {
            put(2, 1.0, 0.0);
        } else {
            put(2, x / 6.0 + 0.5, 1.0 / 6.0);
        }
        // 3: Hardtanh
        if x <= -1.0 {
            put(3, -1.0, 0.0);
        } else if x >= 1.0 {
            put(3, 1.0, 0.0);
        } else {
            put(3, x, 1.0);
        }
        // 4: Hardswish
        if x <= -3.0 {
            put(4, 0.0, 0.0);
        } else if x >= 3.0 {
            put(4, x, 1.0);
        } else {
            put(4, x * (x + 3.0) / 6.0, (2.0 * x + 3.0) / 6.0);
        }
        // 5: LeakyReLU
        if x > 0.0 {
            put(5, x, 1.0);
        } else {
            put(5, LEAKY_SLOPE * x, LEAKY_SLOPE);
        }
        // 6: LogSigmoid
        put(6, -((-x).max(0.0) + e_negabs.ln_1p()), sigmoid_negx);
        // 7: PReLU
        if x > 0.0 {
            put(7, x, 1.0);
        } else {
            put(7, prelu_slope * x, prelu_slope);
        }
        // 8: ReLU
        if x > 0.0 {
            put(8, x, 1.0);
        } else {
            put(8, 0.0, 0.0);
        }
        // 9: ReLU6
        if x <= 0.0 {
            put(9, 0.0, 0.0);
        } else if x >= 6.0 {
            put(9, 6.0, 0.0);
        } else {
            put(9, x, 1.0);
        }
        // 10: RReLU
        let r_slope = rrelu_slopes.map_or(RRELU_EVAL_SLOPE, |s| s[j]);
        if x > 0.0 {
            put(10, x, 1.0);
        } else {
            put(10, r_slope * x, r_slope);
        }
        // 11: SELU
        if x > 0.0 {
            put(11, SELU_LAMBDA * x, SELU_LAMBDA);
        } else {
            let e = SELU_ALPHA * exp_x_neg;
            put(11, SELU_LAMBDA * (e - SELU_ALPHA), SELU_LAMBDA * e);
        }
        // 12: CELU (alpha = 1)
        if x >= 0.0 {
            put(12, x, 1.0);
        } else {
            put(12, CELU_ALPHA * (exp_x_neg - 1.0), exp_x_neg);
        }
        // 13: GELU
        {
            let phi = 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
            let pdf = (-0.5 * x * x).exp() / SQRT_2PI;
            put(13, x * phi, phi + x * pdf);
        }
        // 14: Sigmoid
        put(14, sigmoid_x, sigmoid_x * (1.0 - sigmoid_x));
        // 15: SiLU
        put(15, x * sigmoid_x, sigmoid_x * (1.0 + x * (1.0 - sigmoid_x)));
        // 16: Mish
        {
            let t = softplus_x.tanh();
            put(16, x * t, t + x * (1.0 - t * t) * sigmoid_x);
        }
        // 17: Softplus
        put(17, softplus_x, sigmoid_x);
        // 18: Softshrink
        if x > SOFTSHRINK_LAMBDA {
            put(18, x - SOFTSHRINK_LAMBDA, 1.0);
        } else if x < -SOFTSHRINK_LAMBDA {
            put(18, x + SOFTSHRINK_LAMBDA, 1.0);
        } else {
            put(18, 0.0, 0.0);
        }
        // 19: Softsign
        {
            let d = 1.0 + x.abs();
            put(19, x / d, 1.0 / (d * d));
        }
        // 20: Tanh
        put(20, tanh_x, 1.0 - tanh_x * tanh_x);
        // 21: Tanhshrink
        put(21, x - tanh_x, tanh_x * tanh_x);
    }
}

/// Draw a train-mode RReLU slope.
#[inline]
pub fn sample_rrelu_slope<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(RRELU_LO..RRELU_HI)
}

/// Eval-mode RReLU slope (interval midpoint).
pub const RRELU_EVAL_SLOPE: f64 = 0.5 * (RRELU_LO + RRELU_HI);
