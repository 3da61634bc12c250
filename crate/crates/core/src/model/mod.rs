//! The landscape surrogate: a small dense network whose blocks fan one
//! feature vector through 22 activation units in parallel, fuse them back
//! with a linear map, add a skip connection and layer-normalize.
//!
//! Everything is 64-bit and hand-differentiated: training needs exact
//! parameter gradients, peak detection needs exact input gradients. All
//! parameters live in one flat vector so the optimizer and the checkpoint
//! format stay trivial.

pub mod activation;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, matmul_nn, matmul_nt, matmul_tn_acc, Mat};
use crate::rng::{stage_rng, Stage};
use activation::{ActivationKind, Mode, ALL_KINDS, NUM_KINDS, PRELU_INIT, RRELU_EVAL_SLOPE};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

const LN_EPS: f64 = 1e-12;
/// Index of PReLU in the canonical activation order.
const PRELU_IDX: usize = 7;

/// Which internals a block uses. All three expose the same h -> h interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// 22 activations in parallel, fused 22h -> h, skip connection, layer norm.
    Nla,
    /// Two h -> h linear layers, each followed by ReLU.
    Mlp,
    /// The 22 activations composed sequentially, then fusion, skip, layer norm.
    SeqNla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub depth: usize,
    pub block_kind: BlockKind,
}

impl ModelConfig {
    pub fn new(input_dim: usize, hidden_dim: usize, depth: usize, block_kind: BlockKind) -> Self {
        assert!(input_dim >= 1 && hidden_dim >= 1 && depth >= 1);
        ModelConfig {
            input_dim,
            hidden_dim,
            depth,
            block_kind,
        }
    }
}

/// Affine input map (bounds -> [-1, 1] per dimension) plus target
/// standardization. Stored with the parameters so a checkpoint is
/// self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: Vec<f64>,
    pub half_range: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
}

impl Normalization {
    pub fn identity(dim: usize) -> Self {
        Normalization {
            center: vec![0.0; dim],
            half_range: vec![1.0; dim],
            y_mean: 0.0,
            y_std: 1.0,
        }
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Self {
        let center = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
        let half_range = lower.iter().zip(upper).map(|(l, u)| 0.5 * (u - l)).collect();
        Normalization {
            center,
            half_range,
            y_mean: 0.0,
            y_std: 1.0,
        }
    }

    #[inline]
    pub fn normalize_into(&self, raw: &[f64], out: &mut [f64]) {
        for ((o, &r), (&c, &h)) in out
            .iter_mut()
            .zip(raw)
            .zip(self.center.iter().zip(&self.half_range))
        {
            *o = (r - c) / h;
        }
    }

    #[inline]
    pub fn denormalize_into(&self, norm: &[f64], out: &mut [f64]) {
        for ((o, &v), (&c, &h)) in out
            .iter_mut()
            .zip(norm)
            .zip(self.center.iter().zip(&self.half_range))
        {
            *o = v * h + c;
        }
    }

    pub fn normalize_point(&self, raw: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; raw.len()];
        self.normalize_into(raw, &mut out);
        out
    }

    pub fn denormalize_point(&self, norm: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; norm.len()];
        self.denormalize_into(norm, &mut out);
        out
    }

    #[inline]
    pub fn standardize_y(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }

    #[inline]
    pub fn destandardize_y(&self, y: f64) -> f64 {
        y * self.y_std + self.y_mean
    }
}

#[derive(Debug, Clone)]
enum BlockLayout {
    Fused {
        fusion_w: Range<usize>,
        fusion_b: Range<usize>,
        ln_gain: Range<usize>,
        ln_bias: Range<usize>,
        prelu: usize,
        /// Fusion input width: 22h for the parallel block, h for sequential.
        fan_in: usize,
    },
    Mlp {
        w1: Range<usize>,
        b1: Range<usize>,
        w2: Range<usize>,
        b2: Range<usize>,
    },
}

#[derive(Debug, Clone)]
struct Layout {
    embed_w: Range<usize>,
    embed_b: Range<usize>,
    blocks: Vec<BlockLayout>,
    head_w: Range<usize>,
    head_b: usize,
    total: usize,
}

impl Layout {
    fn new(config: &ModelConfig) -> Self {
        let d = config.input_dim;
        let h = config.hidden_dim;
        let mut off = 0usize;
        let mut take = |len: usize| {
            let r = off..off + len;
            off += len;
            r
        };
        let embed_w = take(h * d);
        let embed_b = take(h);
        let mut blocks = Vec::with_capacity(config.depth);
        for _ in 0..config.depth {
            blocks.push(match config.block_kind {
                BlockKind::Nla | BlockKind::SeqNla => {
                    let fan_in = if config.block_kind == BlockKind::Nla {
                        NUM_KINDS * h
                    } else {
                        h
                    };
                    BlockLayout::Fused {
                        fusion_w: take(h * fan_in),
                        fusion_b: take(h),
                        ln_gain: take(h),
                        ln_bias: take(h),
                        prelu: take(1).start,
                        fan_in,
                    }
                }
                BlockKind::Mlp => BlockLayout::Mlp {
                    w1: take(h * h),
                    b1: take(h),
                    w2: take(h * h),
                    b2: take(h),
                },
            });
        }
        let head_w = take(h);
        let head_b = take(1).start;
        Layout {
            embed_w,
            embed_b,
            blocks,
            head_w,
            head_b,
            total: off,
        }
    }
}

/// Model parameters: architecture, flat parameter vector, normalization
/// metadata. Immutable during inference; training mutates `flat` in place.
#[derive(Debug, Clone)]
pub struct ModelParams {
    config: ModelConfig,
    layout: Layout,
    flat: Vec<f64>,
    pub norm: Normalization,
}

impl ModelParams {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn num_params(&self) -> usize {
        self.flat.len()
    }

    /// Parameter count of one block's fusion weight matrix (shape check aid).
    pub fn fusion_weight_count(&self) -> usize {
        match &self.layout.blocks[0] {
            BlockLayout::Fused { fusion_w, .. } => fusion_w.len(),
            BlockLayout::Mlp { w1, .. } => w1.len(),
        }
    }
}

/// Deterministic initialization: fan-in-scaled uniform weights, zero biases,
/// PReLU slopes at 0.25, layer-norm gain 1 / bias 0.
pub fn init_model(config: ModelConfig, seed: u64) -> ModelParams {
    let layout = Layout::new(&config);
    let mut flat = vec![0.0; layout.total];
    let mut rng = stage_rng(seed, Stage::ModelInit);
    let mut fill_uniform = |range: Range<usize>, fan_in: usize, flat: &mut [f64]| {
        let b = 1.0 / (fan_in as f64).sqrt();
        for v in &mut flat[range] {
            *v = rng.gen_range(-b..b);
        }
    };
    fill_uniform(layout.embed_w.clone(), config.input_dim, &mut flat);
    for bl in &layout.blocks {
        match bl {
            BlockLayout::Fused {
                fusion_w,
                ln_gain,
                prelu,
                fan_in,
                ..
            } => {
                fill_uniform(fusion_w.clone(), *fan_in, &mut flat);
                flat[ln_gain.clone()].fill(1.0);
                flat[*prelu] = PRELU_INIT;
            }
            BlockLayout::Mlp { w1, w2, .. } => {
                fill_uniform(w1.clone(), config.hidden_dim, &mut flat);
                fill_uniform(w2.clone(), config.hidden_dim, &mut flat);
            }
        }
    }
    fill_uniform(layout.head_w.clone(), config.hidden_dim, &mut flat);
    ModelParams {
        config,
        layout,
        flat,
        norm: Normalization::identity(config.input_dim),
    }
}

struct LnCache {
    xhat: Mat,
    inv_std: Vec<f64>,
}

enum BlockCache {
    Fused {
        s_in: Mat,
        /// Post-activation features: n x 22h for the parallel block,
        /// the final stage output n x h for the sequential block.
        acts: Mat,
        /// Matching derivative storage; stage-wise for the sequential block.
        derivs: Vec<Mat>,
        /// Input of the PReLU stage (sequential block only).
        prelu_in: Option<Mat>,
        ln: LnCache,
    },
    Mlp {
        s_in: Mat,
        d1: Mat,
        a1: Mat,
        d2: Mat,
    },
}

struct ForwardCache {
    blocks: Vec<BlockCache>,
    final_s: Mat,

}

fn add_bias_rows(m: &mut Mat, bias: &[f64]) {
    for i in 0..m.rows {
        for (v, b) in m.row_mut(i).iter_mut().zip(bias) {
            *v += b;
        }
    }
}

fn layer_norm_forward(z: &Mat, gain: &[f64], bias: &[f64], out: &mut Mat) -> LnCache {
    let h = z.cols;
    let mut xhat = Mat::zeros(z.rows, h);
    let mut inv_std = vec![0.0; z.rows];
    for i in 0..z.rows {
        let row = z.row(i);
        let mean = row.iter().sum::<f64>() / h as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / h as f64;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        inv_std[i] = inv;
        let xr = xhat.row_mut(i);
        let or = out.row_mut(i);
        for j in 0..h {
            let xh = (row[j] - mean) * inv;
            xr[j] = xh;
            or[j] = gain[j] * xh + bias[j];
        }
    }
    LnCache { xhat, inv_std }
}

/// dOut -> dZ; optionally accumulates gain/bias gradients.
fn layer_norm_backward(
    d_out: &Mat,
    ln: &LnCache,
    gain: &[f64],
    mut grads: Option<(&mut [f64], &mut [f64])>,
    d_z: &mut Mat,
) {
    let h = d_out.cols;
    for i in 0..d_out.rows {
        let dr = d_out.row(i);
        let xh = ln.xhat.row(i);
        let inv = ln.inv_std[i];
        let mut mg = 0.0;
        let mut mgx = 0.0;
        for j in 0..h {
            let g = dr[j] * gain[j];
            mg += g;
            mgx += g * xh[j];
        }
        mg /= h as f64;
        mgx /= h as f64;
        let dz = d_z.row_mut(i);
        for j in 0..h {
            let g = dr[j] * gain[j];
            dz[j] = inv * (g - mg - xh[j] * mgx);
        }
        if let Some((dgain, dbias)) = grads.as_mut() {
            for j in 0..h {
                dgain[j] += dr[j] * xh[j];
                dbias[j] += dr[j];
            }
        }
    }
}

/// Apply `kind` elementwise over a row slice, tracking the kink margin.
#[inline]
fn apply_kind_slice(
    kind: ActivationKind,
    input: &[f64],
    prelu_slope: f64,
    rrelu_slopes: Option<&[f64]>,
    values: &mut [f64],
    derivs: &mut [f64],
) {
    match rrelu_slopes {
        Some(slopes) if kind == ActivationKind::RRelu => {
            for j in 0..input.len() {
                let (v, d) = kind.apply(input[j], prelu_slope, slopes[j]);
                values[j] = v;
                derivs[j] = d;
            }
        }
        _ => {
            for j in 0..input.len() {
                let (v, d) = kind.apply(input[j], prelu_slope, RRELU_EVAL_SLOPE);
                values[j] = v;
                derivs[j] = d;
            }
        }
    }
}

fn update_margin(margin: &mut f64, kind: ActivationKind, input: &[f64]) {
    for &v in input {
        let d = kind.kink_distance(v);
        if d < *margin {
            *margin = d;
        }
    }
}

fn forward_batch(
    params: &ModelParams,
    x: &Mat,
    mode: &mut Mode,
    want_cache: bool,
    mut margin: Option<&mut f64>,
) -> Result<(Vec<f64>, Option<ForwardCache>)> {
    let cfg = &params.config;
    let h = cfg.hidden_dim;
    let n = x.rows;
    if x.cols != cfg.input_dim {
        return Err(Error::DimMismatch {
            expected: cfg.input_dim,
            got: x.cols,
        });
    }
    let flat = &params.flat;
    let lay = &params.layout;

    // Embedding
    let mut s = Mat::zeros(n, h);
    matmul_nt(&x.data, &flat[lay.embed_w.clone()], &mut s.data, n, cfg.input_dim, h);
    add_bias_rows(&mut s, &flat[lay.embed_b.clone()]);

    let mut caches = Vec::new();
    for bl in &lay.blocks {
        match (bl, cfg.block_kind) {
            (
                BlockLayout::Fused {
                    fusion_w,
                    fusion_b,
                    ln_gain,
                    ln_bias,
                    prelu,
                    fan_in,
                },
                BlockKind::Nla,
            ) => {
                let prelu_slope = flat[*prelu];
                // Train mode draws RReLU slopes sequentially so parallel row
                // processing stays deterministic.
                let rrelu_slopes: Option<Vec<f64>> = match mode {
                    Mode::Train(rng) => Some(
                        (0..n * h)
                            .map(|_| activation::sample_rrelu_slope(rng))
                            .collect(),
                    ),
                    Mode::Eval => None,
                };
                let mut acts = Mat::zeros(n, NUM_KINDS * h);
                let mut derivs = Mat::zeros(n, NUM_KINDS * h);
                if let Some(m) = margin.as_deref_mut() {
                    for kind in ALL_KINDS {
                        update_margin(m, kind, &s.data);
                    }
                }
                let run = |(i, (arow, drow)): (usize, (&mut [f64], &mut [f64]))| {
                    let srow = &s.data[i * h..(i + 1) * h];
                    let slopes = rrelu_slopes.as_ref().map(|v| &v[i * h..(i + 1) * h]);
                    activation::apply_all(srow, prelu_slope, slopes, arow, drow);
                };
                if n >= 512 && rayon::current_num_threads() > 1 {
                    acts.data
                        .par_chunks_mut(NUM_KINDS * h)
                        .zip(derivs.data.par_chunks_mut(NUM_KINDS * h))
                        .enumerate()
                        .for_each(run);
                } else {
                    acts.data
                        .chunks_mut(NUM_KINDS * h)
                        .zip(derivs.data.chunks_mut(NUM_KINDS * h))
                        .enumerate()
                        .for_each(run);
                }
                let mut z = Mat::zeros(n, h);
                matmul_nt(&acts.data, &flat[fusion_w.clone()], &mut z.data, n, *fan_in, h);
                add_bias_rows(&mut z, &flat[fusion_b.clone()]);
                // skip connection feeds the layer norm
                for (zv, sv) in z.data.iter_mut().zip(&s.data) {
                    *zv += sv;
                }
                let mut out = Mat::zeros(n, h);
                let ln = layer_norm_forward(&z, &flat[ln_gain.clone()], &flat[ln_bias.clone()], &mut out);
                let s_in = std::mem::replace(&mut s, out);
                if want_cache {
                    caches.push(BlockCache::Fused {
                        s_in,
                        acts,
                        derivs: vec![derivs],
                        prelu_in: None,
                        ln,
                    });
                }
            }
            (
                BlockLayout::Fused {
                    fusion_w,
                    fusion_b,
                    ln_gain,
                    ln_bias,
                    prelu,
                    fan_in,
                },
                BlockKind::SeqNla,
            ) => {
                let prelu_slope = flat[*prelu];
                let mut cur = s.clone();
                let mut derivs: Vec<Mat> = Vec::with_capacity(NUM_KINDS);
                let mut prelu_in = None;
                for (k, kind) in ALL_KINDS.iter().enumerate() {
                    let rrelu_slopes: Option<Vec<f64>> = match mode {
                        Mode::Train(rng) if *kind == ActivationKind::RRelu => Some(
                            (0..n * h)
                                .map(|_| activation::sample_rrelu_slope(rng))
                                .collect(),
                        ),
                        _ => None,
                    };
                    if let Some(m) = margin.as_deref_mut() {
                        update_margin(m, *kind, &cur.data);
                    }
                    if k == PRELU_IDX {
                        prelu_in = Some(cur.clone());
                    }
                    let mut next = Mat::zeros(n, h);
                    let mut dmat = Mat::zeros(n, h);
                    for i in 0..n {
                        apply_kind_slice(
                            *kind,
                            cur.row(i),
                            prelu_slope,
                            rrelu_slopes.as_ref().map(|v| &v[i * h..(i + 1) * h]),
                            next.row_mut(i),
                            dmat.row_mut(i),
                        );
                    }
                    derivs.push(dmat);
                    cur = next;
                }
                let mut z = Mat::zeros(n, h);
                matmul_nt(&cur.data, &flat[fusion_w.clone()], &mut z.data, n, *fan_in, h);
                add_bias_rows(&mut z, &flat[fusion_b.clone()]);
                for (zv, sv) in z.data.iter_mut().zip(&s.data) {
                    *zv += sv;
                }
                let mut out = Mat::zeros(n, h);
                let ln = layer_norm_forward(&z, &flat[ln_gain.clone()], &flat[ln_bias.clone()], &mut out);
                let s_in = std::mem::replace(&mut s, out);
                if want_cache {
                    caches.push(BlockCache::Fused {
                        s_in,
                        acts: cur,
                        derivs,
                        prelu_in,
                        ln,
                    });
                }
            }
            (BlockLayout::Mlp { w1, b1, w2, b2 }, _) => {
                let mut z1 = Mat::zeros(n, h);
                matmul_nt(&s.data, &flat[w1.clone()], &mut z1.data, n, h, h);
                add_bias_rows(&mut z1, &flat[b1.clone()]);
                if let Some(m) = margin.as_deref_mut() {
                    update_margin(m, ActivationKind::Relu, &z1.data);
                }
                let mut d1 = Mat::zeros(n, h);
                let mut a1 = Mat::zeros(n, h);
                for ((a, d), &z) in a1.data.iter_mut().zip(&mut d1.data).zip(&z1.data) {
                    if z > 0.0 {
                        *a = z;
                        *d = 1.0;
                    }
                }
                let mut z2 = Mat::zeros(n, h);
                matmul_nt(&a1.data, &flat[w2.clone()], &mut z2.data, n, h, h);
                add_bias_rows(&mut z2, &flat[b2.clone()]);
                if let Some(m) = margin.as_deref_mut() {
                    update_margin(m, ActivationKind::Relu, &z2.data);
                }
                let mut d2 = Mat::zeros(n, h);
                let mut out = Mat::zeros(n, h);
                for ((o, d), &z) in out.data.iter_mut().zip(&mut d2.data).zip(&z2.data) {
                    if z > 0.0 {
                        *o = z;
                        *d = 1.0;
                    }
                }
                let s_in = std::mem::replace(&mut s, out);
                if want_cache {
                    caches.push(BlockCache::Mlp { s_in, d1, a1, d2 });
                }
            }
            _ => unreachable!("layout always matches block kind"),
        }
    }

    let head_w = &flat[lay.head_w.clone()];
    let head_b = flat[lay.head_b];
    let preds: Vec<f64> = (0..n).map(|i| dot(s.row(i), head_w) + head_b).collect();
    for &p in &preds {
        if !p.is_finite() {
            return Err(Error::NonFinite {
                context: "model forward pass",
            });
        }
    }
    let cache = want_cache.then(|| ForwardCache {
        blocks: caches,
        final_s: s,
    });
    Ok((preds, cache))
}

/// Shared backward pass. `d_preds` is dLoss/dPrediction per sample. When
/// `grads` is provided, parameter gradients accumulate into it (and `x` must
/// be the forward input); when `want_dx`, returns dLoss/dInput.
fn backward(
    params: &ModelParams,
    cache: &ForwardCache,
    x: Option<&Mat>,
    d_preds: &[f64],
    mut grads: Option<&mut [f64]>,
    want_dx: bool,
) -> Option<Mat> {
    let cfg = &params.config;
    let h = cfg.hidden_dim;
    let n = d_preds.len();
    let flat = &params.flat;
    let lay = &params.layout;

    // Head backward
    let head_w = &flat[lay.head_w.clone()];
    let mut d_s = Mat::zeros(n, h);
    for i in 0..n {
        let dp = d_preds[i];
        let dr = d_s.row_mut(i);
        for j in 0..h {
            dr[j] = dp * head_w[j];
        }
    }
    if let Some(g) = grads.as_mut() {
        let (gw, gb) = {
            let r = lay.head_w.clone();
            (r, lay.head_b)
        };
        for i in 0..n {
            axpy(d_preds[i], cache.final_s.row(i), &mut g[gw.clone()]);
            g[gb] += d_preds[i];
        }
    }

    for (bl, bc) in lay.blocks.iter().zip(cache.blocks.iter()).rev() {
        match (bl, bc) {
            (
                BlockLayout::Fused {
                    fusion_w,
                    fusion_b,
                    ln_gain,
                    ln_bias,
                    prelu,
                    fan_in,
                },
                BlockCache::Fused {
                    s_in,
                    acts,
                    derivs,
                    prelu_in,
                    ln,
                },
            ) => {
                let mut d_z = Mat::zeros(n, h);
                {
                    // ln_gain and ln_bias are adjacent ranges in the flat vector
                    let ln_grads = grads.as_mut().map(|g| {
                        debug_assert_eq!(ln_gain.end, ln_bias.start);
                        let (left, right) = g.split_at_mut(ln_bias.start);
                        (&mut left[ln_gain.clone()], &mut right[..ln_bias.len()])
                    });
                    layer_norm_backward(&d_s, ln, &flat[ln_gain.clone()], ln_grads, &mut d_z);
                }
                if let Some(g) = grads.as_mut() {
                    matmul_tn_acc(
                        &d_z.data,
                        &acts.data,
                        &mut g[fusion_w.clone()],
                        n,
                        h,
                        *fan_in,
                    );
                    let db = &mut g[fusion_b.clone()];
                    for i in 0..n {
                        for (b, &dz) in db.iter_mut().zip(d_z.row(i)) {
                            *b += dz;
                        }
                    }
                }
                let mut d_acts = Mat::zeros(n, *fan_in);
                matmul_nn(&d_z.data, &flat[fusion_w.clone()], &mut d_acts.data, n, h, *fan_in);

                let mut d_in = d_z; // skip connection passes dZ through
                if cfg.block_kind == BlockKind::Nla {
                    let dmat = &derivs[0];
                    for i in 0..n {
                        let da = d_acts.row(i);
                        let dd = dmat.row(i);
                        let di = d_in.row_mut(i);
                        for k in 0..NUM_KINDS {
                            let off = k * h;
                            for j in 0..h {
                                di[j] = f64::mul_add(da[off + j], dd[off + j], di[j]);
                            }
                        }
                    }
                    if let Some(g) = grads.as_mut() {
                        let mut dslope = 0.0;
                        let off = PRELU_IDX * h;
                        for i in 0..n {
                            let da = d_acts.row(i);
                            let sr = s_in.row(i);
                            for j in 0..h {
                                dslope += da[off + j] * sr[j].min(0.0);
                            }
                        }
                        g[*prelu] += dslope;
                    }
                } else {
                    // sequential: chain back through the 22 stages
                    let mut d_cur = d_acts;
                    for k in (0..NUM_KINDS).rev() {
                        if k == PRELU_IDX {
                            if let (Some(g), Some(pin)) = (grads.as_mut(), prelu_in.as_ref()) {
                                let mut dslope = 0.0;
                                for (dc, pi) in d_cur.data.iter().zip(&pin.data) {
                                    dslope += dc * pi.min(0.0);
                                }
                                g[*prelu] += dslope;
                            }
                        }
                        for (dc, dd) in d_cur.data.iter_mut().zip(&derivs[k].data) {
                            *dc *= dd;
                        }
                    }
                    for (di, dc) in d_in.data.iter_mut().zip(&d_cur.data) {
                        *di += dc;
                    }
                }
                d_s = d_in;
            }
            (
                BlockLayout::Mlp { w1, b1, w2, b2 },
                BlockCache::Mlp { s_in, d1, a1, d2 },
            ) => {
                // out = relu(z2), z2 = a1 W2^T + b2, a1 = relu(z1), z1 = s_in W1^T + b1
                let mut d_z2 = d_s;
                for (dz, dd) in d_z2.data.iter_mut().zip(&d2.data) {
                    *dz *= dd;
                }
                if let Some(g) = grads.as_mut() {
                    matmul_tn_acc(&d_z2.data, &a1.data, &mut g[w2.clone()], n, h, h);
                    let db = &mut g[b2.clone()];
                    for i in 0..n {
                        for (b, &dz) in db.iter_mut().zip(d_z2.row(i)) {
                            *b += dz;
                        }
                    }
                }
                let mut d_a1 = Mat::zeros(n, h);
                matmul_nn(&d_z2.data, &flat[w2.clone()], &mut d_a1.data, n, h, h);
                let mut d_z1 = d_a1;
                for (dz, dd) in d_z1.data.iter_mut().zip(&d1.data) {
                    *dz *= dd;
                }
                if let Some(g) = grads.as_mut() {
                    matmul_tn_acc(&d_z1.data, &s_in.data, &mut g[w1.clone()], n, h, h);
                    let db = &mut g[b1.clone()];
                    for i in 0..n {
                        for (b, &dz) in db.iter_mut().zip(d_z1.row(i)) {
                            *b += dz;
                        }
                    }
                }
                let mut d_in = Mat::zeros(n, h);
                matmul_nn(&d_z1.data, &flat[w1.clone()], &mut d_in.data, n, h, h);
                d_s = d_in;
            }
            _ => unreachable!(),
        }
    }

    // Embedding backward
    if let Some(g) = grads.as_mut() {
        let xm = x.expect("parameter gradients need the forward input");
        matmul_tn_acc(&d_s.data, &xm.data, &mut g[lay.embed_w.clone()], n, h, cfg.input_dim);
        let db = &mut g[lay.embed_b.clone()];
        for i in 0..n {
            for (b, &dz) in db.iter_mut().zip(d_s.row(i)) {
                *b += dz;
            }
        }
    }
    if want_dx {
        let mut d_x = Mat::zeros(n, cfg.input_dim);
        matmul_nn(&d_s.data, &flat[lay.embed_w.clone()], &mut d_x.data, n, h, cfg.input_dim);
        Some(d_x)
    } else {
        None
    }
}

/// Batch forward pass. `x` must already be in normalized input coordinates;
/// predictions are in standardized target units.
pub fn forward(params: &ModelParams, x: &Mat, mut mode: Mode) -> Result<Vec<f64>> {
    forward_batch(params, x, &mut mode, false, None).map(|(p, _)| p)
}

/// Mean-squared-error loss and exact gradients for every parameter.
pub fn loss_and_param_grads(
    params: &ModelParams,
    x: &Mat,
    y: &[f64],
    mut mode: Mode,
) -> Result<(f64, Vec<f64>)> {
    assert!(!y.is_empty(), "batch must be nonempty");
    assert_eq!(x.rows, y.len());
    let (preds, cache) = forward_batch(params, x, &mut mode, true, None)?;
    let cache = cache.unwrap();
    let n = y.len();
    let mut loss = 0.0;
    let mut d_preds = vec![0.0; n];
    for i in 0..n {
        let e = preds[i] - y[i];
        loss += e * e;
        d_preds[i] = 2.0 * e / n as f64;
    }
    loss /= n as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            context: "training loss",
        });
    }
    let mut grads = vec![0.0; params.flat.len()];
    backward(params, &cache, Some(x), &d_preds, Some(&mut grads), false);
    Ok((loss, grads))
}

/// Exact input gradients (eval mode), same shape as `x`.
pub fn grad_input(params: &ModelParams, x: &Mat) -> Result<Mat> {
    let mut mode = Mode::Eval;
    let (_, cache) = forward_batch(params, x, &mut mode, true, None)?;
    let cache = cache.unwrap();
    let d_preds = vec![1.0; x.rows];
    let dx = backward(params, &cache, None, &d_preds, None, true).unwrap();
    for &g in &dx.data {
        if !g.is_finite() {
            return Err(Error::NonFinite {
                context: "input gradient",
            });
        }
    }
    Ok(dx)
}

/// Smallest distance of any activation input to a derivative kink over an
/// eval-mode forward pass. Gradient checks use this to certify sample points
/// as smooth before comparing against finite differences.
pub fn kink_margin(params: &ModelParams, x: &Mat) -> Result<f64> {
    let mut margin = f64::INFINITY;
    let mut mode = Mode::Eval;
    forward_batch(params, x, &mut mode, false, Some(&mut margin))?;
    Ok(margin)
}

// ---------------------------------------------------------------------------
// Checkpoint format: versioned binary dump, bit-exact round trip.
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 4] = b"LLCK";
const CHECKPOINT_VERSION: u32 = 1;

impl ModelParams {
    pub fn save<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        let kind: u8 = match self.config.block_kind {
            BlockKind::Nla => 0,
            BlockKind::Mlp => 1,
            BlockKind::SeqNla => 2,
        };
        w.write_all(&[kind])?;
        for v in [
            self.config.input_dim as u64,
            self.config.hidden_dim as u64,
            self.config.depth as u64,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let write_f64s = |w: &mut W, data: &[f64]| -> Result<()> {
            w.write_all(&(data.len() as u64).to_le_bytes())?;
            for &v in data {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        };
        write_f64s(w, &self.norm.center)?;
        write_f64s(w, &self.norm.half_range)?;
        w.write_all(&self.norm.y_mean.to_le_bytes())?;
        w.write_all(&self.norm.y_std.to_le_bytes())?;
        write_f64s(w, &self.flat)?;
        Ok(())
    }

    pub fn save_to_path(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut f)
    }

    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic bytes".into()));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let version = u32::from_le_bytes(buf4);
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {version}"
            )));
        }
        let mut kind_b = [0u8; 1];
        r.read_exact(&mut kind_b)?;
        let block_kind = match kind_b[0] {
            0 => BlockKind::Nla,
            1 => BlockKind::Mlp,
            2 => BlockKind::SeqNla,
            k => return Err(Error::Checkpoint(format!("unknown block kind {k}"))),
        };
        let read_u64 = |r: &mut R| -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        let input_dim = read_u64(r)? as usize;
        let hidden_dim = read_u64(r)? as usize;
        let depth = read_u64(r)? as usize;
        let read_f64s = |r: &mut R| -> Result<Vec<f64>> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            let len = u64::from_le_bytes(b) as usize;
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        };
        let center = read_f64s(r)?;
        let half_range = read_f64s(r)?;
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let y_mean = f64::from_le_bytes(b);
        r.read_exact(&mut b)?;
        let y_std = f64::from_le_bytes(b);
        let flat = read_f64s(r)?;
        let config = ModelConfig::new(input_dim, hidden_dim, depth, block_kind);
        let layout = Layout::new(&config);
        if layout.total != flat.len() {
            return Err(Error::Checkpoint(format!(
                "parameter count {} does not match config (expected {})",
                flat.len(),
                layout.total
            )));
        }
        Ok(ModelParams {
            config,
            layout,
            flat,
            norm: Normalization {
                center,
                half_range,
                y_mean,
                y_std,
            },
        })
    }

    pub fn load_from_path(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::load(&mut f)
    }
}
