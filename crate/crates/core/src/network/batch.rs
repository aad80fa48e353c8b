//! Batch evaluation of the physics loss and its exact parameter gradient.
//!
//! The loss over a batch is `(1/N) * sum_i |w^2 m_i Phi + lap Phi + w^2 dm_i u0_i|^2`.
//! Gradients are computed by a reverse pass over the same 5-slot jet
//! propagation used by the forward evaluation, so they are exact.
//!
//! Evaluation fans out over fixed-size sample chunks; per-chunk partial sums
//! are reduced in chunk order, which makes results bit-reproducible
//! independent of the worker count.

use rayon::prelude::*;
use std::ops::Range;

use super::{DenseLayer, JetBuf, NetworkError, NetworkParams};
use crate::sampler::SampleBatch;

/// Borrowed view of one sample's five jet slots.
#[derive(Clone, Copy)]
pub(crate) struct JetSlices<'a> {
    pub v: &'a [f64],
    pub gx: &'a [f64],
    pub gz: &'a [f64],
    pub hxx: &'a [f64],
    pub hzz: &'a [f64],
}

impl JetBuf {
    pub(crate) fn as_slices(&self) -> JetSlices<'_> {
        JetSlices {
            v: &self.v,
            gx: &self.gx,
            gz: &self.gz,
            hxx: &self.hxx,
            hzz: &self.hzz,
        }
    }
}

/// Gradient of the loss with respect to every parameter, flattened in
/// canonical order (per layer: weights row-major, then biases).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    data: Vec<f64>,
}

impl ParamGradient {
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Directional derivative `grad . dir`.
    pub fn dot(&self, dir: &[f64]) -> f64 {
        self.data.iter().zip(dir).map(|(g, d)| g * d).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Collocation batch with precomputed encoding jets and medium terms,
/// ready for repeated loss evaluations at a fixed frequency.
pub struct EncodedBatch {
    n: usize,
    d: usize,
    v: Vec<f64>,
    gx: Vec<f64>,
    gz: Vec<f64>,
    hxx: Vec<f64>,
    hzz: Vec<f64>,
    /// `omega^2 * m_i`
    w2m: Vec<f64>,
    /// `omega^2 * dm_i * u0_i`
    rhs_re: Vec<f64>,
    rhs_im: Vec<f64>,
    omega: f64,
}

impl EncodedBatch {
    pub fn new(batch: &SampleBatch, pe: &super::PEConfig, omega: f64) -> Self {
        let n = batch.len();
        let d = pe.encoded_dim();
        let mut enc = Self {
            n,
            d,
            v: vec![0.0; n * d],
            gx: vec![0.0; n * d],
            gz: vec![0.0; n * d],
            hxx: vec![0.0; n * d],
            hzz: vec![0.0; n * d],
            w2m: Vec::with_capacity(n),
            rhs_re: Vec::with_capacity(n),
            rhs_im: Vec::with_capacity(n),
            omega,
        };
        let w2 = omega * omega;
        for i in 0..n {
            let base = i * d;
            pe.encode_jets(
                [batch.x[i], batch.z[i], batch.s_x[i]],
                &mut enc.v[base..base + d],
                &mut enc.gx[base..base + d],
                &mut enc.gz[base..base + d],
                &mut enc.hxx[base..base + d],
                &mut enc.hzz[base..base + d],
            );
            enc.w2m.push(w2 * batch.m[i]);
            let rhs = w2 * batch.dm[i] * batch.u0[i];
            enc.rhs_re.push(rhs.re);
            enc.rhs_im.push(rhs.im);
        }
        enc
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn sample(&self, i: usize) -> JetSlices<'_> {
        let base = i * self.d;
        JetSlices {
            v: &self.v[base..base + self.d],
            gx: &self.gx[base..base + self.d],
            gz: &self.gz[base..base + self.d],
            hxx: &self.hxx[base..base + self.d],
            hzz: &self.hzz[base..base + self.d],
        }
    }
}

/// Physics loss and exact gradient over a full batch.
pub fn loss_and_gradient(
    params: &NetworkParams,
    batch: &SampleBatch,
    omega: f64,
) -> Result<(f64, ParamGradient), NetworkError> {
    if batch.len() == 0 {
        return Err(NetworkError::EmptyBatch);
    }
    if !(omega > 0.0) {
        return Err(NetworkError::InvalidConfig("omega must be positive".into()));
    }
    let enc = EncodedBatch::new(batch, &params.pe, omega);
    loss_and_gradient_range(params, &enc, 0..batch.len())
}

/// Physics loss and gradient over a sub-range of a pre-encoded batch.
pub fn loss_and_gradient_range(
    params: &NetworkParams,
    enc: &EncodedBatch,
    range: Range<usize>,
) -> Result<(f64, ParamGradient), NetworkError> {
    if range.is_empty() {
        return Err(NetworkError::EmptyBatch);
    }
    if range.end > enc.n {
        return Err(NetworkError::ShapeMismatch(format!(
            "range end {} exceeds batch size {}",
            range.end, enc.n
        )));
    }
    if enc.d != params.pe.encoded_dim() {
        return Err(NetworkError::ShapeMismatch(format!(
            "batch encoded with dimension {}, network expects {}",
            enc.d,
            params.pe.encoded_dim()
        )));
    }

    let len = range.len();
    // Fixed chunk geometry keeps the reduction order deterministic; the lower
    // bound caps the number of in-flight gradient buffers for large networks.
    let chunk = 1024usize.max(len.div_ceil(256));
    let starts: Vec<usize> = (range.start..range.end).step_by(chunk).collect();

    let partials: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|&lo| {
            let hi = (lo + chunk).min(range.end);
            chunk_loss_grad(params, enc, lo, hi)
        })
        .collect();

    let mut grad = vec![0.0; params.param_count()];
    let mut loss = 0.0;
    for (l, g) in &partials {
        loss += l;
        for (acc, gi) in grad.iter_mut().zip(g) {
            *acc += gi;
        }
    }
    let inv = 1.0 / len as f64;
    loss *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    Ok((loss, ParamGradient { data: grad }))
}

/// Per-worker buffers: forward jets, cosine cache and adjoints per layer.
struct Scratch {
    /// Pre-activation jets per linear layer.
    t: Vec<JetBuf>,
    /// Post-activation jets per hidden layer.
    h: Vec<JetBuf>,
    /// `cos(w0 * t)` per hidden layer, reused by the reverse pass.
    cos: Vec<Vec<f64>>,
    /// Adjoints with respect to pre-activation jets.
    a_t: Vec<JetBuf>,
    /// Adjoints with respect to post-activation jets.
    a_h: Vec<JetBuf>,
}

impl Scratch {
    fn new(params: &NetworkParams) -> Self {
        let layers = params.layers();
        let nl = layers.len();
        let t: Vec<JetBuf> = layers.iter().map(|l| JetBuf::new(l.rows())).collect();
        let h: Vec<JetBuf> = layers[..nl - 1]
            .iter()
            .map(|l| JetBuf::new(l.rows()))
            .collect();
        let cos: Vec<Vec<f64>> = layers[..nl - 1]
            .iter()
            .map(|l| vec![0.0; l.rows()])
            .collect();
        let a_t = t.clone();
        let a_h = h.clone();
        Self { t, h, cos, a_t, a_h }
    }
}

/// Layer offsets into the flat gradient buffer.
fn layer_offsets(params: &NetworkParams) -> Vec<usize> {
    let mut offs = Vec::with_capacity(params.layers().len());
    let mut off = 0;
    for layer in params.layers() {
        offs.push(off);
        off += layer.rows() * (layer.cols() + 1);
    }
    offs
}

fn chunk_loss_grad(params: &NetworkParams, enc: &EncodedBatch, lo: usize, hi: usize) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.param_count()];
    let mut scratch = Scratch::new(params);
    let offs = layer_offsets(params);
    let mut loss = 0.0;
    for i in lo..hi {
        loss += accumulate_sample(params, &offs, enc, i, &mut scratch, &mut grad);
    }
    (loss, grad)
}

/// Forward + reverse pass for one sample; returns its squared residual.
fn accumulate_sample(
    params: &NetworkParams,
    offs: &[usize],
    enc: &EncodedBatch,
    i: usize,
    scratch: &mut Scratch,
    grad: &mut [f64],
) -> f64 {
    let layers = params.layers();
    let nl = layers.len();
    let w0 = params.w0;
    let input = enc.sample(i);

    // Forward pass, caching pre-activation jets and cosines.
    linear_forward(&layers[0], input, &mut scratch.t[0]);
    for li in 1..nl {
        {
            let (tprev, hprev, cprev) = (
                &scratch.t[li - 1],
                &mut scratch.h[li - 1],
                &mut scratch.cos[li - 1],
            );
            sine_forward(w0, tprev, hprev, cprev);
        }
        let h_ref = &scratch.h[li - 1];
        linear_forward(&layers[li], h_ref.as_slices(), &mut scratch.t[li]);
    }

    // Residual and adjoint seeds on the output jet. Only the value and the
    // two second-derivative slots enter the loss.
    let w2m = enc.w2m[i];
    let (rr, ri) = {
        let out = &scratch.t[nl - 1];
        (
            w2m * out.v[0] + out.hxx[0] + out.hzz[0] + enc.rhs_re[i],
            w2m * out.v[1] + out.hxx[1] + out.hzz[1] + enc.rhs_im[i],
        )
    };
    {
        let a = &mut scratch.a_t[nl - 1];
        a.v[0] = 2.0 * rr * w2m;
        a.v[1] = 2.0 * ri * w2m;
        a.gx[0] = 0.0;
        a.gx[1] = 0.0;
        a.gz[0] = 0.0;
        a.gz[1] = 0.0;
        a.hxx[0] = 2.0 * rr;
        a.hxx[1] = 2.0 * ri;
        a.hzz[0] = 2.0 * rr;
        a.hzz[1] = 2.0 * ri;
    }

    // Reverse pass.
    for li in (0..nl).rev() {
        let layer = &layers[li];
        let (wslice, bslice) = {
            let span = layer.rows() * (layer.cols() + 1);
            grad[offs[li]..offs[li] + span].split_at_mut(layer.rows() * layer.cols())
        };
        if li > 0 {
            {
                let a_h = &mut scratch.a_h[li - 1];
                for s in [&mut a_h.v, &mut a_h.gx, &mut a_h.gz, &mut a_h.hxx, &mut a_h.hzz] {
                    s.fill(0.0);
                }
            }
            {
                let input_prev = scratch.h[li - 1].as_slices();
                linear_backward(
                    layer,
                    input_prev,
                    &scratch.a_t[li],
                    wslice,
                    bslice,
                    Some(&mut scratch.a_h[li - 1]),
                );
            }
            sine_backward(
                w0,
                &scratch.t[li - 1],
                &scratch.h[li - 1],
                &scratch.cos[li - 1],
                &scratch.a_h[li - 1],
                &mut scratch.a_t[li - 1],
            );
        } else {
            linear_backward(layer, input, &scratch.a_t[0], wslice, bslice, None);
        }
    }

    rr * rr + ri * ri
}

#[inline]
fn linear_forward(layer: &DenseLayer, input: JetSlices<'_>, out: &mut JetBuf) {
    let cols = layer.cols();
    let w = layer.weights();
    let b = layer.biases();
    for r in 0..layer.rows() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut av = b[r];
        let mut agx = 0.0;
        let mut agz = 0.0;
        let mut ahxx = 0.0;
        let mut ahzz = 0.0;
        for j in 0..cols {
            let wj = row[j];
            av += wj * input.v[j];
            agx += wj * input.gx[j];
            agz += wj * input.gz[j];
            ahxx += wj * input.hxx[j];
            ahzz += wj * input.hzz[j];
        }
        out.v[r] = av;
        out.gx[r] = agx;
        out.gz[r] = agz;
        out.hxx[r] = ahxx;
        out.hzz[r] = ahzz;
    }
}

/// `h = sin(w0 t)` on jets; also caches `cos(w0 t)` for the reverse pass.
#[inline]
fn sine_forward(w0: f64, t: &JetBuf, h: &mut JetBuf, cos: &mut [f64]) {
    let w0sq = w0 * w0;
    for r in 0..t.v.len() {
        let (s, c) = (w0 * t.v[r]).sin_cos();
        cos[r] = c;
        let gx = t.gx[r];
        let gz = t.gz[r];
        h.v[r] = s;
        h.gx[r] = w0 * c * gx;
        h.gz[r] = w0 * c * gz;
        h.hxx[r] = w0 * c * t.hxx[r] - w0sq * s * gx * gx;
        h.hzz[r] = w0 * c * t.hzz[r] - w0sq * s * gz * gz;
    }
}

/// Adjoint of the linear layer: accumulates weight/bias gradients and,
/// unless this is the first layer, the adjoint of its input jets.
#[inline]
fn linear_backward(
    layer: &DenseLayer,
    input: JetSlices<'_>,
    a_out: &JetBuf,
    gw: &mut [f64],
    gb: &mut [f64],
    a_in: Option<&mut JetBuf>,
) {
    let cols = layer.cols();
    let w = layer.weights();
    match a_in {
        Some(a_in) => {
            for r in 0..layer.rows() {
                let av = a_out.v[r];
                let agx = a_out.gx[r];
                let agz = a_out.gz[r];
                let ahxx = a_out.hxx[r];
                let ahzz = a_out.hzz[r];
                gb[r] += av;
                let row = &w[r * cols..(r + 1) * cols];
                let grow = &mut gw[r * cols..(r + 1) * cols];
                for j in 0..cols {
                    grow[j] += av * input.v[j]
                        + agx * input.gx[j]
                        + agz * input.gz[j]
                        + ahxx * input.hxx[j]
                        + ahzz * input.hzz[j];
                    let wj = row[j];
                    a_in.v[j] += wj * av;
                    a_in.gx[j] += wj * agx;
                    a_in.gz[j] += wj * agz;
                    a_in.hxx[j] += wj * ahxx;
                    a_in.hzz[j] += wj * ahzz;
                }
            }
        }
        None => {
            for r in 0..layer.rows() {
                let av = a_out.v[r];
                let agx = a_out.gx[r];
                let agz = a_out.gz[r];
                let ahxx = a_out.hxx[r];
                let ahzz = a_out.hzz[r];
                gb[r] += av;
                let grow = &mut gw[r * cols..(r + 1) * cols];
                for j in 0..cols {
                    grow[j] += av * input.v[j]
                        + agx * input.gx[j]
                        + agz * input.gz[j]
                        + ahxx * input.hxx[j]
                        + ahzz * input.hzz[j];
                }
            }
        }
    }
}

/// Adjoint of the sine activation, mapping post-activation adjoints to
/// pre-activation adjoints using the cached sines/cosines.
#[inline]
fn sine_backward(w0: f64, t: &JetBuf, h: &JetBuf, cos: &[f64], a_h: &JetBuf, a_t: &mut JetBuf) {
    let w0sq = w0 * w0;
    let w0cu = w0sq * w0;
    for r in 0..t.v.len() {
        let s = h.v[r];
        let c = cos[r];
        let tgx = t.gx[r];
        let tgz = t.gz[r];
        let w0c = w0 * c;
        let ahv = a_h.v[r];
        let ahgx = a_h.gx[r];
        let ahgz = a_h.gz[r];
        let ahhxx = a_h.hxx[r];
        let ahhzz = a_h.hzz[r];
        a_t.v[r] = ahv * w0c
            - w0sq * s * (ahgx * tgx + ahgz * tgz)
            - ahhxx * (w0sq * s * t.hxx[r] + w0cu * c * tgx * tgx)
            - ahhzz * (w0sq * s * t.hzz[r] + w0cu * c * tgz * tgz);
        a_t.gx[r] = ahgx * w0c - 2.0 * w0sq * s * tgx * ahhxx;
        a_t.gz[r] = ahgz * w0c - 2.0 * w0sq * s * tgz * ahhzz;
        a_t.hxx[r] = ahhxx * w0c;
        a_t.hzz[r] = ahhzz * w0c;
    }
}
