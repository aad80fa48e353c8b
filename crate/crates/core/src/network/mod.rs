//! Sine-activated coordinate network over `(x, z, s_x)` with positional
//! encoding, exact second spatial derivatives, exact physics-loss gradients,
//! and an Adam optimizer.
//!
//! Derivatives are propagated as 5-component jets
//! `(value, d/dx, d/dz, d2/dx2, d2/dz2)` through every layer, so the
//! Laplacian entries of [`EvalJet`] are exact to machine precision rather
//! than finite-difference approximations. The loss gradient is a hand-rolled
//! reverse pass over the same jet computation.

mod adam;
mod batch;

pub use adam::{adam_step, AdamState};
pub use batch::{loss_and_gradient, loss_and_gradient_range, EncodedBatch, ParamGradient};

use num_complex::Complex64;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::DEFAULT_DOMAIN_KM;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty batch")]
    EmptyBatch,
}

/// Per-axis affine map from physical coordinates to normalized `[-1, 1]`.
///
/// Keeps sine arguments O(1) regardless of the physical domain size; the
/// chain-rule gains are applied inside the derivative jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordScale {
    /// `u = scale * (p - center)` per axis `(x, z, s_x)`.
    pub scale: [f64; 3],
    pub center: [f64; 3],
}

impl CoordScale {
    /// Map each axis range `(min, max)` onto `[-1, 1]`.
    pub fn from_ranges(ranges: [(f64, f64); 3]) -> Self {
        let mut scale = [0.0; 3];
        let mut center = [0.0; 3];
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            scale[k] = 2.0 / (hi - lo);
            center[k] = 0.5 * (lo + hi);
        }
        Self { scale, center }
    }

    /// Square physical domain `[0, side] x [0, side]`, sources mapped like x.
    pub fn from_square_domain(side_km: f64) -> Self {
        Self::from_ranges([(0.0, side_km); 3])
    }

    /// No-op mapping; normalized coordinates equal physical ones.
    pub fn identity() -> Self {
        Self {
            scale: [1.0; 3],
            center: [0.0; 3],
        }
    }

    #[inline]
    pub fn normalize(&self, p: [f64; 3]) -> [f64; 3] {
        [
            self.scale[0] * (p[0] - self.center[0]),
            self.scale[1] * (p[1] - self.center[1]),
            self.scale[2] * (p[2] - self.center[2]),
        ]
    }

    /// `du/dp` for one axis.
    #[inline]
    pub fn gain(&self, axis: usize) -> f64 {
        self.scale[axis]
    }
}

impl Default for CoordScale {
    fn default() -> Self {
        Self::from_square_domain(DEFAULT_DOMAIN_KM)
    }
}

/// Positional-encoding configuration.
///
/// Each normalized scalar coordinate `u` expands to
/// `[u, sin(2^0 pi u), cos(2^0 pi u), ..., sin(2^(L-1) pi u), cos(2^(L-1) pi u)]`,
/// so the encoded dimension is `3 * (1 + 2L)` with the raw term included.
/// The default `L = 2` makes a `{4,4}` network carry exactly 94 parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PEConfig {
    /// Number of sin/cos band pairs per coordinate.
    pub num_bands: u32,
    /// Whether the raw normalized coordinate is part of the encoding.
    pub include_raw: bool,
    pub coord_scale: CoordScale,
}

impl Default for PEConfig {
    fn default() -> Self {
        Self {
            num_bands: 2,
            include_raw: true,
            coord_scale: CoordScale::default(),
        }
    }
}

impl PEConfig {
    pub fn with_bands(num_bands: u32) -> Self {
        Self {
            num_bands,
            ..Self::default()
        }
    }

    /// Encoded dimension per scalar coordinate.
    pub fn per_coord_dim(&self) -> usize {
        usize::from(self.include_raw) + 2 * self.num_bands as usize
    }

    /// Total encoded input dimension for `(x, z, s_x)`.
    pub fn encoded_dim(&self) -> usize {
        3 * self.per_coord_dim()
    }

    /// Positional encoding of one physical point (values only).
    pub fn encode(&self, p: [f64; 3]) -> Vec<f64> {
        let u = self.coord_scale.normalize(p);
        let mut out = Vec::with_capacity(self.encoded_dim());
        for &uk in &u {
            if self.include_raw {
                out.push(uk);
            }
            let mut freq = std::f64::consts::PI;
            for _ in 0..self.num_bands {
                let (s, c) = (freq * uk).sin_cos();
                out.push(s);
                out.push(c);
                freq *= 2.0;
            }
        }
        out
    }

    /// Positional encoding together with first and second derivatives of
    /// every component with respect to the physical `x` and `z` coordinates.
    ///
    /// Writes into five `encoded_dim()`-long slices
    /// `(value, d/dx, d/dz, d2/dx2, d2/dz2)`. Components encoding `s_x`
    /// carry zero derivatives: the Laplacian acts on field coordinates only.
    pub fn encode_jets(
        &self,
        p: [f64; 3],
        v: &mut [f64],
        gx: &mut [f64],
        gz: &mut [f64],
        hxx: &mut [f64],
        hzz: &mut [f64],
    ) {
        let u = self.coord_scale.normalize(p);
        let mut idx = 0;
        for (axis, &uk) in u.iter().enumerate() {
            let a = if axis < 2 {
                self.coord_scale.gain(axis)
            } else {
                0.0 // s_x: no spatial derivative
            };
            let (gxa, gza) = if axis == 0 { (a, 0.0) } else { (0.0, a) };
            if self.include_raw {
                v[idx] = uk;
                gx[idx] = gxa;
                gz[idx] = gza;
                hxx[idx] = 0.0;
                hzz[idx] = 0.0;
                idx += 1;
            }
            let mut freq = std::f64::consts::PI;
            for _ in 0..self.num_bands {
                let (s, c) = (freq * uk).sin_cos();
                let d1 = freq * a; // d(freq*u)/dp along the live axis
                let d2 = d1 * d1;
                // sin component
                v[idx] = s;
                gx[idx] = if axis == 0 { d1 * c } else { 0.0 };
                gz[idx] = if axis == 1 { d1 * c } else { 0.0 };
                hxx[idx] = if axis == 0 { -d2 * s } else { 0.0 };
                hzz[idx] = if axis == 1 { -d2 * s } else { 0.0 };
                idx += 1;
                // cos component
                v[idx] = c;
                gx[idx] = if axis == 0 { -d1 * s } else { 0.0 };
                gz[idx] = if axis == 1 { -d1 * s } else { 0.0 };
                hxx[idx] = if axis == 0 { -d2 * c } else { 0.0 };
                hzz[idx] = if axis == 1 { -d2 * c } else { 0.0 };
                idx += 1;
                freq *= 2.0;
            }
        }
        debug_assert_eq!(idx, self.encoded_dim());
    }
}

/// Standalone positional-encoding entry point.
pub fn positional_encode(p: [f64; 3], pe: &PEConfig) -> Vec<f64> {
    pe.encode(p)
}

/// One dense layer, weights row-major with `rows` output neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl DenseLayer {
    pub fn new(rows: usize, cols: usize, w: Vec<f64>, b: Vec<f64>) -> Result<Self, NetworkError> {
        if rows == 0 || cols == 0 {
            return Err(NetworkError::InvalidConfig(
                "layer dimensions must be positive".into(),
            ));
        }
        if w.len() != rows * cols || b.len() != rows {
            return Err(NetworkError::ShapeMismatch(format!(
                "layer {rows}x{cols} expects {} weights and {rows} biases, got {} and {}",
                rows * cols,
                w.len(),
                b.len()
            )));
        }
        Ok(Self { rows, cols, w, b })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn biases(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.w[row * self.cols + col]
    }
}

/// The learned wavefield representation: layer stack, activation scale and
/// encoding. Output is fixed at 2 channels interpreted as `(Re, Im)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    layers: Vec<DenseLayer>,
    pub w0: f64,
    pub pe: PEConfig,
}

/// Network output channels: real and imaginary part of the scattered field.
pub const OUTPUT_DIM: usize = 2;

impl NetworkParams {
    /// Random initialization: weights uniform in `+-sqrt(6/fan_in)`, biases
    /// zero; bit-identical for a fixed seed.
    pub fn init_random(
        widths: &[usize],
        pe: PEConfig,
        w0: f64,
        seed: u64,
    ) -> Result<Self, NetworkError> {
        validate_widths(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(widths.len() + 1);
        let mut fan_in = pe.encoded_dim();
        for &width in widths.iter().chain(std::iter::once(&OUTPUT_DIM)) {
            let limit = (6.0 / fan_in as f64).sqrt();
            let w: Vec<f64> = (0..width * fan_in)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(DenseLayer::new(width, fan_in, w, vec![0.0; width])?);
            fan_in = width;
        }
        Ok(Self { layers, w0, pe })
    }

    /// All-zero parameters (handy for the constant-network edge cases).
    pub fn zeros(widths: &[usize], pe: PEConfig, w0: f64) -> Result<Self, NetworkError> {
        validate_widths(widths)?;
        let mut layers = Vec::with_capacity(widths.len() + 1);
        let mut fan_in = pe.encoded_dim();
        for &width in widths.iter().chain(std::iter::once(&OUTPUT_DIM)) {
            layers.push(DenseLayer::zeros(width, fan_in));
            fan_in = width;
        }
        Ok(Self { layers, w0, pe })
    }

    /// Build from explicit layers, checking the chain of shapes.
    pub fn from_layers(
        layers: Vec<DenseLayer>,
        pe: PEConfig,
        w0: f64,
    ) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::InvalidConfig("no layers".into()));
        }
        if layers[0].cols != pe.encoded_dim() {
            return Err(NetworkError::ShapeMismatch(format!(
                "first layer expects {} inputs, encoding provides {}",
                layers[0].cols,
                pe.encoded_dim()
            )));
        }
        for pair in layers.windows(2) {
            if pair[1].cols != pair[0].rows {
                return Err(NetworkError::ShapeMismatch(format!(
                    "layer {}x{} cannot follow layer with {} outputs",
                    pair[1].rows, pair[1].cols, pair[0].rows
                )));
            }
        }
        if layers.last().unwrap().rows != OUTPUT_DIM {
            return Err(NetworkError::ShapeMismatch(format!(
                "output layer must have {OUTPUT_DIM} rows, got {}",
                layers.last().unwrap().rows
            )));
        }
        Ok(Self { layers, w0, pe })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Hidden layer sizes, e.g. `[4, 4]`.
    pub fn widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.rows)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.rows * (l.cols + 1)).sum()
    }

    /// Visit every parameter mutably in canonical order
    /// (per layer: weights row-major, then biases).
    pub(crate) fn for_each_param_mut(&mut self, mut f: impl FnMut(usize, &mut f64)) {
        let mut idx = 0;
        for layer in &mut self.layers {
            for w in &mut layer.w {
                f(idx, w);
                idx += 1;
            }
            for b in &mut layer.b {
                f(idx, b);
                idx += 1;
            }
        }
    }

    /// Parameters flattened in canonical order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.w);
            out.extend_from_slice(&layer.b);
        }
        out
    }

    /// Replace all parameters from a canonical-order flat slice.
    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.param_count() {
            return Err(NetworkError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut idx = 0;
        for layer in &mut self.layers {
            layer.w.copy_from_slice(&flat[idx..idx + layer.rows * layer.cols]);
            idx += layer.rows * layer.cols;
            layer.b.copy_from_slice(&flat[idx..idx + layer.rows]);
            idx += layer.rows;
        }
        Ok(())
    }

    /// Network value at one point as a complex number
    /// (channel 0 = real part, channel 1 = imaginary part).
    pub fn forward(&self, p: [f64; 3]) -> Complex64 {
        let mut h = self.pe.encode(p);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut t = vec![0.0; layer.rows];
            for (r, tr) in t.iter_mut().enumerate() {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = layer.b[r];
                for (wj, hj) in row.iter().zip(h.iter()) {
                    acc += wj * hj;
                }
                *tr = acc;
            }
            if i < last {
                for tr in &mut t {
                    *tr = (self.w0 * *tr).sin();
                }
            }
            h = t;
        }
        Complex64::new(h[0], h[1])
    }

    /// Post-activation hidden-layer vectors at one point.
    pub fn hidden_activations(&self, p: [f64; 3]) -> Vec<Vec<f64>> {
        let mut h = self.pe.encode(p);
        let mut out = Vec::with_capacity(self.layers.len() - 1);
        for layer in &self.layers[..self.layers.len() - 1] {
            let mut t = vec![0.0; layer.rows];
            for (r, tr) in t.iter_mut().enumerate() {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = layer.b[r];
                for (wj, hj) in row.iter().zip(h.iter()) {
                    acc += wj * hj;
                }
                *tr = (self.w0 * acc).sin();
            }
            out.push(t.clone());
            h = t;
        }
        out
    }

    /// Value and exact second derivatives with respect to physical `x`, `z`.
    pub fn forward_with_laplacian(&self, p: [f64; 3]) -> EvalJet {
        let d = self.pe.encoded_dim();
        let mut jets = JetBuf::new(d);
        self.pe.encode_jets(
            p,
            &mut jets.v,
            &mut jets.gx,
            &mut jets.gz,
            &mut jets.hxx,
            &mut jets.hzz,
        );
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = JetBuf::new(layer.rows);
            layer_forward_jets(layer, &jets, &mut next);
            if i < last {
                sine_jets_in_place(self.w0, &mut next);
            }
            jets = next;
        }
        EvalJet {
            value: Complex64::new(jets.v[0], jets.v[1]),
            d2dx2: Complex64::new(jets.hxx[0], jets.hxx[1]),
            d2dz2: Complex64::new(jets.hzz[0], jets.hzz[1]),
        }
    }
}

fn validate_widths(widths: &[usize]) -> Result<(), NetworkError> {
    if widths.is_empty() {
        return Err(NetworkError::InvalidConfig("widths must be non-empty".into()));
    }
    if widths.iter().any(|&w| w == 0) {
        return Err(NetworkError::InvalidConfig(
            "hidden layer widths must be >= 1".into(),
        ));
    }
    Ok(())
}

/// Value and exact second derivatives of the complex network output with
/// respect to the physical field coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalJet {
    pub value: Complex64,
    pub d2dx2: Complex64,
    pub d2dz2: Complex64,
}

/// Five-slot jet storage `(value, d/dx, d/dz, d2/dx2, d2/dz2)` for one layer.
#[derive(Debug, Clone)]
pub(crate) struct JetBuf {
    pub v: Vec<f64>,
    pub gx: Vec<f64>,
    pub gz: Vec<f64>,
    pub hxx: Vec<f64>,
    pub hzz: Vec<f64>,
}

impl JetBuf {
    pub fn new(len: usize) -> Self {
        Self {
            v: vec![0.0; len],
            gx: vec![0.0; len],
            gz: vec![0.0; len],
            hxx: vec![0.0; len],
            hzz: vec![0.0; len],
        }
    }
}

/// Linear layer applied slot-wise: the bias enters the value slot only.
#[inline]
pub(crate) fn layer_forward_jets(layer: &DenseLayer, input: &JetBuf, out: &mut JetBuf) {
    let cols = layer.cols;
    for r in 0..layer.rows {
        let row = &layer.w[r * cols..(r + 1) * cols];
        let mut av = layer.b[r];
        let mut agx = 0.0;
        let mut agz = 0.0;
        let mut ahxx = 0.0;
        let mut ahzz = 0.0;
        for j in 0..cols {
            let w = row[j];
            av += w * input.v[j];
            agx += w * input.gx[j];
            agz += w * input.gz[j];
            ahxx += w * input.hxx[j];
            ahzz += w * input.hzz[j];
        }
        out.v[r] = av;
        out.gx[r] = agx;
        out.gz[r] = agz;
        out.hxx[r] = ahxx;
        out.hzz[r] = ahzz;
    }
}

/// `phi(t) = sin(w0 t)` applied to a jet by the chain rule.
#[inline]
pub(crate) fn sine_jets_in_place(w0: f64, jets: &mut JetBuf) {
    let w0sq = w0 * w0;
    for r in 0..jets.v.len() {
        let (s, c) = (w0 * jets.v[r]).sin_cos();
        let gx = jets.gx[r];
        let gz = jets.gz[r];
        jets.v[r] = s;
        jets.gx[r] = w0 * c * gx;
        jets.gz[r] = w0 * c * gz;
        jets.hxx[r] = w0 * c * jets.hxx[r] - w0sq * s * gx * gx;
        jets.hzz[r] = w0 * c * jets.hzz[r] - w0sq * s * gz * gz;
    }
}
