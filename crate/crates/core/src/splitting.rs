//! Neuron splitting: grow a trained network by replacing every hidden neuron
//! with `n` offsprings while preserving the represented function.
//!
//! Incoming weights are copied to each offspring and outgoing weights are
//! divided by the offspring count: the input layer duplicates its rows and
//! biases, interior layers tile `W/n` in an `n x n` block pattern with
//! duplicated biases, and the output layer tiles `W/n` horizontally. Offspring
//! block `a` of neuron `i` lands at index `a*h + i`.
//!
//! With the output bias kept unchanged the construction is function-identical
//! to machine precision. The `preserve_output_bias = false` mode divides the
//! output bias by `n` as well, which shifts every output by the constant
//! `(1 - 1/n) * b` — both behaviors are available.
//!
//! Exact duplication leaves offsprings permanently tied under gradient
//! descent, so a small relative noise is injected into hidden weights after
//! splitting (skipped at `noise_rel_std = 0`, which the preservation tests
//! rely on).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::network::{DenseLayer, NetworkError, NetworkParams};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("split factor must be at least 1")]
    ZeroFactor,
    #[error("positional-encoding configurations do not match")]
    PeMismatch,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Offsprings per neuron.
    pub factor: usize,
    /// Symmetry-breaking noise, relative to each matrix's weight std.
    pub noise_rel_std: f64,
    /// Keep the output bias unchanged (exact preservation) instead of
    /// dividing it by the factor.
    pub preserve_output_bias: bool,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            factor: 4,
            noise_rel_std: 1e-2,
            preserve_output_bias: true,
            seed: 0,
        }
    }
}

/// Splits every hidden neuron of `params` into `cfg.factor` offsprings.
pub fn split_network(params: &NetworkParams, cfg: &SplitConfig) -> Result<NetworkParams, SplitError> {
    if cfg.factor == 0 {
        return Err(SplitError::ZeroFactor);
    }
    let n = cfg.factor;
    if n == 1 && cfg.noise_rel_std == 0.0 {
        return Ok(params.clone());
    }

    let layers = params.layers();
    let last = layers.len() - 1;
    let scale = 1.0 / n as f64;
    let mut new_layers = Vec::with_capacity(layers.len());

    for (li, layer) in layers.iter().enumerate() {
        let (rows, cols) = (layer.rows(), layer.cols());
        let first = li == 0;
        let out_layer = li == last;
        let new_rows = if out_layer { rows } else { rows * n };
        let new_cols = if first { cols } else { cols * n };
        let mut w = vec![0.0; new_rows * new_cols];
        let mut b = vec![0.0; new_rows];

        let row_blocks = if out_layer { 1 } else { n };
        let col_blocks = if first { 1 } else { n };
        let value_scale = if first { 1.0 } else { scale };
        for a in 0..row_blocks {
            for i in 0..rows {
                let ri = a * rows + i;
                for bl in 0..col_blocks {
                    for j in 0..cols {
                        w[ri * new_cols + bl * cols + j] = value_scale * layer.weight(i, j);
                    }
                }
            }
        }
        for a in 0..row_blocks {
            for i in 0..rows {
                let bias = if out_layer && !cfg.preserve_output_bias {
                    layer.biases()[i] * scale
                } else {
                    layer.biases()[i]
                };
                b[a * rows + i] = bias;
            }
        }
        new_layers.push(DenseLayer::new(new_rows, new_cols, w, b)?);
    }

    let mut split = NetworkParams::from_layers(new_layers, params.pe, params.w0)?;
    if cfg.noise_rel_std > 0.0 {
        add_symmetry_noise(&mut split, cfg.noise_rel_std, cfg.seed)?;
    }
    Ok(split)
}

/// Adds zero-mean Gaussian noise with std `rel * std(matrix)` to every
/// weight matrix feeding a hidden layer. The output layer stays exact.
fn add_symmetry_noise(params: &mut NetworkParams, rel: f64, seed: u64) -> Result<(), SplitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = params.layers().len() - 1;
    let sigmas: Vec<f64> = params
        .layers()
        .iter()
        .map(|l| rel * weight_std(l.weights()))
        .collect();
    let mut perturbed = Vec::with_capacity(params.layers().len());
    for (li, layer) in params.layers().iter().enumerate() {
        let sigma = sigmas[li];
        if li == last || sigma <= 0.0 {
            perturbed.push(layer.clone());
            continue;
        }
        let normal = Normal::new(0.0, sigma).expect("finite noise std");
        let w: Vec<f64> = layer
            .weights()
            .iter()
            .map(|&wv| wv + normal.sample(&mut rng))
            .collect();
        perturbed.push(DenseLayer::new(layer.rows(), layer.cols(), w, layer.biases().to_vec())?);
    }
    *params = NetworkParams::from_layers(perturbed, params.pe, params.w0)?;
    Ok(())
}

fn weight_std(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Result of probing two networks on random inputs.
#[derive(Debug, Clone, Copy)]
pub struct FunctionPreservation {
    /// Max over probe inputs of `|phi_after - phi_before|`.
    pub max_deviation: f64,
    pub tol: f64,
}

impl FunctionPreservation {
    pub fn preserved(&self) -> bool {
        self.max_deviation <= self.tol
    }
}

/// Probes both networks on `num_probes` seeded uniform points of the
/// encoding's physical domain and reports the max output deviation.
pub fn verify_function_preservation(
    before: &NetworkParams,
    after: &NetworkParams,
    num_probes: usize,
    tol: f64,
    seed: u64,
) -> Result<FunctionPreservation, SplitError> {
    if before.pe != after.pe {
        return Err(SplitError::PeMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..num_probes {
        let p = random_domain_point(&before.pe, &mut rng);
        let dev = (after.forward(p) - before.forward(p)).norm();
        max_dev = max_dev.max(dev);
    }
    Ok(FunctionPreservation {
        max_deviation: max_dev,
        tol,
    })
}

pub(crate) fn random_domain_point(pe: &crate::network::PEConfig, rng: &mut ChaCha8Rng) -> [f64; 3] {
    use rand::RngExt;
    let mut p = [0.0; 3];
    for (k, pk) in p.iter_mut().enumerate() {
        let half = 1.0 / pe.coord_scale.scale[k];
        let c = pe.coord_scale.center[k];
        *pk = rng.random_range(c - half..c + half);
    }
    p
}
