//! Dev scratch: time full-batch loss/gradient steps at the 2 Hz baseline scale.

use pinnup_core::network::{adam_step, loss_and_gradient_range, AdamState, EncodedBatch};
use pinnup_core::sampler::{draw_samples_with, SamplingConfig};
use pinnup_core::{NetworkParams, PEConfig, VelocityModel};
use std::time::Instant;

fn main() {
    let model = VelocityModel::default_layered();
    let omega = 4.0 * std::f64::consts::PI;
    let batch = draw_samples_with(&model, 10_000, omega, &SamplingConfig::default(), 1).unwrap();

    for widths in [vec![4usize, 4], vec![16, 16], vec![64, 64]] {
        let mut params =
            NetworkParams::init_random(&widths, PEConfig::default(), 1.0, 7).unwrap();
        let enc = EncodedBatch::new(&batch, &params.pe, omega);
        let mut adam = AdamState::new(params.param_count());
        let start = Instant::now();
        let iters = 200;
        let mut last_loss = 0.0;
        for _ in 0..iters {
            let (loss, grad) = loss_and_gradient_range(&params, &enc, 0..batch.len()).unwrap();
            adam_step(&mut adam, &mut params, &grad, 1e-3).unwrap();
            last_loss = loss;
        }
        let dt = start.elapsed().as_secs_f64();
        println!(
            "{widths:?}: {:.3} ms/step over 10k samples (loss {last_loss:.4e}) -> 50k epochs ~ {:.0} s",
            1e3 * dt / iters as f64,
            dt / iters as f64 * 50_000.0
        );
    }
}
