//! Dev scratch: decompose the loss scale — zero-network source energy vs
//! the residual of the FD reference solution itself evaluated through the
//! network loss (by fitting nothing: just report the irreducible terms).

use pinnup_core::network::loss_and_gradient;
use pinnup_core::sampler::{draw_samples_with, SamplingConfig};
use pinnup_core::{NetworkParams, PEConfig, VelocityModel};

fn main() {
    let model = VelocityModel::default_layered();
    let omega = 4.0 * std::f64::consts::PI;
    let batch = draw_samples_with(&model, 10_000, omega, &SamplingConfig::default(), 1).unwrap();

    // Zero network: loss = mean |omega^2 dm u0|^2 (pure source energy).
    let zero = NetworkParams::zeros(&[4, 4], PEConfig::default(), 1.0).unwrap();
    let (loss0, _) = loss_and_gradient(&zero, &batch, omega).unwrap();
    println!("zero-network loss (source energy): {loss0:.4e}");

    // Distribution of |rhs| over samples.
    let mut rhs: Vec<f64> = (0..batch.len())
        .map(|i| (omega * omega * batch.dm[i] * batch.u0[i]).norm())
        .collect();
    rhs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for q in [0.5, 0.9, 0.99, 1.0] {
        let idx = ((rhs.len() - 1) as f64 * q) as usize;
        println!("|rhs| q{:.2}: {:.4e}", q, rhs[idx]);
    }
    let frac_zero = rhs.iter().filter(|&&v| v == 0.0).count() as f64 / rhs.len() as f64;
    println!("fraction of samples with dm = 0: {frac_zero:.3}");
}
