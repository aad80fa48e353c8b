//! Dev scratch: full 2 Hz baseline run + comparison against the FD reference.

use pinnup_core::metrics::compare_grids;
use pinnup_core::refsolver::{solve_scattered, ComplexGrid, GridSpec, PMLConfig};
use pinnup_core::sampler::SamplingConfig;
use pinnup_core::trainer::{run_stage, LadderStage, StageInit};
use pinnup_core::{PEConfig, VelocityModel};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let w0: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let width: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("epochs {epochs}, w0 {w0}, widths [{width},{width}], seed {seed}");
    let model = VelocityModel::default_layered();
    let stage = LadderStage::new(2.0, 10_000, epochs, 1);
    let start = Instant::now();
    let result = run_stage(
        StageInit::Fresh {
            widths: vec![width, width],
            pe: PEConfig::default(),
            w0,
            seed,
        },
        &stage,
        &model,
        &SamplingConfig::default(),
    )
    .unwrap();
    println!(
        "trained {} epochs in {:.0} s; loss epoch1 {:.4e} -> final {:.4e} (ratio {:.3e})",
        epochs,
        start.elapsed().as_secs_f64(),
        result.history[0].loss,
        result.history.last().unwrap().loss,
        result.history.last().unwrap().loss / result.history[0].loss
    );
    for frac in [0usize, 1, 2, 5, 10, 20, 50, 100] {
        let idx = (epochs * frac / 100).min(epochs - 1);
        println!(
            "  epoch {:>6}: loss {:.4e}",
            idx + 1,
            result.history[idx].loss
        );
    }

    // Prediction on the reference grid.
    let spec = GridSpec::covering(&model, 100);
    let sx = 1.0;
    let params = &result.checkpoint.params;
    let mut pred = ComplexGrid::zeros(100, 100, spec.dx, spec.dz, spec.ox, spec.oz, 2.0, sx, 0.025);
    for iz in 0..100 {
        for ix in 0..100 {
            let (x, z) = (pred.x_of(ix), pred.z_of(iz));
            pred.values[iz * 100 + ix] = params.forward([x, z, sx]);
        }
    }
    let omega = 4.0 * std::f64::consts::PI;
    let refgrid = solve_scattered(&model, omega, sx, 0.025, &spec, &PMLConfig::default()).unwrap();
    let m = compare_grids(&pred, &refgrid).unwrap();
    println!(
        "vs FD reference: rel_l2(complex) {:.4}, corr(real) {:.4}, corr(imag) {:.4}",
        m.complex.rel_l2, m.real.correlation, m.imag.correlation
    );
}
