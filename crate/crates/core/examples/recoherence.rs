//! A non-Gaussian pointer: with two peaks a distance `d` apart, the
//! decoherence factor echoes at `s = ±d`, so position coherences at
//! separation `d/t` partially return.

use conjugate_decoherence::evolution::{FactorizedKernel, ModelParams};
use conjugate_decoherence::{Basis, Grid, WaveFunction, WavePacket};
use num_complex::Complex64;

fn main() -> conjugate_decoherence::Result<()> {
    let grid = Grid::symmetric(1024, 30.0)?;
    let d = 8.0;
    let amps = grid
        .points()
        .map(|y| {
            let bump = |c: f64| (-(y - c) * (y - c) / 4.0).exp();
            Complex64::new(bump(d / 2.0) + bump(-d / 2.0), 0.0)
        })
        .collect();
    let pointer = WaveFunction::sampled(WavePacket::from_amplitudes(grid, amps, Basis::Position)?);
    let t = 4.0;
    let two_peak = ModelParams {
        env1: pointer,
        ..ModelParams::gaussian(1.0, 1.0, 1.0, t)?
    };
    let single = ModelParams::gaussian(1.0, 1.0, 1.0, t)?;
    let a = FactorizedKernel::new(&two_peak, Basis::Position)?;
    let b = FactorizedKernel::new(&single, Basis::Position)?;
    println!("t = {t}; echo expected at X − X̄ = {}", d / t);
    println!("  X − X̄    |ρ| two-peak pointer   |ρ| single pointer");
    for k in 0..=12 {
        let gap = 0.25 * k as f64;
        println!(
            "  {gap:5.2}     {:.6}               {:.6}",
            a.eval(gap / 2.0, -gap / 2.0).norm(),
            b.eval(gap / 2.0, -gap / 2.0).norm()
        );
    }
    Ok(())
}
