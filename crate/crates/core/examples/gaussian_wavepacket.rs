//! Wavepackets on a grid: normalization, the Fourier pair, and the
//! decoherence factor of a single and a two-peak pointer state.

use conjugate_decoherence::{
    autocorrelation, fourier_transform, sample_gaussian, Basis, GaussianSpec, Grid, WavePacket,
};
use num_complex::Complex64;

fn main() -> conjugate_decoherence::Result<()> {
    let grid = Grid::symmetric(512, 20.0)?;
    let psi = sample_gaussian(&GaussianSpec::new(3.0, 1.0)?, &grid)?;
    println!("norm {:.12}, mean {:.6}, std {:.6}", psi.norm(), psi.mean(), psi.std_dev());

    let boosted = psi.boosted(2.0);
    let phi = fourier_transform(&boosted);
    println!(
        "momentum side: norm {:.12}, mean {:.6}, std {:.6} (expect 2 and 0.5)",
        phi.norm(),
        phi.mean(),
        phi.std_dev()
    );

    let d = autocorrelation(&sample_gaussian(&GaussianSpec::centered(1.0)?, &grid)?);
    println!("\n   s      D(s)     exp(-s²/8)");
    for s in [0.0, 0.5, 1.0, 2.0, 4.0] {
        println!("{s:5.1}  {:.8}  {:.8}", d.eval(s).re, (-s * s / 8.0).exp());
    }

    // Two pointer peaks 10 apart: |D| echoes at s = ±10 with half height.
    let amps = grid
        .points()
        .map(|y| Complex64::new((-(y - 5.0f64).powi(2) / 4.0).exp() + (-(y + 5.0f64).powi(2) / 4.0).exp(), 0.0))
        .collect();
    let pair = WavePacket::from_amplitudes(grid, amps, Basis::Position)?;
    let d = autocorrelation(&pair);
    println!("\ntwo-peak pointer:");
    for s in [0.0, 2.5, 5.0, 7.5, 10.0, 12.5] {
        println!("  |D({s:4.1})| = {:.6}", d.eval(s).norm());
    }
    Ok(())
}
