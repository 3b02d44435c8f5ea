//! Approach to a flat position distribution, and how much the late-time
//! distribution still remembers the initial state.

use conjugate_decoherence::evolution::{long_time_diagonal, ModelParams};
use conjugate_decoherence::metrics::{flatness_cv, uniformity_spectrum};
use conjugate_decoherence::{Basis, Grid, WaveFunction};

fn main() -> conjugate_decoherence::Result<()> {
    let times = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    let narrow = ModelParams::gaussian(1.0, 1.0, 1.0, 50.0)?;
    let wide = ModelParams {
        system: WaveFunction::gaussian(1.5, 2.0)?,
        ..narrow.clone()
    };
    let half = narrow
        .required_half_width(Basis::Position)
        .max(wide.required_half_width(Basis::Position));
    let grid = Grid::covering(4096, half)?;
    println!("   t   spectrum   flatness_cv   flatness_cv (shifted, wider ψ)   max|ΔP|/max P");
    for t in times {
        let a = long_time_diagonal(&narrow.at_time(t), &grid, Basis::Position)?;
        let b = long_time_diagonal(&wide.at_time(t), &grid, Basis::Position)?;
        let peak = a.probs().iter().cloned().fold(0.0, f64::max);
        let gap = a
            .probs()
            .iter()
            .zip(b.probs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        println!(
            "{t:5.1}  {:.5}    {:.5}       {:.5}                        {:.4}",
            uniformity_spectrum(&a, 5.0)?,
            flatness_cv(&grid, a.probs(), 5.0)?,
            flatness_cv(&grid, b.probs(), 5.0)?,
            gap / peak
        );
    }
    Ok(())
}
