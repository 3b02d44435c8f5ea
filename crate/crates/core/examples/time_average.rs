//! Time-averaged expectation of a coarse system observable.

use conjugate_decoherence::evolution::{position_kernel, ModelParams};
use conjugate_decoherence::metrics::{time_averaged_observable, Observable};
use conjugate_decoherence::{Basis, Grid};

fn main() -> conjugate_decoherence::Result<()> {
    let p = ModelParams::gaussian(1.0, 1.0, 1.0, 60.0)?;
    let grid = Grid::covering(256, p.required_half_width(Basis::Position))?;
    let samples = (0..=60)
        .map(|k| {
            let t = k as f64;
            Ok((t, position_kernel(&p.at_time(t), &grid)?))
        })
        .collect::<conjugate_decoherence::Result<Vec<_>>>()?;
    let x2 = Observable::coordinate_power(&grid, 2);
    // Coarse observable: indicator of |X| ≤ 20.
    let inside = Observable::Diagonal(grid.points().map(|x| f64::from(u8::from(x.abs() <= 20.0))).collect());
    println!("  window      ⟨X²⟩ average   exact (1 + t²) average   P(|X| ≤ 20)");
    for (a, b) in [(0.0, 10.0), (10.0, 20.0), (20.0, 30.0), (40.0, 50.0), (50.0, 60.0)] {
        let exact = 1.0 + (b * b * b - a * a * a) / (3.0 * (b - a));
        println!(
            "[{a:4.0}, {b:4.0}]   {:12.3}   {:12.3}      {:.4}",
            time_averaged_observable(&samples, &x2, (a, b))?,
            exact,
            time_averaged_observable(&samples, &inside, (a, b))?
        );
    }
    Ok(())
}
