//! Momentum-basis kernel, and the same state reached by Fourier
//! conjugating the position-basis matrix.

use std::f64::consts::PI;

use conjugate_decoherence::evolution::{basis_change, momentum_kernel, position_kernel, ModelParams};
use conjugate_decoherence::metrics::analyze;
use conjugate_decoherence::{Basis, Grid};

fn main() -> conjugate_decoherence::Result<()> {
    let latest = ModelParams::gaussian(1.0, 1.0, 1.0, 4.0)?;
    let half_p = latest.required_half_width(Basis::Momentum) * 1.05;
    let half_x = latest.required_half_width(Basis::Position) * 1.05;
    let dx = PI / half_p;
    let n = ((2.0 * half_x / dx).ceil() as usize + 1) & !1;
    let xgrid = Grid::centered(n, dx)?;
    println!("position grid {n} points, dual momentum grid ±{:.2}", xgrid.dual().half_width());
    println!("   t   purity(p)  offdiag_p  diag_p   max|F ρx F† − ρp|");
    for t in [0.0, 1.0, 2.0, 4.0] {
        let p = latest.at_time(t);
        let via_fourier = basis_change(&position_kernel(&p, &xgrid)?);
        let direct = momentum_kernel(&p, via_fourier.grid())?;
        let m = analyze(&direct, t)?;
        println!(
            "{t:4.1}  {:.6}   {:.5}    {:.4}   {:.1e}",
            m.purity,
            m.offdiag_width,
            m.diag_width,
            via_fourier.max_abs_diff(&direct)
        );
    }
    Ok(())
}
