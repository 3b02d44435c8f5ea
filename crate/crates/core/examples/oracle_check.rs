//! Brute-force tripartite evolution against the factorized kernels.
//!
//! The pointer shift `y₁ → y₁ + xt + ½y₂t²` carries a cross term that the
//! factorized kernel drops; the residuals below show it cancels.

use conjugate_decoherence::evolution::{
    brute_force_reduced, brute_force_reduced_with, momentum_kernel, position_kernel, ModelParams,
    OracleGrids,
};
use conjugate_decoherence::{Basis, Grid};

fn main() -> conjugate_decoherence::Result<()> {
    println!("   t  basis       48-point oracle   64-point oracle");
    for t in [0.0, 1.0, 2.0, 4.0] {
        let p = ModelParams::gaussian(1.0, 1.0, 1.0, t)?;
        for basis in [Basis::Position, Basis::Momentum] {
            let grid = Grid::covering(48, p.required_half_width(basis))?;
            let kernel = match basis {
                Basis::Position => position_kernel(&p, &grid)?,
                Basis::Momentum => momentum_kernel(&p, &grid)?,
            };
            let coarse = brute_force_reduced(&p, &grid, basis)?;
            let fine = brute_force_reduced_with(&p, &grid, basis, OracleGrids::uniform(64))?;
            println!(
                "{t:4.1}  {:<10}  {:.3e}         {:.3e}",
                basis.as_str(),
                coarse.max_abs_diff(&kernel),
                fine.max_abs_diff(&kernel)
            );
        }
    }
    Ok(())
}
