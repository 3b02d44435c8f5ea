//! A free Hamiltonian `p²/2m` on top of the measurement coupling: the
//! momentum-basis magnitudes change and converge to the infinite-mass
//! result as the mass grows.

use conjugate_decoherence::evolution::{
    brute_force_reduced, free_particle_momentum_kernel, momentum_kernel, Mass, ModelParams,
};
use conjugate_decoherence::metrics::analyze;
use conjugate_decoherence::{Basis, Grid};

fn main() -> conjugate_decoherence::Result<()> {
    let p = ModelParams::gaussian(1.0, 1.0, 1.0, 3.0)?;
    let grid = Grid::covering(192, p.required_half_width(Basis::Momentum))?;
    let limit = momentum_kernel(&p, &grid)?;
    println!("   mass      max|Δ| to m = ∞   purity");
    for m in [0.5, 1.0, 10.0, 1e2, 1e4, 1e6] {
        let rho = free_particle_momentum_kernel(&p.clone().with_mass(Mass::Finite(m)), &grid)?;
        println!("{m:9.1e}   {:.3e}          {:.6}", rho.max_abs_diff(&limit), analyze(&rho, 3.0)?.purity);
    }
    let light = p.with_mass(Mass::Finite(1.0));
    let small = Grid::covering(48, light.required_half_width(Basis::Momentum))?;
    let gap = brute_force_reduced(&light, &small, Basis::Momentum)?
        .max_abs_diff(&free_particle_momentum_kernel(&light, &small)?);
    println!("\nm = 1 against the brute-force oracle on 48 points: {gap:.2e}");
    Ok(())
}
