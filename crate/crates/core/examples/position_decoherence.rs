//! Position-basis reduced density matrix over time, compared with the
//! Gaussian closed form.

use conjugate_decoherence::analytic::{analytic_density_matrix, asymptotic_widths, GaussianModel};
use conjugate_decoherence::evolution::{position_kernel, ModelParams};
use conjugate_decoherence::metrics::analyze;
use conjugate_decoherence::{Basis, Grid};

fn main() -> conjugate_decoherence::Result<()> {
    let model = GaussianModel::reference();
    let latest = ModelParams::gaussian(1.0, 1.0, 1.0, 10.0)?;
    let grid = Grid::covering(256, latest.required_half_width(Basis::Position))?;
    println!("grid: {} points on ±{:.1}", grid.len(), grid.half_width());
    println!("   t   purity    entropy   l1        offdiag (exact)      diag (exact)       max|Δ| closed form");
    for t in [0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
        let rho = position_kernel(&latest.at_time(t), &grid)?;
        let m = analyze(&rho, t)?;
        let w = asymptotic_widths(&model, t);
        let gap = rho.max_abs_diff(&analytic_density_matrix(&model, t, &grid, Basis::Position)?);
        println!(
            "{t:4.1}  {:.5}  {:8.5}  {:8.4}  {:.4} ({:.4})    {:7.4} ({:7.4})    {gap:.1e}",
            m.purity, m.entropy, m.l1_coherence, m.offdiag_width, w.offdiag_pos, m.diag_width, w.diag_pos
        );
    }
    Ok(())
}
