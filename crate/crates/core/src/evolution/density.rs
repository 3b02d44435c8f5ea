use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::UnitaryDft;
use crate::grid::{Basis, Grid};
use crate::linalg;
use crate::wavepacket::WavePacket;

pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Reduced density matrix on a grid with the quadrature measure absorbed:
/// `elems[(j, k)] ≈ ρ(q_j, q_k) dq`, so the trace is a plain diagonal sum.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: Grid,
    basis: Basis,
    elems: Array2<Complex64>,
    raw_trace: f64,
}

/// Invariant residuals of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn passes(&self) -> bool {
        self.trace_error <= TRACE_TOLERANCE
            && self.hermiticity_error <= HERMITICITY_TOLERANCE
            && self.min_eigenvalue >= -PSD_TOLERANCE
    }
}

impl DensityMatrix {
    /// Wrap measure-weighted kernel values, renormalizing to unit trace.
    ///
    /// The matrix is Hermitian-symmetrized from its upper triangle; the trace
    /// before renormalization is kept as [`DensityMatrix::raw_trace`].
    pub fn from_kernel(grid: Grid, basis: Basis, mut elems: Array2<Complex64>) -> Result<Self> {
        let n = grid.len();
        if elems.dim() != (n, n) {
            return Err(Error::Grid(format!(
                "matrix of shape {:?} on a {n}-point grid",
                elems.dim()
            )));
        }
        for j in 0..n {
            elems[(j, j)] = Complex64::new(elems[(j, j)].re, 0.0);
            for k in j + 1..n {
                elems[(k, j)] = elems[(j, k)].conj();
            }
        }
        let raw_trace: f64 = (0..n).map(|j| elems[(j, j)].re).sum();
        if !(raw_trace > 0.0 && raw_trace.is_finite()) {
            return Err(Error::Invariant(format!(
                "kernel trace {raw_trace} cannot be normalized"
            )));
        }
        elems.mapv_inplace(|e| e / raw_trace);
        Ok(DensityMatrix {
            grid,
            basis,
            elems,
            raw_trace,
        })
    }

    /// `|ψ⟩⟨ψ|` for a sampled packet.
    pub fn pure(wp: &WavePacket) -> Self {
        let dq = wp.grid().spacing();
        let a = wp.amplitudes();
        let elems = Array2::from_shape_fn((a.len(), a.len()), |(j, k)| a[j] * a[k].conj() * dq);
        Self::from_kernel(*wp.grid(), wp.basis(), elems).expect("normalized packet")
    }

    /// `I / n`.
    pub fn maximally_mixed(grid: Grid, basis: Basis) -> Self {
        let n = grid.len();
        let elems = Array2::from_shape_fn((n, n), |(j, k)| {
            if j == k {
                Complex64::new(1.0 / n as f64, 0.0)
            } else {
                Complex64::default()
            }
        });
        DensityMatrix {
            grid,
            basis,
            elems,
            raw_trace: 1.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn elems(&self) -> &Array2<Complex64> {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trace of the kernel before renormalization (a discretization diagnostic).
    pub fn raw_trace(&self) -> f64 {
        self.raw_trace
    }

    pub fn trace(&self) -> Complex64 {
        self.elems.diag().sum()
    }

    /// Diagonal as probabilities per grid cell.
    pub fn diagonal(&self) -> Vec<f64> {
        self.elems.diag().iter().map(|e| e.re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.elems[(j, k)] - self.elems[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr ρ²`, via the Frobenius norm of a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        self.elems.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.elems)
    }

    pub fn invariants(&self) -> Result<InvariantReport> {
        let ev = self.eigenvalues()?;
        Ok(InvariantReport {
            trace_error: (self.trace() - 1.0).norm(),
            hermiticity_error: self.hermiticity_error(),
            min_eigenvalue: ev.first().copied().unwrap_or(0.0),
        })
    }

    /// Fail unless every invariant holds at the standard tolerances.
    pub fn check(&self) -> Result<InvariantReport> {
        let report = self.invariants()?;
        if report.min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: report.min_eigenvalue,
            });
        }
        if !report.passes() {
            return Err(Error::Invariant(format!("{report:?}")));
        }
        Ok(report)
    }

    /// Largest elementwise difference to another matrix on the same grid.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.elems.dim(), other.elems.dim(), "grid mismatch");
        self.elems
            .iter()
            .zip(other.elems.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Conjugate `ρ` by the unitary DFT onto the dual grid of the other basis.
pub fn basis_change(rho: &DensityMatrix) -> DensityMatrix {
    let dft = UnitaryDft::new(&rho.grid, rho.basis);
    let n = rho.len();
    // M = U ρ, column by column; ρ Hermitian so column c is conj(row c).
    let mut mt = rho.elems.mapv(|e| e.conj());
    mt.axis_iter_mut(Axis(0))
        .into_par_iter()
        .for_each(|mut row| dft.apply(row.as_slice_mut().expect("standard layout")));
    // mt holds Mᵀ; ρ' = U M† and the columns of M† are conj(rows of M) = conj(cols of Mᵀ).
    let mut out = Array2::from_shape_fn((n, n), |(c, j)| mt[(j, c)].conj());
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .for_each(|mut row| dft.apply(row.as_slice_mut().expect("standard layout")));
    // out rows are columns of ρ'.
    let elems = out.reversed_axes().as_standard_layout().to_owned();
    let mut changed = DensityMatrix {
        grid: dft.target(),
        basis: rho.basis.conjugate(),
        elems,
        raw_trace: rho.raw_trace,
    };
    for j in 0..n {
        changed.elems[(j, j)].im = 0.0;
        for k in j + 1..n {
            changed.elems[(k, j)] = changed.elems[(j, k)].conj();
        }
    }
    changed
}

/// Probabilities on a grid, measure absorbed, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalDistribution {
    grid: Grid,
    basis: Basis,
    probs: Vec<f64>,
    raw_sum: f64,
}

impl DiagonalDistribution {
    /// Normalize nonnegative weights.
    pub fn from_weights(grid: Grid, basis: Basis, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} weights for a {}-point grid",
                weights.len(),
                grid.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Invariant(format!("negative probability weight {w}")));
        }
        let raw_sum: f64 = weights.iter().sum();
        if !(raw_sum > 0.0 && raw_sum.is_finite()) {
            return Err(Error::Invariant(format!("weights sum to {raw_sum}")));
        }
        let probs = weights.into_iter().map(|w| w / raw_sum).collect();
        Ok(DiagonalDistribution {
            grid,
            basis,
            probs,
            raw_sum,
        })
    }

    pub fn from_density_matrix(rho: &DensityMatrix) -> Result<Self> {
        let w = rho.diagonal().into_iter().map(|p| p.max(0.0)).collect();
        Self::from_weights(rho.grid, rho.basis, w)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    /// Probability density `P(q_j) = probs[j] / dq`.
    pub fn density(&self) -> Vec<f64> {
        let dq = self.grid.spacing();
        self.probs.iter().map(|p| p / dq).collect()
    }

    pub fn mean(&self) -> f64 {
        self.grid.points().zip(&self.probs).map(|(q, p)| q * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.grid
            .points()
            .zip(&self.probs)
            .map(|(q, p)| (q - m).powi(2) * p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{sample_gaussian, GaussianSpec};

    fn gaussian_projector(n: usize, half: f64) -> DensityMatrix {
        let g = Grid::symmetric(n, half).unwrap();
        DensityMatrix::pure(&sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &g).unwrap())
    }

    #[test]
    fn pure_projector_invariants() {
        let rho = gaussian_projector(128, 12.0);
        let rep = rho.check().unwrap();
        assert!(rep.trace_error < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn basis_change_of_gaussian_projector() {
        let rho = gaussian_projector(128, 12.0);
        let mom = basis_change(&rho);
        assert_eq!(mom.basis(), Basis::Momentum);
        let dist = DiagonalDistribution::from_density_matrix(&mom).unwrap();
        assert!((dist.variance().sqrt() - 0.5).abs() < 1e-6);
        assert!((mom.trace() - 1.0).norm() < 1e-10);
        assert!(mom.hermiticity_error() <= HERMITICITY_TOLERANCE);
        let back = basis_change(&mom);
        assert!(back.max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn basis_change_fixes_maximally_mixed() {
        let g = Grid::symmetric(32, 5.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(g, Basis::Position);
        let changed = basis_change(&mixed);
        let expected = DensityMatrix::maximally_mixed(g.dual(), Basis::Momentum);
        assert!(changed.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn distribution_rejects_negative_weights() {
        let g = Grid::symmetric(8, 1.0).unwrap();
        assert!(DiagonalDistribution::from_weights(g, Basis::Position, vec![-1.0; 8]).is_err());
        let d = DiagonalDistribution::from_weights(g, Basis::Position, vec![2.0; 8]).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(d.raw_sum(), 16.0);
    }
}
