//! Brute-force reduced density matrix from the full tripartite state.
//!
//! The joint amplitude is built on three small grids, transported by the
//! exact shift map, and both pointers are traced out numerically. A pointer
//! shift is applied as a phase in that pointer's conjugate variable
//! (band-limited resampling on its periodic grid), so the pointer trace runs
//! over the conjugate index; by Parseval this is the same trace.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::UnitaryDft;
use crate::grid::{Basis, Grid};
use crate::linalg;

use super::density::DensityMatrix;
use super::kernel::{Mass, ModelParams};

/// Largest axis the oracle accepts; the joint state grows as the cube.
pub const ORACLE_AXIS_CAP: usize = 64;

/// `-ln` of the aliasing level tolerated on the periodic pointer axis.
const ALIAS_EXPONENT: f64 = 11.5;
/// Minimum pointer span in density standard deviations.
const MIN_POINTER_SPAN: f64 = 18.0;

/// Pointer axis sizes used by the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrids {
    /// Points on the pointer that records the measured variable (shifted axis).
    pub shifted_points: usize,
    /// Points on the pointer whose density weights the drift (traced axis).
    pub drift_points: usize,
}

impl OracleGrids {
    pub fn uniform(points: usize) -> Self {
        OracleGrids {
            shifted_points: points,
            drift_points: points,
        }
    }
}

/// Reduced density matrix from the tripartite state on `grid`, with both
/// pointer axes the same size as `grid`.
pub fn brute_force_reduced(
    params: &ModelParams,
    grid: &Grid,
    basis: Basis,
) -> Result<DensityMatrix> {
    brute_force_reduced_with(params, grid, basis, OracleGrids::uniform(grid.len()))
}

pub fn brute_force_reduced_with(
    params: &ModelParams,
    grid: &Grid,
    basis: Basis,
    axes: OracleGrids,
) -> Result<DensityMatrix> {
    params.validate()?;
    for requested in [grid.len(), axes.shifted_points, axes.drift_points] {
        if requested > ORACLE_AXIS_CAP {
            return Err(Error::OracleCap {
                requested,
                cap: ORACLE_AXIS_CAP,
            });
        }
    }
    params.check_grid(basis, grid)?;
    if basis == Basis::Position && !params.mass.is_infinite() {
        return Err(Error::Config(
            "oracle includes kinetic phases in the momentum basis only".into(),
        ));
    }
    let t = params.t;
    // Shifted pointer: E₁ (in y₁) for position, Ẽ₂ (in p₂) for momentum.
    // Drift pointer: E₂ (in y₂) for position, Ẽ₁ (in p₁) for momentum.
    let (shifted_env, drift_env) = match basis {
        Basis::Position => (&params.env1, &params.env2),
        Basis::Momentum => (&params.env2, &params.env1),
    };

    // Period of the shifted pointer axis must exceed every shift at which the
    // kernel is still non-negligible: exp(-T² / (8 (b² + a² t²))) ≤ e^{-11.5}.
    let a = params.system.density_std(basis);
    let b = shifted_env.density_std(basis);
    let period = (8.0 * ALIAS_EXPONENT * (b * b + a * a * t * t))
        .sqrt()
        .max(MIN_POINTER_SPAN * b);
    let shifted_center = shifted_env.density_mean(basis);
    let shifted_grid = Grid::centered(axes.shifted_points, period / axes.shifted_points as f64)?;
    let mut shifted: Vec<Complex64> = shifted_grid
        .points()
        .map(|q| shifted_env.amplitude(basis, q + shifted_center) * shifted_grid.spacing().sqrt())
        .collect();
    let dft = UnitaryDft::new(&shifted_grid, basis);
    dft.apply(&mut shifted);
    let conjugate: Vec<f64> = dft.target().points().collect();
    // Undo the recentering: a translation by `shifted_center` is a phase.
    let sign = match basis {
        Basis::Position => -1.0,
        Basis::Momentum => 1.0,
    };
    for (s, &k) in shifted.iter_mut().zip(&conjugate) {
        *s *= Complex64::cis(sign * k * shifted_center);
    }

    let (lo, hi) = drift_env.support(basis);
    let dn = axes.drift_points;
    let dh = (hi - lo) / (dn - 1) as f64;
    let drift: Vec<(f64, Complex64)> = (0..dn)
        .map(|i| {
            let y = lo + i as f64 * dh;
            (y, drift_env.amplitude(basis, y) * dh.sqrt())
        })
        .collect();

    let n = grid.len();
    let sq = grid.spacing().sqrt();
    let width = shifted.len() * drift.len();
    let mut factor = Array2::<Complex64>::zeros((n, width));
    for (j, q) in grid.points().enumerate() {
        for (b_idx, &(y, e_drift)) in drift.iter().enumerate() {
            let (sys, shift) = match basis {
                // Φ(X, y₁, y₂) = ψ(X − y₂t) E₁(y₁ − [Xt − ½y₂t²]) E₂(y₂)
                Basis::Position => (
                    params.system.amplitude(basis, q - y * t),
                    q * t - 0.5 * y * t * t,
                ),
                // Φ̃(P, p₁, p₂) = ψ̃(P + p₁t) Ẽ₁(p₁) Ẽ₂(p₂ + [Pt + ½p₁t²])
                Basis::Momentum => (
                    params.system.amplitude(basis, q + y * t),
                    -(q * t + 0.5 * y * t * t),
                ),
            };
            let kinetic = kinetic_phase(params.mass, q, y, t);
            let base = sys * e_drift * kinetic * sq;
            for (a_idx, (&e_shift, &k)) in shifted.iter().zip(&conjugate).enumerate() {
                // f(q − c) ↔ f̂(k) e^{-ikc} (position); f̃(p − c) ↔ f(y) e^{+iyc}.
                let phase = Complex64::cis(sign * k * shift);
                factor[(j, b_idx * shifted.len() + a_idx)] = base * e_shift * phase;
            }
        }
    }
    DensityMatrix::from_kernel(*grid, basis, linalg::gram(&factor))
}

/// Free-particle phase accumulated along the characteristic ending at
/// momentum `p` with pointer momentum `p1`.
fn kinetic_phase(mass: Mass, p: f64, p1: f64, t: f64) -> Complex64 {
    match mass {
        Mass::Infinite => Complex64::new(1.0, 0.0),
        Mass::Finite(m) => {
            let action = p * p * t + p * p1 * t * t + p1 * p1 * t * t * t / 3.0;
            Complex64::cis(-action / (2.0 * m))
        }
    }
}
