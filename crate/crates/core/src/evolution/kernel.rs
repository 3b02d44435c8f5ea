//! Factorized reduced-density kernels.
//!
//! With `H_int = x p₁ + p y₂` the joint wavefunction is transported along
//! `(x, y₁, y₂) → (x + y₂t, y₁ + xt + ½y₂t², y₂)` with no phase, and tracing
//! out both pointers gives, exactly,
//!
//! ```text
//! ρ(X, X̄) = D₁((X − X̄)t)   ∫ dy₂ |E₂(y₂)|² ψ(X − y₂t) ψ*(X̄ − y₂t)
//! ρ(P, P̄) = D̃₂(−(P − P̄)t) ∫ dp₁ |Ẽ₁(p₁)|² ψ̃(P + p₁t) ψ̃*(P̄ + p₁t)
//! ```
//!
//! where `D(s) = ∫ E(q) E*(q + s) dq`. A free-particle term `p²/2m` adds the
//! phase `exp(−i[P²t + P p₁t²]/2m)` per ket (its conjugate per bra).

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Basis, Grid};
use crate::linalg;
use crate::wavepacket::{DecoherenceFactor, WaveFunction};

use super::density::{DensityMatrix, DiagonalDistribution};

/// System mass; `Infinite` drops the free Hamiltonian (interaction-dominated).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Mass {
    Infinite,
    Finite(f64),
}

impl Mass {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Mass::Infinite)
    }
}

/// Initial product state and evolution time.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub t: f64,
    pub mass: Mass,
    pub system: WaveFunction,
    /// Pointer coupled to position (`x p₁`).
    pub env1: WaveFunction,
    /// Pointer coupled to momentum (`p y₂`).
    pub env2: WaveFunction,
}

impl ModelParams {
    /// Zero-mean Gaussians for system and both environments, infinite mass.
    pub fn gaussian(sigma: f64, eta1: f64, eta2: f64, t: f64) -> Result<Self> {
        let params = ModelParams {
            t,
            mass: Mass::Infinite,
            system: WaveFunction::gaussian(0.0, sigma)?,
            env1: WaveFunction::gaussian(0.0, eta1)?,
            env2: WaveFunction::gaussian(0.0, eta2)?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn at_time(&self, t: f64) -> Self {
        ModelParams { t, ..self.clone() }
    }

    pub fn with_mass(self, mass: Mass) -> Self {
        ModelParams { mass, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::Config(format!("time must be finite and ≥ 0, got {}", self.t)));
        }
        if let Mass::Finite(m) = self.mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Config(format!("mass must be positive, got {m}")));
            }
        }
        Ok(())
    }

    /// Interval in `basis` the reduced state occupies at time `t`.
    pub fn occupied_range(&self, basis: Basis) -> (f64, f64) {
        let t = self.t;
        let (a, b) = self.system.support(basis);
        match basis {
            // X = x + y₂ t
            Basis::Position => {
                let (c, d) = self.env2.support(Basis::Position);
                (a + t * c, b + t * d)
            }
            // P = p − p₁ t
            Basis::Momentum => {
                let (c, d) = self.env1.support(Basis::Momentum);
                (a - t * d, b - t * c)
            }
        }
    }

    /// Smallest symmetric half-width that keeps the state tail-contained.
    pub fn required_half_width(&self, basis: Basis) -> f64 {
        let (lo, hi) = self.occupied_range(basis);
        lo.abs().max(hi.abs())
    }

    /// Refuse grids the state would wrap around.
    pub fn check_grid(&self, basis: Basis, grid: &Grid) -> Result<()> {
        let (lo, hi) = self.occupied_range(basis);
        let slack = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
        if grid.min() > lo + slack || grid.last() < hi - slack {
            return Err(Error::SupportOverflow {
                basis,
                t: self.t,
                half_width: grid.half_width(),
                required: lo.abs().max(hi.abs()),
            });
        }
        Ok(())
    }
}

/// Upper bound on pointer quadrature nodes per kernel.
const MAX_POINTER_NODES: usize = 200_000;
/// Pointer quadrature step, as a fraction of the narrowest integrand scale.
const NODES_PER_SCALE: f64 = 4.0;

/// Pointwise evaluator of the factorized kernel in one basis.
///
/// The decoherence factor comes from an FFT autocorrelation of the sampled
/// environment; the pointer integral is a uniform quadrature.
#[derive(Debug, Clone)]
pub struct FactorizedKernel {
    basis: Basis,
    t: f64,
    mass: Mass,
    system: WaveFunction,
    decoherence: DecoherenceFactor,
    /// `D` is evaluated at `decoherence_sign · (q − q̄) · t`.
    decoherence_sign: f64,
    /// The system is evaluated at `q + drift_sign · y · t`.
    drift_sign: f64,
    nodes: Vec<f64>,
    /// Quadrature weight times pointer density.
    weights: Vec<f64>,
}

impl FactorizedKernel {
    pub fn new(params: &ModelParams, basis: Basis) -> Result<Self> {
        params.validate()?;
        if basis == Basis::Position && !params.mass.is_infinite() {
            return Err(Error::Config(
                "the position kernel covers the interaction-dominated regime; use infinite mass"
                    .into(),
            ));
        }
        let (decoherence_env, pointer_env, decoherence_sign, drift_sign) = match basis {
            Basis::Position => (&params.env1, &params.env2, 1.0, -1.0),
            Basis::Momentum => (&params.env2, &params.env1, -1.0, 1.0),
        };
        let decoherence = decoherence_env.decoherence_factor(basis)?;
        let (lo, hi) = pointer_env.support(basis);
        let mut scale = pointer_env.resolution(basis);
        if params.t > 0.0 {
            scale = scale.min(params.system.resolution(basis) / params.t);
        }
        let step = scale / NODES_PER_SCALE;
        let count = ((hi - lo) / step).ceil() as usize + 1;
        if count > MAX_POINTER_NODES {
            return Err(Error::Config(format!(
                "pointer quadrature would need {count} nodes (cap {MAX_POINTER_NODES}) at t = {}",
                params.t
            )));
        }
        let h = (hi - lo) / (count - 1) as f64;
        let nodes: Vec<f64> = (0..count).map(|i| lo + i as f64 * h).collect();
        let weights = nodes
            .iter()
            .map(|&y| h * pointer_env.amplitude(basis, y).norm_sqr())
            .collect();
        Ok(FactorizedKernel {
            basis,
            t: params.t,
            mass: params.mass,
            system: params.system.clone(),
            decoherence,
            decoherence_sign,
            drift_sign,
            nodes,
            weights,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn pointer_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn decoherence(&self, delta: f64) -> Complex64 {
        self.decoherence.eval(self.decoherence_sign * delta * self.t)
    }

    /// Ket factor for grid point `q` and pointer node `y`.
    fn ket(&self, q: f64, y: f64) -> Complex64 {
        let amp = self
            .system
            .amplitude(self.basis, q + self.drift_sign * y * self.t);
        match self.mass {
            Mass::Infinite => amp,
            Mass::Finite(m) => {
                let t = self.t;
                amp * Complex64::cis(-(q * q * t + q * y * t * t) / (2.0 * m))
            }
        }
    }

    /// Kernel density `ρ(q, q̄)` (no measure factor, no renormalization).
    pub fn eval(&self, q: f64, qb: f64) -> Complex64 {
        let sum: Complex64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| self.ket(q, y) * self.ket(qb, y).conj() * w)
            .sum();
        self.decoherence(q - qb) * sum
    }

    /// Diagonal `ρ(q, q)`; the decoherence factor is `D(0) = 1` there.
    pub fn eval_diagonal(&self, q: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * self.ket(q, y).norm_sqr())
            .sum()
    }

    /// Measure-weighted kernel values on `grid`, before renormalization.
    pub fn sample(&self, grid: &Grid) -> Array2<Complex64> {
        let n = grid.len();
        let m = self.nodes.len();
        let points: Vec<f64> = grid.points().collect();
        let mut factor = Array2::<Complex64>::zeros((n, m));
        factor
            .axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .zip(points.par_iter())
            .for_each(|(mut row, &q)| {
                for (i, (&y, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
                    row[i] = self.ket(q, y) * w.sqrt();
                }
            });
        let mut elems = linalg::gram(&factor);
        let dq = grid.spacing();
        // Toeplitz decoherence factor: depends only on j − k.
        let lags: Vec<Complex64> = (0..2 * n - 1)
            .into_par_iter()
            .map(|l| self.decoherence((l as f64 - (n - 1) as f64) * dq) * dq)
            .collect();
        elems
            .indexed_iter_mut()
            .for_each(|((j, k), e)| *e *= lags[j + n - 1 - k]);
        elems
    }

    pub fn density_matrix(&self, grid: &Grid) -> Result<DensityMatrix> {
        DensityMatrix::from_kernel(*grid, self.basis, self.sample(grid))
    }
}

fn kernel_on_grid(params: &ModelParams, grid: &Grid, basis: Basis) -> Result<DensityMatrix> {
    params.validate()?;
    params.check_grid(basis, grid)?;
    FactorizedKernel::new(params, basis)?.density_matrix(grid)
}

/// Position-basis reduced density matrix (infinite mass).
pub fn position_kernel(params: &ModelParams, grid: &Grid) -> Result<DensityMatrix> {
    kernel_on_grid(params, grid, Basis::Position)
}

/// Momentum-basis reduced density matrix (infinite mass).
pub fn momentum_kernel(params: &ModelParams, grid: &Grid) -> Result<DensityMatrix> {
    if !params.mass.is_infinite() {
        return Err(Error::Config(
            "momentum_kernel is the interaction-dominated limit; use free_particle_momentum_kernel for finite mass"
                .into(),
        ));
    }
    kernel_on_grid(params, grid, Basis::Momentum)
}

/// Momentum-basis reduced density matrix including the free `p²/2m` term.
pub fn free_particle_momentum_kernel(params: &ModelParams, grid: &Grid) -> Result<DensityMatrix> {
    if params.mass.is_infinite() {
        return Err(Error::Config("free-particle kernel needs a finite mass".into()));
    }
    kernel_on_grid(params, grid, Basis::Momentum)
}

/// Long-time diagonal distribution: `|ψ|²` convolved with the t-scaled
/// pointer density (the diagonal of the full kernel).
pub fn long_time_diagonal(
    params: &ModelParams,
    grid: &Grid,
    basis: Basis,
) -> Result<DiagonalDistribution> {
    if !(params.t > 0.0) {
        return Err(Error::Config(format!(
            "long-time diagonal needs t > 0, got {}",
            params.t
        )));
    }
    params.check_grid(basis, grid)?;
    let kernel = FactorizedKernel::new(&params.clone().with_mass(Mass::Infinite), basis)?;
    let points: Vec<f64> = grid.points().collect();
    let dq = grid.spacing();
    let weights = points
        .par_iter()
        .map(|&q| kernel.eval_diagonal(q) * dq)
        .collect();
    DiagonalDistribution::from_weights(*grid, basis, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(t: f64) -> ModelParams {
        ModelParams::gaussian(1.0, 1.0, 1.0, t).unwrap()
    }

    #[test]
    fn sizing_rule_for_reference_model() {
        let p = reference(10.0);
        assert!((p.required_half_width(Basis::Position) - 88.0).abs() < 1e-12);
        assert!((p.required_half_width(Basis::Momentum) - 44.0).abs() < 1e-12);
        let small = Grid::symmetric(256, 20.0).unwrap();
        match position_kernel(&p, &small) {
            Err(Error::SupportOverflow { required, .. }) => assert!((required - 88.0).abs() < 1e-12),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn t_zero_is_pure() {
        let p = reference(0.0);
        let g = Grid::symmetric(128, 10.0).unwrap();
        let rho = position_kernel(&p, &g).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-9);
        let rho = momentum_kernel(&p, &Grid::symmetric(128, 6.0).unwrap()).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn long_time_diagonal_variance() {
        let p = reference(10.0);
        let g = Grid::symmetric(1024, 100.0).unwrap();
        let d = long_time_diagonal(&p, &g, Basis::Position).unwrap();
        assert!((d.variance() - 101.0).abs() / 101.0 < 1e-6);
        assert!(long_time_diagonal(&reference(0.0), &g, Basis::Position).is_err());
    }

    #[test]
    fn mass_regime_is_enforced() {
        let p = reference(1.0).with_mass(Mass::Finite(1.0));
        let g = Grid::symmetric(64, 20.0).unwrap();
        assert!(position_kernel(&p, &g).is_err());
        assert!(momentum_kernel(&p, &g).is_err());
        assert!(free_particle_momentum_kernel(&reference(1.0), &g).is_err());
    }
}
