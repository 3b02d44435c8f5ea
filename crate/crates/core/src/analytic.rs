//! Closed forms for zero-mean Gaussian system and pointer states.
//!
//! Both bases reduce to `A · exp(−a (q + q̄)² − b (q − q̄)²)`. Evaluators are
//! shape evaluators: callers that compare against a grid matrix normalize by
//! the trace on that grid.
//!
//! Position, with `S = σ² + η₂²t²`:
//! `A = (2πS)^{-1/2}`, `a = 1/(8S)`, `b = 1/(8σ²) + t²/(8η₁²)`.
//!
//! Momentum, with `R = η₁² + σ²t²`:
//! `A = (2σ²η₁²/(πR))^{1/2}`, `a = σ²η₁²/(2R)`, `b = σ²/2 + η₂²t²/2`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::DensityMatrix;
use crate::grid::{Basis, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianModel {
    pub sigma: f64,
    pub eta1: f64,
    pub eta2: f64,
}

/// `prefactor · exp(−sum_coeff (q + q̄)² − diff_coeff (q − q̄)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticForm {
    pub prefactor: f64,
    pub sum_coeff: f64,
    pub diff_coeff: f64,
}

impl QuadraticForm {
    pub fn eval(&self, q: f64, qb: f64) -> f64 {
        let s = q + qb;
        let d = q - qb;
        self.prefactor * (-self.sum_coeff * s * s - self.diff_coeff * d * d).exp()
    }

    pub fn is_negative_definite(&self) -> bool {
        self.sum_coeff > 0.0 && self.diff_coeff > 0.0
    }

    /// Standard deviation of the profile along `u = (q − q̄)/√2`.
    pub fn offdiag_width(&self) -> f64 {
        0.5 / self.diff_coeff.sqrt()
    }

    /// Standard deviation of the profile along `v = (q + q̄)/√2`.
    pub fn diag_width(&self) -> f64 {
        0.5 / self.sum_coeff.sqrt()
    }
}

/// Exact Gaussian widths of `|ρ|` along the rotated axes in both bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthReport {
    pub t: f64,
    pub offdiag_pos: f64,
    pub diag_pos: f64,
    pub offdiag_mom: f64,
    pub diag_mom: f64,
}

impl GaussianModel {
    pub fn new(sigma: f64, eta1: f64, eta2: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("eta1", eta1), ("eta2", eta2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(GaussianModel { sigma, eta1, eta2 })
    }

    pub fn reference() -> Self {
        GaussianModel {
            sigma: 1.0,
            eta1: 1.0,
            eta2: 1.0,
        }
    }

    pub fn position_form(&self, t: f64) -> QuadraticForm {
        let (s2, e1, e2) = self.squares();
        let spread = s2 + e2 * t * t;
        QuadraticForm {
            prefactor: (2.0 * PI * spread).sqrt().recip(),
            sum_coeff: 1.0 / (8.0 * spread),
            diff_coeff: 1.0 / (8.0 * s2) + t * t / (8.0 * e1),
        }
    }

    pub fn momentum_form(&self, t: f64) -> QuadraticForm {
        let (s2, e1, e2) = self.squares();
        let r = e1 + s2 * t * t;
        QuadraticForm {
            prefactor: (2.0 * s2 * e1 / (PI * r)).sqrt(),
            sum_coeff: s2 * e1 / (2.0 * r),
            diff_coeff: 0.5 * s2 + 0.5 * e2 * t * t,
        }
    }

    /// Leading large-`t` position form.
    pub fn large_t_position_form(&self, t: f64) -> QuadraticForm {
        let (s2, e1, e2) = self.squares();
        QuadraticForm {
            prefactor: ((2.0 * PI).sqrt() * self.eta2 * t).recip(),
            sum_coeff: 1.0 / (8.0 * e2 * t * t),
            diff_coeff: t * t / (8.0 * e1) + 1.0 / (8.0 * s2),
        }
    }

    /// Leading large-`t` momentum form.
    pub fn large_t_momentum_form(&self, t: f64) -> QuadraticForm {
        let (s2, e1, e2) = self.squares();
        QuadraticForm {
            prefactor: 2f64.sqrt() * self.eta1 / (PI.sqrt() * t),
            sum_coeff: e1 / (2.0 * t * t),
            diff_coeff: 0.5 * e2 * t * t + 0.5 * s2,
        }
    }

    pub fn form(&self, basis: Basis, t: f64) -> QuadraticForm {
        match basis {
            Basis::Position => self.position_form(t),
            Basis::Momentum => self.momentum_form(t),
        }
    }

    fn squares(&self) -> (f64, f64, f64) {
        (
            self.sigma * self.sigma,
            self.eta1 * self.eta1,
            self.eta2 * self.eta2,
        )
    }
}

pub fn analytic_rho_position(model: &GaussianModel, t: f64, x: f64, xb: f64) -> Complex64 {
    Complex64::new(model.position_form(t).eval(x, xb), 0.0)
}

pub fn analytic_rho_momentum(model: &GaussianModel, t: f64, q: f64, qb: f64) -> Complex64 {
    Complex64::new(model.momentum_form(t).eval(q, qb), 0.0)
}

/// Widths read off the exact exponents; valid for every `t ≥ 0`.
pub fn asymptotic_widths(model: &GaussianModel, t: f64) -> WidthReport {
    let pos = model.position_form(t);
    let mom = model.momentum_form(t);
    WidthReport {
        t,
        offdiag_pos: pos.offdiag_width(),
        diag_pos: pos.diag_width(),
        offdiag_mom: mom.offdiag_width(),
        diag_mom: mom.diag_width(),
    }
}

/// Closed form sampled on `grid` with the measure absorbed, trace-normalized.
pub fn analytic_density_matrix(
    model: &GaussianModel,
    t: f64,
    grid: &Grid,
    basis: Basis,
) -> Result<DensityMatrix> {
    let form = model.form(basis, t);
    let points: Vec<f64> = grid.points().collect();
    let dq = grid.spacing();
    let elems = Array2::from_shape_fn((points.len(), points.len()), |(j, k)| {
        Complex64::new(form.eval(points[j], points[k]) * dq, 0.0)
    });
    DensityMatrix::from_kernel(*grid, basis, elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_zero_reduces_to_pure_projector() {
        let m = GaussianModel::new(1.3, 0.7, 2.0).unwrap();
        let s2 = 1.3f64 * 1.3;
        for (x, xb) in [(0.0, 0.0), (0.5, -1.2), (2.0, 1.0)] {
            let pure = (2.0 * PI * s2).sqrt().recip() * (-(x * x + xb * xb) / (4.0 * s2)).exp();
            assert!((analytic_rho_position(&m, 0.0, x, xb).re - pure).abs() < 1e-12);
            let pure_p =
                (2.0 * s2 / PI).sqrt() * (-s2 * (x * x + xb * xb)).exp();
            assert!((analytic_rho_momentum(&m, 0.0, x, xb).re - pure_p).abs() < 1e-12);
        }
    }

    #[test]
    fn forms_are_negative_definite() {
        for (s, a, b) in [(1.0, 1.0, 1.0), (3.0, 0.2, 0.2), (0.1, 5.0, 0.3)] {
            let m = GaussianModel::new(s, a, b).unwrap();
            for t in [0.0, 0.5, 10.0, 100.0] {
                assert!(m.position_form(t).is_negative_definite());
                assert!(m.momentum_form(t).is_negative_definite());
            }
        }
    }

    #[test]
    fn anti_diagonal_profile_matches_large_t_form() {
        let m = GaussianModel::reference();
        let t = 10.0;
        let exact = m.position_form(t);
        let large = m.large_t_position_form(t);
        let w = exact.offdiag_width();
        for k in 0..=8 {
            let u = k as f64 * 0.5 * w;
            let (x, xb) = (u / 2f64.sqrt(), -u / 2f64.sqrt());
            let rel = (exact.eval(x, xb) - large.eval(x, xb)).abs() / exact.eval(x, xb);
            assert!(rel < 0.01, "u = {u}, rel = {rel}");
        }
    }

    #[test]
    fn momentum_anti_diagonal_width_scales_inversely_with_eta2_t() {
        let m = GaussianModel::reference();
        let t = 10.0;
        let w = asymptotic_widths(&m, t).offdiag_mom;
        // |ρ| ∝ exp(−(q−q̄)² η₂²t²/2 ...) ⇒ std along u is 1/(√2 η₂ t) to leading order.
        let leading = 1.0 / (2f64.sqrt() * m.eta2 * t);
        assert!((w / leading - 1.0).abs() < 0.02);
    }

    #[test]
    fn width_duality_is_exact() {
        for (s, a, b) in [(1.0, 1.0, 1.0), (2.0, 0.5, 1.5)] {
            let m = GaussianModel::new(s, a, b).unwrap();
            for t in [0.5, 5.0, 50.0] {
                let w = asymptotic_widths(&m, t);
                assert!((w.offdiag_mom * w.diag_pos - 1.0).abs() < 1e-12);
                assert!((w.offdiag_pos * w.diag_mom - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn width_scaling_constants() {
        let m = GaussianModel::reference();
        let w10 = asymptotic_widths(&m, 10.0);
        for t in [20.0, 50.0, 100.0] {
            let w = asymptotic_widths(&m, t);
            assert!((w.offdiag_pos * t / (w10.offdiag_pos * 10.0) - 1.0).abs() < 0.01);
            assert!((w.diag_pos / t / (w10.diag_pos / 10.0) - 1.0).abs() < 0.01);
        }
    }
}
