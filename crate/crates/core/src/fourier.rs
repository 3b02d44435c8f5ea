//! Unitary discrete Fourier transforms between a grid and its dual, plus
//! band-limited (trigonometric) interpolation of sampled functions.
//!
//! Amplitudes are carried with the measure absorbed, `a_j = f(q_j) * sqrt(dq)`,
//! so the transform is a plain unitary matrix
//! `b_k = n^{-1/2} * sum_j exp(∓ i k'_k q_j) a_j`, with the minus sign for
//! position → momentum (`ψ̃(p) = (2π)^{-1/2} ∫ ψ(x) e^{-ipx} dx`).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Basis, Grid};

pub(crate) struct UnitaryDft {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    target: Grid,
}

impl UnitaryDft {
    /// Transform from `source` (sampled in `from`) onto `source.dual()`.
    pub(crate) fn new(source: &Grid, from: Basis) -> Self {
        let n = source.len();
        let target = source.dual();
        let sign = match from {
            Basis::Position => -1.0,
            Basis::Momentum => 1.0,
        };
        let mut planner = FftPlanner::new();
        let fft = match from {
            Basis::Position => planner.plan_fft_forward(n),
            Basis::Momentum => planner.plan_fft_inverse(n),
        };
        let (q0, d) = (source.min(), source.spacing());
        let (k0, dk) = (target.min(), target.spacing());
        let scale = 1.0 / (n as f64).sqrt();
        let pre = (0..n)
            .map(|j| Complex64::cis(sign * k0 * d * j as f64))
            .collect();
        let post = (0..n)
            .map(|k| Complex64::cis(sign * (k0 * q0 + k as f64 * dk * q0)) * scale)
            .collect();
        UnitaryDft {
            fft,
            pre,
            post,
            target,
        }
    }

    pub(crate) fn target(&self) -> Grid {
        self.target
    }

    /// In-place transform of a measure-weighted vector.
    pub(crate) fn apply(&self, buf: &mut [Complex64]) {
        for (b, p) in buf.iter_mut().zip(&self.pre) {
            *b *= p;
        }
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(buf, &mut scratch);
        for (b, p) in buf.iter_mut().zip(&self.post) {
            *b *= p;
        }
    }
}

/// Trigonometric interpolant through samples on a periodic grid.
///
/// Evaluates to zero outside the sampled range; callers only interpolate
/// functions that have decayed before the grid edges.
#[derive(Debug, Clone)]
pub(crate) struct Interpolant {
    grid: Grid,
    /// `coeffs[m]` for frequency index `m` in FFT order, already divided by n.
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub(crate) fn new(grid: Grid, samples: &[Complex64]) -> Self {
        let n = grid.len();
        debug_assert_eq!(samples.len(), n);
        let mut coeffs = samples.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut coeffs);
        let inv = 1.0 / n as f64;
        coeffs.iter_mut().for_each(|c| *c *= inv);
        Interpolant { grid, coeffs }
    }

    pub(crate) fn eval(&self, q: f64) -> Complex64 {
        let d = self.grid.spacing();
        if q < self.grid.min() - 0.5 * d || q > self.grid.last() + 0.5 * d {
            return Complex64::default();
        }
        let n = self.coeffs.len();
        let theta = 2.0 * PI * (q - self.grid.min()) / (n as f64 * d);
        let step = Complex64::cis(theta);
        let mut acc = self.coeffs[0];
        let mut z = Complex64::new(1.0, 0.0);
        // Re-anchor the running power periodically to bound drift.
        for m in 1..n.div_ceil(2) {
            z = if m % 64 == 0 {
                Complex64::cis(theta * m as f64)
            } else {
                z * step
            };
            acc += self.coeffs[m] * z + self.coeffs[n - m] * z.conj();
        }
        if n.is_multiple_of(2) {
            acc += self.coeffs[n / 2] * (theta * (n / 2) as f64).cos();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_is_unitary_and_invertible() {
        let g = Grid::symmetric(64, 6.0).unwrap();
        let v: Vec<Complex64> = (0..64)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let fwd = UnitaryDft::new(&g, Basis::Position);
        let mut w = v.clone();
        fwd.apply(&mut w);
        let norm_w: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - norm_w).abs() < 1e-12 * norm);
        let back = UnitaryDft::new(&fwd.target(), Basis::Momentum);
        back.apply(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_matches_direct_sum() {
        let g = Grid::new(12, -2.3, 4.1).unwrap();
        let v: Vec<Complex64> = (0..12).map(|j| Complex64::new(j as f64, 1.0)).collect();
        let dft = UnitaryDft::new(&g, Basis::Position);
        let mut w = v.clone();
        dft.apply(&mut w);
        let t = dft.target();
        for (k, p) in t.points().enumerate() {
            let direct: Complex64 = g
                .points()
                .zip(&v)
                .map(|(x, a)| a * Complex64::cis(-p * x))
                .sum::<Complex64>()
                / 12f64.sqrt();
            assert!((direct - w[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn interpolant_reproduces_samples_and_band_limited_functions() {
        let g = Grid::symmetric(128, 15.0).unwrap();
        let f = |x: f64| Complex64::new((-x * x / 4.0).exp(), 0.0) * Complex64::cis(0.7 * x);
        let samples: Vec<_> = g.points().map(f).collect();
        let interp = Interpolant::new(g, &samples);
        for (j, x) in g.points().enumerate() {
            assert!((interp.eval(x) - samples[j]).norm() < 1e-12);
        }
        for x in [-3.21, 0.05, 1.777, 6.5] {
            assert!((interp.eval(x) - f(x)).norm() < 1e-10, "x = {x}");
        }
        assert_eq!(interp.eval(40.0), Complex64::default());
    }
}
