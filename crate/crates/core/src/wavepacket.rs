//! One-dimensional wavefunctions on uniform grids: construction,
//! normalization, Fourier transforms and autocorrelation.
//!
//! Units are natural (`ħ = 1`). A Gaussian's `sigma` is the standard
//! deviation of the probability density `|ψ|²`, so its amplitude is
//! `exp(-(x - mean)² / (4 sigma²))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Interpolant, UnitaryDft};
use crate::grid::{Basis, Grid};

/// Quadrature-norm tolerance every constructed packet satisfies.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Endpoint amplitudes must sit below this fraction of the peak amplitude.
pub const TAIL_FRACTION: f64 = 1e-8;
/// Required distance from a Gaussian's mean to either grid edge, in sigmas.
pub const GAUSSIAN_MARGIN: f64 = 8.0;

/// Zero-momentum Gaussian packet parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: f64,
    /// Standard deviation of the position density.
    pub sigma: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mean.is_finite() {
            return Err(Error::Config(format!(
                "gaussian needs finite mean and sigma > 0, got mean={mean}, sigma={sigma}"
            )));
        }
        Ok(GaussianSpec { mean, sigma })
    }

    pub fn centered(sigma: f64) -> Result<Self> {
        Self::new(0.0, sigma)
    }

    /// Closed-form amplitude in either basis.
    ///
    /// Momentum amplitude: `e^{-ipμ} (2σ²/π)^{1/4} exp(-σ² p²)`.
    pub fn amplitude(&self, basis: Basis, q: f64) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        match basis {
            Basis::Position => {
                let d = q - self.mean;
                let norm = (2.0 * PI * s2).powf(-0.25);
                Complex64::new(norm * (-d * d / (4.0 * s2)).exp(), 0.0)
            }
            Basis::Momentum => {
                let norm = (2.0 * s2 / PI).powf(0.25);
                Complex64::cis(-q * self.mean) * (norm * (-s2 * q * q).exp())
            }
        }
    }

    pub fn density_mean(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Position => self.mean,
            Basis::Momentum => 0.0,
        }
    }

    pub fn density_std(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Position => self.sigma,
            Basis::Momentum => 0.5 / self.sigma,
        }
    }

    /// Check the `8σ` margin between the mean and both sampled endpoints.
    pub fn check_margins(&self, basis: Basis, grid: &Grid) -> Result<()> {
        let mean = self.density_mean(basis);
        let std = self.density_std(basis);
        let need = GAUSSIAN_MARGIN * std;
        let upper = grid.last() - mean;
        let lower = mean - grid.min();
        let mut problems = Vec::new();
        if upper < need {
            problems.push(format!(
                "upper margin {upper:.4} < {GAUSSIAN_MARGIN}σ = {need:.4}"
            ));
        }
        if lower < need {
            problems.push(format!(
                "lower margin {lower:.4} < {GAUSSIAN_MARGIN}σ = {need:.4}"
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::TailContainment(format!(
                "{basis} grid [{}, {}) for gaussian (mean {mean}, std {std}): {}",
                grid.min(),
                grid.max(),
                problems.join("; ")
            )))
        }
    }

    /// Sample in the given basis and renormalize on the grid.
    pub fn sample(&self, basis: Basis, grid: &Grid) -> Result<WavePacket> {
        self.check_margins(basis, grid)?;
        let amps = grid.points().map(|q| self.amplitude(basis, q)).collect();
        WavePacket::from_amplitudes(*grid, amps, basis)
    }
}

/// Position-basis Gaussian sampled on `grid`.
pub fn sample_gaussian(spec: &GaussianSpec, grid: &Grid) -> Result<WavePacket> {
    spec.sample(Basis::Position, grid)
}

/// Complex amplitudes of a normalized wavefunction on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    grid: Grid,
    amps: Vec<Complex64>,
    basis: Basis,
}

impl WavePacket {
    /// Normalize `amps` on `grid` and check tail containment.
    pub fn from_amplitudes(grid: Grid, mut amps: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} amplitudes for a {}-point grid",
                amps.len(),
                grid.len()
            )));
        }
        let norm = quadrature_norm(&amps, grid.spacing());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config(format!("cannot normalize amplitudes with norm {norm}")));
        }
        let scale = norm.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
        let peak = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let edge = amps[0].norm().max(amps[amps.len() - 1].norm());
        if edge >= TAIL_FRACTION * peak {
            return Err(Error::TailContainment(format!(
                "endpoint amplitude {:.3e} of peak on {basis} grid [{}, {}); need < {TAIL_FRACTION:e}",
                edge / peak,
                grid.min(),
                grid.max()
            )));
        }
        Ok(WavePacket { grid, amps, basis })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        quadrature_norm(&self.amps, self.grid.spacing())
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Expectation of the grid coordinate under `|ψ|²`.
    pub fn mean(&self) -> f64 {
        let dq = self.grid.spacing();
        self.grid
            .points()
            .zip(&self.amps)
            .map(|(q, a)| q * a.norm_sqr() * dq)
            .sum()
    }

    pub fn std_dev(&self) -> f64 {
        let dq = self.grid.spacing();
        let mean = self.mean();
        self.grid
            .points()
            .zip(&self.amps)
            .map(|(q, a)| (q - mean).powi(2) * a.norm_sqr() * dq)
            .sum::<f64>()
            .sqrt()
    }

    /// Multiply by `e^{i k x}` (position basis) and renormalize.
    pub fn boosted(&self, k: f64) -> WavePacket {
        let amps = self
            .grid
            .points()
            .zip(&self.amps)
            .map(|(q, a)| a * Complex64::cis(k * q))
            .collect();
        WavePacket {
            grid: self.grid,
            amps,
            basis: self.basis,
        }
    }
}

fn quadrature_norm(amps: &[Complex64], dq: f64) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * dq
}

/// Transform into the conjugate basis on the FFT-dual grid.
///
/// Round trips are exact for centered grids (see [`Grid::dual`]).
pub fn fourier_transform(wp: &WavePacket) -> WavePacket {
    let dft = UnitaryDft::new(&wp.grid, wp.basis);
    let target = dft.target();
    let sq_in = wp.grid.spacing().sqrt();
    let mut buf: Vec<Complex64> = wp.amps.iter().map(|a| a * sq_in).collect();
    dft.apply(&mut buf);
    let sq_out = target.spacing().sqrt().recip();
    buf.iter_mut().for_each(|b| *b *= sq_out);
    WavePacket {
        grid: target,
        amps: buf,
        basis: wp.basis.conjugate(),
    }
}

/// Overlap of a state with its shifted copy, `D(s) = ∫ f(q) f*(q + s) dq`.
///
/// Sampled on a centered shift grid of `2n` points sharing the packet's
/// spacing, so lags cover `[-n dq, n dq)` with no wrap-around.
#[derive(Debug, Clone)]
pub struct DecoherenceFactor {
    grid: Grid,
    values: Vec<Complex64>,
    basis: Basis,
    interp: Interpolant,
}

impl DecoherenceFactor {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Band-limited evaluation at an arbitrary shift; zero beyond the lag range.
    pub fn eval(&self, s: f64) -> Complex64 {
        self.interp.eval(s)
    }
}

/// `D(s)` via the correlation theorem on a zero-padded FFT.
pub fn autocorrelation(wp: &WavePacket) -> DecoherenceFactor {
    let n = wp.grid.len();
    let m = 2 * n;
    let dq = wp.grid.spacing();
    let mut buf = vec![Complex64::default(); m];
    buf[..n].copy_from_slice(&wp.amps);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter_mut().for_each(|b| *b = Complex64::new(b.norm_sqr(), 0.0));
    planner.plan_fft_inverse(m).process(&mut buf);
    // buf[k] / m = Σ_j f_{j+k} f*_j, so D(k dq) = conj(buf[k]) dq / m.
    let scale = dq / m as f64;
    let grid = Grid::centered(m, dq).expect("shift grid is valid");
    let values: Vec<Complex64> = (0..m)
        .map(|k| {
            let lag = (k + m - n) % m;
            buf[lag].conj() * scale
        })
        .collect();
    let interp = Interpolant::new(grid, &values);
    DecoherenceFactor {
        grid,
        values,
        basis: wp.basis,
        interp,
    }
}

/// A wavefunction the evolution kernels can evaluate at arbitrary points in
/// either basis.
#[derive(Debug, Clone)]
pub enum WaveFunction {
    /// Closed form, evaluated exactly at shifted arguments.
    Gaussian(GaussianSpec),
    /// Grid-only; evaluated by band-limited interpolation.
    Sampled(Box<SampledWave>),
}

#[derive(Debug, Clone)]
pub struct SampledWave {
    position: WavePacket,
    momentum: WavePacket,
    position_interp: Interpolant,
    momentum_interp: Interpolant,
}

impl SampledWave {
    fn packet(&self, basis: Basis) -> &WavePacket {
        match basis {
            Basis::Position => &self.position,
            Basis::Momentum => &self.momentum,
        }
    }
}

/// Grid size used when a closed-form state has to be sampled.
const AUTO_GRID_POINTS: usize = 512;
/// Half-width of the automatic grid, in density standard deviations.
const AUTO_GRID_SPAN: f64 = 12.0;

impl WaveFunction {
    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        Ok(WaveFunction::Gaussian(GaussianSpec::new(mean, sigma)?))
    }

    pub fn sampled(packet: WavePacket) -> Self {
        let other = fourier_transform(&packet);
        let (position, momentum) = match packet.basis {
            Basis::Position => (packet, other),
            Basis::Momentum => (other, packet),
        };
        let position_interp = Interpolant::new(position.grid, &position.amps);
        let momentum_interp = Interpolant::new(momentum.grid, &momentum.amps);
        WaveFunction::Sampled(Box::new(SampledWave {
            position,
            momentum,
            position_interp,
            momentum_interp,
        }))
    }

    pub fn amplitude(&self, basis: Basis, q: f64) -> Complex64 {
        match self {
            WaveFunction::Gaussian(g) => g.amplitude(basis, q),
            WaveFunction::Sampled(s) => match basis {
                Basis::Position => s.position_interp.eval(q),
                Basis::Momentum => s.momentum_interp.eval(q),
            },
        }
    }

    pub fn density_mean(&self, basis: Basis) -> f64 {
        match self {
            WaveFunction::Gaussian(g) => g.density_mean(basis),
            WaveFunction::Sampled(s) => s.packet(basis).mean(),
        }
    }

    pub fn density_std(&self, basis: Basis) -> f64 {
        match self {
            WaveFunction::Gaussian(g) => g.density_std(basis),
            WaveFunction::Sampled(s) => s.packet(basis).std_dev(),
        }
    }

    /// Interval outside of which the amplitude is negligible.
    pub fn support(&self, basis: Basis) -> (f64, f64) {
        match self {
            WaveFunction::Gaussian(g) => {
                let (m, s) = (g.density_mean(basis), g.density_std(basis));
                (m - GAUSSIAN_MARGIN * s, m + GAUSSIAN_MARGIN * s)
            }
            WaveFunction::Sampled(s) => {
                let g = s.packet(basis).grid;
                (g.min(), g.last())
            }
        }
    }

    /// Smallest length scale the amplitude varies on.
    pub fn resolution(&self, basis: Basis) -> f64 {
        match self {
            WaveFunction::Gaussian(g) => g.density_std(basis),
            WaveFunction::Sampled(s) => {
                let p = s.packet(basis);
                p.std_dev().min(2.0 * p.grid.spacing())
            }
        }
    }

    /// The packet in `basis`, sampling closed forms on an automatic grid.
    pub fn packet(&self, basis: Basis) -> Result<WavePacket> {
        match self {
            WaveFunction::Gaussian(g) => {
                let half = g.density_mean(basis).abs() + AUTO_GRID_SPAN * g.density_std(basis);
                let grid = Grid::symmetric(AUTO_GRID_POINTS, half)?;
                g.sample(basis, &grid)
            }
            WaveFunction::Sampled(s) => Ok(s.packet(basis).clone()),
        }
    }

    pub fn decoherence_factor(&self, basis: Basis) -> Result<DecoherenceFactor> {
        Ok(autocorrelation(&self.packet(basis)?))
    }
}

impl From<GaussianSpec> for WaveFunction {
    fn from(g: GaussianSpec) -> Self {
        WaveFunction::Gaussian(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_grid() -> Grid {
        Grid::symmetric(512, 20.0).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_with_analytic_peak() {
        let wp = sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &reference_grid()).unwrap();
        assert!((wp.norm() - 1.0).abs() < NORM_TOLERANCE);
        let j0 = wp.grid().nearest(0.0).unwrap();
        let expected = (2.0 * PI).powf(-0.25);
        assert!((expected - 0.63162).abs() < 1e-5);
        assert!((wp.amplitudes()[j0].norm() - expected).abs() < 1e-6);
    }

    #[test]
    fn shifted_gaussian_has_correct_mean() {
        let wp = sample_gaussian(&GaussianSpec::new(3.0, 1.0).unwrap(), &reference_grid()).unwrap();
        assert!((wp.mean() - 3.0).abs() < 1e-8);
        assert!((wp.std_dev() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn margin_violation_names_the_edge() {
        let g = Grid::symmetric(256, 10.0).unwrap();
        let err = sample_gaussian(&GaussianSpec::new(4.0, 1.0).unwrap(), &g).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("upper margin"), "{msg}");
        assert!(!msg.contains("lower margin"), "{msg}");
    }

    #[test]
    fn tail_check_rejects_truncated_packets() {
        let g = Grid::symmetric(64, 4.0).unwrap();
        let amps = g.points().map(|x| Complex64::new((-x * x / 4.0).exp(), 0.0)).collect();
        assert!(matches!(
            WavePacket::from_amplitudes(g, amps, Basis::Position),
            Err(Error::TailContainment(_))
        ));
    }

    #[test]
    fn fourier_pair_of_gaussian() {
        let wp = sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &reference_grid()).unwrap();
        let mom = fourier_transform(&wp);
        assert_eq!(mom.basis(), Basis::Momentum);
        assert!((mom.norm() - 1.0).abs() < NORM_TOLERANCE);
        assert!((mom.std_dev() - 0.5).abs() < 1e-6);
        let closed = GaussianSpec::centered(1.0).unwrap();
        for (p, a) in mom.grid().points().zip(mom.amplitudes()) {
            assert!((closed.amplitude(Basis::Momentum, p) - a).norm() < 1e-10);
        }
        let back = fourier_transform(&mom);
        assert_eq!(back.grid(), wp.grid());
        for (a, b) in back.amplitudes().iter().zip(wp.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn shift_theorem_moves_momentum_mean() {
        let wp = sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &reference_grid()).unwrap();
        let mom = fourier_transform(&wp.boosted(2.0));
        assert!((mom.mean() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gaussian_autocorrelation_matches_closed_form() {
        let eta = 1.3;
        let wp = sample_gaussian(&GaussianSpec::centered(eta).unwrap(), &reference_grid()).unwrap();
        let d = autocorrelation(&wp);
        for (s, v) in d.grid().points().zip(d.values()) {
            let expected = (-s * s / (8.0 * eta * eta)).exp();
            assert!((v - expected).norm() < 1e-8, "s = {s}");
        }
        for s in [0.0, 0.123, -2.71, 7.9] {
            let expected = (-s * s / (8.0 * eta * eta)).exp();
            assert!((d.eval(s) - expected).norm() < 1e-8, "s = {s}");
        }
        let zero = d.grid().nearest(0.0).unwrap();
        assert!((d.values()[zero] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn momentum_gaussian_closed_form_is_normalized() {
        let g = GaussianSpec::new(1.5, 0.8).unwrap();
        let wp = WaveFunction::Gaussian(g).packet(Basis::Momentum).unwrap();
        assert!((wp.std_dev() - 0.5 / 0.8).abs() < 1e-8);
        // Renormalization factor should be ~1: the closed form is already normalized.
        let j = wp.grid().nearest(0.3).unwrap();
        let p = wp.grid().point(j);
        assert!((wp.amplitudes()[j] - g.amplitude(Basis::Momentum, p)).norm() < 1e-10);
    }

    #[test]
    fn sampled_wavefunction_interpolates_both_bases() {
        let g = GaussianSpec::centered(1.0).unwrap();
        let wp = sample_gaussian(&g, &Grid::symmetric(256, 16.0).unwrap()).unwrap();
        let wf = WaveFunction::sampled(wp);
        for q in [-1.37, 0.0, 0.41, 2.2] {
            assert!((wf.amplitude(Basis::Position, q) - g.amplitude(Basis::Position, q)).norm() < 1e-9);
            assert!((wf.amplitude(Basis::Momentum, q) - g.amplitude(Basis::Momentum, q)).norm() < 1e-9);
        }
    }
}
