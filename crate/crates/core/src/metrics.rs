//! Decoherence and equilibration metrics.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{DensityMatrix, DiagonalDistribution, PSD_TOLERANCE};
use crate::grid::{Basis, Grid};

/// Eigenvalues below this contribute nothing to the entropy.
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Cut samples below this fraction of the cut peak are excluded from width fits.
pub const FIT_FLOOR: f64 = 1e-12;
/// Half-width of the window used for diagonal flatness (initial support, ±5σ for σ = 1).
pub const DEFAULT_FLATNESS_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub t: f64,
    pub basis: Basis,
    pub purity: f64,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    pub l1_coherence: f64,
    /// Gaussian std of `|ρ|` across the diagonal, along `(q − q̄)/√2`.
    pub offdiag_width: f64,
    /// Gaussian std of `|ρ|` along the diagonal, `(q + q̄)/√2`.
    pub diag_width: f64,
    /// False when the cut had too few samples above the fit floor and the
    /// width is a resolution bound rather than a fit.
    pub offdiag_resolved: bool,
    pub diag_resolved: bool,
    pub flatness_cv: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub flatness_window: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            flatness_window: DEFAULT_FLATNESS_WINDOW,
        }
    }
}

pub fn analyze(rho: &DensityMatrix, t: f64) -> Result<MetricReport> {
    analyze_with(rho, t, &AnalysisOptions::default())
}

pub fn analyze_with(rho: &DensityMatrix, t: f64, options: &AnalysisOptions) -> Result<MetricReport> {
    let ev = rho.eigenvalues()?;
    let min_eigenvalue = ev.first().copied().unwrap_or(0.0);
    if min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
    }
    let entropy = ev
        .iter()
        .filter(|&&l| l >= EIGEN_CLAMP)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0);
    let diag = rho.diagonal();
    let trace: f64 = diag.iter().sum();
    let total: f64 = rho.elems().iter().map(|e| e.norm()).sum();
    let l1_coherence = (total - diag.iter().map(|d| d.abs()).sum::<f64>()).max(0.0) / trace;
    let magnitudes = rho.elems().mapv(|e| e.norm());
    let cuts = fit_cut_widths(&magnitudes, rho.grid())?;
    Ok(MetricReport {
        t,
        basis: rho.basis(),
        purity: rho.purity(),
        entropy,
        l1_coherence,
        offdiag_width: cuts.offdiag.width,
        diag_width: cuts.diag.width,
        offdiag_resolved: cuts.offdiag.resolved,
        diag_resolved: cuts.diag.resolved,
        flatness_cv: flatness_cv(rho.grid(), &diag, options.flatness_window)?,
        min_eigenvalue,
    })
}

/// Coefficient of variation of `probs` over `|q| ≤ window`.
pub fn flatness_cv(grid: &Grid, probs: &[f64], window: f64) -> Result<f64> {
    let inside: Vec<f64> = grid
        .points()
        .zip(probs)
        .filter(|(q, _)| q.abs() <= window)
        .map(|(_, &p)| p)
        .collect();
    if inside.len() < 2 {
        return Err(Error::Metric(format!(
            "flatness window ±{window} holds {} grid point(s)",
            inside.len()
        )));
    }
    let mean = inside.iter().sum::<f64>() / inside.len() as f64;
    let var = inside.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / inside.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Metric("no probability inside the flatness window".into()));
    }
    Ok(var.sqrt() / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthFit {
    pub width: f64,
    pub resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutWidths {
    pub offdiag: WidthFit,
    pub diag: WidthFit,
}

/// Gaussian widths of a magnitude matrix along the anti-diagonal and
/// diagonal cuts through the peak of its diagonal.
pub fn fit_cut_widths(magnitudes: &Array2<f64>, grid: &Grid) -> Result<CutWidths> {
    let n = grid.len();
    if magnitudes.dim() != (n, n) {
        return Err(Error::Grid("magnitude matrix does not match grid".into()));
    }
    let center = (0..n)
        .max_by(|&a, &b| magnitudes[(a, a)].total_cmp(&magnitudes[(b, b)]))
        .expect("non-empty grid");
    let step = std::f64::consts::SQRT_2 * grid.spacing();
    let reach = center.min(n - 1 - center) as isize;
    let mut anti = Vec::new();
    for k in -reach..=reach {
        let (j, l) = ((center as isize + k) as usize, (center as isize - k) as usize);
        anti.push((k as f64 * step, magnitudes[(j, l)]));
    }
    let along: Vec<(f64, f64)> = (0..n)
        .map(|j| ((j as f64 - center as f64) * step, magnitudes[(j, j)]))
        .collect();
    Ok(CutWidths {
        offdiag: fit_gaussian_width(&anti, false, step)?,
        diag: fit_gaussian_width(&along, true, step)?,
    })
}

/// Weighted least squares of `ln f = c₀ + c₁ x − x²/(2w²)` on samples above
/// the floor, with weights `f²`.
///
/// If fewer than three usable samples exist, returns the largest width that
/// is consistent with the neighbours having dropped below the floor.
pub fn fit_gaussian_width(samples: &[(f64, f64)], with_drift: bool, spacing: f64) -> Result<WidthFit> {
    let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Metric("cut has no positive samples".into()));
    }
    let used: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, f)| *f > FIT_FLOOR * peak)
        .map(|&(x, f)| (x, f))
        .collect();
    let unresolved = WidthFit {
        width: spacing / (2.0 * (1.0 / FIT_FLOOR).ln()).sqrt(),
        resolved: false,
    };
    if used.len() < 3 {
        return Ok(unresolved);
    }
    // Normal equations in the basis (1, x, x²), scaled by the peak.
    let cols = if with_drift { 3 } else { 2 };
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, f) in &used {
        let w = (f / peak).powi(2);
        let row = if with_drift { [1.0, x, x * x] } else { [1.0, x * x, 0.0] };
        let y = (f / peak).ln();
        for a in 0..cols {
            atb[a] += w * row[a] * y;
            for b in 0..cols {
                ata[a][b] += w * row[a] * row[b];
            }
        }
    }
    let coef = solve_small(&ata, &atb, cols)
        .ok_or_else(|| Error::Metric("singular width fit".into()))?;
    let curvature = if with_drift { coef[2] } else { coef[1] };
    if !(curvature < 0.0) {
        return Ok(WidthFit {
            width: f64::INFINITY,
            resolved: false,
        });
    }
    Ok(WidthFit {
        width: (-0.5 / curvature).sqrt(),
        resolved: true,
    })
}

fn solve_small(a: &[[f64; 3]; 3], b: &[f64; 3], n: usize) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..n {
        m[i][..n].copy_from_slice(&a[i][..n]);
        m[i][3] = b[i];
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let factor = m[row][col] / m[col][col];
                let pivot_row = m[col];
                for (dst, src) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= factor * src;
                }
            }
        }
    }
    let mut x = [0.0; 3];
    for i in 0..n {
        x[i] = m[i][3] / m[i][i];
    }
    Some(x)
}

/// Width of a symmetric, unimodal profile `f(x)` peaked at `x = 0`.
///
/// The sampling step adapts until the profile falls to between 10% and 90%
/// of its peak one step out, then 17 samples are fitted.
pub fn profile_width(f: impl Fn(f64) -> f64, initial_step: f64) -> Result<f64> {
    let f0 = f(0.0);
    if !(f0 > 0.0) {
        return Err(Error::Metric("profile is not positive at its center".into()));
    }
    let mut h = initial_step;
    for _ in 0..200 {
        let r = f(h) / f0;
        if r < 0.1 {
            h *= 0.5;
        } else if r > 0.9 {
            h *= 2.0;
        } else {
            break;
        }
    }
    let samples: Vec<(f64, f64)> = (-8..=8)
        .map(|k| {
            let x = k as f64 * h;
            (x, f(x))
        })
        .collect();
    let fit = fit_gaussian_width(&samples, false, h)?;
    if !fit.resolved {
        return Err(Error::Metric("profile width could not be resolved".into()));
    }
    Ok(fit.width)
}

/// Power-law fit `field ≈ prefactor · t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub t_range: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricField {
    Purity,
    Entropy,
    L1Coherence,
    OffdiagWidth,
    DiagWidth,
    FlatnessCv,
}

impl MetricField {
    pub fn get(self, r: &MetricReport) -> f64 {
        match self {
            MetricField::Purity => r.purity,
            MetricField::Entropy => r.entropy,
            MetricField::L1Coherence => r.l1_coherence,
            MetricField::OffdiagWidth => r.offdiag_width,
            MetricField::DiagWidth => r.diag_width,
            MetricField::FlatnessCv => r.flatness_cv,
        }
    }
}

pub const MIN_SCALING_POINTS: usize = 5;
/// Smallest time accepted by [`fit_scaling`] (asymptotic regime).
pub const MIN_SCALING_TIME: f64 = 5.0;

pub fn fit_scaling(reports: &[MetricReport], field: MetricField) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.t, field.get(r))).collect();
    fit_power_law(&points)
}

/// Ordinary least squares on `(ln t, ln value)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_SCALING_POINTS {
        return Err(Error::Metric(format!(
            "scaling fit needs at least {MIN_SCALING_POINTS} points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Metric("scaling fit times must be strictly increasing".into()));
    }
    if points[0].0 < MIN_SCALING_TIME {
        return Err(Error::Metric(format!(
            "scaling fit times must be ≥ {MIN_SCALING_TIME}, got {}",
            points[0].0
        )));
    }
    if let Some(&(t, v)) = points.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Metric(format!(
            "cannot take the log of {v} at t = {t}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        t_range: (points[0].0, points[points.len() - 1].0),
        points: points.len(),
    })
}

/// System observable in the basis of the density matrices it is paired with.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Multiplication operator: value at each grid point.
    Diagonal(Vec<f64>),
    /// Hermitian matrix on the grid.
    Full(Array2<Complex64>),
}

impl Observable {
    /// `q^power` as a diagonal operator on `grid`.
    pub fn coordinate_power(grid: &Grid, power: i32) -> Self {
        Observable::Diagonal(grid.points().map(|q| q.powi(power)).collect())
    }

    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let n = rho.len();
        match self {
            Observable::Diagonal(v) => {
                if v.len() != n {
                    return Err(Error::Grid("observable does not match grid".into()));
                }
                Ok(rho.diagonal().iter().zip(v).map(|(p, o)| p * o).sum())
            }
            Observable::Full(o) => {
                if o.dim() != (n, n) {
                    return Err(Error::Grid("observable does not match grid".into()));
                }
                let mut acc = Complex64::default();
                for j in 0..n {
                    for k in 0..n {
                        acc += rho.elems()[(j, k)] * o[(k, j)];
                    }
                }
                Ok(acc.re)
            }
        }
    }

    fn check_hermitian(&self) -> Result<()> {
        if let Observable::Full(o) = self {
            let n = o.nrows();
            for j in 0..n {
                for k in j..n {
                    if (o[(j, k)] - o[(k, j)].conj()).norm() > 1e-12 * (1.0 + o[(j, k)].norm()) {
                        return Err(Error::Metric("observable is not Hermitian".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(1/τ) ∫ Tr(ρ(t) O) dt` over `window`, by the trapezoid rule on the
/// supplied samples (linearly interpolated at the window edges).
pub fn time_averaged_observable(
    samples: &[(f64, DensityMatrix)],
    obs: &Observable,
    window: (f64, f64),
) -> Result<f64> {
    obs.check_hermitian()?;
    let (t0, t1) = window;
    if !(t1 >= t0) {
        return Err(Error::Metric(format!("empty window [{t0}, {t1}]")));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Metric("sample times must be strictly increasing".into()));
    }
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) => (f.0, l.0),
        _ => return Err(Error::Metric("no samples".into())),
    };
    if first > t0 || last < t1 {
        return Err(Error::Metric(format!(
            "samples span [{first}, {last}] but the window is [{t0}, {t1}]"
        )));
    }
    let values: Vec<(f64, f64)> = samples
        .iter()
        .map(|(t, rho)| Ok((*t, obs.expectation(rho)?)))
        .collect::<Result<_>>()?;
    let at = |t: f64| -> f64 {
        let i = values.partition_point(|v| v.0 < t);
        if i < values.len() && values[i].0 == t {
            return values[i].1;
        }
        let (a, b) = (values[i - 1], values[i]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    };
    if t1 == t0 {
        return Ok(at(t0));
    }
    let mut knots = vec![(t0, at(t0))];
    knots.extend(values.iter().copied().filter(|v| v.0 > t0 && v.0 < t1));
    knots.push((t1, at(t1)));
    let integral: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    Ok(integral / (t1 - t0))
}

/// Largest non-zero-frequency DFT magnitude of `P` over `|q| ≤ window`,
/// relative to the zero mode. Zero for a flat distribution.
pub fn uniformity_spectrum(dist: &DiagonalDistribution, window: f64) -> Result<f64> {
    let mut buf: Vec<Complex64> = dist
        .grid()
        .points()
        .zip(dist.probs())
        .filter(|(q, _)| q.abs() <= window)
        .map(|(_, &p)| Complex64::new(p, 0.0))
        .collect();
    if buf.len() < 2 {
        return Err(Error::Metric(format!(
            "window ±{window} holds {} grid point(s)",
            buf.len()
        )));
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let zero = buf[0].norm();
    if !(zero > 0.0) {
        return Err(Error::Metric("no probability inside the window".into()));
    }
    Ok(buf[1..].iter().map(|c| c.norm()).fold(0.0, f64::max) / zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{sample_gaussian, GaussianSpec};

    fn projector() -> DensityMatrix {
        let g = Grid::symmetric(128, 12.0).unwrap();
        DensityMatrix::pure(&sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &g).unwrap())
    }

    #[test]
    fn pure_state_metrics() {
        let rho = projector();
        let r = analyze(&rho, 0.0).unwrap();
        assert!((r.purity - 1.0).abs() < 1e-9);
        assert!(r.entropy <= 1e-6);
        // elems carry one factor of dq, so Σ_{j,k} |elems| = (∫|ψ|)² / dq with
        // ∫|ψ| = (2πσ²)^{-1/4} · σ√(4π) for a Gaussian of density std σ.
        let dq = rho.grid().spacing();
        let abs_integral = (2.0 * std::f64::consts::PI).powf(-0.25) * (4.0 * std::f64::consts::PI).sqrt();
        let expected = abs_integral.powi(2) / dq - 1.0;
        assert!((r.l1_coherence - expected).abs() < 1e-9, "{} vs {expected}", r.l1_coherence);
        // Pure projector: exp(−(q²+q̄²)/4) ⇒ std √2 along both rotated axes.
        assert!((r.offdiag_width - 2f64.sqrt()).abs() < 1e-6);
        assert!((r.diag_width - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn maximally_mixed_metrics() {
        let g = Grid::symmetric(64, 4.0).unwrap();
        let rho = DensityMatrix::maximally_mixed(g, Basis::Position);
        let r = analyze(&rho, 0.0).unwrap();
        assert!((r.purity - 1.0 / 64.0).abs() < 1e-12);
        assert!((r.entropy - 64f64.ln()).abs() < 1e-10);
        assert_eq!(r.l1_coherence, 0.0);
        assert!(r.flatness_cv < 1e-12);
    }

    #[test]
    fn power_law_fits() {
        let pts: Vec<(f64, f64)> = (1..=8).map(|k| (5.0 * k as f64, 3.0 / (5.0 * k as f64))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
        assert!(fit.r_squared > 0.999);
        let flat: Vec<(f64, f64)> = (1..=6).map(|k| (5.0 * k as f64, 2.5)).collect();
        let fit = fit_power_law(&flat).unwrap();
        assert!(fit.exponent.abs() < 1e-10);
        assert!(fit_power_law(&pts[..4]).is_err());
        let early: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_power_law(&early).is_err());
        let mut bad = flat.clone();
        bad[2].1 = 0.0;
        assert!(fit_power_law(&bad).is_err());
    }

    #[test]
    fn time_average_of_constant_state() {
        let g = Grid::symmetric(64, 4.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(g, Basis::Position);
        let samples = vec![(0.0, mixed.clone()), (1.0, mixed.clone()), (2.0, mixed)];
        let odd = Observable::Diagonal(g.points().map(|q| q + 0.5 * g.spacing()).collect());
        // centered grid of even size: points symmetric about −dx/2
        let v = time_averaged_observable(&samples, &odd, (0.5, 1.5)).unwrap();
        assert!(v.abs() < 1e-10);
        assert!(time_averaged_observable(&samples, &odd, (0.0, 3.0)).is_err());
    }

    #[test]
    fn time_average_of_pure_gaussian_second_moment() {
        let rho = projector();
        let x2 = Observable::coordinate_power(rho.grid(), 2);
        let samples: Vec<_> = (0..4).map(|k| (k as f64, rho.clone())).collect();
        let v = time_averaged_observable(&samples, &x2, (0.0, 3.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_distribution_has_no_spectrum() {
        let g = Grid::symmetric(128, 20.0).unwrap();
        let d = DiagonalDistribution::from_weights(g, Basis::Position, vec![1.0; 128]).unwrap();
        assert!(uniformity_spectrum(&d, 5.0).unwrap() < 1e-12);
    }

    #[test]
    fn profile_width_adapts_its_step() {
        for w in [1e-3, 0.7, 250.0] {
            let got = profile_width(|x| (-x * x / (2.0 * w * w)).exp(), 1.0).unwrap();
            assert!((got / w - 1.0).abs() < 1e-9);
        }
    }
}
