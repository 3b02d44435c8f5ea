//! Experiment description: parsing and validation.
//!
//! The format is TOML restricted to dotted keys (see `configs/figure1.toml`).
//! [`validate`] is total: it reports every problem it finds at once and
//! never returns a partially applied config.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use toml::{Table, Value};

use crate::analytic::GaussianModel;
use crate::error::{Error, Result};
use crate::evolution::{Mass, ModelParams, ORACLE_AXIS_CAP};
use crate::grid::{Basis, Grid, MIN_POINTS};

/// The Figure-1 reconstruction shipped with the crate.
pub const FIGURE1_CONFIG: &str = include_str!("../configs/figure1.toml");

/// Largest accepted side of a kernel matrix.
pub const MAX_GRID_POINTS: usize = 8192;
/// Largest accepted side of a heatmap.
pub const MAX_HEATMAP_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Matrices,
    Diagonals,
    Metrics,
    Heatmaps,
    ScalingFits,
}

impl Output {
    pub const ALL: [Output; 5] = [
        Output::Matrices,
        Output::Diagonals,
        Output::Metrics,
        Output::Heatmaps,
        Output::ScalingFits,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::Matrices => "matrices",
            Output::Diagonals => "diagonals",
            Output::Metrics => "metrics",
            Output::Heatmaps => "heatmaps",
            Output::ScalingFits => "scaling_fits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub times: Vec<f64>,
    pub outputs: BTreeSet<Output>,
    pub output_dir: PathBuf,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub heatmap: HeatmapConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelConfig {
    pub sigma: f64,
    pub eta1: f64,
    pub eta2: f64,
    #[serde(serialize_with = "serialize_mass")]
    pub mass: Mass,
}

fn serialize_mass<S: Serializer>(mass: &Mass, s: S) -> std::result::Result<S::Ok, S::Error> {
    match mass {
        Mass::Infinite => s.serialize_str("infinite"),
        Mass::Finite(m) => s.serialize_f64(*m),
    }
}

/// Kernel grids. The position axis is absent for a finite mass, where only
/// the momentum basis is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<AxisConfig>,
    pub momentum: AxisConfig,
}

/// `n` points whose extreme points sit at `±half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisConfig {
    pub n: usize,
    pub half_width: f64,
}

impl AxisConfig {
    pub fn grid(&self) -> Grid {
        Grid::covering(self.n, self.half_width).expect("validated axis")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatmapConfig {
    pub n: usize,
    pub position_half_width: f64,
    pub momentum_half_width: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        HeatmapConfig {
            n: 201,
            position_half_width: 10.0,
            momentum_half_width: 10.0,
        }
    }
}

impl HeatmapConfig {
    pub fn grid(&self, basis: Basis) -> Grid {
        let half = match basis {
            Basis::Position => self.position_half_width,
            Basis::Momentum => self.momentum_half_width,
        };
        Grid::covering(self.n, half).expect("validated heatmap")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    pub grid_n: usize,
    pub times: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        validate(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    /// Bases the kernels are evaluated in, position first.
    pub fn bases(&self) -> Vec<Basis> {
        match self.model.mass {
            Mass::Infinite => vec![Basis::Position, Basis::Momentum],
            Mass::Finite(_) => vec![Basis::Momentum],
        }
    }

    pub fn params(&self, t: f64) -> Result<ModelParams> {
        let m = &self.model;
        Ok(ModelParams::gaussian(m.sigma, m.eta1, m.eta2, t)?.with_mass(m.mass))
    }

    pub fn gaussian_model(&self) -> GaussianModel {
        let m = &self.model;
        GaussianModel::new(m.sigma, m.eta1, m.eta2).expect("validated model")
    }

    pub fn grid(&self, basis: Basis) -> Option<Grid> {
        match basis {
            Basis::Position => self.grid.position.map(|a| a.grid()),
            Basis::Momentum => Some(self.grid.momentum.grid()),
        }
    }

    pub fn max_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Parse and check a config, collecting every violation.
pub fn validate(text: &str) -> Result<ExperimentConfig> {
    let mut root: Table = toml::from_str(text)
        .map_err(|e| Error::Validation(vec![format!("not valid TOML: {e}")]))?;
    let mut v = Validator::default();

    let mut model = v.section(&mut root, "model", true).unwrap_or_default();
    let sigma = v.positive(&mut model, "model.sigma");
    let eta1 = v.positive(&mut model, "model.eta1");
    let eta2 = v.positive(&mut model, "model.eta2");
    let mass = v.mass(&mut model);
    v.unknown(model, "model.");

    let mut grid = v.section(&mut root, "grid", true).unwrap_or_default();
    let position = v.axis(&mut grid, "position");
    let momentum = v.axis(&mut grid, "momentum");
    if momentum == Some(None) {
        v.push("missing section `grid.momentum`".into());
    }
    v.unknown(grid, "grid.");

    let times = v.times(&mut root, "times", true).unwrap_or_default();
    let outputs = v.outputs(&mut root);
    let heatmap = v.heatmap(&mut root);
    let oracle = v.oracle(&mut root, &times);
    let output_dir = match root.remove("output_dir") {
        None => Some(PathBuf::from("output")),
        Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => v.fail("output_dir must be a non-empty string".into()),
    };
    v.unknown(root, "");

    let finite_mass = matches!(mass, Some(Mass::Finite(_)));
    match (&position, finite_mass) {
        (Some(Some(_)), true) => v.push(
            "grid.position is not used with a finite mass (only the momentum basis is computed); remove it"
                .into(),
        ),
        (Some(None), false) => v.push("grid.position is required for an infinite mass".into()),
        _ => {}
    }
    if let Some(outputs) = &outputs {
        if outputs.contains(&Output::ScalingFits) {
            let late = times.iter().filter(|&&t| t >= 5.0).count();
            if late < 5 {
                v.push(format!(
                    "outputs.scaling_fits needs at least 5 times ≥ 5, got {late}"
                ));
            }
        }
    }

    if let (Some(sigma), Some(eta1), Some(eta2), Some(&t_max)) = (sigma, eta1, eta2, times.last()) {
        if let Ok(params) = ModelParams::gaussian(sigma, eta1, eta2, t_max) {
            let axes = [
                (Basis::Position, position.flatten(), "8σ + 8η₂·t"),
                (Basis::Momentum, momentum.flatten(), "4/σ + 4t/η₁"),
            ];
            for (basis, axis, rule) in axes {
                let Some(axis) = axis else { continue };
                let required = params.required_half_width(basis);
                if axis.half_width < required * (1.0 - 1e-9) {
                    v.push(format!(
                        "grid.{basis}.half_width = {} is below the sizing rule ({rule} at t = {t_max}): \
                         required half-width is {required:.4}",
                        axis.half_width
                    ));
                }
            }
        }
    }

    if !v.errors.is_empty() {
        return Err(Error::Validation(v.errors));
    }
    Ok(ExperimentConfig {
        times,
        outputs: outputs.expect("checked"),
        output_dir: output_dir.expect("checked"),
        model: ModelConfig {
            sigma: sigma.expect("checked"),
            eta1: eta1.expect("checked"),
            eta2: eta2.expect("checked"),
            mass: mass.expect("checked"),
        },
        grid: GridConfig {
            position: position.flatten(),
            momentum: momentum.flatten().expect("checked"),
        },
        heatmap: heatmap.expect("checked"),
        oracle: oracle.expect("checked"),
    })
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn push(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn fail<T>(&mut self, msg: String) -> Option<T> {
        self.errors.push(msg);
        None
    }

    fn unknown(&mut self, table: Table, prefix: &str) {
        for key in table.keys() {
            self.push(format!("unknown key `{prefix}{key}`"));
        }
    }

    fn section(&mut self, table: &mut Table, path: &str, required: bool) -> Option<Table> {
        match table.remove(path.rsplit('.').next().unwrap_or(path)) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => self.fail(format!("`{path}` must be a section of dotted keys")),
            None if required => self.fail(format!("missing section `{path}`")),
            None => None,
        }
    }

    fn number(&mut self, table: &mut Table, path: &str) -> Option<f64> {
        let key = path.rsplit('.').next().unwrap_or(path);
        match table.remove(key) {
            Some(Value::Float(x)) if x.is_finite() => Some(x),
            Some(Value::Integer(i)) => Some(i as f64),
            Some(other) => self.fail(format!("{path} must be a finite number, got {other}")),
            None => self.fail(format!("missing key `{path}`")),
        }
    }

    fn positive(&mut self, table: &mut Table, path: &str) -> Option<f64> {
        let x = self.number(table, path)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail(format!("{path} must be positive, got {x}"))
        }
    }

    fn count(&mut self, table: &mut Table, path: &str, lo: usize, hi: usize) -> Option<usize> {
        let key = path.rsplit('.').next().unwrap_or(path);
        match table.remove(key) {
            Some(Value::Integer(i)) if i >= lo as i64 && i <= hi as i64 => Some(i as usize),
            Some(other) => self.fail(format!(
                "{path} must be an integer in [{lo}, {hi}], got {other}"
            )),
            None => self.fail(format!("missing key `{path}`")),
        }
    }

    fn mass(&mut self, model: &mut Table) -> Option<Mass> {
        match model.remove("mass") {
            None => Some(Mass::Infinite),
            Some(Value::String(s)) if s == "infinite" => Some(Mass::Infinite),
            Some(Value::Float(m)) if m > 0.0 && m.is_finite() => Some(Mass::Finite(m)),
            Some(Value::Integer(m)) if m > 0 => Some(Mass::Finite(m as f64)),
            Some(other) => self.fail(format!(
                "model.mass must be \"infinite\" or a positive number, got {other}"
            )),
        }
    }

    /// `Some(None)` when the axis is absent.
    fn axis(&mut self, grid: &mut Table, name: &str) -> Option<Option<AxisConfig>> {
        let path = format!("grid.{name}");
        let Some(mut t) = self.section(grid, &path, false) else {
            return Some(None);
        };
        let n = self.count(&mut t, &format!("{path}.n"), MIN_POINTS, MAX_GRID_POINTS);
        let half_width = self.positive(&mut t, &format!("{path}.half_width"));
        self.unknown(t, &format!("{path}."));
        Some(Some(AxisConfig {
            n: n?,
            half_width: half_width?,
        }))
    }

    fn times(&mut self, table: &mut Table, path: &str, required: bool) -> Option<Vec<f64>> {
        let key = path.rsplit('.').next().unwrap_or(path);
        let list = match table.remove(key) {
            Some(Value::Array(a)) => a,
            Some(other) => return self.fail(format!("{path} must be a list of numbers, got {other}")),
            None if required => return self.fail(format!("missing key `{path}`")),
            None => return None,
        };
        let mut times = Vec::with_capacity(list.len());
        for item in list {
            match item {
                Value::Float(x) if x.is_finite() => times.push(x),
                Value::Integer(i) => times.push(i as f64),
                other => return self.fail(format!("{path} entries must be finite numbers, got {other}")),
            }
        }
        if times.is_empty() {
            return self.fail(format!("{path} must not be empty"));
        }
        if let Some(t) = times.iter().find(|&&t| t < 0.0) {
            return self.fail(format!("{path} must all be ≥ 0, got {t}"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return self.fail(format!("{path} must be strictly increasing"));
        }
        Some(times)
    }

    fn outputs(&mut self, root: &mut Table) -> Option<BTreeSet<Output>> {
        let list = match root.remove("outputs") {
            Some(Value::Array(a)) => a,
            Some(other) => return self.fail(format!("outputs must be a list of names, got {other}")),
            None => return self.fail("missing key `outputs`".into()),
        };
        let mut set = BTreeSet::new();
        let mut ok = true;
        for item in list {
            match Output::ALL.iter().find(|o| item.as_str() == Some(o.as_str())) {
                Some(&o) => {
                    set.insert(o);
                }
                None => {
                    ok = false;
                    let names: Vec<_> = Output::ALL.iter().map(|o| o.as_str()).collect();
                    self.push(format!("unknown output {item}; expected one of {}", names.join(", ")));
                }
            }
        }
        if ok && set.is_empty() {
            return self.fail("outputs must name at least one output".into());
        }
        ok.then_some(set)
    }

    fn heatmap(&mut self, root: &mut Table) -> Option<HeatmapConfig> {
        let Some(mut t) = self.section(root, "heatmap", false) else {
            return Some(HeatmapConfig::default());
        };
        let defaults = HeatmapConfig::default();
        let mut opt = |v: &mut Self, key: &str, default: f64| {
            if t.contains_key(key) {
                v.positive(&mut t, &format!("heatmap.{key}"))
            } else {
                Some(default)
            }
        };
        let position_half_width = opt(self, "position_half_width", defaults.position_half_width);
        let momentum_half_width = opt(self, "momentum_half_width", defaults.momentum_half_width);
        let n = if t.contains_key("n") {
            self.count(&mut t, "heatmap.n", MIN_POINTS, MAX_HEATMAP_POINTS)
        } else {
            Some(defaults.n)
        };
        self.unknown(t, "heatmap.");
        Some(HeatmapConfig {
            n: n?,
            position_half_width: position_half_width?,
            momentum_half_width: momentum_half_width?,
        })
    }

    fn oracle(&mut self, root: &mut Table, times: &[f64]) -> Option<Option<OracleConfig>> {
        let Some(mut t) = self.section(root, "oracle", false) else {
            return Some(None);
        };
        let grid_n = match t.remove("grid_n") {
            Some(Value::Integer(n)) if n > ORACLE_AXIS_CAP as i64 => self.fail(format!(
                "oracle.grid_n = {n} exceeds the oracle cap of {ORACLE_AXIS_CAP}"
            )),
            Some(Value::Integer(n)) if n >= MIN_POINTS as i64 => Some(n as usize),
            Some(other) => self.fail(format!(
                "oracle.grid_n must be an integer in [{MIN_POINTS}, {ORACLE_AXIS_CAP}], got {other}"
            )),
            None => self.fail("missing key `oracle.grid_n`".into()),
        };
        let oracle_times = self.times(&mut t, "oracle.times", true);
        self.unknown(t, "oracle.");
        if let Some(ot) = &oracle_times {
            for x in ot {
                if !times.contains(x) {
                    self.push(format!("oracle.times entry {x} is not one of `times`"));
                }
            }
        }
        Some(Some(OracleConfig {
            grid_n: grid_n?,
            times: oracle_times?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match validate(text) {
            Err(Error::Validation(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn reference_config_parses() {
        let cfg = validate(FIGURE1_CONFIG).unwrap();
        assert_eq!(cfg.model.mass, Mass::Infinite);
        assert_eq!(cfg.bases(), vec![Basis::Position, Basis::Momentum]);
        assert!(cfg.wants(Output::Heatmaps));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = validate(FIGURE1_CONFIG).unwrap();
        assert_eq!(validate(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn reversed_times_are_rejected() {
        let text = FIGURE1_CONFIG.replace("times = [", "times = [5.0, 3.0, ");
        assert!(errors(&text).iter().any(|e| e.contains("times must be strictly increasing")));
    }

    #[test]
    fn every_problem_is_reported() {
        let text = "model.sigma = -1\nmodel.eta1 = 1\nmodel.etta2 = 1\ntimes = []\noutputs = [\"plots\"]\n";
        let e = errors(text);
        assert!(e.iter().any(|m| m.contains("model.sigma must be positive")));
        assert!(e.iter().any(|m| m.contains("unknown key `model.etta2`")));
        assert!(e.iter().any(|m| m.contains("missing key `model.eta2`")));
        assert!(e.iter().any(|m| m.contains("times must not be empty")));
        assert!(e.iter().any(|m| m.contains("unknown output")));
        assert!(e.iter().any(|m| m.contains("missing section `grid`")));
    }
}
