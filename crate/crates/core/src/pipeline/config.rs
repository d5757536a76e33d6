//! Declarative problem description: nonlinearity presets, state generators and
//! the run configuration.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::seriescore::{AnalyticNonlinearity, TruncationSpec};

/// Nonlinearity presets, each taking an optional parameter object.
pub fn presets() -> &'static Registry<AnalyticNonlinearity> {
    static REG: OnceLock<Registry<AnalyticNonlinearity>> = OnceLock::new();
    REG.get_or_init(|| {
        Registry::new("nonlinearity preset")
            .with("linear_heat", |_| Ok(AnalyticNonlinearity::zero()))
            .with("burgers", |_| AnalyticNonlinearity::new([((1, 1, 0), -1.0)], 25.0, [5.0; 3]))
            .with("allen_cahn", |_| AnalyticNonlinearity::new([((1, 0, 0), 1.0), ((3, 0, 0), -1.0)], 125.0, [5.0; 3]))
            .with("potential", potential)
    })
}

/// `f = phi(x) y` with `phi(x) = sum_r coeffs[r] x^r`; `M` defaults to the
/// smallest admissible value for `b = 5`.
fn potential(params: &Value) -> Result<AnalyticNonlinearity> {
    let coeffs: Vec<f64> = match params.get("coeffs") {
        Some(c) => serde_json::from_value(c.clone()).map_err(|e| Error::Config(format!("potential.coeffs: {e}")))?,
        None => vec![0.0, 0.1],
    };
    let terms: Vec<_> = coeffs.iter().enumerate().map(|(r, &v)| ((1, 0, r as u32), v)).collect();
    let mut f = AnalyticNonlinearity::new([], 1.0, [5.0; 3])?;
    f.coeffs = terms.into_iter().filter(|(_, v)| *v != 0.0).collect();
    f.m = params.get("M").and_then(Value::as_f64).unwrap_or_else(|| f.fitted_m().max(1.0));
    f.validate()?;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonlinearitySpec {
    Preset(String),
    Parametrized { preset: String, #[serde(default)] params: Value },
    Inline(AnalyticNonlinearity),
}

impl NonlinearitySpec {
    pub fn resolve(&self) -> Result<AnalyticNonlinearity> {
        match self {
            NonlinearitySpec::Preset(name) => presets().build(name, &Value::Null),
            NonlinearitySpec::Parametrized { preset, params } => presets().build(preset, params),
            NonlinearitySpec::Inline(f) => {
                f.validate()?;
                Ok(f.clone())
            }
        }
    }
}

/// An analytic function on a neighbourhood of `[-1, 1]`, known through its
/// Taylor coefficients at 0.
pub trait StateGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    /// `alpha_0, ..., alpha_order` with `y(x) = sum alpha_k x^k`.
    fn taylor(&self, order: usize) -> Vec<f64>;
    fn value(&self, x: f64) -> f64;
    /// Radius of convergence of the series at 0.
    fn radius(&self) -> f64;
    fn is_odd(&self) -> bool;
}

pub type SharedGenerator = Arc<dyn StateGenerator>;

pub fn generators() -> &'static Registry<SharedGenerator> {
    static REG: OnceLock<Registry<SharedGenerator>> = OnceLock::new();
    REG.get_or_init(|| {
        Registry::new("state generator")
            .with("taylor", |v| Ok(Arc::new(Polynomial::new(floats(v, "taylor")?, false)) as SharedGenerator))
            .with("odd_poly", |v| {
                let odd = floats(v, "odd_poly")?;
                let mut c = vec![0.0; 2 * odd.len()];
                for (j, a) in odd.into_iter().enumerate() {
                    c[2 * j + 1] = a;
                }
                Ok(Arc::new(Polynomial::new(c, true)) as SharedGenerator)
            })
            .with("geometric", |v| {
                let (pole, scale) = (field(v, "geometric", "pole")?, field(v, "geometric", "scale")?);
                if pole == 0.0 {
                    return Err(Error::Config("geometric.pole must be nonzero".into()));
                }
                Ok(Arc::new(Geometric { pole, scale }) as SharedGenerator)
            })
            .with("exp_scaled", |v| {
                Ok(Arc::new(ExpScaled { rate: field(v, "exp_scaled", "rate")?, scale: field(v, "exp_scaled", "scale")? })
                    as SharedGenerator)
            })
    })
}

fn floats(v: &Value, what: &str) -> Result<Vec<f64>> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("{what}: expected a list of numbers ({e})")))
}

fn field(v: &Value, what: &str, name: &str) -> Result<f64> {
    v.get(name).and_then(Value::as_f64).ok_or_else(|| Error::Config(format!("{what}.{name}: missing number")))
}

struct Polynomial {
    c: Vec<f64>,
    odd_by_construction: bool,
}

impl Polynomial {
    fn new(c: Vec<f64>, odd: bool) -> Self {
        Polynomial { c, odd_by_construction: odd }
    }
}

impl StateGenerator for Polynomial {
    fn name(&self) -> &'static str {
        if self.odd_by_construction {
            "odd_poly"
        } else {
            "taylor"
        }
    }
    fn taylor(&self, order: usize) -> Vec<f64> {
        (0..=order).map(|k| self.c.get(k).copied().unwrap_or(0.0)).collect()
    }
    fn value(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * x + a)
    }
    fn radius(&self) -> f64 {
        f64::INFINITY
    }
    fn is_odd(&self) -> bool {
        self.c.iter().step_by(2).all(|a| *a == 0.0)
    }
}

/// `scale / (1 - x / pole)`.
struct Geometric {
    pole: f64,
    scale: f64,
}

impl StateGenerator for Geometric {
    fn name(&self) -> &'static str {
        "geometric"
    }
    fn taylor(&self, order: usize) -> Vec<f64> {
        (0..=order).map(|k| self.scale / self.pole.powi(k as i32)).collect()
    }
    fn value(&self, x: f64) -> f64 {
        self.scale / (1.0 - x / self.pole)
    }
    fn radius(&self) -> f64 {
        self.pole.abs()
    }
    fn is_odd(&self) -> bool {
        self.scale == 0.0
    }
}

/// `scale e^{rate x}`.
struct ExpScaled {
    rate: f64,
    scale: f64,
}

impl StateGenerator for ExpScaled {
    fn name(&self) -> &'static str {
        "exp_scaled"
    }
    fn taylor(&self, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        let mut a = self.scale;
        for k in 0..=order {
            out.push(a);
            a *= self.rate / (k + 1) as f64;
        }
        out
    }
    fn value(&self, x: f64) -> f64 {
        self.scale * (self.rate * x).exp()
    }
    fn radius(&self) -> f64 {
        f64::INFINITY
    }
    fn is_odd(&self) -> bool {
        self.scale == 0.0
    }
}

/// `{"<generator>": params}` as written in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub kind: String,
    pub params: Value,
}

impl DataSpec {
    pub fn new(kind: &str, params: Value) -> Self {
        DataSpec { kind: kind.into(), params }
    }

    pub fn build(&self) -> Result<SharedGenerator> {
        generators().build(&self.kind, &self.params)
    }

    /// The same data multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<DataSpec> {
        let mul = |v: &Value| -> Result<Value> {
            let xs = floats(v, &self.kind)?;
            Ok(json!(xs.iter().map(|x| x * s).collect::<Vec<_>>()))
        };
        let params = match self.kind.as_str() {
            "taylor" | "odd_poly" => mul(&self.params)?,
            _ => {
                let mut p = self.params.clone();
                let scale = field(&p, &self.kind, "scale")?;
                p["scale"] = json!(scale * s);
                p
            }
        };
        Ok(DataSpec { kind: self.kind.clone(), params })
    }
}

impl Serialize for DataSpec {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let mut m = Map::new();
        m.insert(self.kind.clone(), self.params.clone());
        Value::Object(m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DataSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        match v {
            Value::Object(m) if m.len() == 1 => {
                let (k, p) = m.into_iter().next().unwrap();
                Ok(DataSpec { kind: k, params: p })
            }
            _ => Err(serde::de::Error::custom("expected an object with exactly one generator key")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TwoControl,
    SingleControlOdd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    #[serde(default = "d_nx")]
    pub nx: usize,
    #[serde(default = "d_nt")]
    pub nt: usize,
    #[serde(default = "d_scheme")]
    pub scheme: String,
    /// Time steps between synthesized control samples.
    #[serde(default = "d_one")]
    pub control_stride: usize,
    /// Spatial points at which the synthesized state is stored.
    #[serde(default = "d_state_points")]
    pub state_points: usize,
}

fn d_nx() -> usize {
    201
}
fn d_nt() -> usize {
    4000
}
fn d_scheme() -> String {
    "imex_cn".into()
}
fn d_one() -> usize {
    1
}
fn d_state_points() -> usize {
    21
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings { nx: d_nx(), nt: d_nt(), scheme: d_scheme(), control_stride: 1, state_points: d_state_points() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Terminal sup error accepted by the run.
    #[serde(default = "d_terminal")]
    pub terminal: f64,
    /// Largest accepted D2 envelope constant `C'`.
    #[serde(default = "d_c_prime")]
    pub c_prime: f64,
    /// Accepted `|g^(n)(base) - d_n|` of the realized traces.
    #[serde(default = "d_jet")]
    pub trace_jet: f64,
    /// Accepted `max_t |y(0, t)|` in single-control mode.
    #[serde(default = "d_center")]
    pub center: f64,
}

fn d_terminal() -> f64 {
    1e-3
}
fn d_c_prime() -> f64 {
    1.0
}
fn d_jet() -> f64 {
    1e-8
}
fn d_center() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { terminal: d_terminal(), c_prime: d_c_prime(), trace_jet: d_jet(), center: d_center() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub nonlinearity: NonlinearitySpec,
    pub y0: DataSpec,
    pub y1: DataSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "d_mode")]
    pub mode: Mode,
    #[serde(rename = "R", default = "d_r")]
    pub r: f64,
    #[serde(rename = "R_prime", default = "d_r_prime")]
    pub r_prime: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default = "d_trunc")]
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Exponent constant `c` of the cutoff transition `e^{-c/s^2}`.
    #[serde(default = "d_sharpness")]
    pub cutoff_sharpness: f64,
    #[serde(default)]
    pub override_admissibility: bool,
    #[serde(default)]
    pub seed: u64,
}

fn d_mode() -> Mode {
    Mode::TwoControl
}
fn d_r() -> f64 {
    4.9
}
fn d_r_prime() -> f64 {
    4.85
}
fn d_trunc() -> TruncationSpec {
    TruncationSpec::new(30, 14)
}
fn d_sharpness() -> f64 {
    1.0
}

const REQUIRED: [&str; 4] = ["nonlinearity", "y0", "y1", "T"];

impl ProblemConfig {
    pub fn new(nonlinearity: NonlinearitySpec, y0: DataSpec, y1: DataSpec, horizon: f64) -> Self {
        ProblemConfig {
            nonlinearity,
            y0,
            y1,
            horizon,
            mode: d_mode(),
            r: d_r(),
            r_prime: d_r_prime(),
            l: None,
            truncation: d_trunc(),
            grid: GridSettings::default(),
            tolerances: Tolerances::default(),
            cutoff_sharpness: d_sharpness(),
            override_admissibility: false,
            seed: 0,
        }
    }

    /// Parses and validates; every violation found is listed in the error.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Schema { path: "$".into(), msg: "expected an object".into() })?;
        let mut problems: Vec<(String, String)> = REQUIRED
            .iter()
            .filter(|k| !obj.contains_key(**k))
            .map(|k| (format!("$.{k}"), "required field is missing".to_string()))
            .collect();
        if problems.is_empty() {
            match serde_json::from_value::<ProblemConfig>(v.clone()) {
                Ok(cfg) => problems.extend(cfg.semantic_problems()),
                Err(e) => problems.push(("$".into(), e.to_string())),
            }
        }
        if problems.is_empty() {
            return serde_json::from_value(v.clone()).map_err(Error::from);
        }
        let path = problems[0].0.clone();
        let msg = problems.iter().map(|(p, m)| format!("{p}: {m}")).collect::<Vec<_>>().join("; ");
        Err(Error::Schema { path, msg })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v)
    }

    fn semantic_problems(&self) -> Vec<(String, String)> {
        let mut out = vec![];
        let mut push = |p: &str, m: String| out.push((p.to_string(), m));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            push("$.T", format!("must be positive, got {}", self.horizon));
        }
        if let Err(e) = self.nonlinearity.resolve() {
            push("$.nonlinearity", e.to_string());
        }
        for (p, d) in [("$.y0", &self.y0), ("$.y1", &self.y1)] {
            if let Err(e) = d.build() {
                push(p, e.to_string());
            }
        }
        if let Err(e) = self.truncation.validate() {
            push("$.truncation", e.to_string());
        }
        if self.truncation.kmax < 2 * self.truncation.nmax + 1 {
            push("$.truncation", "Kmax >= 2 Nmax + 1 is required".into());
        }
        if let Err(e) = crate::heatsim::schemes().build(&self.grid.scheme, &Value::Null) {
            push("$.grid.scheme", e.to_string());
        }
        if self.grid.control_stride == 0 || !self.grid.nt.is_multiple_of(self.grid.control_stride) {
            push("$.grid.control_stride", "must be positive and divide nt".into());
        }
        if self.grid.state_points < 2 {
            push("$.grid.state_points", "must be at least 2".into());
        }
        if !(self.cutoff_sharpness > 0.0) {
            push("$.cutoff_sharpness", "must be positive".into());
        }
        out
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_preset() {
        let f = NonlinearitySpec::Preset("burgers".into()).resolve().unwrap();
        assert_eq!(f.coeffs.len(), 1);
        assert_eq!(f.coeffs[&(1, 1, 0)], -1.0);
    }

    #[test]
    fn potential_preset() {
        let spec = NonlinearitySpec::Parametrized { preset: "potential".into(), params: json!({"coeffs": [0.0, 0.1]}) };
        let f = spec.resolve().unwrap();
        assert_eq!(f.eval(0.5, 2.0, 7.0), 0.1);
    }

    #[test]
    fn generators_agree_with_series() {
        for d in [
            DataSpec::new("geometric", json!({"pole": 5.0, "scale": 0.01})),
            DataSpec::new("exp_scaled", json!({"rate": 1.0, "scale": 0.01})),
            DataSpec::new("odd_poly", json!([-0.01, 0.001])),
        ] {
            let g = d.build().unwrap();
            let c = g.taylor(60);
            let s: f64 = c.iter().rev().fold(0.0, |acc, a| acc * 0.7 + a);
            assert!((s - g.value(0.7)).abs() < 1e-15, "{}", g.name());
        }
        assert!(DataSpec::new("odd_poly", json!([1.0])).build().unwrap().is_odd());
    }

    #[test]
    fn missing_horizon_names_field() {
        let v = json!({"nonlinearity": "burgers", "y0": {"taylor": [0.0]}, "y1": {"taylor": [0.0]}});
        match ProblemConfig::from_value(&v) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.T"),
            other => panic!("{other:?}"),
        }
    }
}
