//! Forward-in-time finite-difference verifier for
//! `y_t = y_xx + f(x, y, y_x) + S(x, t)` with Dirichlet controls.

mod interp;
mod schemes;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use interp::{Cubic, Tridiagonal};
pub use schemes::{schemes, ExplicitRk4, ImexCn, Scheme, SharedScheme, Stepper};

use crate::cauchyx::ControlSignal;
use crate::error::{Error, Result};
use crate::seriescore::AnalyticNonlinearity;

/// Manufactured source `S(x, t)`.
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Fraction of the analyticity box the state may occupy.
pub const BOX_FRACTION: f64 = 0.99;

#[derive(Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Grid nodes on `domain`, both boundary nodes included.
    pub nx: usize,
    pub nt: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_domain")]
    pub domain: (f64, f64),
    /// Number of stored snapshots besides `t = 0`.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Positions whose values are recorded after every step (nearest node).
    #[serde(default)]
    pub probes: Vec<f64>,
    #[serde(skip)]
    pub source: Option<SourceFn>,
}

fn default_scheme() -> String {
    "imex_cn".into()
}
fn default_domain() -> (f64, f64) {
    (-1.0, 1.0)
}
fn default_snapshots() -> usize {
    100
}

impl std::fmt::Debug for SimConfig {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("SimConfig")
            .field("nx", &self.nx)
            .field("nt", &self.nt)
            .field("scheme", &self.scheme)
            .field("T", &self.horizon)
            .field("domain", &self.domain)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl SimConfig {
    pub fn new(nx: usize, nt: usize, horizon: f64) -> Self {
        SimConfig {
            nx,
            nt,
            scheme: default_scheme(),
            horizon,
            domain: default_domain(),
            snapshots: default_snapshots(),
            probes: vec![],
            source: None,
        }
    }

    pub fn with_scheme(mut self, s: &str) -> Self {
        self.scheme = s.into();
        self
    }

    pub fn with_domain(mut self, a: f64, b: f64) -> Self {
        self.domain = (a, b);
        self
    }

    pub fn with_source(mut self, s: SourceFn) -> Self {
        self.source = Some(s);
        self
    }

    pub fn with_probes(mut self, p: Vec<f64>) -> Self {
        self.probes = p;
        self
    }

    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = self.domain;
        let dx = (b - a) / (self.nx - 1) as f64;
        (0..self.nx).map(|i| if i + 1 == self.nx { b } else { a + i as f64 * dx }).collect()
    }

    pub fn dx(&self) -> f64 {
        (self.domain.1 - self.domain.0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn validate(&self) -> Result<SharedScheme> {
        let scheme = schemes().build(&self.scheme, &serde_json::Value::Null)?;
        if self.nx < scheme.min_nodes() {
            return Err(Error::Config(format!("{} needs nx >= {}", self.scheme, scheme.min_nodes())));
        }
        if self.nt < 1 || !(self.horizon > 0.0) || !(self.domain.1 > self.domain.0) {
            return Err(Error::Config("nt >= 1, T > 0 and a nonempty domain are required".into()));
        }
        Ok(scheme)
    }
}

/// Everything a stepper needs besides the state.
pub struct Problem<'a> {
    pub x: &'a [f64],
    pub dx: f64,
    pub f: &'a AnalyticNonlinearity,
    pub source: Option<&'a SourceFn>,
    pub left: &'a Cubic,
    pub right: &'a Cubic,
}

impl Problem<'_> {
    pub fn boundary(&self, t: f64) -> (f64, f64) {
        (self.left.eval(t), self.right.eval(t))
    }

    pub fn has_forcing(&self) -> bool {
        !self.f.is_zero() || self.source.is_some()
    }

    /// `f(x, u, u_x) + S(x, t)` at every node.
    pub fn forcing(&self, u: &[f64], t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if !self.f.is_zero() {
            let mut du = vec![0.0; u.len()];
            d_dx(u, self.dx, &mut du);
            for i in 0..u.len() {
                out[i] = self.f.eval(self.x[i], u[i], du[i]);
            }
        }
        if let Some(s) = self.source {
            for i in 0..u.len() {
                out[i] += s(self.x[i], t);
            }
        }
    }
}

/// Fourth-order first derivative: centered inside, one-sided at the two
/// outermost nodes on each side. Needs at least five nodes.
pub fn d_dx(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    let s = 1.0 / (12.0 * dx);
    out[0] = s * (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]);
    out[1] = s * (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]);
    out[n - 1] = -s * (-25.0 * u[n - 1] + 48.0 * u[n - 2] - 36.0 * u[n - 3] + 16.0 * u[n - 4] - 3.0 * u[n - 5]);
    out[n - 2] = -s * (-3.0 * u[n - 1] - 10.0 * u[n - 2] + 18.0 * u[n - 3] - 6.0 * u[n - 4] + u[n - 5]);
    for i in 2..n - 2 {
        out[i] = s * (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub probe_x: Vec<f64>,
    /// `probe_values[p][step]`, step 0 being the initial state.
    pub probe_values: Vec<Vec<f64>>,
    pub max_abs: f64,
    pub max_abs_dx: f64,
}

impl Trajectory {
    pub fn terminal(&self) -> &[f64] {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for x in &self.x {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.snapshots) {
            out.push_str(&format!("{t:.16e}"));
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Cubic interpolants for `(h_-, h_+)`, checked to cover `[0, T]`.
pub fn control_interpolants(c: &ControlSignal, horizon: f64) -> Result<(Cubic, Cubic)> {
    c.validate()?;
    let tol = 1e-12 * horizon.max(1.0);
    if c.t[0] > tol || *c.t.last().unwrap() < horizon - tol {
        return Err(Error::OutsideDomain(format!(
            "controls cover [{}, {}], not [0, {horizon}]",
            c.t[0],
            c.t.last().unwrap()
        )));
    }
    match (&c.dh_minus, &c.dh_plus) {
        (Some(dm), Some(dp)) => Ok((Cubic::hermite(&c.t, &c.h_minus, dm)?, Cubic::hermite(&c.t, &c.h_plus, dp)?)),
        _ => Ok((Cubic::spline(&c.t, &c.h_minus)?, Cubic::spline(&c.t, &c.h_plus)?)),
    }
}

pub fn simulate(
    y0: &[f64],
    controls: &ControlSignal,
    f: &AnalyticNonlinearity,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let scheme = cfg.validate()?;
    if y0.len() != cfg.nx {
        return Err(Error::DimensionMismatch(format!("y0 has {} samples, grid has {}", y0.len(), cfg.nx)));
    }
    let (left, right) = control_interpolants(controls, cfg.horizon)?;
    let x = cfg.grid();
    let (dx, dt) = (cfg.dx(), cfg.dt());
    let problem = Problem { x: &x, dx, f, source: cfg.source.as_ref(), left: &left, right: &right };
    let mut stepper = scheme.prepare(cfg.nx, dx, dt)?;
    let probe_idx: Vec<usize> = cfg
        .probes
        .iter()
        .map(|p| (((p - cfg.domain.0) / dx).round().max(0.0) as usize).min(cfg.nx - 1))
        .collect();
    let stride = (cfg.nt / cfg.snapshots.max(1)).max(1);
    let mut u = y0.to_vec();
    let mut du = vec![0.0; cfg.nx];
    let mut traj = Trajectory {
        probe_x: probe_idx.iter().map(|&i| x[i]).collect(),
        probe_values: probe_idx.iter().map(|&i| vec![u[i]]).collect(),
        x: x.clone(),
        times: vec![0.0],
        snapshots: vec![u.clone()],
        max_abs: 0.0,
        max_abs_dx: 0.0,
    };
    for step in 1..=cfg.nt {
        let t = (step - 1) as f64 * dt;
        stepper.step(&problem, &mut u, t, dt);
        let t1 = if step == cfg.nt { cfg.horizon } else { step as f64 * dt };
        d_dx(&u, dx, &mut du);
        let m0 = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let m1 = du.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !m0.is_finite() || !m1.is_finite() {
            return Err(Error::BlowUp { t: t1, detail: "non-finite state".into() });
        }
        if !f.is_zero() && (m0 >= BOX_FRACTION * f.b0 || m1 >= BOX_FRACTION * f.b1) {
            return Err(Error::BlowUp {
                t: t1,
                detail: format!("max|y| = {m0:.4e}, max|y_x| = {m1:.4e} left the box (b0 = {}, b1 = {})", f.b0, f.b1),
            });
        }
        traj.max_abs = traj.max_abs.max(m0);
        traj.max_abs_dx = traj.max_abs_dx.max(m1);
        for (p, &i) in probe_idx.iter().enumerate() {
            traj.probe_values[p].push(u[i]);
        }
        if step % stride == 0 || step == cfg.nt {
            traj.times.push(t1);
            traj.snapshots.push(u.clone());
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalError {
    pub sup: f64,
    pub l2: f64,
}

/// Sup and trapezoidal L2 distance between the final snapshot and `y1`.
pub fn terminal_error(traj: &Trajectory, y1: &[f64]) -> Result<TerminalError> {
    let (a, b) = (traj.x[0], *traj.x.last().unwrap());
    terminal_error_on(traj, y1, (a, b))
}

/// As [`terminal_error`], restricted to the nodes inside `window`.
pub fn terminal_error_on(traj: &Trajectory, y1: &[f64], window: (f64, f64)) -> Result<TerminalError> {
    let last = traj.terminal();
    if y1.len() != last.len() {
        return Err(Error::DimensionMismatch("target samples vs grid".into()));
    }
    let eps = 1e-12;
    let idx: Vec<usize> =
        (0..last.len()).filter(|&i| traj.x[i] >= window.0 - eps && traj.x[i] <= window.1 + eps).collect();
    if idx.len() < 2 {
        return Err(Error::InvalidInput("window holds fewer than two nodes".into()));
    }
    let e: Vec<f64> = idx.iter().map(|&i| last[i] - y1[i]).collect();
    let sup = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut int = 0.0;
    for j in 1..idx.len() {
        let h = traj.x[idx[j]] - traj.x[idx[j - 1]];
        int += 0.5 * h * (e[j - 1] * e[j - 1] + e[j] * e[j]);
    }
    Ok(TerminalError { sup, l2: int.sqrt() })
}

/// `y* = A sin(pi x) e^{-t}` together with the source that makes it a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSine {
    pub amplitude: f64,
}

impl ManufacturedSine {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.amplitude * (std::f64::consts::PI * x).sin() * (-t).exp()
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        let pi = std::f64::consts::PI;
        self.amplitude * pi * (pi * x).cos() * (-t).exp()
    }

    pub fn source(&self, f: &AnalyticNonlinearity) -> SourceFn {
        let (me, f) = (*self, f.clone());
        let pi2 = std::f64::consts::PI.powi(2);
        Arc::new(move |x, t| {
            let y = me.value(x, t);
            -y + pi2 * y - f.eval(x, y, me.dx(x, t))
        })
    }

    pub fn controls(&self, horizon: f64, samples: usize) -> Result<ControlSignal> {
        let t: Vec<f64> = (0..=samples).map(|j| horizon * j as f64 / samples as f64).collect();
        let mut c = ControlSignal::new(
            t.clone(),
            t.iter().map(|&t| self.value(-1.0, t)).collect(),
            t.iter().map(|&t| self.value(1.0, t)).collect(),
        )?;
        c.dh_minus = Some(t.iter().map(|&t| -self.value(-1.0, t)).collect());
        c.dh_plus = Some(t.iter().map(|&t| -self.value(1.0, t)).collect());
        Ok(c)
    }
}
