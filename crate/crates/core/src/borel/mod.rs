//! Time traces: Borel realizations of Gevrey-2 jets, the flat cutoff, blends
//! and a few closed forms. Every trace is differentiated exactly through
//! Taylor arithmetic.

mod blend;
mod realize;
mod steps;

use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::seriescore::ln_factorial;
use crate::seriescore::taylor::Taylor;

pub use blend::{blend_traces, Blended};
pub use realize::{borel_realize, BorelOptions, BorelSum};
pub use steps::StepProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    BorelSum,
    Blended,
    Zero,
    ClosedForm,
}

/// `|g^(n)(t)| <= c h^n (2n)!` for `n <= n_cert` on the sampled domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub n_cert: usize,
    pub grid_points: usize,
}

pub trait TimeTrace: Debug + Send + Sync {
    fn kind(&self) -> TraceKind;
    fn domain(&self) -> (f64, f64);
    /// Taylor coefficients of the trace at `t` up to `order`.
    fn taylor(&self, t: f64, order: usize) -> Taylor;
    fn certificate(&self) -> Option<Certificate>;
    fn to_json(&self) -> Value;

    /// `g(t), g'(t), ..., g^(order)(t)`.
    fn derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        self.taylor(t, order).derivatives()
    }
}

pub type SharedTrace = Arc<dyn TimeTrace>;

/// Grid maximum of `|g^(n)(t)| / (h^n (2n)!)` with its witness `(t, n)`.
pub fn certificate_constant(trace: &dyn TimeTrace, h: f64, n_cert: usize, grid: &[f64]) -> (f64, f64, usize) {
    let ln_h = h.ln();
    let weights: Vec<f64> = (0..=n_cert).map(|n| n as f64 * ln_h + ln_factorial(2 * n)).collect();
    let mut best = (0.0, grid.first().copied().unwrap_or(0.0), 0);
    for &t in grid {
        for (n, d) in trace.derivatives(t, n_cert).iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let r = (d.abs().ln() - weights[n]).exp();
            if r > best.0 || r.is_nan() {
                best = (r, t, n);
            }
        }
    }
    best
}

pub fn uniform_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![a];
    }
    (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect()
}

/// Validates a stored certificate on `points` uniformly spaced samples.
pub fn validate_certificate(trace: &dyn TimeTrace, points: usize) -> Result<()> {
    let Some(cert) = trace.certificate() else {
        return Ok(());
    };
    let (a, b) = trace.domain();
    let (c, t, n) = certificate_constant(trace, cert.h, cert.n_cert, &uniform_grid(a, b, points));
    if !(c <= cert.c * (1.0 + 1e-9)) {
        return Err(Error::Certificate(format!(
            "grid quotient {c:.6e} at t = {t}, n = {n} exceeds C = {:.6e}",
            cert.c
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTrace {
    pub domain: (f64, f64),
}

impl TimeTrace for ZeroTrace {
    fn kind(&self) -> TraceKind {
        TraceKind::Zero
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn taylor(&self, _t: f64, order: usize) -> Taylor {
        Taylor::zero(order)
    }
    fn certificate(&self) -> Option<Certificate> {
        None
    }
    fn to_json(&self) -> Value {
        json!({"kind": "zero", "domain": [self.domain.0, self.domain.1]})
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedFormExpr {
    /// `scale * e^{rate (t - shift)}`.
    Exp { scale: f64, rate: f64, shift: f64 },
    /// `sum c_i (t - shift)^i`.
    Polynomial { coeffs: Vec<f64>, shift: f64 },
    /// Flat cutoff: 1 on `[0, T/4]`, 0 on `[3T/4, T]`.
    Cutoff { horizon: f64, sharpness: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub expr: ClosedFormExpr,
    pub domain: (f64, f64),
}

impl ClosedForm {
    pub fn exp(scale: f64, rate: f64, shift: f64, domain: (f64, f64)) -> Self {
        ClosedForm { expr: ClosedFormExpr::Exp { scale, rate, shift }, domain }
    }
}

impl TimeTrace for ClosedForm {
    fn kind(&self) -> TraceKind {
        TraceKind::ClosedForm
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn taylor(&self, t: f64, order: usize) -> Taylor {
        match &self.expr {
            ClosedFormExpr::Exp { scale, rate, shift } => {
                let mut c = Vec::with_capacity(order + 1);
                let mut v = scale * (rate * (t - shift)).exp();
                for i in 0..=order {
                    c.push(v);
                    v *= rate / (i + 1) as f64;
                }
                Taylor { c }
            }
            ClosedFormExpr::Polynomial { coeffs, shift } => {
                let s = t - shift;
                // Taylor shift of the polynomial to s
                let mut c = vec![0.0; order + 1];
                for (i, a) in coeffs.iter().enumerate() {
                    let mut binom = 1.0;
                    for j in 0..=i.min(order) {
                        c[j] += a * binom * s.powi((i - j) as i32);
                        binom *= (i - j) as f64 / (j + 1) as f64;
                    }
                }
                Taylor { c }
            }
            ClosedFormExpr::Cutoff { horizon, sharpness } => {
                let u = (t - horizon / 4.0) / (horizon / 2.0);
                StepProfile::InverseSquare(*sharpness).series(1.0 - u, order).rescale_arg(-2.0 / horizon)
            }
        }
    }
    fn certificate(&self) -> Option<Certificate> {
        None
    }
    fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.expr).unwrap_or(Value::Null);
        v["kind"] = json!("closed_form");
        v["domain"] = json!([self.domain.0, self.domain.1]);
        v
    }
}

/// Flat `G^{3/2}` cutoff `rho(t) = psi(1-u) / (psi(u) + psi(1-u))`, `u = (t - T/4)/(T/2)`,
/// `psi(s) = e^{-1/s^2}`.
pub fn gevrey_cutoff(horizon: f64) -> Result<ClosedForm> {
    gevrey_cutoff_with(horizon, 1.0)
}

/// As [`gevrey_cutoff`] with `psi(s) = e^{-c/s^2}`.
pub fn gevrey_cutoff_with(horizon: f64, sharpness: f64) -> Result<ClosedForm> {
    if !(horizon > 0.0) || !(sharpness > 0.0) {
        return Err(Error::InvalidInput("cutoff needs T > 0 and c > 0".into()));
    }
    Ok(ClosedForm { expr: ClosedFormExpr::Cutoff { horizon, sharpness }, domain: (0.0, horizon) })
}

fn domain_of(v: &Value) -> Result<(f64, f64)> {
    let d: [f64; 2] = serde_json::from_value(v.get("domain").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::Schema { path: "domain".into(), msg: e.to_string() })?;
    Ok((d[0], d[1]))
}

fn zero_from_json(v: &Value) -> Result<SharedTrace> {
    Ok(Arc::new(ZeroTrace { domain: domain_of(v)? }))
}

fn closed_form_from_json(v: &Value) -> Result<SharedTrace> {
    let expr: ClosedFormExpr =
        serde_json::from_value(v.clone()).map_err(|e| Error::Schema { path: "form".into(), msg: e.to_string() })?;
    Ok(Arc::new(ClosedForm { expr, domain: domain_of(v)? }))
}

fn borel_from_json(v: &Value) -> Result<SharedTrace> {
    Ok(Arc::new(BorelSum::from_json(v)?))
}

fn blended_from_json(v: &Value) -> Result<SharedTrace> {
    let part = |name: &str| {
        v.get(name)
            .ok_or_else(|| Error::Schema { path: name.into(), msg: "missing".into() })
            .and_then(trace_from_json)
    };
    Ok(Arc::new(blend_traces(part("hat")?, part("tilde")?, part("rho")?)?))
}

pub fn trace_kinds() -> &'static Registry<SharedTrace> {
    static REG: OnceLock<Registry<SharedTrace>> = OnceLock::new();
    REG.get_or_init(|| {
        Registry::new("trace kind")
            .with("zero", zero_from_json)
            .with("closed_form", closed_form_from_json)
            .with("borel_sum", borel_from_json)
            .with("blended", blended_from_json)
    })
}

pub fn trace_from_json(v: &Value) -> Result<SharedTrace> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Schema { path: "kind".into(), msg: "missing trace kind".into() })?;
    trace_kinds().build(kind, v)
}

/// CSV of `t, g, g', ..., g^(order)` on `grid`.
pub fn trace_csv(trace: &dyn TimeTrace, grid: &[f64], order: usize) -> String {
    let mut out = String::from("t");
    for n in 0..=order {
        out.push_str(&format!(",d{n}"));
    }
    out.push('\n');
    for &t in grid {
        out.push_str(&format!("{t:.16e}"));
        for d in trace.derivatives(t, order) {
            out.push_str(&format!(",{d:.16e}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_plateaus() {
        let rho = gevrey_cutoff(1.0).unwrap();
        assert_eq!(rho.derivatives(0.0, 0)[0], 1.0);
        assert_eq!(rho.derivatives(1.0, 0)[0], 0.0);
        let mid = rho.derivatives(0.5, 0)[0];
        assert!(mid > 0.0 && mid < 1.0);
        assert!(rho.derivatives(0.125, 10).iter().skip(1).all(|d| *d == 0.0));
        let g = uniform_grid(0.0, 1.0, 101);
        let vals: Vec<f64> = g.iter().map(|&t| rho.derivatives(t, 0)[0]).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn polynomial_closed_form() {
        let p = ClosedForm {
            expr: ClosedFormExpr::Polynomial { coeffs: vec![1.0, 2.0, 3.0], shift: 1.0 },
            domain: (0.0, 2.0),
        };
        // 1 + 2 s + 3 s^2 at s = 1: 6, derivative 8, second 6
        assert_eq!(p.derivatives(2.0, 3), vec![6.0, 8.0, 6.0, 0.0]);
    }

    #[test]
    fn json_round_trip() {
        let e: SharedTrace = Arc::new(ClosedForm::exp(1.0, 1.0, 0.0, (0.0, 1.0)));
        let back = trace_from_json(&e.to_json()).unwrap();
        assert_eq!(back.derivatives(0.3, 4), e.derivatives(0.3, 4));
        assert!(trace_from_json(&json!({"kind": "nope"})).is_err());
    }
}
