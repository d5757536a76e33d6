//! Borel realization by term-wise cutoff modulation:
//!
//! `g(t) = sum_q d_q s^q / q! chi(m_q |s|)`, `s = t - base`,
//!
//! where `chi(s) = S(2 - 2|s|)` is a Gevrey-2 plateau (`chi = 1` on `|s| <= 1/2`,
//! support in `[-1, 1]`). Term `q` is bounded by `|d_q| m_q^{-q} / q!` on its
//! support, so the schedule
//!
//! `m_q = max(m_min, (|d_q| / (C_in q! theta^q))^{1/q})`, `C_in = max_q |d_q| / (H^q (2q)!)`
//!
//! keeps every term below `C_in theta^q`. The floor `m_min = 1/(2 span)` puts the
//! whole working interval inside each plateau. The first attempt uses the floor
//! for every term, which is the plain Taylor polynomial on the interval; if its
//! certificate against `H_hat^n (2n)!` is too large the schedule above is used,
//! and retightened once by halving `theta`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{certificate_constant, uniform_grid, Certificate, StepProfile, TimeTrace, TraceKind};
use crate::error::{Error, Result};
use crate::gevreybounds::e_to_inv_e;
use crate::seriescore::factorial;
use crate::seriescore::taylor::Taylor;

const PLATEAU: StepProfile = StepProfile::InverseLinear(1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorelOptions {
    pub n_cert: usize,
    /// Dense grid used to compute the certificate.
    pub grid_points: usize,
    /// Largest accepted `C / C_in`.
    pub inflation_limit: f64,
    pub theta: f64,
}

impl BorelOptions {
    pub fn for_nmax(nmax: usize) -> Self {
        BorelOptions { n_cert: 2 * nmax + 4, grid_points: 1001, inflation_limit: 1e6, theta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelTerm {
    pub d: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorelSum {
    pub base: f64,
    pub domain: (f64, f64),
    pub terms: Vec<BorelTerm>,
    pub h: f64,
    pub h_hat: f64,
    pub c_in: f64,
    /// `None` when every term sits on the floor `m_min`.
    pub theta: Option<f64>,
    pub cert: Certificate,
}

fn plateau_series(s0: f64, order: usize) -> Taylor {
    if s0 >= 0.0 {
        PLATEAU.series(2.0 - 2.0 * s0, order).rescale_arg(-2.0)
    } else {
        PLATEAU.series(2.0 + 2.0 * s0, order).rescale_arg(2.0)
    }
}

impl BorelSum {
    fn eval(base: f64, terms: &[BorelTerm], t: f64, order: usize) -> Taylor {
        let s0 = t - base;
        let mut acc = Taylor::zero(order);
        for (q, term) in terms.iter().enumerate() {
            if term.d == 0.0 || term.m * s0.abs() >= 1.0 {
                continue;
            }
            // (s0 + h)^q / q! = sum_j s0^{q-j} / ((q-j)! j!) h^j
            let mut poly = Taylor::zero(order);
            for j in 0..=q.min(order) {
                poly.c[j] = term.d * s0.powi((q - j) as i32) / (factorial(q - j) * factorial(j));
            }
            if term.m * s0.abs() <= 0.5 {
                acc = &acc + &poly;
            } else {
                let chi = plateau_series(term.m * s0, order).rescale_arg(term.m);
                acc = &acc + &(&poly * &chi);
            }
        }
        acc
    }

    pub fn from_json(v: &Value) -> Result<BorelSum> {
        let schema = |p: &str, e: serde_json::Error| Error::Schema { path: p.into(), msg: e.to_string() };
        let get = |p: &str| v.get(p).cloned().unwrap_or(Value::Null);
        let domain: [f64; 2] = serde_json::from_value(get("domain")).map_err(|e| schema("domain", e))?;
        Ok(BorelSum {
            base: serde_json::from_value(get("base")).map_err(|e| schema("base", e))?,
            domain: (domain[0], domain[1]),
            terms: serde_json::from_value(get("terms")).map_err(|e| schema("terms", e))?,
            h: serde_json::from_value(get("H")).map_err(|e| schema("H", e))?,
            h_hat: serde_json::from_value(get("H_hat")).map_err(|e| schema("H_hat", e))?,
            c_in: serde_json::from_value(get("C_in")).map_err(|e| schema("C_in", e))?,
            theta: serde_json::from_value(get("theta")).map_err(|e| schema("theta", e))?,
            cert: serde_json::from_value(get("certificate")).map_err(|e| schema("certificate", e))?,
        })
    }

    pub fn jet(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.d).collect()
    }
}

impl TimeTrace for BorelSum {
    fn kind(&self) -> TraceKind {
        TraceKind::BorelSum
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn taylor(&self, t: f64, order: usize) -> Taylor {
        Self::eval(self.base, &self.terms, t, order)
    }
    fn certificate(&self) -> Option<Certificate> {
        Some(self.cert)
    }
    fn to_json(&self) -> Value {
        json!({
            "kind": "borel_sum",
            "base": self.base,
            "domain": [self.domain.0, self.domain.1],
            "terms": self.terms,
            "H": self.h,
            "H_hat": self.h_hat,
            "C_in": self.c_in,
            "theta": self.theta,
            "certificate": self.cert,
        })
    }
}

fn schedule(d: &[f64], c_in: f64, theta: f64, m_min: f64) -> Vec<BorelTerm> {
    d.iter()
        .enumerate()
        .map(|(q, &dq)| {
            let m = if q == 0 || dq == 0.0 || theta.is_infinite() {
                m_min
            } else {
                let ln_m = ((dq.abs() / c_in).ln() - (factorial(q)).ln() - q as f64 * theta.ln()) / q as f64;
                m_min.max(ln_m.exp())
            };
            BorelTerm { d: dq, m }
        })
        .collect()
}

/// A trace on `domain` whose derivatives at `base` are `d`, certified against
/// `|g^(n)| <= C H_hat^n (2n)!`.
pub fn borel_realize(d: &[f64], h: f64, h_hat: f64, base: f64, domain: (f64, f64), opts: &BorelOptions) -> Result<BorelSum> {
    let bound = e_to_inv_e() * h;
    if !(h_hat > bound) {
        return Err(Error::GapCondition { h_hat, bound });
    }
    if !(domain.0 <= base && base <= domain.1) && !(domain.0 < domain.1) {
        return Err(Error::InvalidInput("empty realization domain".into()));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("jet entries must be finite".into()));
    }
    let c_in = d
        .iter()
        .enumerate()
        .map(|(q, v)| v.abs() / (h.powi(q as i32) * factorial(2 * q)))
        .fold(0.0, f64::max);
    let grid = uniform_grid(domain.0, domain.1, opts.grid_points);
    let span = (base - domain.0).abs().max((domain.1 - base).abs()).max(1e-12);
    let m_min = 1.0 / (2.0 * span);
    if c_in == 0.0 {
        let terms = d.iter().map(|_| BorelTerm { d: 0.0, m: m_min }).collect();
        let cert = Certificate { c: 0.0, h: h_hat, n_cert: opts.n_cert, grid_points: opts.grid_points };
        return Ok(BorelSum { base, domain, terms, h, h_hat, c_in, theta: None, cert });
    }
    let attempts = [None, Some(opts.theta), Some(0.5 * opts.theta)];
    let mut best: Option<BorelSum> = None;
    for theta in attempts {
        let terms = schedule(d, c_in, theta.unwrap_or(f64::INFINITY), m_min);
        let mut sum = BorelSum {
            base,
            domain,
            terms,
            h,
            h_hat,
            c_in,
            theta,
            cert: Certificate { c: f64::INFINITY, h: h_hat, n_cert: opts.n_cert, grid_points: opts.grid_points },
        };
        let (c, _, _) = certificate_constant(&sum, h_hat, opts.n_cert, &grid);
        sum.cert.c = c;
        if c.is_finite() && c <= opts.inflation_limit * c_in {
            return Ok(sum);
        }
        if c.is_finite() && best.as_ref().is_none_or(|b| c < b.cert.c) {
            best = Some(sum);
        }
    }
    let shown = best.map_or(f64::INFINITY, |b| b.cert.c);
    Err(Error::Certificate(format!(
        "Borel certificate C = {shown:.4e} exceeds {} x C_in = {:.4e}",
        opts.inflation_limit,
        opts.inflation_limit * c_in
    )))
}
