//! The sideways Cauchy problem in `x`: per-time power-series synthesis from the
//! traces at `x = 0`, and a Picard iteration on truncated jets as an
//! independent oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::borel::TimeTrace;
use crate::error::{Error, Result};
use crate::jetmap::{propagate_space_with, Composition};
use crate::seriescore::{
    factorial, ln_factorial, series_eval_x, AnalyticNonlinearity, BivariateJet, Composer, SpatialJet, TimeJetPair,
    TruncationSpec,
};

/// Margin above `4/e` below which an `R1` estimate is flagged.
pub const R1_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub t: Vec<f64>,
    pub h_minus: Vec<f64>,
    pub h_plus: Vec<f64>,
    /// Time derivatives at the samples, when the synthesis provides them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh_minus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh_plus: Option<Vec<f64>>,
    #[serde(default)]
    pub metadata: Value,
}

impl ControlSignal {
    pub fn new(t: Vec<f64>, h_minus: Vec<f64>, h_plus: Vec<f64>) -> Result<Self> {
        let c = ControlSignal { t, h_minus, h_plus, dh_minus: None, dh_plus: None, metadata: Value::Null };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 || self.h_minus.len() != n || self.h_plus.len() != n {
            return Err(Error::DimensionMismatch("control arrays must share a length >= 2".into()));
        }
        for d in [&self.dh_minus, &self.dh_plus].into_iter().flatten() {
            if d.len() != n {
                return Err(Error::DimensionMismatch("control derivative length".into()));
            }
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("control times must increase strictly".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,h_minus,h_plus\n");
        for i in 0..self.t.len() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.t[i], self.h_minus[i], self.h_plus[i]));
        }
        out
    }

    pub fn zero(t: Vec<f64>) -> Result<Self> {
        let n = t.len();
        let mut c = Self::new(t, vec![0.0; n], vec![0.0; n])?;
        c.dh_minus = Some(vec![0.0; n]);
        c.dh_plus = Some(vec![0.0; n]);
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub tgrid: Vec<f64>,
    pub xgrid: Vec<f64>,
    /// `state[j][i] = y(x_i, t_j)`.
    pub state: Vec<Vec<f64>>,
    pub controls: ControlSignal,
    pub remainder_bounds: Vec<f64>,
    pub r1: Vec<f64>,
    pub r1_fit_rms: Vec<f64>,
    /// Trace derivative order used per sample.
    pub trace_order: usize,
    pub kmax: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R1Estimate {
    pub r1: f64,
    pub fit_rms: f64,
    pub degenerate: bool,
}

/// Least-squares slope of `ln(|c_k| / k!)` over the nonzero entries among the last
/// `ceil(K/3)` coefficients; `R1 = exp(-slope)`. Fewer than two usable entries
/// give `R1 = inf`.
pub fn estimate_r1(c: &[f64]) -> R1Estimate {
    let k = c.len().saturating_sub(1);
    let window = k.div_ceil(3).max(2);
    let start = c.len().saturating_sub(window);
    let pts: Vec<(f64, f64)> = (start..c.len())
        .filter(|&i| c[i] != 0.0 && c[i].is_finite())
        .map(|i| (i as f64, c[i].abs().ln() - ln_factorial(i)))
        .collect();
    if pts.len() < 2 {
        return R1Estimate { r1: f64::INFINITY, fit_rms: 0.0, degenerate: true };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    R1Estimate { r1: (-slope).exp(), fit_rms: rms, degenerate: false }
}

/// Trace order needed so that the `x`-series reaches `Kmax` in both the value
/// and the first time derivative.
pub fn synthesis_trace_order(trunc: &TruncationSpec) -> usize {
    trunc.nmax.max(trunc.kmax.saturating_sub(1).div_ceil(2)) + 1
}

struct Sample {
    row: Vec<f64>,
    h: (f64, f64),
    dh: (f64, f64),
    remainder: f64,
    r1: R1Estimate,
}

#[allow(clippy::too_many_arguments)]
fn synthesize_one(
    g0: &dyn TimeTrace,
    g1: &dyn TimeTrace,
    f: &AnalyticNonlinearity,
    trunc: &TruncationSpec,
    order: usize,
    t: f64,
    xgrid: &[f64],
    opts: &SynthesisOptions,
) -> Result<Sample> {
    let pair = TimeJetPair::new(g0.derivatives(t, order), g1.derivatives(t, order))?;
    let comp = Composition { tail_tol: trunc.tail_tol, max_degree: trunc.max_degree };
    let jet = propagate_space_with(&pair, f, trunc.kmax, &comp)?;
    let col0: Vec<f64> = (0..=trunc.kmax).map(|k| jet.value(k, 0)).collect();
    let col1: Vec<f64> = (0..=trunc.kmax).map(|k| jet.value(k, 1)).collect();
    let r1 = estimate_r1(&col0);
    if r1.r1 <= 1.0 && opts.fail_on_divergence {
        return Err(Error::Divergence { t, r1: r1.r1 });
    }
    let a0 = SpatialJet::new(col0);
    let a1 = SpatialJet::new(col1);
    let mut row = Vec::with_capacity(xgrid.len());
    let mut remainder: f64 = 0.0;
    for &x in xgrid {
        let (v, rem) = if r1.r1.is_finite() && r1.r1 > x.abs() {
            series_eval_x(&a0, x, r1.r1)?
        } else if r1.r1.is_finite() {
            (series_eval_x(&a0, x, f64::INFINITY)?.0, f64::INFINITY)
        } else {
            (series_eval_x(&a0, x, f64::INFINITY)?.0, 0.0)
        };
        row.push(v);
        remainder = remainder.max(rem);
    }
    let at = |a: &SpatialJet<f64>, x: f64| series_eval_x(a, x, f64::INFINITY).map(|r| r.0);
    Ok(Sample {
        row,
        h: (at(&a0, -1.0)?, at(&a0, 1.0)?),
        dh: (at(&a1, -1.0)?, at(&a1, 1.0)?),
        remainder,
        r1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Fail on `R1 <= 1`; otherwise the partial sums are kept with an infinite
    /// remainder bound and the sample is left to the diagnostics.
    pub fail_on_divergence: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { fail_on_divergence: true }
    }
}

/// Solves the sideways problem at every `t_j` independently (in parallel, output
/// in grid order) and samples the boundary controls at `x = -1, 1`.
pub fn synthesize_state(
    g0: &dyn TimeTrace,
    g1: &dyn TimeTrace,
    f: &AnalyticNonlinearity,
    trunc: &TruncationSpec,
    tgrid: &[f64],
    xgrid: &[f64],
) -> Result<SynthesisResult> {
    synthesize_state_with(g0, g1, f, trunc, tgrid, xgrid, &SynthesisOptions::default())
}

pub fn synthesize_state_with(
    g0: &dyn TimeTrace,
    g1: &dyn TimeTrace,
    f: &AnalyticNonlinearity,
    trunc: &TruncationSpec,
    tgrid: &[f64],
    xgrid: &[f64],
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    trunc.validate()?;
    let order = synthesis_trace_order(trunc);
    let samples: Vec<Result<Sample>> =
        tgrid.par_iter().map(|&t| synthesize_one(g0, g1, f, trunc, order, t, xgrid, opts)).collect();
    let mut state = Vec::with_capacity(tgrid.len());
    let (mut hm, mut hp, mut dhm, mut dhp) = (vec![], vec![], vec![], vec![]);
    let (mut rem, mut r1, mut rms) = (vec![], vec![], vec![]);
    for s in samples {
        let s = s?;
        state.push(s.row);
        hm.push(s.h.0);
        hp.push(s.h.1);
        dhm.push(s.dh.0);
        dhp.push(s.dh.1);
        rem.push(s.remainder);
        r1.push(s.r1.r1);
        rms.push(s.r1.fit_rms);
    }
    let mut controls = ControlSignal::new(tgrid.to_vec(), hm, hp)?;
    controls.dh_minus = Some(dhm);
    controls.dh_plus = Some(dhp);
    controls.metadata = serde_json::json!({"Kmax": trunc.kmax, "Nmax": trunc.nmax, "trace_order": order});
    Ok(SynthesisResult {
        tgrid: tgrid.to_vec(),
        xgrid: xgrid.to_vec(),
        state,
        controls,
        remainder_bounds: rem,
        r1,
        r1_fit_rms: rms,
        trace_order: order,
        kmax: trunc.kmax,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub r1_min: f64,
    /// Samples with `R1 <= 1`.
    pub divergent: Vec<usize>,
    pub flagged: Vec<usize>,
    pub degenerate: bool,
    pub max_fit_rms: f64,
    pub max_remainder: f64,
    pub pass: bool,
}

pub fn convergence_diagnostics(result: &SynthesisResult) -> Diagnostics {
    let r1_min = result.r1.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = 4.0 / std::f64::consts::E + R1_MARGIN;
    let flagged = result.r1.iter().enumerate().filter(|(_, r)| **r <= threshold).map(|(j, _)| j).collect::<Vec<_>>();
    Diagnostics {
        r1_min,
        divergent: result.r1.iter().enumerate().filter(|(_, r)| **r <= 1.0).map(|(j, _)| j).collect(),
        degenerate: r1_min.is_infinite(),
        max_fit_rms: result.r1_fit_rms.iter().copied().fold(0.0, f64::max),
        max_remainder: result.remainder_bounds.iter().copied().fold(0.0, f64::max),
        pass: r1_min > 1.0 && flagged.is_empty(),
        flagged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardWeights {
    pub r1: f64,
    pub r2: f64,
}

impl Default for PicardWeights {
    fn default() -> Self {
        PicardWeights { r1: 1.5, r2: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    /// `(u, v)` of every iterate, `U_0` first.
    pub iterates: Vec<(BivariateJet<f64>, BivariateJet<f64>)>,
    pub deltas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `|F(U_k) - F(U_{k-1})| / |U_k - U_{k-1}|` in the same weighted norm.
    pub nonlinear_ratios: Vec<f64>,
    pub diverged: bool,
}

impl PicardResult {
    pub fn fixed_point(&self) -> &BivariateJet<f64> {
        &self.iterates.last().expect("at least one iterate").0
    }

    /// Largest two-step rate `sqrt(delta_{i+2} / delta_i)` over the nonzero tail.
    /// A single step can be an isometry (`u` takes the previous `v`), two cannot.
    pub fn contraction_ratio(&self) -> f64 {
        let d: Vec<f64> = self.deltas.iter().copied().take_while(|v| *v > 0.0).collect();
        if d.len() < 3 {
            return 0.0;
        }
        let rates: Vec<f64> = d.windows(3).map(|w| (w[2] / w[0]).sqrt()).collect();
        rates[rates.len() / 2..].iter().copied().fold(0.0, f64::max)
    }

    /// Measured Lipschitz factor of the nonlinear part along the iteration.
    pub fn nonlinear_lipschitz(&self) -> f64 {
        self.nonlinear_ratios.iter().copied().filter(|r| r.is_finite()).fold(0.0, f64::max)
    }

    /// `eps` consistent with `ratio <= 4 a_0 eps` for `a_0 = 1`.
    pub fn eps_estimate(&self) -> f64 {
        self.contraction_ratio() / 4.0
    }
}

fn in_u(k: usize, n: usize, depth: usize) -> bool {
    k + 2 * n <= depth
}

fn in_v(k: usize, n: usize, depth: usize) -> bool {
    k + 1 + 2 * n <= depth
}

fn weighted_sup(du: &BivariateJet<f64>, dv: &BivariateJet<f64>, w: &PicardWeights) -> f64 {
    let weight = |k: usize, n: usize| {
        (k as f64 * w.r1.ln() + 2.0 * n as f64 * w.r2.ln() - ln_factorial(k + 2 * n)).exp()
    };
    let a = du.present_entries().map(|(k, n, v)| v.abs() * weight(k, n));
    let b = dv.present_entries().map(|(k, n, v)| v.abs() * weight(k + 1, n));
    a.chain(b).fold(0.0, f64::max)
}

/// `U_{k+1} = U_0 + int_0^x (A U_k + F(U_k))` with `U = (u, v)`, `A(u, v) = (v, d_t u)`,
/// `F = (0, -f(x, u, v))`, on jets truncated to `u: k + 2n <= 2N + 1`,
/// `v: k + 1 + 2n <= 2N + 1`, `k <= Kmax`.
pub fn picard_solve(
    u0: &TimeJetPair<f64>,
    f: &AnalyticNonlinearity,
    kmax: usize,
    iters: usize,
    weights: &PicardWeights,
) -> Result<PicardResult> {
    let nmax = u0.nmax();
    let depth = 2 * nmax + 1;
    if depth < kmax {
        return Err(Error::DepthExhausted(format!("Nmax = {nmax} cannot reach Kmax = {kmax}")));
    }
    let mask = |j: BivariateJet<f64>, is_u: bool| {
        let mut j = j;
        for k in 0..=kmax {
            for n in 0..=nmax {
                let inside = if is_u { in_u(k, n, depth) } else { in_v(k, n, depth) };
                if !inside {
                    j.c[k][n] = None;
                }
            }
        }
        j
    };
    let mut u = BivariateJet::<f64>::zeros(kmax, nmax);
    let mut v = BivariateJet::<f64>::zeros(kmax, nmax);
    for n in 0..=nmax {
        u.c[0][n] = Some(u0.d[n]);
        v.c[0][n] = Some(u0.d_tilde[n]);
    }
    let (mut u, mut v) = (mask(u, true), mask(v, false));
    let mut iterates = vec![(u.clone(), v.clone())];
    let mut deltas = Vec::new();
    let mut ratios = Vec::new();
    let mut nonlinear_ratios = Vec::new();
    let mut prev_f: Option<BivariateJet<f64>> = None;
    let mut diverged = false;
    let mut rising = 0;
    for _ in 0..iters {
        let mut comp = Composer::<f64>::new(f, kmax, nmax, 0.0, usize::MAX).decoupled();
        for (k, n, x) in u.present_entries() {
            comp.set_y(k, n, *x);
        }
        for (k, n, x) in v.present_entries() {
            comp.set_y1(k, n, *x);
        }
        let mut nu = BivariateJet::<f64>::zeros(kmax, nmax);
        let mut nv = BivariateJet::<f64>::zeros(kmax, nmax);
        let mut fj = BivariateJet::<f64>::zeros(kmax, nmax);
        for n in 0..=nmax {
            nu.c[0][n] = Some(u0.d[n]);
            nv.c[0][n] = Some(u0.d_tilde[n]);
        }
        for k in 0..kmax {
            for n in 0..=nmax {
                if in_u(k + 1, n, depth) {
                    nu.c[k + 1][n] = Some(v.value(k, n));
                }
                if in_v(k + 1, n, depth) {
                    let fk = comp.eval(k, n);
                    fj.c[k + 1][n] = Some(fk);
                    nv.c[k + 1][n] = Some(u.value(k, n + 1) - fk);
                }
            }
        }
        let (nu, nv, fj) = (mask(nu, true), mask(nv, false), mask(fj, false));
        let diff = |a: &BivariateJet<f64>, b: &BivariateJet<f64>| BivariateJet {
            c: a.c.iter().zip(&b.c).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.zip(*y).map(|(x, y)| x - y)).collect()).collect(),
            base_x: 0.0,
            base_t: 0.0,
        };
        let delta = weighted_sup(&diff(&nu, &u), &diff(&nv, &v), weights);
        if let (Some(pf), Some(&prev)) = (&prev_f, deltas.last()) {
            if prev > 0.0 {
                let zero = BivariateJet::<f64>::zeros(kmax, nmax);
                nonlinear_ratios.push(weighted_sup(&zero, &diff(&fj, pf), weights) / prev);
            }
        }
        prev_f = Some(fj);
        if let Some(&prev) = deltas.last() {
            if prev > 0.0 {
                ratios.push(delta / prev);
            }
            rising = if delta > prev { rising + 1 } else { 0 };
            if rising >= 3 {
                diverged = true;
            }
        }
        deltas.push(delta);
        u = nu;
        v = nv;
        iterates.push((u.clone(), v.clone()));
        if delta == 0.0 || diverged {
            break;
        }
    }
    Ok(PicardResult { iterates, deltas, ratios, nonlinear_ratios, diverged })
}

/// Maximum relative mismatch between two jets on their common present entries.
pub fn jet_distance(a: &BivariateJet<f64>, b: &BivariateJet<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, n, x) in a.present_entries() {
        if let Some(y) = b.get(k, n) {
            let scale = x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
            if x != y {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    worst
}

/// Raw derivatives of a function given by its Taylor coefficients.
pub fn raw_from_taylor(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().map(|(k, v)| v * factorial(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::borel::{ClosedForm, ZeroTrace};

    fn burgers() -> AnalyticNonlinearity {
        AnalyticNonlinearity::new([((1, 1, 0), -1.0)], 25.0, [5.0; 3]).unwrap()
    }

    #[test]
    fn zero_traces_zero_state() {
        let z = ZeroTrace { domain: (0.0, 1.0) };
        let tg: Vec<f64> = (0..5).map(|j| j as f64 / 4.0).collect();
        let xg = vec![-1.0, 0.0, 1.0];
        let r = synthesize_state(&z, &z, &burgers(), &TruncationSpec::new(10, 5), &tg, &xg).unwrap();
        assert!(r.state.iter().flatten().all(|v| *v == 0.0));
        assert!(r.controls.h_plus.iter().all(|v| *v == 0.0));
        assert!(convergence_diagnostics(&r).degenerate);
    }

    #[test]
    fn exponential_solution() {
        let e = ClosedForm::exp(1.0, 1.0, 0.0, (0.0, 1.0));
        let tg: Vec<f64> = (0..5).map(|j| j as f64 / 4.0).collect();
        let xg = vec![-1.0, 0.5, 1.0];
        let r = synthesize_state(&e, &e, &AnalyticNonlinearity::zero(), &TruncationSpec::new(24, 12), &tg, &xg).unwrap();
        for (j, t) in tg.iter().enumerate() {
            assert!((r.controls.h_plus[j] - (t + 1.0).exp()).abs() < 1e-13);
            assert!((r.controls.h_minus[j] - (t - 1.0).exp()).abs() < 1e-14);
            assert!((r.controls.dh_plus.as_ref().unwrap()[j] - (t + 1.0).exp()).abs() < 1e-13);
            assert!((r.state[j][1] - (t + 0.5).exp()).abs() < 1e-14);
        }
        assert!(r.r1.iter().all(|v| *v > 10.0));
        assert!(convergence_diagnostics(&r).pass);
    }

    #[test]
    fn r1_estimates() {
        let fact: Vec<f64> = (0..=21).map(|k| factorial(k) * 2f64.powi(k as i32)).collect();
        assert!((estimate_r1(&fact).r1 - 0.5).abs() < 1e-9);
        assert!(estimate_r1(&[0.0; 10]).degenerate);
    }

    #[test]
    fn picard_constant_state() {
        let mut d = vec![0.0; 6];
        d[0] = 1.0;
        let p = picard_solve(&TimeJetPair::new(d, vec![0.0; 6]).unwrap(), &AnalyticNonlinearity::zero(), 11, 40, &PicardWeights::default()).unwrap();
        assert_eq!(*p.deltas.last().unwrap(), 0.0);
        assert!(p.iterates.len() <= 13);
        let fp = p.fixed_point();
        assert!(fp.present_entries().all(|(k, n, v)| *v == if (k, n) == (0, 0) { 1.0 } else { 0.0 }));
    }
}
