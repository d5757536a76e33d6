//! Effective Gevrey constants: weights `Gamma_{lambda,a}`, the `G_{L,a}` norms,
//! the cost of derivatives, `K_{q,mu}`, contraction sequences and the
//! `lambda_n` schedules, plus the admissibility checker.

use std::f64::consts::{E, PI};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::seriescore::{factorial, ln_factorial, AnalyticNonlinearity, R_HAT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub a: f64,
}

impl GevreyParams {
    pub fn new(lambda: f64, l: f64, a: f64) -> Result<Self> {
        if !(lambda > 1.0) || !(l > 0.0) {
            return Err(Error::InvalidInput(format!("Gevrey params need lambda > 1, L > 0 (got {lambda}, {l})")));
        }
        Ok(GevreyParams { lambda, l, a })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"<="` or `"<"`.
    pub comparison: String,
    pub satisfied: bool,
    pub mandatory: bool,
    pub detail: String,
}

impl BoundReport {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        BoundReport {
            name: name.into(),
            value,
            threshold,
            comparison: "<=".into(),
            satisfied: value <= threshold,
            mandatory: true,
            detail: detail.into(),
        }
    }

    pub fn lt(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        BoundReport {
            name: name.into(),
            value,
            threshold,
            comparison: "<".into(),
            satisfied: value < threshold,
            mandatory: true,
            detail: detail.into(),
        }
    }

    pub fn advisory(mut self) -> Self {
        self.mandatory = false;
        self
    }
}

/// `m` with `Gamma(k+1-a) = m!` on the shifted branch, or `k` on the factorial
/// branch; `None` when the shifted argument is not an integer.
fn shifted_index(a: f64, k: usize) -> Option<usize> {
    let kf = k as f64;
    if kf <= a.abs() + 1.0 {
        Some(k)
    } else if a.fract() == 0.0 {
        Some((kf - a) as usize)
    } else {
        None
    }
}

pub fn ln_gamma_la(lambda: f64, a: f64, k: usize) -> f64 {
    let kf = k as f64;
    let core = match shifted_index(a, k) {
        Some(m) => ln_factorial(m),
        None => ln_gamma(kf + 1.0 - a),
    };
    -5.0 * 2f64.ln() + lambda * core - 2.0 * (1.0 + kf).ln()
}

/// `Gamma_{lambda,a}(k)`; the factorial branch applies for `k <= |a| + 1`.
pub fn gamma_la(lambda: f64, a: f64, k: usize) -> f64 {
    let kf = k as f64;
    let core = match shifted_index(a, k) {
        Some(m) => factorial(m),
        None => gamma(kf + 1.0 - a),
    };
    let v = core.powf(lambda) / 32.0 / ((1.0 + kf) * (1.0 + kf));
    if v.is_finite() {
        v
    } else {
        ln_gamma_la(lambda, a, k).exp()
    }
}

/// Grid value of `|u|_{L,a}`; `samples[k][j] = |u^(k)(t_j)|`. This is a lower
/// bound of the true supremum.
pub fn seminorm_la(samples: &[Vec<f64>], params: &GevreyParams) -> Result<f64> {
    if samples.iter().all(|row| row.is_empty()) {
        return Err(Error::InvalidInput("empty sample set".into()));
    }
    let ln_l = params.l.ln();
    let mut best: f64 = 0.0;
    for (k, row) in samples.iter().enumerate() {
        let e = (k as f64 - params.a).abs();
        let w = params.l.powf(e) * gamma_la(params.lambda, params.a, k);
        let ln_w = e * ln_l + ln_gamma_la(params.lambda, params.a, k);
        for &v in row {
            if v != 0.0 {
                let r = if w.is_finite() && w > 0.0 { v.abs() / w } else { (v.abs().ln() - ln_w).exp() };
                best = best.max(r);
            }
        }
    }
    Ok(best)
}

/// `max(2^6 sup|u|, 2^3 L^{-1} |u'|_{L,a})`; `du_samples[k][j] = |u^(k+1)(t_j)|`.
pub fn norm_la(u_samples: &[f64], du_samples: &[Vec<f64>], params: &GevreyParams) -> Result<f64> {
    if u_samples.is_empty() {
        return Err(Error::InvalidInput("empty sample set".into()));
    }
    let sup = u_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let semi = if du_samples.iter().all(|r| r.is_empty()) { 0.0 } else { seminorm_la(du_samples, params)? };
    Ok((64.0 * sup).max(8.0 / params.l * semi))
}

/// `sup_{t >= 0} alpha^{-t} t^m = (m / (e ln alpha))^m`.
pub fn sup_alpha_power(alpha: f64, m: f64) -> f64 {
    (m / (E * alpha.ln())).powf(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCost {
    /// Threshold beyond which the Stirling ratio test holds.
    pub n_threshold: usize,
    pub finite_part: f64,
    pub dominant: f64,
    pub total: f64,
    pub report: BoundReport,
}

/// Effective form of the cost-of-derivatives bound for `u -> u^(q)` from
/// `G_{L,a}` into `G_{alpha L,b}`.
pub fn derivative_cost_bound(lambda: f64, delta: f64, a: f64, b: f64, q: usize, l: f64, alpha: f64) -> Result<DerivativeCost> {
    let d = q as f64 - a + b;
    if !(alpha > 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must exceed 1")));
    }
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!("d = q - a + b = {d} must be positive")));
    }
    if !(delta > 0.0) || !(lambda > 0.0) || !(l > 0.0) {
        return Err(Error::InvalidInput("delta, lambda and L must be positive".into()));
    }
    const SCAN: usize = 100_000;
    let qf = q as f64;
    let target = (1.0 + delta).ln() / lambda;
    let mut last_fail = 0usize;
    for k in 1..=SCAN {
        let kf = k as f64;
        let ok = kf + qf > a.abs() + 1.0
            && kf > b.abs() + 1.0
            && ln_gamma(kf + 1.0 + qf - a) - ln_gamma(kf + 1.0 - b) - d * kf.ln() <= target;
        if !ok {
            last_fail = k;
        }
    }
    if last_fail >= SCAN {
        return Err(Error::InvalidInput("Stirling ratio test never settles".into()));
    }
    let n = last_fail + 1;
    let ln_l = l.ln();
    let finite = (0..n)
        .map(|k| {
            let kf = k as f64;
            let e = (kf + qf - a).abs() - (kf - b).abs();
            (e * ln_l + ln_gamma_la(lambda, a, k + q) - ln_gamma_la(lambda, b, k)).exp()
        })
        .fold(0.0, f64::max);
    let dominant = (1.0 + delta) * alpha.powf(b) * l.powf(d) * sup_alpha_power(alpha, lambda * d);
    let total = finite + dominant;
    let report = BoundReport::le(
        "derivative_cost_finite_part",
        finite,
        f64::INFINITY,
        format!("max over k < N = {n} of L^(|k+q-a|-|k-b|) Gamma_(lambda,a)(k+q)/Gamma_(lambda,b)(k)"),
    )
    .advisory();
    Ok(DerivativeCost { n_threshold: n, finite_part: finite, dominant, total, report })
}

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 12;
    // B_2k / (2k)!
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|n| (n as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    let mut rising = s;
    let mut pow = nf.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        sum += b * rising * pow;
        let m = 2.0 * k as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        pow /= nf * nf;
    }
    sum
}

/// `K_{q,mu} = 2^{mu-q} (1+q)^{2q} sum_{i,j >= 0} (2i+j+1)^{-(mu-q)}`.
///
/// Grouping by `m = 2i+j+1` gives `sum_m floor((m+1)/2) m^{-s}`
/// `= (zeta(s-1) + (1 - 2^{-s}) zeta(s)) / 2`, evaluated to near machine precision.
pub fn kq_mu(q: usize, mu: f64) -> Result<f64> {
    let s = mu - q as f64;
    if !(s > 2.0) {
        return Err(Error::DivergentConstant(s));
    }
    let inner = 0.5 * (zeta(s - 1.0) + (1.0 - 2f64.powf(-s)) * zeta(s));
    Ok(2f64.powf(s) * ((1 + q) as f64).powi(2 * q as i32) * inner)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSequence {
    pub a: Vec<f64>,
    pub a_inf_lower: f64,
}

/// `a_{k+1} = a_k (1 - gamma/(1+k)^2)` with the lower bound `e^{-2 gamma zeta(2)}`.
pub fn contraction_sequence(gamma_: f64, kmax: usize) -> Result<ContractionSequence> {
    if !(gamma_ > 0.0 && gamma_ < 0.5) {
        return Err(Error::InvalidInput(format!("gamma = {gamma_} must lie in (0, 1/2)")));
    }
    let mut a = Vec::with_capacity(kmax + 1);
    a.push(1.0);
    for k in 0..kmax {
        let next = a[k] * (1.0 - gamma_ / ((1 + k) * (1 + k)) as f64);
        a.push(next);
    }
    let a_inf_lower = (-2.0 * gamma_ * PI * PI / 6.0).exp();
    if let Some(k) = a.iter().position(|&v| v < a_inf_lower) {
        return Err(Error::InvalidInput(format!("a[{k}] fell below the lower bound")));
    }
    Ok(ContractionSequence { a, a_inf_lower })
}

/// `gamma^{-1} sum_i (1+i)^2 x^i = gamma^{-1} (1+x)/(1-x)^3`.
pub fn series_condition(gamma_: f64, x: f64) -> f64 {
    (1.0 + x) / (1.0 - x).powi(3) / gamma_
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Leading factor `1 - eps`.
    Prop10 { eps: f64, r: f64, r_prime: f64 },
    /// Leading factor `(R1/R2)^2`.
    Appendix { r1: f64, r2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub kind: ScheduleKind,
    pub k_const: f64,
    pub c_bar: f64,
    pub mu: f64,
    pub delta: f64,
    pub b0: f64,
    pub b1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lambdas: Vec<f64>,
    pub n0: usize,
    pub limit: f64,
}

/// `C_bar = M sup_k (R/b2)^k (k+1)^mu`.
pub fn c_bar(m: f64, r: f64, b2: f64, mu: f64) -> Result<f64> {
    if !(r < b2) {
        return Err(Error::InvalidInput(format!("R = {r} must be below b2 = {b2}")));
    }
    let ln_q = (r / b2).ln();
    let k_star = (-mu / ln_q - 1.0).max(0.0);
    let best = [k_star.floor(), k_star.ceil()]
        .iter()
        .map(|&k| (k * ln_q + mu * (k + 1.0).ln()).exp())
        .fold(0.0, f64::max);
    Ok(m * best)
}

pub fn lambda_schedule(params: &ScheduleParams, n_max: usize) -> Result<Schedule> {
    let p = params;
    if !(p.delta > 0.0 && p.delta < 1.0) {
        return Err(Error::InvalidInput("delta must lie in (0, 1)".into()));
    }
    for (name, v) in [("K", p.k_const), ("C_bar", p.c_bar), ("mu", p.mu), ("b0", p.b0), ("b1", p.b1)] {
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive")));
        }
    }
    let three_mu = 3f64.powf(p.mu);
    let (lead, c2, c1): (f64, f64, f64) = match p.kind {
        ScheduleKind::Prop10 { eps, r, r_prime } => {
            if !(eps > 0.0 && eps < 1.0) || !(r > 0.0 && r_prime > 0.0) {
                return Err(Error::InvalidInput("prop10 schedule needs eps in (0,1) and R, R' > 0".into()));
            }
            let rp2 = r_prime * r_prime;
            (
                1.0 - eps,
                p.k_const / p.b0 * p.c_bar * rp2 * three_mu / (1.0 - p.delta),
                p.k_const / (p.b1 * r) * p.c_bar * rp2 * three_mu / (1.0 - p.delta).powi(2),
            )
        }
        ScheduleKind::Appendix { r1, r2 } => {
            if !(r1 > 0.0 && r1 < r2) {
                return Err(Error::InvalidInput(format!("appendix schedule needs 0 < R1 < R2 (got {r1}, {r2})")));
            }
            (
                (r1 / r2).powi(2),
                p.k_const / p.b0 * p.c_bar * r1 * r1 * three_mu / (1.0 - p.delta),
                p.k_const / p.b1 * p.c_bar * r1 * three_mu / (1.0 - p.delta).powi(2),
            )
        }
    };
    let lambdas: Vec<f64> = (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            lead + c2 / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0)) + c1 / (2.0 * nf + 2.0)
        })
        .collect();
    // both corrections decrease in n, so the first index below 1 is final
    let n0 = lambdas.iter().position(|&l| l <= 1.0).ok_or(Error::NoContraction(n_max))?;
    Ok(Schedule { lambdas, n0, limit: lead })
}

/// `(2n)! / (4^n (n!)^2) <= 1`, decided in exact integer arithmetic.
pub fn central_binomial_check(n: u32) -> bool {
    let fact = |m: u32| (1..=m).fold(BigUint::from(1u32), |acc, i| acc * i);
    let lhs = fact(2 * n);
    let rhs = BigUint::from(4u32).pow(n) * fact(n) * fact(n);
    lhs <= rhs
}

/// Admissible `(L, R'')` pair with the induced trace parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConstants {
    #[serde(rename = "L")]
    pub l: f64,
    pub r_second: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_hat")]
    pub h_hat: f64,
}

pub fn e_to_inv_e() -> f64 {
    (1.0 / E).exp()
}

/// Window `(4 e^{1/e} / R'^2, 1/4)` for `L`.
pub fn l_window(r_prime: f64) -> (f64, f64) {
    (4.0 * e_to_inv_e() / (r_prime * r_prime), 0.25)
}

/// Midpoint choices inside both windows unless `L` is given.
pub fn trace_constants(r_prime: f64, l: Option<f64>) -> Result<TraceConstants> {
    let (lo, hi) = l_window(r_prime);
    if !(lo < hi) {
        return Err(Error::Config(format!("empty L window ({lo}, {hi}) for R' = {r_prime}")));
    }
    let l = l.unwrap_or(0.5 * (lo + hi));
    if !(l > lo && l < hi) {
        return Err(Error::Config(format!("L = {l} outside ({lo}, {hi})")));
    }
    let r_lo = (4.0 * e_to_inv_e() / l).sqrt();
    let r_second = 0.5 * (r_lo + r_prime);
    Ok(TraceConstants { l, r_second, h: 1.0 / (r_second * r_second), h_hat: l / 4.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityInput<'a> {
    pub f: &'a AnalyticNonlinearity,
    pub r: f64,
    pub r_prime: f64,
    pub l: Option<f64>,
    /// Analyticity radius of the data class.
    pub r_class: f64,
}

pub fn check_admissibility(input: &AdmissibilityInput) -> Vec<BoundReport> {
    let f = input.f;
    let mut out = vec![
        BoundReport::lt("b0 > 4", 4.0, f.b0, "coefficient decay in y"),
        BoundReport::lt("b1 > 4", 4.0, f.b1, "coefficient decay in y_x"),
        BoundReport::lt("b2 > 4", 4.0, f.b2, "coefficient decay in x"),
        BoundReport::lt("b2 > R_hat", R_HAT, f.b2, format!("R_hat = 4 e^(1/(2e)) = {R_HAT:.6}")),
        BoundReport::lt("R > R_hat", R_HAT, input.r, "data radius"),
        BoundReport::lt("R_hat < R'", R_HAT, input.r_prime, "inner radius"),
        BoundReport::lt("R' < R", input.r_prime, input.r, "inner radius below data radius"),
        BoundReport::lt(
            "R < min(R_class, b2)",
            input.r,
            input.r_class.min(f.b2),
            format!("R_class = {}, b2 = {}", input.r_class, f.b2),
        ),
    ];
    let (lo, hi) = l_window(input.r_prime);
    out.push(BoundReport::lt("L window nonempty", lo, hi, format!("(4e^(1/e)/R'^2, 1/4) = ({lo:.6}, {hi})")));
    match trace_constants(input.r_prime, input.l) {
        Ok(tc) => {
            out.push(BoundReport::lt("L in window", lo, tc.l, format!("L = {:.6}", tc.l)));
            out.push(BoundReport::lt("L1 = L < 1/4", tc.l, 0.25, "radius of the initial trace datum"));
            out.push(BoundReport::lt(
                "gap H_hat > e^(1/e) H",
                e_to_inv_e() * tc.h,
                tc.h_hat,
                format!("R'' = {:.6}, H = {:.6}, H_hat = {:.6}", tc.r_second, tc.h, tc.h_hat),
            ));
        }
        Err(e) => out.push(BoundReport::lt("L in window", lo, input.l.unwrap_or(f64::NAN), e.to_string())),
    }
    let worst = (0..=80u32).find(|&n| !central_binomial_check(n));
    out.push(BoundReport::le(
        "Stirling (2n)! <= 4^n (n!)^2",
        if worst.is_some() { 2.0 } else { 1.0 },
        1.0,
        "exact integer check for n <= 80, C_s = 1",
    ));
    out.push(
        BoundReport::le("coefficient bound M", f.fitted_m(), f.m, "max |a_pqr| b0^p b1^q b2^r against declared M")
            .advisory(),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_la_values() {
        assert_eq!(gamma_la(2.0, 0.0, 0), 0.03125);
        assert_eq!(gamma_la(2.0, 0.0, 1), 0.0078125);
        let g35 = 15.0 * PI.sqrt() / 8.0;
        assert!((gamma_la(2.0, 0.5, 3) - g35 * g35 / 512.0).abs() < 1e-15);
        assert!((gamma_la(2.0, 0.5, 3) - 0.0215716).abs() < 1e-7);
    }

    #[test]
    fn seminorm_examples() {
        let p = GevreyParams::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(seminorm_la(&[vec![0.0; 3]], &p).unwrap(), 0.0);
        let one = vec![vec![1.0; 5], vec![0.0; 5]];
        assert!((seminorm_la(&one, &p).unwrap() - 32.0).abs() < 1e-12);
        assert!(seminorm_la(&[vec![]], &p).is_err());
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let exp: Vec<Vec<f64>> = (0..=10).map(|_| grid.iter().map(|t| t.exp()).collect()).collect();
        // e / Gamma_2(k) = 32 e (1+k)^2 / (k!)^2 peaks at k = 1
        assert!((seminorm_la(&exp, &p).unwrap() - 128.0 * E).abs() < 1e-9);
    }

    #[test]
    fn norm_examples() {
        let p = GevreyParams::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(norm_la(&[0.0; 4], &[vec![0.0; 4]], &p).unwrap(), 0.0);
        assert_eq!(norm_la(&[0.5; 4], &[vec![0.0; 4]], &p).unwrap(), 32.0);
        let t: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let du = vec![vec![1.0; 11], vec![0.0; 11]];
        assert!((norm_la(&t, &du, &p).unwrap() - 256.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_cost_examples() {
        let c = derivative_cost_bound(2.0, 0.1, 0.0, 0.5, 0, 1.0, E).unwrap();
        assert!((c.dominant - 1.1 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((sup_alpha_power(E, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(c.n_threshold >= 2);
        assert!(c.total > c.dominant);
        let ln_factor: Vec<f64> = [2.0, 10.0, 1e3, 1e6].iter().map(|&a| sup_alpha_power(a, 1.0)).collect();
        assert!(ln_factor.windows(2).all(|w| w[1] < w[0]));
        let damped = derivative_cost_bound(2.0, 0.1, 0.5, 0.0, 1, 1.0, 1e6).unwrap();
        let near = derivative_cost_bound(2.0, 0.1, 0.5, 0.0, 1, 1.0, 2.0).unwrap();
        assert!(damped.dominant < near.dominant);
        assert!(derivative_cost_bound(2.0, 0.1, 0.0, 0.5, 0, 1.0, 1.0).is_err());
        assert!(derivative_cost_bound(2.0, 0.1, 1.0, 0.0, 0, 1.0, 2.0).is_err());
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn kq_mu_edges() {
        assert!(matches!(kq_mu(1, 3.0), Err(Error::DivergentConstant(_))));
        assert!((kq_mu(0, 4.0).unwrap() - 17.7339).abs() < 1e-3);
    }

    #[test]
    fn contraction_examples() {
        let s = contraction_sequence(0.1, 50).unwrap();
        assert!((s.a[1] - 0.9).abs() < 1e-15);
        assert!((s.a_inf_lower - 0.71965).abs() < 1e-5);
        assert!(contraction_sequence(0.6, 5).is_err());
        assert!((series_condition(0.1, 0.8) - 2250.0).abs() < 1e-9);
    }

    #[test]
    fn schedules() {
        let base = ScheduleParams {
            kind: ScheduleKind::Prop10 { eps: 0.02, r: 4.9, r_prime: 4.85 },
            k_const: 20.0,
            c_bar: 1.0,
            mu: 3.5,
            delta: 0.1,
            b0: 5.0,
            b1: 5.0,
        };
        let s = lambda_schedule(&base, 100_000).unwrap();
        assert!(s.lambdas.windows(2).all(|w| w[1] < w[0]));
        assert!(s.lambdas[s.n0] <= 1.0 && (s.n0 == 0 || s.lambdas[s.n0 - 1] > 1.0));
        let appendix = ScheduleParams { kind: ScheduleKind::Appendix { r1: 2.0, r2: 2.0 }, ..base };
        assert!(lambda_schedule(&appendix, 10).is_err());
        let eps_zero = ScheduleParams { kind: ScheduleKind::Prop10 { eps: 0.0, r: 4.9, r_prime: 4.85 }, ..base };
        assert!(lambda_schedule(&eps_zero, 10).is_err());
    }

    #[test]
    fn windows() {
        let (lo, hi) = l_window(4.85);
        assert!((lo - 0.24567).abs() < 1e-5 && hi == 0.25);
        let tc = trace_constants(4.85, None).unwrap();
        assert!(tc.h_hat > e_to_inv_e() * tc.h);
        assert!(trace_constants(4.7, None).is_err());
        assert!(central_binomial_check(3));
    }
}
