//! The jet correspondence: march a spatial jet in `t`, march a pair of time
//! jets in `x`, check the mixed-derivative envelope and parity structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gevreybounds::BoundReport;
use crate::scalar::Scalar;
use crate::seriescore::compose::{check_domain, select_degree};
use crate::seriescore::{
    factorial, ln_factorial, AnalyticNonlinearity, BivariateJet, Composer, SpatialJet, TimeJetPair, TruncationSpec,
    R_HAT,
};

/// Controls the `(p, q)` truncation of compositions inside the recursions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Composition {
    #[serde(default)]
    pub tail_tol: f64,
    #[serde(default)]
    pub max_degree: Option<usize>,
}

impl Composition {
    fn spec(&self, kmax: usize, nmax: usize) -> TruncationSpec {
        TruncationSpec { kmax, nmax, tail_tol: self.tail_tol, max_degree: self.max_degree }
    }
}

pub fn propagate_time<S: Scalar>(y0: &SpatialJet<S>, f: &AnalyticNonlinearity, nmax: usize) -> Result<BivariateJet<S>> {
    propagate_time_with(y0, f, nmax, &Composition::default())
}

/// Fills `k + 2n <= Kmax` from `c[k][n+1] = c[k+2][n] + F[k][n]`.
pub fn propagate_time_with<S: Scalar>(
    y0: &SpatialJet<S>,
    f: &AnalyticNonlinearity,
    nmax: usize,
    opts: &Composition,
) -> Result<BivariateJet<S>> {
    let kmax = y0.kmax();
    if y0.a.len() < 2 || kmax < 2 * nmax + 1 {
        return Err(Error::DepthExhausted(format!("Kmax = {kmax} < 2 Nmax + 1 = {}", 2 * nmax + 1)));
    }
    check_domain(f, y0.a[0].to_f64(), y0.a[1].to_f64())?;
    let norm_y: f64 = y0.a.iter().enumerate().map(|(k, v)| v.abs_f64() / factorial(k)).sum();
    let norm_yx: f64 = y0.a.iter().skip(1).enumerate().map(|(k, v)| v.abs_f64() / factorial(k)).sum();
    let degree = select_degree(f, 0.0, norm_y, norm_yx, &opts.spec(kmax, nmax))?;

    let mut jet = BivariateJet::absent(kmax, nmax);
    let mut comp = Composer::<S>::new(f, kmax, nmax, 0.0, degree);
    for (k, v) in y0.a.iter().enumerate() {
        jet.c[k][0] = Some(v.clone());
        comp.set_y(k, 0, v.clone());
    }
    for n in 0..nmax {
        for k in 0..=kmax - 2 - 2 * n {
            let fk = comp.eval(k, n);
            let v = jet.value(k + 2, n) + fk;
            jet.c[k][n + 1] = Some(v.clone());
            comp.set_y(k, n + 1, v);
        }
    }
    Ok(jet)
}

pub fn propagate_space<S: Scalar>(
    traces: &TimeJetPair<S>,
    f: &AnalyticNonlinearity,
    kmax: usize,
) -> Result<BivariateJet<S>> {
    propagate_space_with(traces, f, kmax, &Composition::default())
}

/// Fills `k + 2n <= 2 Nmax + 1`, `k <= Kmax`, from `c[k+2][n] = c[k][n+1] - F[k][n]`.
pub fn propagate_space_with<S: Scalar>(
    traces: &TimeJetPair<S>,
    f: &AnalyticNonlinearity,
    kmax: usize,
    opts: &Composition,
) -> Result<BivariateJet<S>> {
    let nmax = traces.nmax();
    if traces.d.len() != traces.d_tilde.len() {
        return Err(Error::DimensionMismatch("trace jets differ in length".into()));
    }
    if 2 * nmax + 1 < kmax {
        return Err(Error::DepthExhausted(format!("Nmax = {nmax} cannot reach Kmax = {kmax}")));
    }
    if kmax < 1 {
        return Err(Error::InvalidInput("Kmax must be at least 1".into()));
    }
    check_domain(f, traces.d[0].to_f64(), traces.d_tilde[0].to_f64())?;
    let norm_yx: f64 = traces.d_tilde.iter().enumerate().map(|(n, v)| v.abs_f64() / factorial(n)).sum();
    // y away from x = 0 carries the slope trace too.
    let norm_y: f64 = traces.d.iter().enumerate().map(|(n, v)| v.abs_f64() / factorial(n)).sum::<f64>() + norm_yx;
    let degree = select_degree(f, 0.0, norm_y, norm_yx, &opts.spec(kmax, nmax))?;

    let depth = 2 * nmax + 1;
    let mut jet = BivariateJet::absent(kmax, nmax);
    let mut comp = Composer::<S>::new(f, kmax, nmax, 0.0, degree);
    for n in 0..=nmax {
        jet.c[0][n] = Some(traces.d[n].clone());
        jet.c[1][n] = Some(traces.d_tilde[n].clone());
        comp.set_y(0, n, traces.d[n].clone());
        comp.set_y(1, n, traces.d_tilde[n].clone());
    }
    for k in 0..kmax.saturating_sub(1) {
        let mut n = 0;
        while k + 2 + 2 * n <= depth {
            let fk = comp.eval(k, n);
            let v = jet.value(k, n + 1) - fk;
            jet.c[k + 2][n] = Some(v.clone());
            comp.set_y(k + 2, n, v);
            n += 1;
        }
    }
    Ok(jet)
}

/// Largest `|c[k][n] - c[k+2][n] ...|` defect of the defining recursion over
/// every slot where both sides are present.
pub fn recursion_residual(jet: &BivariateJet<f64>, f: &AnalyticNonlinearity) -> f64 {
    let (kmax, nmax) = (jet.kmax(), jet.nmax());
    let mut comp = Composer::<f64>::new(f, kmax, nmax, jet.base_x, usize::MAX);
    for (k, n, v) in jet.present_entries() {
        comp.set_y(k, n, *v);
    }
    let mut worst: f64 = 0.0;
    for k in 0..kmax.saturating_sub(1) {
        for n in 0..nmax {
            if !(jet.is_present(k, n + 1) && jet.is_present(k + 2, n) && jet.is_present(k + 1, n)) {
                continue;
            }
            let fk = comp.eval(k, n);
            let scale = 1.0 + jet.value(k, n + 1).abs();
            worst = worst.max((jet.value(k, n + 1) - jet.value(k + 2, n) - fk).abs() / scale);
        }
    }
    worst
}

/// Checks `|c[k][n]| <= C' (2n+k)! / (R^k R'^{2n})` on every present entry.
/// The reported value is the smallest admissible `C'`.
pub fn verify_bounds_d2(jet: &BivariateJet<f64>, r: f64, rp: f64, cp: f64) -> BoundReport {
    let name = "D2 envelope";
    if !(R_HAT < rp && rp < r) {
        return BoundReport::le(name, f64::INFINITY, cp, format!("need R_hat < R' < R, got R' = {rp}, R = {r}"));
    }
    let mut best = 0.0f64;
    let mut witness = None;
    for (k, n, v) in jet.present_entries() {
        if *v == 0.0 {
            continue;
        }
        let ln_ratio = v.abs().ln() + k as f64 * r.ln() + 2.0 * n as f64 * rp.ln() - ln_factorial(k + 2 * n);
        let ratio = ln_ratio.exp();
        if ratio > best {
            best = ratio;
            witness = Some((k, n));
        }
    }
    let detail = match witness {
        Some((k, n)) if best > cp => format!("violated at (k, n) = ({k}, {n})"),
        Some((k, n)) => format!("max ratio at (k, n) = ({k}, {n})"),
        None => "zero jet".to_string(),
    };
    BoundReport::le(name, best, cp, detail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub jet_odd: bool,
    pub max_even_entry: f64,
    pub f_reflection_defect: f64,
    pub satisfied: bool,
}

/// Odd jet (`a_{2k} = 0`) and odd nonlinearity under `(x, y0, y1) -> (-x, -y0, y1)`,
/// the latter decided on 64 random points.
pub fn parity_check(a: &SpatialJet<f64>, f: &AnalyticNonlinearity) -> ParityReport {
    let max_even = a.a.iter().step_by(2).fold(0.0f64, |m, v| m.max(v.abs()));
    let defect = f.odd_reflection_defect(64, 0x0dd);
    ParityReport {
        jet_odd: max_even == 0.0,
        max_even_entry: max_even,
        f_reflection_defect: defect,
        satisfied: max_even == 0.0 && defect <= 1e-12,
    }
}

pub fn parity_project<S: Scalar>(a: &SpatialJet<S>) -> SpatialJet<S> {
    SpatialJet {
        a: a.a.iter().enumerate().map(|(k, v)| if k % 2 == 0 { S::zero() } else { v.clone() }).collect(),
    }
}

pub fn parity_require(a: &SpatialJet<f64>, f: &AnalyticNonlinearity) -> Result<ParityReport> {
    let rep = parity_check(a, f);
    if !rep.satisfied {
        return Err(Error::Config(format!(
            "single-control mode needs odd data and odd f: max even entry {:.3e}, reflection defect {:.3e}",
            rep.max_even_entry, rep.f_reflection_defect
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers() -> AnalyticNonlinearity {
        AnalyticNonlinearity::new([((1, 1, 0), -1.0)], 25.0, [5.0; 3]).unwrap()
    }

    #[test]
    fn heat_shifts_derivatives() {
        let a: Vec<f64> = (0..12).map(|k| (k as f64).sin()).collect();
        let jet = propagate_time(&SpatialJet::new(a.clone()), &AnalyticNonlinearity::zero(), 5).unwrap();
        for (k, n, v) in jet.present_entries() {
            assert_eq!(*v, a[k + 2 * n]);
        }
        assert!(!jet.is_present(11, 1));
    }

    #[test]
    fn burgers_on_x() {
        let mut a = vec![0.0; 8];
        a[1] = 1.0;
        let jet = propagate_time(&SpatialJet::new(a), &burgers(), 3).unwrap();
        assert_eq!(jet.value(0, 1), 0.0);
        assert_eq!(jet.value(1, 1), -1.0);
    }

    #[test]
    fn allen_cahn_constant_state() {
        let f = AnalyticNonlinearity::new([((1, 0, 0), 1.0), ((3, 0, 0), -1.0)], 125.0, [5.0; 3]).unwrap();
        let mut a = vec![0.0; 6];
        a[0] = 0.3;
        let jet = propagate_time(&SpatialJet::new(a), &f, 2).unwrap();
        assert!((jet.value(0, 1) - (0.3 - 0.027)).abs() < 1e-15);
    }

    #[test]
    fn depth_checks() {
        let y0 = SpatialJet::new(vec![0.0; 6]);
        assert!(matches!(propagate_time(&y0, &burgers(), 3), Err(Error::DepthExhausted(_))));
        let tr = TimeJetPair::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(matches!(propagate_space(&tr, &burgers(), 6), Err(Error::DepthExhausted(_))));
    }

    #[test]
    fn space_constant_and_exponential() {
        let z = AnalyticNonlinearity::zero();
        let mut d = vec![0.0; 5];
        d[0] = 1.0;
        let jet = propagate_space(&TimeJetPair::new(d, vec![0.0; 5]).unwrap(), &z, 9).unwrap();
        for (k, n, v) in jet.present_entries() {
            assert_eq!(*v, if (k, n) == (0, 0) { 1.0 } else { 0.0 });
        }
        let jet = propagate_space(&TimeJetPair::new(vec![1.0; 5], vec![1.0; 5]).unwrap(), &z, 9).unwrap();
        assert!(jet.present_entries().all(|(_, _, v)| *v == 1.0));
        assert_eq!(jet.present_entries().count(), (0..5).map(|n| 10 - 2 * n).sum::<usize>());
    }

    #[test]
    fn odd_data_has_vanishing_trace() {
        let mut a = vec![0.0; 16];
        a[1] = 0.01;
        a[3] = 0.002;
        let jet = propagate_time(&SpatialJet::new(a.clone()), &burgers(), 7).unwrap();
        assert!((0..=7).all(|n| jet.value(0, n) == 0.0));
        assert!(parity_check(&SpatialJet::new(a), &burgers()).satisfied);
        let even = AnalyticNonlinearity::new([((2, 0, 0), 0.01)], 1.0, [5.0; 3]).unwrap();
        assert!(!parity_check(&SpatialJet::new(vec![0.0, 1.0]), &even).satisfied);
        let p = parity_project(&SpatialJet::new(vec![1.0, 2.0, 3.0]));
        assert_eq!(p.a, vec![0.0, 2.0, 0.0]);
    }

    #[test]
    fn d2_reports() {
        let zero = BivariateJet::<f64>::zeros(4, 2);
        let r = verify_bounds_d2(&zero, 4.9, 4.85, 1.0);
        assert!(r.satisfied && r.value == 0.0);
        let a: Vec<f64> = (0..20).map(|k| factorial(k) / 5f64.powi(k as i32)).collect();
        let jet = propagate_time(&SpatialJet::new(a), &AnalyticNonlinearity::zero(), 9).unwrap();
        let r = verify_bounds_d2(&jet, 4.9, 4.85, 10.0);
        assert!(r.satisfied, "{r:?}");
        let tight = verify_bounds_d2(&jet, 4.9, 4.85, r.value * 0.5);
        assert!(!tight.satisfied && tight.detail.contains("violated"));
    }

    #[test]
    fn residual_of_marched_jet_vanishes() {
        let tr = TimeJetPair::new(vec![0.01, -0.02, 0.005, 0.001], vec![0.003, 0.0, -0.01, 0.02]).unwrap();
        let jet = propagate_space(&tr, &burgers(), 7).unwrap();
        assert!(recursion_residual(&jet, &burgers()) < 1e-15);
    }
}
