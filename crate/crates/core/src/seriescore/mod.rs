//! Truncated jet arithmetic on raw derivatives `c[k][n] = d_x^k d_t^n y`.

pub(crate) mod compose;
mod nonlinearity;
pub mod taylor;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use compose::{nonlinearity_jet, Composer};
pub use nonlinearity::{AnalyticNonlinearity, R_HAT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    #[serde(rename = "Kmax", alias = "kmax")]
    pub kmax: usize,
    #[serde(rename = "Nmax", alias = "nmax")]
    pub nmax: usize,
    #[serde(default)]
    pub tail_tol: f64,
    /// Hard cap on the total degree `p + q` used in compositions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
}

impl TruncationSpec {
    pub fn new(kmax: usize, nmax: usize) -> Self {
        TruncationSpec { kmax, nmax, tail_tol: 0.0, max_degree: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kmax < 2 {
            return Err(Error::InvalidInput(format!("Kmax = {} must be >= 2", self.kmax)));
        }
        if !(self.tail_tol >= 0.0) {
            return Err(Error::InvalidInput("tail_tol must be >= 0".into()));
        }
        if self.kmax + 2 * self.nmax > 160 {
            return Err(Error::InvalidInput(format!(
                "Kmax + 2 Nmax = {} exceeds the binary64 factorial range",
                self.kmax + 2 * self.nmax
            )));
        }
        Ok(())
    }
}

/// Pascal triangle in the working scalar.
#[derive(Debug, Clone)]
pub struct Binomials<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Binomials<S> {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<S>> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut row = vec![S::one(); i + 1];
            for j in 1..i {
                row[j] = rows[i - 1][j - 1].clone() + rows[i - 1][j].clone();
            }
            rows.push(row);
        }
        Binomials { rows }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> &S {
        &self.rows[n][k]
    }

    pub fn size(&self) -> usize {
        self.rows.len() - 1
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// `c[k][n]` with absent entries for out-of-depth slots.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateJet<S = f64> {
    pub c: Vec<Vec<Option<S>>>,
    pub base_x: f64,
    pub base_t: f64,
}

impl<S: Scalar> BivariateJet<S> {
    pub fn zeros(kmax: usize, nmax: usize) -> Self {
        BivariateJet { c: vec![vec![Some(S::zero()); nmax + 1]; kmax + 1], base_x: 0.0, base_t: 0.0 }
    }

    pub fn absent(kmax: usize, nmax: usize) -> Self {
        BivariateJet { c: vec![vec![None; nmax + 1]; kmax + 1], base_x: 0.0, base_t: 0.0 }
    }

    pub fn constant(v: S, kmax: usize, nmax: usize) -> Self {
        let mut j = Self::zeros(kmax, nmax);
        j.c[0][0] = Some(v);
        j
    }

    pub fn from_fn(kmax: usize, nmax: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let c = (0..=kmax).map(|k| (0..=nmax).map(|n| Some(f(k, n))).collect()).collect();
        BivariateJet { c, base_x: 0.0, base_t: 0.0 }
    }

    pub fn with_base(mut self, x: f64, t: f64) -> Self {
        self.base_x = x;
        self.base_t = t;
        self
    }

    pub fn kmax(&self) -> usize {
        self.c.len() - 1
    }

    pub fn nmax(&self) -> usize {
        self.c[0].len() - 1
    }

    pub fn get(&self, k: usize, n: usize) -> Option<&S> {
        self.c.get(k).and_then(|row| row.get(n)).and_then(|v| v.as_ref())
    }

    pub fn value(&self, k: usize, n: usize) -> S {
        self.get(k, n).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_present(&self, k: usize, n: usize) -> bool {
        self.get(k, n).is_some()
    }

    pub fn present_entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.c.iter().enumerate().flat_map(|(k, row)| {
            row.iter().enumerate().filter_map(move |(n, v)| v.as_ref().map(|v| (k, n, v)))
        })
    }

    /// Taylor l1 norm `sum |c| / (k! n!)` over present entries.
    pub fn taylor_norm(&self) -> f64 {
        self.present_entries().map(|(k, n, v)| v.abs_f64() / (factorial(k) * factorial(n))).sum()
    }

    pub fn to_f64(&self) -> BivariateJet<f64> {
        BivariateJet {
            c: self.c.iter().map(|row| row.iter().map(|v| v.as_ref().map(|v| v.to_f64())).collect()).collect(),
            base_x: self.base_x,
            base_t: self.base_t,
        }
    }

    pub fn spatial_row(&self, n: usize) -> SpatialJet<S> {
        let a = self.c.iter().map_while(|row| row.get(n).cloned().flatten()).collect();
        SpatialJet { a }
    }

    pub fn time_pair(&self) -> TimeJetPair<S> {
        let d: Vec<S> = self.c[0].iter().map_while(|v| v.clone()).collect();
        let dt: Vec<S> = self.c[1].iter().map_while(|v| v.clone()).collect();
        let len = d.len().min(dt.len());
        TimeJetPair { d: d[..len].to_vec(), d_tilde: dt[..len].to_vec() }
    }
}

impl BivariateJet<f64> {
    pub fn to_json(&self) -> Value {
        json!({
            "base_x": self.base_x,
            "base_t": self.base_t,
            "Kmax": self.kmax(),
            "Nmax": self.nmax(),
            "c": self.c,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialJet<S = f64> {
    pub a: Vec<S>,
}

impl<S: Scalar> SpatialJet<S> {
    pub fn new(a: Vec<S>) -> Self {
        SpatialJet { a }
    }

    pub fn kmax(&self) -> usize {
        self.a.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeJetPair<S = f64> {
    pub d: Vec<S>,
    pub d_tilde: Vec<S>,
}

impl<S: Scalar> TimeJetPair<S> {
    pub fn new(d: Vec<S>, d_tilde: Vec<S>) -> Result<Self> {
        if d.len() != d_tilde.len() || d.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "trace jets have lengths {} and {}",
                d.len(),
                d_tilde.len()
            )));
        }
        Ok(TimeJetPair { d, d_tilde })
    }

    pub fn nmax(&self) -> usize {
        self.d.len() - 1
    }
}

fn check_dims<S: Scalar>(j: &BivariateJet<S>, trunc: &TruncationSpec, what: &str) -> Result<()> {
    if j.c.is_empty() || j.kmax() < trunc.kmax || j.nmax() < trunc.nmax {
        return Err(Error::DimensionMismatch(format!(
            "{what} has dims ({}, {}), need at least ({}, {})",
            j.c.len().saturating_sub(1),
            j.c.first().map_or(0, |r| r.len().saturating_sub(1)),
            trunc.kmax,
            trunc.nmax
        )));
    }
    Ok(())
}

/// Two-variable Leibniz product, truncated to `trunc`.
pub fn jet_mul<S: Scalar>(a: &BivariateJet<S>, b: &BivariateJet<S>, trunc: &TruncationSpec) -> Result<BivariateJet<S>> {
    check_dims(a, trunc, "left factor")?;
    check_dims(b, trunc, "right factor")?;
    if a.base_x != b.base_x || a.base_t != b.base_t {
        return Err(Error::InvalidInput("factors have different base points".into()));
    }
    let binom = Binomials::<S>::new(trunc.kmax.max(trunc.nmax));
    let mut out = BivariateJet::absent(trunc.kmax, trunc.nmax).with_base(a.base_x, a.base_t);
    for k in 0..=trunc.kmax {
        'entry: for n in 0..=trunc.nmax {
            let mut acc = S::zero();
            for j in 0..=k {
                for i in 0..=n {
                    let (Some(x), Some(y)) = (a.get(j, i), b.get(k - j, n - i)) else {
                        continue 'entry;
                    };
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    let w = binom.get(k, j).mul_ref(binom.get(n, i));
                    acc.add_assign_ref(&w.mul_ref(&x.mul_ref(y)));
                }
            }
            out.c[k][n] = Some(acc);
        }
    }
    Ok(out)
}

pub fn jet_shift_x<S: Scalar>(a: &BivariateJet<S>) -> Result<BivariateJet<S>> {
    if a.kmax() < 1 {
        return Err(Error::InvalidInput("shift_x needs Kmax >= 1".into()));
    }
    Ok(BivariateJet { c: a.c[1..].to_vec(), base_x: a.base_x, base_t: a.base_t })
}

pub fn jet_shift_t<S: Scalar>(a: &BivariateJet<S>) -> Result<BivariateJet<S>> {
    if a.nmax() < 1 {
        return Err(Error::InvalidInput("shift_t needs Nmax >= 1".into()));
    }
    Ok(BivariateJet {
        c: a.c.iter().map(|row| row[1..].to_vec()).collect(),
        base_x: a.base_x,
        base_t: a.base_t,
    })
}

/// Partial sum of `sum a_k x^k / k!` and the geometric tail of its envelope.
pub fn series_eval_x(a: &SpatialJet<f64>, x: f64, r1_hat: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("|x| = {} exceeds 1", x.abs())));
    }
    if !(r1_hat > x.abs()) {
        return Err(Error::RadiusExceeded { r1_hat, x: x.abs() });
    }
    let mut value = 0.0;
    let mut term = 1.0;
    let mut envelope: f64 = 0.0;
    let mut scale = 1.0;
    for (k, ak) in a.a.iter().enumerate() {
        if k > 0 {
            term *= x / k as f64;
            scale *= r1_hat / k as f64;
        }
        value += ak * term;
        envelope = envelope.max(ak.abs() * scale);
    }
    let rho = x.abs() / r1_hat;
    let remainder = if envelope == 0.0 { 0.0 } else { envelope * rho.powi(a.a.len() as i32) / (1.0 - rho) };
    Ok((value, remainder))
}

/// Value and first `t`-derivative of the x-series at `x` from columns 0 and 1.
pub fn eval_columns(jet: &BivariateJet<f64>, x: f64, kmax: usize) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    let mut term = 1.0;
    for k in 0..=kmax {
        if k > 0 {
            term *= x / k as f64;
        }
        v += jet.value(k, 0) * term;
        if jet.nmax() >= 1 {
            dv += jet.value(k, 1) * term;
        }
    }
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_jet(k: usize, n: usize) -> BivariateJet<f64> {
        let mut j = BivariateJet::zeros(k, n);
        j.c[1][0] = Some(1.0);
        j
    }

    #[test]
    fn constants_multiply() {
        let t = TruncationSpec::new(3, 2);
        let p = jet_mul(&BivariateJet::constant(2.0, 3, 2), &BivariateJet::constant(3.0, 3, 2), &t).unwrap();
        assert_eq!(p.value(0, 0), 6.0);
        assert!(p.present_entries().filter(|(k, n, _)| (*k, *n) != (0, 0)).all(|(_, _, v)| *v == 0.0));
    }

    #[test]
    fn x_squared() {
        let t = TruncationSpec::new(4, 2);
        let p = jet_mul(&x_jet(4, 2), &x_jet(4, 2), &t).unwrap();
        for (k, n, v) in p.present_entries() {
            assert_eq!(*v, if (k, n) == (2, 0) { 2.0 } else { 0.0 });
        }
    }

    #[test]
    fn shifts() {
        let s = jet_shift_x(&x_jet(3, 1)).unwrap();
        assert_eq!(s.value(0, 0), 1.0);
        assert_eq!(s.kmax(), 2);
        let z = jet_shift_t(&x_jet(3, 1)).unwrap();
        assert!(z.present_entries().all(|(_, _, v)| *v == 0.0));
        assert!(jet_shift_t(&x_jet(3, 0)).is_err());
    }

    #[test]
    fn mismatched_dims_rejected() {
        let t = TruncationSpec::new(5, 2);
        assert!(jet_mul(&x_jet(3, 2), &x_jet(5, 2), &t).is_err());
    }

    #[test]
    fn series_of_exp() {
        let a = SpatialJet::new(vec![1.0; 21]);
        let (v, r) = series_eval_x(&a, 1.0, 2.0).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
        assert!(r >= (std::f64::consts::E - v).abs());
        let (v, _) = series_eval_x(&SpatialJet::new(vec![0.0, 1.0, 0.0]), 0.5, 1.0).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(series_eval_x(&SpatialJet::new(vec![0.0; 5]), 1.0, 2.0).unwrap(), (0.0, 0.0));
        assert!(matches!(series_eval_x(&a, 0.5, 0.5), Err(Error::RadiusExceeded { .. })));
    }
}
