use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `4 e^{1/(2e)}`, the smallest admissible analyticity radius.
pub const R_HAT: f64 = 4.807_773_473_881_258;

/// `f(x, y0, y1) = sum a_{pqr} y0^p y1^q x^r` with `|a_{pqr}| <= M / (b0^p b1^q b2^r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNonlinearity", into = "RawNonlinearity")]
pub struct AnalyticNonlinearity {
    pub coeffs: BTreeMap<(u32, u32, u32), f64>,
    pub m: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawNonlinearity {
    #[serde(rename = "M")]
    m: f64,
    b0: f64,
    b1: f64,
    b2: f64,
    #[serde(default)]
    coeffs: Vec<(u32, u32, u32, f64)>,
}

impl TryFrom<RawNonlinearity> for AnalyticNonlinearity {
    type Error = Error;

    fn try_from(raw: RawNonlinearity) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (p, q, r, v) in raw.coeffs {
            if v != 0.0 {
                *coeffs.entry((p, q, r)).or_insert(0.0) += v;
            }
        }
        let f = AnalyticNonlinearity { coeffs, m: raw.m, b0: raw.b0, b1: raw.b1, b2: raw.b2 };
        f.validate()?;
        Ok(f)
    }
}

impl From<AnalyticNonlinearity> for RawNonlinearity {
    fn from(f: AnalyticNonlinearity) -> Self {
        RawNonlinearity {
            m: f.m,
            b0: f.b0,
            b1: f.b1,
            b2: f.b2,
            coeffs: f.coeffs.into_iter().map(|((p, q, r), v)| (p, q, r, v)).collect(),
        }
    }
}

impl AnalyticNonlinearity {
    pub fn new(coeffs: impl IntoIterator<Item = ((u32, u32, u32), f64)>, m: f64, b: [f64; 3]) -> Result<Self> {
        let f = AnalyticNonlinearity {
            coeffs: coeffs.into_iter().filter(|(_, v)| *v != 0.0).collect(),
            m,
            b0: b[0],
            b1: b[1],
            b2: b[2],
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zero() -> Self {
        AnalyticNonlinearity { coeffs: BTreeMap::new(), m: 1.0, b0: 5.0, b1: 5.0, b2: 5.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(Error::InvalidInput(format!("M = {} must be positive", self.m)));
        }
        for (name, b) in [("b0", self.b0), ("b1", self.b1), ("b2", self.b2)] {
            if !(b > 4.0) {
                return Err(Error::InvalidInput(format!("{name} = {b} must exceed 4")));
            }
        }
        for (&(p, q, r), &v) in &self.coeffs {
            if p == 0 && q == 0 {
                return Err(Error::InvalidInput(format!("a_(0,0,{r}) = {v} violates f(x,0,0) = 0")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("a_({p},{q},{r}) is not finite")));
            }
            let bound = self.coefficient_bound(p, q, r);
            if v.abs() > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "|a_({p},{q},{r})| = {} exceeds M/(b0^p b1^q b2^r) = {bound}",
                    v.abs()
                )));
            }
        }
        Ok(())
    }

    pub fn coefficient_bound(&self, p: u32, q: u32, r: u32) -> f64 {
        self.m / (self.b0.powi(p as i32) * self.b1.powi(q as i32) * self.b2.powi(r as i32))
    }

    /// Smallest `M` covering the stored coefficients for the given `b`.
    pub fn fitted_m(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(p, q, r), v)| v.abs() * self.b0.powi(p as i32) * self.b1.powi(q as i32) * self.b2.powi(r as i32))
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn uses_state(&self) -> bool {
        !self.coeffs.is_empty()
    }

    pub fn max_q(&self) -> u32 {
        self.coeffs.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y0: f64, y1: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(p, q, r), v)| v * y0.powi(p as i32) * y1.powi(q as i32) * x.powi(r as i32))
            .sum()
    }

    /// Grouped `A_{pq}(x) = sum_r a_{pqr} x^r`, ordered by `(p, q)`.
    pub fn grouped(&self) -> BTreeMap<(u32, u32), Vec<(u32, f64)>> {
        let mut out: BTreeMap<(u32, u32), Vec<(u32, f64)>> = BTreeMap::new();
        for (&(p, q, r), &v) in &self.coeffs {
            out.entry((p, q)).or_default().push((r, v));
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut f = self.clone();
        f.coeffs.values_mut().for_each(|v| *v *= s);
        f
    }

    /// Sum of two nonlinearities; the bound parameters are taken from `self`
    /// with `M` raised to cover both.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            *coeffs.entry(*k).or_insert(0.0) += v;
        }
        let mut f = AnalyticNonlinearity { coeffs, ..self.clone() };
        f.m = f.m.max(f.fitted_m()).max(other.m);
        f.validate()?;
        Ok(f)
    }

    /// The reflection `f(-x, -y0, y1) = -f(x, y0, y1)` on `n` random points.
    pub fn odd_reflection_defect(&self, n: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: f64 = rng.gen_range(-1.0..1.0);
                let y0: f64 = rng.gen_range(-1.0..1.0);
                let y1: f64 = rng.gen_range(-1.0..1.0);
                (self.eval(-x, -y0, y1) + self.eval(x, y0, y1)).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_hat_value() {
        assert!((R_HAT - 4.0 * (1.0 / (2.0 * std::f64::consts::E)).exp()).abs() < 1e-14);
    }

    #[test]
    fn rejects_constant_part_and_large_coefficients() {
        assert!(AnalyticNonlinearity::new([((0, 0, 1), 0.1)], 1.0, [5.0; 3]).is_err());
        assert!(AnalyticNonlinearity::new([((1, 0, 0), 2.0)], 1.0, [5.0; 3]).is_err());
        assert!(AnalyticNonlinearity::new([((1, 0, 0), 0.1)], 1.0, [4.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn json_shape() {
        let f: AnalyticNonlinearity =
            serde_json::from_str(r#"{"M": 25, "b0": 5, "b1": 5, "b2": 5, "coeffs": [[1,1,0,-1.0]]}"#).unwrap();
        assert_eq!(f.coeffs[&(1, 1, 0)], -1.0);
        let back: AnalyticNonlinearity = serde_json::from_value(serde_json::to_value(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
