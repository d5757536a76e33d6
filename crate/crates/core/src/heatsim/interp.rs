//! Piecewise cubic control interpolation.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant; slopes come from derivative data or, failing
/// that, from a natural cubic spline through the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Cubic {
    t: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
}

impl Cubic {
    pub fn hermite(t: &[f64], y: &[f64], dy: &[f64]) -> Result<Self> {
        if t.len() < 2 || y.len() != t.len() || dy.len() != t.len() {
            return Err(Error::DimensionMismatch("hermite samples".into()));
        }
        Ok(Cubic { t: t.to_vec(), y: y.to_vec(), s: dy.to_vec() })
    }

    pub fn spline(t: &[f64], y: &[f64]) -> Result<Self> {
        let n = t.len();
        if n < 2 || y.len() != n {
            return Err(Error::DimensionMismatch("spline samples".into()));
        }
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        // second derivatives m, natural ends
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let sub: Vec<f64> = (0..k).map(|i| h[i]).collect();
            let diag: Vec<f64> = (0..k).map(|i| 2.0 * (h[i] + h[i + 1])).collect();
            let sup: Vec<f64> = (0..k).map(|i| h[i + 1]).collect();
            let rhs: Vec<f64> =
                (0..k).map(|i| 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i])).collect();
            let inner = Tridiagonal::new(sub, diag, sup)?.solve(&rhs);
            m[1..n - 1].copy_from_slice(&inner);
        }
        let mut s = vec![0.0; n];
        for i in 0..n - 1 {
            s[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
        }
        s[n - 1] = (y[n - 1] - y[n - 2]) / h[n - 2] + h[n - 2] * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
        Ok(Cubic { t: t.to_vec(), y: y.to_vec(), s })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = self.t.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let u = (x - self.t[i]) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h * h10 * self.s[i] + h01 * self.y[i + 1] + h * h11 * self.s[i + 1]
    }
}

/// Thomas algorithm with the forward sweep done once.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    c: Vec<f64>,
    inv: Vec<f64>,
}

impl Tridiagonal {
    /// `sub[i]`, `diag[i]`, `sup[i]` are the entries of row `i`; `sub[0]` and the last
    /// `sup` are ignored.
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if sub.len() != n || sup.len() != n || n == 0 {
            return Err(Error::DimensionMismatch("tridiagonal bands".into()));
        }
        let mut c = vec![0.0; n];
        let mut inv = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let d = diag[i] - if i > 0 { sub[i] * prev_c } else { 0.0 };
            if d == 0.0 || !d.is_finite() {
                return Err(Error::InvalidInput("singular tridiagonal system".into()));
            }
            inv[i] = 1.0 / d;
            c[i] = sup[i] * inv[i];
            prev_c = c[i];
        }
        Ok(Tridiagonal { sub, c, inv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.inv.len();
        let mut x = vec![0.0; n];
        for i in 0..n {
            let prev = if i > 0 { self.sub[i] * x[i - 1] } else { 0.0 };
            x[i] = (rhs[i] - prev) * self.inv[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.c[i] * x[i + 1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubic_interior() {
        let t: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let y: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let s = Cubic::spline(&t, &y).unwrap();
        assert!((s.eval(0.5123) - 0.5123f64.sin()).abs() < 1e-7);
        assert_eq!(s.eval(t[3]), y[3]);
    }

    #[test]
    fn hermite_exact_for_cubics() {
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3);
        let dp = |t: f64| -2.0 + 1.5 * t * t;
        let t = [0.0, 0.3, 1.0];
        let c = Cubic::hermite(&t, &t.map(p), &t.map(dp)).unwrap();
        for x in [0.1, 0.29, 0.77] {
            assert!((c.eval(x) - p(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn thomas_solves() {
        let m = Tridiagonal::new(vec![0.0, 1.0, 1.0], vec![4.0, 4.0, 4.0], vec![1.0, 1.0, 0.0]).unwrap();
        let x = m.solve(&[5.0, 6.0, 5.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }
}
