//! Univariate truncated Taylor series `sum c_i h^i` used to differentiate the
//! closed-form traces exactly.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub c: Vec<f64>,
}

impl Taylor {
    pub fn zero(order: usize) -> Self {
        Taylor { c: vec![0.0; order + 1] }
    }

    pub fn constant(v: f64, order: usize) -> Self {
        let mut t = Self::zero(order);
        t.c[0] = v;
        t
    }

    /// `h -> v + h`.
    pub fn variable(v: f64, order: usize) -> Self {
        let mut t = Self::constant(v, order);
        if order > 0 {
            t.c[1] = 1.0;
        }
        t
    }

    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut f = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i > 0 {
                    f *= i as f64;
                }
                v / f
            })
            .collect();
        Taylor { c }
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut f = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i > 0 {
                    f *= i as f64;
                }
                v * f
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn scale(&self, s: f64) -> Self {
        Taylor { c: self.c.iter().map(|v| v * s).collect() }
    }

    /// Substitutes `h -> a h`.
    pub fn rescale_arg(&self, a: f64) -> Self {
        let mut p = 1.0;
        let c = self
            .c
            .iter()
            .map(|v| {
                let r = v * p;
                p *= a;
                r
            })
            .collect();
        Taylor { c }
    }

    /// `s^{-m}` expanded around `s0 != 0`.
    pub fn inverse_power(s0: f64, m: u32, order: usize) -> Self {
        // (s0 + h)^{-m} = s0^{-m} sum_k C(m+k-1, k) (-h/s0)^k
        let mut c = Vec::with_capacity(order + 1);
        let mut v = s0.powi(-(m as i32));
        for k in 0..=order {
            c.push(v);
            v *= -((m as usize + k) as f64) / ((k + 1) as f64) / s0;
        }
        Taylor { c }
    }

    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / self.c[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Taylor { c: r }
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Taylor { c: e }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl<'a> Mul<&'a Taylor> for &'a Taylor {
    type Output = Taylor;
    fn mul(self, o: &Taylor) -> Taylor {
        let n = self.c.len().min(o.c.len());
        let c = (0..n).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect();
        Taylor { c }
    }
}

impl<'a> Add<&'a Taylor> for &'a Taylor {
    type Output = Taylor;
    fn add(self, o: &Taylor) -> Taylor {
        Taylor { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a Taylor> for &'a Taylor {
    type Output = Taylor;
    fn sub(self, o: &Taylor) -> Taylor {
        Taylor { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}
