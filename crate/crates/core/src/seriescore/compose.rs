//! Entry-wise evaluation of the jet of `f(x, y, y_x)`.
//!
//! Entry `(k, n)` of every intermediate product depends only on input entries
//! `(j, i) <= (k, n)` componentwise, so the composer can be driven in any order
//! compatible with that partial order: row by row when marching in `x`, column
//! by column when marching in `t`.

use super::{factorial, AnalyticNonlinearity, Binomials, BivariateJet, TruncationSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

struct Term<S> {
    p: usize,
    q: usize,
    /// `A_{pq}^{(r)}(x0)` for `r = 0..=kd`.
    a: Vec<S>,
    support: Vec<usize>,
    /// Dense `y^p y_x^q` when both exponents are positive.
    mixed: Option<Vec<S>>,
}

pub struct Composer<S> {
    kd: usize,
    nd: usize,
    width: usize,
    binom: Binomials<S>,
    y: Vec<S>,
    yx: Vec<S>,
    ypow: Vec<Vec<S>>,
    yxpow: Vec<Vec<S>>,
    terms: Vec<Term<S>>,
    out: Vec<S>,
    coupled: bool,
}

impl<S: Scalar> Composer<S> {
    /// Composer for output entries `k <= kd`, `n <= nd`; terms with `p + q > degree` are dropped.
    pub fn new(f: &AnalyticNonlinearity, kd: usize, nd: usize, base_x: f64, degree: usize) -> Self {
        let width = nd + 1;
        let size = (kd + 1) * width;
        let mut terms = Vec::new();
        let (mut pmax, mut qmax) = (1, 1);
        for ((p, q), rs) in f.grouped() {
            let (p, q) = (p as usize, q as usize);
            if p + q > degree {
                continue;
            }
            let a = a_jet::<S>(&rs, kd, base_x);
            let support = (0..=kd).filter(|&r| !a[r].is_zero()).collect();
            pmax = pmax.max(p);
            qmax = qmax.max(q);
            let mixed = (p > 0 && q > 0).then(|| vec![S::zero(); size]);
            terms.push(Term { p, q, a, support, mixed });
        }
        Composer {
            kd,
            nd,
            width,
            binom: Binomials::new(kd.max(nd) + 1),
            y: vec![S::zero(); (kd + 2) * width],
            yx: vec![S::zero(); size],
            ypow: vec![vec![S::zero(); size]; pmax - 1],
            yxpow: vec![vec![S::zero(); size]; qmax - 1],
            terms,
            out: vec![S::zero(); size],
            coupled: true,
        }
    }

    /// Treats the second argument of `f` as an independent input set through [`Composer::set_y1`].
    pub fn decoupled(mut self) -> Self {
        self.coupled = false;
        self
    }

    pub fn set_y1(&mut self, k: usize, n: usize, v: S) {
        assert!(!self.coupled, "set_y1 needs a decoupled composer");
        self.yx[k * self.width + n] = v;
    }

    pub fn set_y(&mut self, k: usize, n: usize, v: S) {
        if self.coupled && k >= 1 && k - 1 <= self.kd {
            self.yx[(k - 1) * self.width + n] = v.clone();
        }
        self.y[k * self.width + n] = v;
    }

    pub fn y(&self, k: usize, n: usize) -> &S {
        &self.y[k * self.width + n]
    }

    fn product(binom: &Binomials<S>, width: usize, a: &[S], b: &[S], k: usize, n: usize) -> S {
        let mut acc = S::zero();
        for j in 0..=k {
            let row = (0..=n).filter_map(|i| {
                let x = &a[j * width + i];
                let y = &b[(k - j) * width + n - i];
                (!x.is_zero() && !y.is_zero()).then(|| (binom.get(n, i), x, y))
            });
            let s = S::dot3(row);
            if !s.is_zero() {
                acc.add_assign_ref(&binom.get(k, j).mul_ref(&s));
            }
        }
        acc
    }

    /// Evaluates `F[k][n]`; every entry strictly below `(k, n)` must already be evaluated,
    /// and `y[k][n]`, `y[k+1][n]` must be set.
    pub fn eval(&mut self, k: usize, n: usize) -> S {
        assert!(k <= self.kd && n <= self.nd, "entry ({k}, {n}) outside composer");
        let w = self.width;
        let idx = k * w + n;
        let ylow = &self.y[..(self.kd + 1) * w];
        for p in 0..self.ypow.len() {
            let prev: &[S] = if p == 0 { ylow } else { &self.ypow[p - 1] };
            let v = Self::product(&self.binom, w, prev, ylow, k, n);
            self.ypow[p][idx] = v;
        }
        for q in 0..self.yxpow.len() {
            let prev: &[S] = if q == 0 { &self.yx } else { &self.yxpow[q - 1] };
            let v = Self::product(&self.binom, w, prev, &self.yx, k, n);
            self.yxpow[q][idx] = v;
        }
        let mut total = S::zero();
        for t in 0..self.terms.len() {
            let (p, q) = (self.terms[t].p, self.terms[t].q);
            let yp: &[S] = match p {
                0 => &[],
                1 => ylow,
                _ => &self.ypow[p - 2],
            };
            let yq: &[S] = match q {
                0 => &[],
                1 => &self.yx,
                _ => &self.yxpow[q - 2],
            };
            if self.terms[t].mixed.is_some() {
                let v = Self::product(&self.binom, w, yp, yq, k, n);
                self.terms[t].mixed.as_mut().unwrap()[idx] = v;
            }
            let term = &self.terms[t];
            let base: &[S] = match (&term.mixed, p, q) {
                (Some(m), _, _) => m,
                (None, _, 0) => yp,
                _ => yq,
            };
            for &r in term.support.iter().take_while(|&&r| r <= k) {
                let x = &base[(k - r) * w + n];
                if x.is_zero() {
                    continue;
                }
                total.add_assign_ref(&self.binom.get(k, r).mul_ref(&term.a[r].mul_ref(x)));
            }
        }
        self.out[idx] = total.clone();
        total
    }

    pub fn output(&self, k: usize, n: usize) -> &S {
        &self.out[k * self.width + n]
    }
}

fn a_jet<S: Scalar>(rs: &[(u32, f64)], kd: usize, base_x: f64) -> Vec<S> {
    if base_x == 0.0 {
        let mut a = vec![S::zero(); kd + 1];
        for &(r, v) in rs {
            let r = r as usize;
            if r <= kd {
                let mut fact = S::one();
                for i in 2..=r {
                    fact = fact * S::from_i64(i as i64);
                }
                a[r] = S::from_f64(v) * fact;
            }
        }
        return a;
    }
    (0..=kd)
        .map(|d| {
            let v: f64 = rs
                .iter()
                .filter(|&&(r, _)| r as usize >= d)
                .map(|&(r, v)| v * factorial(r as usize) / factorial(r as usize - d) * base_x.powi((r as usize - d) as i32))
                .sum();
            S::from_f64(v)
        })
        .collect()
}

pub(crate) fn check_domain(f: &AnalyticNonlinearity, y00: f64, y10: f64) -> Result<()> {
    if !(y00.abs() < f.b0) || !(y10.abs() < f.b1) {
        return Err(Error::OutsideDomain(format!(
            "|y| = {:.3e}, |y_x| = {:.3e} against b0 = {}, b1 = {}",
            y00.abs(),
            y10.abs(),
            f.b0,
            f.b1
        )));
    }
    Ok(())
}

/// Smallest total degree whose neglected tail is below `tail_tol`, measured in
/// the submultiplicative Taylor l1 norm.
pub(crate) fn select_degree(
    f: &AnalyticNonlinearity,
    base_x: f64,
    norm_y: f64,
    norm_yx: f64,
    trunc: &TruncationSpec,
) -> Result<usize> {
    let grouped = f.grouped();
    let full = grouped.keys().map(|&(p, q)| (p + q) as usize).max().unwrap_or(0);
    let tail = |d: usize| -> f64 {
        grouped
            .iter()
            .filter(|(&(p, q), _)| (p + q) as usize > d)
            .map(|(&(p, q), rs)| {
                let a: f64 = rs.iter().map(|&(r, v)| v.abs() * (1.0 + base_x.abs()).powi(r as i32)).sum();
                a * norm_y.powi(p as i32) * norm_yx.powi(q as i32)
            })
            .sum()
    };
    // A zero tolerance means exact composition: a vanishing norm estimate must
    // not drop terms the full jet still sees.
    let mut degree = if trunc.tail_tol > 0.0 {
        (0..=full).find(|&d| tail(d) <= trunc.tail_tol).unwrap_or(full)
    } else {
        full
    };
    if let Some(cap) = trunc.max_degree {
        if degree > cap {
            let bound = tail(cap);
            if bound > trunc.tail_tol {
                return Err(Error::NonconvergentComposition { bound, degree: cap });
            }
            degree = cap;
        }
    }
    Ok(degree)
}

/// Jet of `(x, t) -> f(x + base_x, y, y_x)`; `y` must reach `Kmax + 1` in `x`.
pub fn nonlinearity_jet<S: Scalar>(
    f: &AnalyticNonlinearity,
    y: &BivariateJet<S>,
    trunc: &TruncationSpec,
) -> Result<BivariateJet<S>> {
    trunc.validate()?;
    if y.kmax() < trunc.kmax + 1 || y.nmax() < trunc.nmax {
        return Err(Error::DimensionMismatch(format!(
            "state jet ({}, {}) must cover ({}, {})",
            y.kmax(),
            y.nmax(),
            trunc.kmax + 1,
            trunc.nmax
        )));
    }
    let y00 = y.get(0, 0).map_or(0.0, |v| v.to_f64());
    let y10 = y.get(1, 0).map_or(0.0, |v| v.to_f64());
    check_domain(f, y00, y10)?;
    let norm_y = y.taylor_norm();
    let norm_yx = super::jet_shift_x(y)?.taylor_norm();
    let degree = select_degree(f, y.base_x, norm_y, norm_yx, trunc)?;
    let mut comp = Composer::<S>::new(f, trunc.kmax, trunc.nmax, y.base_x, degree);
    for (k, n, v) in y.present_entries() {
        if k <= trunc.kmax + 1 && n <= trunc.nmax {
            comp.set_y(k, n, v.clone());
        }
    }
    let mut out = BivariateJet::absent(trunc.kmax, trunc.nmax).with_base(y.base_x, y.base_t);
    for k in 0..=trunc.kmax {
        for n in 0..=trunc.nmax {
            let v = comp.eval(k, n);
            if y.is_present(k, n) && y.is_present(k + 1, n) {
                out.c[k][n] = Some(v);
            }
        }
    }
    Ok(out)
}
