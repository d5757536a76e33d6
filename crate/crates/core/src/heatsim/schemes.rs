//! Time-stepping schemes for the forward problem.

use std::sync::{Arc, OnceLock};

use serde_json::Value;

use super::interp::Tridiagonal;
use super::Problem;
use crate::error::{Error, Result};
use crate::registry::Registry;

pub trait Scheme: Send + Sync {
    fn name(&self) -> &'static str;
    /// Smallest admissible grid size (boundary nodes included).
    fn min_nodes(&self) -> usize;
    fn prepare(&self, n: usize, dx: f64, dt: f64) -> Result<Box<dyn Stepper>>;
}

pub trait Stepper {
    /// Advances the full nodal vector from `t` to `t + dt`; boundary nodes are
    /// overwritten with the controls at `t + dt`.
    fn step(&mut self, p: &Problem<'_>, u: &mut [f64], t: f64, dt: f64);
}

pub type SharedScheme = Arc<dyn Scheme>;

pub fn schemes() -> &'static Registry<SharedScheme> {
    static REG: OnceLock<Registry<SharedScheme>> = OnceLock::new();
    REG.get_or_init(|| {
        Registry::new("scheme")
            .with("imex_cn", |_: &Value| Ok(Arc::new(ImexCn) as SharedScheme))
            .with("explicit_rk4_check", |_: &Value| Ok(Arc::new(ExplicitRk4) as SharedScheme))
    })
}

/// Fourth-order compact (Padé) Laplacian with Crank-Nicolson, the source and
/// nonlinearity handled by an explicit predictor and one trapezoidal corrector.
pub struct ImexCn;

struct ImexCnStepper {
    lhs: Tridiagonal,
    r: f64,
    off: f64,
    f_old: Vec<f64>,
    f_new: Vec<f64>,
    rhs: Vec<f64>,
    star: Vec<f64>,
}

impl Scheme for ImexCn {
    fn name(&self) -> &'static str {
        "imex_cn"
    }
    fn min_nodes(&self) -> usize {
        5
    }
    fn prepare(&self, n: usize, dx: f64, dt: f64) -> Result<Box<dyn Stepper>> {
        let m = n - 2;
        let r = dt / (dx * dx);
        let off = 1.0 / 12.0 - r / 2.0;
        let lhs = Tridiagonal::new(vec![off; m], vec![10.0 / 12.0 + r; m], vec![off; m])?;
        Ok(Box::new(ImexCnStepper {
            lhs,
            r,
            off,
            f_old: vec![0.0; n],
            f_new: vec![0.0; n],
            rhs: vec![0.0; m],
            star: vec![0.0; n],
        }))
    }
}

impl ImexCnStepper {
    fn solve(&mut self, u: &[f64], forcing: &[f64], left: f64, right: f64, dt: f64, out: &mut [f64]) {
        let n = u.len();
        let m = n - 2;
        let (a, d) = (1.0 / 12.0 + self.r / 2.0, 10.0 / 12.0 - self.r);
        for j in 0..m {
            let i = j + 1;
            self.rhs[j] = a * (u[i - 1] + u[i + 1])
                + d * u[i]
                + dt * (forcing[i - 1] + 10.0 * forcing[i] + forcing[i + 1]) / 12.0;
        }
        self.rhs[0] -= self.off * left;
        self.rhs[m - 1] -= self.off * right;
        let inner = self.lhs.solve(&self.rhs);
        out[0] = left;
        out[n - 1] = right;
        out[1..n - 1].copy_from_slice(&inner);
    }
}

impl Stepper for ImexCnStepper {
    fn step(&mut self, p: &Problem<'_>, u: &mut [f64], t: f64, dt: f64) {
        let t1 = t + dt;
        let (left, right) = p.boundary(t1);
        let mut f_old = std::mem::take(&mut self.f_old);
        p.forcing(u, t, &mut f_old);
        if !p.has_forcing() {
            let mut star = std::mem::take(&mut self.star);
            self.solve(u, &f_old, left, right, dt, &mut star);
            u.copy_from_slice(&star);
            self.star = star;
            self.f_old = f_old;
            return;
        }
        let mut star = std::mem::take(&mut self.star);
        self.solve(u, &f_old, left, right, dt, &mut star);
        let mut f_new = std::mem::take(&mut self.f_new);
        p.forcing(&star, t1, &mut f_new);
        for (a, b) in f_new.iter_mut().zip(&f_old) {
            *a = 0.5 * (*a + b);
        }
        self.solve(u, &f_new, left, right, dt, &mut star);
        u.copy_from_slice(&star);
        self.star = star;
        self.f_new = f_new;
        self.f_old = f_old;
    }
}

/// Classical RK4 on a fourth-order explicit finite-difference Laplacian; the
/// step must satisfy `dt <= dx^2 / 2`.
pub struct ExplicitRk4;

struct Rk4Stepper {
    dx2: f64,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    forcing: Vec<f64>,
}

impl Scheme for ExplicitRk4 {
    fn name(&self) -> &'static str {
        "explicit_rk4_check"
    }
    fn min_nodes(&self) -> usize {
        7
    }
    fn prepare(&self, n: usize, dx: f64, dt: f64) -> Result<Box<dyn Stepper>> {
        if dt > dx * dx / 2.0 {
            return Err(Error::Config(format!(
                "explicit_rk4_check needs dt <= dx^2/2 (dt = {dt:.3e}, dx^2/2 = {:.3e})",
                dx * dx / 2.0
            )));
        }
        Ok(Box::new(Rk4Stepper {
            dx2: dx * dx,
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            forcing: vec![0.0; n],
        }))
    }
}

fn laplacian4(u: &[f64], dx2: f64, out: &mut [f64]) {
    let n = u.len();
    let s = 1.0 / (12.0 * dx2);
    out[0] = 0.0;
    out[n - 1] = 0.0;
    out[1] = s * (10.0 * u[0] - 15.0 * u[1] - 4.0 * u[2] + 14.0 * u[3] - 6.0 * u[4] + u[5]);
    out[n - 2] =
        s * (10.0 * u[n - 1] - 15.0 * u[n - 2] - 4.0 * u[n - 3] + 14.0 * u[n - 4] - 6.0 * u[n - 5] + u[n - 6]);
    for i in 2..n - 2 {
        out[i] = s * (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]);
    }
}

impl Rk4Stepper {
    fn rhs(&mut self, p: &Problem<'_>, u: &[f64], t: f64, idx: usize) {
        let mut k = std::mem::take(&mut self.k[idx]);
        laplacian4(u, self.dx2, &mut k);
        if p.has_forcing() {
            p.forcing(u, t, &mut self.forcing);
            for (a, b) in k.iter_mut().zip(&self.forcing) {
                *a += b;
            }
        }
        self.k[idx] = k;
    }
}

impl Stepper for Rk4Stepper {
    fn step(&mut self, p: &Problem<'_>, u: &mut [f64], t: f64, dt: f64) {
        let n = u.len();
        let half = t + 0.5 * dt;
        self.rhs(p, u, t, 0);
        for (idx, (c, tc)) in [(0.5, half), (0.5, half), (1.0, t + dt)].into_iter().enumerate() {
            let mut stage = std::mem::take(&mut self.stage);
            for i in 0..n {
                stage[i] = u[i] + c * dt * self.k[idx][i];
            }
            let (l, r) = p.boundary(tc);
            stage[0] = l;
            stage[n - 1] = r;
            self.rhs(p, &stage, tc, idx + 1);
            self.stage = stage;
        }
        for i in 1..n - 1 {
            u[i] += dt / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        let (l, r) = p.boundary(t + dt);
        u[0] = l;
        u[n - 1] = r;
    }
}
