#![allow(dead_code)]

use heatreach::cauchyx::ControlSignal;
use heatreach::gevreybounds::{norm_la, GevreyParams};
use heatreach::heatsim::{simulate, terminal_error, ManufacturedSine, SimConfig};
use heatreach::seriescore::{factorial, AnalyticNonlinearity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `u^(k)(t)` for k = 0..=order.
type Catalog = Box<dyn Fn(f64, usize) -> Vec<f64>>;

pub fn random_function(rng: &mut ChaCha8Rng) -> Catalog {
    match rng.gen_range(0..4) {
        0 => {
            let c = rng.gen_range(-1.0..1.0);
            Box::new(move |_, order| (0..=order).map(|k| if k == 0 { c } else { 0.0 }).collect())
        }
        1 => {
            let b: f64 = rng.gen_range(-1.0..1.0);
            Box::new(move |t, order| (0..=order).map(|k| b.powi(k as i32) * (b * t).exp()).collect())
        }
        2 => {
            let (w, phi): (f64, f64) = (rng.gen_range(0.2..1.5), rng.gen_range(0.0..3.0));
            Box::new(move |t, order| {
                (0..=order).map(|k| w.powi(k as i32) * (w * t + phi + k as f64 * std::f64::consts::FRAC_PI_2).sin()).collect()
            })
        }
        _ => {
            let s = rng.gen_range(1.5..3.0);
            Box::new(move |t, order| (0..=order).map(|k| factorial(k) / (s - t).powi(k as i32 + 1)).collect())
        }
    }
}

pub fn norm_of(derivs: &[Vec<f64>], p: &GevreyParams) -> f64 {
    // derivs[j][k] = u^(k)(t_j)
    let order = derivs[0].len() - 1;
    let u: Vec<f64> = derivs.iter().map(|d| d[0]).collect();
    let du: Vec<Vec<f64>> = (1..=order).map(|k| derivs.iter().map(|d| d[k].abs()).collect()).collect();
    norm_la(&u, &du, p).unwrap()
}

/// Pairs `(u, v)` with `|uv| > |u| |v|` in the weighted norm.
pub fn algebra_violations(seed: u64, pairs: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..=100).map(|j| j as f64 / 100.0).collect();
    let order = 13;
    let mut violations = 0;
    for _ in 0..pairs {
        let (u, v) = (random_function(&mut rng), random_function(&mut rng));
        let l = rng.gen_range(0.5..2.0);
        let p = GevreyParams::new(2.0, l, 0.0).unwrap();
        let du: Vec<Vec<f64>> = grid.iter().map(|&t| u(t, order)).collect();
        let dv: Vec<Vec<f64>> = grid.iter().map(|&t| v(t, order)).collect();
        let duv: Vec<Vec<f64>> = du
            .iter()
            .zip(&dv)
            .map(|(a, b)| {
                (0..=order)
                    .map(|k| {
                        (0..=k).map(|i| factorial(k) / (factorial(i) * factorial(k - i)) * a[i] * b[k - i]).sum()
                    })
                    .collect()
            })
            .collect();
        if norm_of(&duv, &p) > norm_of(&du, &p) * norm_of(&dv, &p) + 1e-9 {
            violations += 1;
        }
    }
    violations
}

pub fn burgers() -> AnalyticNonlinearity {
    AnalyticNonlinearity::new([((1, 1, 0), -1.0)], 25.0, [5.0; 3]).unwrap()
}

pub fn exp_case(cfg: &SimConfig) -> (f64, Vec<f64>) {
    let n = cfg.nt;
    let t: Vec<f64> = (0..=n).map(|j| cfg.horizon * j as f64 / n as f64).collect();
    let hm: Vec<f64> = t.iter().map(|t| (t - 1.0).exp()).collect();
    let hp: Vec<f64> = t.iter().map(|t| (t + 1.0).exp()).collect();
    let mut c = ControlSignal::new(t, hm.clone(), hp.clone()).unwrap();
    c.dh_minus = Some(hm);
    c.dh_plus = Some(hp);
    let y0: Vec<f64> = cfg.grid().iter().map(|x| x.exp()).collect();
    let y1: Vec<f64> = cfg.grid().iter().map(|x| (x + cfg.horizon).exp()).collect();
    let tr = simulate(&y0, &c, &AnalyticNonlinearity::zero(), cfg).unwrap();
    (terminal_error(&tr, &y1).unwrap().sup, tr.terminal().to_vec())
}

pub fn mms_errors(levels: &[(usize, usize)]) -> Vec<f64> {
    let f = burgers();
    let m = ManufacturedSine { amplitude: 0.01 };
    levels
        .iter()
        .map(|&(nx, nt)| {
            let cfg = SimConfig::new(nx, nt, 1.0).with_source(m.source(&f));
            let y0: Vec<f64> = cfg.grid().iter().map(|&x| m.value(x, 0.0)).collect();
            let y1: Vec<f64> = cfg.grid().iter().map(|&x| m.value(x, 1.0)).collect();
            let tr = simulate(&y0, &m.controls(1.0, nt).unwrap(), &f, &cfg).unwrap();
            terminal_error(&tr, &y1).unwrap().sup
        })
        .collect()
}

