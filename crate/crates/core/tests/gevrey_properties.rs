mod common;

use heatreach::gevreybounds::*;
use heatreach::seriescore::factorial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gamma_spot_values() {
    assert_eq!(gamma_la(2.0, 0.0, 0), 1.0 / 32.0);
    assert_eq!(gamma_la(2.0, 0.0, 1), 0.0078125);
    let g35 = 15.0 * std::f64::consts::PI.sqrt() / 8.0;
    assert!((gamma_la(2.0, 0.5, 3) - g35 * g35 / 32.0 / 16.0).abs() < 1e-13);
    for k in 0..40 {
        let direct = factorial(k).powi(2) / 32.0 / ((1 + k) * (1 + k)) as f64;
        assert!((gamma_la(2.0, 0.0, k) - direct).abs() <= 1e-15 * direct, "{k}");
    }
}

#[test]
fn shifted_weights_are_smaller() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let a = rng.gen_range(0.0..3.0);
        let lambda = rng.gen_range(1.1..3.0);
        for k in 0..60 {
            assert!(ln_gamma_la(lambda, a, k) <= ln_gamma_la(lambda, 0.0, k) + 1e-12, "a = {a}, k = {k}");
        }
    }
}

#[test]
fn seminorm_examples() {
    let p = GevreyParams::new(2.0, 1.0, 0.0).unwrap();
    assert_eq!(seminorm_la(&[vec![1.0; 11]], &p).unwrap(), 32.0);
    assert_eq!(norm_la(&[0.0; 11], &[vec![0.0; 11]], &p).unwrap(), 0.0);
    let t: Vec<f64> = (0..=100).map(|j| j as f64 / 100.0).collect();
    assert_eq!(norm_la(&t, &[vec![1.0; 101]], &p).unwrap(), 256.0);
    assert!(seminorm_la(&[vec![]], &p).is_err());
}

#[test]
fn algebra_property_on_random_pairs() {
    assert_eq!(common::algebra_violations(2024, 200), 0);
}

fn kq_oracle(q: usize, mu: f64) -> f64 {
    let s = mu - q as f64;
    let m_max = 2_000_000usize;
    let mut sum = 0.0;
    for m in (1..=m_max).rev() {
        let count = ((m - 1) / 2 + 1) as f64;
        sum += count * (m as f64).powf(-s);
    }
    // sum_{m > M} (m/2 + 1) m^{-s} <= int_M^inf (x/2 + 1) x^{-s} dx
    let mf = m_max as f64;
    let tail = 0.5 * mf.powf(2.0 - s) / (s - 2.0) + mf.powf(1.0 - s) / (s - 1.0);
    2f64.powf(s) * ((1 + q) as f64).powi(2 * q as i32) * (sum + 0.5 * tail)
}

#[test]
fn kq_matches_double_sum() {
    for (q, mu) in [(0, 4.0), (1, 6.5), (2, 7.0)] {
        let k = kq_mu(q, mu).unwrap();
        let o = kq_oracle(q, mu);
        assert!((k - o).abs() <= 1e-9 * o, "q = {q}, mu = {mu}: {k} vs {o}");
    }
    assert!(kq_mu(1, 3.0).is_err());
}

#[test]
fn contraction_sequences() {
    for gamma in [0.05, 0.1, 0.2] {
        let s = contraction_sequence(gamma, 2000).unwrap();
        assert!(s.a.windows(2).all(|w| w[1] < w[0]));
        assert!(s.a.iter().all(|&a| a >= s.a_inf_lower));
    }
    let s = contraction_sequence(0.1, 3).unwrap();
    assert_eq!(s.a[1], 0.9);
    assert!((s.a_inf_lower - 0.719_65).abs() < 1e-5);
    let partial: f64 = (0..400).map(|i| ((1 + i) * (1 + i)) as f64 * 0.8f64.powi(i)).sum::<f64>() / 0.1;
    assert!((series_condition(0.1, 0.8) - partial).abs() < 1e-9 * partial);
    assert!(contraction_sequence(0.5, 3).is_err());
}

fn schedule_params(kind: ScheduleKind) -> ScheduleParams {
    ScheduleParams { kind, k_const: 1.0, c_bar: 1e-5, mu: 3.5, delta: 0.1, b0: 5.0, b1: 5.0 }
}

#[test]
fn lambda_schedules() {
    let s = lambda_schedule(&schedule_params(ScheduleKind::Prop10 { eps: 0.02, r: 4.9, r_prime: 4.85 }), 10_000).unwrap();
    assert!(s.lambdas.windows(2).all(|w| w[1] < w[0]));
    assert!(s.lambdas[s.n0] <= 1.0);
    assert!((s.lambdas[10_000] - 0.98).abs() < 1e-6);
    let same = ScheduleKind::Appendix { r1: 2.0, r2: 2.0 };
    assert!(lambda_schedule(&schedule_params(same), 100).is_err());
    let big = ScheduleParams { c_bar: 1e6, ..schedule_params(ScheduleKind::Prop10 { eps: 0.02, r: 4.9, r_prime: 4.85 }) };
    assert!(lambda_schedule(&big, 10).is_err());
}

#[test]
fn stirling_exact() {
    assert!((0..=80).all(central_binomial_check));
    assert_eq!(factorial(6) / (64.0 * factorial(3).powi(2)), 0.3125);
}

#[test]
fn derivative_cost_spot_values() {
    assert!((sup_alpha_power(std::f64::consts::E, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
    let c = derivative_cost_bound(2.0, 0.1, 0.5, 0.5, 0, 1.0, std::f64::consts::E);
    assert!(c.is_err(), "d = q - a + b = 0 must be rejected");
    let c = derivative_cost_bound(2.0, 0.1, 0.0, 0.5, 0, 1.0, std::f64::consts::E).unwrap();
    assert!((c.dominant - 1.1 * (-0.5f64).exp()).abs() < 1e-5, "{c:?}");
    assert!(derivative_cost_bound(2.0, 0.1, 0.0, 0.5, 0, 1.0, 1.0).is_err());
}

#[test]
fn admissibility_for_the_burgers_setup() {
    let f = heatreach::pipeline::presets().build("burgers", &serde_json::Value::Null).unwrap();
    let reps = check_admissibility(&AdmissibilityInput { f: &f, r: 4.9, r_prime: 4.85, l: None, r_class: 5.0 });
    assert!(reps.iter().filter(|r| r.mandatory).all(|r| r.satisfied), "{reps:#?}");
    let bad = check_admissibility(&AdmissibilityInput { f: &f, r: 4.7, r_prime: 4.6, l: None, r_class: 5.0 });
    assert!(bad.iter().any(|r| r.name == "R > R_hat" && !r.satisfied));
    let (lo, hi) = l_window(4.85);
    assert!((lo - 0.245_67).abs() < 1e-4 && hi == 0.25);
}
