mod common;

use common::{exp_case, mms_errors};
use heatreach::heatsim::SimConfig;

#[test]
fn exponential_exact_solution() {
    let (e, _) = exp_case(&SimConfig::new(201, 4000, 1.0));
    assert!(e <= 1e-6, "{e}");
}

#[test]
fn manufactured_burgers_second_order() {
    let errs = mms_errors(&[(41, 16), (81, 32), (161, 64), (321, 128)]);
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "{errs:?} order {order}");
    }
}

#[test]
fn schemes_agree() {
    let (_, a) = exp_case(&SimConfig::new(41, 2000, 1.0));
    let (_, b) = exp_case(&SimConfig::new(41, 2000, 1.0).with_scheme("explicit_rk4_check"));
    let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d <= 1e-5, "{d}");
}
