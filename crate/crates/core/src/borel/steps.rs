//! Flat transitions `S(u) = psi(u) / (psi(u) + psi(1-u))`, `S = 0` for `u <= 0`
//! and `S = 1` for `u >= 1`, expanded as Taylor series in `u`.

use crate::seriescore::taylor::Taylor;

/// Beyond this log-ratio the transition is flat to far below binary64 resolution.
const FLAT_LOG: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepProfile {
    /// `psi(s) = e^{-c/s}`: Gevrey order 2.
    InverseLinear(f64),
    /// `psi(s) = e^{-c/s^2}`: Gevrey order 3/2.
    InverseSquare(f64),
}

impl StepProfile {
    /// `-ln psi(s0 + h)` as a series in `h`.
    fn neg_log_psi(&self, s0: f64, order: usize) -> Taylor {
        match *self {
            StepProfile::InverseLinear(c) => Taylor::inverse_power(s0, 1, order).scale(c),
            StepProfile::InverseSquare(c) => Taylor::inverse_power(s0, 2, order).scale(c),
        }
    }

    pub fn series(&self, u0: f64, order: usize) -> Taylor {
        if u0 <= 0.0 {
            return Taylor::zero(order);
        }
        if u0 >= 1.0 {
            return Taylor::constant(1.0, order);
        }
        // S = 1 / (1 + e^D) with D = -ln psi(u) + ln psi(1-u)
        let a = self.neg_log_psi(u0, order);
        let b = self.neg_log_psi(1.0 - u0, order).rescale_arg(-1.0);
        let d = &a - &b;
        let d0 = d.value();
        if d0 > FLAT_LOG {
            return Taylor::zero(order);
        }
        if d0 < -FLAT_LOG {
            return Taylor::constant(1.0, order);
        }
        let one = Taylor::constant(1.0, order);
        if d0 > 0.0 {
            let w = (-&d).exp();
            w.div(&(&one + &w))
        } else {
            let w = d.exp();
            (&one + &w).recip()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_symmetry() {
        for p in [StepProfile::InverseLinear(1.0), StepProfile::InverseSquare(1.0)] {
            assert_eq!(p.series(-0.1, 3).c, vec![0.0; 4]);
            assert_eq!(p.series(1.2, 3).c, vec![1.0, 0.0, 0.0, 0.0]);
            assert!((p.series(0.5, 3).value() - 0.5).abs() < 1e-15);
            let a = p.series(0.3, 6);
            let b = p.series(0.7, 6);
            for k in 0..=6 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let expect = if k == 0 { 1.0 - b.c[0] } else { -sign * b.c[k] };
                assert!((a.c[k] - expect).abs() < 1e-9 * (1.0 + a.c[k].abs()), "k = {k}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let p = StepProfile::InverseSquare(1.0);
        let h = 1e-6;
        let num = (p.series(0.4 + h, 1).value() - p.series(0.4 - h, 1).value()) / (2.0 * h);
        assert!((num - p.series(0.4, 1).c[1]).abs() < 1e-7);
    }
}
