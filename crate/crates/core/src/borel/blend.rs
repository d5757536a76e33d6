use serde_json::{json, Value};

use super::{certificate_constant, uniform_grid, Certificate, SharedTrace, TimeTrace, TraceKind};
use crate::error::{Error, Result};
use crate::seriescore::taylor::Taylor;

/// `g = rho hat + (1 - rho) tilde`.
#[derive(Debug, Clone)]
pub struct Blended {
    pub hat: SharedTrace,
    pub tilde: SharedTrace,
    pub rho: SharedTrace,
    pub domain: (f64, f64),
    pub cert: Option<Certificate>,
}

fn is_const(t: &Taylor, v: f64) -> bool {
    t.c[0] == v && t.c[1..].iter().all(|c| *c == 0.0)
}

impl TimeTrace for Blended {
    fn kind(&self) -> TraceKind {
        TraceKind::Blended
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn taylor(&self, t: f64, order: usize) -> Taylor {
        let rho = self.rho.taylor(t, order);
        if is_const(&rho, 1.0) {
            return self.hat.taylor(t, order);
        }
        if is_const(&rho, 0.0) {
            return self.tilde.taylor(t, order);
        }
        let hat = self.hat.taylor(t, order);
        let tilde = self.tilde.taylor(t, order);
        &tilde + &(&rho * &(&hat - &tilde))
    }
    fn certificate(&self) -> Option<Certificate> {
        self.cert
    }
    fn to_json(&self) -> Value {
        json!({
            "kind": "blended",
            "domain": [self.domain.0, self.domain.1],
            "hat": self.hat.to_json(),
            "tilde": self.tilde.to_json(),
            "rho": self.rho.to_json(),
            "certificate": self.cert,
        })
    }
}

const SUPPORT_GRID: usize = 2001;
const JET_CHECK_ORDER: usize = 12;

/// Blends two traces with a flat cutoff. `hat` must cover the support of `rho`
/// and `tilde` the support of `1 - rho` inside the cutoff's domain.
pub fn blend_traces(hat: SharedTrace, tilde: SharedTrace, rho: SharedTrace) -> Result<Blended> {
    let (a, b) = rho.domain();
    let grid = uniform_grid(a, b, SUPPORT_GRID);
    let mut hat_need = (f64::INFINITY, f64::NEG_INFINITY);
    let mut tilde_need = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &grid {
        let r = rho.taylor(t, 1);
        if !is_const(&r, 0.0) {
            hat_need = (hat_need.0.min(t), hat_need.1.max(t));
        }
        if !is_const(&r, 1.0) {
            tilde_need = (tilde_need.0.min(t), tilde_need.1.max(t));
        }
    }
    let covers = |dom: (f64, f64), need: (f64, f64)| need.0 > need.1 || (dom.0 <= need.0 + 1e-12 && dom.1 >= need.1 - 1e-12);
    if !covers(hat.domain(), hat_need) || !covers(tilde.domain(), tilde_need) {
        return Err(Error::InvalidInput(format!(
            "blend domain mismatch: hat {:?} must cover {:?}, tilde {:?} must cover {:?}",
            hat.domain(),
            hat_need,
            tilde.domain(),
            tilde_need
        )));
    }
    let blended = Blended { hat, tilde, rho, domain: (a, b), cert: None };
    for (t, side) in [(a, &blended.hat), (b, &blended.tilde)] {
        let lhs = blended.derivatives(t, JET_CHECK_ORDER);
        let rhs = side.derivatives(t, JET_CHECK_ORDER);
        if lhs != rhs {
            return Err(Error::InvalidInput(format!("blend does not reproduce the end jet at t = {t}")));
        }
    }
    Ok(blended)
}

impl Blended {
    /// Grid Gevrey-2 quotient with the hat trace's certificate parameters.
    pub fn with_certificate(mut self, grid_points: usize) -> Self {
        if let Some(hc) = self.hat.certificate().or_else(|| self.tilde.certificate()) {
            let grid = uniform_grid(self.domain.0, self.domain.1, grid_points);
            let (c, _, _) = certificate_constant(&self, hc.h, hc.n_cert, &grid);
            self.cert = Some(Certificate { c, h: hc.h, n_cert: hc.n_cert, grid_points });
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::borel::{gevrey_cutoff, ClosedForm, ZeroTrace};

    #[test]
    fn identical_components() {
        let e: SharedTrace = Arc::new(ClosedForm::exp(1.0, 1.0, 0.0, (0.0, 1.0)));
        let rho: SharedTrace = Arc::new(gevrey_cutoff(1.0).unwrap());
        let b = blend_traces(e.clone(), e.clone(), rho).unwrap();
        for t in [0.1, 0.4, 0.5, 0.66, 0.9] {
            for (x, y) in b.derivatives(t, 8).iter().zip(e.derivatives(t, 8)) {
                assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn null_target_and_domain_check() {
        let e: SharedTrace = Arc::new(ClosedForm::exp(1.0, 1.0, 0.0, (0.0, 1.0)));
        let z: SharedTrace = Arc::new(ZeroTrace { domain: (0.0, 1.0) });
        let rho: SharedTrace = Arc::new(gevrey_cutoff(1.0).unwrap());
        let b = blend_traces(e.clone(), z, rho.clone()).unwrap();
        assert!(b.derivatives(1.0, 12).iter().all(|v| *v == 0.0));
        let short: SharedTrace = Arc::new(ClosedForm::exp(1.0, 1.0, 0.0, (0.0, 0.5)));
        assert!(blend_traces(short, e, rho).is_err());
    }
}
