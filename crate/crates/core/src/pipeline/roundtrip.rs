use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jetmap::{propagate_space, propagate_time};
use crate::scalar::{micro_rational, Scalar};
use crate::seriescore::{AnalyticNonlinearity, BivariateJet, SpatialJet, TimeJetPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub samples: usize,
    pub rational: bool,
    /// Largest relative mismatch (float) or number of unequal entries (rational).
    pub worst: f64,
    pub compared_entries: usize,
}

fn roundtrip_one<S: Scalar + PartialEq>(a: SpatialJet<S>, f: &AnalyticNonlinearity, kmax: usize, nmax: usize) -> Result<(BivariateJet<S>, BivariateJet<S>)> {
    let fwd = propagate_time(&a, f, nmax)?;
    let col = |k: usize| (0..=nmax).map(|n| fwd.get(k, n).cloned().unwrap_or_else(S::zero)).collect::<Vec<S>>();
    let back = propagate_space(&TimeJetPair::new(col(0), col(1))?, f, kmax)?;
    Ok((fwd, back))
}

/// `propagate_space` applied to the first two columns of `propagate_time` must
/// give back the jet on the common triangle. Entries are `m / 10^6` with
/// `|m| <= 10^4`, i.e. uniform in `[-0.01, 0.01]`.
pub fn roundtrip_check(
    f: &AnalyticNonlinearity,
    kmax: usize,
    nmax: usize,
    samples: usize,
    seed: u64,
    rational: bool,
) -> Result<RoundTripReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<i64>> = (0..samples).map(|_| (0..=kmax).map(|_| rng.gen_range(-10_000..=10_000)).collect()).collect();
    let per_sample: Vec<Result<(f64, usize)>> = draws
        .par_iter()
        .map(|m| {
            let mut worst: f64 = 0.0;
            let mut compared = 0;
            if rational {
                let a = SpatialJet::new(m.iter().map(|&v| micro_rational(v)).collect::<Vec<BigRational>>());
                let (fwd, back) = roundtrip_one(a, f, kmax, nmax)?;
                for (k, n, v) in fwd.present_entries() {
                    if let Some(w) = back.get(k, n) {
                        compared += 1;
                        if v != w {
                            worst += 1.0;
                        }
                    }
                }
            } else {
                let a = SpatialJet::new(m.iter().map(|&v| v as f64 / 1e6).collect::<Vec<f64>>());
                let (fwd, back) = roundtrip_one(a, f, kmax, nmax)?;
                let scale = fwd.present_entries().fold(0.0f64, |s, (_, _, v)| s.max(v.abs())).max(f64::MIN_POSITIVE);
                for (k, n, v) in fwd.present_entries() {
                    if let Some(w) = back.get(k, n) {
                        compared += 1;
                        worst = worst.max((v - w).abs() / v.abs().max(1e-3 * scale));
                    }
                }
            }
            Ok((worst, compared))
        })
        .collect();
    let (mut worst, mut compared) = (0.0f64, 0);
    for r in per_sample {
        let (w, c) = r?;
        worst = if rational { worst + w } else { worst.max(w) };
        compared += c;
    }
    Ok(RoundTripReport { samples, rational, worst, compared_entries: compared })
}
