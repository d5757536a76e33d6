//! The synthesis and verification sequence.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{Mode, ProblemConfig, SharedGenerator};
use crate::borel::{
    blend_traces, borel_realize, gevrey_cutoff_with, uniform_grid, BorelOptions, BorelSum, SharedTrace,
    ZeroTrace,
};
use crate::cauchyx::{
    convergence_diagnostics, synthesize_state_with, ControlSignal, Diagnostics, SynthesisOptions, SynthesisResult,
};
use crate::error::{Error, Result};
use crate::gevreybounds::{check_admissibility, trace_constants, AdmissibilityInput, BoundReport, TraceConstants};
use crate::heatsim::{simulate, terminal_error_on, SimConfig, TerminalError, Trajectory};
use crate::jetmap::{parity_project, parity_require, propagate_time, recursion_residual, verify_bounds_d2};
use crate::seriescore::{factorial, AnalyticNonlinearity, BivariateJet, SpatialJet};

/// Accepted relative defect of the time recursion on the data jets.
pub const RECURSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelSummary {
    pub name: String,
    pub base: f64,
    pub domain: (f64, f64),
    #[serde(rename = "C")]
    pub c: f64,
    pub c_in: f64,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub passed: bool,
    pub failure: Option<StageFailure>,
    /// Smallest `C` with `|y^(n)(0)| <= C n! / R^n` over the used orders.
    pub fitted_c: (f64, f64),
    pub trace_constants: Option<TraceConstants>,
    pub borel: Vec<BorelSummary>,
    pub trace_jet_error: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
    pub terminal_error: Option<TerminalError>,
    pub center_max: Option<f64>,
    pub bounds: Vec<BoundReport>,
}

impl RunReport {
    pub fn mandatory_failures(&self) -> Vec<&BoundReport> {
        self.bounds.iter().filter(|b| b.mandatory && !b.satisfied).collect()
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub synthesis: Option<SynthesisResult>,
    pub trajectory: Option<Trajectory>,
}

impl RunOutcome {
    pub fn controls(&self) -> Option<&ControlSignal> {
        self.synthesis.as_ref().map(|s| &s.controls)
    }
}

/// `max_n |alpha_n| R^n` (Taylor coefficients, i.e. derivatives over `n!`).
pub fn fitted_class_constant(alpha: &[f64], r: f64) -> f64 {
    alpha.iter().enumerate().map(|(n, a)| a.abs() * r.powi(n as i32)).fold(0.0, f64::max)
}

struct Traces {
    g0: SharedTrace,
    g1: SharedTrace,
}

struct Run<'a> {
    cfg: &'a ProblemConfig,
    f: AnalyticNonlinearity,
    y0: SharedGenerator,
    y1: SharedGenerator,
    report: RunReport,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

impl Run<'_> {
    fn single(&self) -> bool {
        self.cfg.mode == Mode::SingleControlOdd
    }

    fn admissibility(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let r_class = self.y0.radius().min(self.y1.radius());
        let k = cfg.truncation.kmax;
        self.report.fitted_c = (
            fitted_class_constant(&self.y0.taylor(k), cfg.r),
            fitted_class_constant(&self.y1.taylor(k), cfg.r),
        );
        let mut reps = check_admissibility(&AdmissibilityInput { f: &self.f, r: cfg.r, r_prime: cfg.r_prime, l: cfg.l, r_class });
        if self.single() {
            let odd = self.y0.is_odd() && self.y1.is_odd();
            reps.push(BoundReport::le("odd data", if odd { 0.0 } else { 1.0 }, 0.0, "y0 and y1 odd"));
            let rep = crate::jetmap::parity_check(&SpatialJet::new(vec![0.0, 1.0]), &self.f);
            reps.push(BoundReport::le("odd nonlinearity", rep.f_reflection_defect, 1e-12, "f(-x,-y,y_x) = -f(x,y,y_x)"));
        }
        let refused: Vec<String> = reps.iter().filter(|b| b.mandatory && !b.satisfied).map(|b| b.name.clone()).collect();
        self.report.bounds.extend(reps);
        if !refused.is_empty() && !cfg.override_admissibility {
            return Err(Error::Config(format!("admissibility failed: {}", refused.join(", "))));
        }
        Ok(())
    }

    fn data_jet(&mut self, label: &str, g: &SharedGenerator) -> Result<BivariateJet<f64>> {
        let t = &self.cfg.truncation;
        let raw: Vec<f64> = g.taylor(t.kmax).iter().enumerate().map(|(k, a)| a * factorial(k)).collect();
        let mut a = SpatialJet::new(raw);
        if self.single() {
            parity_require(&a, &self.f)?;
            a = parity_project(&a);
        }
        let jet = propagate_time(&a, &self.f, t.nmax)?;
        let mut d2 = verify_bounds_d2(&jet, self.cfg.r, self.cfg.r_prime, self.cfg.tolerances.c_prime);
        d2.name = format!("{} ({label})", d2.name);
        self.report.bounds.push(d2);
        self.report.bounds.push(BoundReport::le(
            format!("time recursion residual ({label})"),
            recursion_residual(&jet, &self.f),
            RECURSION_TOL,
            "c[k][n+1] - c[k+2][n] - F[k][n], relative",
        ));
        Ok(jet)
    }

    fn realize(&mut self, name: &str, d: &[f64], tc: &TraceConstants, base: f64, domain: (f64, f64)) -> Result<SharedTrace> {
        let opts = BorelOptions::for_nmax(self.cfg.truncation.nmax);
        let b: BorelSum = borel_realize(d, tc.h, tc.h_hat, base, domain, &opts)?;
        self.report.borel.push(BorelSummary {
            name: name.into(),
            base,
            domain,
            c: b.cert.c,
            c_in: b.c_in,
            theta: b.theta,
        });
        self.report.bounds.push(
            BoundReport::le(
                format!("Borel certificate ({name})"),
                b.cert.c,
                opts.inflation_limit * b.c_in.max(f64::MIN_POSITIVE),
                format!("sup |g^(n)| / (H_hat^n (2n)!), n <= {}", b.cert.n_cert),
            )
            .advisory(),
        );
        Ok(Arc::new(b))
    }

    fn traces(&mut self, jet0: &BivariateJet<f64>, jet1: &BivariateJet<f64>) -> Result<Traces> {
        let cfg = self.cfg;
        let horizon = cfg.horizon;
        let tc = trace_constants(cfg.r_prime, cfg.l)?;
        self.report.trace_constants = Some(tc);
        let nmax = cfg.truncation.nmax;
        let col = |j: &BivariateJet<f64>, k: usize| (0..=nmax).map(|n| j.value(k, n)).collect::<Vec<f64>>();
        let hat_dom = (0.0, 0.75 * horizon);
        let tilde_dom = (0.25 * horizon, horizon);
        let rho: SharedTrace = Arc::new(gevrey_cutoff_with(horizon, cfg.cutoff_sharpness)?);
        let g0: SharedTrace = if self.single() {
            Arc::new(ZeroTrace { domain: (0.0, horizon) })
        } else {
            let hat = self.realize("hat g0", &col(jet0, 0), &tc, 0.0, hat_dom)?;
            let tilde = self.realize("tilde g0", &col(jet1, 0), &tc, horizon, tilde_dom)?;
            Arc::new(blend_traces(hat, tilde, rho.clone())?)
        };
        let hat = self.realize("hat g1", &col(jet0, 1), &tc, 0.0, hat_dom)?;
        let tilde = self.realize("tilde g1", &col(jet1, 1), &tc, horizon, tilde_dom)?;
        let g1: SharedTrace = Arc::new(blend_traces(hat, tilde, rho)?);

        let mut worst: f64 = 0.0;
        for (t, jet) in [(0.0, jet0), (horizon, jet1)] {
            for (k, g) in [(0, &g0), (1, &g1)] {
                let got = g.derivatives(t, nmax);
                for (n, v) in got.iter().enumerate() {
                    let want = jet.value(k, n);
                    worst = worst.max((v - want).abs() / want.abs().max(1.0));
                }
            }
        }
        self.report.trace_jet_error = Some(worst);
        self.report.bounds.push(BoundReport::le(
            "trace jets at t = 0 and t = T",
            worst,
            cfg.tolerances.trace_jet,
            "max |g^(n) - d_n| / max(1, |d_n|), n <= Nmax",
        ));
        Ok(Traces { g0, g1 })
    }

    fn synthesize(&mut self, tr: &Traces) -> Result<SynthesisResult> {
        let cfg = self.cfg;
        let steps = cfg.grid.nt / cfg.grid.control_stride;
        let tgrid: Vec<f64> = (0..=steps)
            .map(|j| if j == steps { cfg.horizon } else { cfg.horizon * j as f64 / steps as f64 })
            .collect();
        let xgrid = uniform_grid(-1.0, 1.0, cfg.grid.state_points);
        let opts = SynthesisOptions { fail_on_divergence: false };
        let syn = synthesize_state_with(tr.g0.as_ref(), tr.g1.as_ref(), &self.f, &cfg.truncation, &tgrid, &xgrid, &opts)?;
        let diag = convergence_diagnostics(&syn);
        self.report.bounds.push(
            BoundReport::lt(
                "R1 > 1",
                1.0,
                diag.r1_min,
                format!("x-series ratio estimate, minimum over t; {} divergent samples", diag.divergent.len()),
            )
            .advisory(),
        );
        self.report.bounds.push(
            BoundReport::lt(
                "R1 > 4/e + margin",
                4.0 / std::f64::consts::E + crate::cauchyx::R1_MARGIN,
                diag.r1_min,
                format!("{} flagged samples", diag.flagged.len()),
            )
            .advisory(),
        );
        self.report.diagnostics = Some(diag);
        if self.single() {
            let odd = syn.controls.h_minus.iter().zip(&syn.controls.h_plus).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
            self.report.bounds.push(BoundReport::le(
                "synthesized h(-1) = -h(1)",
                odd,
                cfg.tolerances.center,
                "odd synthesis",
            ));
        }
        Ok(syn)
    }

    fn simulate(&mut self, syn: &SynthesisResult) -> Result<Trajectory> {
        let cfg = self.cfg;
        let sim = SimConfig::new(cfg.grid.nx, cfg.grid.nt, cfg.horizon).with_scheme(&cfg.grid.scheme).with_probes(vec![0.0]);
        let y0: Vec<f64> = sim.grid().iter().map(|&x| self.y0.value(x)).collect();
        let traj = simulate(&y0, &syn.controls, &self.f, &sim)?;
        let y1: Vec<f64> = sim.grid().iter().map(|&x| self.y1.value(x)).collect();
        let window = if self.single() { (0.0, 1.0) } else { (-1.0, 1.0) };
        let err = terminal_error_on(&traj, &y1, window)?;
        self.report.terminal_error = Some(err);
        self.report.bounds.push(BoundReport::le(
            "terminal sup error",
            err.sup,
            cfg.tolerances.terminal,
            format!("on [{}, {}], L2 = {:.3e}", window.0, window.1, err.l2),
        ));
        if self.single() {
            let c = traj.probe_values[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            self.report.center_max = Some(c);
            self.report.bounds.push(BoundReport::le("max_t |y(0,t)|", c, cfg.tolerances.center, "simulated state"));
        }
        Ok(traj)
    }
}

/// Runs the whole sequence. Configuration errors are returned; failures of
/// later stages are recorded in the report with their stage tag.
pub fn run_exact_control(cfg: &ProblemConfig) -> Result<RunOutcome> {
    let f = cfg.nonlinearity.resolve()?;
    let y0 = cfg.y0.build()?;
    let y1 = cfg.y1.build()?;
    let report = RunReport {
        mode: cfg.mode,
        passed: false,
        failure: None,
        fitted_c: (f64::NAN, f64::NAN),
        trace_constants: None,
        borel: vec![],
        trace_jet_error: None,
        diagnostics: None,
        terminal_error: None,
        center_max: None,
        bounds: vec![],
    };
    let mut run = Run { cfg, f, y0, y1, report };
    let (mut synthesis, mut trajectory) = (None, None);
    let result = (|| -> Result<()> {
        stage("admissibility", run.admissibility())?;
        let (g0, g1) = (run.y0.clone(), run.y1.clone());
        let jet0 = stage("jets", run.data_jet("y0", &g0))?;
        let jet1 = stage("jets", run.data_jet("y1", &g1))?;
        let traces = stage("traces", run.traces(&jet0, &jet1))?;
        let syn = stage("synthesis", run.synthesize(&traces))?;
        let traj = stage("simulation", run.simulate(&syn));
        synthesis = Some(syn);
        trajectory = Some(traj?);
        Ok(())
    })();
    if let Err(e) = result {
        let (stage, message) = match e {
            Error::Stage { stage, source } => (stage.to_string(), source.to_string()),
            e => ("run".to_string(), e.to_string()),
        };
        run.report.failure = Some(StageFailure { stage, message });
    }
    run.report.passed = run.report.failure.is_none() && run.report.mandatory_failures().is_empty();
    Ok(RunOutcome { report: run.report, synthesis, trajectory })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProbe {
    pub scale: f64,
    pub passed: bool,
    pub terminal_sup: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSearch {
    /// Largest passing data scale found (0 if none).
    pub largest_passing: f64,
    /// Smallest failing scale found (`inf` if none).
    pub smallest_failing: f64,
    pub probes: Vec<AmplitudeProbe>,
}

/// Brackets the largest factor `s` such that the run with data `(s y0, s y1)`
/// passes, then bisects geometrically.
pub fn find_amplitude(cfg: &ProblemConfig, bisections: usize) -> Result<AmplitudeSearch> {
    let mut probes = vec![];
    let mut probe = |s: f64| -> Result<bool> {
        let mut c = cfg.clone();
        c.y0 = cfg.y0.scaled(s)?;
        c.y1 = cfg.y1.scaled(s)?;
        let out = run_exact_control(&c)?;
        let r = out.report;
        probes.push(AmplitudeProbe {
            scale: s,
            passed: r.passed,
            terminal_sup: r.terminal_error.map(|e| e.sup),
            failure: r.failure.map(|f| format!("{}: {}", f.stage, f.message)),
        });
        Ok(r.passed)
    };
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut s = 1.0;
    for _ in 0..12 {
        if probe(s)? {
            lo = s;
            if hi.is_finite() {
                break;
            }
            s *= 4.0;
        } else {
            hi = s;
            if lo > 0.0 {
                break;
            }
            s /= 4.0;
        }
    }
    if lo > 0.0 && hi.is_finite() {
        for _ in 0..bisections {
            let mid = (lo * hi).sqrt();
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(AmplitudeSearch { largest_passing: lo, smallest_failing: hi, probes })
}
