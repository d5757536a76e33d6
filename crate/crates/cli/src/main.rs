use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use heatreach::gevreybounds::BoundReport;
use heatreach::pipeline::{export, find_amplitude, roundtrip_check, run_exact_control, Mode, ProblemConfig};

#[derive(Parser)]
#[command(name = "heatreach", version, about = "Boundary control synthesis and verification for the semilinear heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize controls for a config, simulate them and write the artifacts.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "heatreach-out")]
        out: PathBuf,
        /// Bisect the largest passing data scale.
        #[arg(long)]
        find_amplitude: bool,
        /// Overrides the mode of the config file.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Exact-rational jet round trip on the configured nonlinearity.
        #[arg(long)]
        rational_roundtrip_tests: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Two,
    Single,
}

const ROUNDTRIP: (usize, usize, usize) = (21, 10, 50);
const BISECTIONS: usize = 6;

fn threads() -> Result<()> {
    if let Ok(v) = std::env::var("HEATREACH_THREADS") {
        let n: usize = v.parse().with_context(|| format!("HEATREACH_THREADS = {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(config: PathBuf, out: PathBuf, amplitude: bool, mode: Option<ModeArg>, rational: bool) -> Result<bool> {
    let mut cfg = ProblemConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::Two => Mode::TwoControl,
            ModeArg::Single => Mode::SingleControlOdd,
        };
    }
    let mut outcome = run_exact_control(&cfg)?;
    if rational {
        let f = cfg.nonlinearity.resolve()?;
        let (k, n, samples) = ROUNDTRIP;
        let rt = roundtrip_check(&f, k, n, samples, cfg.seed, true)?;
        println!("rational round trip: {} samples, {} unequal of {} entries", rt.samples, rt.worst, rt.compared_entries);
        outcome.report.bounds.push(BoundReport::le(
            "rational jet round trip",
            rt.worst,
            0.0,
            format!("Kmax = {k}, Nmax = {n}, {samples} samples"),
        ));
        outcome.report.passed &= rt.worst == 0.0;
    }
    let written = export(&cfg, &outcome, &out)?;
    if amplitude {
        let search = find_amplitude(&cfg, BISECTIONS)?;
        println!("amplitude: largest passing scale {:.4e}, smallest failing {:.4e}", search.largest_passing, search.smallest_failing);
        std::fs::write(out.join("amplitude.json"), serde_json::to_string_pretty(&search)?)?;
    }
    let r = &outcome.report;
    if let Some(e) = r.terminal_error {
        println!("terminal error: sup {:.3e}, l2 {:.3e} (tolerance {:.1e})", e.sup, e.l2, cfg.tolerances.terminal);
    }
    if let Some(c) = r.center_max {
        println!("max |y(0,t)|: {c:.3e}");
    }
    for b in r.mandatory_failures() {
        println!("bound failed: {} = {:.4e} {} {:.4e}", b.name, b.value, b.comparison, b.threshold);
    }
    if let Some(f) = &r.failure {
        println!("stage {} failed: {}", f.stage, f.message);
    }
    println!("wrote {} to {}", written.join(", "), out.display());
    println!("{}", if r.passed { "PASSED" } else { "FAILED" });
    Ok(r.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|_| match cli.command {
        Command::Run { config, out, find_amplitude, mode, rational_roundtrip_tests } => {
            run(config, out, find_amplitude, mode, rational_roundtrip_tests)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            // Library errors already embed their source in the message.
            let mut parts: Vec<String> = vec![];
            for c in e.chain().map(|c| c.to_string()) {
                if !parts.last().is_some_and(|p| p.contains(&c)) {
                    parts.push(c);
                }
            }
            eprintln!("error: {}", parts.join(": "));
            ExitCode::from(2)
        }
    }
}
