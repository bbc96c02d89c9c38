//! Command-line interface of the `youngflow` binary.
//!
//! Exit status is 0 when every certificate holds, 1 when some certificate
//! fails, and 2 on usage or configuration errors.

pub mod config;
pub mod experiment;
pub mod scenarios;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::drivers::{fbm_sample, FbmSpec};
use crate::flow::flow_axiom_check;
use crate::greedy::greedy_sequence;
use crate::paths::{p_variation, Interval, SampledPath};
use crate::solver::{solve_backward, solve_forward};
use crate::young_integral::{young_integral, young_loeve_check, YoungConstants};
use crate::{Error, Result};
use config::ExperimentConfig;
use experiment::{run_experiment, summary_csv, write_artifacts, FLOW_TOL};

#[derive(Debug, Parser)]
#[command(name = "youngflow", version, about = "Young differential equations: p-variation, greedy times, solving and flow checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Default)]
pub struct Common {
    /// Input CSV path with header `t,x1,...,xd`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Time window `a,b`.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<Interval>,
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// p-variation of a CSV path.
    Pvar(Common),
    /// Young integral of the `--input` integrand against `--driver`.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        driver: PathBuf,
    },
    /// Greedy times of a CSV driver.
    Greedy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Forward (or backward) solve of a configured scenario.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Bundled scenario name instead of `--config`.
        #[arg(long)]
        scenario: Option<String>,
        /// Solve from the terminal value `x0` at the horizon back to `t0`.
        #[arg(long)]
        backward: bool,
    },
    /// Flow axiom residuals of a configured scenario.
    FlowCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Fractional Brownian motion sample as CSV.
    Fbm {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
    },
    /// Full certificate suite on a configuration or on every bundled scenario.
    Verify(Common),
    /// Batch run of a configuration.
    Run(Common),
}

fn parse_window(s: &str) -> std::result::Result<Interval, String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad window start: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad window end: {e}"))?;
    Interval::new(a, b).map_err(|e| e.to_string())
}

fn read_path(path: &Path) -> Result<SampledPath> {
    let f = fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    SampledPath::read_csv(f)
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Parameter(format!("missing required flag --{flag}")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::Data(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn load_config(common: &Common, scenario: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match (scenario, &common.config) {
        (Some(name), _) => scenarios::scenario(name).ok_or_else(|| Error::Parameter(format!("unknown scenario `{name}`")))?,
        (None, Some(path)) => ExperimentConfig::from_file(path)?,
        (None, None) => return Err(Error::Parameter("missing required flag --config".into())),
    };
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

/// Runs the CLI on `args` and returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = std::env::var("YOUNGFLOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Returns whether every certificate held.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Pvar(c) => {
            let path = read_path(need(&c.input, "input")?)?;
            let p = *need(&c.p, "p")?;
            let v = p_variation(&path, p, c.window.unwrap_or(path.domain()))?;
            println!("{v:?}");
            Ok(true)
        }
        Command::Integrate { common: c, driver } => {
            let x = read_path(need(&c.input, "input")?)?;
            let w = read_path(&driver)?;
            let window = c.window.unwrap_or(w.domain());
            let constants = YoungConstants::new(c.p.unwrap_or(1.5), c.q.unwrap_or(2.0))?;
            let r = young_integral(&x, &w, window, &constants, 1e-6)?;
            let cert = young_loeve_check(&x, &w, window, &constants)?;
            let values: Vec<String> = r.value.iter().map(|v| format!("{v:?}")).collect();
            println!("{}", values.join(","));
            if let Some(out) = &c.out {
                let json = serde_json::json!({ "integral": r, "young_loeve": cert });
                write_text(&out.join("integral.json"), &serde_json::to_string_pretty(&json).unwrap_or_default())?;
            }
            Ok(cert.ok && cert.variation_ok)
        }
        Command::Greedy { common: c, lambda, mu } => {
            let w = read_path(need(&c.input, "input")?)?;
            let window = c.window.unwrap_or(w.domain());
            let seq = greedy_sequence(&w, window.lo, window.hi, lambda, mu, c.p.unwrap_or(1.5))?;
            for t in &seq.times {
                println!("{t:?}");
            }
            if let Some(out) = &c.out {
                write_text(&out.join("greedy.json"), &serde_json::to_string_pretty(&seq).unwrap_or_default())?;
            }
            Ok(true)
        }
        Command::Solve {
            common: c,
            scenario,
            backward,
        } => {
            let cfg = load_config(&c, scenario.as_deref())?;
            let exps = cfg.exponent_set()?;
            let field = cfg.build_field(&exps)?;
            let opts = cfg.solve_options(&exps);
            let seed = cfg.seeds[0];
            let driver = cfg.build_driver(seed)?;
            let report = if backward {
                solve_backward(&field, &driver, cfg.horizon(), &cfg.x0, cfg.t0, &opts)?
            } else {
                solve_forward(&field, &driver, cfg.t0, &cfg.x0, cfg.horizon(), &opts)?
            };
            let end = if backward { report.solution.first_value() } else { report.final_value() };
            let values: Vec<String> = end.iter().map(|v| format!("{v:?}")).collect();
            println!("{}", values.join(","));
            for cert in &report.certificates {
                println!("{} {} lhs={:?} rhs={:?}", if cert.ok { "ok  " } else { "FAIL" }, cert.name, cert.lhs, cert.rhs);
            }
            if let Some(out) = &c.out {
                let mut buf = Vec::new();
                report.solution.write_csv(&mut buf)?;
                write_text(&out.join("solution.csv"), &String::from_utf8_lossy(&buf))?;
                write_text(
                    &out.join("report.json"),
                    &serde_json::to_string_pretty(&report.certificates).unwrap_or_default(),
                )?;
            }
            Ok(report.certificates_ok())
        }
        Command::FlowCheck { common: c, scenario } => {
            let cfg = load_config(&c, scenario.as_deref())?;
            let exps = cfg.exponent_set()?;
            let field = cfg.build_field(&exps)?;
            let driver = cfg.build_driver(cfg.seeds[0])?;
            let (t0, t1) = (cfg.t0, cfg.horizon());
            let r = flow_axiom_check(
                &field,
                &driver,
                (t0, t0 + 0.5 * (t1 - t0), t1),
                std::slice::from_ref(&cfg.x0),
                FLOW_TOL,
                &cfg.solve_options(&exps),
            )?;
            let json = serde_json::to_string_pretty(&r).unwrap_or_default();
            println!("{json}");
            if let Some(out) = &c.out {
                write_text(&out.join("flow.json"), &json)?;
            }
            Ok(r.ok)
        }
        Command::Fbm {
            common: c,
            hurst,
            samples,
            horizon,
        } => {
            let spec = FbmSpec {
                hurst,
                horizon,
                samples,
                seed: c.seed.unwrap_or(0),
            };
            let path = fbm_sample(&spec)?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            match &c.out {
                Some(out) => {
                    write_text(&out.join("fbm.csv"), &String::from_utf8_lossy(&buf))?;
                    write_text(&out.join("fbm.json"), &serde_json::to_string_pretty(&spec).unwrap_or_default())?;
                }
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            Ok(true)
        }
        Command::Verify(c) => {
            let configs = match &c.config {
                Some(_) => vec![load_config(&c, None)?],
                None => scenarios::all(),
            };
            let mut all_ok = true;
            for cfg in configs {
                let outcomes = run_experiment(&cfg);
                for o in &outcomes {
                    let ok = o.ok();
                    all_ok &= ok;
                    println!("{} {} seed={}", if ok { "ok  " } else { "FAIL" }, cfg.scenario, o.seed);
                    if let Some(err) = &o.error {
                        println!("     error: {err}");
                    }
                    for cert in o.certificates.iter().filter(|c| !c.ok) {
                        println!("     {} lhs={:?} rhs={:?}", cert.name, cert.lhs, cert.rhs);
                    }
                }
                if let Some(out) = &c.out {
                    write_artifacts(&out.join(&cfg.scenario), &outcomes)?;
                }
            }
            Ok(all_ok)
        }
        Command::Run(c) => {
            let cfg = load_config(&c, None)?;
            let outcomes = run_experiment(&cfg);
            let out = c.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from));
            match out {
                Some(dir) => {
                    let p = write_artifacts(&dir, &outcomes)?;
                    println!("{}", p.display());
                }
                None => print!("{}", summary_csv(&outcomes)?),
            }
            Ok(outcomes.iter().all(|o| o.ok()))
        }
    }
}
