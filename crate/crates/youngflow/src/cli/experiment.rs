//! Batch execution of an experiment over its seeds.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::certificate::Certificate;
use crate::flow::{flow_axiom_check, FlowCheckReport};
use crate::greedy::count_bound;
use crate::paths::Interval;
use crate::solver::{solve_forward, SolveReport};
use crate::{Error, Result};

/// Tolerance of the flow axioms in batch runs.
pub const FLOW_TOL: f64 = 1e-5;

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub greedy_interval_count: usize,
    pub count_bound: f64,
    pub max_picard_iters: usize,
    pub max_fixed_point_residual: f64,
    pub gronwall_ok: bool,
    pub growth_ok: bool,
    pub flow_composition_residual: f64,
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "seed",
    "greedy_interval_count",
    "count_bound",
    "max_picard_iters",
    "max_fixed_point_residual",
    "gronwall_ok",
    "growth_ok",
    "flow_composition_residual",
];

impl SummaryRow {
    fn failed(seed: u64) -> Self {
        SummaryRow {
            seed,
            greedy_interval_count: 0,
            count_bound: f64::NAN,
            max_picard_iters: 0,
            max_fixed_point_residual: f64::NAN,
            gronwall_ok: false,
            growth_ok: false,
            flow_composition_residual: f64::NAN,
        }
    }

    fn record(&self) -> [String; 8] {
        [
            self.seed.to_string(),
            self.greedy_interval_count.to_string(),
            format!("{:?}", self.count_bound),
            self.max_picard_iters.to_string(),
            format!("{:?}", self.max_fixed_point_residual),
            self.gronwall_ok.to_string(),
            self.growth_ok.to_string(),
            format!("{:?}", self.flow_composition_residual),
        ]
    }
}

/// Everything produced for one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub row: SummaryRow,
    pub certificates: Vec<Certificate>,
    pub report: Option<SolveReport>,
    pub flow: Option<FlowCheckReport>,
    pub error: Option<String>,
}

impl SeedOutcome {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.certificates.iter().all(|c| c.ok)
    }
}

fn run_seed_inner(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let exps = cfg.exponent_set()?;
    let field = cfg.build_field(&exps)?;
    let driver = cfg.build_driver(seed)?;
    let opts = cfg.solve_options(&exps);
    let (t0, t1) = (cfg.t0, cfg.horizon());
    let report = solve_forward(&field, &driver, t0, &cfg.x0, t1, &opts)?;
    let bound = count_bound(&driver, Interval::new(t0, t1)?, exps.alpha, report.mu, exps.p, exps.p_prime)?;
    let probes: Vec<Vec<f64>> = (0..cfg.flow_probes.max(1))
        .map(|k| {
            let mut x = cfg.x0.clone();
            x[0] += 0.25 * k as f64;
            x
        })
        .collect();
    let mid = t0 + 0.5 * (t1 - t0);
    let flow = flow_axiom_check(&field, &driver, (t0, mid, t1), &probes, FLOW_TOL, &opts)?;
    let mut certificates = report.certificates.clone();
    certificates.push(Certificate {
        name: "count-bound".into(),
        lhs: bound.actual as f64,
        rhs: bound.bound.ceil().max(1.0),
        ok: bound.holds(),
        window: (t0, t1),
    });
    certificates.push(Certificate::check(
        "fixed-point-residual",
        report.max_residual(),
        opts.picard_tol,
        0.0,
        (t0, t1),
    ));
    for (name, v) in [
        ("flow-identity", flow.identity_residual),
        ("flow-inversion", flow.inversion_residual),
        ("flow-composition", flow.composition_residual),
    ] {
        certificates.push(Certificate::check(name, v, FLOW_TOL, 0.0, (t0, t1)));
    }
    let row = SummaryRow {
        seed,
        greedy_interval_count: report.greedy.interval_count(),
        count_bound: bound.bound,
        max_picard_iters: report.max_iters(),
        max_fixed_point_residual: report.max_residual(),
        gronwall_ok: report.family_ok("gronwall"),
        growth_ok: report.family_ok("growth"),
        flow_composition_residual: flow.composition_residual,
    };
    Ok(SeedOutcome {
        seed,
        row,
        certificates,
        report: Some(report),
        flow: Some(flow),
        error: None,
    })
}

/// Runs one seed; a hard failure becomes a failed row instead of an error.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> SeedOutcome {
    run_seed_inner(cfg, seed).unwrap_or_else(|e| SeedOutcome {
        seed,
        row: SummaryRow::failed(seed),
        certificates: Vec::new(),
        report: None,
        flow: None,
        error: Some(e.to_string()),
    })
}

/// All seeds of an experiment, sorted by seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<SeedOutcome> {
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}: {e}", path.display()))
}

/// Summary table as CSV text.
pub fn summary_csv(outcomes: &[SeedOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).map_err(|e| Error::Data(e.to_string()))?;
    for o in outcomes {
        w.write_record(o.row.record()).map_err(|e| Error::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

/// Writes per-seed artifacts and `summary.csv` under `dir`.
pub fn write_artifacts(dir: &Path, outcomes: &[SeedOutcome]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for o in outcomes {
        let sd = dir.join(format!("seed-{}", o.seed));
        fs::create_dir_all(&sd).map_err(|e| io_err(&sd, e))?;
        if let Some(r) = &o.report {
            let p = sd.join("solution.csv");
            let f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
            r.solution.write_csv(f)?;
        }
        let p = sd.join("certificates.json");
        let json = serde_json::to_string_pretty(&o.certificates).map_err(|e| io_err(&p, e))?;
        fs::write(&p, json).map_err(|e| io_err(&p, e))?;
        if let Some(flow) = &o.flow {
            let p = sd.join("flow.json");
            let json = serde_json::to_string_pretty(flow).map_err(|e| io_err(&p, e))?;
            fs::write(&p, json).map_err(|e| io_err(&p, e))?;
        }
        if let Some(err) = &o.error {
            let p = sd.join("error.txt");
            fs::write(&p, err).map_err(|e| io_err(&p, e))?;
        }
    }
    let p = dir.join("summary.csv");
    let mut f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
    f.write_all(summary_csv(outcomes)?.as_bytes()).map_err(|e| io_err(&p, e))?;
    Ok(p)
}
