//! Command implementations behind the `delaymatch` binary.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 design
//! constraint failure, 3 divergence during simulation.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioFile;
use crate::error::Error;
use crate::report::{summarize, write_csv, PrecompensatorInfo, RunReport, TauVerdict};
use crate::sim::{integrate_closed_loop, unforced_envelope, Outcome};
use crate::stability::{crossing_point, stability_verdict};
use crate::synthesis::{
    assemble_pa, build_inner_tf, build_precompensator, compute_tau_max, derive_gains, validate_chi,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONSTRAINT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Heading perturbation (rad) for the unforced envelope probe.
pub const SWEEP_PERTURBATION: f64 = 0.1;

/// Result of a command: what to print and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcomes<R> {
    pub report: R,
    pub text: String,
    pub code: i32,
}

fn usage_error<R: Default>(e: impl std::fmt::Display) -> Outcomes<R> {
    Outcomes {
        report: R::default(),
        text: format!("error: {e}\n"),
        code: EXIT_USAGE,
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::ConstraintViolation { .. }
        | Error::NotProper { .. }
        | Error::UnstableModel { .. }
        | Error::GainInconsistency { .. } => EXIT_CONSTRAINT,
        Error::NonFiniteState { .. } => EXIT_DIVERGED,
        _ => EXIT_USAGE,
    }
}

/// Integration step used at delay `tau`: the configured step, shortened to
/// `τ/10` when the delay requires it.
pub fn effective_step(h: f64, tau: f64) -> f64 {
    if tau > 0.0 && h > tau / 10.0 {
        tau / 10.0
    } else {
        h
    }
}

/// Synthesis part shared by all commands. `Err` carries a partially filled
/// report and the exit code.
#[allow(clippy::result_large_err)]
fn synthesize(file: &ScenarioFile) -> Result<RunReport, (RunReport, i32, String)> {
    let chi = file.chi();
    let mut report = RunReport::default();
    let constraints = validate_chi(&chi);
    let failed = constraints.failures();
    report.constraints = Some(constraints);
    if !failed.is_empty() {
        let msg = format!("constraint(s) failed: {}", failed.join(", "));
        return Err((report, EXIT_CONSTRAINT, msg));
    }
    let fail = |report: RunReport, e: Error| {
        let code = code_for(&e);
        Err((report, code, e.to_string()))
    };
    let s = &file.scenario;
    let gains = match derive_gains(&chi, s.lambda01, s.lambda11) {
        Ok(g) => g,
        Err(e) => return fail(report, e),
    };
    report.gains = Some(gains);
    if let Err(e) = build_inner_tf(&gains) {
        return fail(report, e);
    }
    let bound = match compute_tau_max(&chi) {
        Ok(b) => b,
        Err(e) => return fail(report, e),
    };
    report.delay_bound = Some(bound);
    match crossing_point(chi.chi2, chi.chi3) {
        Ok(c) => report.crossing = Some(c),
        Err(e) => return fail(report, e),
    }
    let model = match file.model() {
        Ok(m) => m,
        Err(e) => return fail(report, e),
    };
    let hm = match model.to_tf() {
        Ok(tf) => tf,
        Err(e) => return fail(report, e),
    };
    let g = match build_precompensator(&chi, &model) {
        Ok(g) => g,
        Err(e) => return fail(report, e),
    };
    report.precompensator = Some(PrecompensatorInfo {
        model: hm.properness(),
        n_num: g.n_n(),
        n_den: g.n_d(),
        z_degree: g.num().z_degree().max(g.den().z_degree()),
    });
    let pa = assemble_pa(&chi).expect("constraints already validated");
    let mut taus = vec![s.tau];
    for &t in &s.verdict_taus {
        if !taus.contains(&t) {
            taus.push(t);
        }
    }
    for tau in taus {
        match stability_verdict(&pa, tau) {
            Ok(verdict) => report.verdicts.push(TauVerdict { tau, verdict }),
            Err(e) => return fail(report, e),
        }
    }
    Ok(report)
}

fn load(path: &Path) -> Result<ScenarioFile, String> {
    ScenarioFile::load(path).map_err(|e| e.to_string())
}

pub fn cmd_synth(config: &Path) -> Outcomes<RunReport> {
    let file = match load(config) {
        Ok(f) => f,
        Err(e) => return usage_error(e),
    };
    match synthesize(&file) {
        Ok(report) => Outcomes {
            text: report.render(),
            report,
            code: EXIT_OK,
        },
        Err((report, code, msg)) => {
            let text = format!("{}error: {msg}\n", report.render());
            Outcomes { report, text, code }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub tau: Option<f64>,
    pub step: Option<f64>,
    pub out: Option<PathBuf>,
    pub allow_unstable: bool,
}

pub fn cmd_simulate(config: &Path, opts: &SimulateOptions) -> Outcomes<RunReport> {
    let mut file = match load(config) {
        Ok(f) => f,
        Err(e) => return usage_error(e),
    };
    if let Some(tau) = opts.tau {
        file.scenario.tau = tau;
    }
    if let Some(h) = opts.step {
        file.scenario.h = h;
    }
    let mut report = match synthesize(&file) {
        Ok(r) => r,
        Err((report, code, msg)) => {
            let text = format!("{}error: {msg}\n", report.render());
            return Outcomes { report, text, code };
        }
    };
    let tau = file.scenario.tau;
    let tau_max = report
        .delay_bound
        .map(|b| b.tau_max)
        .unwrap_or(f64::INFINITY);
    if !(tau < tau_max) && !opts.allow_unstable {
        let text = format!(
            "{}error: tau = {tau} is not below tau_max = {tau_max}; pass --allow-unstable to simulate anyway\n",
            report.render()
        );
        return Outcomes {
            report,
            text,
            code: EXIT_CONSTRAINT,
        };
    }
    if !(tau < tau_max) {
        match unforced_envelope(&file.chi(), tau, SWEEP_PERTURBATION) {
            Ok(env) => {
                if !env.decays {
                    report.messages.push(format!(
                        "growing envelope: a {SWEEP_PERTURBATION} rad heading perturbation grows at {} 1/s",
                        env.rate
                    ));
                }
                report.envelope = Some(env);
            }
            Err(e) => report.messages.push(format!("envelope probe failed: {e}")),
        }
    }
    file.scenario.h = effective_step(file.scenario.h, tau);

    let sc = match file.to_scenario() {
        Ok(sc) => sc,
        Err(e) => return usage_error(e),
    };
    let traj = match integrate_closed_loop(&sc) {
        Ok(t) => t,
        Err(e) => {
            let code = code_for(&e);
            let text = format!("{}error: {e}\n", report.render());
            return Outcomes { report, text, code };
        }
    };
    report.tau = Some(tau);
    report.h = Some(sc.h);
    report.trajectory = Some(summarize(
        &traj,
        sc.w1.final_value(),
        sc.r.final_value(),
        sc.r.step,
    ));

    let dir = opts.out.clone().unwrap_or_else(|| file.output.dir.clone());
    let csv_path = dir.join(&file.output.csv);
    let written = fs::create_dir_all(&dir)
        .and_then(|_| fs::File::create(&csv_path))
        .map_err(Error::from)
        .and_then(|f| write_csv(&traj, BufWriter::new(f)));
    if let Err(e) = written {
        return usage_error(e);
    }
    report.outputs.push(csv_path.display().to_string());
    let json_path = dir.join("report.json");
    match serde_json::to_string_pretty(&report) {
        Ok(json) => {
            if let Err(e) = fs::write(&json_path, json) {
                return usage_error(e);
            }
            report.outputs.push(json_path.display().to_string());
        }
        Err(e) => return usage_error(e),
    }

    let code = match traj.outcome {
        Outcome::Completed => EXIT_OK,
        Outcome::NonFinite { .. } => EXIT_DIVERGED,
    };
    Outcomes {
        text: report.render(),
        report,
        code,
    }
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_tau_list(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty delay list".into());
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{spec}` must be start:stop:step"));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(format!(
                "range `{spec}` is empty or has a non-positive step"
            ));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // drop the accumulated representation error so 0:0.6:0.05 yields 0.15, not 0.15000000000000002
        let clean = |x: f64| format!("{x:.12e}").parse::<f64>().unwrap_or(x);
        return Ok((0..=n).map(|k| clean(start + k as f64 * step)).collect());
    }
    spec.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty delay list".into())
            } else {
                Ok(v)
            }
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub stable: Option<bool>,
    pub margin: Option<f64>,
    /// Envelope growth rate of the unforced heading channel, 1/s.
    pub envelope_rate: Option<f64>,
    pub envelope_decays: Option<bool>,
    pub max_matching_error: Option<f64>,
    pub diverged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub outputs: Vec<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn optb(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

impl SweepReport {
    pub fn render(&self) -> String {
        let mut s = String::from(
            "tau,stable,margin,envelope_rate,envelope_decays,max_matching_error,diverged,error\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.tau,
                optb(r.stable),
                opt(r.margin),
                opt(r.envelope_rate),
                optb(r.envelope_decays),
                opt(r.max_matching_error),
                r.diverged,
                r.error.clone().unwrap_or_default().replace(',', ";"),
            ));
        }
        s
    }
}

fn sweep_row(file: &ScenarioFile, tau: f64) -> SweepRow {
    let mut row = SweepRow {
        tau,
        stable: None,
        margin: None,
        envelope_rate: None,
        envelope_decays: None,
        max_matching_error: None,
        diverged: false,
        error: None,
    };
    let chi = file.chi();
    let mut errors = Vec::new();
    match assemble_pa(&chi).and_then(|pa| stability_verdict(&pa, tau)) {
        Ok(v) => {
            row.stable = Some(v.stable);
            row.margin = Some(v.margin_metric);
        }
        Err(e) => errors.push(e.to_string()),
    }
    match unforced_envelope(&chi, tau, SWEEP_PERTURBATION) {
        Ok(env) => {
            row.envelope_rate = Some(env.rate);
            row.envelope_decays = Some(env.decays);
        }
        Err(e) => errors.push(e.to_string()),
    }
    let mut f = file.clone();
    f.scenario.tau = tau;
    f.scenario.h = effective_step(f.scenario.h, tau);
    match f.to_scenario().and_then(|sc| integrate_closed_loop(&sc)) {
        Ok(traj) => {
            row.max_matching_error = Some(traj.max_matching_error());
            row.diverged = matches!(traj.outcome, Outcome::NonFinite { .. });
        }
        Err(e) => errors.push(e.to_string()),
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

pub fn cmd_sweep(
    config: &Path,
    taus: &[f64],
    step: Option<f64>,
    out: Option<&Path>,
) -> Outcomes<SweepReport> {
    if taus.is_empty() {
        return usage_error("empty delay list");
    }
    if let Some(bad) = taus.iter().find(|t| !(**t >= 0.0)) {
        return usage_error(format!("delay {bad} must be non-negative"));
    }
    let mut file = match load(config) {
        Ok(f) => f,
        Err(e) => return usage_error(e),
    };
    if let Some(h) = step {
        file.scenario.h = h;
    }
    if let Err((_, code, msg)) = synthesize(&file) {
        return Outcomes {
            report: SweepReport::default(),
            text: format!("error: {msg}\n"),
            code,
        };
    }
    // rows are independent; collect() keeps input order
    let rows: Vec<SweepRow> = taus.par_iter().map(|&tau| sweep_row(&file, tau)).collect();
    let mut report = SweepReport {
        rows,
        outputs: Vec::new(),
    };

    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| file.output.dir.clone());
    let path = dir.join("sweep.csv");
    if let Err(e) = fs::create_dir_all(&dir).and_then(|_| fs::write(&path, report.render())) {
        return usage_error(e);
    }
    report.outputs.push(path.display().to_string());
    let mut text = report.render();
    text.push_str(&format!("wrote {}\n", path.display()));
    Outcomes {
        report,
        text,
        code: EXIT_OK,
    }
}
