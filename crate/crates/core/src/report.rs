//! Trajectory CSV files and run reports.
//!
//! Every number is written with 17 significant digits so that re-reading a
//! file reproduces the in-memory values exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qp::Properness;
use crate::sim::{EnvelopeReport, Outcome, Trajectory};
use crate::stability::{CrossingPoint, StabilityVerdict};
use crate::synthesis::{ConstraintReport, DelayBound, GainSet};

pub const CSV_COLUMNS: [&str; 13] = [
    "t", "r", "w1", "w_tilde2", "w2", "y1", "y2", "y2dot", "psi5", "psi6", "g_out", "y2_ref", "err",
];
/// Appended when a plant configuration is present.
pub const VOLTAGE_COLUMNS: [&str; 2] = ["u1", "u2"];

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(traj: &Trajectory<f64>, mut out: W) -> Result<()> {
    let with_u = traj.samples.first().map(|s| s.u.is_some()).unwrap_or(false);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_u {
        header.extend(VOLTAGE_COLUMNS);
    }
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for s in &traj.samples {
        line.clear();
        let mut vals = vec![
            s.t, s.r, s.w1, s.w_tilde2, s.w2, s.y1, s.y2, s.y2dot, s.psi5, s.psi6, s.g_out,
            s.y2_ref, s.err,
        ];
        if let Some((u1, u2)) = s.u {
            vals.push(u1);
            vals.push(u2);
        }
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt17(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Column names and rows of a trajectory CSV.
pub fn read_csv<R: BufRead>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = input.lines();
    let header: Vec<String> = match lines.next() {
        Some(h) => h?.split(',').map(str::to_string).collect(),
        None => return Err(Error::Config("empty CSV".into())),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("CSV line {}: {e}", n + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Config(format!(
                "CSV line {}: wrong column count",
                n + 2
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub final_t: f64,
    pub final_y1: f64,
    pub final_y2: f64,
    /// `|y₁(end) − w₁(∞)| / |w₁(∞)|`
    pub y1_final_rel_error: f64,
    /// `|y₂(end) − r(∞)| / |r(∞)|`
    pub y2_final_rel_error: f64,
    pub max_matching_error: f64,
    /// 2% settling time of `y₂`.
    pub settling_time: Option<f64>,
    pub outcome: Outcome,
}

pub fn summarize(
    traj: &Trajectory<f64>,
    w1_final: f64,
    r_final: f64,
    r_step: f64,
) -> TrajectorySummary {
    let last = traj.last().copied();
    let rel = |a: f64, b: f64| {
        if b != 0.0 {
            (a - b).abs() / b.abs()
        } else {
            (a - b).abs()
        }
    };
    TrajectorySummary {
        samples: traj.samples.len(),
        final_t: last.map(|s| s.t).unwrap_or(0.0),
        final_y1: last.map(|s| s.y1).unwrap_or(f64::NAN),
        final_y2: last.map(|s| s.y2).unwrap_or(f64::NAN),
        y1_final_rel_error: last.map(|s| rel(s.y1, w1_final)).unwrap_or(f64::NAN),
        y2_final_rel_error: last.map(|s| rel(s.y2, r_final)).unwrap_or(f64::NAN),
        max_matching_error: traj.max_matching_error(),
        settling_time: traj.settling_time(r_final, r_step, 0.02),
        outcome: traj.outcome,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauVerdict {
    pub tau: f64,
    pub verdict: StabilityVerdict<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecompensatorInfo {
    pub model: Properness,
    pub n_num: usize,
    pub n_den: usize,
    pub z_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RunReport {
    pub constraints: Option<ConstraintReport<f64>>,
    pub gains: Option<GainSet<f64>>,
    pub delay_bound: Option<DelayBound<f64>>,
    pub crossing: Option<CrossingPoint<f64>>,
    pub precompensator: Option<PrecompensatorInfo>,
    pub verdicts: Vec<TauVerdict>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub trajectory: Option<TrajectorySummary>,
    /// Unforced heading response, probed when the delay is not below `τ_max`.
    pub envelope: Option<EnvelopeReport<f64>>,
    pub outputs: Vec<String>,
    pub messages: Vec<String>,
}

impl RunReport {
    /// Plain `key = value` lines; floats use the shortest exact representation.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(c) = &self.constraints {
            let _ = writeln!(s, "[constraints]");
            for chk in &c.checks {
                let _ = writeln!(
                    s,
                    "{} = {} (margin {})",
                    chk.name,
                    if chk.passed { "pass" } else { "FAIL" },
                    chk.margin
                );
            }
        }
        if let Some(g) = &self.gains {
            let _ = writeln!(s, "[gains]");
            for (k, v) in [
                ("mu0", g.mu0),
                ("eta0", g.eta0),
                ("eta1", g.eta1),
                ("kappa", g.kappa),
                ("k1", g.k1),
                ("k2", g.k2),
                ("lambda02", g.lambda02),
                ("lambda12", g.lambda12),
                ("rho0", g.rho0),
                ("rho1", g.rho1),
                ("lambda01", g.lambda01),
                ("lambda11", g.lambda11),
            ] {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        if self.delay_bound.is_some() || self.crossing.is_some() {
            let _ = writeln!(s, "[delay]");
        }
        if let Some(d) = &self.delay_bound {
            let _ = writeln!(s, "t_c = {}", d.t_c);
            let _ = writeln!(s, "tau_max = {}", d.tau_max);
        }
        if let Some(c) = &self.crossing {
            let _ = writeln!(s, "omega_c = {}", c.omega_c);
            let _ = writeln!(s, "tau_cross = {}", c.tau_cross);
        }
        if let Some(p) = &self.precompensator {
            let _ = writeln!(s, "[precompensator]");
            let _ = writeln!(s, "model_n_n = {}", p.model.n_n);
            let _ = writeln!(s, "model_n_d = {}", p.model.n_d);
            let _ = writeln!(s, "g_num_degree = {}", p.n_num);
            let _ = writeln!(s, "g_den_degree = {}", p.n_den);
            let _ = writeln!(s, "g_z_degree = {}", p.z_degree);
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(s, "[verdicts]");
            for v in &self.verdicts {
                let _ = writeln!(
                    s,
                    "tau {} = {} (margin {})",
                    v.tau,
                    if v.verdict.stable {
                        "stable"
                    } else {
                        "unstable"
                    },
                    v.verdict.margin_metric
                );
            }
        }
        if let Some(t) = &self.trajectory {
            let _ = writeln!(s, "[trajectory]");
            if let Some(tau) = self.tau {
                let _ = writeln!(s, "tau = {tau}");
            }
            if let Some(h) = self.h {
                let _ = writeln!(s, "h = {h}");
            }
            let _ = writeln!(s, "samples = {}", t.samples);
            let _ = writeln!(s, "final_t = {}", t.final_t);
            let _ = writeln!(s, "final_y1 = {}", t.final_y1);
            let _ = writeln!(s, "final_y2 = {}", t.final_y2);
            let _ = writeln!(s, "y1_final_rel_error = {}", t.y1_final_rel_error);
            let _ = writeln!(s, "y2_final_rel_error = {}", t.y2_final_rel_error);
            let _ = writeln!(s, "max_matching_error = {}", t.max_matching_error);
            match t.settling_time {
                Some(ts) => {
                    let _ = writeln!(s, "settling_time_2pct = {ts}");
                }
                None => {
                    let _ = writeln!(s, "settling_time_2pct = none");
                }
            }
            let outcome = match t.outcome {
                Outcome::Completed => "completed".to_string(),
                Outcome::NonFinite { t } => format!("diverged at t = {t}"),
            };
            let _ = writeln!(s, "outcome = {outcome}");
        }
        if let Some(e) = &self.envelope {
            let _ = writeln!(s, "[envelope]");
            let _ = writeln!(s, "horizon = {}", e.horizon);
            let _ = writeln!(s, "h = {}", e.h);
            let _ = writeln!(s, "early_peak = {}", e.early);
            let _ = writeln!(s, "late_peak = {}", e.late);
            let _ = writeln!(s, "rate = {}", e.rate);
            let _ = writeln!(s, "decays = {}", e.decays);
        }
        for o in &self.outputs {
            let _ = writeln!(s, "wrote {o}");
        }
        for m in &self.messages {
            let _ = writeln!(s, "note: {m}");
        }
        s
    }
}
