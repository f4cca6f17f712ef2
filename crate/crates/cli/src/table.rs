//! CSV layouts. Floats use the shortest representation that round-trips.

use std::path::Path;

use sparse_ldp::mech_global::{compute_kd, kd_exact, EXACT_KD_MAX_D};
use sparse_ldp::risk_engine::{BoundSummary, RiskEstimate, SweepRow};
use sparse_ldp::ExperimentConfig;

use crate::audit::AuditRow;
use crate::CliError;

pub const POINT_COLUMNS: [&str; 21] = [
    "axis_name",
    "axis_value",
    "d",
    "s",
    "n",
    "alpha",
    "a",
    "sigma",
    "mechanism",
    "selector",
    "tau",
    "mean_loss",
    "std_error",
    "trials",
    "lb_local",
    "ub_matched",
    "fano_er",
    "fano_afr",
    "a_star_local",
    "a_star_global",
    "flags",
];

pub const KD_COLUMNS: [&str; 6] = ["d", "k_d", "sqrt_half_pi_d", "ratio", "exact", "note"];

pub const AUDIT_COLUMNS: [&str; 7] = ["check", "mechanism", "d", "alpha", "worst", "target", "status"];

pub fn fmt_f64(v: f64) -> String {
    let mag = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&mag) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

/// One evaluated configuration: a sweep grid point or a single run.
#[derive(Debug, Clone)]
pub struct PointRow {
    pub axis_name: String,
    pub axis_value: Option<f64>,
    pub config: ExperimentConfig,
    pub estimate: Option<RiskEstimate>,
    pub bounds: BoundSummary,
    pub error: Option<String>,
}

impl PointRow {
    pub fn from_sweep(row: SweepRow) -> Self {
        Self {
            axis_name: row.axis.to_string(),
            axis_value: Some(row.axis_value),
            config: row.config,
            estimate: row.estimate,
            bounds: row.bounds,
            error: row.error,
        }
    }

    pub fn single(config: ExperimentConfig, estimate: Option<RiskEstimate>, bounds: BoundSummary) -> Self {
        Self {
            axis_name: "NONE".into(),
            axis_value: None,
            config,
            estimate,
            bounds,
            error: None,
        }
    }

    fn record(&self) -> Vec<String> {
        let c = &self.config;
        let b = &self.bounds;
        let mut flags = b.flags.clone();
        if let Some(e) = &self.error {
            flags.push(format!("error: {e}"));
        }
        vec![
            self.axis_name.clone(),
            opt(self.axis_value),
            c.d.to_string(),
            c.s.to_string(),
            c.n.to_string(),
            fmt_f64(c.alpha),
            fmt_f64(c.a),
            fmt_f64(c.sigma),
            c.mechanism.to_string(),
            c.selector.to_string(),
            opt(b.tau),
            opt(self.estimate.as_ref().map(|e| e.mean_normalized_loss)),
            opt(self.estimate.as_ref().map(|e| e.std_error)),
            self.estimate.as_ref().map_or_else(String::new, |e| e.trials.to_string()),
            opt(b.lb_local),
            opt(b.ub_matched),
            opt(b.fano_er),
            opt(b.fano_afr),
            opt(b.a_star_local),
            opt(b.a_star_global),
            flags.join("; "),
        ]
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn write_all<I, R>(path: &Path, header: &[&str], records: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let wrap = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let mut w = writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for r in records {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Sweep layout; risk columns are left empty when no Monte Carlo ran.
pub fn write_points(path: &Path, rows: &[PointRow]) -> Result<(), CliError> {
    write_all(path, &POINT_COLUMNS, rows.iter().map(PointRow::record))
}

pub fn write_trials(path: &Path, losses: &[f64]) -> Result<(), CliError> {
    write_all(
        path,
        &["trial", "normalized_loss"],
        losses.iter().enumerate().map(|(t, l)| [t.to_string(), fmt_f64(*l)]),
    )
}

pub fn kd_record(d: usize) -> [String; 6] {
    let reference = (std::f64::consts::FRAC_PI_2 * d as f64).sqrt();
    match compute_kd(d) {
        Ok(k) => {
            let exact = if d <= EXACT_KD_MAX_D {
                match kd_exact(d) {
                    Ok((p, 1)) => p.to_string(),
                    Ok((p, q)) => format!("{p}/{q}"),
                    Err(_) => String::new(),
                }
            } else {
                String::new()
            };
            let note = if d <= EXACT_KD_MAX_D { "" } else { "log-gamma evaluation" };
            [
                d.to_string(),
                fmt_f64(k),
                fmt_f64(reference),
                fmt_f64(k / reference),
                exact,
                note.into(),
            ]
        }
        Err(e) => [d.to_string(), String::new(), fmt_f64(reference), String::new(), String::new(), e.to_string()],
    }
}

pub fn write_kd(path: &Path, dims: &[usize]) -> Result<(), CliError> {
    write_all(path, &KD_COLUMNS, dims.iter().map(|&d| kd_record(d)))
}

pub fn write_audit(path: &Path, rows: &[AuditRow]) -> Result<(), CliError> {
    write_all(
        path,
        &AUDIT_COLUMNS,
        rows.iter().map(|r| {
            [
                r.check.to_string(),
                r.mechanism.to_string(),
                r.d.to_string(),
                opt(r.alpha),
                fmt_f64(r.worst),
                fmt_f64(r.target),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        }),
    )
}
