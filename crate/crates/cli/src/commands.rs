use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ipiag::problems::ProblemDocument;
use ipiag::rates::{corollary1_params, corollary2_params, theorem1_params, verify_theorem1_bound};
use ipiag::{run, BlockPartition, CertificateKind, CompositeProblem, RateCertificate, RateInputs, RunOptions, Trace};
use serde::Serialize;

use crate::config::{read_json, CompareSpec, Resolved, RunConfig};
use crate::error::{io_error, CliError, Result};
use crate::plot::{self, Series};

/// Environment variable selecting the significant digits written to CSV.
pub const PRECISION_VAR: &str = "IPIAG_FLOAT_PRECISION";
const DEFAULT_PRECISION: usize = 17;

pub fn float_precision() -> Result<usize> {
    match std::env::var(PRECISION_VAR) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(p @ 1..=17) => Ok(p),
            _ => Err(CliError::config(format!("{PRECISION_VAR} must be an integer in 1..=17, got '{v}'"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
    pub checked: usize,
    pub lyapunov_violations: usize,
    pub gap_violations: usize,
    pub distance_violations: usize,
}

impl BoundCheck {
    fn skipped(reason: impl Into<String>) -> Self {
        Self {
            status: CheckStatus::Skipped,
            reason: Some(reason.into()),
            worst_ratio: None,
            checked: 0,
            lyapunov_violations: 0,
            gap_violations: 0,
            distance_violations: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub variant: String,
    pub alpha: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub schedule: crate::config::ScheduleConfig,
    pub iterations: usize,
    pub stopped_early: bool,
    /// `Φ(z_K) − Φ*`; absent without a reference optimum.
    pub final_gap: Option<f64>,
    pub final_dist2: Option<f64>,
    pub iters_to_1e_4: Option<usize>,
    pub iters_to_1e_6: Option<usize>,
    pub certificate: Option<RateCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_note: Option<String>,
    pub bound_check: BoundCheck,
    pub wall_clock_seconds: f64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn build_problem(doc: &ProblemDocument) -> Result<CompositeProblem> {
    doc.build().map_err(|e| match e {
        ipiag::Error::Io(_) => CliError::Core(e),
        other => CliError::config(format!("problem: {other}")),
    })
}

fn execute(problem: &CompositeProblem, config: &RunConfig, resolved: &Resolved) -> Result<Trace> {
    let schedule = config.schedule.build(config.iters)?;
    let partition = BlockPartition::contiguous(problem.num_components(), config.schedule.workers)
        .map_err(|e| CliError::config(e.to_string()))?;
    let x0 = vec![0.0; problem.dimension()];
    Ok(run(problem, &resolved.params, &partition, &schedule, &x0, &RunOptions::default())?)
}

fn check_bound(trace: &Trace, resolved: &Resolved) -> (Option<RateCertificate>, BoundCheck) {
    let Some(cert) = &resolved.certificate else {
        let note = resolved.certificate_note.clone().unwrap_or_else(|| "no certificate".into());
        return (None, BoundCheck::skipped(note));
    };
    if !cert.admissible {
        return (Some(cert.clone()), BoundCheck::skipped("parameters lie outside the certified range"));
    }
    match verify_theorem1_bound(trace, cert) {
        Err(e) => (Some(cert.clone()), BoundCheck::skipped(e.to_string())),
        Ok(report) => {
            let check = BoundCheck {
                status: if report.passed() { CheckStatus::Passed } else { CheckStatus::Failed },
                reason: None,
                worst_ratio: Some(report.worst_ratio),
                checked: report.checked,
                lyapunov_violations: report.lyapunov_violations.len(),
                gap_violations: report.gap_violations.len(),
                distance_violations: report.distance_violations.len(),
            };
            (Some(cert.clone().with_constant(report.constant)), check)
        }
    }
}

/// Runs one configuration and writes `trace.csv`, `summary.json` and,
/// when requested, `plot.svg` into `out`.
pub fn cmd_run(problem_doc: &ProblemDocument, config: &RunConfig, out: &Path) -> Result<RunSummary> {
    let precision = float_precision()?;
    let problem = build_problem(problem_doc)?;
    let resolved = config.resolve(&problem)?;
    let start = Instant::now();
    let trace = execute(&problem, config, &resolved)?;
    let (certificate, bound_check) = check_bound(&trace, &resolved);
    let wall_clock_seconds = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(out).map_err(io_error(out))?;
    let csv_path = out.join("trace.csv");
    let file = std::fs::File::create(&csv_path).map_err(io_error(&csv_path))?;
    let mut writer = std::io::BufWriter::new(file);
    trace.write_csv(&mut writer, precision).map_err(io_error(&csv_path))?;
    writer.flush().map_err(io_error(&csv_path))?;

    let last = trace.last();
    let summary = RunSummary {
        label: config.label(),
        variant: config.variant.to_string(),
        alpha: resolved.params.alpha,
        eta1: resolved.params.eta1,
        eta2: resolved.params.eta2,
        schedule: config.schedule,
        iterations: trace.iterations(),
        stopped_early: trace.stopped_early,
        final_gap: trace.phi_star().and_then(|s| finite(last.phi - s)),
        final_dist2: finite(last.dist2),
        iters_to_1e_4: trace.first_below(1e-4),
        iters_to_1e_6: trace.first_below(1e-6),
        certificate,
        certificate_note: resolved.certificate_note.clone(),
        bound_check,
        wall_clock_seconds,
    };
    let json_path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&json_path, text + "\n").map_err(io_error(&json_path))?;

    if config.plot {
        let svg_path = out.join("plot.svg");
        std::fs::write(&svg_path, render_plot(&trace, &summary)).map_err(io_error(&svg_path))?;
    }
    Ok(summary)
}

fn render_plot(trace: &Trace, summary: &RunSummary) -> String {
    let mut series = vec![Series {
        name: "‖z_k − x*‖²",
        values: trace.records.iter().map(|r| (r.k, r.dist2)).collect(),
        dashed: false,
    }];
    if let (Some(cert), CheckStatus::Passed | CheckStatus::Failed) = (&summary.certificate, summary.bound_check.status) {
        if let Some(c) = cert.constant {
            let scale = 2.0 * cert.alpha / (1.0 - cert.eta1) * c;
            let mut env = scale;
            let values = (0..trace.records.len())
                .map(|k| {
                    let v = (k, env);
                    env *= cert.rho;
                    v
                })
                .skip(1)
                .collect();
            series.push(Series { name: "distance envelope", values, dashed: true });
        }
    }
    let title = format!("{} (α = {:.3e}, η₁ = {:.3e}, η₂ = {:.3e})", summary.label, summary.alpha, summary.eta1, summary.eta2);
    plot::render(&title, &series)
}

/// Aggregated outcome of one configuration across repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub variant: String,
    pub alpha: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Certified rate; empty when the parameters are not certified.
    pub rho: Option<f64>,
    pub iters_to_1e_4: Option<f64>,
    pub iters_to_1e_6: Option<f64>,
    pub final_gap: Option<f64>,
    pub repetitions: usize,
    pub diverged: bool,
}

pub const COMPARE_HEADER: &str =
    "label,variant,alpha,eta1,eta2,rho,iters_to_1e-4,iters_to_1e-6,final_gap,repetitions,status";

impl CompareRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.label),
            self.variant,
            self.alpha,
            self.eta1,
            self.eta2,
            opt(self.rho),
            opt(self.iters_to_1e_4),
            opt(self.iters_to_1e_6),
            opt(self.final_gap),
            self.repetitions,
            if self.diverged { "diverged" } else { "ok" }
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Mean of `values` when every repetition produced one.
fn mean_if_all(values: &[Option<f64>]) -> Option<f64> {
    let all: Option<Vec<f64>> = values.iter().copied().collect();
    all.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs every configuration of a comparison over the shared problem.
/// Random schedules are repeated with seeds `seed, seed+1, …`; synchronous
/// schedules run once.
pub fn cmd_compare(spec: &CompareSpec, repetitions: Option<usize>) -> Result<Vec<CompareRow>> {
    if spec.runs.len() < 2 {
        return Err(CliError::config("a comparison needs at least two runs"));
    }
    let reps = repetitions.unwrap_or(spec.repetitions);
    if reps == 0 {
        return Err(CliError::config("repetitions must be positive"));
    }
    let problem = build_problem(&spec.shared_problem()?)?;
    let mut rows = Vec::with_capacity(spec.runs.len());
    for config in &spec.runs {
        let resolved = config.resolve(&problem)?;
        let count = if config.schedule.is_random() { reps } else { 1 };
        let (mut hit4, mut hit6, mut gaps) = (Vec::new(), Vec::new(), Vec::new());
        let mut diverged = false;
        for r in 0..count {
            let seeded = RunConfig { schedule: config.schedule.with_seed(config.schedule.seed + r as u64), ..config.clone() };
            match execute(&problem, &seeded, &resolved) {
                Ok(trace) => {
                    hit4.push(trace.first_below(1e-4).map(|k| k as f64));
                    hit6.push(trace.first_below(1e-6).map(|k| k as f64));
                    gaps.push(trace.phi_star().and_then(|s| finite(trace.last().phi - s)));
                }
                Err(CliError::Core(ipiag::Error::Diverged { .. } | ipiag::Error::NonFinite { .. })) => {
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let p = &resolved.params;
        rows.push(CompareRow {
            label: config.label(),
            variant: config.variant.to_string(),
            alpha: p.alpha,
            eta1: p.eta1,
            eta2: p.eta2,
            rho: resolved.certificate.as_ref().filter(|c| c.admissible).map(|c| c.rho),
            iters_to_1e_4: if diverged { None } else { mean_if_all(&hit4) },
            iters_to_1e_6: if diverged { None } else { mean_if_all(&hit6) },
            final_gap: if diverged { None } else { mean_if_all(&gaps) },
            repetitions: count,
            diverged,
        });
    }
    Ok(rows)
}

pub fn write_compare(rows: &[CompareRow], out: Option<&PathBuf>) -> Result<()> {
    let mut text = String::from(COMPARE_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(io_error(path)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>"))),
    }
}

pub fn load_compare(path: &Path) -> Result<CompareSpec> {
    read_json(path)
}

/// Step size and inertia certificate for the given constants.
pub fn cmd_certify(lipschitz: f64, beta: f64, tau: usize, c1: f64, kind: CertificateKind) -> Result<RateCertificate> {
    let invalid = |e: ipiag::Error| CliError::config(e.to_string());
    match kind {
        CertificateKind::Theorem1Stated | CertificateKind::Theorem1ProofTight => {
            theorem1_params(&RateInputs::new(lipschitz, beta, tau, c1).map_err(invalid)?, kind).map_err(invalid)
        }
        CertificateKind::Corollary1 => {
            // The heavy-ball-only bound admits C₁ up to 1, beyond `RateInputs::new`.
            let inputs = RateInputs { lipschitz, beta, tau, c1 };
            corollary1_params(&inputs).map_err(invalid)
        }
        CertificateKind::Corollary2 => corollary2_params(lipschitz, beta, tau).map_err(invalid),
    }
}
