//! Experiment harness: seeded degradation, grid search over solver
//! parameters, best-setting selection and deterministic artifact output.

mod config;
mod fixtures;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{BlurSpec, Case, ExperimentConfig, ImageSource, Method, SolverGrid};
pub use fixtures::{cameraman, checkerboard, ramp, stripes, Fixture};

use crate::degrade::degrade;
use crate::framelet::{Boundary, Framelet};
use crate::imaging::{psnr, save_image, ssim, Image};
use crate::solvers::{solve, SolverKind, SolverReport};
use crate::{Error, Result};

/// Column order of every metrics CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "image",
    "blur_type",
    "sigma",
    "solver",
    "lambda",
    "nu",
    "stages",
    "psnr",
    "ssim",
    "seconds",
    "iterations",
];

/// Solver label used for oracle-support runs.
pub const ORACLE_LABEL: &str = "oracle";

/// Metrics of one grid point (or of the degraded observation).
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub image: String,
    pub blur_type: String,
    pub sigma: f64,
    pub solver: String,
    pub lambda: f64,
    pub nu: f64,
    pub stages: usize,
    pub psnr: f64,
    pub ssim: f64,
    /// `None` unless the config enables timing.
    pub seconds: Option<f64>,
    pub iterations: usize,
    /// `(psnr, ssim)` after each stage.
    pub stage_metrics: Vec<(f64, f64)>,
}

impl RunRecord {
    fn csv_fields(&self) -> [String; 11] {
        [
            self.image.clone(),
            self.blur_type.clone(),
            format!("{}", self.sigma),
            self.solver.clone(),
            format!("{}", self.lambda),
            format!("{}", self.nu),
            self.stages.to_string(),
            format!("{:.4}", self.psnr),
            format!("{:.6}", self.ssim),
            self.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
            self.iterations.to_string(),
        ]
    }

    fn same_case(&self, other: &RunRecord) -> bool {
        self.image == other.image
            && self.blur_type == other.blur_type
            && self.sigma.to_bits() == other.sigma.to_bits()
            && self.solver == other.solver
    }
}

/// A selected grid point together with its full report.
#[derive(Clone, Debug)]
pub struct Selection {
    /// Index into [`ExperimentResult::runs`].
    pub run: usize,
    pub report: Option<SolverReport>,
}

/// Everything an experiment produced, in deterministic order.
#[derive(Clone, Debug, Default)]
pub struct ExperimentResult {
    /// Every grid point, ordered by image, blur, sigma, solver, lambda, nu.
    pub runs: Vec<RunRecord>,
    /// Best-PSNR grid point per (image, blur, sigma, solver).
    pub best_psnr: Vec<Selection>,
    /// Best-SSIM grid point per (image, blur, sigma, solver).
    pub best_ssim: Vec<usize>,
    /// Degraded observations keyed by `(image, blur, sigma)`.
    pub observations: Vec<Observation>,
}

#[derive(Clone, Debug)]
pub struct Observation {
    pub image: String,
    pub blur_type: String,
    pub sigma: f64,
    pub truth: Image,
    pub degraded: Image,
}

impl ExperimentResult {
    /// Best-PSNR record for a case, if it ran.
    pub fn best(&self, image: &str, blur_type: &str, sigma: f64, solver: &str) -> Option<&RunRecord> {
        self.best_psnr.iter().map(|s| &self.runs[s.run]).find(|r| {
            r.image == image && r.blur_type == blur_type && r.sigma.to_bits() == sigma.to_bits() && r.solver == solver
        })
    }

    pub fn runs_csv(&self) -> String {
        to_csv(self.runs.iter())
    }

    pub fn summary_csv(&self) -> String {
        to_csv(self.best_psnr.iter().map(|s| &self.runs[s.run]))
    }

    pub fn summary_ssim_csv(&self) -> String {
        to_csv(self.best_ssim.iter().map(|&i| &self.runs[i]))
    }

    /// Per-stage metrics of every grid point.
    pub fn stages_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "image",
            "blur_type",
            "sigma",
            "solver",
            "lambda",
            "nu",
            "stage",
            "psnr",
            "ssim",
        ])
        .expect("in-memory write");
        for r in &self.runs {
            for (i, (p, s)) in r.stage_metrics.iter().enumerate() {
                w.write_record([
                    r.image.clone(),
                    r.blur_type.clone(),
                    format!("{}", r.sigma),
                    r.solver.clone(),
                    format!("{}", r.lambda),
                    format!("{}", r.nu),
                    (i + 1).to_string(),
                    format!("{p:.4}"),
                    format!("{s:.6}"),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Aligned text rendering of both summaries.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        out.push_str("best PSNR\n");
        out.push_str(&aligned(self.best_psnr.iter().map(|s| &self.runs[s.run])));
        out.push_str("\nbest SSIM\n");
        out.push_str(&aligned(self.best_ssim.iter().map(|&i| &self.runs[i])));
        out
    }

    /// Writes CSVs, the text table and (optionally) images into `dir`.
    pub fn write(&self, dir: &Path, save_images: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let files = [
            ("runs.csv", self.runs_csv()),
            ("summary.csv", self.summary_csv()),
            ("summary_ssim.csv", self.summary_ssim_csv()),
            ("stages.csv", self.stages_csv()),
            ("summary.txt", self.summary_table()),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        if save_images {
            for obs in &self.observations {
                let path = dir.join(format!(
                    "{}_degraded.pgm",
                    case_stem(&obs.image, &obs.blur_type, obs.sigma)
                ));
                save_image(&obs.degraded, &path)?;
                written.push(path);
            }
            for sel in &self.best_psnr {
                if let Some(report) = &sel.report {
                    let r = &self.runs[sel.run];
                    let path = dir.join(format!(
                        "{}_{}.pgm",
                        case_stem(&r.image, &r.blur_type, r.sigma),
                        r.solver
                    ));
                    save_image(&report.image, &path)?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

fn case_stem(image: &str, blur: &str, sigma: f64) -> String {
    let s = format!("{sigma}").replace('.', "p");
    let clean = |t: &str| -> String {
        t.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect()
    };
    format!("{}_{}_s{s}", clean(image), clean(blur))
}

fn to_csv<'a>(rows: impl Iterator<Item = &'a RunRecord>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(r.csv_fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn aligned<'a>(rows: impl Iterator<Item = &'a RunRecord>) -> String {
    let mut table: Vec<Vec<String>> = vec![CSV_COLUMNS.iter().map(|s| s.to_string()).collect()];
    table.extend(rows.map(|r| r.csv_fields().to_vec()));
    let widths: Vec<usize> = (0..CSV_COLUMNS.len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[derive(Clone, Copy)]
struct Task {
    solver: SolverKind,
    oracle: bool,
    lambda: f64,
    nu: f64,
}

fn tasks(config: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for g in &config.grids {
        for oracle in [false, true] {
            if oracle && !(config.oracle && g.solver == SolverKind::TruncatedIsd) {
                continue;
            }
            for &lambda in &g.lambdas {
                for &nu in &g.nus {
                    out.push(Task {
                        solver: g.solver,
                        oracle,
                        lambda,
                        nu,
                    });
                }
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn run_all<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs every configured case and writes artifacts when `config.output` is
/// set.
///
/// Grid points run concurrently under the `parallel` feature; results are
/// gathered in grid order so output does not depend on scheduling. Ties in
/// the best-setting selection go to the earlier grid point.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut result = ExperimentResult::default();
    let tasks = tasks(config);
    for source in &config.images {
        let truth = source.load(config.size)?;
        let name = source.name();
        for case in &config.cases {
            let blur = &case.blur;
            let sigma = case.sigma;
            let kernel = blur.kernel();
            let (op, observed) = degrade(&truth, &kernel, sigma, config.seed)?;
            if config.degraded_row {
                result.runs.push(RunRecord {
                    image: name.clone(),
                    blur_type: blur.label().to_string(),
                    sigma,
                    solver: Method::Degraded.name().to_string(),
                    lambda: 0.0,
                    nu: 0.0,
                    stages: 0,
                    psnr: psnr(&truth, &observed)?,
                    ssim: ssim(&truth, &observed)?,
                    seconds: None,
                    iterations: 0,
                    stage_metrics: Vec::new(),
                });
                let i = result.runs.len() - 1;
                result.best_psnr.push(Selection { run: i, report: None });
                result.best_ssim.push(i);
            }

            let outcomes = run_all(&tasks, |t| -> Result<(RunRecord, SolverReport)> {
                let params = config.params(t.solver, t.lambda, t.nu, sigma);
                let oracle = t.oracle.then_some(&truth);
                let mut report = solve(t.solver, &observed, &op, &params, oracle)?;
                report.evaluate(&truth)?;
                let record = RunRecord {
                    image: name.clone(),
                    blur_type: blur.label().to_string(),
                    sigma,
                    solver: if t.oracle {
                        ORACLE_LABEL.to_string()
                    } else {
                        t.solver.name().to_string()
                    },
                    lambda: t.lambda,
                    nu: t.nu,
                    stages: params.stages,
                    psnr: report.final_psnr().unwrap_or(f64::NAN),
                    ssim: report.final_ssim().unwrap_or(f64::NAN),
                    seconds: config.timing.then(|| report.seconds()),
                    iterations: report.total_iterations(),
                    stage_metrics: report
                        .stages
                        .iter()
                        .map(|s| (s.psnr.unwrap_or(f64::NAN), s.ssim.unwrap_or(f64::NAN)))
                        .collect(),
                };
                Ok((record, report))
            });

            let start = result.runs.len();
            let mut reports = Vec::with_capacity(outcomes.len());
            for outcome in outcomes {
                let (record, report) = outcome?;
                result.runs.push(record);
                reports.push(Some(report));
            }
            select(&mut result, start, &mut reports);
            result.observations.push(Observation {
                image: name.clone(),
                blur_type: blur.label().to_string(),
                sigma,
                truth: truth.clone(),
                degraded: observed,
            });
        }
    }
    if let Some(dir) = &config.output {
        result.write(dir, config.save_images)?;
    }
    Ok(result)
}

fn select(result: &mut ExperimentResult, start: usize, reports: &mut [Option<SolverReport>]) {
    let mut i = start;
    while i < result.runs.len() {
        let mut end = i + 1;
        while end < result.runs.len() && result.runs[end].same_case(&result.runs[i]) {
            end += 1;
        }
        let better = |a: f64, b: f64| a > b || (b.is_nan() && !a.is_nan());
        let mut bp = i;
        let mut bs = i;
        for j in i + 1..end {
            if better(result.runs[j].psnr, result.runs[bp].psnr) {
                bp = j;
            }
            if better(result.runs[j].ssim, result.runs[bs].ssim) {
                bs = j;
            }
        }
        result.best_psnr.push(Selection {
            run: bp,
            report: reports[bp - start].take(),
        });
        result.best_ssim.push(bs);
        i = end;
    }
}

/// High-pass magnitudes `|W u|` sorted in descending order.
pub fn decay_profile(image: &Image, levels: usize, boundary: Boundary) -> Result<Vec<f64>> {
    let coeffs = Framelet::new(levels, boundary)?.analysis(image)?;
    let mut mags: Vec<f64> = coeffs.highpass().iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// `rank,magnitude` rows for a profile from [`decay_profile`].
pub fn decay_csv(profile: &[f64]) -> String {
    let mut out = String::with_capacity(profile.len() * 24);
    out.push_str("rank,magnitude\n");
    for (i, m) in profile.iter().enumerate() {
        let _ = writeln!(out, "{},{m:.10e}", i + 1);
    }
    out
}

/// Share of the total l1 mass carried by the largest `fraction` of entries.
///
/// Returns 0 for an all-zero profile.
pub fn top_mass_share(profile: &[f64], fraction: f64) -> f64 {
    let total: f64 = profile.iter().sum();
    if total == 0.0 || profile.is_empty() {
        return 0.0;
    }
    let k = ((profile.len() as f64 * fraction).ceil() as usize).clamp(1, profile.len());
    profile[..k].iter().sum::<f64>() / total
}
