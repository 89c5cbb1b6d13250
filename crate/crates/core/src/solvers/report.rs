use std::fmt;

use crate::imaging::{psnr, ssim, Image};
use crate::Result;

/// Which restoration method produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    SplitBregman,
    Mdal,
    NonlocalMdal,
    TruncatedIsd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::SplitBregman,
        SolverKind::Mdal,
        SolverKind::NonlocalMdal,
        SolverKind::TruncatedIsd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SplitBregman => "split_bregman",
            SolverKind::Mdal => "mdal",
            SolverKind::NonlocalMdal => "nonlocal_mdal",
            SolverKind::TruncatedIsd => "truncated_isd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "split_bregman" | "sb" | "l1" => Ok(SolverKind::SplitBregman),
            "mdal" | "l0" => Ok(SolverKind::Mdal),
            "nonlocal_mdal" | "nl_mdal" | "l0l2" => Ok(SolverKind::NonlocalMdal),
            "truncated_isd" | "isd" | "proposed" => Ok(SolverKind::TruncatedIsd),
            other => Err(crate::Error::Config(format!(
                "unknown solver `{other}`; expected split_bregman, mdal, nonlocal_mdal or truncated_isd"
            ))),
        }
    }
}

/// One inner iteration of the reported sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub stage: usize,
    pub iteration: usize,
    /// `||x^k - x^{k-1}|| / ||x^k||` of the reported sequence.
    pub relative_change: f64,
    /// `||A x^k - f|| / ||f||`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Size of the support exempted from thresholding during this stage.
    pub support_size: usize,
    pub seconds: f64,
    pub output: Image,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub iterations: Vec<IterationRecord>,
    pub stages: Vec<StageRecord>,
    pub image: Image,
}

impl SolverReport {
    pub fn total_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn seconds(&self) -> f64 {
        self.stages.iter().map(|s| s.seconds).sum()
    }

    pub fn converged(&self) -> bool {
        self.stages.last().is_some_and(|s| s.converged)
    }

    /// Fills per-stage PSNR and SSIM against `truth`.
    pub fn evaluate(&mut self, truth: &Image) -> Result<()> {
        for stage in &mut self.stages {
            stage.psnr = Some(psnr(truth, &stage.output)?);
            stage.ssim = Some(ssim(truth, &stage.output)?);
        }
        Ok(())
    }

    pub fn final_psnr(&self) -> Option<f64> {
        self.stages.last().and_then(|s| s.psnr)
    }

    pub fn final_ssim(&self) -> Option<f64> {
        self.stages.last().and_then(|s| s.ssim)
    }

    /// Equality of everything except wall-clock timings.
    pub fn same_trajectory(&self, other: &SolverReport) -> bool {
        self.iterations == other.iterations
            && self.image == other.image
            && self.stages.len() == other.stages.len()
            && self.stages.iter().zip(&other.stages).all(|(a, b)| {
                a.iterations == b.iterations
                    && a.converged == b.converged
                    && a.support_size == b.support_size
                    && a.output == b.output
            })
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
