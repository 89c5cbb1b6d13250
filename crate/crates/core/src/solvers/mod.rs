//! Restoration solvers built on one doubly augmented Lagrangian iteration.
//!
//! Every solver alternates
//!
//! ```text
//! u     <- (A^T A + (mu + gamma) I)^{-1} (A^T f + gamma u + mu W^T (alpha - b))
//! alpha <- prox(W u + b)              (soft, hard or selective hard threshold)
//! b     <- b + W u - alpha
//! ```
//!
//! and differs only in the proximal step, whether running means of the
//! iterates are reported, and whether a nonlocal estimate `beta` of the
//! coefficients enters the coefficient update.

mod params;
mod report;
mod stopping;
mod support;
mod threshold;

pub use params::{default_tikhonov_eta, SolverParams};
pub use report::{IterationRecord, SolverKind, SolverReport, StageRecord};
pub use stopping::{stopping_criterion, DEFAULT_TOL};
pub use support::{detect_support, support_threshold, SupportMask};
pub use threshold::{hard_threshold_generalized, hard_threshold_selective, soft_scalar, soft_threshold, Penalties};

use report::Stopwatch;
use stopping::{relative, stop_on_ratios};
use threshold::hard_threshold_into;

use crate::degrade::BlurOperator;
use crate::framelet::{FrameCoeffs, FrameWeights, Framelet};
use crate::imaging::Image;
use crate::nonlocal::{build_neighbor_table, estimate_beta, estimate_beta_into, tikhonov_initial, NeighborTable};
use crate::{Error, Result};

/// Relative change above which an iteration is declared divergent.
const DIVERGENCE_LIMIT: f64 = 1e6;

/// Iterate state carried across stages.
#[derive(Clone, Debug)]
struct State {
    u: Image,
    alpha: FrameCoeffs,
    b: FrameCoeffs,
    beta: Option<FrameCoeffs>,
}

#[derive(Clone, Copy)]
enum Prox<'a> {
    Soft,
    Hard { mask: Option<&'a SupportMask> },
}

struct Problem<'a> {
    f: &'a Image,
    op: &'a BlurOperator,
    params: &'a SolverParams,
    framelet: Framelet,
    atf: Image,
    f_norm: f64,
}

struct StageResult {
    output: Image,
    alpha: FrameCoeffs,
    iterations: usize,
    converged: bool,
}

impl<'a> Problem<'a> {
    fn new(f: &'a Image, op: &'a BlurOperator, params: &'a SolverParams) -> Result<Self> {
        params.validate()?;
        f.check_dims(op.width(), op.height())?;
        let framelet = params.framelet()?;
        framelet.check_image(f.width(), f.height())?;
        Ok(Self {
            f,
            op,
            params,
            framelet,
            atf: op.adjoint(f)?,
            f_norm: f.norm(),
        })
    }

    /// `u = f`, `alpha = W f`, `b = 0`.
    fn initial_state(&self) -> Result<State> {
        let alpha = self.framelet.analysis(self.f)?;
        let b = alpha.zeros_like();
        Ok(State {
            u: self.f.clone(),
            alpha,
            b,
            beta: None,
        })
    }

    /// Builds the neighbor table from the Tikhonov guide and the initial
    /// nonlocal estimate `beta = NL(W u_hat)`.
    fn nonlocal_setup(&self) -> Result<(NeighborTable, FrameCoeffs)> {
        let guide = tikhonov_initial(self.f, self.op, self.params.tikhonov_eta)?;
        let table = build_neighbor_table(&guide, &self.params.nonlocal)?;
        let beta = estimate_beta(&table, &self.framelet.analysis(&guide)?)?;
        Ok((table, beta))
    }

    fn weights(&self, shape: &FrameCoeffs, value: f64) -> Result<FrameWeights> {
        FrameWeights::uniform(shape, value)
    }

    #[allow(clippy::too_many_arguments)]
    fn run_stage(
        &self,
        state: &mut State,
        prox: Prox<'_>,
        averaged: bool,
        nu: f64,
        table: Option<&NeighborTable>,
        stage: usize,
        records: &mut Vec<IterationRecord>,
    ) -> Result<StageResult> {
        let p = self.params;
        let (mu, gamma) = (p.mu, p.gamma);
        let shift = mu + gamma;
        let pen = Penalties { nu, mu, gamma };
        let weights = match prox {
            Prox::Soft => self.weights(&state.alpha, p.lambda / mu)?,
            Prox::Hard { .. } => self.weights(&state.alpha, p.lambda)?,
        };
        let use_beta = nu != 0.0 && state.beta.is_some();

        let mut prev_out = state.u.clone();
        let mut u_bar = state.u.clone();
        let mut alpha_bar = state.alpha.clone();
        let mut diff = state.alpha.zeros_like();
        let mut next_alpha = state.alpha.zeros_like();
        let mut iterations = 0;
        let mut converged = false;

        for k in 1..=p.max_inner {
            iterations = k;
            // u-update
            diff.data_mut()
                .iter_mut()
                .zip(state.alpha.data().iter().zip(state.b.data()))
                .for_each(|(d, (a, b))| *d = a - b);
            let back = self.framelet.synthesis(&diff)?;
            let mut rhs = self.atf.clone();
            for ((r, &ui), &wi) in rhs.data_mut().iter_mut().zip(state.u.data()).zip(back.data()) {
                *r += gamma * ui + mu * wi;
            }
            let u = self.op.solve_diagonal(shift, &rhs)?;

            // alpha-update on y = W u + b
            let mut y = self.framelet.analysis(&u)?;
            y.axpy(1.0, &state.b);
            match prox {
                Prox::Soft => next_alpha = soft_threshold(&y, &weights)?,
                Prox::Hard { mask } => {
                    let x = if use_beta { state.beta.as_ref() } else { None };
                    hard_threshold_into(x, &y, &state.alpha, &weights, pen, mask, &mut next_alpha)?;
                }
            }

            // b-update: b + W u - alpha = y - alpha
            for ((b, yi), ai) in state.b.data_mut().iter_mut().zip(y.data()).zip(next_alpha.data()) {
                *b = yi - ai;
            }
            std::mem::swap(&mut state.alpha, &mut next_alpha);
            state.u = u;

            if use_beta && k % p.beta_refresh == 0 {
                if let (Some(table), Some(beta)) = (table, state.beta.as_mut()) {
                    estimate_beta_into(table, &state.alpha, beta)?;
                }
            }

            let out = if averaged {
                let kf = k as f64;
                let inv = 1.0 / (kf + 1.0);
                for (m, &v) in u_bar.data_mut().iter_mut().zip(state.u.data()) {
                    *m = (kf * *m + v) * inv;
                }
                for (m, &v) in alpha_bar.data_mut().iter_mut().zip(state.alpha.data()) {
                    *m = (kf * *m + v) * inv;
                }
                &u_bar
            } else {
                &state.u
            };

            let change = relative(out.distance(&prev_out), out.norm());
            let residual = relative(self.op.apply(out)?.distance(self.f), self.f_norm);
            records.push(IterationRecord {
                stage,
                iteration: k,
                relative_change: change,
                residual,
            });
            if !change.is_finite() && out.norm() > 0.0 || change > DIVERGENCE_LIMIT || !out.is_finite() {
                return Err(Error::Diverged { iteration: k, change });
            }
            if stop_on_ratios(change, residual, p.tol) {
                converged = true;
                break;
            }
            prev_out.data_mut().copy_from_slice(out.data());
        }

        let (output, alpha) = if averaged {
            (u_bar, alpha_bar)
        } else {
            (state.u.clone(), state.alpha.clone())
        };
        Ok(StageResult {
            output,
            alpha,
            iterations,
            converged,
        })
    }
}

fn single_stage(
    kind: SolverKind,
    problem: &Problem<'_>,
    mut state: State,
    prox: Prox<'_>,
    averaged: bool,
    nu: f64,
    table: Option<&NeighborTable>,
) -> Result<SolverReport> {
    let clock = Stopwatch::start();
    let mut iterations = Vec::new();
    let res = problem.run_stage(&mut state, prox, averaged, nu, table, 1, &mut iterations)?;
    Ok(SolverReport {
        solver: kind,
        iterations,
        stages: vec![StageRecord {
            stage: 1,
            iterations: res.iterations,
            converged: res.converged,
            support_size: 0,
            seconds: clock.seconds(),
            output: res.output.clone(),
            psnr: None,
            ssim: None,
        }],
        image: res.output,
    })
}

/// Split Bregman for the anisotropic l1 analysis model
/// `min_u 1/2 ||A u - f||^2 + lambda ||W u||_1`. Reports the plain iterates.
pub fn solve_split_bregman_l1(f: &Image, op: &BlurOperator, params: &SolverParams) -> Result<SolverReport> {
    let params = SolverParams {
        gamma: 0.0,
        ..params.clone()
    };
    let problem = Problem::new(f, op, &params)?;
    let state = problem.initial_state()?;
    single_stage(SolverKind::SplitBregman, &problem, state, Prox::Soft, false, 0.0, None)
}

/// Mean doubly augmented Lagrangian method for the weighted l0 model; the
/// reported image is the running mean of the `u` iterates.
pub fn solve_mdal_l0(f: &Image, op: &BlurOperator, params: &SolverParams) -> Result<SolverReport> {
    let problem = Problem::new(f, op, params)?;
    let state = problem.initial_state()?;
    single_stage(
        SolverKind::Mdal,
        &problem,
        state,
        Prox::Hard { mask: None },
        true,
        0.0,
        None,
    )
}

/// MDAL for the combined l0 / nonlocal-l2 model. With `nu = 0` the
/// trajectory is exactly that of [`solve_mdal_l0`].
pub fn solve_nonlocal_mdal(f: &Image, op: &BlurOperator, params: &SolverParams) -> Result<SolverReport> {
    let problem = Problem::new(f, op, params)?;
    let mut state = problem.initial_state()?;
    let table = if params.nu != 0.0 {
        let (table, beta) = problem.nonlocal_setup()?;
        state.beta = Some(beta);
        Some(table)
    } else {
        None
    };
    single_stage(
        SolverKind::NonlocalMdal,
        &problem,
        state,
        Prox::Hard { mask: None },
        true,
        params.nu,
        table.as_ref(),
    )
}

/// One truncated l0 / nonlocal-l2 stage with a caller-supplied support:
/// entries where `support` is `true` are never zeroed. An all-false support
/// gives the trajectory of [`solve_nonlocal_mdal`].
pub fn solve_fixed_support(
    f: &Image,
    op: &BlurOperator,
    params: &SolverParams,
    support: &SupportMask,
) -> Result<SolverReport> {
    let problem = Problem::new(f, op, params)?;
    let mut state = problem.initial_state()?;
    if !support.fits(&state.alpha) {
        return Err(Error::MalformedPyramid(
            "support mask does not match the pyramid".into(),
        ));
    }
    let table = if params.nu != 0.0 {
        let (table, beta) = problem.nonlocal_setup()?;
        state.beta = Some(beta);
        Some(table)
    } else {
        None
    };
    single_stage(
        SolverKind::TruncatedIsd,
        &problem,
        state,
        Prox::Hard { mask: Some(support) },
        true,
        params.nu,
        table.as_ref(),
    )
}

/// Multi-stage truncated l0 / nonlocal-l2 restoration with iterative support
/// detection.
///
/// Stage 1 runs with an empty support and therefore equals
/// [`solve_nonlocal_mdal`]. After stage `s` the coefficients `W u_bar` of the
/// stage output are thresholded at `max|.| / rho^(s+1)`; entries above it are
/// exempt from the l0 penalty during stage `s + 1`. Stages warm-start from the
/// previous stage's means (and its `b`, `beta`), and restart the means.
///
/// With `oracle_truth`, supports are detected on `W truth` instead of the
/// running estimate.
pub fn solve_truncated_isd(
    f: &Image,
    op: &BlurOperator,
    params: &SolverParams,
    oracle_truth: Option<&Image>,
) -> Result<SolverReport> {
    let problem = Problem::new(f, op, params)?;
    if let Some(truth) = oracle_truth {
        truth.check_same(f)?;
    }
    let mut state = problem.initial_state()?;
    let table = if params.nu != 0.0 {
        let (table, beta) = problem.nonlocal_setup()?;
        state.beta = Some(beta);
        Some(table)
    } else {
        None
    };
    let truth_coeffs = oracle_truth.map(|t| problem.framelet.analysis(t)).transpose()?;

    let mut iterations = Vec::new();
    let mut stages = Vec::with_capacity(params.stages);
    let mut mask: Option<SupportMask> = None;
    let mut output = f.clone();
    for stage in 1..=params.stages {
        let clock = Stopwatch::start();
        let prox = Prox::Hard { mask: mask.as_ref() };
        let res = problem.run_stage(
            &mut state,
            prox,
            true,
            params.nu,
            table.as_ref(),
            stage,
            &mut iterations,
        )?;
        stages.push(StageRecord {
            stage,
            iterations: res.iterations,
            converged: res.converged,
            support_size: mask.as_ref().map_or(0, SupportMask::count),
            seconds: clock.seconds(),
            output: res.output.clone(),
            psnr: None,
            ssim: None,
        });
        output = res.output;
        if stage < params.stages {
            let coeffs = match &truth_coeffs {
                Some(c) => c.clone(),
                None => problem.framelet.analysis(&output)?,
            };
            mask = Some(detect_support(&coeffs, params.rho, stage)?);
            state.u = output.clone();
            state.alpha = res.alpha;
        }
    }
    Ok(SolverReport {
        solver: SolverKind::TruncatedIsd,
        iterations,
        stages,
        image: output,
    })
}

/// Dispatches on `kind`; `oracle_truth` only affects [`SolverKind::TruncatedIsd`].
pub fn solve(
    kind: SolverKind,
    f: &Image,
    op: &BlurOperator,
    params: &SolverParams,
    oracle_truth: Option<&Image>,
) -> Result<SolverReport> {
    match kind {
        SolverKind::SplitBregman => solve_split_bregman_l1(f, op, params),
        SolverKind::Mdal => solve_mdal_l0(f, op, params),
        SolverKind::NonlocalMdal => solve_nonlocal_mdal(f, op, params),
        SolverKind::TruncatedIsd => solve_truncated_isd(f, op, params, oracle_truth),
    }
}

/// `1/2 ||A u - f||^2 + lambda sum |(W u)_i|` over the high-pass bands.
pub fn l1_objective(u: &Image, f: &Image, op: &BlurOperator, framelet: &Framelet, lambda: f64) -> Result<f64> {
    let fit = op.apply(u)?.distance(f);
    let wu = framelet.analysis(u)?;
    let l1: f64 = wu.highpass().iter().map(|v| v.abs()).sum();
    Ok(0.5 * fit * fit + lambda * l1)
}
