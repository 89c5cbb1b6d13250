use crate::framelet::{Boundary, Framelet, MAX_LEVELS};
use crate::nonlocal::NonlocalConfig;
use crate::{Error, Result};

/// Parameters shared by all four solvers. Each solver reads the subset it
/// needs: split Bregman ignores `gamma`, `nu`, `rho` and `stages`; MDAL
/// ignores `nu`, `rho` and `stages`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    /// Uniform weight on every high-pass coefficient.
    pub lambda: f64,
    /// Penalty on `W u = alpha`.
    pub mu: f64,
    /// Proximal damping toward the previous iterate.
    pub gamma: f64,
    /// Weight of the quadratic pull toward the nonlocal estimate.
    pub nu: f64,
    /// Support-detection threshold divisor.
    pub rho: f64,
    pub levels: usize,
    pub boundary: Boundary,
    pub max_inner: usize,
    pub tol: f64,
    pub stages: usize,
    pub nonlocal: NonlocalConfig,
    /// Regularization of the Tikhonov guide image.
    pub tikhonov_eta: f64,
    /// Nonlocal estimate refresh period in inner iterations.
    pub beta_refresh: usize,
}

/// `eta = 1e-3 sigma^2`, floored at `1e-6`.
pub fn default_tikhonov_eta(sigma: f64) -> f64 {
    (1e-3 * sigma * sigma).max(1e-6)
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            mu: 0.01,
            gamma: 0.003,
            nu: 0.0,
            rho: 3.0,
            levels: 1,
            boundary: Boundary::Symmetric,
            max_inner: 500,
            tol: 5e-4,
            stages: 1,
            nonlocal: NonlocalConfig::for_noise(3.0),
            tikhonov_eta: default_tikhonov_eta(3.0),
            beta_refresh: 2,
        }
    }
}

impl SolverParams {
    /// `mu = 0.05`.
    pub fn split_bregman(lambda: f64) -> Self {
        Self {
            lambda,
            mu: 0.05,
            gamma: 0.0,
            ..Self::default()
        }
    }

    /// `mu = 0.01`, `gamma = 0.003`.
    pub fn mdal(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    /// MDAL settings plus the nonlocal term; `h` and the guide `eta` follow the
    /// noise level.
    pub fn nonlocal_mdal(lambda: f64, nu: f64, sigma: f64) -> Self {
        Self {
            lambda,
            nu,
            nonlocal: NonlocalConfig::for_noise(sigma),
            tikhonov_eta: default_tikhonov_eta(sigma),
            ..Self::default()
        }
    }

    /// Non-local MDAL settings run for `stages` support-detection stages with
    /// `rho = 3`.
    pub fn truncated_isd(lambda: f64, nu: f64, sigma: f64, stages: usize) -> Self {
        Self {
            stages,
            ..Self::nonlocal_mdal(lambda, nu, sigma)
        }
    }

    pub fn framelet(&self) -> Result<Framelet> {
        Framelet::new(self.levels, self.boundary)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, reason: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::param(name, reason))
            }
        }
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        check(
            finite_nonneg(self.lambda),
            "lambda",
            format!("must be >= 0, got {}", self.lambda),
        )?;
        check(
            self.mu.is_finite() && self.mu > 0.0,
            "mu",
            format!("must be > 0, got {}", self.mu),
        )?;
        check(
            finite_nonneg(self.gamma),
            "gamma",
            format!("must be >= 0, got {}", self.gamma),
        )?;
        check(finite_nonneg(self.nu), "nu", format!("must be >= 0, got {}", self.nu))?;
        check(
            self.rho.is_finite() && self.rho > 0.0,
            "rho",
            format!("must be > 0, got {}", self.rho),
        )?;
        check(self.tol > 0.0, "tol", format!("must be > 0, got {}", self.tol))?;
        check(self.stages >= 1, "stages", "must be >= 1".into())?;
        check(self.max_inner >= 1, "max_inner", "must be >= 1".into())?;
        check(self.beta_refresh >= 1, "beta_refresh", "must be >= 1".into())?;
        check(
            (1..=MAX_LEVELS).contains(&self.levels),
            "levels",
            format!("must be in 1..={MAX_LEVELS}, got {}", self.levels),
        )?;
        check(
            self.tikhonov_eta.is_finite() && self.tikhonov_eta > 0.0,
            "tikhonov_eta",
            format!("must be > 0, got {}", self.tikhonov_eta),
        )?;
        Ok(())
    }
}
