//! Entrywise proximal maps for the l1 and weighted l0 coefficient updates.

use super::SupportMask;
use crate::framelet::{FrameCoeffs, FrameWeights};
use crate::{Error, Result};

/// Quadratic weights of the l0 coefficient subproblem
/// `lambda 1[z != 0] + nu/2 (z - x)^2 + mu/2 (z - y)^2 + gamma/2 (z - z0)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalties {
    pub nu: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl Penalties {
    fn total(&self) -> Result<f64> {
        let s = self.nu + self.mu + self.gamma;
        if !(s > 0.0) || !s.is_finite() || self.nu < 0.0 || self.mu < 0.0 || self.gamma < 0.0 {
            return Err(Error::param(
                "penalties",
                format!("need nonnegative weights with positive sum, got {self:?}"),
            ));
        }
        Ok(s)
    }
}

/// `sign(x) max(|x| - t, 0)`.
#[inline]
pub fn soft_scalar(x: f64, t: f64) -> f64 {
    let m = x.abs() - t;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Minimizer of the scalar l0 subproblem. The weighted average `v` is kept
/// unless zero is strictly cheaper, i.e. `(s/2) v^2 < lambda` with
/// `s = nu + mu + gamma`. `exempt` entries always keep `v`.
#[inline]
pub(crate) fn hard_scalar(v: f64, lambda: f64, total: f64, exempt: bool) -> f64 {
    if !exempt && 0.5 * total * v * v < lambda {
        0.0
    } else {
        v
    }
}

/// Soft thresholding with per-coefficient thresholds. The low-pass band is
/// passed through unchanged.
pub fn soft_threshold(c: &FrameCoeffs, t: &FrameWeights) -> Result<FrameCoeffs> {
    c.check_shape(t.as_coeffs())?;
    let mut out = c.clone();
    let n = c.plane_len();
    for (o, &ti) in out.data_mut()[n..].iter_mut().zip(&t.data()[n..]) {
        *o = soft_scalar(*o, ti);
    }
    Ok(out)
}

/// Generalized hard thresholding `H(x, y, z)`: entrywise
/// `v = (nu x + mu y + gamma z) / (nu + mu + gamma)`, zeroed when
/// `|v| < sqrt(2 lambda / (nu + mu + gamma))`.
pub fn hard_threshold_generalized(
    x: &FrameCoeffs,
    y: &FrameCoeffs,
    z: &FrameCoeffs,
    weights: &FrameWeights,
    pen: Penalties,
) -> Result<FrameCoeffs> {
    let mut out = y.zeros_like();
    hard_threshold_into(Some(x), y, z, weights, pen, None, &mut out)?;
    Ok(out)
}

/// Selective hard thresholding: as [`hard_threshold_generalized`] except that
/// entries in the detected support (mask `true`) are never zeroed.
pub fn hard_threshold_selective(
    x: &FrameCoeffs,
    y: &FrameCoeffs,
    z: &FrameCoeffs,
    mask: &SupportMask,
    weights: &FrameWeights,
    pen: Penalties,
) -> Result<FrameCoeffs> {
    let mut out = y.zeros_like();
    hard_threshold_into(Some(x), y, z, weights, pen, Some(mask), &mut out)?;
    Ok(out)
}

/// Shared kernel. A `None` or zero-weight `x` drops the nonlocal term.
pub(crate) fn hard_threshold_into(
    x: Option<&FrameCoeffs>,
    y: &FrameCoeffs,
    z: &FrameCoeffs,
    weights: &FrameWeights,
    pen: Penalties,
    mask: Option<&SupportMask>,
    out: &mut FrameCoeffs,
) -> Result<()> {
    let total = pen.total()?;
    for other in [Some(z), Some(weights.as_coeffs()), Some(&*out), x]
        .into_iter()
        .flatten()
    {
        y.check_shape(other)?;
    }
    if let Some(m) = mask {
        if !m.fits(y) {
            return Err(Error::MalformedPyramid(
                "support mask does not match the pyramid".into(),
            ));
        }
    }
    let lam = weights.data();
    let yd = y.data();
    let zd = z.data();
    let xd = x.filter(|_| pen.nu != 0.0).map(|c| c.data());
    let md = mask.map(|m| m.data());
    let inv = 1.0 / total;
    for (i, o) in out.data_mut().iter_mut().enumerate() {
        let mut acc = pen.mu * yd[i] + pen.gamma * zd[i];
        if let Some(xd) = xd {
            acc += pen.nu * xd[i];
        }
        let v = acc * inv;
        let exempt = md.is_some_and(|m| m[i]);
        *o = hard_scalar(v, lam[i], total, exempt);
    }
    Ok(())
}
