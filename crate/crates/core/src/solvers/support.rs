use crate::framelet::FrameCoeffs;
use crate::{Error, Result};

/// Detected support `I` over a coefficient pyramid: `true` entries are exempt
/// from the l0 penalty, `false` entries form the truncated set `T`.
/// Low-pass entries are always `false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportMask {
    plane_len: usize,
    planes: usize,
    data: Vec<bool>,
}

impl SupportMask {
    /// No detected support: everything is penalized.
    pub fn empty(shape: &FrameCoeffs) -> Self {
        Self {
            plane_len: shape.plane_len(),
            planes: shape.num_planes(),
            data: vec![false; shape.data().len()],
        }
    }

    /// Every high-pass entry detected.
    pub fn full(shape: &FrameCoeffs) -> Self {
        let mut m = Self::empty(shape);
        m.data[m.plane_len..].iter_mut().for_each(|v| *v = true);
        m
    }

    /// Mask from an explicit predicate on storage indices; low-pass entries
    /// are forced to `false`.
    pub fn from_fn(shape: &FrameCoeffs, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut m = Self::empty(shape);
        for i in m.plane_len..m.data.len() {
            m.data[i] = f(i);
        }
        m
    }

    pub fn fits(&self, shape: &FrameCoeffs) -> bool {
        self.plane_len == shape.plane_len() && self.planes == shape.num_planes()
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.data[i]
    }

    /// Number of detected entries.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Threshold used at `stage`: `max |alpha_i| / rho^(stage + 1)` over the
/// high-pass bands.
pub fn support_threshold(alpha: &FrameCoeffs, rho: f64, stage: usize) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", format!("must be positive, got {rho}")));
    }
    if stage < 1 {
        return Err(Error::param("stage", "stages are numbered from 1"));
    }
    Ok(alpha.max_abs(true) / rho.powi(stage as i32 + 1))
}

/// Thresholds the current coefficients: `I = { i : |alpha_i| > eps }` with
/// `eps` from [`support_threshold`]. Each call starts from scratch, so
/// successive supports need not be nested.
pub fn detect_support(alpha: &FrameCoeffs, rho: f64, stage: usize) -> Result<SupportMask> {
    let eps = support_threshold(alpha, rho, stage)?;
    let d = alpha.data();
    Ok(SupportMask::from_fn(alpha, |i| d[i].abs() > eps))
}
