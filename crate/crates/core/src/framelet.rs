//! Undecimated linear B-spline tight frame.
//!
//! The 1-D masks are
//!
//! ```text
//! h0 = [1, 2, 1] / 4,   h1 = sqrt(2)/4 [1, 0, -1],   h2 = [-1, 2, -1] / 4
//! ```
//!
//! and the 2-D bands are their tensor products. Level `l` (1-based) filters
//! the previous level's low-pass with the masks dilated by `2^(l-1)`
//! (a trous, no down-sampling). The masks satisfy the unitary extension
//! principle, so with either boundary rule the synthesis operator is an exact
//! left inverse: `W^T W = I`.
//!
//! A pyramid of `L` levels stores `8 L + 1` planes, each the size of the
//! image: plane 0 is the coarsest low-pass residue, followed by the eight
//! high-pass bands of level 1, then of level 2, and so on.

use std::ops::{Index, IndexMut};

use crate::imaging::Image;
use crate::{Error, Result};

const SQRT2_4: f64 = std::f64::consts::SQRT_2 / 4.0;

/// 1-D masks indexed by offset `-1, 0, 1`.
pub const MASKS: [[f64; 3]; 3] = [[0.25, 0.5, 0.25], [SQRT2_4, 0.0, -SQRT2_4], [-0.25, 0.5, -0.25]];

/// Number of tensor bands per level (3x3 mask pairs).
pub const BANDS_PER_LEVEL: usize = 9;

/// Largest supported decomposition depth.
pub const MAX_LEVELS: usize = 4;

/// Boundary extension used by the frame filters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Half-sample reflection (`x[-1] = x[0]`), giving Toeplitz-plus-Hankel
    /// filter matrices.
    #[default]
    Symmetric,
    /// Circular wrap.
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" | "neumann" | "reflect" => Ok(Boundary::Symmetric),
            "periodic" | "circular" | "wrap" => Ok(Boundary::Periodic),
            other => Err(Error::Config(format!(
                "unknown boundary `{other}`, expected symmetric or periodic"
            ))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Symmetric => "symmetric",
            Boundary::Periodic => "periodic",
        })
    }
}

#[inline]
fn wrap_index(i: isize, n: usize, boundary: Boundary) -> usize {
    let n = n as isize;
    match boundary {
        Boundary::Periodic => i.rem_euclid(n) as usize,
        Boundary::Symmetric => {
            let mut i = i;
            // reflection with period 2n
            loop {
                if i < 0 {
                    i = -i - 1;
                } else if i >= n {
                    i = 2 * n - 1 - i;
                } else {
                    return i as usize;
                }
            }
        }
    }
}

/// Coefficient pyramid `W u` (also used for multipliers and nonlocal estimates).
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCoeffs {
    width: usize,
    height: usize,
    levels: usize,
    boundary: Boundary,
    data: Vec<f64>,
}

impl FrameCoeffs {
    pub fn zeros(width: usize, height: usize, levels: usize, boundary: Boundary) -> Self {
        let planes = 8 * levels + 1;
        Self {
            width,
            height,
            levels,
            boundary,
            data: vec![0.0; planes * width * height],
        }
    }

    /// Same shape as `self`, filled with zeros.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.width, self.height, self.levels, self.boundary)
    }

    /// Builds a pyramid from planes in storage order (low-pass first).
    pub fn from_planes(
        width: usize,
        height: usize,
        levels: usize,
        boundary: Boundary,
        planes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(Error::MalformedPyramid(format!("level count {levels}")));
        }
        if planes.len() != 8 * levels + 1 {
            return Err(Error::MalformedPyramid(format!(
                "{levels} levels need {} planes, got {}",
                8 * levels + 1,
                planes.len()
            )));
        }
        if let Some(p) = planes.iter().position(|p| p.len() != width * height) {
            return Err(Error::MalformedPyramid(format!(
                "plane {p} has {} samples, expected {}",
                planes[p].len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            boundary,
            data: planes.concat(),
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn num_planes(&self) -> usize {
        8 * self.levels + 1
    }

    /// Storage index of band `band` (`3 * vertical + horizontal`, 0..9) at
    /// 0-based `level`. Band 0 exists only at the coarsest level.
    pub fn plane_index(&self, level: usize, band: usize) -> Option<usize> {
        if level >= self.levels || band >= BANDS_PER_LEVEL {
            return None;
        }
        if band == 0 {
            return (level + 1 == self.levels).then_some(0);
        }
        Some(1 + level * 8 + band - 1)
    }

    pub fn plane(&self, index: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn plane_mut(&mut self, index: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.data[index * n..(index + 1) * n]
    }

    pub fn band(&self, level: usize, band: usize) -> Option<&[f64]> {
        self.plane_index(level, band).map(|i| self.plane(i))
    }

    pub fn lowpass(&self) -> &[f64] {
        self.plane(0)
    }

    /// All high-pass samples (every plane except the low-pass residue).
    pub fn highpass(&self) -> &[f64] {
        &self.data[self.plane_len()..]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &FrameCoeffs) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.levels == other.levels
            && self.boundary == other.boundary
    }

    pub(crate) fn check_shape(&self, other: &FrameCoeffs) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::MalformedPyramid(format!(
                "shape {}x{}x{} ({}) does not match {}x{}x{} ({})",
                other.width,
                other.height,
                other.levels,
                other.boundary,
                self.width,
                self.height,
                self.levels,
                self.boundary
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &FrameCoeffs) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &FrameCoeffs) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Largest magnitude, optionally skipping the low-pass residue.
    pub fn max_abs(&self, exclude_lowpass: bool) -> f64 {
        let slice = if exclude_lowpass {
            self.highpass()
        } else {
            &self.data[..]
        };
        slice.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for FrameCoeffs {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for FrameCoeffs {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// `max |c_i|` over the pyramid, optionally excluding the low-pass band.
pub fn pyramid_max_abs(c: &FrameCoeffs, exclude_lowpass: bool) -> f64 {
    c.max_abs(exclude_lowpass)
}

/// Per-coefficient nonnegative regularization weights. The low-pass band is
/// always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameWeights(FrameCoeffs);

impl FrameWeights {
    /// One weight for every high-pass coefficient.
    pub fn uniform(shape: &FrameCoeffs, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        let mut w = shape.zeros_like();
        let n = w.plane_len();
        w.data[n..].iter_mut().for_each(|v| *v = lambda);
        Ok(Self(w))
    }

    pub fn from_coeffs(mut weights: FrameCoeffs) -> Result<Self> {
        if weights.data.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("weights", "must be finite and nonnegative"));
        }
        weights.plane_mut(0).iter_mut().for_each(|v| *v = 0.0);
        Ok(Self(weights))
    }

    pub fn as_coeffs(&self) -> &FrameCoeffs {
        &self.0
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        self.0.data()
    }
}

/// Analysis/synthesis pair for a fixed depth and boundary rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Framelet {
    levels: usize,
    boundary: Boundary,
}

impl Default for Framelet {
    fn default() -> Self {
        Self {
            levels: 1,
            boundary: Boundary::Symmetric,
        }
    }
}

impl Framelet {
    pub fn new(levels: usize, boundary: Boundary) -> Result<Self> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(Error::param(
                "levels",
                format!("must be in 1..={MAX_LEVELS}, got {levels}"),
            ));
        }
        Ok(Self { levels, boundary })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Smallest admissible side length for this depth.
    pub fn min_extent(&self) -> usize {
        (1 << self.levels) + 1
    }

    pub fn check_image(&self, width: usize, height: usize) -> Result<()> {
        let min = self.min_extent();
        if width < min || height < min {
            return Err(Error::TooSmall {
                width,
                height,
                reason: format!("{} framelet levels need at least {min}x{min}", self.levels),
            });
        }
        Ok(())
    }

    /// `W u`.
    pub fn analysis(&self, u: &Image) -> Result<FrameCoeffs> {
        let (w, h) = (u.width(), u.height());
        self.check_image(w, h)?;
        let n = w * h;
        let mut out = FrameCoeffs::zeros(w, h, self.levels, self.boundary);
        let mut low = u.data().to_vec();
        let mut vertical = vec![vec![0.0; n]; 3];
        let mut band = vec![0.0; n];
        for level in 0..self.levels {
            let step = 1isize << level;
            for (a, v) in vertical.iter_mut().enumerate() {
                filter_columns(&low, v, w, h, &MASKS[a], step, self.boundary);
            }
            for a in 0..3 {
                for b in 0..3 {
                    let j = 3 * a + b;
                    filter_rows(&vertical[a], &mut band, w, h, &MASKS[b], step, self.boundary);
                    if j == 0 {
                        if level + 1 == self.levels {
                            out.plane_mut(0).copy_from_slice(&band);
                        } else {
                            low.copy_from_slice(&band);
                        }
                    } else {
                        let idx = out.plane_index(level, j).expect("high-pass band exists");
                        out.plane_mut(idx).copy_from_slice(&band);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `W^T c`, the exact transpose of [`Framelet::analysis`].
    pub fn synthesis(&self, c: &FrameCoeffs) -> Result<Image> {
        if c.levels() != self.levels || c.boundary() != self.boundary {
            return Err(Error::MalformedPyramid(format!(
                "pyramid has {} levels ({}), transform expects {} ({})",
                c.levels(),
                c.boundary(),
                self.levels,
                self.boundary
            )));
        }
        let (w, h) = (c.width(), c.height());
        self.check_image(w, h)?;
        let n = w * h;
        let mut rec = c.lowpass().to_vec();
        let mut row_sum = vec![0.0; n];
        let mut next = vec![0.0; n];
        for level in (0..self.levels).rev() {
            let step = 1isize << level;
            next.iter_mut().for_each(|v| *v = 0.0);
            for a in 0..3 {
                row_sum.iter_mut().for_each(|v| *v = 0.0);
                for b in 0..3 {
                    let j = 3 * a + b;
                    let src: &[f64] = if j == 0 {
                        &rec
                    } else {
                        c.plane(c.plane_index(level, j).expect("high-pass band exists"))
                    };
                    filter_rows_transpose(src, &mut row_sum, w, h, &MASKS[b], step, self.boundary);
                }
                filter_columns_transpose(&row_sum, &mut next, w, h, &MASKS[a], step, self.boundary);
            }
            std::mem::swap(&mut rec, &mut next);
        }
        Ok(Image::from_vec_unchecked(w, h, rec))
    }
}

/// `W u` with the default symmetric boundary.
pub fn analysis(u: &Image, levels: usize) -> Result<FrameCoeffs> {
    Framelet::new(levels, Boundary::Symmetric)?.analysis(u)
}

/// `W^T c` using the pyramid's own depth and boundary.
pub fn synthesis(c: &FrameCoeffs) -> Result<Image> {
    Framelet::new(c.levels(), c.boundary())?.synthesis(c)
}

// out[y][x] = sum_k mask[k] * src[y][x + k * step]
fn filter_rows(src: &[f64], out: &mut [f64], w: usize, h: usize, mask: &[f64; 3], step: isize, bd: Boundary) {
    let idx: Vec<[usize; 3]> = (0..w as isize)
        .map(|x| [-1isize, 0, 1].map(|k| wrap_index(x + k * step, w, bd)))
        .collect();
    for y in 0..h {
        let s = &src[y * w..(y + 1) * w];
        let o = &mut out[y * w..(y + 1) * w];
        for (x, ix) in idx.iter().enumerate() {
            o[x] = mask[0] * s[ix[0]] + mask[1] * s[ix[1]] + mask[2] * s[ix[2]];
        }
    }
}

// out[y][x + k * step] += mask[k] * src[y][x]
fn filter_rows_transpose(src: &[f64], out: &mut [f64], w: usize, h: usize, mask: &[f64; 3], step: isize, bd: Boundary) {
    let idx: Vec<[usize; 3]> = (0..w as isize)
        .map(|x| [-1isize, 0, 1].map(|k| wrap_index(x + k * step, w, bd)))
        .collect();
    for y in 0..h {
        let s = &src[y * w..(y + 1) * w];
        let o = &mut out[y * w..(y + 1) * w];
        for (x, ix) in idx.iter().enumerate() {
            let v = s[x];
            o[ix[0]] += mask[0] * v;
            o[ix[1]] += mask[1] * v;
            o[ix[2]] += mask[2] * v;
        }
    }
}

fn filter_columns(src: &[f64], out: &mut [f64], w: usize, h: usize, mask: &[f64; 3], step: isize, bd: Boundary) {
    for y in 0..h {
        let rows = [-1isize, 0, 1].map(|k| wrap_index(y as isize + k * step, h, bd));
        let o = &mut out[y * w..(y + 1) * w];
        let (r0, r1, r2) = (
            &src[rows[0] * w..(rows[0] + 1) * w],
            &src[rows[1] * w..(rows[1] + 1) * w],
            &src[rows[2] * w..(rows[2] + 1) * w],
        );
        for x in 0..w {
            o[x] = mask[0] * r0[x] + mask[1] * r1[x] + mask[2] * r2[x];
        }
    }
}

fn filter_columns_transpose(
    src: &[f64],
    out: &mut [f64],
    w: usize,
    h: usize,
    mask: &[f64; 3],
    step: isize,
    bd: Boundary,
) {
    for y in 0..h {
        let rows = [-1isize, 0, 1].map(|k| wrap_index(y as isize + k * step, h, bd));
        let s = &src[y * w..(y + 1) * w];
        for (k, &r) in rows.iter().enumerate() {
            let o = &mut out[r * w..(r + 1) * w];
            for x in 0..w {
                o[x] += mask[k] * s[x];
            }
        }
    }
}
