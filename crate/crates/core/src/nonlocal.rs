//! Patch-similarity neighbor tables and nonlocal coefficient estimates.
//!
//! For every pixel `p` the table keeps the `m` most similar pixels inside a
//! search window (similarity = squared distance between the surrounding
//! patches of a guide image) with weights `exp(-d / h)` normalized to sum 1.
//! The nonlocal estimate of a coefficient pyramid is then, plane by plane,
//! `beta(p) = sum_i w_i * alpha(p_i)`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::degrade::BlurOperator;
use crate::framelet::FrameCoeffs;
use crate::imaging::Image;
use crate::{Error, Result};

/// Settings for [`build_neighbor_table`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlocalConfig {
    pub patch_size: usize,
    pub window_size: usize,
    pub neighbors: usize,
    /// Filtering parameter `h`.
    pub filtering: f64,
}

impl NonlocalConfig {
    /// 5x5 patches, 11x11 window, 15 neighbors, `h` scaled to the noise level.
    pub fn for_noise(sigma: f64) -> Self {
        Self {
            patch_size: 5,
            window_size: 11,
            neighbors: 15,
            filtering: default_filtering(sigma, 5),
        }
    }
}

/// `h = 10 sigma^2 patch_size^2`, floored at `1e-3` so noise-free inputs still
/// produce a usable kernel.
pub fn default_filtering(sigma: f64, patch_size: usize) -> f64 {
    (10.0 * sigma * sigma * (patch_size * patch_size) as f64).max(1e-3)
}

/// Fixed-degree neighbor lists with normalized weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborTable {
    width: usize,
    height: usize,
    neighbors: usize,
    indices: Vec<u32>,
    weights: Vec<f64>,
}

impl NeighborTable {
    /// Table where every pixel's only neighbor is itself.
    pub fn identity(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            neighbors: 1,
            indices: (0..n as u32).collect(),
            weights: vec![1.0; n],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Neighbors per pixel (`m`).
    #[inline]
    pub fn degree(&self) -> usize {
        self.neighbors
    }

    /// Neighbor pixel indices (row-major) of pixel `p`, most similar first.
    pub fn neighbors_of(&self, p: usize) -> &[u32] {
        &self.indices[p * self.neighbors..(p + 1) * self.neighbors]
    }

    pub fn weights_of(&self, p: usize) -> &[f64] {
        &self.weights[p * self.neighbors..(p + 1) * self.neighbors]
    }

    /// Weighted neighbor average of one plane.
    pub fn average_plane(&self, src: &[f64], dst: &mut [f64]) {
        let m = self.neighbors;
        for (p, out) in dst.iter_mut().enumerate() {
            let idx = &self.indices[p * m..(p + 1) * m];
            let w = &self.weights[p * m..(p + 1) * m];
            *out = idx.iter().zip(w).map(|(&q, &wq)| wq * src[q as usize]).sum();
        }
    }
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
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

fn check_odd(name: &'static str, v: usize) -> Result<()> {
    if v == 0 || v.is_multiple_of(2) {
        return Err(Error::param(name, format!("must be odd and >= 1, got {v}")));
    }
    Ok(())
}

/// Ranks the candidates in each pixel's search window by patch distance and
/// keeps the `m` closest.
///
/// The center pixel is always a candidate and is listed first; the remaining
/// window positions inside the image follow in row-major order. A stable sort
/// on distance keeps that order among ties, so the center wins all ties.
/// Patches are read from a half-sample symmetric extension of the guide.
pub fn build_neighbor_table(guide: &Image, config: &NonlocalConfig) -> Result<NeighborTable> {
    let NonlocalConfig {
        patch_size,
        window_size,
        neighbors: m,
        filtering: h,
    } = *config;
    check_odd("patch_size", patch_size)?;
    check_odd("window_size", window_size)?;
    if m == 0 || m > window_size * window_size {
        return Err(Error::param(
            "neighbors",
            format!("must be in 1..={}, got {m}", window_size * window_size),
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::param("filtering", format!("must be positive, got {h}")));
    }
    let (w, ht) = (guide.width(), guide.height());
    let half_win = (window_size / 2) as isize;
    // the clipped window at a corner is the smallest candidate set
    let corner = ((half_win as usize + 1).min(w)) * ((half_win as usize + 1).min(ht));
    if m > corner {
        return Err(Error::param(
            "neighbors",
            format!("{m} neighbors exceed the {corner} window positions available at the image corner"),
        ));
    }

    let r = patch_size / 2;
    let pw = w + 2 * r;
    let ph = ht + 2 * r;
    let g = guide.data();
    let padded: Vec<f64> = (0..ph)
        .flat_map(|y| {
            let sy = reflect(y as isize - r as isize, ht);
            (0..pw).map(move |x| g[sy * w + reflect(x as isize - r as isize, w)])
        })
        .collect();

    let patch_distance = |p: (usize, usize), q: (usize, usize)| -> f64 {
        let mut d = 0.0;
        for dy in 0..patch_size {
            let a = &padded[(p.1 + dy) * pw + p.0..(p.1 + dy) * pw + p.0 + patch_size];
            let b = &padded[(q.1 + dy) * pw + q.0..(q.1 + dy) * pw + q.0 + patch_size];
            for (x, y) in a.iter().zip(b) {
                d += (x - y) * (x - y);
            }
        }
        d
    };

    let row = |y: usize| -> (Vec<u32>, Vec<f64>) {
        let mut idx = Vec::with_capacity(w * m);
        let mut wts = Vec::with_capacity(w * m);
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(window_size * window_size);
        for x in 0..w {
            cand.clear();
            cand.push((0.0, y * w + x));
            let y0 = (y as isize - half_win).max(0) as usize;
            let y1 = (y as isize + half_win).min(ht as isize - 1) as usize;
            let x0 = (x as isize - half_win).max(0) as usize;
            let x1 = (x as isize + half_win).min(w as isize - 1) as usize;
            for qy in y0..=y1 {
                for qx in x0..=x1 {
                    if qx == x && qy == y {
                        continue;
                    }
                    cand.push((patch_distance((x, y), (qx, qy)), qy * w + qx));
                }
            }
            cand.sort_by(|a, b| a.0.total_cmp(&b.0));
            let kept = &cand[..m];
            let raw: Vec<f64> = kept
                .iter()
                .map(|(d, _)| (-d / h).exp().max(f64::MIN_POSITIVE))
                .collect();
            let total: f64 = raw.iter().sum();
            idx.extend(kept.iter().map(|&(_, q)| q as u32));
            wts.extend(raw.iter().map(|v| v / total));
        }
        (idx, wts)
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..ht).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..ht).map(row).collect();

    let mut indices = Vec::with_capacity(w * ht * m);
    let mut weights = Vec::with_capacity(w * ht * m);
    for (i, wt) in rows {
        indices.extend(i);
        weights.extend(wt);
    }
    Ok(NeighborTable {
        width: w,
        height: ht,
        neighbors: m,
        indices,
        weights,
    })
}

/// Nonlocal estimate `beta = sum_i w_i alpha(p_i)`, applied to every plane.
pub fn estimate_beta(table: &NeighborTable, alpha: &FrameCoeffs) -> Result<FrameCoeffs> {
    let mut out = alpha.zeros_like();
    estimate_beta_into(table, alpha, &mut out)?;
    Ok(out)
}

pub(crate) fn estimate_beta_into(table: &NeighborTable, alpha: &FrameCoeffs, out: &mut FrameCoeffs) -> Result<()> {
    if table.width != alpha.width() || table.height != alpha.height() {
        return Err(Error::DimensionMismatch {
            expected_width: table.width,
            expected_height: table.height,
            width: alpha.width(),
            height: alpha.height(),
        });
    }
    alpha.check_shape(out)?;
    let n = alpha.plane_len();
    #[cfg(feature = "parallel")]
    out.data_mut()
        .par_chunks_mut(n)
        .zip(alpha.data().par_chunks(n))
        .for_each(|(dst, src)| table.average_plane(src, dst));
    #[cfg(not(feature = "parallel"))]
    out.data_mut()
        .chunks_mut(n)
        .zip(alpha.data().chunks(n))
        .for_each(|(dst, src)| table.average_plane(src, dst));
    Ok(())
}

/// Tikhonov-regularized deconvolution `(A^T A + eta I)^{-1} A^T f`.
pub fn tikhonov_initial(f: &Image, op: &BlurOperator, eta: f64) -> Result<Image> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    let atf = op.adjoint(f)?;
    op.solve_diagonal(eta, &atf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framelet::{analysis, Boundary};

    fn noise_image(w: usize, h: usize, seed: u64) -> Image {
        let mut s = seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(7);
        Image::from_fn(w, h, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 10_000) as f64 / 40.0
        })
    }

    fn cfg(m: usize, h: f64) -> NonlocalConfig {
        NonlocalConfig {
            patch_size: 5,
            window_size: 11,
            neighbors: m,
            filtering: h,
        }
    }

    #[test]
    fn constant_guide_gives_uniform_weights() {
        let t = build_neighbor_table(&Image::constant(14, 12, 9.0), &cfg(15, 10.0)).unwrap();
        for p in 0..14 * 12 {
            assert!(t.weights_of(p).iter().all(|w| (w - 1.0 / 15.0).abs() < 1e-15));
            assert_eq!(t.neighbors_of(p)[0] as usize, p);
        }
    }

    #[test]
    fn unique_patch_prefers_itself() {
        let mut g = Image::constant(15, 15, 10.0);
        g.set(7, 7, 200.0);
        let t = build_neighbor_table(&g, &cfg(15, 500.0)).unwrap();
        let p = 7 * 15 + 7;
        assert_eq!(t.neighbors_of(p)[0] as usize, p);
        let w = t.weights_of(p);
        assert!(w[1..].iter().all(|&x| x < w[0]));
    }

    #[test]
    fn weights_normalized_and_neighbors_in_window() {
        let g = noise_image(20, 17, 3);
        let t = build_neighbor_table(&g, &cfg(15, 2000.0)).unwrap();
        for p in 0..20 * 17 {
            let s: f64 = t.weights_of(p).iter().sum();
            assert!((s - 1.0).abs() < 1e-10);
            assert!(t.weights_of(p).iter().all(|&w| w > 0.0));
            assert_eq!(t.neighbors_of(p).len(), 15);
            let (px, py) = ((p % 20) as isize, (p / 20) as isize);
            for &q in t.neighbors_of(p) {
                let (qx, qy) = ((q % 20) as isize, (q / 20) as isize);
                assert!((qx - px).abs() <= 5 && (qy - py).abs() <= 5);
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = Image::constant(20, 20, 1.0);
        assert!(build_neighbor_table(&g, &cfg(122, 1.0)).is_err());
        assert!(build_neighbor_table(&g, &cfg(40, 1.0)).is_err());
        assert!(build_neighbor_table(&g, &cfg(15, 0.0)).is_err());
        let even = NonlocalConfig {
            patch_size: 4,
            ..cfg(15, 1.0)
        };
        assert!(build_neighbor_table(&g, &even).is_err());
    }

    #[test]
    fn beta_matches_direct_double_loop() {
        let g = noise_image(12, 12, 11);
        let t = build_neighbor_table(&g, &cfg(15, 3000.0)).unwrap();
        let alpha = analysis(&noise_image(12, 12, 12), 1).unwrap();
        let beta = estimate_beta(&t, &alpha).unwrap();
        for plane in 0..alpha.num_planes() {
            let a = alpha.plane(plane);
            for p in 0..144 {
                let mut want = 0.0;
                for i in 0..t.degree() {
                    want += t.weights_of(p)[i] * a[t.neighbors_of(p)[i] as usize];
                }
                let got = beta.plane(plane)[p];
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn identity_table_and_constant_planes_are_fixed_points() {
        let alpha = analysis(&noise_image(10, 10, 1), 1).unwrap();
        assert_eq!(estimate_beta(&NeighborTable::identity(10, 10), &alpha).unwrap(), alpha);

        let g = noise_image(10, 10, 2);
        let t = build_neighbor_table(&g, &cfg(9, 100.0)).unwrap();
        let mut c = FrameCoeffs::zeros(10, 10, 1, Boundary::Symmetric);
        for plane in 0..c.num_planes() {
            c.plane_mut(plane).iter_mut().for_each(|v| *v = plane as f64 - 3.0);
        }
        let beta = estimate_beta(&t, &c).unwrap();
        for (a, b) in beta.data().iter().zip(c.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tikhonov_cases() {
        let f = noise_image(16, 16, 5);
        let op = BlurOperator::identity(16, 16);
        assert!(tikhonov_initial(&f, &op, 1e-12).unwrap().max_abs_diff(&f) < 1e-8);

        let k = crate::degrade::Kernel::uniform(3).unwrap();
        let op = BlurOperator::new(&k, 16, 16).unwrap();
        let u = tikhonov_initial(&Image::constant(16, 16, 50.0), &op, 0.25).unwrap();
        assert!(u.max_abs_diff(&Image::constant(16, 16, 40.0)) < 1e-10);

        assert!(tikhonov_initial(&f, &op, 0.0).is_err());
    }
}
