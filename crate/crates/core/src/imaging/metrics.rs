use super::Image;
use crate::{Error, Result};

/// Side length of the SSIM Gaussian window.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const DYNAMIC_RANGE: f64 = 255.0;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Peak signal-to-noise ratio in dB for 8-bit dynamic range.
///
/// Uses `20 log10(255 / RMSE)` with `RMSE = ||u - v||_2 / sqrt(N)`. Identical
/// images give `f64::INFINITY`.
pub fn psnr(reference: &Image, candidate: &Image) -> Result<f64> {
    reference.check_same(candidate)?;
    let sq: f64 = reference
        .data()
        .iter()
        .zip(candidate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    let rmse = (sq / reference.len() as f64).sqrt();
    Ok(20.0 * (DYNAMIC_RANGE / rmse).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, t) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|t| *t /= s);
    w
}

/// Separable "valid" filtering with the 1-D window applied on both axes.
fn filter_valid(data: &[f64], width: usize, height: usize, w: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = w.len();
    let ow = width - n + 1;
    let oh = height - n + 1;
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let src = &data[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = w.iter().zip(&src[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, t) in w.iter().enumerate() {
                acc += t * rows[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    (out, ow, oh)
}

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// `K1 = 0.01`, `K2 = 0.03` and dynamic range 255.
///
/// Local statistics are taken over the window positions that fit entirely
/// inside the image.
pub fn ssim(reference: &Image, candidate: &Image) -> Result<f64> {
    reference.check_same(candidate)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            reason: format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}"),
        });
    }
    let win = gaussian_window();
    let a = reference.data();
    let b = candidate.data();
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();

    let (mu_a, ..) = filter_valid(a, w, h, &win);
    let (mu_b, ..) = filter_valid(b, w, h, &win);
    let (e_aa, ..) = filter_valid(&aa, w, h, &win);
    let (e_bb, ..) = filter_valid(&bb, w, h, &win);
    let (e_ab, ..) = filter_valid(&ab, w, h, &win);

    let c1 = (K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (K2 * DYNAMIC_RANGE).powi(2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(n: usize) -> Image {
        Image::from_fn(n, n, |x, y| if (x + y) % 2 == 0 { 255.0 } else { 0.0 })
    }

    /// Direct per-window evaluation of the SSIM formula (no separability).
    fn ssim_direct(a: &Image, b: &Image) -> f64 {
        let n = SSIM_WINDOW;
        let c = (n / 2) as f64;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (di, dj) = (i as f64 - c, j as f64 - c);
                g[i * n + j] = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            }
        }
        let s: f64 = g.iter().sum();
        g.iter_mut().for_each(|t| *t /= s);
        let c1 = (0.01f64 * 255.0).powi(2);
        let c2 = (0.03f64 * 255.0).powi(2);
        let mut total = 0.0;
        let mut count = 0;
        for y0 in 0..=a.height() - n {
            for x0 in 0..=a.width() - n {
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        ma += g[i * n + j] * a.get(x0 + j, y0 + i);
                        mb += g[i * n + j] * b.get(x0 + j, y0 + i);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let da = a.get(x0 + j, y0 + i) - ma;
                        let db = b.get(x0 + j, y0 + i) - mb;
                        va += g[i * n + j] * da * da;
                        vb += g[i * n + j] * db * db;
                        cov += g[i * n + j] * da * db;
                    }
                }
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn psnr_of_identical_images_is_infinite() {
        let u = checkerboard(16);
        assert_eq!(psnr(&u, &u).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_constant_offset_is_forty_db() {
        let a = Image::zeros(16, 16);
        let b = Image::constant(16, 16, 2.55);
        assert!((psnr(&a, &b).unwrap() - 40.0).abs() < 1e-12);
        assert!((psnr(&b, &a).unwrap() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_rejects_mismatched_dims() {
        assert!(psnr(&Image::zeros(4, 4), &Image::zeros(4, 5)).is_err());
    }

    #[test]
    fn ssim_identity_and_inverted_checkerboard() {
        let u = checkerboard(16);
        assert!((ssim(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let inv = u.map(|v| 255.0 - v);
        let got = ssim(&u, &inv).unwrap();
        let want = ssim_direct(&u, &inv);
        assert!(got < 0.0, "inverted checkerboard SSIM {got}");
        assert!((got - want).abs() < 1e-9, "{got} vs direct {want}");
    }

    #[test]
    fn ssim_matches_direct_windows_on_smooth_pair() {
        let a = Image::from_fn(20, 17, |x, y| (x * 7 + y * 3) as f64 % 50.0 + 100.0);
        let b = Image::from_fn(20, 17, |x, y| ((x * y) as f64).sin() * 20.0 + 120.0);
        assert!((ssim(&a, &b).unwrap() - ssim_direct(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let u = Image::zeros(10, 12);
        assert!(matches!(ssim(&u, &u), Err(Error::TooSmall { .. })));
    }
}
