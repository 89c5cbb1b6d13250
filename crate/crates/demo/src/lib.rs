//! WebAssembly bindings for the browser demo.
//!
//! Images cross the boundary as row-major 8-bit grayscale buffers. The
//! `*_gray` functions hold the logic and are plain Rust so they can be tested
//! natively; the exported wrappers only convert errors to JS exceptions.

use wasm_bindgen::prelude::*;
use wfrestore::bench::{decay_profile, Fixture};
use wfrestore::degrade::{degrade, BlurType};
use wfrestore::imaging::{psnr, ssim};
use wfrestore::solvers::{solve, SolverKind, SolverParams};
use wfrestore::{BlurOperator, Boundary, Image};

/// Largest accepted side length; keeps a restore call interactive.
pub const MAX_SIDE: usize = 512;

pub type DemoResult<T> = Result<T, String>;

fn to_image(pixels: &[u8], width: usize, height: usize) -> DemoResult<Image> {
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(format!(
            "image must be between 1x1 and {MAX_SIDE}x{MAX_SIDE}, got {width}x{height}"
        ));
    }
    if pixels.len() != width * height {
        return Err(format!("expected {} pixels, got {}", width * height, pixels.len()));
    }
    Image::new(width, height, pixels.iter().map(|&p| f64::from(p)).collect()).map_err(|e| e.to_string())
}

fn parse_blur(blur: &str) -> DemoResult<BlurType> {
    blur.parse().map_err(|e: wfrestore::Error| e.to_string())
}

/// Renders a built-in fixture as 8-bit pixels (`size` is ignored for the
/// photograph, which is always 256x256).
pub fn fixture_gray(name: &str, size: usize) -> DemoResult<Vec<u8>> {
    let fixture: Fixture = name.parse().map_err(|e: wfrestore::Error| e.to_string())?;
    let side = size.min(MAX_SIDE);
    Ok(fixture.render(side).map_err(|e| e.to_string())?.to_u8())
}

/// Blurs with a preset kernel and adds seeded Gaussian noise.
pub fn degrade_gray(
    pixels: &[u8],
    width: usize,
    height: usize,
    blur: &str,
    sigma: f64,
    seed: u64,
) -> DemoResult<Vec<u8>> {
    let clean = to_image(pixels, width, height)?;
    let (_, observed) = degrade(&clean, &parse_blur(blur)?.kernel(), sigma, seed).map_err(|e| e.to_string())?;
    Ok(observed.to_u8())
}

/// Output of a restore call.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Restoration {
    pixels: Vec<u8>,
    stage_psnr: Vec<f64>,
    iterations: usize,
}

#[wasm_bindgen]
impl Restoration {
    pub fn pixels(&self) -> Vec<u8> {
        self.pixels.clone()
    }

    /// PSNR after each stage against the reference image; empty without one.
    #[wasm_bindgen(js_name = stagePsnr)]
    pub fn stage_psnr(&self) -> Vec<f64> {
        self.stage_psnr.clone()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Restores an observation. `reference` may be empty; when present it is
/// used for per-stage PSNR only.
#[allow(clippy::too_many_arguments)]
pub fn restore_gray(
    observed: &[u8],
    reference: &[u8],
    width: usize,
    height: usize,
    blur: &str,
    solver: &str,
    lambda: f64,
    nu: f64,
    sigma: f64,
    stages: usize,
) -> DemoResult<Restoration> {
    let f = to_image(observed, width, height)?;
    let truth = if reference.is_empty() {
        None
    } else {
        Some(to_image(reference, width, height)?)
    };
    let kind: SolverKind = solver.parse().map_err(|e: wfrestore::Error| e.to_string())?;
    let op = BlurOperator::new(&parse_blur(blur)?.kernel(), width, height).map_err(|e| e.to_string())?;
    let params = match kind {
        SolverKind::SplitBregman => SolverParams::split_bregman(lambda),
        SolverKind::Mdal => SolverParams::mdal(lambda),
        SolverKind::NonlocalMdal => SolverParams::nonlocal_mdal(lambda, nu, sigma),
        SolverKind::TruncatedIsd => SolverParams::truncated_isd(lambda, nu, sigma, stages.max(1)),
    };
    let mut report = solve(kind, &f, &op, &params, None).map_err(|e| e.to_string())?;
    let mut stage_psnr = Vec::new();
    if let Some(t) = &truth {
        report.evaluate(t).map_err(|e| e.to_string())?;
        stage_psnr = report.stages.iter().filter_map(|s| s.psnr).collect();
    }
    Ok(Restoration {
        pixels: report.image.to_u8(),
        stage_psnr,
        iterations: report.total_iterations(),
    })
}

/// Sorted high-pass magnitudes, subsampled to at most `points` values for
/// plotting (first and last entries are always kept).
pub fn decay_gray(pixels: &[u8], width: usize, height: usize, points: usize) -> DemoResult<Vec<f64>> {
    let image = to_image(pixels, width, height)?;
    let profile = decay_profile(&image, 1, Boundary::Symmetric).map_err(|e| e.to_string())?;
    let points = points.max(2);
    if profile.len() <= points {
        return Ok(profile);
    }
    let last = profile.len() - 1;
    Ok((0..points).map(|i| profile[i * last / (points - 1)]).collect())
}

/// `[psnr, ssim]` of `candidate` against `reference`.
pub fn metrics_gray(reference: &[u8], candidate: &[u8], width: usize, height: usize) -> DemoResult<Vec<f64>> {
    let a = to_image(reference, width, height)?;
    let b = to_image(candidate, width, height)?;
    let p = psnr(&a, &b).map_err(|e| e.to_string())?;
    let s = ssim(&a, &b).map_err(|e| e.to_string())?;
    Ok(vec![p, s])
}

fn js(r: DemoResult<Vec<u8>>) -> Result<Vec<u8>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixture(name: &str, size: usize) -> Result<Vec<u8>, JsError> {
    js(fixture_gray(name, size))
}

#[wasm_bindgen(js_name = degradeImage)]
pub fn degrade_image(
    pixels: &[u8],
    width: usize,
    height: usize,
    blur: &str,
    sigma: f64,
    seed: u32,
) -> Result<Vec<u8>, JsError> {
    js(degrade_gray(pixels, width, height, blur, sigma, u64::from(seed)))
}

#[wasm_bindgen(js_name = restoreImage)]
#[allow(clippy::too_many_arguments)]
pub fn restore_image(
    observed: &[u8],
    reference: &[u8],
    width: usize,
    height: usize,
    blur: &str,
    solver: &str,
    lambda: f64,
    nu: f64,
    sigma: f64,
    stages: usize,
) -> Result<Restoration, JsError> {
    restore_gray(
        observed, reference, width, height, blur, solver, lambda, nu, sigma, stages,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = decayProfile)]
pub fn decay(pixels: &[u8], width: usize, height: usize, points: usize) -> Result<Vec<f64>, JsError> {
    decay_gray(pixels, width, height, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn metrics(reference: &[u8], candidate: &[u8], width: usize, height: usize) -> Result<Vec<f64>, JsError> {
    metrics_gray(reference, candidate, width, height).map_err(|e| JsError::new(&e))
}
