use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::Image;
use crate::{Error, Result};

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation `sigma`.
///
/// The generator is a ChaCha20 stream seeded from `seed`, so a given
/// `(image size, sigma, seed)` always yields the same field.
pub fn add_gaussian_noise(clean: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(clean.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let data = clean.data().iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(Image::from_vec_unchecked(clean.width(), clean.height(), data))
}
