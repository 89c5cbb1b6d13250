//! Blur kernels and the periodic convolution operator `A`.

mod kernel;
mod operator;

pub use kernel::{BlurType, Kernel};
pub use operator::BlurOperator;

use crate::imaging::{add_gaussian_noise, Image};
use crate::Result;

/// Blurs `clean` with periodic boundary and adds seeded Gaussian noise.
pub fn degrade(clean: &Image, kernel: &Kernel, sigma: f64, seed: u64) -> Result<(BlurOperator, Image)> {
    let op = BlurOperator::new(kernel, clean.width(), clean.height())?;
    let blurred = op.apply(clean)?;
    let observed = add_gaussian_noise(&blurred, sigma, seed)?;
    Ok((op, observed))
}
