use rustfft::num_complex::Complex64;

use super::Kernel;
use crate::fft::Fft2;
use crate::imaging::Image;
use crate::{Error, Result};

/// Periodic convolution `A` diagonalized by the 2-D DFT.
///
/// `eigenvalues` is the transform of the kernel embedded in a zero image with
/// its anchor wrapped to the origin, so `A x = IDFT(eig * DFT(x))` and
/// `A^T x = IDFT(conj(eig) * DFT(x))`.
#[derive(Clone, Debug)]
pub struct BlurOperator {
    width: usize,
    height: usize,
    eigenvalues: Vec<Complex64>,
    fft: Fft2,
}

impl BlurOperator {
    pub fn new(kernel: &Kernel, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("operator dimensions must be positive".into()));
        }
        if kernel.width() > width || kernel.height() > height {
            return Err(Error::TooSmall {
                width,
                height,
                reason: format!(
                    "kernel is {}x{} and must fit in the image",
                    kernel.width(),
                    kernel.height()
                ),
            });
        }
        let (ax, ay) = kernel.anchor();
        let mut psf = vec![0.0; width * height];
        for ky in 0..kernel.height() {
            for kx in 0..kernel.width() {
                let y = (ky + height - ay) % height;
                let x = (kx + width - ax) % width;
                psf[y * width + x] += kernel.tap(kx, ky);
            }
        }
        let fft = Fft2::new(width, height);
        let eigenvalues = fft.forward_real(&psf);
        Ok(Self {
            width,
            height,
            eigenvalues,
            fft,
        })
    }

    pub fn identity(width: usize, height: usize) -> Self {
        Self::new(&Kernel::identity(), width, height).expect("identity kernel fits any image")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Multiplies the spectrum of `x` pointwise by `f(eigenvalue)`.
    fn filter(&self, x: &Image, f: impl Fn(Complex64) -> Complex64) -> Result<Image> {
        x.check_dims(self.width, self.height)?;
        let mut spec = self.fft.forward_real(x.data());
        for (s, &e) in spec.iter_mut().zip(&self.eigenvalues) {
            *s *= f(e);
        }
        Ok(Image::from_vec_unchecked(
            self.width,
            self.height,
            self.fft.inverse_real(spec),
        ))
    }

    /// Circular convolution `A x`.
    pub fn apply(&self, x: &Image) -> Result<Image> {
        self.filter(x, |e| e)
    }

    /// Circular correlation `A^T x`.
    pub fn adjoint(&self, x: &Image) -> Result<Image> {
        self.filter(x, |e| e.conj())
    }

    /// Solves `(A^T A + shift I) x = rhs` exactly in the frequency domain.
    pub fn solve_diagonal(&self, shift: f64, rhs: &Image) -> Result<Image> {
        if !(shift > 0.0) || !shift.is_finite() {
            return Err(Error::param("shift", format!("must be positive, got {shift}")));
        }
        self.filter(rhs, |e| Complex64::new(1.0 / (e.norm_sqr() + shift), 0.0))
    }
}
