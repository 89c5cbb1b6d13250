use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::imaging::io::decode_pgm;
use crate::imaging::Image;
use crate::{Error, Result};

const CAMERAMAN_PGM: &[u8] = include_bytes!("../../fixtures/cameraman.pgm");

/// Built-in test images.
///
/// `Cameraman` is a bundled 256x256 photograph; the others are generated at
/// the requested size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixture {
    Cameraman,
    Checkerboard,
    Ramp,
    Stripes,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [
        Fixture::Cameraman,
        Fixture::Checkerboard,
        Fixture::Ramp,
        Fixture::Stripes,
    ];

    /// Procedural fixtures only; these are cheap at any size.
    pub const PROCEDURAL: [Fixture; 3] = [Fixture::Checkerboard, Fixture::Ramp, Fixture::Stripes];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Cameraman => "cameraman",
            Fixture::Checkerboard => "checkerboard",
            Fixture::Ramp => "ramp",
            Fixture::Stripes => "stripes",
        }
    }

    /// `size` is ignored for [`Fixture::Cameraman`].
    pub fn render(self, size: usize) -> Result<Image> {
        if self != Fixture::Cameraman && size < 8 {
            return Err(Error::param("size", format!("fixtures need size >= 8, got {size}")));
        }
        Ok(match self {
            Fixture::Cameraman => cameraman(),
            Fixture::Checkerboard => checkerboard(size),
            Fixture::Ramp => ramp(size),
            Fixture::Stripes => stripes(size),
        })
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown fixture `{s}`")))
    }
}

/// The bundled 256x256 photograph.
pub fn cameraman() -> Image {
    decode_pgm(CAMERAMAN_PGM).expect("bundled fixture is a valid PGM")
}

/// 8x8 board of 50/200 cells.
pub fn checkerboard(size: usize) -> Image {
    let cell = (size / 8).max(1);
    Image::from_fn(
        size,
        size,
        |x, y| if (x / cell + y / cell).is_multiple_of(2) { 50.0 } else { 200.0 },
    )
}

/// Diagonal ramp with a raised disk in the centre.
pub fn ramp(size: usize) -> Image {
    let n = size as f64;
    let c = (n - 1.0) / 2.0;
    let r = n / 4.0;
    Image::from_fn(size, size, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let base = 30.0 + 170.0 * (xf + yf) / (2.0 * (n - 1.0));
        let inside = (xf - c).powi(2) + (yf - c).powi(2) <= r * r;
        if inside {
            base + 55.0
        } else {
            base
        }
    })
}

/// Wavy high-contrast stripes with soft edges, period about 10 px.
pub fn stripes(size: usize) -> Image {
    let n = size as f64;
    Image::from_fn(size, size, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let phase = xf + 6.0 * (2.0 * PI * yf / (0.75 * n)).sin() + 0.3 * yf;
        128.0 + 100.0 * (3.0 * (2.0 * PI * phase / 10.0).sin()).tanh()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_in_range_and_deterministic() {
        for f in Fixture::ALL {
            let a = f.render(64).unwrap();
            let b = f.render(64).unwrap();
            assert_eq!(a, b);
            assert!(a.data().iter().all(|&v| (0.0..=255.0).contains(&v)), "{f}");
        }
        assert_eq!(cameraman().width(), 256);
        assert_eq!(checkerboard(64).width(), 64);
    }

    #[test]
    fn names_round_trip() {
        for f in Fixture::ALL {
            assert_eq!(f.name().parse::<Fixture>().unwrap(), f);
        }
        assert!("lena".parse::<Fixture>().is_err());
    }
}
