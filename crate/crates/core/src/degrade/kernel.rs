use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// A nonnegative, unit-mass 2-D blur kernel.
///
/// Taps are row-major. The anchor (the tap aligned with the output pixel) is
/// at `(width / 2, height / 2)`, which is the center for odd extents.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    taps: Vec<f64>,
}

impl Kernel {
    /// Builds a kernel from raw taps and normalizes them to unit mass.
    pub fn from_taps(width: usize, height: usize, taps: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || taps.len() != width * height {
            return Err(Error::param(
                "kernel",
                format!(
                    "{width}x{height} kernel needs {} taps, got {}",
                    width * height,
                    taps.len()
                ),
            ));
        }
        if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::param("kernel", "taps must be finite and nonnegative"));
        }
        let sum: f64 = taps.iter().sum();
        if sum <= 0.0 {
            return Err(Error::param("kernel", "taps sum to zero"));
        }
        Ok(Self {
            width,
            height,
            taps: taps.into_iter().map(|t| t / sum).collect(),
        })
    }

    pub fn identity() -> Self {
        Self {
            width: 1,
            height: 1,
            taps: vec![1.0],
        }
    }

    /// Isotropic Gaussian on a centered `size x size` grid.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::param("size", format!("must be odd and >= 1, got {size}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        let c = (size / 2) as f64;
        let mut taps = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                let (dx, dy) = (x as f64 - c, y as f64 - c);
                taps.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
            }
        }
        Self::from_taps(size, size, taps)
    }

    /// `size x size` box filter.
    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("size", "must be >= 1"));
        }
        let n = size * size;
        Ok(Self {
            width: size,
            height: size,
            taps: vec![1.0 / n as f64; n],
        })
    }

    /// Linear motion blur of `length` pixels at `angle` degrees
    /// counter-clockwise from the horizontal.
    ///
    /// Follows the usual construction: rasterize half of the segment with
    /// weights `1 - perpendicular distance` (end caps measured to the end
    /// point), mirror it through the center, then normalize.
    pub fn motion(length: f64, angle: f64) -> Result<Self> {
        if !(length >= 1.0) || !length.is_finite() {
            return Err(Error::param("length", format!("must be >= 1, got {length}")));
        }
        if !angle.is_finite() {
            return Err(Error::param("angle", "must be finite"));
        }
        if length == 1.0 {
            // a unit segment is a point at every angle
            return Ok(Self::identity());
        }
        let eps = f64::EPSILON;
        let line_width = 1.0;
        let half = (length - 1.0) / 2.0;
        let phi = angle.rem_euclid(180.0) / 180.0 * PI;
        let (sin_phi, cos_phi) = phi.sin_cos();
        let x_sign = if cos_phi < 0.0 { -1.0 } else { 1.0 };

        let sx = (half * cos_phi + line_width * x_sign - length * eps).trunc();
        let sy = (half * sin_phi + line_width - length * eps).trunc();
        let cols = sx.abs() as usize + 1;
        let rows = sy as usize + 1;

        // quarter grid: x = 0, x_sign, 2 x_sign, ...; y = 0, 1, ...
        let mut quarter = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let x = c as f64 * x_sign;
                let y = r as f64;
                let mut dist = y * cos_phi - x * sin_phi;
                let rad = (x * x + y * y).sqrt();
                if rad >= half && dist.abs() <= line_width {
                    let along = half - ((x + dist * sin_phi) / cos_phi).abs();
                    dist = (dist * dist + along * along).sqrt();
                }
                quarter[r * cols + c] = (line_width + eps - dist.abs()).max(0.0);
            }
        }

        let (h, w) = (2 * rows - 1, 2 * cols - 1);
        let mut taps = vec![0.0; h * w];
        // top-left block is the quarter rotated by 180 degrees
        for r in 0..rows {
            for c in 0..cols {
                taps[(rows - 1 - r) * w + (cols - 1 - c)] = quarter[r * cols + c];
            }
        }
        // bottom-right block is the quarter itself, sharing the center tap
        for r in 0..rows {
            for c in 0..cols {
                taps[(rows - 1 + r) * w + (cols - 1 + c)] = quarter[r * cols + c];
            }
        }
        if cos_phi > 0.0 {
            let flipped: Vec<f64> = (0..h).rev().flat_map(|r| taps[r * w..(r + 1) * w].to_vec()).collect();
            taps = flipped;
        }
        Self::from_taps(w, h, taps)
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
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn tap(&self, x: usize, y: usize) -> f64 {
        self.taps[y * self.width + x]
    }

    /// Anchor as `(x, y)`.
    #[inline]
    pub fn anchor(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Plain-text dump: one line per kernel row, taps separated by spaces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in self.taps.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|t| format!("{t:.17e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Reads a kernel written by [`Kernel::save`] (or any whitespace-separated
    /// tap grid).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse().map_err(|e: Error| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Parses the plain-text dump format; blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut width = None;
        let mut taps = Vec::new();
        let mut height = 0;
        for line in s.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::param("kernel", format!("row {}: {e}", height + 1)))?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::param(
                        "kernel",
                        format!("row {} has {} taps, expected {w}", height + 1, row.len()),
                    ))
                }
                _ => {}
            }
            taps.extend(row);
            height += 1;
        }
        Self::from_taps(width.unwrap_or(0), height, taps)
    }
}

/// The four degradation kernels used in the benchmark protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlurType {
    /// Motion blur, length 10 at 20 degrees.
    I,
    /// Gaussian 25x25, sigma 1.6.
    II,
    /// 9x9 uniform.
    III,
    /// Motion blur, length 15 at 30 degrees.
    IV,
}

impl BlurType {
    pub const ALL: [BlurType; 4] = [BlurType::I, BlurType::II, BlurType::III, BlurType::IV];

    pub fn kernel(self) -> Kernel {
        match self {
            BlurType::I => Kernel::motion(10.0, 20.0),
            BlurType::II => Kernel::gaussian(25, 1.6),
            BlurType::III => Kernel::uniform(9),
            BlurType::IV => Kernel::motion(15.0, 30.0),
        }
        .expect("built-in kernel parameters are valid")
    }

    pub fn label(self) -> &'static str {
        match self {
            BlurType::I => "I",
            BlurType::II => "II",
            BlurType::III => "III",
            BlurType::IV => "IV",
        }
    }
}

impl fmt::Display for BlurType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BlurType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches("TYPE").trim() {
            "I" | "1" => Ok(BlurType::I),
            "II" | "2" => Ok(BlurType::II),
            "III" | "3" => Ok(BlurType::III),
            "IV" | "4" => Ok(BlurType::IV),
            other => Err(Error::Config(format!("unknown blur type `{other}`, expected I-IV"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_unit_mass(k: &Kernel) {
        assert!((k.sum() - 1.0).abs() < 1e-12, "sum {}", k.sum());
        assert!(k.taps().iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn gaussian_degenerate_and_flat_limits() {
        assert_eq!(Kernel::gaussian(1, 2.0).unwrap().taps(), &[1.0]);
        let flat = Kernel::gaussian(3, 1e6).unwrap();
        assert!(flat.taps().iter().all(|t| (t - 1.0 / 9.0).abs() < 1e-12));
        assert!(Kernel::gaussian(5, 0.0).is_err());
        assert!(Kernel::gaussian(4, 1.0).is_err());
    }

    #[test]
    fn gaussian_25_is_peaked_and_rotation_symmetric() {
        let k = Kernel::gaussian(25, 1.6).unwrap();
        assert_unit_mass(&k);
        let max = k.taps().iter().cloned().fold(0.0, f64::max);
        assert_eq!(k.tap(12, 12), max);
        for y in 0..25 {
            for x in 0..25 {
                // 90 degree rotation maps (x, y) to (24 - y, x)
                assert!((k.tap(x, y) - k.tap(24 - y, x)).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn uniform_taps() {
        let k = Kernel::uniform(9).unwrap();
        assert!(k.taps().iter().all(|&t| t == 1.0 / 81.0));
        assert_eq!(Kernel::uniform(1).unwrap(), Kernel::identity());
        assert!(Kernel::uniform(0).is_err());
    }

    #[test]
    fn motion_degenerate_and_horizontal() {
        for angle in [0.0, 33.0, 90.0, 135.0] {
            let k = Kernel::motion(1.0, angle).unwrap();
            assert_eq!((k.width(), k.height()), (1, 1));
            assert!((k.taps()[0] - 1.0).abs() < 1e-15);
        }
        let k = Kernel::motion(5.0, 0.0).unwrap();
        assert_eq!((k.width(), k.height()), (5, 1));
        assert!(k.taps().iter().all(|t| (t - 0.2).abs() < 1e-12));
        assert!(Kernel::motion(0.5, 0.0).is_err());
    }

    #[test]
    fn motion_kernels_have_unit_mass_and_bounded_support() {
        for (len, angle) in [(10.0, 20.0), (15.0, 30.0), (7.0, 120.0), (9.0, 90.0)] {
            let k = Kernel::motion(len, angle).unwrap();
            assert_unit_mass(&k);
            let (ax, ay) = k.anchor();
            let half = (len - 1.0) / 2.0;
            let rad = angle.to_radians();
            let bx = half * rad.cos().abs() + 1.0;
            let by = half * rad.sin().abs() + 1.0;
            for y in 0..k.height() {
                for x in 0..k.width() {
                    if k.tap(x, y) > 1e-12 {
                        assert!((x as f64 - ax as f64).abs() <= bx);
                        assert!((y as f64 - ay as f64).abs() <= by);
                    }
                }
            }
            // point symmetry through the anchor
            let n = k.taps().len();
            for i in 0..n {
                assert!((k.taps()[i] - k.taps()[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn motion_20_degrees_rises_to_the_right() {
        // counter-clockwise angle: the upper-right quadrant carries mass,
        // the upper-left one does not
        let k = Kernel::motion(10.0, 20.0).unwrap();
        let (w, h) = (k.width(), k.height());
        assert_eq!((w, h), (11, 5));
        assert!(k.tap(w - 1, 0) + k.tap(w - 2, 0) > 0.0);
        assert_eq!(k.tap(0, 0), 0.0);
    }

    #[test]
    fn text_dump_round_trip() {
        let k = BlurType::I.kernel();
        let back: Kernel = k.to_text().parse().unwrap();
        assert_eq!(back.width(), k.width());
        for (a, b) in back.taps().iter().zip(k.taps()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!("1 2\n3".parse::<Kernel>().is_err());
        assert!("1 -2".parse::<Kernel>().is_err());
    }

    #[test]
    fn blur_type_parsing() {
        assert_eq!("III".parse::<BlurType>().unwrap(), BlurType::III);
        assert_eq!("type iv".parse::<BlurType>().unwrap(), BlurType::IV);
        assert_eq!("2".parse::<BlurType>().unwrap(), BlurType::II);
        assert!("V".parse::<BlurType>().is_err());
    }
}
