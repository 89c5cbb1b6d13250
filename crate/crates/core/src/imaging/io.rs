use std::fs;
use std::path::Path;

use super::Image;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Pgm,
    Png,
}

fn format_of(path: &Path) -> Result<Format> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("pgm") => Ok(Format::Pgm),
        Some("png") => Ok(Format::Png),
        _ => Err(Error::UnsupportedFormat(path.to_path_buf())),
    }
}

/// Reads an 8-bit grayscale PGM (P5) or PNG into intensities `0..=255`.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let format = format_of(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Pgm => decode_pgm(&bytes).map_err(|reason| Error::Decode {
            path: path.to_path_buf(),
            reason,
        }),
        Format::Png => decode_png(path, &bytes),
    }
}

/// Writes an image as 8-bit grayscale. Values are clamped to `0..=255` and
/// rounded half-up.
pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format_of(path)? {
        Format::Pgm => encode_pgm(image),
        Format::Png => encode_png(path, image)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_u8());
    out
}

pub(crate) fn decode_pgm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut pos = 0;
    let mut fields = [0usize; 3];
    let magic = next_token(bytes, &mut pos).ok_or("missing magic number")?;
    if magic != b"P5" {
        return Err(format!(
            "expected binary PGM (P5), found {:?}",
            String::from_utf8_lossy(magic)
        ));
    }
    for (slot, name) in fields.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| format!("missing {name}"))?;
        *slot = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {name}"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("zero dimension".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("only 8-bit PGM is supported, maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| format!("truncated raster: need {n} bytes"))?;
    let scale = 255.0 / maxval as f64;
    let data = raster.iter().map(|&b| b as f64 * scale).collect();
    Image::new(width, height, data).map_err(|e| e.to_string())
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

#[cfg(feature = "png")]
fn decode_png(path: &Path, bytes: &[u8]) -> Result<Image> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    let data = luma.into_raw().into_iter().map(f64::from).collect();
    Image::new(w as usize, h as usize, data)
}

#[cfg(not(feature = "png"))]
fn decode_png(path: &Path, _bytes: &[u8]) -> Result<Image> {
    Err(Error::UnsupportedFormat(path.to_path_buf()))
}

#[cfg(feature = "png")]
fn encode_png(path: &Path, image: &Image) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, image.to_u8())
        .expect("buffer length matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    Ok(out.into_inner())
}

#[cfg(not(feature = "png"))]
fn encode_png(path: &Path, _image: &Image) -> Result<Vec<u8>> {
    Err(Error::UnsupportedFormat(path.to_path_buf()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_of_integer_image() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.pgm");
        let u = Image::from_fn(13, 7, |x, y| ((x * 19 + y * 31) % 256) as f64);
        save_image(&u, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), u);
    }

    #[test]
    fn save_clamps_out_of_range_values() {
        let u = Image::new(3, 1, vec![255.7, -3.2, 10.5]).unwrap();
        let bytes = encode_pgm(&u);
        assert_eq!(&bytes[bytes.len() - 3..], &[255, 0, 11]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend([7u8, 9]);
        let u = decode_pgm(&bytes).unwrap();
        assert_eq!(u.data(), &[7.0, 9.0]);
    }

    #[test]
    fn rejects_ascii_pgm_and_truncation() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00\x01").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn unknown_extension_is_unsupported() {
        let err = load_image("picture.tiff").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn missing_file_reports_io_error() {
        let err = load_image("/nonexistent/dir/x.pgm").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[cfg(feature = "png")]
    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let u = Image::from_fn(5, 4, |x, y| (x * 40 + y) as f64);
        save_image(&u, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), u);
    }
}
