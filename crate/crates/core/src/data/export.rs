use std::fs;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::tensor::RealImage;

/// Linear map of `[lo, hi]` (default: image min and max) onto `0..=255`.
/// A degenerate window maps everything to mid-gray.
pub fn to_gray8(img: &RealImage, window: Option<(f64, f64)>) -> Result<Vec<u8>> {
    let (lo, hi) = window.unwrap_or((img.min(), img.max()));
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(invalid(format!("invalid display window [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(vec![128; img.len()]);
    }
    Ok(img.data().iter().map(|&v| (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8).collect())
}

/// Write an 8-bit grayscale PNG or binary PGM, chosen by the file extension.
pub fn export_image(img: &RealImage, path: impl AsRef<Path>, window: Option<(f64, f64)>) -> Result<()> {
    let path = path.as_ref();
    let pixels = to_gray8(img, window)?;
    let (h, w) = img.shape();
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => {
            let mut buf = format!("P5\n{w} {h}\n255\n").into_bytes();
            buf.extend_from_slice(&pixels);
            fs::write(path, buf)?;
        }
        Some("png") => {
            image::save_buffer_with_format(path, &pixels, w as u32, h as u32, image::ExtendedColorType::L8, image::ImageFormat::Png)
                .map_err(|e| Error::Image(e.to_string()))?;
        }
        _ => return Err(invalid(format!("unsupported image extension for {}", path.display()))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_mid_gray() {
        assert!(to_gray8(&RealImage::filled(3, 3, 0.7), None).unwrap().iter().all(|&p| p == 128));
    }

    #[test]
    fn extremes_map_to_full_range() {
        let img = RealImage::from_fn(2, 3, |r, c| (r * 3 + c) as f64);
        let px = to_gray8(&img, None).unwrap();
        assert_eq!(px[0], 0);
        assert_eq!(px[5], 255);
        let clipped = to_gray8(&img, Some((1.0, 2.0))).unwrap();
        assert_eq!(clipped, vec![0, 0, 255, 255, 255, 255]);
    }

    #[test]
    fn files_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let img = RealImage::from_fn(5, 7, |r, c| ((r + 1) * (c + 2)) as f64);
        for ext in ["png", "pgm"] {
            let a = dir.path().join(format!("a.{ext}"));
            let b = dir.path().join(format!("b.{ext}"));
            export_image(&img, &a, None).unwrap();
            export_image(&img, &b, None).unwrap();
            assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        }
        let decoded = image::open(dir.path().join("a.png")).unwrap().to_luma8();
        assert_eq!(decoded.dimensions(), (7, 5));
        assert_eq!(decoded.as_raw(), &to_gray8(&img, None).unwrap());
        let pgm = fs::read(dir.path().join("a.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n7 5\n255\n"));
        assert!(export_image(&img, dir.path().join("a.bmp"), None).is_err());
    }
}
