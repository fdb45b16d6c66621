//! Image decoding: PNG, baseline JPEG, binary PPM (P6) and PGM (P5).
//! The netpbm formats are handled directly so tests can rely on pixel-exact
//! round trips; PNG/JPEG go through the `image` crate.

use somiap_core::{ColorImage, GrayImage};

use crate::error::{Result, ToolError};

/// Decodes a PNG, JPEG, P6 or P5 byte stream, detected by magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<ColorImage> {
    match bytes {
        [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, ..] => {
            decode_with_image_crate(bytes, image::ImageFormat::Png, "png")
        }
        [0xff, 0xd8, ..] => decode_with_image_crate(bytes, image::ImageFormat::Jpeg, "jpeg"),
        [b'P', b'6', ..] => decode_pnm(bytes, true),
        [b'P', b'5', ..] => decode_pnm(bytes, false),
        _ => Err(ToolError::Decode(
            "unrecognized image format (expected PNG, JPEG, P6 or P5)".into(),
        )),
    }
}

fn decode_with_image_crate(
    bytes: &[u8],
    format: image::ImageFormat,
    label: &str,
) -> Result<ColorImage> {
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ToolError::Decode(format!("{label}: {e}")))?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width(), rgb.height());
    ColorImage::new(w, h, rgb.into_raw()).map_err(|e| ToolError::Decode(format!("{label}: {e}")))
}

/// Binary netpbm: magic, whitespace/comment-separated width/height/maxval,
/// one whitespace byte, then raw samples.
fn decode_pnm(bytes: &[u8], color: bool) -> Result<ColorImage> {
    let label = if color { "ppm" } else { "pgm" };
    let mut pos = 2usize;

    let next_token = |pos: &mut usize| -> Result<u32> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while !matches!(bytes.get(*pos), Some(b'\n') | None) {
                        *pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => *pos += 1,
                Some(c) if c.is_ascii_digit() => break,
                Some(c) => {
                    return Err(ToolError::Decode(format!(
                        "{label}: unexpected byte 0x{c:02x} in header"
                    )))
                }
                None => {
                    return Err(ToolError::Decode(format!("{label}: truncated header")))
                }
            }
        }
        let mut value: u64 = 0;
        while let Some(c) = bytes.get(*pos) {
            if !c.is_ascii_digit() {
                break;
            }
            value = value * 10 + (c - b'0') as u64;
            if value > u32::MAX as u64 {
                return Err(ToolError::Decode(format!("{label}: header value overflow")));
            }
            *pos += 1;
        }
        Ok(value as u32)
    };

    let width = next_token(&mut pos)?;
    let height = next_token(&mut pos)?;
    let maxval = next_token(&mut pos)?;
    if width == 0 || height == 0 {
        return Err(ToolError::Decode(format!("{label}: zero dimension")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(ToolError::Decode(format!(
            "{label}: unsupported maxval {maxval} (8-bit only)"
        )));
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(ToolError::Decode(format!(
                "{label}: missing whitespace after maxval"
            )))
        }
    }

    let samples = width as usize * height as usize * if color { 3 } else { 1 };
    let data = bytes
        .get(pos..pos + samples)
        .ok_or_else(|| ToolError::Decode(format!("{label}: truncated pixel data")))?;

    let rgb: Vec<u8> = if color {
        data.to_vec()
    } else {
        data.iter().flat_map(|&v| [v, v, v]).collect()
    };
    ColorImage::new(width, height, rgb).map_err(|e| ToolError::Decode(format!("{label}: {e}")))
}

/// Encodes a color image as binary PPM (P6).
pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Encodes a gray image as binary PGM (P5).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trips_exact_pixels() {
        let img = ColorImage::new(
            2,
            2,
            vec![255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255],
        )
        .unwrap();
        let decoded = decode_image(&encode_ppm(&img)).unwrap();
        assert_eq!(decoded, img);
        assert_eq!(decoded.rgb(0, 0), (255, 0, 0));
        assert_eq!(decoded.rgb(1, 1), (255, 255, 255));
    }

    #[test]
    fn pgm_promotes_gray_to_rgb() {
        let bytes = b"P5\n1 1\n255\n\x80";
        let img = decode_image(bytes).unwrap();
        assert_eq!(img.rgb(0, 0), (128, 128, 128));
    }

    #[test]
    fn pnm_headers_allow_comments() {
        let bytes = b"P5\n# fixture\n2 1\n255\n\x01\x02";
        let img = decode_image(bytes).unwrap();
        assert_eq!(img.rgb(0, 0), (1, 1, 1));
        assert_eq!(img.rgb(1, 0), (2, 2, 2));
    }

    #[test]
    fn truncated_ppm_is_a_decode_error() {
        let bytes = b"P6\n2 2\n255\nxx";
        match decode_image(bytes) {
            Err(ToolError::Decode(msg)) => assert!(msg.contains("truncated")),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn sixteen_bit_pnm_rejected() {
        let bytes = b"P5\n1 1\n65535\n\x00\x00";
        assert!(matches!(decode_image(bytes), Err(ToolError::Decode(_))));
    }

    #[test]
    fn png_round_trip_is_pixel_exact() {
        let img = ColorImage::new(
            3,
            2,
            vec![
                10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180,
            ],
        )
        .unwrap();
        let mut png_bytes = Vec::new();
        image::write_buffer_with_format(
            &mut std::io::Cursor::new(&mut png_bytes),
            img.data(),
            3,
            2,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )
        .unwrap();
        assert_eq!(decode_image(&png_bytes).unwrap(), img);
    }

    #[test]
    fn jpeg_decodes_to_plausible_pixels() {
        // baseline JPEG is lossy and decoder rounding is not bit-guaranteed,
        // so assert approximate content only
        let img = ColorImage::new(
            16,
            16,
            (0..16 * 16)
                .flat_map(|i| {
                    let v = (i % 200) as u8;
                    [v, v, v]
                })
                .collect(),
        )
        .unwrap();
        let mut jpeg_bytes = Vec::new();
        image::write_buffer_with_format(
            &mut std::io::Cursor::new(&mut jpeg_bytes),
            img.data(),
            16,
            16,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Jpeg,
        )
        .unwrap();
        let decoded = decode_image(&jpeg_bytes).unwrap();
        assert_eq!((decoded.width(), decoded.height()), (16, 16));
        let mean_err: f64 = decoded
            .data()
            .iter()
            .zip(img.data())
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .sum::<f64>()
            / decoded.data().len() as f64;
        assert!(mean_err < 16.0, "mean abs error {mean_err}");
    }

    #[test]
    fn truncated_png_is_a_decode_error() {
        let bytes = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00];
        match decode_image(&bytes) {
            Err(ToolError::Decode(msg)) => assert!(msg.starts_with("png")),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_magic_rejected() {
        assert!(matches!(
            decode_image(b"GIF89a...."),
            Err(ToolError::Decode(_))
        ));
    }
}
