//! PNG input/output and the baseline JPEG codec behind the `jpeg` corruption.

use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};
use uqbench_core::corruption::{GrayImage, JpegCodec};

use crate::error::{Error, Result};

/// JPEG round trip through the `image` crate's baseline encoder and decoder.
#[derive(Debug, Clone, Copy, Default)]
pub struct ImageJpeg;

impl JpegCodec for ImageJpeg {
    fn roundtrip(&self, img: &GrayImage, quality: u8) -> uqbench_core::Result<GrayImage> {
        let codec = |e: image::ImageError| uqbench_core::Error::Codec(e.to_string());
        let mut buf = Vec::new();
        JpegEncoder::new_with_quality(&mut buf, quality.clamp(1, 100))
            .encode(&img.pixels, img.width as u32, img.height as u32, ExtendedColorType::L8)
            .map_err(codec)?;
        let decoded = image::load_from_memory_with_format(&buf, ImageFormat::Jpeg).map_err(codec)?.to_luma8();
        GrayImage::new(decoded.width() as usize, decoded.height() as usize, decoded.into_raw())
    }
}

/// Loads any supported image as 8-bit grayscale.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.to_owned(), source })?.to_luma8();
    Ok(GrayImage::new(img.width() as usize, img.height() as usize, img.into_raw())?)
}

pub fn save_png(path: &Path, img: &GrayImage) -> Result<()> {
    let buffer = image::GrayImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
        .ok_or_else(|| Error::Usage(format!("{}: pixel buffer does not match image size", path.display())))?;
    let mut bytes = Cursor::new(Vec::new());
    buffer.write_to(&mut bytes, ImageFormat::Png).map_err(|source| Error::Image { path: path.to_owned(), source })?;
    std::fs::write(path, bytes.into_inner()).map_err(Error::io(path))
}
