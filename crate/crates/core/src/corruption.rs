//! Pixel-space corruptions for 8-bit grayscale images, five kinds at three
//! severities.
//!
//! | kind           | severity 1   | severity 3   | severity 5   |
//! |----------------|--------------|--------------|--------------|
//! | gaussian_noise | σ = 0.04     | σ = 0.08     | σ = 0.12     |
//! | gaussian_blur  | σ_b = 1.0 px | σ_b = 2.0 px | σ_b = 3.0 px |
//! | contrast       | α = 0.7      | α = 0.5      | α = 0.3      |
//! | brightness     | δ = +0.05    | δ = +0.10    | δ = +0.15    |
//! | jpeg           | Q = 50       | Q = 30       | Q = 10       |
//!
//! Noise σ and brightness δ are fractions of the full intensity range and
//! are multiplied by 255. Every output pixel is rounded half-up and clipped
//! to `[0, 255]`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math::round_half_up;
use crate::rng::SeededRng;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum CorruptionKind {
    GaussianNoise,
    GaussianBlur,
    Contrast,
    Brightness,
    Jpeg,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 5] = [
        CorruptionKind::GaussianNoise,
        CorruptionKind::GaussianBlur,
        CorruptionKind::Contrast,
        CorruptionKind::Brightness,
        CorruptionKind::Jpeg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::GaussianBlur => "gaussian_blur",
            CorruptionKind::Contrast => "contrast",
            CorruptionKind::Brightness => "brightness",
            CorruptionKind::Jpeg => "jpeg",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorruptionKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    S1,
    S3,
    S5,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::S1, Severity::S3, Severity::S5];

    pub fn level(self) -> u8 {
        match self {
            Severity::S1 => 1,
            Severity::S3 => 3,
            Severity::S5 => 5,
        }
    }

    fn column(self) -> usize {
        match self {
            Severity::S1 => 0,
            Severity::S3 => 1,
            Severity::S5 => 2,
        }
    }
}

impl TryFrom<u8> for Severity {
    type Error = Error;

    fn try_from(level: u8) -> Result<Self> {
        match level {
            1 => Ok(Severity::S1),
            3 => Ok(Severity::S3),
            5 => Ok(Severity::S5),
            other => Err(Error::InvalidSeverity(other)),
        }
    }
}

const PARAMS: [(CorruptionKind, [f64; 3]); 5] = [
    (CorruptionKind::GaussianNoise, [0.04, 0.08, 0.12]),
    (CorruptionKind::GaussianBlur, [1.0, 2.0, 3.0]),
    (CorruptionKind::Contrast, [0.7, 0.5, 0.3]),
    (CorruptionKind::Brightness, [0.05, 0.10, 0.15]),
    (CorruptionKind::Jpeg, [50.0, 30.0, 10.0]),
];

/// The table parameter for a (kind, severity) cell.
pub fn severity_params(kind: CorruptionKind, severity: Severity) -> f64 {
    PARAMS.iter().find(|(k, _)| *k == kind).map(|(_, p)| p[severity.column()]).unwrap_or(f64::NAN)
}

/// String-keyed lookup, for callers holding names from a file or CLI.
pub fn severity_params_named(kind: &str, severity: u8) -> Result<f64> {
    Ok(severity_params(kind.parse()?, Severity::try_from(severity)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub severity: Severity,
    pub parameter: f64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, severity: Severity) -> Self {
        Self { kind, severity, parameter: severity_params(kind, severity) }
    }

    /// Full 5 × 3 grid in table order.
    pub fn grid() -> Vec<CorruptionSpec> {
        CorruptionKind::ALL
            .into_iter()
            .flat_map(|k| Severity::ALL.into_iter().map(move |s| CorruptionSpec::new(k, s)))
            .collect()
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width * height != pixels.len() {
            return Err(Error::ImageShape { expected: width * height, got: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, pixels: alloc::vec![value; width * height] }
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| f64::from(p)).sum::<f64>() / self.pixels.len() as f64
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| to_pixel(f(f64::from(p)))).collect(),
        }
    }
}

fn to_pixel(x: f64) -> u8 {
    round_half_up(x).clamp(0.0, 255.0) as u8
}

/// Baseline JPEG round trip at a given quality, provided by the caller.
pub trait JpegCodec {
    fn roundtrip(&self, image: &GrayImage, quality: u8) -> Result<GrayImage>;
}

/// Codec for callers without JPEG support; always fails.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoJpeg;

impl JpegCodec for NoJpeg {
    fn roundtrip(&self, _: &GrayImage, _: u8) -> Result<GrayImage> {
        Err(Error::Codec(String::from("no JPEG codec available")))
    }
}

/// Normalized Gaussian weights over `-radius..=radius`, `radius = ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return alloc::vec![1.0];
    }
    let radius = libm::ceil(3.0 * sigma) as i64;
    let raw: Vec<f64> = (-radius..=radius).map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma))).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn blur(image: &GrayImage, sigma: f64) -> GrayImage {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (image.width as isize, image.height as isize);
    let clamp = |v: isize, hi: isize| v.clamp(0, hi - 1) as usize;
    let mut rows = alloc::vec![0.0f64; image.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            rows[(y * w + x) as usize] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * f64::from(image.pixels[(y * w) as usize + clamp(x + k as isize - radius, w)]))
                .sum();
        }
    }
    let mut pixels = Vec::with_capacity(image.pixels.len());
    for y in 0..h {
        for x in 0..w {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * rows[clamp(y + k as isize - radius, h) * w as usize + x as usize])
                .sum();
            pixels.push(to_pixel(v));
        }
    }
    GrayImage { width: image.width, height: image.height, pixels }
}

/// Applies one corruption. `seed` drives the noise; other kinds ignore it.
pub fn apply_corruption<C: JpegCodec + ?Sized>(
    image: &GrayImage,
    spec: &CorruptionSpec,
    seed: u64,
    codec: &C,
) -> Result<GrayImage> {
    if image.width == 0 || image.height == 0 {
        return Err(Error::EmptyImage);
    }
    if image.pixels.len() != image.width * image.height {
        return Err(Error::ImageShape { expected: image.width * image.height, got: image.pixels.len() });
    }
    let p = spec.parameter;
    Ok(match spec.kind {
        CorruptionKind::GaussianNoise => {
            let mut rng = SeededRng::new(seed);
            let scale = 255.0 * p;
            GrayImage {
                width: image.width,
                height: image.height,
                pixels: image.pixels.iter().map(|&x| to_pixel(f64::from(x) + scale * rng.standard_normal())).collect(),
            }
        }
        CorruptionKind::GaussianBlur => blur(image, p),
        CorruptionKind::Contrast => {
            let mean = image.mean();
            image.map_values(|x| p * x + (1.0 - p) * mean)
        }
        CorruptionKind::Brightness => image.map_values(|x| x + 255.0 * p),
        CorruptionKind::Jpeg => {
            if !(1.0..=100.0).contains(&p) {
                return Err(Error::Domain { name: "jpeg quality", value: p });
            }
            codec.roundtrip(image, p as u8)?
        }
    })
}
