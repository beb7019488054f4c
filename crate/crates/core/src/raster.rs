//! Grayscale rasters, PGM/PPM codecs, histograms and Otsu thresholding.

use std::fmt;

use thiserror::Error;

/// An 8-bit grayscale image stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    /// Wraps row-major pixel data. Returns `None` when a dimension is zero or
    /// the buffer length is not `width * height`.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Option<Self> {
        if width == 0 || height == 0 || width.checked_mul(height)? != data.len() {
            return None;
        }
        Some(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Option<Self> {
        Self::from_raw(width, height, vec![value; width.checked_mul(height)?])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }
}

/// Row-major foreground flags.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.width, self.height)?;
        for row in self.bits.chunks(self.width.max(1)) {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    /// Returns `None` when `bits.len() != width * height`.
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Option<Self> {
        (width.checked_mul(height)? == bits.len()).then_some(Self { width, height, bits })
    }

    /// Builds a mask from rows of 0/1 values; all rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Option<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(width * height);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return None;
            }
            bits.extend(row.iter().map(|&v| v != 0));
        }
        Some(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, on: bool) {
        self.bits[row * self.width + col] = on;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Converts to a gray image with 0 = background, 255 = foreground.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

/// Pixel counts per gray level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Which side of the threshold is treated as the object.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Polarity {
    /// Foreground where `v <= threshold`.
    Dark,
    /// Foreground where `v > threshold`.
    Light,
    /// Whichever of the two yields fewer foreground pixels; ties go to `Dark`.
    #[default]
    Minority,
}

impl std::str::FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dark" | "dark-foreground" => Ok(Self::Dark),
            "light" | "light-foreground" => Ok(Self::Light),
            "minority" | "minority-foreground" => Ok(Self::Minority),
            other => Err(format!("unknown polarity `{other}` (expected dark, light or minority)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("bad magic number at byte {offset}: expected P2, P3, P5 or P6")]
    BadMagic { offset: usize },
    #[error("truncated payload at byte {offset}: expected {expected} more sample(s)")]
    Truncated { offset: usize, expected: usize },
    #[error("maxval {value} at byte {offset} is outside [1, 255]")]
    BadMaxval { offset: usize, value: u64 },
    #[error("zero image dimension at byte {offset}")]
    ZeroDimension { offset: usize },
    #[error("malformed header token at byte {offset}")]
    BadToken { offset: usize },
    #[error("sample {value} at byte {offset} exceeds maxval {maxval}")]
    SampleOutOfRange { offset: usize, value: u64, maxval: u64 },
    #[error("image dimensions {width}x{height} are too large")]
    TooLarge { width: u64, height: u64 },
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("histogram has fewer than two distinct intensities")]
    DegenerateHistogram,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    AsciiGray,
    AsciiRgb,
    BinaryGray,
    BinaryRgb,
}

impl Format {
    fn channels(self) -> usize {
        match self {
            Format::AsciiGray | Format::BinaryGray => 1,
            Format::AsciiRgb | Format::BinaryRgb => 3,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token. `Ok(None)` at end of input.
    fn number(&mut self) -> Result<Option<(usize, u64)>, ImageError> {
        self.skip_space();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Ok(None);
        }
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or(ImageError::BadToken { offset: start })?;
            self.pos += 1;
        }
        let terminated = self
            .bytes
            .get(self.pos)
            .is_none_or(|b| b.is_ascii_whitespace() || *b == b'#');
        if self.pos == start || !terminated {
            return Err(ImageError::BadToken { offset: start });
        }
        Ok(Some((start, value)))
    }

    fn header_field(&mut self) -> Result<(usize, u64), ImageError> {
        self.number()?
            .ok_or(ImageError::Truncated { offset: self.bytes.len(), expected: 1 })
    }
}

/// Decodes a PGM (P2/P5) or PPM (P3/P6) file into grayscale.
///
/// Samples are rescaled to 0..=255 with `round(v * 255 / maxval)`; color
/// pixels use the luma weights 0.299/0.587/0.114, rounded half-up.
pub fn load_image(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let format = match bytes.get(..2) {
        Some(b"P2") => Format::AsciiGray,
        Some(b"P3") => Format::AsciiRgb,
        Some(b"P5") => Format::BinaryGray,
        Some(b"P6") => Format::BinaryRgb,
        _ => return Err(ImageError::BadMagic { offset: 0 }),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(ImageError::BadMagic { offset: 2 }),
    }

    let (w_off, width) = cur.header_field()?;
    let (h_off, height) = cur.header_field()?;
    if width == 0 {
        return Err(ImageError::ZeroDimension { offset: w_off });
    }
    if height == 0 {
        return Err(ImageError::ZeroDimension { offset: h_off });
    }
    let (m_off, maxval) = cur.header_field()?;
    if !(1..=255).contains(&maxval) {
        return Err(ImageError::BadMaxval { offset: m_off, value: maxval });
    }
    let pixel_count = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .filter(|n| n.checked_mul(3).is_some())
        .ok_or(ImageError::TooLarge { width, height })?;
    let channels = format.channels();
    let sample_count = pixel_count * channels;

    let mut samples = Vec::with_capacity(sample_count);
    match format {
        Format::BinaryGray | Format::BinaryRgb => {
            // Exactly one whitespace byte separates the header from the raster.
            let start = cur.pos + 1;
            let available = bytes.len().saturating_sub(start);
            if available < sample_count {
                return Err(ImageError::Truncated {
                    offset: bytes.len(),
                    expected: sample_count - available,
                });
            }
            for (i, &b) in bytes[start..start + sample_count].iter().enumerate() {
                if u64::from(b) > maxval {
                    return Err(ImageError::SampleOutOfRange {
                        offset: start + i,
                        value: u64::from(b),
                        maxval,
                    });
                }
                samples.push(b);
            }
        }
        Format::AsciiGray | Format::AsciiRgb => {
            while samples.len() < sample_count {
                match cur.number()? {
                    Some((offset, value)) if value > maxval => {
                        return Err(ImageError::SampleOutOfRange { offset, value, maxval })
                    }
                    // value <= maxval <= 255
                    Some((_, value)) => samples.push(value as u8),
                    None => {
                        return Err(ImageError::Truncated {
                            offset: bytes.len(),
                            expected: sample_count - samples.len(),
                        })
                    }
                }
            }
        }
    }

    let maxval = maxval as u32;
    let rescale = |v: u8| -> u32 {
        if maxval == 255 {
            u32::from(v)
        } else {
            (u32::from(v) * 255 * 2 + maxval) / (2 * maxval)
        }
    };
    let data = if channels == 1 {
        samples.iter().map(|&v| rescale(v) as u8).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|px| luma(rescale(px[0]), rescale(px[1]), rescale(px[2])))
            .collect()
    };
    Ok(GrayImage { width: width as usize, height: height as usize, data })
}

/// `round(0.299 R + 0.587 G + 0.114 B)` in exact integer arithmetic.
fn luma(r: u32, g: u32, b: u32) -> u8 {
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

/// Encodes as binary PGM (P5, maxval 255).
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.data);
    out
}

/// Encodes a mask as P5 with 0 = background and 255 = foreground.
pub fn write_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    write_pgm(&mask.to_image())
}

pub fn histogram(image: &GrayImage) -> Histogram256 {
    let mut counts = [0u64; 256];
    for &v in &image.data {
        counts[v as usize] += 1;
    }
    Histogram256 { counts, total: image.data.len() as u64 }
}

/// Otsu's threshold: the `t` maximizing the between-class variance of the
/// split `{v <= t} | {v > t}`, lowest `t` on ties.
///
/// Comparisons are exact. With `n0, s0` the count and intensity sum of the
/// lower class (and `n1, s1` for the upper), the variance is proportional to
/// `(s0*n1 - s1*n0)^2 / (n0*n1)`, so candidates are ranked by integer
/// cross-multiplication instead of floating point.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8, ThresholdError> {
    if hist.distinct_levels() < 2 {
        return Err(ThresholdError::DegenerateHistogram);
    }
    let n = hist.total;
    assert!(n < 1 << 28, "histogram total {n} exceeds the exact-arithmetic range");
    let sum: u64 = hist.counts.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();

    let mut best: Option<(u8, u128, u64)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..255u8 {
        n0 += hist.counts[t as usize];
        s0 += t as u64 * hist.counts[t as usize];
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = sum - s0;
        let d = (i128::from(s0) * i128::from(n1) - i128::from(s1) * i128::from(n0)).unsigned_abs();
        let num = d * d;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bnum, bden)) => greater_ratio(num, den, bnum, bden),
        };
        if better {
            best = Some((t, num, den));
        }
    }
    // Two distinct levels guarantee at least one split with both classes nonempty.
    Ok(best.expect("non-degenerate histogram has a valid split").0)
}

/// `a / b > c / d` for `a, c < 2^128` and `b, d < 2^64`, exactly.
fn greater_ratio(a: u128, b: u64, c: u128, d: u64) -> bool {
    mul_wide(a, d) > mul_wide(c, b)
}

/// 192-bit product as (high 128 bits, low 64 bits).
fn mul_wide(a: u128, b: u64) -> (u128, u64) {
    let lo = (a as u64 as u128) * b as u128;
    let hi = (a >> 64) * b as u128 + (lo >> 64);
    (hi, lo as u64)
}

pub fn binarize(image: &GrayImage, threshold: u8, polarity: Polarity) -> BinaryMask {
    let dark: Vec<bool> = image.data.iter().map(|&v| v <= threshold).collect();
    let invert = match polarity {
        Polarity::Dark => false,
        Polarity::Light => true,
        Polarity::Minority => {
            let dark_count = dark.iter().filter(|&&b| b).count();
            dark_count > dark.len() - dark_count
        }
    };
    let bits = if invert { dark.into_iter().map(|b| !b).collect() } else { dark };
    BinaryMask { width: image.width, height: image.height, bits }
}

/// Histogram, Otsu threshold and binarization in one step.
pub fn segment(image: &GrayImage, polarity: Polarity) -> Result<(u8, BinaryMask), ThresholdError> {
    let t = otsu_threshold(&histogram(image))?;
    Ok((t, binarize(image, t, polarity)))
}
