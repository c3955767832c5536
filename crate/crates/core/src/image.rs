//! Binary images, IDX dataset ingestion and binary PBM (P4) files.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Binarization threshold used for MNIST experiments (inclusive).
pub const DEFAULT_THRESHOLD: u8 = 128;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {height}x{width}")]
    EmptyDimensions { height: usize, width: usize },
    #[error("expected {expected} pixels, got {actual}")]
    PixelCount { expected: usize, actual: usize },
    #[error("pixel value {value} at index {index} is not 0 or 1")]
    NonBinary { index: usize, value: u8 },
    #[error("bad IDX magic {found:#010x} (expected {expected:#010x})")]
    BadMagic { found: u32, expected: u32 },
    #[error("IDX files disagree: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("truncated payload: {0}")]
    Truncated(String),
    #[error("label {0} outside 0..=9")]
    BadLabel(u8),
    #[error("unsupported PBM variant {0:?}; only binary P4 is supported")]
    UnsupportedVariant(String),
    #[error("malformed PBM header: {0}")]
    MalformedHeader(String),
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ImageError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ImageError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// An M x N grid of {0,1} pixels stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::EmptyDimensions { height, width });
        }
        let expected = height
            .checked_mul(width)
            .ok_or_else(|| ImageError::DimensionOverflow(format!("{height}x{width}")))?;
        if pixels.len() != expected {
            return Err(ImageError::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|&p| p > 1) {
            return Err(ImageError::NonBinary {
                index,
                value: pixels[index],
            });
        }
        Ok(BinaryImage {
            height,
            width,
            pixels,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self, ImageError> {
        Self::new(height, width, vec![0; height * width])
    }

    /// Builds an image from nested rows; handy in tests.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, ImageError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut pixels = Vec::with_capacity(height * width);
        for r in rows {
            let r = r.as_ref();
            if r.len() != width {
                return Err(ImageError::PixelCount {
                    expected: width,
                    actual: r.len(),
                });
            }
            pixels.extend_from_slice(r);
        }
        Self::new(height, width, pixels)
    }

    /// Inverse of [`raster_sequence`](Self::raster_sequence).
    pub fn from_raster(height: usize, width: usize, seq: &[u8]) -> Result<Self, ImageError> {
        Self::new(height, width, seq.to_vec())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pixel count t = M * N.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Row-major flattening: pixel (r, c) sits at index r * N + c.
    pub fn raster_sequence(&self) -> &[u8] {
        &self.pixels
    }

    pub fn ones(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }
}

/// One 8-bit grayscale record as stored in an IDX3 file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    pub levels: Vec<u8>,
}

impl GrayImage {
    pub fn binarize(&self, threshold: u8) -> BinaryImage {
        binarize(&self.levels, self.height, self.width, threshold)
            .expect("IDX records have consistent dimensions")
    }
}

/// `pixel = 1` iff `gray >= threshold`.
pub fn binarize(
    levels: &[u8],
    height: usize,
    width: usize,
    threshold: u8,
) -> Result<BinaryImage, ImageError> {
    let pixels = levels.iter().map(|&g| (g >= threshold) as u8).collect();
    BinaryImage::new(height, width, pixels)
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub images: Vec<GrayImage>,
    pub labels: Vec<u8>,
    /// Hex SHA-256 over the image file bytes followed by the label file bytes.
    pub source_hash: String,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Binarized images carrying `label`.
    pub fn class(&self, label: u8, threshold: u8) -> Vec<BinaryImage> {
        self.images
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == label)
            .map(|(img, _)| img.binarize(threshold))
            .collect()
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, ImageError> {
    fs::read(path).map_err(|e| ImageError::io(path, e))
}

/// Reads a file, transparently inflating it if it starts with the gzip magic.
pub fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>, ImageError> {
    let raw = read_file(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| ImageError::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32, ImageError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| ImageError::Truncated(format!("{what} header")))
}

/// Parses an IDX3 unsigned-byte image file.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>, ImageError> {
    let magic = be_u32(bytes, 0, "image")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(ImageError::BadMagic {
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let count = be_u32(bytes, 4, "image")? as usize;
    let rows = be_u32(bytes, 8, "image")? as usize;
    let cols = be_u32(bytes, 12, "image")? as usize;
    if rows == 0 || cols == 0 {
        return Err(ImageError::EmptyDimensions {
            height: rows,
            width: cols,
        });
    }
    let per = rows
        .checked_mul(cols)
        .ok_or_else(|| ImageError::DimensionOverflow(format!("{rows}x{cols}")))?;
    let payload = &bytes[16..];
    let needed = count
        .checked_mul(per)
        .ok_or_else(|| ImageError::DimensionOverflow(format!("{count} records")))?;
    if payload.len() < needed {
        return Err(ImageError::Truncated(format!(
            "image payload has {} bytes, header promises {needed}",
            payload.len()
        )));
    }
    Ok(payload[..needed]
        .chunks_exact(per)
        .map(|c| GrayImage {
            height: rows,
            width: cols,
            levels: c.to_vec(),
        })
        .collect())
}

/// Parses an IDX1 unsigned-byte label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, ImageError> {
    let magic = be_u32(bytes, 0, "label")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(ImageError::BadMagic {
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let count = be_u32(bytes, 4, "label")? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(ImageError::Truncated(format!(
            "label payload has {} bytes, header promises {count}",
            payload.len()
        )));
    }
    let labels = payload[..count].to_vec();
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(ImageError::BadLabel(bad));
    }
    Ok(labels)
}

pub fn load_idx(image_path: &Path, label_path: &Path) -> Result<LabeledDataset, ImageError> {
    let image_bytes = read_maybe_gzip(image_path)?;
    let label_bytes = read_maybe_gzip(label_path)?;
    let images = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    if images.len() != labels.len() {
        return Err(ImageError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    let mut hasher = Sha256::new();
    hasher.update(&image_bytes);
    hasher.update(&label_bytes);
    let source_hash = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(LabeledDataset {
        images,
        labels,
        source_hash,
    })
}

/// Serializes as binary PBM: `P4\n<width> <height>\n` then packed rows,
/// MSB first, each row padded to a whole byte.
pub fn save_pbm(image: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", image.width, image.height).into_bytes();
    let row_bytes = image.width.div_ceil(8);
    out.reserve(row_bytes * image.height);
    for r in 0..image.height {
        let row = image.row(r);
        for chunk in row.chunks(8) {
            let mut byte = 0u8;
            for (i, &p) in chunk.iter().enumerate() {
                byte |= p << (7 - i);
            }
            out.push(byte);
        }
    }
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
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

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ImageError::DimensionOverflow(format!("{what} too large")))
    }
}

pub fn load_pbm(bytes: &[u8]) -> Result<BinaryImage, ImageError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ImageError::MalformedHeader("missing P magic".into()));
    }
    if bytes[1] != b'4' {
        return Err(ImageError::UnsupportedVariant(
            String::from_utf8_lossy(&bytes[..2]).into_owned(),
        ));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(ImageError::MalformedHeader("magic not followed by whitespace".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageError::MalformedHeader("no separator before raster".into()));
    }
    cur.pos += 1;
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyDimensions { height, width });
    }
    if width > u32::MAX as usize || height > u32::MAX as usize {
        return Err(ImageError::DimensionOverflow(format!("{width}x{height}")));
    }
    let row_bytes = width.div_ceil(8);
    let needed = row_bytes
        .checked_mul(height)
        .filter(|n| height.checked_mul(width).is_some() && *n <= isize::MAX as usize)
        .ok_or_else(|| ImageError::DimensionOverflow(format!("{width}x{height}")))?;
    let raster = &bytes[cur.pos..];
    if raster.len() < needed {
        return Err(ImageError::Truncated(format!(
            "PBM raster has {} bytes, expected {needed}",
            raster.len()
        )));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for row in raster[..needed].chunks_exact(row_bytes) {
        for c in 0..width {
            pixels.push((row[c / 8] >> (7 - c % 8)) & 1);
        }
    }
    BinaryImage::new(height, width, pixels)
}

pub fn read_pbm_file(path: &Path) -> Result<BinaryImage, ImageError> {
    load_pbm(&read_file(path)?)
}

pub fn write_pbm_file(path: &Path, image: &BinaryImage) -> Result<(), ImageError> {
    fs::write(path, save_pbm(image)).map_err(|e| ImageError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx_images(count: u32, rows: u32, cols: u32, payload: &[u8]) -> Vec<u8> {
        let mut v = Vec::new();
        for x in [IDX_IMAGES_MAGIC, count, rows, cols] {
            v.extend_from_slice(&x.to_be_bytes());
        }
        v.extend_from_slice(payload);
        v
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut v = Vec::new();
        v.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        v.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        v.extend_from_slice(labels);
        v
    }

    #[test]
    fn binarize_threshold_is_inclusive() {
        let img = binarize(&[0, 0, 0, 0], 2, 2, 128).unwrap();
        assert_eq!(img.ones(), 0);
        let img = binarize(&[127, 128], 1, 2, 128).unwrap();
        assert_eq!(img.raster_sequence(), &[0, 1]);
    }

    #[test]
    fn raster_is_row_major() {
        let img = BinaryImage::from_rows(&[[0, 1], [1, 0]]).unwrap();
        assert_eq!(img.raster_sequence(), &[0, 1, 1, 0]);
        let ones = BinaryImage::new(3, 3, vec![1; 9]).unwrap();
        assert_eq!(ones.raster_sequence(), &[1; 9]);
        assert_eq!(img.get(1, 0), img.raster_sequence()[2]);
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert!(BinaryImage::new(0, 3, vec![]).is_err());
        assert!(BinaryImage::new(2, 2, vec![0; 3]).is_err());
        assert!(matches!(
            BinaryImage::new(1, 2, vec![0, 2]),
            Err(ImageError::NonBinary { index: 1, value: 2 })
        ));
    }

    #[test]
    fn idx_parse_and_errors() {
        let px: Vec<u8> = (0..8).map(|i| i * 30).collect();
        let images = parse_idx_images(&idx_images(2, 2, 2, &px)).unwrap();
        assert_eq!(images.len(), 2);
        assert_eq!(images[1].levels, vec![120, 150, 180, 210]);
        assert_eq!(images[1].binarize(128).raster_sequence(), &[0, 1, 1, 1]);

        // label magic handed to the image parser
        assert!(matches!(
            parse_idx_images(&idx_labels(&[1, 2])),
            Err(ImageError::BadMagic { .. })
        ));
        // truncated mid-pixel
        assert!(matches!(
            parse_idx_images(&idx_images(2, 2, 2, &px[..7])),
            Err(ImageError::Truncated(_))
        ));
        assert!(matches!(
            parse_idx_labels(&idx_labels(&[3, 11])),
            Err(ImageError::BadLabel(11))
        ));
    }

    #[test]
    fn load_idx_checks_counts() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        fs::write(&ip, idx_images(2, 1, 1, &[0, 255])).unwrap();
        fs::write(&lp, idx_labels(&[7])).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(ImageError::CountMismatch { images: 2, labels: 1 })
        ));
        fs::write(&lp, idx_labels(&[7, 1])).unwrap();
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.source_hash.len(), 64);
        assert_eq!(ds.class(1, 128)[0].raster_sequence(), &[1]);
        assert!(matches!(
            load_idx(&dir.path().join("missing"), &lp),
            Err(ImageError::Io { .. })
        ));
    }

    #[test]
    fn pbm_known_bytes() {
        let img = BinaryImage::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let bytes = save_pbm(&img);
        assert_eq!(bytes, b"P4\n2 2\n\x80\x40");
        assert_eq!(load_pbm(&bytes).unwrap(), img);
    }

    #[test]
    fn pbm_header_variants() {
        let img = load_pbm(b"P4 # comment\n3\n1\n\xa0").unwrap();
        assert_eq!(img.raster_sequence(), &[1, 0, 1]);
        assert!(matches!(
            load_pbm(b"P1\n2 2\n1 0 0 1"),
            Err(ImageError::UnsupportedVariant(_))
        ));
        assert!(matches!(
            load_pbm(b"P4\n2\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_pbm(b"P4\n99999999999999999999999 2\n"),
            Err(ImageError::DimensionOverflow(_))
        ));
        assert!(matches!(
            load_pbm(b"P4\n16 2\n\x00\x00\x00"),
            Err(ImageError::Truncated(_))
        ));
    }

    fn any_image() -> impl Strategy<Value = BinaryImage> {
        (1usize..20, 1usize..20).prop_flat_map(|(h, w)| {
            prop::collection::vec(0u8..2, h * w)
                .prop_map(move |px| BinaryImage::new(h, w, px).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn pbm_round_trip(img in any_image()) {
            let bytes = save_pbm(&img);
            let back = load_pbm(&bytes).unwrap();
            prop_assert_eq!(save_pbm(&back), bytes);
            prop_assert_eq!(back, img);
        }

        #[test]
        fn raster_reshape_inverse(img in any_image()) {
            let seq = img.raster_sequence().to_vec();
            prop_assert_eq!(seq.len(), img.height() * img.width());
            let back = BinaryImage::from_raster(img.height(), img.width(), &seq).unwrap();
            prop_assert_eq!(back, img);
        }

        #[test]
        fn binarize_monotone(levels in prop::collection::vec(any::<u8>(), 1..64), a in any::<u8>(), b in any::<u8>()) {
            let (lo, hi) = (a.min(b), a.max(b));
            let n = levels.len();
            let low = binarize(&levels, 1, n, lo).unwrap();
            let high = binarize(&levels, 1, n, hi).unwrap();
            for (x, y) in low.raster_sequence().iter().zip(high.raster_sequence()) {
                prop_assert!(y <= x);
            }
        }
    }
}
