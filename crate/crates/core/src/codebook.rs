//! The shape database: rectangular patterns mined from a training corpus,
//! their occurrence counts, and canonical Huffman codewords.
//!
//! Shapes are ordered canonically (descending area, descending frequency,
//! ascending pattern bits, ascending height) so that identical inputs always
//! yield byte-identical codebook files.

use std::cmp::Reverse;
use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bitio::Codeword;
use crate::codec::ShapeCodec;
use crate::image::BinaryImage;
use crate::prefix::{self, PrefixError};

pub const MAX_SHAPE_SIDE: u8 = 8;
pub const DEFAULT_SHAPE_SIDE: u8 = 4;
pub const DEFAULT_MIN_FREQ: u64 = 4;

const MAGIC: &[u8; 4] = b"SCDB";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid training parameters: {0}")]
    BadParams(String),
    #[error("shape database has no codewords assigned")]
    NoCodewords,
    #[error("shape database lacks the mandatory 1x1 shapes")]
    MissingUnitShapes,
    #[error("unknown codebook version {0:?}")]
    UnknownVersion(Option<u16>),
    #[error("bad codebook magic")]
    BadMagic,
    #[error("codebook digest mismatch: stored {stored:016x}, computed {computed:016x}")]
    DigestMismatch { stored: u64, computed: u64 },
    #[error("corrupt codebook: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Prefix(#[from] PrefixError),
}

/// A rectangular binary pattern. `bits` holds the `h * w` pixels row-major,
/// first pixel in the most significant of the low `h * w` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub height: u8,
    pub width: u8,
    pub bits: u64,
}

impl Shape {
    pub fn new(height: u8, width: u8, bits: u64) -> Result<Self, CodebookError> {
        if !(1..=MAX_SHAPE_SIDE).contains(&height) || !(1..=MAX_SHAPE_SIDE).contains(&width) {
            return Err(CodebookError::BadParams(format!(
                "shape {height}x{width} outside 1..={MAX_SHAPE_SIDE}"
            )));
        }
        let area = height as u32 * width as u32;
        if area < 64 && bits >> area != 0 {
            return Err(CodebookError::BadParams(format!(
                "pattern {bits:#x} wider than {area} bits"
            )));
        }
        Ok(Shape {
            height,
            width,
            bits,
        })
    }

    pub fn unit(value: u8) -> Self {
        Shape {
            height: 1,
            width: 1,
            bits: value as u64 & 1,
        }
    }

    pub fn area(&self) -> usize {
        self.height as usize * self.width as usize
    }

    /// Pixel `(r, c)` of the pattern.
    #[inline]
    pub fn pixel(&self, r: usize, c: usize) -> u8 {
        let idx = r * self.width as usize + c;
        ((self.bits >> (self.area() - 1 - idx)) & 1) as u8
    }

    /// The pattern's pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = u8> + '_ {
        let a = self.area();
        (0..a).map(move |i| ((self.bits >> (a - 1 - i)) & 1) as u8)
    }

    /// Reads the `h x w` window of `image` anchored at `(row, col)`.
    pub fn extract(image: &BinaryImage, row: usize, col: usize, h: u8, w: u8) -> u64 {
        let mut bits = 0u64;
        for r in row..row + h as usize {
            for &p in &image.row(r)[col..col + w as usize] {
                bits = (bits << 1) | p as u64;
            }
        }
        bits
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}:", self.height, self.width)?;
        for (i, p) in self.pixels().enumerate() {
            if i > 0 && i % self.width as usize == 0 {
                f.write_str("/")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Which rectangle sizes training collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeMode {
    /// Every `h x w` with `h <= h_max`, `w <= w_max`.
    UpTo,
    /// Only `h_max x w_max` (plus the mandatory 1x1 shapes).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainParams {
    pub h_max: u8,
    pub w_max: u8,
    pub min_freq: u64,
    pub mode: SizeMode,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            h_max: DEFAULT_SHAPE_SIDE,
            w_max: DEFAULT_SHAPE_SIDE,
            min_freq: DEFAULT_MIN_FREQ,
            mode: SizeMode::UpTo,
        }
    }
}

impl TrainParams {
    pub fn up_to(h_max: u8, w_max: u8, min_freq: u64) -> Self {
        TrainParams {
            h_max,
            w_max,
            min_freq,
            mode: SizeMode::UpTo,
        }
    }

    /// All observed `n x n` patterns, no frequency pruning.
    pub fn fixed(n: u8) -> Self {
        TrainParams {
            h_max: n,
            w_max: n,
            min_freq: 1,
            mode: SizeMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<(), CodebookError> {
        let side = 1..=MAX_SHAPE_SIDE;
        if !side.contains(&self.h_max) || !side.contains(&self.w_max) {
            return Err(CodebookError::BadParams(format!(
                "h_max={} w_max={} must lie in 1..={MAX_SHAPE_SIDE}",
                self.h_max, self.w_max
            )));
        }
        if self.min_freq == 0 {
            return Err(CodebookError::BadParams("min_freq must be >= 1".into()));
        }
        Ok(())
    }

    fn sizes(&self) -> Vec<(u8, u8)> {
        match self.mode {
            SizeMode::Exact => vec![(self.h_max, self.w_max)],
            SizeMode::UpTo => (1..=self.h_max)
                .flat_map(|h| (1..=self.w_max).map(move |w| (h, w)))
                .collect(),
        }
    }
}

/// Kraft sum, prefix property and redundancy of a database's code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeCheck {
    pub shapes: usize,
    pub kraft_sum: f64,
    /// Kraft sum is exactly 1.
    pub kraft_complete: bool,
    /// Kraft sum is at most 1.
    pub kraft_within: bool,
    pub prefix_free: bool,
    /// Frequency-weighted mean codeword length.
    pub expected_length: f64,
    /// Entropy of the frequency distribution.
    pub entropy: f64,
}

impl CodeCheck {
    /// Kraft sum at most 1 and exactly 1 for two or more shapes, prefix
    /// free, and within one bit of the frequency entropy.
    pub fn valid(&self) -> bool {
        self.kraft_within
            && (self.shapes < 2 || self.kraft_complete)
            && self.prefix_free
            && self.expected_length <= self.entropy + 1.0 + 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeDatabase {
    shapes: Vec<Shape>,
    frequencies: Vec<u64>,
    codewords: Option<Vec<Codeword>>,
    params: TrainParams,
    digest: u64,
}

/// Horizontal 8-pixel windows: `win[r * width + c]` holds pixels
/// `(r, c..c + 8)` MSB first, zero-padded past the right edge.
fn row_windows(image: &BinaryImage) -> Vec<u8> {
    let (m, n) = (image.height(), image.width());
    let mut win = vec![0u8; m * n];
    for r in 0..m {
        let row = image.row(r);
        let mut acc = 0u8;
        for c in (0..n).rev() {
            acc = (acc >> 1) | (row[c] << 7);
            win[r * n + c] = acc;
        }
    }
    win
}

fn count_size(corpus: &[(BinaryImage, Vec<u8>)], h: u8, w: u8) -> FxHashMap<u64, u64> {
    corpus
        .par_iter()
        .fold(FxHashMap::default, |mut map, (img, win)| {
            let (m, n) = (img.height(), img.width());
            let (hu, wu) = (h as usize, w as usize);
            if hu > m || wu > n {
                return map;
            }
            let shift = 8 - w as u32;
            for r in 0..=m - hu {
                for c in 0..=n - wu {
                    let mut bits = 0u64;
                    for i in 0..hu {
                        bits = (bits << w) | (win[(r + i) * n + c] >> shift) as u64;
                    }
                    *map.entry(bits).or_insert(0) += 1;
                }
            }
            map
        })
        .reduce(FxHashMap::default, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

/// Weights for the 1x1 shapes of a fixed `h x w` codebook. Each image is
/// tiled by `h x w` blocks from its top-left corner; the zeros and ones left
/// over at the right and bottom edges are scaled by (sliding windows) /
/// (tiled blocks), so the unit shapes get the same share of the frequency
/// mass as they get of the placements.
fn tiling_remainder(corpus: &[BinaryImage], h: usize, w: usize) -> [u64; 2] {
    let (left, windows, blocks) = corpus
        .par_iter()
        .map(|img| {
            let (m, n) = (img.height(), img.width());
            let (rows, cols) = (m / h * h, n / w * w);
            let mut ones = 0u64;
            let mut total = 0u64;
            for r in 0..m {
                let row = img.row(r);
                let edge = if r < rows { &row[cols..] } else { row };
                ones += edge.iter().map(|&z| z as u64).sum::<u64>();
                total += edge.len() as u64;
            }
            let windows = if m >= h && n >= w { ((m - h + 1) * (n - w + 1)) as u64 } else { 0 };
            let blocks = ((m / h) * (n / w)) as u64;
            ([total - ones, ones], windows, blocks)
        })
        .reduce(
            || ([0, 0], 0, 0),
            |a, b| ([a.0[0] + b.0[0], a.0[1] + b.0[1]], a.1 + b.1, a.2 + b.2),
        );
    if blocks == 0 {
        return left;
    }
    let scale = |v: u64| (v as u128 * windows as u128 / blocks as u128) as u64;
    [scale(left[0]), scale(left[1])]
}

impl ShapeDatabase {
    /// Mines every rectangle pattern (per `params`) occurring at least
    /// `min_freq` times over all sliding-window positions of the corpus.
    /// The two 1x1 shapes are always kept. In [`SizeMode::Exact`] mode they
    /// are weighted by the edge pixels an `h_max x w_max` tiling leaves over
    /// (see `tiling_remainder`); a shape that would get no weight is kept
    /// with frequency 1 so it can still receive a codeword.
    pub fn train(corpus: &[BinaryImage], params: TrainParams) -> Result<Self, CodebookError> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(CodebookError::EmptyCorpus);
        }
        let prepared: Vec<(BinaryImage, Vec<u8>)> = corpus
            .par_iter()
            .map(|img| (img.clone(), row_windows(img)))
            .collect();

        let mut entries: Vec<(Shape, u64)> = Vec::new();
        for (h, w) in params.sizes() {
            let counts = count_size(&prepared, h, w);
            let unit = h == 1 && w == 1;
            entries.extend(
                counts
                    .into_iter()
                    .filter(|&(_, f)| unit || f >= params.min_freq)
                    .map(|(bits, f)| (Shape { height: h, width: w, bits }, f)),
            );
        }
        let mut units = [0u64; 2];
        if params.mode == SizeMode::Exact && (params.h_max, params.w_max) != (1, 1) {
            units = tiling_remainder(corpus, params.h_max as usize, params.w_max as usize);
        }
        for v in 0..2 {
            let s = Shape::unit(v);
            if !entries.iter().any(|(e, _)| *e == s) {
                entries.push((s, units[v as usize].max(1)));
            }
        }
        Ok(Self::from_entries(entries, params))
    }

    /// Builds a database from explicit (shape, frequency) pairs. Duplicate
    /// shapes have their frequencies summed; the result is canonically ordered
    /// and has no codewords yet.
    pub fn from_entries(entries: Vec<(Shape, u64)>, params: TrainParams) -> Self {
        let mut merged: FxHashMap<Shape, u64> = FxHashMap::default();
        for (s, f) in entries {
            *merged.entry(s).or_insert(0) += f;
        }
        let mut entries: Vec<(Shape, u64)> = merged.into_iter().collect();
        entries.sort_by_key(|&(s, f)| (Reverse(s.area()), Reverse(f), s.bits, s.height));
        let (shapes, frequencies) = entries.into_iter().unzip();
        let mut db = ShapeDatabase {
            shapes,
            frequencies,
            codewords: None,
            params,
            digest: 0,
        };
        db.digest = db.compute_digest();
        db
    }

    /// Assigns a canonical Huffman code over the shape frequencies.
    pub fn assign_codewords(mut self) -> Result<Self, CodebookError> {
        let weights: Vec<u64> = self.frequencies.iter().map(|&f| f.max(1)).collect();
        let lengths = prefix::huffman_lengths(&weights)?;
        self.codewords = Some(prefix::canonical_codewords(&lengths)?);
        self.digest = self.compute_digest();
        Ok(self)
    }

    /// `train` followed by `assign_codewords`.
    pub fn train_coded(corpus: &[BinaryImage], params: TrainParams) -> Result<Self, CodebookError> {
        Self::train(corpus, params)?.assign_codewords()
    }

    /// Re-weights the database by how often the greedy decomposition of
    /// `corpus` places each shape, then Huffman codes it. Shapes that are
    /// never placed are dropped; the 1x1 shapes stay with frequency at
    /// least 1. Sliding-window counts favour small shapes that the greedy
    /// scan rarely uses, so this usually shortens the payload.
    pub fn refit_to_usage(&self, corpus: &[BinaryImage]) -> Result<Self, CodebookError> {
        if corpus.is_empty() {
            return Err(CodebookError::EmptyCorpus);
        }
        let codec = ShapeCodec::new(self).map_err(|_| CodebookError::MissingUnitShapes)?;
        let usage = corpus
            .par_iter()
            .fold(
                || vec![0u64; self.shapes.len()],
                |mut acc, img| {
                    for p in codec.decompose(img).placements {
                        acc[p.shape_id] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; self.shapes.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let entries = self
            .shapes
            .iter()
            .zip(usage)
            .filter(|&(s, u)| u > 0 || s.area() == 1)
            .map(|(&s, u)| (s, u.max(1)))
            .collect();
        Self::from_entries(entries, self.params).assign_codewords()
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    pub fn codewords(&self) -> Option<&[Codeword]> {
        self.codewords.as_deref()
    }

    pub fn code_lengths(&self) -> Option<Vec<u8>> {
        self.codewords
            .as_ref()
            .map(|c| c.iter().map(|cw| cw.length).collect())
    }

    pub fn params(&self) -> TrainParams {
        self.params
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// |D|
    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn total_frequency(&self) -> u64 {
        self.frequencies.iter().sum()
    }

    pub fn has_unit_shapes(&self) -> bool {
        (0..2).all(|v| self.shapes.contains(&Shape::unit(v)))
    }

    /// Mean codeword length weighted by training frequency.
    pub fn expected_code_length(&self) -> Option<f64> {
        self.code_lengths()
            .map(|l| prefix::expected_length(&self.frequencies, &l))
    }

    pub fn frequency_entropy(&self) -> f64 {
        prefix::frequency_entropy(&self.frequencies)
    }

    pub fn kraft_sum(&self) -> Option<f64> {
        self.code_lengths().map(|l| prefix::kraft_sum(&l))
    }

    /// Validity figures of the assigned code, if any.
    pub fn code_check(&self) -> Option<CodeCheck> {
        let cws = self.codewords.as_deref()?;
        let lengths: Vec<u8> = cws.iter().map(|c| c.length).collect();
        // exact Kraft sum scaled by 2^64: every length is at most 64
        let scaled: u128 = lengths.iter().map(|&l| 1u128 << (64 - l as u32)).sum();
        Some(CodeCheck {
            shapes: cws.len(),
            kraft_sum: prefix::kraft_sum(&lengths),
            kraft_complete: scaled == 1u128 << 64,
            kraft_within: scaled <= 1u128 << 64,
            prefix_free: prefix::is_prefix_free(cws),
            expected_length: self.expected_code_length()?,
            entropy: self.frequency_entropy(),
        })
    }

    fn payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.shapes.len() * 20);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        out.push(self.params.h_max);
        out.push(self.params.w_max);
        out.extend_from_slice(&self.params.min_freq.to_be_bytes());
        out.push(match self.params.mode {
            SizeMode::UpTo => 0,
            SizeMode::Exact => 1,
        });
        out.push(self.codewords.is_some() as u8);
        out.extend_from_slice(&(self.shapes.len() as u32).to_be_bytes());
        for (i, s) in self.shapes.iter().enumerate() {
            out.push(s.height);
            out.push(s.width);
            push_packed(&mut out, s.bits, s.area() as u32);
            out.extend_from_slice(&self.frequencies[i].to_be_bytes());
            match &self.codewords {
                Some(cws) => {
                    out.push(cws[i].length);
                    push_packed(&mut out, cws[i].bits, cws[i].length as u32);
                }
                None => out.push(0),
            }
        }
        out
    }

    fn compute_digest(&self) -> u64 {
        digest64(&self.payload())
    }

    /// Serializes to the `SCDB` container; all integers big-endian, trailing
    /// 64-bit digest over everything before it.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.payload();
        out.extend_from_slice(&self.digest.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodebookError> {
        if bytes.len() < 6 {
            return Err(CodebookError::UnknownVersion(None));
        }
        if &bytes[..4] != MAGIC {
            return Err(CodebookError::BadMagic);
        }
        let version = u16::from_be_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(CodebookError::UnknownVersion(Some(version)));
        }
        if bytes.len() < 6 + 8 {
            return Err(CodebookError::Corrupt("file too short".into()));
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_be_bytes(tail.try_into().expect("8 bytes"));
        let computed = digest64(payload);
        if stored != computed {
            return Err(CodebookError::DigestMismatch { stored, computed });
        }

        let mut rd = ByteReader { bytes: payload, pos: 6 };
        let h_max = rd.u8()?;
        let w_max = rd.u8()?;
        let min_freq = rd.u64()?;
        let mode = match rd.u8()? {
            0 => SizeMode::UpTo,
            1 => SizeMode::Exact,
            m => return Err(CodebookError::Corrupt(format!("size mode {m}"))),
        };
        let params = TrainParams {
            h_max,
            w_max,
            min_freq,
            mode,
        };
        params.validate()?;
        let coded = match rd.u8()? {
            0 => false,
            1 => true,
            f => return Err(CodebookError::Corrupt(format!("codeword flag {f}"))),
        };
        let count = rd.u32()? as usize;
        let mut shapes = Vec::with_capacity(count.min(1 << 20));
        let mut frequencies = Vec::with_capacity(count.min(1 << 20));
        let mut codewords = Vec::new();
        for _ in 0..count {
            let h = rd.u8()?;
            let w = rd.u8()?;
            let area = h as u32 * w as u32;
            if !(1..=64).contains(&area) {
                return Err(CodebookError::Corrupt(format!("shape {h}x{w}")));
            }
            let bits = rd.packed(area)?;
            shapes.push(Shape::new(h, w, bits)?);
            frequencies.push(rd.u64()?);
            let len = rd.u8()?;
            if coded {
                if len == 0 || len > prefix::MAX_CODE_LENGTH {
                    return Err(CodebookError::Corrupt(format!("codeword length {len}")));
                }
                codewords.push(Codeword {
                    bits: rd.packed(len as u32)?,
                    length: len,
                });
            } else if len != 0 {
                return Err(CodebookError::Corrupt("unexpected codeword".into()));
            }
        }
        if rd.pos != payload.len() {
            return Err(CodebookError::Corrupt("trailing bytes".into()));
        }

        let db = ShapeDatabase {
            shapes,
            frequencies,
            codewords: coded.then_some(codewords),
            params,
            digest: stored,
        };
        db.validate()?;
        Ok(db)
    }

    /// Structural checks: canonical order, uniqueness, unit shapes, and a
    /// code that matches the canonical assignment for its lengths.
    pub fn validate(&self) -> Result<(), CodebookError> {
        if !self.has_unit_shapes() {
            return Err(CodebookError::MissingUnitShapes);
        }
        let key = |i: usize| {
            let s = self.shapes[i];
            (Reverse(s.area()), Reverse(self.frequencies[i]), s.bits, s.height)
        };
        for i in 1..self.shapes.len() {
            if key(i - 1) >= key(i) {
                return Err(CodebookError::Corrupt(
                    "shapes not in canonical order or duplicated".into(),
                ));
            }
        }
        if let Some(cws) = &self.codewords {
            let lengths: Vec<u8> = cws.iter().map(|c| c.length).collect();
            let canonical = prefix::canonical_codewords(&lengths)?;
            if &canonical != cws {
                return Err(CodebookError::Corrupt("codewords are not canonical".into()));
            }
        }
        Ok(())
    }
}

fn digest64(bytes: &[u8]) -> u64 {
    let d = Sha256::digest(bytes);
    u64::from_be_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Appends the low `nbits` of `value` MSB first, padded to whole bytes.
fn push_packed(out: &mut Vec<u8>, value: u64, nbits: u32) {
    let nbytes = nbits.div_ceil(8);
    let aligned = (value as u128) << (nbytes * 8 - nbits);
    for i in (0..nbytes).rev() {
        out.push((aligned >> (i * 8)) as u8);
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl ByteReader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CodebookError> {
        let s = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| CodebookError::Corrupt("truncated codebook".into()))?;
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CodebookError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CodebookError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4")))
    }

    fn u64(&mut self) -> Result<u64, CodebookError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8")))
    }

    fn packed(&mut self, nbits: u32) -> Result<u64, CodebookError> {
        let nbytes = nbits.div_ceil(8) as usize;
        let mut acc = 0u128;
        for &b in self.take(nbytes)? {
            acc = (acc << 8) | b as u128;
        }
        let pad = nbytes as u32 * 8 - nbits;
        if acc & ((1u128 << pad) - 1) != 0 {
            return Err(CodebookError::Corrupt("non-zero padding bits".into()));
        }
        Ok((acc >> pad) as u64)
    }
}
