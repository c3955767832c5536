//! Shape decomposition and the `SCIM` compressed container.
//!
//! An image is partitioned into shapes by a greedy raster scan: at each
//! first-uncovered pixel the largest matching database shape is placed.
//! Because the anchor of every placement is a function of the placements
//! before it, the container stores only the shape codewords; the decoder
//! re-derives every position.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bitio::{BitError, BitReader, BitStream};
use crate::codebook::{Shape, ShapeDatabase};
use crate::entropy::MarkovModel;
use crate::image::BinaryImage;
use crate::prefix::{PrefixDecoder, PrefixError};

const MAGIC: &[u8; 4] = b"SCIM";
const VERSION: u16 = 1;
/// magic + version + M + N + digest + c
pub const HEADER_BYTES: usize = 4 + 2 + 4 + 4 + 8 + 4;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("shape database lacks the mandatory 1x1 shapes")]
    MissingUnitShapes,
    #[error("shape database has no codewords assigned")]
    NoCodewords,
    #[error("container was written for codebook {container:016x}, got {codebook:016x}")]
    DigestMismatch { container: u64, codebook: u64 },
    #[error("not a compressed image container")]
    BadMagic,
    #[error("unknown container version {0:?}")]
    UnknownVersion(Option<u16>),
    #[error("corrupt container: {0}")]
    Corrupt(String),
    #[error("truncated stream")]
    Truncated,
    #[error("codeword not in code tree")]
    InvalidCode,
    #[error("image of {0} pixels is too large for the container")]
    TooLarge(usize),
    #[error("context order {stats} does not match model order {model}")]
    OrderMismatch { stats: usize, model: usize },
}

impl From<PrefixError> for CodecError {
    fn from(e: PrefixError) -> Self {
        match e {
            PrefixError::Bits(BitError::Truncated { .. }) => CodecError::Truncated,
            PrefixError::InvalidCode => CodecError::InvalidCode,
            other => CodecError::Corrupt(other.to_string()),
        }
    }
}

/// A shape filled at column `x`, row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub shape_id: usize,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub placements: Vec<Placement>,
    pub height: usize,
    pub width: usize,
}

impl Decomposition {
    /// c(t)
    pub fn count(&self) -> usize {
        self.placements.len()
    }

    /// t
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Replays the placements onto a blank canvas.
    pub fn reconstruct(&self, db: &ShapeDatabase) -> Result<BinaryImage, CodecError> {
        let mut canvas = Canvas::new(self.height, self.width);
        for p in &self.placements {
            let shape = db
                .shapes()
                .get(p.shape_id)
                .ok_or_else(|| CodecError::Corrupt(format!("shape id {}", p.shape_id)))?;
            if canvas.next_anchor() != Some((p.y, p.x)) {
                return Err(CodecError::Corrupt("placement is not at the next anchor".into()));
            }
            canvas.place(shape)?;
        }
        canvas.finish()
    }
}

/// Fill state shared by the encoder-side replay and the decoder.
struct Canvas {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
    covered: Vec<bool>,
    cursor: usize,
}

impl Canvas {
    fn new(height: usize, width: usize) -> Self {
        Canvas {
            height,
            width,
            pixels: vec![0; height * width],
            covered: vec![false; height * width],
            cursor: 0,
        }
    }

    fn next_anchor(&mut self) -> Option<(usize, usize)> {
        while self.cursor < self.covered.len() && self.covered[self.cursor] {
            self.cursor += 1;
        }
        (self.cursor < self.covered.len()).then(|| (self.cursor / self.width, self.cursor % self.width))
    }

    fn place(&mut self, shape: &Shape) -> Result<(), CodecError> {
        let (r0, c0) = self
            .next_anchor()
            .ok_or_else(|| CodecError::Corrupt("more shapes than uncovered pixels".into()))?;
        let (h, w) = (shape.height as usize, shape.width as usize);
        if r0 + h > self.height || c0 + w > self.width {
            return Err(CodecError::Corrupt(format!(
                "shape {h}x{w} at ({r0},{c0}) overflows image bounds"
            )));
        }
        for i in 0..h {
            for j in 0..w {
                let idx = (r0 + i) * self.width + c0 + j;
                if self.covered[idx] {
                    return Err(CodecError::Corrupt(format!(
                        "shape at ({r0},{c0}) overlaps pixel ({},{})",
                        r0 + i,
                        c0 + j
                    )));
                }
            }
        }
        for i in 0..h {
            for j in 0..w {
                let idx = (r0 + i) * self.width + c0 + j;
                self.covered[idx] = true;
                self.pixels[idx] = shape.pixel(i, j);
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<BinaryImage, CodecError> {
        if let Some((r, c)) = self.next_anchor() {
            return Err(CodecError::Corrupt(format!("pixel ({r},{c}) left uncovered")));
        }
        BinaryImage::new(self.height, self.width, self.pixels)
            .map_err(|e| CodecError::Corrupt(e.to_string()))
    }
}

/// All shapes of one rectangle size, keyed by pattern.
struct SizeIndex {
    height: u8,
    width: u8,
    by_pattern: FxHashMap<u64, usize>,
}

/// Lookup structures over a [`ShapeDatabase`], reusable across images.
pub struct ShapeCodec<'a> {
    db: &'a ShapeDatabase,
    /// Size indexes grouped by area, largest area first.
    areas: Vec<Vec<SizeIndex>>,
    decoder: Option<PrefixDecoder>,
}

impl<'a> ShapeCodec<'a> {
    pub fn new(db: &'a ShapeDatabase) -> Result<Self, CodecError> {
        if !db.has_unit_shapes() {
            return Err(CodecError::MissingUnitShapes);
        }
        let mut by_size: BTreeMap<(usize, u8, u8), FxHashMap<u64, usize>> = BTreeMap::new();
        for (id, s) in db.shapes().iter().enumerate() {
            by_size
                .entry((s.area(), s.height, s.width))
                .or_default()
                .insert(s.bits, id);
        }
        let mut areas: Vec<Vec<SizeIndex>> = Vec::new();
        let mut last_area = None;
        for ((area, height, width), by_pattern) in by_size.into_iter().rev() {
            if last_area != Some(area) {
                areas.push(Vec::new());
                last_area = Some(area);
            }
            areas.last_mut().expect("pushed").push(SizeIndex {
                height,
                width,
                by_pattern,
            });
        }
        let decoder = match db.code_lengths() {
            Some(lengths) => Some(PrefixDecoder::from_lengths(&lengths)?),
            None => None,
        };
        Ok(ShapeCodec { db, areas, decoder })
    }

    pub fn database(&self) -> &ShapeDatabase {
        self.db
    }

    /// Greedy raster decomposition: at each first-uncovered pixel, place the
    /// largest-area shape that fits in bounds, covers only uncovered pixels
    /// and matches the image exactly. Equal areas resolve to the lowest
    /// canonical index (higher frequency first).
    pub fn decompose(&self, image: &BinaryImage) -> Decomposition {
        let (m, n) = (image.height(), image.width());
        let mut covered = vec![false; m * n];
        let mut placements = Vec::new();
        let mut cursor = 0;
        while cursor < covered.len() {
            if covered[cursor] {
                cursor += 1;
                continue;
            }
            let (r, c) = (cursor / n, cursor % n);
            let (shape_id, h, w) = self.best_match(image, &covered, r, c);
            for i in 0..h {
                let start = (r + i) * n + c;
                covered[start..start + w].iter_mut().for_each(|x| *x = true);
            }
            placements.push(Placement {
                shape_id,
                x: c,
                y: r,
            });
            cursor += w;
        }
        Decomposition {
            placements,
            height: m,
            width: n,
        }
    }

    fn best_match(
        &self,
        image: &BinaryImage,
        covered: &[bool],
        r: usize,
        c: usize,
    ) -> (usize, usize, usize) {
        let (m, n) = (image.height(), image.width());
        for group in &self.areas {
            let mut best: Option<(usize, usize, usize)> = None;
            for size in group {
                let (h, w) = (size.height as usize, size.width as usize);
                if r + h > m || c + w > n {
                    continue;
                }
                let free = (0..h).all(|i| {
                    let start = (r + i) * n + c;
                    covered[start..start + w].iter().all(|&x| !x)
                });
                if !free {
                    continue;
                }
                let bits = Shape::extract(image, r, c, size.height, size.width);
                if let Some(&id) = size.by_pattern.get(&bits) {
                    if best.is_none_or(|b| id < b.0) {
                        best = Some((id, h, w));
                    }
                }
            }
            if let Some(b) = best {
                return b;
            }
        }
        unreachable!("1x1 shapes match every uncovered pixel")
    }

    fn decoder(&self) -> Result<&PrefixDecoder, CodecError> {
        self.decoder.as_ref().ok_or(CodecError::NoCodewords)
    }

    /// Concatenated codewords of a decomposition.
    pub fn payload(&self, decomp: &Decomposition) -> Result<BitStream, CodecError> {
        let cws = self.db.codewords().ok_or(CodecError::NoCodewords)?;
        let bits: usize = decomp
            .placements
            .iter()
            .map(|p| cws[p.shape_id].length as usize)
            .sum();
        let mut stream = BitStream::with_capacity_bits(bits);
        for p in &decomp.placements {
            stream.write_codeword(cws[p.shape_id]);
        }
        Ok(stream)
    }

    pub fn encode(&self, image: &BinaryImage) -> Result<Vec<u8>, CodecError> {
        self.decoder()?;
        let decomp = self.decompose(image);
        self.encode_decomposition(&decomp)
    }

    pub fn encode_decomposition(&self, decomp: &Decomposition) -> Result<Vec<u8>, CodecError> {
        let payload = self.payload(decomp)?;
        let dim = |v: usize| u32::try_from(v).map_err(|_| CodecError::TooLarge(decomp.pixels()));
        let mut out = Vec::with_capacity(HEADER_BYTES + payload.as_bytes().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        out.extend_from_slice(&dim(decomp.height)?.to_be_bytes());
        out.extend_from_slice(&dim(decomp.width)?.to_be_bytes());
        out.extend_from_slice(&self.db.digest().to_be_bytes());
        out.extend_from_slice(&dim(decomp.count())?.to_be_bytes());
        out.extend_from_slice(payload.as_bytes());
        Ok(out)
    }

    pub fn decode(&self, container: &[u8]) -> Result<BinaryImage, CodecError> {
        let header = ContainerHeader::parse(container)?;
        if header.digest != self.db.digest() {
            return Err(CodecError::DigestMismatch {
                container: header.digest,
                codebook: self.db.digest(),
            });
        }
        let decoder = self.decoder()?;
        let (m, n) = (header.height as usize, header.width as usize);
        if m == 0 || n == 0 {
            return Err(CodecError::Corrupt("zero image dimension".into()));
        }
        let t = m
            .checked_mul(n)
            .ok_or_else(|| CodecError::Corrupt("dimension overflow".into()))?;
        if header.count as usize > t {
            return Err(CodecError::Corrupt("more shapes than pixels".into()));
        }
        let payload = &container[HEADER_BYTES..];
        let mut reader = BitReader::from_slice(payload);
        let mut canvas = Canvas::new(m, n);
        for _ in 0..header.count {
            let id = decoder.decode(&mut reader)?;
            canvas.place(&self.db.shapes()[id])?;
        }
        let rest = reader.remaining();
        if rest >= 8 || (rest > 0 && reader.read_bits(rest as u32).map_err(|_| CodecError::Truncated)? != 0) {
            return Err(CodecError::Corrupt("trailing data after payload".into()));
        }
        canvas.finish()
    }

    /// Cost quantities for one decomposition.
    pub fn cost(&self, decomp: &Decomposition) -> CostReport {
        let payload_bits = self.db.codewords().map(|cws| {
            decomp
                .placements
                .iter()
                .map(|p| cws[p.shape_id].length as u64)
                .sum::<u64>()
        });
        CostReport::new(decomp.count(), decomp.pixels(), self.db.len(), payload_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub height: u32,
    pub width: u32,
    pub digest: u64,
    pub count: u32,
}

impl ContainerHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < 6 {
            return Err(if bytes.len() >= 4 && &bytes[..4] != MAGIC {
                CodecError::BadMagic
            } else {
                CodecError::Truncated
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = u16::from_be_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(CodecError::UnknownVersion(Some(version)));
        }
        if bytes.len() < HEADER_BYTES {
            return Err(CodecError::Truncated);
        }
        let u32_at = |i: usize| u32::from_be_bytes(bytes[i..i + 4].try_into().expect("4"));
        Ok(ContainerHeader {
            height: u32_at(6),
            width: u32_at(10),
            digest: u64::from_be_bytes(bytes[14..22].try_into().expect("8")),
            count: u32_at(22),
        })
    }
}

/// Cost figures for one image, all per pixel and in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub shapes: usize,
    pub pixels: usize,
    pub dictionary_size: usize,
    /// Sum of codeword lengths, if the database is coded.
    pub payload_bits: Option<u64>,
    /// (c log c + c log |D|) / t
    pub bound_bpp: f64,
    /// (c / t) log t
    pub metric: f64,
}

impl CostReport {
    pub fn new(shapes: usize, pixels: usize, dictionary_size: usize, payload_bits: Option<u64>) -> Self {
        let (c, t, d) = (shapes as f64, pixels as f64, dictionary_size as f64);
        let c_log_c = if shapes > 0 { c * c.log2() } else { 0.0 };
        CostReport {
            shapes,
            pixels,
            dictionary_size,
            payload_bits,
            bound_bpp: (c_log_c + c * d.log2()) / t,
            metric: c * t.log2() / t,
        }
    }

    /// c / t
    pub fn shape_pixel_ratio(&self) -> f64 {
        self.shapes as f64 / self.pixels as f64
    }

    /// Payload bits per pixel, container header excluded.
    pub fn realized_bpp(&self) -> Option<f64> {
        self.payload_bits.map(|b| b as f64 / self.pixels as f64)
    }

    /// Whole container (header plus byte-padded payload) per pixel.
    pub fn realized_bpp_with_header(&self) -> Option<f64> {
        self.payload_bits
            .map(|b| ((HEADER_BYTES as u64 * 8 + b.div_ceil(8) * 8) as f64) / self.pixels as f64)
    }

    /// Compression ratio against one bit per pixel.
    pub fn ratio(&self) -> Option<f64> {
        self.payload_bits.map(|b| self.pixels as f64 / b as f64)
    }
}

pub fn decompose(image: &BinaryImage, db: &ShapeDatabase) -> Result<Decomposition, CodecError> {
    Ok(ShapeCodec::new(db)?.decompose(image))
}

pub fn encode(image: &BinaryImage, db: &ShapeDatabase) -> Result<Vec<u8>, CodecError> {
    ShapeCodec::new(db)?.encode(image)
}

pub fn decode(container: &[u8], db: &ShapeDatabase) -> Result<BinaryImage, CodecError> {
    ShapeCodec::new(db)?.decode(container)
}

/// Cost report for a decomposition; `bound_bpp` is the uniform-code bound.
pub fn theoretical_cost(decomp: &Decomposition, db: &ShapeDatabase) -> Result<CostReport, CodecError> {
    Ok(ShapeCodec::new(db)?.cost(decomp))
}

/// Per-placement context used by the lemma checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementContext {
    /// Raster index of the anchor pixel.
    pub anchor: usize,
    pub height: usize,
    pub width: usize,
    /// The `k` raster bits before the anchor, most recent bit lowest;
    /// positions before the start of the image read as 0.
    pub context: u32,
}

impl PlacementContext {
    pub fn size(&self) -> usize {
        self.height * self.width
    }

    /// Raster indices of the shape's pixels in row-major shape order.
    pub fn cells(&self, image_width: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.height).flat_map(move |i| {
            (0..self.width).map(move |j| self.anchor + i * image_width + j)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    /// c_lw
    pub count: u64,
    /// log2 of the sum over the group of P(s_i | w_i)
    pub log2_prob_sum: f64,
}

impl GroupStats {
    pub fn mean_prob(&self) -> f64 {
        (self.log2_prob_sum - (self.count as f64).log2()).exp2()
    }
}

/// Counts c_lw of shapes grouped by size `l` and preceding context `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionStats {
    pub k: usize,
    pub pixels: usize,
    pub image_width: usize,
    pub placements: Vec<PlacementContext>,
    /// Keyed by (l, w).
    pub groups: BTreeMap<(usize, u32), GroupStats>,
    /// log2 of alpha, the largest group sum of P(s_i | w_i).
    pub log2_alpha: f64,
}

impl DecompositionStats {
    /// c
    pub fn shapes(&self) -> usize {
        self.placements.len()
    }

    pub fn alpha(&self) -> f64 {
        self.log2_alpha.exp2()
    }

    pub fn max_group_mean(&self) -> f64 {
        self.groups
            .values()
            .map(GroupStats::mean_prob)
            .fold(0.0, f64::max)
    }
}

/// The `k` bits before raster index `at`, zero-padded at the start.
pub fn context_before(seq: &[u8], at: usize, k: usize) -> u32 {
    let mut ctx = 0u32;
    for j in (0..k).rev() {
        let bit = if at > j { seq[at - 1 - j] as u32 } else { 0 };
        ctx = (ctx << 1) | bit;
    }
    ctx
}

/// log2 P(shape pixels | w) under `model`, chaining contexts through the
/// shape's own pixels.
pub fn shape_log2_prob(model: &MarkovModel, context: u32, pixels: impl Iterator<Item = u8>) -> f64 {
    let mut ctx = context;
    let mut lp = 0.0;
    for p in pixels {
        lp += model.log2_prob(ctx, p);
        ctx = model.push_context(ctx, p);
    }
    lp
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

pub fn decomposition_stats(
    decomp: &Decomposition,
    image: &BinaryImage,
    db: &ShapeDatabase,
    model: &MarkovModel,
    k: usize,
) -> Result<DecompositionStats, CodecError> {
    if model.order() != k {
        return Err(CodecError::OrderMismatch {
            stats: k,
            model: model.order(),
        });
    }
    if k == 0 || k > 16 {
        return Err(CodecError::Corrupt(format!("context order {k} outside 1..=16")));
    }
    let seq = image.raster_sequence();
    let n = image.width();
    let mut groups: BTreeMap<(usize, u32), GroupStats> = BTreeMap::new();
    let mut placements = Vec::with_capacity(decomp.count());
    for p in &decomp.placements {
        let shape = db.shapes()[p.shape_id];
        let anchor = p.y * n + p.x;
        let pc = PlacementContext {
            anchor,
            height: shape.height as usize,
            width: shape.width as usize,
            context: context_before(seq, anchor, k),
        };
        let lp = shape_log2_prob(model, pc.context, pc.cells(n).map(|i| seq[i]));
        let g = groups.entry((pc.size(), pc.context)).or_insert(GroupStats {
            count: 0,
            log2_prob_sum: f64::NEG_INFINITY,
        });
        g.count += 1;
        g.log2_prob_sum = log2_add(g.log2_prob_sum, lp);
        placements.push(pc);
    }
    let log2_alpha = groups
        .values()
        .map(|g| g.log2_prob_sum)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecompositionStats {
        k,
        pixels: image.len(),
        image_width: n,
        placements,
        groups,
        log2_alpha,
    })
}
