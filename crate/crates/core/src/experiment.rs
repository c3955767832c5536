//! Corpus-level runs behind the CLI report commands: per-class MNIST
//! statistics, fixed-size sweeps over the simulated sources, and the growth
//! of the shape count with image size.
//!
//! Every run is deterministic for fixed inputs and seeds; per-image work is
//! spread over the rayon pool and reduced in a fixed order.

use rayon::prelude::*;

use crate::codebook::{CodeCheck, ShapeDatabase, TrainParams};
use crate::codec::ShapeCodec;
use crate::entropy::{analytic_entropy_rate, MarkovModel};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, LabeledDataset};
use crate::simulate::{self, BirthDeathParams};

/// Means of the per-image cost figures over a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusCost {
    pub images: usize,
    pub pixels: u64,
    pub shapes: u64,
    pub payload_bits: u64,
    /// mean c / t
    pub shape_pixel_ratio: f64,
    /// mean (c / t) log2 t
    pub metric: f64,
    /// mean payload bits per pixel
    pub bpp: f64,
    /// mean (c log c + c log |D|) / t
    pub bound_bpp: f64,
    /// mean t / payload bits
    pub ratio: f64,
}

/// Decomposes and codes every image; images are not round-tripped.
pub fn corpus_cost(codec: &ShapeCodec, images: &[BinaryImage]) -> Result<CorpusCost> {
    if images.is_empty() {
        return Err(Error::Invalid("cannot cost an empty corpus".into()));
    }
    if codec.database().codewords().is_none() {
        return Err(crate::codec::CodecError::NoCodewords.into());
    }
    let reports: Vec<_> = images.par_iter().map(|img| codec.cost(&codec.decompose(img))).collect();
    let n = reports.len() as f64;
    let mean = |f: &dyn Fn(&crate::codec::CostReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Ok(CorpusCost {
        images: reports.len(),
        pixels: reports.iter().map(|r| r.pixels as u64).sum(),
        shapes: reports.iter().map(|r| r.shapes as u64).sum(),
        payload_bits: reports.iter().map(|r| r.payload_bits.unwrap_or(0)).sum(),
        shape_pixel_ratio: mean(&|r| r.shape_pixel_ratio()),
        metric: mean(&|r| r.metric),
        bpp: mean(&|r| r.realized_bpp().unwrap_or(f64::NAN)),
        bound_bpp: mean(&|r| r.bound_bpp),
        ratio: mean(&|r| r.ratio().unwrap_or(f64::NAN)),
    })
}

/// Encodes and decodes every image, returning the indexes of images that
/// did not come back bit-exact. Codec errors abort the run.
pub fn round_trip_failures(codec: &ShapeCodec, images: &[BinaryImage]) -> Result<Vec<usize>> {
    let outcomes: Vec<Result<bool>> = images
        .par_iter()
        .map(|img| {
            let bytes = codec.encode(img)?;
            Ok(codec.decode(&bytes)? == *img)
        })
        .collect();
    let mut failed = Vec::new();
    for (i, ok) in outcomes.into_iter().enumerate() {
        if !ok? {
            failed.push(i);
        }
    }
    Ok(failed)
}

/// Order-`k` entropy-rate estimate pooled over a corpus: one model fitted on
/// all images (no context crosses an image boundary), scored on the same
/// images.
pub fn pooled_entropy_rate(images: &[BinaryImage], k: usize) -> Result<f64> {
    let parts: Vec<MarkovModel> = images
        .par_iter()
        .map(|img| {
            let mut m = MarkovModel::new(k)?;
            m.update(img.raster_sequence());
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut model = MarkovModel::new(k)?;
    for m in &parts {
        model.merge(m)?;
    }
    let scored: Vec<(f64, usize)> = images
        .par_iter()
        .filter(|img| img.len() > k)
        .map(|img| Ok((model.log2_likelihood(img.raster_sequence())?, img.len() - k)))
        .collect::<Result<_>>()?;
    let positions: usize = scored.iter().map(|s| s.1).sum();
    if positions == 0 {
        return Err(crate::entropy::EntropyError::TooShort { len: 0, k }.into());
    }
    Ok(-scored.iter().map(|s| s.0).sum::<f64>() / positions as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnistConfig {
    pub params: TrainParams,
    pub threshold: u8,
    /// Cap on images per class, applied to each split.
    pub limit: Option<usize>,
}

impl Default for MnistConfig {
    /// Shapes up to 8x8: digits are mostly large blank or stroke regions.
    fn default() -> Self {
        MnistConfig {
            params: TrainParams::up_to(8, 8, crate::codebook::DEFAULT_MIN_FREQ),
            threshold: crate::image::DEFAULT_THRESHOLD,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnistRow {
    pub class: u8,
    pub train_images: usize,
    pub test_images: usize,
    pub dictionary_size: usize,
    pub code: CodeCheck,
    pub cost: CorpusCost,
}

/// One codebook per digit class, trained on that class's training images
/// and evaluated on its test images. Classes absent from either split are
/// skipped.
pub fn mnist_table(train: &LabeledDataset, test: &LabeledDataset, cfg: &MnistConfig) -> Result<Vec<MnistRow>> {
    let mut rows = Vec::new();
    for class in 0..10u8 {
        let cap = |mut v: Vec<BinaryImage>| {
            if let Some(n) = cfg.limit {
                v.truncate(n);
            }
            v
        };
        let train_imgs = cap(train.class(class, cfg.threshold));
        let test_imgs = cap(test.class(class, cfg.threshold));
        if train_imgs.is_empty() || test_imgs.is_empty() {
            continue;
        }
        let db = ShapeDatabase::train_coded(&train_imgs, cfg.params)?;
        let codec = ShapeCodec::new(&db)?;
        rows.push(MnistRow {
            class,
            train_images: train_imgs.len(),
            test_images: test_imgs.len(),
            dictionary_size: db.len(),
            code: db.code_check().expect("coded database"),
            cost: corpus_cost(&codec, &test_imgs)?,
        });
    }
    if rows.is_empty() {
        return Err(crate::codebook::CodebookError::EmptyCorpus.into());
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Preset indexes, 1-based.
    pub cases: Vec<usize>,
    /// Square shape sides.
    pub sizes: Vec<u8>,
    pub train_images: usize,
    pub test_images: usize,
    pub height: usize,
    pub width: usize,
    /// Context order of the entropy-rate estimate.
    pub k: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            cases: (1..=simulate::CASE_FLIP_PROBS.len()).collect(),
            sizes: vec![1, 2, 3, 4],
            train_images: 500,
            test_images: 500,
            height: 100,
            width: 100,
            k: 4,
            seed: 2021,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub case: usize,
    pub p01: f64,
    pub p10: f64,
    pub n: u8,
    pub dictionary_size: usize,
    pub code: CodeCheck,
    pub cost: CorpusCost,
    pub entropy_estimate: f64,
    pub entropy_analytic: f64,
}

/// Training and held-out corpus seeds for preset `case`.
fn corpus_seeds(seed: u64, case: usize) -> (u64, u64) {
    let base = 2 * case as u64;
    (simulate::split_seed(seed, base), simulate::split_seed(seed, base + 1))
}

/// Fixed `n x n` codebooks per preset: every observed `n x n` pattern of the
/// training corpus, Huffman coded, evaluated on a held-out corpus from the
/// same source.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.train_images == 0 || cfg.test_images == 0 {
        return Err(Error::Invalid("sweep needs at least one training and one test image".into()));
    }
    let mut rows = Vec::new();
    for &case in &cfg.cases {
        let params = BirthDeathParams::case(case)?;
        let (p01, p10) = simulate::transition_probs(&params);
        let (train_seed, test_seed) = corpus_seeds(cfg.seed, case);
        let train = simulate::generate_corpus(&params, cfg.train_images, cfg.height, cfg.width, train_seed)?;
        let test = simulate::generate_corpus(&params, cfg.test_images, cfg.height, cfg.width, test_seed)?;
        let entropy_estimate = pooled_entropy_rate(&test, cfg.k)?;
        let entropy_analytic = analytic_entropy_rate(p01, p10)?;
        for &n in &cfg.sizes {
            let db = ShapeDatabase::train_coded(&train, TrainParams::fixed(n))?;
            let codec = ShapeCodec::new(&db)?;
            rows.push(SweepRow {
                case,
                p01,
                p10,
                n,
                dictionary_size: db.len(),
                code: db.code_check().expect("coded database"),
                cost: corpus_cost(&codec, &test)?,
                entropy_estimate,
                entropy_analytic,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub source: BirthDeathParams,
    /// Square image sides; t = side².
    pub sides: Vec<usize>,
    /// Shape bounds `(h_max, w_max)` for each side.
    pub shapes: Vec<(u8, u8)>,
    /// Training images per side, each of that side's size.
    pub train_images: usize,
    /// Evaluation pixels per side, rounded up to whole images.
    pub test_pixels: usize,
    pub min_freq: u64,
    pub k: usize,
    pub seed: u64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            source: BirthDeathParams::case(2).expect("preset 2 exists"),
            sides: vec![100, 316, 1000],
            shapes: vec![(1, 8), (2, 8), (3, 8)],
            train_images: 20,
            test_pixels: 2_000_000,
            min_freq: crate::codebook::DEFAULT_MIN_FREQ,
            k: 4,
            seed: 2021,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub side: usize,
    pub pixels: usize,
    pub train_images: usize,
    pub dictionary_size: usize,
    pub code: CodeCheck,
    pub cost: CorpusCost,
    pub entropy_estimate: f64,
}

impl ConvergeRow {
    /// |bpp - entropy estimate|
    pub fn gap(&self) -> f64 {
        (self.cost.bpp - self.entropy_estimate).abs()
    }
}

/// Trains a codebook on `train` and reports costs and the entropy estimate
/// on `test`.
pub fn size_point(train: &[BinaryImage], test: &[BinaryImage], params: TrainParams, k: usize) -> Result<ConvergeRow> {
    let first = test
        .first()
        .ok_or_else(|| Error::Invalid("empty evaluation corpus".into()))?;
    let db = ShapeDatabase::train_coded(train, params)?;
    let codec = ShapeCodec::new(&db)?;
    Ok(ConvergeRow {
        side: first.width(),
        pixels: first.len(),
        train_images: train.len(),
        dictionary_size: db.len(),
        code: db.code_check().expect("coded database"),
        cost: corpus_cost(&codec, test)?,
        entropy_estimate: pooled_entropy_rate(test, k)?,
    })
}

/// One codebook per image size, trained on images of that size from the
/// same source. Larger images get taller shapes and proportionally more
/// training pixels, so the database grows with t.
pub fn converge(cfg: &ConvergeConfig) -> Result<Vec<ConvergeRow>> {
    if cfg.test_pixels == 0 || cfg.train_images == 0 {
        return Err(Error::Invalid("converge needs training images and test pixels".into()));
    }
    if cfg.shapes.len() != cfg.sides.len() {
        return Err(Error::Invalid(format!(
            "{} image sides but {} shape bounds",
            cfg.sides.len(),
            cfg.shapes.len()
        )));
    }
    let mut rows = Vec::new();
    for (i, (&side, &(h, w))) in cfg.sides.iter().zip(&cfg.shapes).enumerate() {
        if side == 0 {
            return Err(Error::Invalid("image side must be positive".into()));
        }
        let t = side * side;
        let (train_seed, test_seed) = corpus_seeds(cfg.seed, i);
        let train = simulate::generate_corpus(&cfg.source, cfg.train_images, side, side, train_seed)?;
        let test = simulate::generate_corpus(&cfg.source, cfg.test_pixels.div_ceil(t), side, side, test_seed)?;
        rows.push(size_point(&train, &test, TrainParams::up_to(h, w, cfg.min_freq), cfg.k)?);
    }
    Ok(rows)
}
