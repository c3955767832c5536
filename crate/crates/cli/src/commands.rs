use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use shapecode::codebook::{ShapeDatabase, SizeMode, TrainParams, DEFAULT_MIN_FREQ, DEFAULT_SHAPE_SIDE};
use shapecode::codec::{self, ShapeCodec};
use shapecode::entropy::{self, MarkovModel};
use shapecode::experiment::{self, ConvergeConfig, MnistConfig, SweepConfig};
use shapecode::image::{self, BinaryImage, DEFAULT_THRESHOLD};
use shapecode::simulate::{self, BirthDeathParams, GENERATOR_VERSION};

use crate::report::{fmt_f, join, print_pairs, write_csv, Settings};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Every size up to h-max x w-max.
    UpTo,
    /// Only h-max x w-max, plus the 1x1 shapes.
    Exact,
}

impl Mode {
    fn size_mode(self) -> SizeMode {
        match self {
            Mode::UpTo => SizeMode::UpTo,
            Mode::Exact => SizeMode::Exact,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::UpTo => "up-to",
            Mode::Exact => "exact",
        }
    }
}

/// Where images come from: a PBM file, a directory of PBM files, or an IDX
/// image file (optionally filtered by label).
#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// PBM file, directory of `.pbm` files, or IDX image file (gzip allowed).
    #[arg(long)]
    corpus: PathBuf,
    /// IDX label file matching an IDX corpus.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Keep only this digit class (needs --labels).
    #[arg(long)]
    class: Option<u8>,
    /// Binarization threshold for IDX pixels; values >= threshold become 1.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
    /// Use at most this many images.
    #[arg(long)]
    limit: Option<usize>,
}

impl CorpusArgs {
    fn settings(&self) -> Settings {
        let mut s = vec![("corpus", self.corpus.display().to_string())];
        if let Some(l) = &self.labels {
            s.push(("labels", l.display().to_string()));
        }
        if let Some(c) = self.class {
            s.push(("class", c.to_string()));
        }
        s.push(("threshold", self.threshold.to_string()));
        if let Some(n) = self.limit {
            s.push(("limit", n.to_string()));
        }
        s
    }

    fn load(&self) -> Result<Vec<BinaryImage>, CliError> {
        let path = &self.corpus;
        let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
        let mut images = if meta.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| CliError::io(path, e))?
                .map(|entry| entry.map(|e| e.path()))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::io(path, e))?;
            files.retain(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pbm")));
            files.sort();
            if let Some(n) = self.limit {
                files.truncate(n);
            }
            files
                .iter()
                .map(|f| image::read_pbm_file(f))
                .collect::<Result<Vec<_>, _>>()?
        } else if is_pbm(path)? {
            vec![image::read_pbm_file(path)?]
        } else {
            self.load_idx()?
        };
        if let Some(n) = self.limit {
            images.truncate(n);
        }
        Ok(images)
    }

    fn load_idx(&self) -> Result<Vec<BinaryImage>, CliError> {
        match (&self.labels, self.class) {
            (Some(labels), class) => {
                let ds = image::load_idx(&self.corpus, labels)?;
                Ok(match class {
                    Some(c) => ds.class(c, self.threshold),
                    None => ds.images.iter().map(|g| g.binarize(self.threshold)).collect(),
                })
            }
            (None, Some(_)) => Err(CliError::Usage("--class needs --labels".into())),
            (None, None) => {
                let bytes = image::read_maybe_gzip(&self.corpus)?;
                Ok(image::parse_idx_images(&bytes)?
                    .iter()
                    .map(|g| g.binarize(self.threshold))
                    .collect())
            }
        }
    }
}

fn is_pbm(path: &Path) -> Result<bool, CliError> {
    use std::io::Read;
    let mut head = [0u8; 2];
    let mut f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let n = f.read(&mut head).map_err(|e| CliError::io(path, e))?;
    Ok(n == 2 && &head == b"P4")
}

fn read_codebook(path: &Path) -> Result<ShapeDatabase, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(ShapeDatabase::from_bytes(&bytes)?)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = DEFAULT_SHAPE_SIDE)]
    h_max: u8,
    #[arg(long, default_value_t = DEFAULT_SHAPE_SIDE)]
    w_max: u8,
    /// Drop patterns seen fewer times (the 1x1 shapes are always kept).
    #[arg(long, default_value_t = DEFAULT_MIN_FREQ)]
    min_freq: u64,
    #[arg(long, value_enum, default_value_t = Mode::UpTo)]
    mode: Mode,
    /// Weight codewords by how often the greedy decomposition of the
    /// corpus uses each shape, dropping unused shapes.
    #[arg(long)]
    refit: bool,
    /// Codebook file to write.
    #[arg(long, short)]
    output: PathBuf,
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let corpus = a.corpus.load()?;
    let params = TrainParams {
        h_max: a.h_max,
        w_max: a.w_max,
        min_freq: a.min_freq,
        mode: a.mode.size_mode(),
    };
    let mined = ShapeDatabase::train(&corpus, params)?;
    let db = if a.refit {
        mined.refit_to_usage(&corpus)?
    } else {
        mined.assign_codewords()?
    };
    fs::write(&a.output, db.to_bytes()).map_err(|e| CliError::io(&a.output, e))?;
    print_pairs(&vec![
        ("images", corpus.len().to_string()),
        ("mode", a.mode.name().to_string()),
        ("refit", a.refit.to_string()),
        ("shapes", db.len().to_string()),
        ("total_frequency", db.total_frequency().to_string()),
        ("expected_code_length", fmt_f(db.expected_code_length().unwrap_or(0.0))),
        ("frequency_entropy", fmt_f(db.frequency_entropy())),
        ("kraft_sum", fmt_f(db.kraft_sum().unwrap_or(0.0))),
        ("digest", format!("{:016x}", db.digest())),
        ("output", a.output.display().to_string()),
    ]);
    Ok(())
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// PBM image to compress.
    #[arg(long, short)]
    input: PathBuf,
    /// Container file to write.
    #[arg(long, short)]
    output: PathBuf,
}

pub fn encode(a: &EncodeArgs) -> Result<(), CliError> {
    let db = read_codebook(&a.codebook)?;
    let img = image::read_pbm_file(&a.input)?;
    let codec = ShapeCodec::new(&db)?;
    let decomp = codec.decompose(&img);
    let bytes = codec.encode_decomposition(&decomp)?;
    fs::write(&a.output, &bytes).map_err(|e| CliError::io(&a.output, e))?;
    let cost = codec.cost(&decomp);
    print_pairs(&vec![
        ("pixels", cost.pixels.to_string()),
        ("shapes", cost.shapes.to_string()),
        ("payload_bits", cost.payload_bits.unwrap_or(0).to_string()),
        ("container_bytes", bytes.len().to_string()),
        ("bpp", fmt_f(cost.realized_bpp().unwrap_or(f64::NAN))),
        ("bpp_with_header", fmt_f(cost.realized_bpp_with_header().unwrap_or(f64::NAN))),
        ("shape_pixel_ratio", fmt_f(cost.shape_pixel_ratio())),
        ("metric", fmt_f(cost.metric)),
        ("bound_bpp", fmt_f(cost.bound_bpp)),
    ]);
    Ok(())
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// Container file to read.
    #[arg(long, short)]
    input: PathBuf,
    /// PBM file to write.
    #[arg(long, short)]
    output: PathBuf,
}

pub fn decode(a: &DecodeArgs) -> Result<(), CliError> {
    let db = read_codebook(&a.codebook)?;
    let bytes = fs::read(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let img = codec::decode(&bytes, &db)?;
    image::write_pbm_file(&a.output, &img)?;
    print_pairs(&vec![
        ("height", img.height().to_string()),
        ("width", img.width().to_string()),
        ("output", a.output.display().to_string()),
    ]);
    Ok(())
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Context order of the entropy-rate estimate.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Also report shape costs and the shape-count inequalities.
    #[arg(long)]
    codebook: Option<PathBuf>,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let corpus = a.corpus.load()?;
    if corpus.is_empty() {
        return Err(shapecode::codebook::CodebookError::EmptyCorpus.into());
    }
    let mut out = a.corpus.settings();
    out.push(("k", a.k.to_string()));
    let pixels: usize = corpus.iter().map(BinaryImage::len).sum();
    let ones: usize = corpus.iter().map(BinaryImage::ones).sum();
    out.push(("images", corpus.len().to_string()));
    out.push(("pixels", pixels.to_string()));
    out.push(("ones_fraction", fmt_f(ones as f64 / pixels as f64)));
    out.push(("entropy_estimate", fmt_f(experiment::pooled_entropy_rate(&corpus, a.k)?)));

    if let Some(path) = &a.codebook {
        let db = read_codebook(path)?;
        let codec = ShapeCodec::new(&db)?;
        let cost = experiment::corpus_cost(&codec, &corpus)?;
        out.push(("codebook", path.display().to_string()));
        out.push(("shapes", cost.shapes.to_string()));
        out.push(("shape_pixel_ratio", fmt_f(cost.shape_pixel_ratio)));
        out.push(("metric", fmt_f(cost.metric)));
        out.push(("bpp", fmt_f(cost.bpp)));
        out.push(("bound_bpp", fmt_f(cost.bound_bpp)));
        out.push(("ratio", fmt_f(cost.ratio)));
        if (1..=entropy::MAX_ORDER).contains(&a.k) {
            let (held1, held2, slack1, slack2) = lemma_checks(&codec, &corpus, a.k)?;
            out.push(("lemma1_holds", format!("{held1}/{}", corpus.len())));
            out.push(("lemma1_min_slack", fmt_f(slack1)));
            out.push(("lemma2_holds", format!("{held2}/{}", corpus.len())));
            out.push(("lemma2_min_slack", fmt_f(slack2)));
        }
    }
    print_pairs(&out);
    Ok(())
}

/// Shape-count inequality checks per image against a model fitted on the
/// whole corpus.
fn lemma_checks(codec: &ShapeCodec, corpus: &[BinaryImage], k: usize) -> Result<(usize, usize, f64, f64), CliError> {
    let mut model = MarkovModel::new(k)?;
    for img in corpus {
        model.update(img.raster_sequence());
    }
    let (mut held1, mut held2) = (0, 0);
    let (mut slack1, mut slack2) = (f64::INFINITY, f64::INFINITY);
    for img in corpus {
        let decomp = codec.decompose(img);
        let stats = codec::decomposition_stats(&decomp, img, codec.database(), &model, k)?;
        let l1 = entropy::verify_lemma1(&stats, &model, img.raster_sequence())?;
        let l2 = entropy::verify_lemma2(&stats, img.len(), k)?;
        held1 += l1.holds as usize;
        held2 += l2.holds as usize;
        slack1 = slack1.min(l1.slack);
        slack2 = slack2.min(l2.slack);
    }
    Ok((held1, held2, slack1, slack2))
}

/// A birth-death source: a preset, flip probabilities, or raw rates.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Preset 1-5 (flip probability 0.02, 0.05, 0.1, 0.2, 0.4).
    #[arg(long, conflicts_with_all = ["p01", "lambda"])]
    case: Option<usize>,
    /// One-step 0 -> 1 probability (with --p10).
    #[arg(long, requires = "p10", conflicts_with = "lambda")]
    p01: Option<f64>,
    /// One-step 1 -> 0 probability (with --p01).
    #[arg(long, requires = "p01")]
    p10: Option<f64>,
    /// Birth rate (with --mu and --dt).
    #[arg(long, requires_all = ["mu", "dt"])]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    mu: Option<f64>,
    #[arg(long, requires = "lambda")]
    dt: Option<f64>,
}

impl SourceArgs {
    fn resolve(&self, default_case: usize) -> Result<BirthDeathParams, CliError> {
        Ok(match (self.p01.zip(self.p10), self.lambda) {
            (Some((p01, p10)), _) => BirthDeathParams::from_flip_probs(p01, p10)?,
            (None, Some(lambda)) => BirthDeathParams::new(
                lambda,
                self.mu.expect("required by clap"),
                self.dt.expect("required by clap"),
            )?,
            (None, None) => BirthDeathParams::case(self.case.unwrap_or(default_case))?,
        })
    }

    fn settings(&self, params: &BirthDeathParams) -> Settings {
        let (p01, p10) = simulate::transition_probs(params);
        let mut s = Vec::new();
        if let Some(c) = self.case {
            s.push(("case", c.to_string()));
        }
        s.extend([
            ("lambda", params.lambda.to_string()),
            ("mu", params.mu.to_string()),
            ("dt", params.dt.to_string()),
            ("p01", fmt_f(p01)),
            ("p10", fmt_f(p10)),
            ("generator", GENERATOR_VERSION.to_string()),
        ]);
        s
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 100)]
    height: usize,
    #[arg(long, default_value_t = 100)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the PBM files and manifest.json.
    #[arg(long, short)]
    output: PathBuf,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let params = a.source.resolve(1)?;
    let manifest = simulate::export_corpus(&a.output, &params, a.count, a.height, a.width, a.seed)?;
    let mut out = a.source.settings(&params);
    out.extend([
        ("count", manifest.files.len().to_string()),
        ("height", a.height.to_string()),
        ("width", a.width.to_string()),
        ("seed", a.seed.to_string()),
        ("output", a.output.display().to_string()),
    ]);
    print_pairs(&out);
    Ok(())
}

#[derive(Debug, Args)]
pub struct MnistTableArgs {
    /// Directory holding the four MNIST IDX files (plain or .gz).
    #[arg(long, default_value = "data/mnist")]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 8)]
    h_max: u8,
    #[arg(long, default_value_t = 8)]
    w_max: u8,
    #[arg(long, default_value_t = DEFAULT_MIN_FREQ)]
    min_freq: u64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
    /// Use at most this many images per class and split.
    #[arg(long)]
    limit: Option<usize>,
    /// CSV file to write (stdout if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// `dir/name` or `dir/name.gz`, whichever exists.
fn find_idx(dir: &Path, name: &str) -> PathBuf {
    let plain = dir.join(name);
    let gz = dir.join(format!("{name}.gz"));
    if !plain.exists() && gz.exists() {
        gz
    } else {
        plain
    }
}

pub fn mnist_table(a: &MnistTableArgs) -> Result<(), CliError> {
    let dir = &a.data_dir;
    let train = image::load_idx(
        &find_idx(dir, "train-images-idx3-ubyte"),
        &find_idx(dir, "train-labels-idx1-ubyte"),
    )?;
    let test = image::load_idx(
        &find_idx(dir, "t10k-images-idx3-ubyte"),
        &find_idx(dir, "t10k-labels-idx1-ubyte"),
    )?;
    let cfg = MnistConfig {
        params: TrainParams::up_to(a.h_max, a.w_max, a.min_freq),
        threshold: a.threshold,
        limit: a.limit,
    };
    let rows = experiment::mnist_table(&train, &test, &cfg)?;
    let mut settings: Settings = vec![
        ("data_dir", dir.display().to_string()),
        ("train_sha256", train.source_hash.clone()),
        ("test_sha256", test.source_hash.clone()),
        ("h_max", a.h_max.to_string()),
        ("w_max", a.w_max.to_string()),
        ("min_freq", a.min_freq.to_string()),
        ("threshold", a.threshold.to_string()),
    ];
    if let Some(n) = a.limit {
        settings.push(("limit", n.to_string()));
    }
    settings.push((
        "protocol",
        "one codebook per class trained on its train split and evaluated on its test split; \
         r_avg = mean t / payload bits; metric = mean (c/t) log2 t"
            .to_string(),
    ));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.class.to_string(),
                r.train_images.to_string(),
                r.test_images.to_string(),
                r.dictionary_size.to_string(),
                fmt_f(r.cost.ratio),
                fmt_f(r.cost.metric),
                fmt_f(r.cost.shape_pixel_ratio),
                fmt_f(r.cost.bpp),
                fmt_f(r.cost.bound_bpp),
            ]
        })
        .collect();
    write_csv(
        a.output.as_deref(),
        "mnist-table",
        &settings,
        &[
            "class",
            "train_images",
            "test_images",
            "dictionary_size",
            "r_avg",
            "metric",
            "shape_pixel_ratio",
            "bpp",
            "bound_bpp",
        ],
        &table,
    )
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Preset indexes.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5])]
    cases: Vec<usize>,
    /// Square shape sides.
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4])]
    sizes: Vec<u8>,
    #[arg(long, default_value_t = 500)]
    train_images: usize,
    #[arg(long, default_value_t = 500)]
    test_images: usize,
    #[arg(long, default_value_t = 100)]
    height: usize,
    #[arg(long, default_value_t = 100)]
    width: usize,
    /// Context order of the entropy-rate estimate.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 2021)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        cases: a.cases.clone(),
        sizes: a.sizes.clone(),
        train_images: a.train_images,
        test_images: a.test_images,
        height: a.height,
        width: a.width,
        k: a.k,
        seed: a.seed,
    };
    let rows = experiment::sweep(&cfg)?;
    let settings: Settings = vec![
        ("cases", join(&a.cases)),
        ("sizes", join(&a.sizes)),
        ("train_images", a.train_images.to_string()),
        ("test_images", a.test_images.to_string()),
        ("height", a.height.to_string()),
        ("width", a.width.to_string()),
        ("k", a.k.to_string()),
        ("seed", a.seed.to_string()),
        ("generator", GENERATOR_VERSION.to_string()),
    ];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.case.to_string(),
                fmt_f(r.p01),
                fmt_f(r.p10),
                r.n.to_string(),
                r.dictionary_size.to_string(),
                fmt_f(r.cost.shape_pixel_ratio),
                fmt_f(r.cost.bpp),
                fmt_f(r.cost.bound_bpp),
                fmt_f(r.entropy_estimate),
                fmt_f(r.entropy_analytic),
            ]
        })
        .collect();
    write_csv(
        a.output.as_deref(),
        "sweep",
        &settings,
        &[
            "case",
            "p01",
            "p10",
            "n",
            "dictionary_size",
            "shape_pixel_ratio",
            "bpp",
            "bound_bpp",
            "entropy_estimate",
            "entropy_analytic",
        ],
        &table,
    )
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Square image sides.
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 316, 1000])]
    sides: Vec<usize>,
    /// Shape bounds per side, as `HxW`.
    #[arg(long, value_delimiter = ',', value_parser = parse_bounds, default_values = ["1x8", "2x8", "3x8"])]
    shapes: Vec<(u8, u8)>,
    /// Training images per side.
    #[arg(long, default_value_t = 20)]
    train_images: usize,
    /// Evaluation pixels per side, rounded up to whole images.
    #[arg(long, default_value_t = 2_000_000)]
    test_pixels: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_FREQ)]
    min_freq: u64,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 2021)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_bounds(s: &str) -> Result<(u8, u8), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not HxW"))?;
    let side = |v: &str| v.trim().parse::<u8>().map_err(|e| format!("`{s}`: {e}"));
    Ok((side(h)?, side(w)?))
}

pub fn converge(a: &ConvergeArgs) -> Result<(), CliError> {
    let source = a.source.resolve(2)?;
    let cfg = ConvergeConfig {
        source,
        sides: a.sides.clone(),
        shapes: a.shapes.clone(),
        train_images: a.train_images,
        test_pixels: a.test_pixels,
        min_freq: a.min_freq,
        k: a.k,
        seed: a.seed,
    };
    let rows = experiment::converge(&cfg)?;
    let mut settings = a.source.settings(&source);
    settings.extend([
        ("sides", join(&a.sides)),
        (
            "shapes",
            a.shapes.iter().map(|(h, w)| format!("{h}x{w}")).collect::<Vec<_>>().join(","),
        ),
        ("train_images", a.train_images.to_string()),
        ("test_pixels", a.test_pixels.to_string()),
        ("min_freq", a.min_freq.to_string()),
        ("k", a.k.to_string()),
        ("seed", a.seed.to_string()),
    ]);
    let table: Vec<Vec<String>> = rows
        .iter()
        .zip(&a.shapes)
        .map(|(r, (h, w))| {
            vec![
                r.pixels.to_string(),
                r.side.to_string(),
                h.to_string(),
                w.to_string(),
                r.train_images.to_string(),
                r.cost.images.to_string(),
                r.dictionary_size.to_string(),
                fmt_f(r.cost.shape_pixel_ratio),
                fmt_f(r.cost.metric),
                fmt_f(r.cost.bpp),
                fmt_f(r.cost.bound_bpp),
                fmt_f(r.entropy_estimate),
                fmt_f(r.gap()),
            ]
        })
        .collect();
    write_csv(
        a.output.as_deref(),
        "converge",
        &settings,
        &[
            "pixels",
            "side",
            "h_max",
            "w_max",
            "train_images",
            "test_images",
            "dictionary_size",
            "shape_pixel_ratio",
            "metric",
            "bpp",
            "bound_bpp",
            "entropy_estimate",
            "gap",
        ],
        &table,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_parse() {
        assert_eq!(parse_bounds("3x8"), Ok((3, 8)));
        assert_eq!(parse_bounds("2X4"), Ok((2, 4)));
        assert!(parse_bounds("38").is_err());
        assert!(parse_bounds("ax8").is_err());
    }
}
