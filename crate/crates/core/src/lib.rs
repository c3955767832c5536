//! Lossless coding of binary images with data-driven shape codebooks.
//!
//! An image is partitioned into small rectangular shapes drawn from a
//! trained [`ShapeDatabase`]; the shapes' canonical Huffman codewords form the
//! compressed payload. Alongside the codec the crate provides order-k Markov
//! entropy-rate estimation, a birth-death image source for controlled
//! experiments, and numeric checks relating shape counts to the source's
//! entropy rate.
//!
//! Module map:
//!
//! - [`bitio`], [`prefix`]: bit streams and canonical prefix codes
//! - [`image`]: binary images, IDX and PBM files
//! - [`codebook`]: shape mining and the `SCDB` codebook format
//! - [`codec`]: decomposition, the `SCIM` container and cost figures
//! - [`entropy`]: Markov models, entropy rates and inequality checks
//! - [`simulate`]: birth-death image sources
//! - [`experiment`]: corpus-level runs behind the CLI's report commands

pub mod bitio;
pub mod codebook;
pub mod codec;
pub mod entropy;
mod error;
pub mod experiment;
pub mod image;
pub mod prefix;
pub mod simulate;

pub use bitio::{BitReader, BitStream, Codeword};
pub use codebook::{CodeCheck, Shape, ShapeDatabase, SizeMode, TrainParams};
pub use codec::{CostReport, Decomposition, DecompositionStats, Placement, ShapeCodec};
pub use entropy::{LemmaReport, MarkovModel};
pub use error::{Error, Result};
pub use image::{BinaryImage, GrayImage, LabeledDataset};
pub use simulate::BirthDeathParams;

/// Crate version, stamped into experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
