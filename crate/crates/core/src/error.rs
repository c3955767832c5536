use thiserror::Error;

use crate::bitio::BitError;
use crate::codebook::CodebookError;
use crate::codec::CodecError;
use crate::entropy::EntropyError;
use crate::image::ImageError;
use crate::prefix::PrefixError;
use crate::simulate::SimulateError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error(transparent)]
    Prefix(#[from] PrefixError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Image(ImageError::Io { .. }) | Error::Simulate(SimulateError::Io { .. }) => "io",
            Error::Simulate(SimulateError::Image(ImageError::Io { .. })) => "io",
            Error::Codec(CodecError::DigestMismatch { .. })
            | Error::Codebook(CodebookError::DigestMismatch { .. }) => "digest-mismatch",
            Error::Codec(CodecError::Truncated) | Error::Bits(BitError::Truncated { .. }) => "truncated",
            Error::Codec(_) => "corrupt-container",
            Error::Codebook(CodebookError::EmptyCorpus) => "empty-corpus",
            Error::Codebook(CodebookError::BadParams(_)) | Error::Invalid(_) => "invalid-argument",
            Error::Codebook(_) => "corrupt-codebook",
            Error::Image(_) => "bad-image",
            Error::Entropy(_) => "entropy",
            Error::Simulate(_) => "invalid-argument",
            Error::Bits(_) | Error::Prefix(_) => "bitstream",
        }
    }
}
