//! Ingestion of F0 tracks, Praat segmentations and corpus manifests.
//!
//! Everything here is a pure function of its input text except
//! [`load_corpus`], which pulls files through a caller-supplied loader.

mod corpus;
mod praat;
mod text;
mod track;

use std::path::PathBuf;

use thiserror::Error;

pub use corpus::{
    load_corpus, load_corpus_lenient, CorpusManifest, Gender, LoadFailure, ManifestEntry,
    ManifestSpeaker, ManifestToken, Position, TokenRecord, TonalCombination, TrackFormat,
    TargetWord, TARGET_WORDS,
};
pub use praat::{
    parse_pitchtier, parse_textgrid, parse_textgrid_with_warnings, serialize_pitchtier,
    serialize_textgrid, Interval, IntervalTier, ParsedTextGrid,
};
pub use text::{decode_text, read_text_file};
pub use track::{parse_f0_csv, serialize_f0_csv, F0Sample, F0Track};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty input: no data rows")]
    Empty,
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: time is not strictly increasing")]
    NonMonotoneTime { line: usize },
    #[error("invalid track: {0}")]
    InvalidTrack(String),
    #[error("missing or unexpected header: {0}")]
    Header(String),
    #[error("binary Praat files are not supported; save as a text file")]
    BinaryPraat,
    #[error("point count mismatch: declared {declared}, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("tier {tier:?}, interval {index}: xmin must be < xmax")]
    EmptyInterval { tier: String, index: usize },
    #[error("tier {tier:?}, interval {index}: overlaps or precedes the previous interval")]
    Overlap { tier: String, index: usize },
    #[error("text encoding: {0}")]
    Encoding(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("token {token}: unresolved interval ({reason})")]
    UnresolvedInterval { token: String, reason: String },
    #[error("duplicate token id {0}")]
    DuplicateToken(String),
    #[error("token {token}: interval [{xmin}, {xmax}] lies outside the track span")]
    OutsideTrack { token: String, xmin: f64, xmax: f64 },
    #[error("{}: {source}", path.display())]
    FileLoad {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
}
