//! Tonal contour geometry toolkit.
//!
//! Pipeline: [`ingest`] F0 tracks and segmentations into tokens,
//! [`normalize`] each token to ten speaker-relative semitone points,
//! classify turning points and measure curvature with [`tcatt`], then run
//! grouped statistics with [`stats`]. [`synth`] produces seeded corpora with
//! known ground truth.

// Negated float comparisons below are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ingest;
pub mod normalize;
pub mod stats;
pub mod synth;
pub mod tcatt;
