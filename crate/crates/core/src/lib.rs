//! Phonotactic complexity toolkit for dialect wordlists.
//!
//! The pipeline runs from a concept-aligned wordlist ([`corpus`]) through IPA
//! tokenization ([`phoncore`]) and sonority-based syllabification
//! ([`syllabify`]) into a per-site recurrent phone language model
//! ([`phonolm`]) whose held-out cross-entropy gives bits per phoneme. Site
//! level results are correlated against word length ([`stats`]) and smoothed
//! over coordinates with a thin plate spline ([`geosurface`]).
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the usual
//! precisions.

pub mod corpus;
pub mod geosurface;
pub mod phoncore;
pub mod phonolm;
pub mod scalar;
pub mod stats;
pub mod syllabify;

pub use scalar::Scalar;

pub use corpus::{Dataset, DialectLexicon, LanguageProfile, WordEntry};
pub use phoncore::{PhoneFeatures, PhoneTable, Token, TokenKind};
pub use syllabify::{ConstituentLabel, Syllable};

/// Double-precision language model.
pub type PhonoLm64 = phonolm::PhonoLm<f64>;
/// Single-precision language model.
pub type PhonoLm32 = phonolm::PhonoLm<f32>;
/// Double-precision model configuration.
pub type ModelConfig64 = phonolm::ModelConfig<f64>;
/// Double-precision thin plate spline fit.
pub type TpsFit64 = geosurface::TpsFit<f64>;
/// Single-precision thin plate spline fit.
pub type TpsFit32 = geosurface::TpsFit<f32>;
/// Double-precision surface grid.
pub type SurfaceGrid64 = geosurface::SurfaceGrid<f64>;
