//! Language-aware normalization and scoring.

mod bleu;
mod normalize;
mod squad;

pub use bleu::sentence_bleu;
pub use normalize::{normalize_and_tokenize, normalize_tokens, surface_tokens, SurfaceToken, TokenizeMode, TokenizedText};
pub use squad::{accuracy, exact_match, f1_score, token_f1};
