//! Test-time augmentation: predict on code-switched variants of a
//! target-language input and vote over the results.

mod align;
mod candidates;
mod phrases;
mod predict;
mod vote;

use serde::{Deserialize, Serialize};

pub use align::{align_candidate_sets, align_candidates, CandidateSet};
pub use candidates::{build_augmented_inputs, select_candidates, AlignedPhrase, AugmentKind, AugmentedInput, Side};
pub use phrases::{enumerate_phrases, Phrase};
pub use predict::{tta_predict, TtaBackends, TtaDiagnostics, TtaPrediction};
pub use vote::{same_multiset, vote, VoteConfig};

use crate::backends::DEFAULT_MAX_BATCH;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtaConfig {
    pub max_ngram: usize,
    pub top_k_phrases: usize,
    /// Augmented inputs per sample, on top of the unmodified input.
    pub n_candidates: usize,
    pub vote_threshold: f64,
    pub min_support_fraction: f64,
    pub seed: u64,
    pub batch_size: usize,
    /// Abort on backend failure instead of falling back to the plain
    /// prediction.
    pub strict: bool,
}

impl Default for TtaConfig {
    fn default() -> Self {
        TtaConfig {
            max_ngram: 3,
            top_k_phrases: 10,
            n_candidates: 10,
            vote_threshold: 0.5,
            min_support_fraction: 0.5,
            seed: 0,
            batch_size: DEFAULT_MAX_BATCH,
            strict: false,
        }
    }
}

impl TtaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.max_ngram < 1 {
            return bad("max_ngram must be at least 1");
        }
        if self.top_k_phrases < 1 {
            return bad("top_k_phrases must be at least 1");
        }
        if !(self.vote_threshold > 0.0 && self.vote_threshold <= 1.0) {
            return bad("vote_threshold must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.min_support_fraction) {
            return bad("min_support_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn vote_config(&self) -> VoteConfig {
        VoteConfig {
            threshold: self.vote_threshold,
            min_support_fraction: self.min_support_fraction,
        }
    }
}
