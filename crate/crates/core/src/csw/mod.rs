//! Code-switched corpus construction.

mod builder;
mod dict;
mod tagged;
mod tagging;

pub use builder::{
    build_csw_corpus, extract_parallel_terms, read_pairs, read_provenance, translate_tagged, write_pairs,
    write_provenance, CswBuild, CswConfig, CswDiagnostics, CswMode, CswProvenance, ParallelTermPair, TaggedPair,
    TermRecord, PAIRS_FORMAT, PROVENANCE_FORMAT,
};
pub use dict::{build_dict_csw, DictCswBuild, DictCswConfig, DictStrategy};
pub use tagged::{strip_tags, validate_tagged, RepairReport, TagError, TagKey, TaggedSentence};
pub use tagging::{locate_term, tag_sample, TaggedSample, TripletKeys, Unlocatable};
