use std::path::Path;

use super::{Corpus, Lang, Sample, Split};
use crate::artifact::{read_jsonl, write_jsonl, Header, Provenance};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT: &str = "ttcsw-corpus";

pub fn export_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    export_corpus_with(corpus, path, &Provenance::default())
}

pub fn export_corpus_with(corpus: &Corpus, path: &Path, prov: &Provenance) -> Result<()> {
    let header = Header::new(CORPUS_FORMAT)
        .with_provenance(prov)
        .field("name", &corpus.name)
        .field("language", &corpus.language)
        .field("split", corpus.split)
        .field("code_switched", corpus.code_switched);
    write_jsonl(path, &header, &corpus.samples)
}

pub fn import_corpus(path: &Path) -> Result<Corpus> {
    let (header, samples): (Header, Vec<Sample>) = read_jsonl(path, CORPUS_FORMAT)?;
    let field = |key: &str| {
        header.fields.get(key).cloned().ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header lacks `{key}`"),
        })
    };
    let bad = |key: &str, e: serde_json::Error| Error::Format {
        path: path.to_path_buf(),
        line: 1,
        message: format!("header field `{key}`: {e}"),
    };
    let name: String = serde_json::from_value(field("name")?).map_err(|e| bad("name", e))?;
    let language: Lang =
        serde_json::from_value(field("language")?).map_err(|e| bad("language", e))?;
    let split: Split = serde_json::from_value(field("split")?).map_err(|e| bad("split", e))?;
    let code_switched: bool = serde_json::from_value(field("code_switched")?)
        .map_err(|e| bad("code_switched", e))?;
    let corpus = Corpus {
        name,
        language,
        split,
        code_switched,
        samples,
    };
    corpus.validate()?;
    Ok(corpus)
}
