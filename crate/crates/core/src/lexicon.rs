//! Bilingual word lexicon: `source_word<TAB>target_word` per line.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    map: HashMap<String, String>,
}

impl Lexicon {
    /// Build from pairs; the first entry for a source word wins.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut map = HashMap::new();
        for (a, b) in pairs {
            map.entry(a.into()).or_insert_with(|| b.into());
        }
        if map.is_empty() {
            return Err(Error::Invalid("bilingual lexicon is empty".into()));
        }
        Ok(Lexicon { map })
    }

    /// Parse lexicon text. Lines split on the first tab; lines without a
    /// tab fall back to exactly two whitespace-separated words (the MUSE
    /// dictionaries use a single space). Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let pair = match line.split_once('\t') {
                Some((a, b)) => Some((a.trim(), b.trim())),
                None => {
                    let w: Vec<&str> = line.split_whitespace().collect();
                    (w.len() == 2).then(|| (w[0], w[1]))
                }
            };
            match pair {
                Some((a, b)) if !a.is_empty() && !b.is_empty() => {
                    pairs.push((a.to_string(), b.to_string()))
                }
                _ => {
                    return Err(Error::Format {
                        path: origin.to_path_buf(),
                        line: i + 1,
                        message: "expected `source<TAB>target`".into(),
                    })
                }
            }
        }
        Lexicon::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse(&raw, path)
    }

    /// Exact lookup, falling back to the lowercased word.
    pub fn lookup(&self, word: &str) -> Option<&str> {
        self.map
            .get(word)
            .or_else(|| self.map.get(&word.to_lowercase()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_tab_and_space_lines() {
        let lex = Lexicon::parse("good\tbueno\n# c\n\nfood comida\ngood\tbien\n", Path::new("x")).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.lookup("Good"), Some("bueno"));
        assert_eq!(lex.lookup("food"), Some("comida"));
        assert_eq!(lex.lookup("rice"), None);
    }

    #[test]
    fn empty_lexicon_is_an_error() {
        assert!(Lexicon::parse("\n# only comments\n", Path::new("x")).is_err());
        assert!(Lexicon::parse("one two three\n", Path::new("x")).is_err());
    }
}
