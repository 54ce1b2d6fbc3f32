//! Small text helpers shared by the builders, the aligner plumbing and the
//! metrics: whitespace tokenization, case-insensitive search and offset
//! conversion between byte and character positions.

use std::ops::Range;

/// Collapse every run of whitespace to a single space and trim the ends.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace tokens of `s`.
pub fn tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Whitespace tokens together with their byte ranges in `s`.
pub fn token_ranges(s: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(st..i);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(st..s.len());
    }
    out
}

/// Trim non-alphanumeric characters from both ends.
pub fn trim_punct(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

fn chars_eq_ci(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

/// Case-insensitive substring search. Returns the byte range of the first
/// match in `hay`, so callers can recover the verbatim surface form.
pub fn find_ci(hay: &str, needle: &str) -> Option<Range<usize>> {
    if needle.is_empty() {
        return None;
    }
    let needle: Vec<char> = needle.chars().collect();
    for (start, _) in hay.char_indices() {
        let mut it = hay[start..].char_indices();
        let mut ok = true;
        let mut end = start;
        for &n in &needle {
            match it.next() {
                Some((off, c)) if chars_eq_ci(c, n) => end = start + off + c.len_utf8(),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(start..end);
        }
    }
    None
}

/// Case-insensitive search that ignores whitespace differences: both sides
/// are whitespace-normalized before matching and the match is reported in
/// the normalized haystack.
pub fn contains_ci_ws(hay: &str, needle: &str) -> Option<String> {
    let hay = normalize_ws(hay);
    let needle = normalize_ws(needle);
    find_ci(&hay, &needle).map(|r| hay[r].to_string())
}

/// Byte offset of the `char_idx`-th character (or `s.len()` at the end).
pub fn char_to_byte(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Character index of byte offset `byte_idx`, which must be a char boundary.
pub fn byte_to_char(s: &str, byte_idx: usize) -> usize {
    s[..byte_idx].chars().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_ci_reports_surface_range() {
        let hay = "Me gusta El Sushi con cinta";
        let r = find_ci(hay, "el sushi").unwrap();
        assert_eq!(&hay[r], "El Sushi");
        assert!(find_ci(hay, "tempura").is_none());
        assert!(find_ci(hay, "").is_none());
    }

    #[test]
    fn find_ci_handles_multibyte() {
        let hay = "la atención fue ÓPTIMA";
        let r = find_ci(hay, "óptima").unwrap();
        assert_eq!(&hay[r], "ÓPTIMA");
    }

    #[test]
    fn char_byte_round_trip() {
        let s = "año nuevo";
        assert_eq!(char_to_byte(s, 3), Some(4));
        assert_eq!(byte_to_char(s, 4), 3);
        assert_eq!(char_to_byte(s, 9), Some(s.len()));
        assert_eq!(char_to_byte(s, 10), None);
    }

    #[test]
    fn token_ranges_match_split_whitespace() {
        let s = "  a  bc\td ";
        let r: Vec<&str> = token_ranges(s).into_iter().map(|r| &s[r]).collect();
        assert_eq!(r, tokens(s));
    }
}
