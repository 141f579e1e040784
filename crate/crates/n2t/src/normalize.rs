//! Text normalization: special-character replacement, ASCII transliteration,
//! and whitespace collapsing, with an offset map back into the raw text.
//!
//! Normalization runs before tokenization so that gazetteer joins operate on
//! deterministic keys. All operations here are pure and total.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// One input narrative: raw text plus optional provenance metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNarrative {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// ISO-8601 publication date, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<String>,
}

impl RawNarrative {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawNarrative {
            id: id.into(),
            title: None,
            text: text.into(),
            source: None,
            published: None,
        }
    }
}

/// Normalized text plus a map from each normalized character position to the
/// raw character position it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    /// `offset_map[i]` is the raw char index that produced normalized char `i`.
    /// Monotonically non-decreasing; same length as `text` in chars.
    pub offset_map: Vec<usize>,
    /// Characters that survived normalization outside ASCII (non-Latin scripts).
    pub untransliterated: usize,
}

impl NormalizedText {
    pub fn empty() -> Self {
        NormalizedText {
            text: String::new(),
            offset_map: Vec::new(),
            untransliterated: 0,
        }
    }
}

/// Replacement table for typographic characters, applied before transliteration.
///
/// The table is fixed and exhaustive: single quotes (U+2018..U+201B, U+2039,
/// U+203A) become `'`; double quotes (U+201C..U+201F, U+00AB, U+00BB) become
/// `"`; dashes (U+2010..U+2015, U+2212) become `-`; the ellipsis U+2026 becomes
/// `...`; Unicode space separators become a regular space; the soft hyphen
/// U+00AD and zero-width characters (U+200B..U+200D, U+FEFF) are removed.
/// Everything else passes through unchanged.
fn replace_special_char(c: char) -> SpecialReplacement {
    use SpecialReplacement::*;
    match c {
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2039}' | '\u{203A}' => Char('\''),
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{00AB}' | '\u{00BB}' => Char('"'),
        '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
        | '\u{2212}' => Char('-'),
        '\u{2026}' => Str("..."),
        '\u{00A0}' | '\u{1680}' | '\u{2000}'..='\u{200A}' | '\u{202F}' | '\u{205F}'
        | '\u{3000}' => Char(' '),
        '\u{00AD}' | '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{FEFF}' => Remove,
        _ => Keep,
    }
}

enum SpecialReplacement {
    Char(char),
    Str(&'static str),
    Remove,
    Keep,
}

/// Replaces typographic characters with their plain-ASCII equivalents.
///
/// Total function: characters outside the replacement table pass through.
pub fn replace_special_characters(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match replace_special_char(c) {
            SpecialReplacement::Char(r) => out.push(r),
            SpecialReplacement::Str(s) => out.push_str(s),
            SpecialReplacement::Remove => {}
            SpecialReplacement::Keep => out.push(c),
        }
    }
    out
}

/// Supplemental transliterations for letters with no canonical decomposition.
fn supplemental(c: char) -> Option<&'static str> {
    Some(match c {
        'ß' => "ss",
        'ẞ' => "SS",
        'Æ' => "AE",
        'æ' => "ae",
        'Œ' => "OE",
        'œ' => "oe",
        'Ø' => "O",
        'ø' => "o",
        'Đ' | 'Ð' => "D",
        'đ' | 'ð' => "d",
        'Þ' => "Th",
        'þ' => "th",
        'ı' => "i",
        'Ł' => "L",
        'ł' => "l",
        _ => return None,
    })
}

// Decompose a single character and strip combining marks; pushes the ASCII
// result and returns true, or returns false when the character cannot be
// brought into ASCII.
fn transliterate_char(c: char, out: &mut String) -> bool {
    if c.is_ascii() {
        out.push(c);
        return true;
    }
    if let Some(s) = supplemental(c) {
        out.push_str(s);
        return true;
    }
    let mut buf = String::new();
    for piece in c.nfd().filter(|p| !is_combining_mark(*p)) {
        if piece.is_ascii() {
            buf.push(piece);
        } else if let Some(s) = supplemental(piece) {
            buf.push_str(s);
        } else {
            return false;
        }
    }
    out.push_str(&buf);
    true
}

/// Transliterates to ASCII via canonical decomposition plus a supplemental
/// table. Characters that stay outside ASCII (non-Latin scripts) pass through
/// unchanged; the second return value counts them.
pub fn transliterate_to_ascii(text: &str) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut untransliterated = 0;
    for c in text.chars() {
        if !transliterate_char(c, &mut out) {
            out.push(c);
            untransliterated += 1;
        }
    }
    (out, untransliterated)
}

/// Full normalization: special-character replacement, transliteration, and
/// whitespace collapse. Runs of whitespace become a single space, except runs
/// containing a newline, which become a single newline (paragraph breaks stay
/// sentence-significant). The offset map relates every output character to the
/// raw character that produced it.
pub fn normalize(raw: &RawNarrative) -> NormalizedText {
    normalize_str(&raw.text)
}

/// See [`normalize`]; operates on a bare string.
pub fn normalize_str(text: &str) -> NormalizedText {
    // Stage 1+2 per raw char: each raw char expands to zero or more output
    // chars, all tagged with the raw char index.
    let mut expanded: Vec<(usize, char)> = Vec::with_capacity(text.len());
    let mut untransliterated = 0;
    let mut scratch = String::new();
    for (raw_idx, c) in text.chars().enumerate() {
        scratch.clear();
        match replace_special_char(c) {
            SpecialReplacement::Char(r) => scratch.push(r),
            SpecialReplacement::Str(s) => scratch.push_str(s),
            SpecialReplacement::Remove => {}
            SpecialReplacement::Keep => {
                if !transliterate_char(c, &mut scratch) {
                    scratch.push(c);
                    untransliterated += 1;
                }
            }
        }
        for oc in scratch.chars() {
            expanded.push((raw_idx, oc));
        }
    }

    // Stage 3: collapse whitespace runs.
    let mut out = String::with_capacity(expanded.len());
    let mut offset_map = Vec::with_capacity(expanded.len());
    let mut i = 0;
    while i < expanded.len() {
        let (raw_idx, c) = expanded[i];
        if c.is_whitespace() {
            let mut j = i;
            let mut newline_at: Option<usize> = None;
            while j < expanded.len() && expanded[j].1.is_whitespace() {
                if expanded[j].1 == '\n' && newline_at.is_none() {
                    newline_at = Some(expanded[j].0);
                }
                j += 1;
            }
            match newline_at {
                Some(src) => {
                    out.push('\n');
                    offset_map.push(src);
                }
                None => {
                    out.push(' ');
                    offset_map.push(raw_idx);
                }
            }
            i = j;
        } else {
            out.push(c);
            offset_map.push(raw_idx);
            i += 1;
        }
    }

    NormalizedText {
        text: out,
        offset_map,
        untransliterated,
    }
}

/// Sidecar metadata for a narrative text file.
#[derive(Debug, Default, Deserialize)]
struct NarrativeMeta {
    id: Option<String>,
    title: Option<String>,
    source: Option<String>,
    published: Option<String>,
}

/// Errors raised while loading narratives from disk.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("invalid metadata in {path}: {source}")]
    BadMetadata {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("no narrative files (*.txt) found in {0}")]
    EmptyCorpus(String),
}

/// Loads one narrative from a UTF-8 text file. A sidecar `<stem>.json` file,
/// when present, supplies id/title/source/published; the id defaults to the
/// filename stem.
pub fn load_narrative(path: &Path) -> Result<RawNarrative, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar = path.with_extension("json");
    let meta = if sidecar.is_file() {
        let raw = fs::read_to_string(&sidecar).map_err(|source| CorpusError::Io {
            path: sidecar.display().to_string(),
            source,
        })?;
        serde_json::from_str::<NarrativeMeta>(&raw).map_err(|source| CorpusError::BadMetadata {
            path: sidecar.display().to_string(),
            source,
        })?
    } else {
        NarrativeMeta::default()
    };
    Ok(RawNarrative {
        id: meta.id.unwrap_or(stem),
        title: meta.title,
        text,
        source: meta.source,
        published: meta.published,
    })
}

/// Loads every `*.txt` narrative in a directory, ordered by narrative id.
pub fn load_corpus(dir: &Path) -> Result<Vec<RawNarrative>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut narratives = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            let narrative = load_narrative(&path)?;
            narratives.insert(narrative.id.clone(), narrative);
        }
    }
    if narratives.is_empty() {
        return Err(CorpusError::EmptyCorpus(dir.display().to_string()));
    }
    Ok(narratives.into_values().collect())
}
