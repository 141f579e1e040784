//! Tokenization: sentence splitting with abbreviation handling, word splitting
//! with punctuation detachment, multi-word merging against the place-name
//! lexicon, and a rule-based significant-entity recognizer over capitalized
//! runs.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::gazetteer::NameKey;
use crate::normalize::NormalizedText;

/// Character range into the normalized text, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punct,
}

/// The atomic unit of the pipeline: a single- or multi-word value with its
/// position, span, capitalization class, and (once identified) coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the narrative token stream.
    pub temporal_index: usize,
    pub value: String,
    pub tag: Option<PosTag>,
    pub geo_flag: bool,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub span: Span,
    /// Whether the first alphabetic character was uppercase in the source.
    pub capitalized: bool,
    pub kind: TokenKind,
}

impl Token {
    fn word(value: &str, span: Span) -> Self {
        Token {
            temporal_index: 0,
            value: value.to_owned(),
            tag: None,
            geo_flag: false,
            latitude: None,
            longitude: None,
            span,
            capitalized: first_alpha_is_upper(value),
            kind: TokenKind::Word,
        }
    }

    fn punct(c: char, start: usize) -> Self {
        Token {
            temporal_index: 0,
            value: c.to_string(),
            tag: None,
            geo_flag: false,
            latitude: None,
            longitude: None,
            span: Span::new(start, start + 1),
            capitalized: false,
            kind: TokenKind::Punct,
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

/// Part-of-speech labels used by the optional tagging pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum PosTag {
    PROPN,
    NOUN,
    VERB,
    ADV,
    DET,
    ADP,
    PRON,
    CONJ,
    AUX,
    PUNCT,
    NUM,
    UNK,
}

/// One sentence: 1-based index, its tokens, and its span in the narrative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
    pub span: Span,
}

fn first_alpha_is_upper(s: &str) -> bool {
    s.chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(|c| c.is_uppercase())
}

// A hyphenated word joins a capitalized run when any of its segments starts
// uppercase ("ez-Zor", "al-Zour").
fn run_capitalized(token: &Token) -> bool {
    token.is_word()
        && (token.capitalized
            || (token.value.contains('-')
                && token.value.split('-').any(first_alpha_is_upper)))
}

/// Trie over normalized word sequences; accepted paths are known multi-word
/// place names. Never contains single-word sequences.
#[derive(Debug, Default, Clone)]
pub struct MWLexicon {
    root: TrieNode,
    len: usize,
    max_words: usize,
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<String, TrieNode>,
    terminal: bool,
}

impl MWLexicon {
    pub fn new() -> Self {
        MWLexicon::default()
    }

    /// Inserts a normalized word sequence. Sequences shorter than two words
    /// are ignored; duplicates are no-ops.
    pub fn insert(&mut self, words: &[String]) {
        if words.len() < 2 {
            return;
        }
        let mut node = &mut self.root;
        for w in words {
            node = node.children.entry(w.clone()).or_default();
        }
        if !node.terminal {
            node.terminal = true;
            self.len += 1;
            self.max_words = self.max_words.max(words.len());
        }
    }

    /// Inserts the normalized form of a raw multi-word name.
    pub fn insert_name(&mut self, name: &str) {
        let key = NameKey::new(name);
        if !key.is_empty() {
            self.insert(&key.words());
        }
    }

    pub fn contains(&self, words: &[String]) -> bool {
        if words.len() < 2 {
            return false;
        }
        let mut node = &self.root;
        for w in words {
            match node.children.get(w) {
                Some(next) => node = next,
                None => return false,
            }
        }
        node.terminal
    }

    /// Length of the longest lexicon member that is a prefix of `words`, or
    /// None when no member matches.
    pub fn longest_match(&self, words: &[&str]) -> Option<usize> {
        let mut node = &self.root;
        let mut best = None;
        for (i, w) in words.iter().enumerate() {
            match node.children.get(*w) {
                Some(next) => {
                    node = next;
                    if node.terminal && i + 1 >= 2 {
                        best = Some(i + 1);
                    }
                }
                None => break,
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Word count of the longest member.
    pub fn max_words(&self) -> usize {
        self.max_words
    }

    /// Merges additional multi-word names, one per line; blank lines and `#`
    /// comments ignored. Single-word lines are skipped.
    pub fn merge_from_reader<R: BufRead>(&mut self, reader: R) -> std::io::Result<usize> {
        let mut added = 0;
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let before = self.len;
            self.insert_name(trimmed);
            if self.len > before {
                added += 1;
            }
        }
        Ok(added)
    }
}

/// Sentence-splitting and entity-recognition configuration: abbreviations that
/// suppress sentence boundaries and function words ignored at sentence starts.
#[derive(Debug, Clone)]
pub struct TokenizeConfig {
    abbreviations: HashSet<String>,
    initial_stoplist: HashSet<String>,
}

// Stored lowercase without the trailing period.
const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "u.s", "u.k", "no", "vs", "prof", "gen", "col", "lt", "e.g",
    "i.e", "etc", "approx", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "oct", "nov",
    "dec",
];

const DEFAULT_INITIAL_STOPLIST: &[&str] = &[
    "the", "a", "an", "in", "on", "at", "after", "before", "when", "while", "once", "during",
    "then", "there", "this", "that", "these", "those", "they", "he", "she", "it", "we", "i",
    "but", "and", "or", "as", "by", "for", "from", "to", "with", "several", "some", "many",
    "most", "all", "no", "not", "one", "two", "each", "their", "his", "her", "our", "its", "of",
    "over", "under", "along", "near", "around", "through", "across", "later", "soon", "here",
    "now", "finally", "eventually", "meanwhile", "instead", "still", "yet", "so", "if",
];

impl Default for TokenizeConfig {
    fn default() -> Self {
        TokenizeConfig {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            initial_stoplist: DEFAULT_INITIAL_STOPLIST
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl TokenizeConfig {
    /// Replaces the abbreviation list from a file: one entry per line, with or
    /// without the trailing period, case-insensitive.
    pub fn with_abbreviations<R: BufRead>(mut self, reader: R) -> std::io::Result<Self> {
        let mut set = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim().trim_end_matches('.').to_lowercase();
            if !t.is_empty() && !t.starts_with('#') {
                set.insert(t);
            }
        }
        self.abbreviations = set;
        Ok(self)
    }

    /// Replaces the sentence-initial function-word stoplist from a file.
    pub fn with_initial_stoplist<R: BufRead>(mut self, reader: R) -> std::io::Result<Self> {
        let mut set = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim().to_lowercase();
            if !t.is_empty() && !t.starts_with('#') {
                set.insert(t);
            }
        }
        self.initial_stoplist = set;
        Ok(self)
    }

    fn is_abbreviation(&self, chunk: &str) -> bool {
        let stripped: String = chunk
            .chars()
            .skip_while(|c| !c.is_alphanumeric())
            .collect();
        let t = stripped.trim_end_matches('.').to_lowercase();
        !t.is_empty() && self.abbreviations.contains(&t)
    }

    fn is_initial_stopword(&self, word: &str) -> bool {
        self.initial_stoplist.contains(&word.to_lowercase())
    }
}

/// Splits normalized text into sentence spans. Boundaries fall after `.`, `!`,
/// or `?` followed by whitespace and an uppercase letter or digit, and at
/// newlines (paragraph breaks). The abbreviation list suppresses false
/// boundaries after `.`. Spans tile the text without overlap.
pub fn split_sentences(text: &NormalizedText, config: &TokenizeConfig) -> Vec<Span> {
    let chars: Vec<char> = text.text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    let mut starts = vec![0usize];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if i + 1 < chars.len() {
                starts.push(i + 1);
            }
            i += 1;
            continue;
        }
        if c == '.' || c == '!' || c == '?' {
            if c == '.' {
                // back up over the non-whitespace chunk ending at this period
                let mut s = i;
                while s > 0 && !chars[s - 1].is_whitespace() {
                    s -= 1;
                }
                let chunk: String = chars[s..=i].iter().collect();
                if config.is_abbreviation(&chunk) {
                    i += 1;
                    continue;
                }
            }
            // require whitespace, then an uppercase letter or digit
            let mut j = i + 1;
            // trailing quote directly after the terminator stays with the sentence
            if j < chars.len() && (chars[j] == '"' || chars[j] == '\'') {
                j += 1;
            }
            if j < chars.len() && chars[j].is_whitespace() && chars[j] != '\n' {
                let mut k = j;
                while k < chars.len() && chars[k].is_whitespace() && chars[k] != '\n' {
                    k += 1;
                }
                if k < chars.len() && (chars[k].is_uppercase() || chars[k].is_ascii_digit()) {
                    starts.push(k);
                    i = k;
                    continue;
                }
            }
        }
        i += 1;
    }
    starts.dedup();
    let mut spans = Vec::with_capacity(starts.len());
    for (n, &start) in starts.iter().enumerate() {
        let end = starts.get(n + 1).copied().unwrap_or(chars.len());
        if start < end {
            spans.push(Span::new(start, end));
        }
    }
    spans
}

/// Splits one sentence into word and punctuation tokens. Leading and trailing
/// punctuation detaches into separate tokens; internal hyphens, apostrophes,
/// and digit group separators stay inside the word. Spans are absolute char
/// offsets into the narrative text.
pub fn split_words(text: &NormalizedText, sentence: Span) -> Vec<Token> {
    let chars: Vec<char> = text.text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = sentence.start;
    while i < sentence.end {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < sentence.end && !chars[j].is_whitespace() {
            j += 1;
        }
        // chunk is chars[i..j]
        let mut l = i;
        let mut r = j;
        while l < r && !chars[l].is_alphanumeric() {
            l += 1;
        }
        while r > l && !chars[r - 1].is_alphanumeric() {
            r -= 1;
        }
        for (p, &c) in chars.iter().enumerate().take(l).skip(i) {
            tokens.push(Token::punct(c, p));
        }
        if l < r {
            let value: String = chars[l..r].iter().collect();
            tokens.push(Token::word(&value, Span::new(l, r)));
        }
        for (p, &c) in chars.iter().enumerate().take(j).skip(r) {
            tokens.push(Token::punct(c, p));
        }
        i = j;
    }
    tokens
}

/// Tokenizes a whole narrative into sentences with temporal indices assigned
/// 1..n across the narrative in span order.
pub fn tokenize_narrative(text: &NormalizedText, config: &TokenizeConfig) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut next_index = 1;
    for (n, span) in split_sentences(text, config).into_iter().enumerate() {
        let mut tokens = split_words(text, span);
        for t in &mut tokens {
            t.temporal_index = next_index;
            next_index += 1;
        }
        sentences.push(Sentence {
            index: n + 1,
            tokens,
            span,
        });
    }
    sentences
}

/// Greedy leftmost-longest multi-word merge over one sentence's tokens. At
/// each position the longest lexicon match over normalized word values merges
/// into a single token whose value joins the originals with single spaces;
/// scanning resumes after the match. Indices are reassigned by the caller.
pub fn merge_multiwords(tokens: &[Token], lex: &MWLexicon) -> Vec<Token> {
    if lex.is_empty() || tokens.is_empty() {
        return tokens.to_vec();
    }
    let keys: Vec<String> = tokens
        .iter()
        .map(|t| {
            if t.is_word() {
                NameKey::new(&t.value).as_str().to_owned()
            } else {
                String::new()
            }
        })
        .collect();
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if !tokens[i].is_word() {
            out.push(tokens[i].clone());
            i += 1;
            continue;
        }
        let window: Vec<&str> = keys[i..].iter().map(String::as_str).collect();
        match lex.longest_match(&window) {
            Some(n) if tokens[i..i + n].iter().all(Token::is_word) => {
                let value = tokens[i..i + n]
                    .iter()
                    .map(|t| t.value.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                let span = Span::new(tokens[i].span.start, tokens[i + n - 1].span.end);
                out.push(Token::word(&value, span));
                i += n;
            }
            _ => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Applies [`merge_multiwords`] to every sentence and reassigns temporal
/// indices 1..n across the narrative.
pub fn merge_sentences(sentences: &[Sentence], lex: &MWLexicon) -> Vec<Sentence> {
    let mut out = Vec::with_capacity(sentences.len());
    let mut next_index = 1;
    for s in sentences {
        let mut tokens = merge_multiwords(&s.tokens, lex);
        for t in &mut tokens {
            t.temporal_index = next_index;
            next_index += 1;
        }
        out.push(Sentence {
            index: s.index,
            tokens,
            span: s.span,
        });
    }
    out
}

const RUN_CONNECTORS: &[&str] = &[
    "of", "de", "del", "da", "la", "le", "el", "al", "ez", "bin",
];

/// Rule-based significant-entity recognition: emits maximal runs of
/// capitalized word tokens as single candidate-entity tokens. A lowercase
/// connector (of, de, del, da, la, le, el, al, ez, bin) joins a run only when
/// flanked by capitalized words; a sentence-initial capitalized word is
/// skipped when it is a function word. Emitted entities get indices 1..n.
pub fn recognize_significant_entities(
    sentences: &[Sentence],
    config: &TokenizeConfig,
) -> Vec<Token> {
    let mut entities = Vec::new();
    for sentence in sentences {
        let tokens = &sentence.tokens;
        let first_word_pos = tokens.iter().position(Token::is_word);
        let mut run: Vec<&Token> = Vec::new();
        let flush = |run: &mut Vec<&Token>, entities: &mut Vec<Token>| {
            if run.is_empty() {
                return;
            }
            let value = run
                .iter()
                .map(|t| t.value.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let span = Span::new(run[0].span.start, run[run.len() - 1].span.end);
            let mut tok = Token::word(&value, span);
            tok.capitalized = true;
            entities.push(tok);
            run.clear();
        };
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            if run_capitalized(tok) {
                let sentence_initial = Some(i) == first_word_pos;
                if run.is_empty() && sentence_initial && config.is_initial_stopword(&tok.value) {
                    i += 1;
                    continue;
                }
                run.push(tok);
                i += 1;
                continue;
            }
            let is_connector = tok.is_word()
                && RUN_CONNECTORS.contains(&tok.value.to_lowercase().as_str());
            if is_connector && !run.is_empty() {
                if let Some(next) = tokens.get(i + 1) {
                    if run_capitalized(next) {
                        run.push(tok);
                        run.push(next);
                        i += 2;
                        continue;
                    }
                }
            }
            flush(&mut run, &mut entities);
            i += 1;
        }
        flush(&mut run, &mut entities);
    }
    for (n, e) in entities.iter_mut().enumerate() {
        e.temporal_index = n + 1;
    }
    entities
}
