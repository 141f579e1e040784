//! Geospatial token identification (the gazetteer join), optional
//! part-of-speech tagging, trajectory construction, and the four-method
//! extraction pipeline.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gazetteer::{resolve, DisambiguationPolicy, LocationDimension, NameKey};
use crate::normalize::{normalize, RawNarrative};
use crate::tokenize::{
    merge_sentences, recognize_significant_entities, tokenize_narrative, MWLexicon, PosTag,
    Sentence, Token, TokenizeConfig,
};

/// A token identified as a location, with its resolved gazetteer entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoToken {
    #[serde(flatten)]
    pub token: Token,
    pub geoname_id: u64,
}

impl GeoToken {
    pub fn value(&self) -> &str {
        &self.token.value
    }

    pub fn name_key(&self) -> NameKey {
        NameKey::new(&self.token.value)
    }

    pub fn latitude(&self) -> f64 {
        self.token.latitude.expect("geo token carries latitude")
    }

    pub fn longitude(&self) -> f64 {
        self.token.longitude.expect("geo token carries longitude")
    }
}

/// Time-ordered sequence of geospatial tokens extracted from one narrative.
/// Revisits are preserved; the sequence may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub narrative_id: String,
    pub visits: Vec<GeoToken>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Visit values as normalized name keys, in order.
    pub fn name_keys(&self) -> Vec<NameKey> {
        self.visits.iter().map(GeoToken::name_key).collect()
    }

    /// Collapses consecutive visits that resolve to the same entry. Mentions
    /// are preserved by default; this is an optional post-filter.
    pub fn dedup_consecutive(&self) -> Trajectory {
        let mut visits: Vec<GeoToken> = Vec::with_capacity(self.visits.len());
        for v in &self.visits {
            if visits.last().map(|p| p.geoname_id) != Some(v.geoname_id) {
                visits.push(v.clone());
            }
        }
        Trajectory {
            narrative_id: self.narrative_id.clone(),
            visits,
        }
    }
}

/// The 5-tuple produced by the optional tagging pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedTuple {
    pub value: String,
    pub tag: PosTag,
    pub geo_flag: bool,
    pub longitude: Option<f64>,
    pub latitude: Option<f64>,
}

/// The four extraction methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodId {
    /// Significant-entity tokenization, canonical-name matching only.
    St,
    /// Significant-entity tokenization with full gazetteer augmentation.
    StGeoAug,
    /// Multi-word tokenization, canonical-name matching only.
    Mwt,
    /// Multi-word tokenization with full gazetteer augmentation.
    MwtGeoAug,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [
        MethodId::St,
        MethodId::StGeoAug,
        MethodId::Mwt,
        MethodId::MwtGeoAug,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            MethodId::St => "ST",
            MethodId::StGeoAug => "ST_GEO_AUG",
            MethodId::Mwt => "MWT",
            MethodId::MwtGeoAug => "MWT_GEO_AUG",
        }
    }

    /// The short flag form: st, st-geo, mwt, mwt-geo.
    pub fn slug(&self) -> &'static str {
        match self {
            MethodId::St => "st",
            MethodId::StGeoAug => "st-geo",
            MethodId::Mwt => "mwt",
            MethodId::MwtGeoAug => "mwt-geo",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "st" => Ok(MethodId::St),
            "st-geo" | "st_geo_aug" | "st+geo" => Ok(MethodId::StGeoAug),
            "mwt" => Ok(MethodId::Mwt),
            "mwt-geo" | "mwt_geo_aug" | "mwt+geo" => Ok(MethodId::MwtGeoAug),
            other => Err(format!(
                "unknown method {other:?} (expected st, st-geo, mwt, or mwt-geo)"
            )),
        }
    }
}

/// What the gazetteer join matches against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Full name index: canonical, ascii, and alternate names under key
    /// normalization.
    #[default]
    FullAug,
    /// Exact, case-sensitive equality with the canonical name only (the
    /// non-augmented baseline).
    CanonicalOnly,
}

/// Token values never treated as locations, compared under key normalization.
/// Defaults cover English function words and common words that collide with
/// gazetteer entries.
#[derive(Debug, Clone)]
pub struct GeoStoplist(HashSet<NameKey>);

const DEFAULT_GEO_STOPLIST: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "to", "by", "as", "and", "or", "but", "along",
    "best", "most", "young", "nice", "mobile", "march", "may", "bay", "hope", "price", "come",
    "split", "reading", "police", "central", "union", "deal", "sale",
];

impl Default for GeoStoplist {
    fn default() -> Self {
        GeoStoplist(
            DEFAULT_GEO_STOPLIST
                .iter()
                .map(|w| NameKey::new(w))
                .collect(),
        )
    }
}

impl GeoStoplist {
    pub fn empty() -> Self {
        GeoStoplist(HashSet::new())
    }

    /// Loads a stoplist from a file, one token per line, replacing the
    /// defaults. Blank lines and `#` comments ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut set = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let key = NameKey::new(t);
            if !key.is_empty() {
                set.insert(key);
            }
        }
        Ok(GeoStoplist(set))
    }

    pub fn contains(&self, key: &NameKey) -> bool {
        self.0.contains(key)
    }
}

/// Options for the gazetteer join.
#[derive(Debug, Clone, Default)]
pub struct GeoMatchOptions {
    pub mode: MatchMode,
    pub policy: DisambiguationPolicy,
    /// Candidates below this population are ignored (0 = no filter).
    pub min_population: u64,
    pub stoplist: GeoStoplist,
}

/// Full pipeline configuration shared by all four methods.
#[derive(Debug, Clone, Default)]
pub struct MethodConfig {
    pub tokenize: TokenizeConfig,
    pub policy: DisambiguationPolicy,
    pub min_population: u64,
    pub stoplist: GeoStoplist,
}

impl MethodConfig {
    fn match_options(&self, mode: MatchMode) -> GeoMatchOptions {
        GeoMatchOptions {
            mode,
            policy: self.policy.clone(),
            min_population: self.min_population,
            stoplist: self.stoplist.clone(),
        }
    }
}

/// Joins tokens against the location dimension, in order, preserving
/// multiplicity. A match requires a word token whose first alphabetic source
/// character was uppercase and whose normalized value is not stoplisted;
/// candidates come from the full name index or from exact canonical-name
/// equality depending on the mode.
pub fn identify_geospatial_tokens(
    tokens: &[Token],
    dim: &LocationDimension,
    opts: &GeoMatchOptions,
) -> Vec<GeoToken> {
    let mut out = Vec::new();
    for token in tokens {
        if !token.is_word() || !token.capitalized {
            continue;
        }
        let key = NameKey::new(&token.value);
        if key.is_empty() || opts.stoplist.contains(&key) {
            continue;
        }
        let mut candidates = match opts.mode {
            MatchMode::FullAug => dim.lookup(&key),
            MatchMode::CanonicalOnly => dim.lookup_canonical(&token.value),
        };
        if opts.min_population > 0 {
            candidates.retain(|e| e.population >= opts.min_population);
        }
        if candidates.is_empty() {
            continue;
        }
        let entry = resolve(&candidates, &opts.policy).expect("candidates non-empty");
        let mut tok = token.clone();
        tok.geo_flag = true;
        tok.latitude = Some(entry.latitude);
        tok.longitude = Some(entry.longitude);
        out.push(GeoToken {
            token: tok,
            geoname_id: entry.geoname_id,
        });
    }
    out
}

// Closed-class word lists for the tagging pass.
const DET_WORDS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no",
    "another", "such",
];
const ADP_WORDS: &[&str] = &[
    "in", "on", "at", "to", "from", "of", "by", "with", "for", "over", "under", "into",
    "through", "across", "near", "between", "after", "before", "during", "until", "along",
    "around", "toward", "towards", "against", "without", "via",
];
const PRON_WORDS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "his", "hers",
    "theirs", "ours", "mine", "yours", "who", "whom", "which", "themselves", "himself", "herself",
    "itself",
];
const CONJ_WORDS: &[&str] = &[
    "and", "or", "but", "nor", "so", "yet", "because", "although", "while", "when", "if",
    "since", "unless", "whereas",
];
const AUX_WORDS: &[&str] = &[
    "is", "am", "are", "was", "were", "be", "been", "being", "have", "has", "had", "do", "does",
    "did", "will", "would", "can", "could", "shall", "should", "may", "might", "must",
];

fn closed_class(word: &str) -> Option<PosTag> {
    let w = word.to_lowercase();
    let w = w.as_str();
    if DET_WORDS.contains(&w) {
        Some(PosTag::DET)
    } else if ADP_WORDS.contains(&w) {
        Some(PosTag::ADP)
    } else if PRON_WORDS.contains(&w) {
        Some(PosTag::PRON)
    } else if CONJ_WORDS.contains(&w) {
        Some(PosTag::CONJ)
    } else if AUX_WORDS.contains(&w) {
        Some(PosTag::AUX)
    } else {
        None
    }
}

/// Optional part-of-speech pass over tokenized sentences. Location tokens tag
/// PROPN and carry coordinates; closed-class words take their class; other
/// capitalized non-sentence-initial words tag PROPN; `-ly` words tag ADV;
/// everything else is NOUN; punctuation is PUNCT.
pub fn tag_pos(
    sentences: &[Sentence],
    dim: &LocationDimension,
    opts: &GeoMatchOptions,
) -> Vec<TaggedTuple> {
    let mut out = Vec::new();
    for sentence in sentences {
        let first_word_pos = sentence.tokens.iter().position(Token::is_word);
        for (i, token) in sentence.tokens.iter().enumerate() {
            if !token.is_word() {
                out.push(TaggedTuple {
                    value: token.value.clone(),
                    tag: PosTag::PUNCT,
                    geo_flag: false,
                    longitude: None,
                    latitude: None,
                });
                continue;
            }
            let geo = identify_geospatial_tokens(std::slice::from_ref(token), dim, opts);
            if let Some(g) = geo.first() {
                out.push(TaggedTuple {
                    value: token.value.clone(),
                    tag: PosTag::PROPN,
                    geo_flag: true,
                    longitude: Some(g.longitude()),
                    latitude: Some(g.latitude()),
                });
                continue;
            }
            let tag = if let Some(class) = closed_class(&token.value) {
                class
            } else if token.capitalized && Some(i) != first_word_pos {
                PosTag::PROPN
            } else if token.value.to_lowercase().ends_with("ly") && token.value.len() > 2 {
                PosTag::ADV
            } else {
                PosTag::NOUN
            };
            out.push(TaggedTuple {
                value: token.value.clone(),
                tag,
                geo_flag: false,
                longitude: None,
                latitude: None,
            });
        }
    }
    out
}

/// Wraps an ordered geo-token sequence as a trajectory. No deduplication, no
/// reordering.
pub fn build_trajectory(narrative_id: &str, geo_tokens: Vec<GeoToken>) -> Trajectory {
    Trajectory {
        narrative_id: narrative_id.to_owned(),
        visits: geo_tokens,
    }
}

/// Runs one extraction method end to end over a narrative.
pub fn run_method(
    raw: &RawNarrative,
    method: MethodId,
    dim: &LocationDimension,
    lex: &MWLexicon,
    config: &MethodConfig,
) -> Trajectory {
    let norm = normalize(raw);
    let sentences = tokenize_narrative(&norm, &config.tokenize);
    let mode = match method {
        MethodId::St | MethodId::Mwt => MatchMode::CanonicalOnly,
        MethodId::StGeoAug | MethodId::MwtGeoAug => MatchMode::FullAug,
    };
    let opts = config.match_options(mode);
    let geo_tokens = match method {
        MethodId::St | MethodId::StGeoAug => {
            let entities = recognize_significant_entities(&sentences, &config.tokenize);
            identify_geospatial_tokens(&entities, dim, &opts)
        }
        MethodId::Mwt | MethodId::MwtGeoAug => {
            let merged = merge_sentences(&sentences, lex);
            let tokens: Vec<Token> = merged.into_iter().flat_map(|s| s.tokens).collect();
            identify_geospatial_tokens(&tokens, dim, &opts)
        }
    };
    build_trajectory(&raw.id, geo_tokens)
}

/// Visit multiset keyed by normalized name, for subset and scoring checks.
pub fn visit_multiset(tr: &Trajectory) -> HashMap<NameKey, usize> {
    let mut counts = HashMap::new();
    for v in &tr.visits {
        *counts.entry(v.name_key()).or_insert(0) += 1;
    }
    counts
}
