//! Shared helpers for integration tests: fixture loading and an independent
//! brute-force extraction oracle.

// each test binary uses a different subset of these helpers
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use n2t::extract::{GeoMatchOptions, GeoToken, MatchMode, Trajectory};
use n2t::gazetteer::{ingest_geonames_reader, resolve, LocationDimension, NameKey};
use n2t::normalize::{load_corpus, normalize, RawNarrative};
use n2t::tokenize::{split_sentences, split_words, MWLexicon, Token, TokenizeConfig};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_fixture_dimension() -> LocationDimension {
    let path = fixtures_dir().join("gazetteer_mini.tsv");
    let file = std::fs::File::open(&path).expect("fixture gazetteer present");
    let outcome = ingest_geonames_reader(std::io::BufReader::new(file)).expect("ingest succeeds");
    assert!(
        outcome.skipped.is_empty(),
        "fixture gazetteer must be fully valid: {:?}",
        outcome.skipped
    );
    outcome.dimension
}

pub fn load_fixture_corpus() -> Vec<RawNarrative> {
    load_corpus(&fixtures_dir().join("corpus")).expect("fixture corpus present")
}

pub fn load_fixture_truth() -> n2t::eval::GroundTruth {
    let raw = std::fs::read_to_string(fixtures_dir().join("ground_truth.json"))
        .expect("ground truth present");
    n2t::eval::load_ground_truth(&raw).expect("ground truth parses")
}

/// Brute-force reference extraction for the MWT+augmentation path.
///
/// Scans every sentence position and tests all word n-grams (n from the
/// lexicon's longest entry down to 1) against the name index with the same
/// normalization, capitalization, and stoplist rules as the real pipeline,
/// applying leftmost-longest selection without a trie. n-grams of length 2+
/// must additionally be lexicon members, mirroring the merge step.
pub fn oracle_extract(
    raw: &RawNarrative,
    dim: &LocationDimension,
    lex: &MWLexicon,
    opts: &GeoMatchOptions,
) -> Trajectory {
    assert!(
        matches!(opts.mode, MatchMode::FullAug),
        "oracle models the augmented join"
    );
    let norm = normalize(raw);
    let config = TokenizeConfig::default();
    let mut visits: Vec<GeoToken> = Vec::new();
    for span in split_sentences(&norm, &config) {
        let tokens = split_words(&norm, span);
        let mut i = 0;
        while i < tokens.len() {
            if !tokens[i].is_word() {
                i += 1;
                continue;
            }
            // longest n-gram of contiguous word tokens that is a lexicon member
            let max_n = lex.max_words().max(1).min(tokens.len() - i);
            let mut take = 1;
            for n in (2..=max_n).rev() {
                let gram = &tokens[i..i + n];
                if !gram.iter().all(Token::is_word) {
                    continue;
                }
                let words: Vec<String> = gram
                    .iter()
                    .map(|t| NameKey::new(&t.value).as_str().to_owned())
                    .collect();
                if lex.contains(&words) {
                    take = n;
                    break;
                }
            }
            let value = tokens[i..i + take]
                .iter()
                .map(|t| t.value.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let capitalized = value
                .chars()
                .find(|c| c.is_alphabetic())
                .is_some_and(|c| c.is_uppercase());
            let key = NameKey::new(&value);
            if capitalized && !key.is_empty() && !opts.stoplist.contains(&key) {
                let mut candidates = dim.lookup(&key);
                if opts.min_population > 0 {
                    candidates.retain(|e| e.population >= opts.min_population);
                }
                if !candidates.is_empty() {
                    let entry = resolve(&candidates, &opts.policy).expect("non-empty");
                    let mut tok = tokens[i].clone();
                    tok.value = value;
                    tok.span.end = tokens[i + take - 1].span.end;
                    tok.geo_flag = true;
                    tok.latitude = Some(entry.latitude);
                    tok.longitude = Some(entry.longitude);
                    visits.push(GeoToken {
                        token: tok,
                        geoname_id: entry.geoname_id,
                    });
                }
            }
            i += take;
        }
    }
    Trajectory {
        narrative_id: raw.id.clone(),
        visits,
    }
}
