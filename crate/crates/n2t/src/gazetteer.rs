//! The location dimension: an indexed gazetteer built from GeoNames main-export
//! data, with homonym supplements, deterministic lookup, disambiguation
//! policies, and derivation of the multi-word place-name lexicon.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::normalize::{replace_special_characters, transliterate_to_ascii};
use crate::tokenize::MWLexicon;

/// One gazetteer record in GeoNames main-export shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub geoname_id: u64,
    pub canonical_name: String,
    pub ascii_name: String,
    pub alternate_names: BTreeSet<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub feature_class: char,
    pub feature_code: String,
    pub country_code: String,
    pub population: u64,
}

/// Canonical join key for gazetteer names and token values: transliterated to
/// ASCII, case-folded, inner whitespace collapsed, ends trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NameKey(String);

impl NameKey {
    pub fn new(name: &str) -> Self {
        let (ascii, _) = transliterate_to_ascii(&replace_special_characters(name));
        let folded = ascii.to_lowercase();
        let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
        NameKey(collapsed)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The key split into its space-separated words.
    pub fn words(&self) -> Vec<String> {
        self.0.split(' ').map(str::to_owned).collect()
    }
}

impl fmt::Display for NameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Why an input line was skipped during ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineDiagnostic {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub reason: String,
}

/// Errors raised by gazetteer construction and queries.
#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("no valid entries in gazetteer input")]
    NoValidEntries,
    #[error("unknown geoname id {0}")]
    UnknownGeonameId(u64),
    #[error("cannot resolve an empty candidate list")]
    EmptyCandidates,
    #[error("gazetteer read failed: {0}")]
    Io(#[from] std::io::Error),
}

/// How homonymous lookup results are reduced to a single entry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DisambiguationPolicy {
    /// Highest population first, ties by smallest geoname id.
    #[default]
    Population,
    /// Prefer entries whose country code appears in the list (earlier wins),
    /// then fall back to the population order.
    PreferCountries(Vec<String>),
    /// Prefer populated places (class P), then administrative entries (class
    /// A), then everything else, within each group by population order.
    PreferFeatureClasses,
}

/// The indexed collection of gazetteer entries.
///
/// Immutable after construction apart from [`LocationDimension::add_homonyms`];
/// shareable across threads.
#[derive(Debug, Default)]
pub struct LocationDimension {
    entries: Vec<GazetteerEntry>,
    name_index: HashMap<NameKey, Vec<usize>>,
    canonical_index: HashMap<String, Vec<usize>>,
    by_geoname_id: HashMap<u64, usize>,
}

/// Outcome of an ingest run: the dimension plus per-line diagnostics.
#[derive(Debug)]
pub struct IngestOutcome {
    pub dimension: LocationDimension,
    pub skipped: Vec<LineDiagnostic>,
}

impl IngestOutcome {
    pub fn entry_count(&self) -> usize {
        self.dimension.len()
    }
}

// GeoNames main export: 19 tab-separated columns, no header.
// geonameid, name, asciiname, alternatenames (comma-separated), latitude,
// longitude, feature class, feature code, country code, cc2, admin1..admin4,
// population, elevation, dem, timezone, modification date.
const GEONAMES_FIELDS: usize = 19;

fn parse_line(line: &str) -> Result<GazetteerEntry, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != GEONAMES_FIELDS {
        return Err(format!(
            "expected {GEONAMES_FIELDS} tab-separated fields, found {}",
            fields.len()
        ));
    }
    let geoname_id: u64 = fields[0]
        .trim()
        .parse()
        .map_err(|_| format!("unparseable geoname id {:?}", fields[0]))?;
    if geoname_id == 0 {
        return Err("geoname id must be positive".to_owned());
    }
    let canonical_name = fields[1].trim();
    if canonical_name.is_empty() {
        return Err("empty name".to_owned());
    }
    let latitude: f64 = fields[4]
        .trim()
        .parse()
        .map_err(|_| format!("unparseable latitude {:?}", fields[4]))?;
    let longitude: f64 = fields[5]
        .trim()
        .parse()
        .map_err(|_| format!("unparseable longitude {:?}", fields[5]))?;
    if !latitude.is_finite() || !(-90.0..=90.0).contains(&latitude) {
        return Err(format!("latitude {latitude} out of range [-90, 90]"));
    }
    if !longitude.is_finite() || !(-180.0..=180.0).contains(&longitude) {
        return Err(format!("longitude {longitude} out of range [-180, 180]"));
    }
    let feature_class = match fields[6].trim() {
        "" => ' ',
        s if s.chars().count() == 1 => s.chars().next().unwrap(),
        s => return Err(format!("feature class {s:?} is not a single character")),
    };
    let population: u64 = match fields[14].trim() {
        "" => 0,
        s => s
            .parse()
            .map_err(|_| format!("unparseable population {s:?}"))?,
    };
    let alternate_names: BTreeSet<String> = fields[3]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    Ok(GazetteerEntry {
        geoname_id,
        canonical_name: canonical_name.to_owned(),
        ascii_name: fields[2].trim().to_owned(),
        alternate_names,
        latitude,
        longitude,
        feature_class,
        feature_code: fields[7].trim().to_owned(),
        country_code: fields[8].trim().to_owned(),
        population,
    })
}

/// Builds a [`LocationDimension`] from GeoNames main-export lines. Malformed
/// lines are skipped and reported; the only fatal case is zero valid entries.
pub fn ingest_geonames<I, S>(lines: I) -> Result<IngestOutcome, GazetteerError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut dim = LocationDimension::default();
    let mut skipped = Vec::new();
    for (idx, line) in lines.into_iter().enumerate() {
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(entry) => {
                if dim.by_geoname_id.contains_key(&entry.geoname_id) {
                    skipped.push(LineDiagnostic {
                        line: idx + 1,
                        reason: format!("duplicate geoname id {}", entry.geoname_id),
                    });
                } else {
                    dim.push_entry(entry);
                }
            }
            Err(reason) => skipped.push(LineDiagnostic {
                line: idx + 1,
                reason,
            }),
        }
    }
    if dim.entries.is_empty() {
        return Err(GazetteerError::NoValidEntries);
    }
    dim.sort_index_lists();
    Ok(IngestOutcome {
        dimension: dim,
        skipped,
    })
}

/// Reads GeoNames lines from any buffered reader. Lines starting with `#` are
/// treated as comments and ignored.
pub fn ingest_geonames_reader<R: BufRead>(reader: R) -> Result<IngestOutcome, GazetteerError> {
    let lines = reader
        .lines()
        .collect::<Result<Vec<String>, std::io::Error>>()?;
    ingest_geonames(lines.iter().filter(|l| !l.starts_with('#')))
}

/// Parses a homonym supplement: tab-separated `geoname_id<TAB>name` pairs, one
/// per line, blank lines and `#` comments ignored.
pub fn parse_homonym_supplement<R: BufRead>(
    reader: R,
) -> Result<Vec<(u64, String)>, GazetteerError> {
    let mut pairs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some((id, name)) = trimmed.split_once('\t') {
            if let Ok(id) = id.trim().parse::<u64>() {
                let name = name.trim();
                if !name.is_empty() {
                    pairs.push((id, name.to_owned()));
                }
            }
        }
    }
    Ok(pairs)
}

impl LocationDimension {
    fn push_entry(&mut self, entry: GazetteerEntry) {
        let idx = self.entries.len();
        self.by_geoname_id.insert(entry.geoname_id, idx);
        self.canonical_index
            .entry(entry.canonical_name.clone())
            .or_default()
            .push(idx);
        for name in entry.all_names() {
            let key = NameKey::new(name);
            if key.is_empty() {
                continue;
            }
            let slot = self.name_index.entry(key).or_default();
            if !slot.contains(&idx) {
                slot.push(idx);
            }
        }
        self.entries.push(entry);
    }

    // Lookup order: descending population, ties broken by ascending geoname id.
    fn sort_index_lists(&mut self) {
        let entries = &self.entries;
        let sort = |ids: &mut Vec<usize>| {
            ids.sort_by(|&a, &b| {
                entries[b]
                    .population
                    .cmp(&entries[a].population)
                    .then(entries[a].geoname_id.cmp(&entries[b].geoname_id))
            });
        };
        for ids in self.name_index.values_mut() {
            sort(ids);
        }
        for ids in self.canonical_index.values_mut() {
            sort(ids);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct normalized name keys in the index.
    pub fn indexed_name_count(&self) -> usize {
        self.name_index.len()
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn by_geoname_id(&self, id: u64) -> Option<&GazetteerEntry> {
        self.by_geoname_id.get(&id).map(|&i| &self.entries[i])
    }

    /// All entries indexed under `key`, highest population first, ties by
    /// ascending geoname id. Empty when the key is absent.
    pub fn lookup(&self, key: &NameKey) -> Vec<&GazetteerEntry> {
        self.name_index
            .get(key)
            .map(|ids| ids.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    /// Entries whose canonical name equals `name` exactly (case-sensitive), in
    /// the same deterministic order as [`LocationDimension::lookup`].
    pub fn lookup_canonical(&self, name: &str) -> Vec<&GazetteerEntry> {
        self.canonical_index
            .get(name)
            .map(|ids| ids.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    /// Adds homonyms for an existing entry and indexes them. Already-known
    /// names are no-ops.
    pub fn add_homonyms(
        &mut self,
        geoname_id: u64,
        names: &[String],
    ) -> Result<(), GazetteerError> {
        let &idx = self
            .by_geoname_id
            .get(&geoname_id)
            .ok_or(GazetteerError::UnknownGeonameId(geoname_id))?;
        let mut touched = false;
        for name in names {
            let name = name.trim();
            if name.is_empty() {
                continue;
            }
            self.entries[idx].alternate_names.insert(name.to_owned());
            let key = NameKey::new(name);
            if key.is_empty() {
                continue;
            }
            let slot = self.name_index.entry(key).or_default();
            if !slot.contains(&idx) {
                slot.push(idx);
                touched = true;
            }
        }
        if touched {
            self.sort_index_lists();
        }
        Ok(())
    }

    /// Derives the multi-word lexicon: the tokenized form of every indexed
    /// name whose normalized key has two or more words.
    pub fn derive_mw_lexicon(&self) -> MWLexicon {
        let mut lex = MWLexicon::new();
        for entry in &self.entries {
            for name in entry.all_names() {
                let key = NameKey::new(name);
                if key.is_empty() {
                    continue;
                }
                let words = key.words();
                if words.len() >= 2 {
                    lex.insert(&words);
                }
            }
        }
        lex
    }
}

impl GazetteerEntry {
    /// Canonical, ascii, and alternate names, in that order.
    pub fn all_names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical_name.as_str())
            .chain(
                (!self.ascii_name.is_empty() && self.ascii_name != self.canonical_name)
                    .then_some(self.ascii_name.as_str()),
            )
            .chain(self.alternate_names.iter().map(String::as_str))
    }
}

/// Reduces a non-empty candidate list to a single entry under the policy.
pub fn resolve<'a>(
    candidates: &[&'a GazetteerEntry],
    policy: &DisambiguationPolicy,
) -> Result<&'a GazetteerEntry, GazetteerError> {
    if candidates.is_empty() {
        return Err(GazetteerError::EmptyCandidates);
    }
    // Candidates arrive in lookup order (population desc, id asc); the rank
    // comparison repeats that order so ties keep it.
    let rank = |e: &GazetteerEntry| -> usize {
        match policy {
            DisambiguationPolicy::Population => 0,
            DisambiguationPolicy::PreferCountries(countries) => countries
                .iter()
                .position(|c| c.eq_ignore_ascii_case(&e.country_code))
                .unwrap_or(countries.len()),
            DisambiguationPolicy::PreferFeatureClasses => match e.feature_class {
                'P' => 0,
                'A' => 1,
                _ => 2,
            },
        }
    };
    Ok(candidates
        .iter()
        .min_by(|a, b| {
            rank(a)
                .cmp(&rank(b))
                .then(b.population.cmp(&a.population))
                .then(a.geoname_id.cmp(&b.geoname_id))
        })
        .copied()
        .expect("candidates checked non-empty"))
}
