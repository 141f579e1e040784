//! Narrative-to-trajectory geoparsing.
//!
//! Turns free-text route narratives into ordered geospatial trajectories:
//! text is normalized to an ASCII-dominant form, tokenized (with multi-word
//! place-name merging against a gazetteer-derived lexicon), joined against an
//! indexed location dimension, and emitted as trajectory documents (JSON,
//! GeoJSON, SVG). An evaluation harness scores the four extraction methods
//! against per-narrative ground truth.

pub mod chart;
pub mod eval;
pub mod extract;
pub mod gazetteer;
pub mod normalize;
pub mod tokenize;
