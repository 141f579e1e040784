//! Evaluation: per-narrative precision/recall/F1 against ground truth,
//! an order score over the longest common subsequence, and the four-method
//! comparison report.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::extract::{run_method, MethodConfig, MethodId, Trajectory};
use crate::gazetteer::{LocationDimension, NameKey};
use crate::normalize::RawNarrative;
use crate::tokenize::MWLexicon;

/// Published trie-based geotagger baseline, printed for context next to the
/// MWT_GEO_AUG score.
pub const ILP_REFERENCE_F1: f64 = 0.785;

/// One expected location mention in narration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geoname_id: Option<u64>,
}

/// Ordered expected location lists, keyed by narrative id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth(pub BTreeMap<String, Vec<TruthEntry>>);

impl GroundTruth {
    pub fn get(&self, narrative_id: &str) -> Option<&[TruthEntry]> {
        self.0.get(narrative_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("ground truth parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("no narrative ids shared between corpus and ground truth")]
    NoOverlap,
}

/// Parses the ground-truth document: a JSON object mapping narrative id to an
/// ordered array of `{name, geoname_id?}` entries.
pub fn load_ground_truth(document: &str) -> Result<GroundTruth, EvalError> {
    let truth: GroundTruth = serde_json::from_str(document)?;
    Ok(truth)
}

/// Counts and derived ratios for one extraction-vs-truth comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratios(tp: usize, fp: usize, fnn: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fnn == 0 {
        1.0
    } else {
        tp as f64 / (tp + fnn) as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Scores an extracted trajectory against the ordered truth list. Matching is
/// multiset-based over normalized name keys: each truth occurrence matches at
/// most one extracted visit with an equal key.
pub fn score_extraction(extracted: &Trajectory, truth: &[TruthEntry]) -> ExtractionScore {
    let mut truth_counts: HashMap<NameKey, usize> = HashMap::new();
    for t in truth {
        *truth_counts.entry(NameKey::new(&t.name)).or_insert(0) += 1;
    }
    let mut extracted_counts: HashMap<NameKey, usize> = HashMap::new();
    for v in &extracted.visits {
        *extracted_counts.entry(v.name_key()).or_insert(0) += 1;
    }
    let tp: usize = extracted_counts
        .iter()
        .map(|(key, &n)| n.min(truth_counts.get(key).copied().unwrap_or(0)))
        .sum();
    let fp = extracted.visits.len() - tp;
    let fnn = truth.len() - tp;
    let (precision, recall, f1) = ratios(tp, fp, fnn);
    ExtractionScore {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fnn,
        precision,
        recall,
        f1,
    }
}

fn lcs_len(a: &[NameKey], b: &[NameKey]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Ratio of the longest common subsequence between extracted and truth name
/// sequences to the truth length; 1.0 when truth is empty.
pub fn order_score(extracted: &Trajectory, truth: &[TruthEntry]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let ex: Vec<NameKey> = extracted.name_keys();
    let tr: Vec<NameKey> = truth.iter().map(|t| NameKey::new(&t.name)).collect();
    lcs_len(&ex, &tr) as f64 / tr.len() as f64
}

/// Scores for one narrative under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeScore {
    pub narrative_id: String,
    #[serde(flatten)]
    pub score: ExtractionScore,
    pub order_score: f64,
    /// Extracted visit values, in order.
    pub extracted: Vec<String>,
}

/// Aggregate report for one method: pooled counts, micro-averaged ratios, and
/// per-narrative details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Pooled LCS length over pooled truth length.
    pub order_score: f64,
    pub narratives: Vec<NarrativeScore>,
}

/// The four-method comparison over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Reports sorted by descending F1 (ties keep method declaration order).
    pub methods: Vec<MethodReport>,
    /// Narrative ids present in the corpus but absent from ground truth.
    pub skipped_narratives: Vec<String>,
    pub ilp_reference_f1: f64,
}

/// Runs all four methods over every narrative covered by ground truth and
/// micro-averages the pooled counts per method.
pub fn compare_methods(
    corpus: &[RawNarrative],
    truth: &GroundTruth,
    dim: &LocationDimension,
    lex: &MWLexicon,
    config: &MethodConfig,
) -> Result<ComparisonReport, EvalError> {
    let mut covered: Vec<&RawNarrative> = corpus
        .iter()
        .filter(|n| truth.get(&n.id).is_some())
        .collect();
    covered.sort_by(|a, b| a.id.cmp(&b.id));
    if covered.is_empty() {
        return Err(EvalError::NoOverlap);
    }
    let mut skipped: Vec<String> = corpus
        .iter()
        .filter(|n| truth.get(&n.id).is_none())
        .map(|n| n.id.clone())
        .collect();
    skipped.sort();

    let mut methods = Vec::with_capacity(MethodId::ALL.len());
    for method in MethodId::ALL {
        let mut narratives = Vec::with_capacity(covered.len());
        let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
        let (mut lcs_total, mut truth_total) = (0usize, 0usize);
        for narrative in &covered {
            let expected = truth.get(&narrative.id).expect("covered ids have truth");
            let trajectory = run_method(narrative, method, dim, lex, config);
            let score = score_extraction(&trajectory, expected);
            tp += score.true_positives;
            fp += score.false_positives;
            fnn += score.false_negatives;
            let truth_keys: Vec<NameKey> =
                expected.iter().map(|t| NameKey::new(&t.name)).collect();
            lcs_total += lcs_len(&trajectory.name_keys(), &truth_keys);
            truth_total += truth_keys.len();
            narratives.push(NarrativeScore {
                narrative_id: narrative.id.clone(),
                score,
                order_score: order_score(&trajectory, expected),
                extracted: trajectory.visits.iter().map(|v| v.value().to_owned()).collect(),
            });
        }
        let (precision, recall, f1) = ratios(tp, fp, fnn);
        methods.push(MethodReport {
            method: method.label().to_owned(),
            true_positives: tp,
            false_positives: fp,
            false_negatives: fnn,
            precision,
            recall,
            f1,
            order_score: if truth_total == 0 {
                1.0
            } else {
                lcs_total as f64 / truth_total as f64
            },
            narratives,
        });
    }
    methods.sort_by(|a, b| b.f1.partial_cmp(&a.f1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ComparisonReport {
        methods,
        skipped_narratives: skipped,
        ilp_reference_f1: ILP_REFERENCE_F1,
    })
}

/// Renders the comparison as an aligned plain-text table with the published
/// reference score as a footer.
pub fn render_table(report: &ComparisonReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>6} {:>6} {:>6} {:>10} {:>8} {:>8} {:>8}",
        "method", "TP", "FP", "FN", "precision", "recall", "F1", "order"
    )
    .unwrap();
    out.push_str(&"-".repeat(70));
    out.push('\n');
    for m in &report.methods {
        writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>6} {:>10.4} {:>8.4} {:>8.4} {:>8.4}",
            m.method,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.precision,
            m.recall,
            m.f1,
            m.order_score
        )
        .unwrap();
    }
    if let Some(best) = report.methods.iter().find(|m| m.method == "MWT_GEO_AUG") {
        writeln!(
            out,
            "\nILP reference F1 {:.3} vs MWT_GEO_AUG F1 {:.4}",
            report.ilp_reference_f1, best.f1
        )
        .unwrap();
    }
    if !report.skipped_narratives.is_empty() {
        writeln!(
            out,
            "skipped (no ground truth): {}",
            report.skipped_narratives.join(", ")
        )
        .unwrap();
    }
    out
}
