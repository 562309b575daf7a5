//! Correctness and coverage metrics for recommended processes, plus the
//! Likert tally used in user studies.
//!
//! Correctness compares the recommended element set against the elements a
//! project actually used, over the full element universe, as a confusion
//! matrix. Coverage relates the recommended set to the universe (catalog
//! coverage) and the validated set (weighted catalog coverage). Degenerate
//! 0/0 ratios are reported as 0 and flagged instead of propagating NaN.

use std::collections::BTreeSet;
use std::io::Read;

use serde::Serialize;

use crate::corpus::ElementStore;
use crate::error::{Error, Result};
use crate::recommender::recommend;
use crate::similarity::SimilarityRanking;

/// Counts of a recommended-vs-tested comparison over a fixed universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_pos: usize,
    #[serde(rename = "fp")]
    pub false_pos: usize,
    #[serde(rename = "fn")]
    pub false_neg: usize,
    #[serde(rename = "tn")]
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Counts recommended/tested agreement over `universe`.
///
/// `tp` are elements both recommended and tested, `fp` recommended only,
/// `fn` tested only, `tn` neither. The four counts always partition the
/// universe. Both sets must be subsets of the universe.
pub fn compare_elements(
    recommended: &BTreeSet<String>,
    tested: &BTreeSet<String>,
    universe: &BTreeSet<String>,
) -> Result<ConfusionMatrix> {
    for (name, set) in [("recommended", recommended), ("tested", tested)] {
        let stray: Vec<String> = set.difference(universe).cloned().collect();
        if !stray.is_empty() {
            return Err(Error::NotInUniverse {
                set: name,
                keys: stray,
            });
        }
    }
    let mut cm = ConfusionMatrix {
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for key in universe {
        match (recommended.contains(key), tested.contains(key)) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, true) => cm.false_neg += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// The seven correctness ratios. Zero-denominator cases yield 0 and the
/// ratio's name lands in `degenerate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrectnessMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub specificity: f64,
    pub f_measure: f64,
    pub degenerate: Vec<&'static str>,
}

pub fn correctness_metrics(cm: &ConfusionMatrix) -> CorrectnessMetrics {
    let (tp, fp, fnn, tn) = (
        cm.true_pos as f64,
        cm.false_pos as f64,
        cm.false_neg as f64,
        cm.true_neg as f64,
    );
    let mut degenerate = Vec::new();
    let mut ratio = |name: &'static str, num: f64, den: f64| {
        if den == 0.0 {
            degenerate.push(name);
            0.0
        } else {
            num / den
        }
    };
    let precision = ratio("precision", tp, tp + fp);
    let recall = ratio("recall", tp, tp + fnn);
    let accuracy = ratio("accuracy", tp + tn, tp + fp + fnn + tn);
    let fp_rate = ratio("fp_rate", fp, fp + tn);
    let fn_rate = ratio("fn_rate", fnn, fnn + tn);
    let specificity = ratio("specificity", tn, fp + tn);
    let f_measure = ratio("f_measure", 2.0 * precision * recall, precision + recall);
    CorrectnessMetrics {
        precision,
        recall,
        accuracy,
        fp_rate,
        fn_rate,
        specificity,
        f_measure,
        degenerate,
    }
}

/// Set form of the coverage inputs: recommended (Sr), all available (Sa),
/// and validated/useful (Ss) element keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageInputs {
    pub sr: BTreeSet<String>,
    pub sa: BTreeSet<String>,
    pub ss: BTreeSet<String>,
}

impl CoverageInputs {
    pub fn counts(&self) -> Result<CoverageCounts> {
        for (name, set) in [("sr", &self.sr), ("ss", &self.ss)] {
            let stray: Vec<String> = set.difference(&self.sa).cloned().collect();
            if !stray.is_empty() {
                return Err(Error::NotInUniverse {
                    set: name,
                    keys: stray,
                });
            }
        }
        Ok(CoverageCounts {
            sr: self.sr.len(),
            sa: self.sa.len(),
            ss: self.ss.len(),
            sr_inter_ss: self.sr.intersection(&self.ss).count(),
        })
    }
}

/// Raw set sizes, the form in which published runs can be replayed without
/// the underlying sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageCounts {
    pub sr: usize,
    pub sa: usize,
    pub ss: usize,
    pub sr_inter_ss: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageMetrics {
    pub catalog: f64,
    pub weighted_catalog: f64,
    pub degenerate: Vec<&'static str>,
}

pub fn coverage_metrics(inputs: &CoverageInputs) -> Result<CoverageMetrics> {
    coverage_from_counts(&inputs.counts()?)
}

pub fn coverage_from_counts(counts: &CoverageCounts) -> Result<CoverageMetrics> {
    if counts.sa == 0 {
        return Err(Error::EmptyUniverse);
    }
    let mut degenerate = Vec::new();
    let catalog = counts.sr as f64 / counts.sa as f64;
    let weighted_catalog = if counts.ss == 0 {
        degenerate.push("weighted_catalog");
        0.0
    } else {
        counts.sr_inter_ss as f64 / counts.ss as f64
    };
    Ok(CoverageMetrics {
        catalog,
        weighted_catalog,
        degenerate,
    })
}

/// Everything one evaluation run yields: the confusion matrix, the
/// correctness ratios, the coverage counts and ratios, and any degenerate
/// flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub cm: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub specificity: f64,
    pub f_measure: f64,
    pub counts: CoverageCounts,
    pub catalog: f64,
    pub weighted_catalog: f64,
    pub degenerate: Vec<&'static str>,
}

impl MetricsReport {
    /// Builds the full report from a confusion matrix plus the universe
    /// size. Sr, Ss and Sr∩Ss follow from the matrix: the recommended set
    /// splits into tp+fp, the tested set into tp+fn, their intersection is
    /// tp. `sa` stays explicit because a replayed run may quote a universe
    /// size that the matrix does not reach.
    pub fn from_confusion(cm: ConfusionMatrix, sa: usize) -> Result<MetricsReport> {
        let counts = CoverageCounts {
            sr: cm.true_pos + cm.false_pos,
            sa,
            ss: cm.true_pos + cm.false_neg,
            sr_inter_ss: cm.true_pos,
        };
        let correctness = correctness_metrics(&cm);
        let coverage = coverage_from_counts(&counts)?;
        let mut degenerate = correctness.degenerate;
        degenerate.extend(coverage.degenerate);
        Ok(MetricsReport {
            cm,
            precision: correctness.precision,
            recall: correctness.recall,
            accuracy: correctness.accuracy,
            fp_rate: correctness.fp_rate,
            fn_rate: correctness.fn_rate,
            specificity: correctness.specificity,
            f_measure: correctness.f_measure,
            counts,
            catalog: coverage.catalog,
            weighted_catalog: coverage.weighted_catalog,
            degenerate,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing report: {e}")))
    }
}

/// Scores a recommendation against what the target project actually used.
///
/// The tested set is the target's own (non-feedback) element keys, the
/// recommended set comes from merging the ranking's neighbors, and the
/// universe is every process element key in the store.
pub fn evaluate_against_extracted(
    store: &ElementStore,
    target_game: &str,
    ranking: &SimilarityRanking,
) -> Result<MetricsReport> {
    let tested = store.process_keys_of(target_game);
    if tested.is_empty() {
        return Err(Error::UnknownGame {
            name: target_game.to_string(),
        });
    }
    if ranking.neighbors.iter().any(|n| n.game == target_game) {
        return Err(Error::Internal(format!(
            "target {target_game:?} appears in its own neighbor ranking"
        )));
    }
    let process = recommend(store, ranking)?;
    let recommended = process.element_set();
    let universe = store.process_universe();
    let cm = compare_elements(&recommended, &tested, &universe)?;
    MetricsReport::from_confusion(cm, universe.len())
}

/// A ratio rendered as a percentage with two decimals, rounding halves away
/// from zero (0.28125 -> "28.13").
pub fn percent(ratio: f64) -> String {
    let scaled = (ratio * 10000.0).round() as i64;
    let sign = if scaled < 0 { "-" } else { "" };
    let magnitude = scaled.abs();
    format!("{sign}{}.{:02}", magnitude / 100, magnitude % 100)
}

/// Aligned text table of labeled reports, one row per run:
/// Precision, Recall, Accuracy, FP Rate, FN Rate, Specificity, F-Measure,
/// Sr, Sa, Ss, Catalog, W. Catalog.
pub fn format_reports_table(rows: &[(String, MetricsReport)]) -> String {
    let headers = [
        "Run",
        "Precision",
        "Recall",
        "Accuracy",
        "FP Rate",
        "FN Rate",
        "Specificity",
        "F-Measure",
        "Sr",
        "Sa",
        "Ss",
        "Catalog",
        "W. Catalog",
    ];
    let mut table: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
    for (label, report) in rows {
        let pct = |v: f64| format!("{}%", percent(v));
        table.push(vec![
            label.clone(),
            pct(report.precision),
            pct(report.recall),
            pct(report.accuracy),
            pct(report.fp_rate),
            pct(report.fn_rate),
            pct(report.specificity),
            pct(report.f_measure),
            report.counts.sr.to_string(),
            report.counts.sa.to_string(),
            report.counts.ss.to_string(),
            pct(report.catalog),
            pct(report.weighted_catalog),
        ]);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[0]));
            } else {
                line.push_str(&format!("  {:>width$}", cell, width = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Aligned text table of raw confusion counts, one row per run.
pub fn format_confusion_table(rows: &[(String, ConfusionMatrix)]) -> String {
    let headers = ["Run", "TP", "FP", "FN", "TN", "Total"];
    let mut table: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
    for (label, cm) in rows {
        table.push(vec![
            label.clone(),
            cm.true_pos.to_string(),
            cm.false_pos.to_string(),
            cm.false_neg.to_string(),
            cm.true_neg.to_string(),
            cm.total().to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[0]));
            } else {
                line.push_str(&format!("  {:>width$}", cell, width = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Reads replayed evaluation runs from CSV `run,tp,fp,fn,tn,sa` and scores
/// each row.
pub fn replay_metrics<R: Read>(reader: R) -> Result<Vec<(String, MetricsReport)>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::InvalidRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let expected = ["run", "tp", "fp", "fn", "tn", "sa"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidRecord {
            line: 1,
            reason: format!("header must be {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for (idx, row) in csv_reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::InvalidRecord {
            line,
            reason: e.to_string(),
        })?;
        if row.len() != 6 {
            return Err(Error::InvalidRecord {
                line,
                reason: format!("expected 6 columns, got {}", row.len()),
            });
        }
        let label = row.get(0).unwrap_or("").to_string();
        let num = |i: usize| -> Result<usize> {
            row.get(i)
                .unwrap_or("")
                .parse::<usize>()
                .map_err(|e| Error::InvalidRecord {
                    line,
                    reason: format!("column {:?}: {e}", expected[i]),
                })
        };
        let cm = ConfusionMatrix {
            true_pos: num(1)?,
            false_pos: num(2)?,
            false_neg: num(3)?,
            true_neg: num(4)?,
        };
        let sa = num(5)?;
        out.push((label, MetricsReport::from_confusion(cm, sa)?));
    }
    Ok(out)
}

/// The five user-centric rating dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LikertDimension {
    Trustworthiness,
    Novelty,
    Serendipity,
    Utility,
    Risk,
}

impl LikertDimension {
    pub const ALL: [LikertDimension; 5] = [
        LikertDimension::Trustworthiness,
        LikertDimension::Novelty,
        LikertDimension::Serendipity,
        LikertDimension::Utility,
        LikertDimension::Risk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LikertDimension::Trustworthiness => "trustworthiness",
            LikertDimension::Novelty => "novelty",
            LikertDimension::Serendipity => "serendipity",
            LikertDimension::Utility => "utility",
            LikertDimension::Risk => "risk",
        }
    }

    fn parse(raw: &str) -> Option<LikertDimension> {
        Self::ALL.iter().copied().find(|d| d.as_str() == raw)
    }
}

/// One five-point rating of a recommended element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LikertRating {
    pub element: String,
    pub dimension: LikertDimension,
    pub score: u8,
}

/// Agree/neutral/disagree counts for one dimension. Scores 4–5 agree,
/// 3 is neutral, 1–2 disagree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LikertTally {
    pub dimension: LikertDimension,
    pub agree: usize,
    pub neutral: usize,
    pub disagree: usize,
}

impl LikertTally {
    pub fn total(&self) -> usize {
        self.agree + self.neutral + self.disagree
    }

    pub fn agree_ratio(&self) -> f64 {
        self.agree as f64 / self.total() as f64
    }

    pub fn neutral_ratio(&self) -> f64 {
        self.neutral as f64 / self.total() as f64
    }

    pub fn disagree_ratio(&self) -> f64 {
        self.disagree as f64 / self.total() as f64
    }
}

/// Tallies ratings per dimension, in the fixed dimension order. Dimensions
/// with no ratings are omitted.
pub fn likert_tally(ratings: &[LikertRating]) -> Vec<LikertTally> {
    LikertDimension::ALL
        .iter()
        .filter_map(|&dimension| {
            let scores: Vec<u8> = ratings
                .iter()
                .filter(|r| r.dimension == dimension)
                .map(|r| r.score)
                .collect();
            if scores.is_empty() {
                return None;
            }
            Some(LikertTally {
                dimension,
                agree: scores.iter().filter(|&&s| s >= 4).count(),
                neutral: scores.iter().filter(|&&s| s == 3).count(),
                disagree: scores.iter().filter(|&&s| s <= 2).count(),
            })
        })
        .collect()
}

/// Reads ratings from CSV `element,dimension,score` with scores in 1..=5.
pub fn read_likert_csv<R: Read>(reader: R) -> Result<Vec<LikertRating>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::InvalidRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["element", "dimension", "score"] {
        return Err(Error::InvalidRecord {
            line: 1,
            reason: "header must be element,dimension,score".into(),
        });
    }
    let mut out = Vec::new();
    for (idx, row) in csv_reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::InvalidRecord {
            line,
            reason: e.to_string(),
        })?;
        let element = row.get(0).unwrap_or("").trim().to_lowercase();
        if element.is_empty() {
            return Err(Error::InvalidRecord {
                line,
                reason: "empty element key".into(),
            });
        }
        let raw_dim = row.get(1).unwrap_or("");
        let dimension =
            LikertDimension::parse(raw_dim).ok_or_else(|| Error::InvalidRecord {
                line,
                reason: format!("unknown dimension {raw_dim:?}"),
            })?;
        let score: i64 = row
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::InvalidRecord {
                line,
                reason: format!("score: {e}"),
            })?;
        if !(1..=5).contains(&score) {
            return Err(Error::ScoreOutOfRange { line, score });
        }
        out.push(LikertRating {
            element,
            dimension,
            score: score as u8,
        });
    }
    Ok(out)
}

/// Aligned text table of Likert tallies with two-decimal percentages.
pub fn format_likert_table(tallies: &[LikertTally]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16}  {:>7}  {:>8}  {:>8}  {:>8}\n",
        "Dimension", "Ratings", "Agree", "Neutral", "Disagree"
    ));
    for tally in tallies {
        out.push_str(&format!(
            "{:<16}  {:>7}  {:>7}%  {:>7}%  {:>7}%\n",
            tally.dimension.as_str(),
            tally.total(),
            percent(tally.agree_ratio()),
            percent(tally.neutral_ratio()),
            percent(tally.disagree_ratio()),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ingest_elements;
    use crate::similarity::Neighbor;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn keys(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    /// The four published evaluation runs: confusion counts, stated universe
    /// size, and the metric percentages they must reproduce.
    const PUBLISHED_RUNS: [((usize, usize, usize, usize), usize, [f64; 9]); 4] = [
        ((32, 44, 285, 540), 913, [42.11, 10.09, 63.49, 7.53, 34.55, 92.47, 16.28, 8.32, 10.09]),
        ((23, 105, 153, 620), 913, [17.97, 13.07, 71.37, 14.48, 19.79, 85.52, 15.13, 14.02, 13.07]),
        ((10, 32, 171, 692), 913, [23.81, 5.52, 77.57, 4.42, 19.81, 95.58, 8.97, 4.60, 5.52]),
        ((14, 19, 358, 505), 913, [42.42, 3.76, 57.92, 3.63, 41.48, 96.37, 6.91, 3.61, 3.76]),
    ];

    #[test]
    fn perfect_recommendation() {
        let u = keys(&["a", "b", "c"]);
        let cm = compare_elements(&u, &u, &u).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix { true_pos: 3, false_pos: 0, false_neg: 0, true_neg: 0 }
        );
    }

    #[test]
    fn empty_sets_are_all_true_negatives() {
        let u = keys(&["a", "b", "c", "d", "e", "f", "g"]);
        let cm = compare_elements(&keys(&[]), &keys(&[]), &u).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix { true_pos: 0, false_pos: 0, false_neg: 0, true_neg: 7 }
        );
    }

    #[test]
    fn hand_enumerated_comparison() {
        let cm = compare_elements(
            &keys(&["b", "c", "d"]),
            &keys(&["a", "b", "c"]),
            &keys(&["a", "b", "c", "d", "e", "f"]),
        )
        .unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix { true_pos: 2, false_pos: 1, false_neg: 1, true_neg: 2 }
        );
        assert_eq!(cm.total(), 6);
    }

    #[test]
    fn stray_keys_are_rejected_by_name() {
        let u = keys(&["a", "b"]);
        let err = compare_elements(&keys(&["a", "x", "y"]), &keys(&["b"]), &u).unwrap_err();
        match err {
            Error::NotInUniverse { set, keys } => {
                assert_eq!(set, "recommended");
                assert_eq!(keys, vec!["x", "y"]);
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert!(compare_elements(&keys(&["a"]), &keys(&["z"]), &u).is_err());
    }

    #[test]
    fn published_correctness_cells_reproduce() {
        for ((tp, fp, fnn, tn), _, expected) in PUBLISHED_RUNS {
            let cm = ConfusionMatrix {
                true_pos: tp,
                false_pos: fp,
                false_neg: fnn,
                true_neg: tn,
            };
            let m = correctness_metrics(&cm);
            let got = [
                m.precision, m.recall, m.accuracy, m.fp_rate, m.fn_rate, m.specificity,
                m.f_measure,
            ];
            for (value, want) in got.iter().zip(&expected[..7]) {
                assert!(
                    (value * 100.0 - want).abs() < 0.01,
                    "{} vs {want}",
                    value * 100.0
                );
                assert_eq!(percent(*value), format!("{want:.2}"));
            }
            assert!(m.degenerate.is_empty());
        }
    }

    #[test]
    fn published_coverage_cells_reproduce() {
        // (Sr, Sa, Ss, Sr∩Ss) with Sr = tp+fp, Ss = tp+fn, Sr∩Ss = tp
        for ((tp, fp, fnn, _), sa, expected) in PUBLISHED_RUNS {
            let counts = CoverageCounts {
                sr: tp + fp,
                sa,
                ss: tp + fnn,
                sr_inter_ss: tp,
            };
            let m = coverage_from_counts(&counts).unwrap();
            assert!((m.catalog * 100.0 - expected[7]).abs() < 0.01);
            assert!((m.weighted_catalog * 100.0 - expected[8]).abs() < 0.01);
            assert_eq!(percent(m.catalog), format!("{:.2}", expected[7]));
            assert_eq!(percent(m.weighted_catalog), format!("{:.2}", expected[8]));
        }
    }

    #[test]
    fn degenerate_ratios_flag_and_zero() {
        let cm = ConfusionMatrix { true_pos: 0, false_pos: 0, false_neg: 0, true_neg: 9 };
        let m = correctness_metrics(&cm);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.specificity, 1.0);
        assert_eq!(m.f_measure, 0.0);
        assert_eq!(m.degenerate, vec!["precision", "recall", "f_measure"]);

        let all_zero = ConfusionMatrix { true_pos: 0, false_pos: 0, false_neg: 0, true_neg: 0 };
        let m = correctness_metrics(&all_zero);
        assert_eq!(m.accuracy, 0.0);
        assert!(m.degenerate.contains(&"accuracy"));
    }

    #[test]
    fn full_coverage_is_one() {
        let sa = keys(&["a", "b", "c"]);
        let inputs = CoverageInputs { sr: sa.clone(), sa: sa.clone(), ss: keys(&["a"]) };
        let m = coverage_metrics(&inputs).unwrap();
        assert_eq!(m.catalog, 1.0);
        assert_eq!(m.weighted_catalog, 1.0);
    }

    #[test]
    fn coverage_guards() {
        let empty = CoverageInputs { sr: keys(&[]), sa: keys(&[]), ss: keys(&[]) };
        assert!(matches!(coverage_metrics(&empty), Err(Error::EmptyUniverse)));

        let no_validated = CoverageInputs {
            sr: keys(&["a"]),
            sa: keys(&["a", "b"]),
            ss: keys(&[]),
        };
        let m = coverage_metrics(&no_validated).unwrap();
        assert_eq!(m.weighted_catalog, 0.0);
        assert_eq!(m.degenerate, vec!["weighted_catalog"]);

        let stray = CoverageInputs {
            sr: keys(&["z"]),
            sa: keys(&["a"]),
            ss: keys(&[]),
        };
        assert!(matches!(
            coverage_metrics(&stray),
            Err(Error::NotInUniverse { set: "sr", .. })
        ));
    }

    fn four_game_store() -> ElementStore {
        let lines = [
            r#"{"game":"g1","phase":"activities","element":"a","desc":"q1","prob":false}"#,
            r#"{"game":"g1","phase":"activities","element":"b","desc":"q2","prob":false}"#,
            r#"{"game":"g2","phase":"activities","element":"b","desc":"q3","prob":false}"#,
            r#"{"game":"g2","phase":"activities","element":"c","desc":"q4","prob":false}"#,
            r#"{"game":"g3","phase":"activities","element":"c","desc":"q5","prob":false}"#,
            r#"{"game":"g3","phase":"activities","element":"d","desc":"q6","prob":false}"#,
            r#"{"game":"g4","phase":"activities","element":"e","desc":"q7","prob":false}"#,
        ];
        ingest_elements(Cursor::new(lines.join("\n"))).unwrap()
    }

    fn ranking_over(target: &str, games: &[&str]) -> SimilarityRanking {
        SimilarityRanking {
            target: target.to_string(),
            neighbors: games
                .iter()
                .enumerate()
                .map(|(i, g)| Neighbor { game: g.to_string(), distance: i as f64 })
                .collect(),
        }
    }

    #[test]
    fn toy_evaluation_run() {
        let store = four_game_store();
        let report =
            evaluate_against_extracted(&store, "g1", &ranking_over("g1", &["g2", "g3"])).unwrap();
        assert_eq!(
            report.cm,
            ConfusionMatrix { true_pos: 1, false_pos: 2, false_neg: 1, true_neg: 1 }
        );
        assert!((report.precision - 1.0 / 3.0).abs() < 1e-15);
        assert!((report.recall - 0.5).abs() < 1e-15);
        assert_eq!(report.counts.sr, 3);
        assert_eq!(report.counts.sa, 5);
        assert_eq!(report.counts.ss, 2);
        assert_eq!(report.counts.sr_inter_ss, 1);
    }

    #[test]
    fn twin_neighbor_scores_perfectly() {
        let lines = [
            r#"{"game":"orig","phase":"activities","element":"a","desc":"q1","prob":false}"#,
            r#"{"game":"orig","phase":"activities","element":"b","desc":"q2","prob":false}"#,
            r#"{"game":"twin","phase":"activities","element":"a","desc":"q1","prob":false}"#,
            r#"{"game":"twin","phase":"activities","element":"b","desc":"q2","prob":false}"#,
        ];
        let store = ingest_elements(Cursor::new(lines.join("\n"))).unwrap();
        let report =
            evaluate_against_extracted(&store, "orig", &ranking_over("orig", &["twin"])).unwrap();
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.f_measure, 1.0);
    }

    #[test]
    fn evaluation_guards() {
        let store = four_game_store();
        assert!(matches!(
            evaluate_against_extracted(&store, "nope", &ranking_over("nope", &["g2"])),
            Err(Error::UnknownGame { .. })
        ));
        // target inside its own ranking is a caller bug
        assert!(matches!(
            evaluate_against_extracted(&store, "g1", &ranking_over("g1", &["g1", "g2"])),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn replay_reads_published_rows() {
        let csv = "run,tp,fp,fn,tn,sa\n\
                   #1,32,44,285,540,913\n\
                   #2,23,105,153,620,913\n\
                   #3,10,32,171,692,913\n\
                   #4,14,19,358,505,913\n";
        let rows = replay_metrics(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].0, "#1");
        assert_eq!(percent(rows[0].1.precision), "42.11");
        assert_eq!(percent(rows[2].1.catalog), "4.60");
        assert_eq!(rows[3].1.counts.sr, 33);

        let table = format_reports_table(&rows);
        assert!(table.contains("Precision"));
        assert!(table.contains("W. Catalog"));
        assert!(table.contains("42.11%"));
        assert!(table.contains("10.09%"));
        assert!(table.contains("913"));
    }

    #[test]
    fn replay_rejects_bad_rows() {
        assert!(matches!(
            replay_metrics("nope,x\n".as_bytes()),
            Err(Error::InvalidRecord { line: 1, .. })
        ));
        let bad_value = "run,tp,fp,fn,tn,sa\n#1,32,forty,285,540,913\n";
        assert!(matches!(
            replay_metrics(bad_value.as_bytes()),
            Err(Error::InvalidRecord { line: 2, .. })
        ));
    }

    #[test]
    fn percent_rounds_halves_away_from_zero() {
        assert_eq!(percent(0.28125), "28.13");
        assert_eq!(percent(0.21875), "21.88");
        assert_eq!(percent(0.59375), "59.38");
        assert_eq!(percent(0.46875), "46.88");
        assert_eq!(percent(0.40625), "40.63");
        assert_eq!(percent(0.0), "0.00");
        assert_eq!(percent(1.0), "100.00");
        assert_eq!(percent(0.125), "12.50");
        assert_eq!(percent(-0.001), "-0.10");
    }

    fn paper_tallies() -> Vec<LikertTally> {
        // counts implied by the published percentages over 32 ratings
        let spec: [(LikertDimension, usize, usize, usize); 5] = [
            (LikertDimension::Trustworthiness, 16, 7, 9),
            (LikertDimension::Novelty, 13, 8, 11),
            (LikertDimension::Serendipity, 12, 12, 8),
            (LikertDimension::Utility, 19, 9, 4),
            (LikertDimension::Risk, 9, 8, 15),
        ];
        let mut ratings = Vec::new();
        for (dimension, agree, neutral, disagree) in spec {
            for i in 0..agree {
                ratings.push(LikertRating { element: format!("e{i}"), dimension, score: 4 });
            }
            for i in 0..neutral {
                ratings.push(LikertRating { element: format!("e{i}"), dimension, score: 3 });
            }
            for i in 0..disagree {
                ratings.push(LikertRating { element: format!("e{i}"), dimension, score: 2 });
            }
        }
        likert_tally(&ratings)
    }

    #[test]
    fn likert_tally_reproduces_published_percentages() {
        let tallies = paper_tallies();
        assert_eq!(tallies.len(), 5);
        let expected = [
            ("trustworthiness", "50.00", "21.88", "28.13"),
            ("novelty", "40.63", "25.00", "34.38"),
            ("serendipity", "37.50", "37.50", "25.00"),
            ("utility", "59.38", "28.13", "12.50"),
            ("risk", "28.13", "25.00", "46.88"),
        ];
        for (tally, (name, agree, neutral, disagree)) in tallies.iter().zip(&expected) {
            assert_eq!(tally.dimension.as_str(), *name);
            assert_eq!(tally.total(), 32);
            assert_eq!(percent(tally.agree_ratio()), *agree);
            assert_eq!(percent(tally.neutral_ratio()), *neutral);
            assert_eq!(percent(tally.disagree_ratio()), *disagree);
            let sum = (tally.agree_ratio() + tally.neutral_ratio() + tally.disagree_ratio()) * 100.0;
            assert!((sum - 100.0).abs() < 0.01);
        }
    }

    #[test]
    fn likert_edge_cases() {
        assert!(likert_tally(&[]).is_empty());
        let all_fives: Vec<LikertRating> = (0..4)
            .map(|i| LikertRating {
                element: format!("e{i}"),
                dimension: LikertDimension::Utility,
                score: 5,
            })
            .collect();
        let tallies = likert_tally(&all_fives);
        assert_eq!(tallies.len(), 1);
        assert_eq!(tallies[0].agree, 4);
        assert_eq!(percent(tallies[0].agree_ratio()), "100.00");
    }

    #[test]
    fn likert_csv_round_trip_and_guards() {
        let csv = "element,dimension,score\n\
                   testing,trustworthiness,5\n\
                   Testing,utility,1\n\
                   pitch,risk,3\n";
        let ratings = read_likert_csv(csv.as_bytes()).unwrap();
        assert_eq!(ratings.len(), 3);
        assert_eq!(ratings[0].score, 5);
        assert_eq!(ratings[1].element, "testing"); // keys normalize like the store
        assert_eq!(ratings[2].dimension, LikertDimension::Risk);

        let out_of_range = "element,dimension,score\ntesting,risk,6\n";
        assert!(matches!(
            read_likert_csv(out_of_range.as_bytes()),
            Err(Error::ScoreOutOfRange { line: 2, score: 6 })
        ));
        let bad_dim = "element,dimension,score\ntesting,speed,3\n";
        assert!(matches!(
            read_likert_csv(bad_dim.as_bytes()),
            Err(Error::InvalidRecord { line: 2, .. })
        ));
    }

    #[test]
    fn likert_table_lists_each_dimension() {
        let table = format_likert_table(&paper_tallies());
        assert!(table.contains("trustworthiness"));
        assert!(table.contains("50.00%"));
        assert!(table.contains("46.88%"));
        assert_eq!(table.lines().count(), 6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn partition_always_holds(
            rec_bits in proptest::collection::vec(any::<bool>(), 12),
            test_bits in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let universe: BTreeSet<String> = (0..12).map(|i| format!("k{i}")).collect();
            let pick = |bits: &[bool]| -> BTreeSet<String> {
                bits.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| format!("k{i}"))
                    .collect()
            };
            let recommended = pick(&rec_bits);
            let tested = pick(&test_bits);
            let cm = compare_elements(&recommended, &tested, &universe).unwrap();
            prop_assert_eq!(cm.total(), universe.len());

            // reconstruction: each universe element in exactly one bucket
            prop_assert_eq!(cm.true_pos, recommended.intersection(&tested).count());
            prop_assert_eq!(cm.false_pos, recommended.difference(&tested).count());
            prop_assert_eq!(cm.false_neg, tested.difference(&recommended).count());
            let union: BTreeSet<_> = recommended.union(&tested).collect();
            prop_assert_eq!(cm.true_neg, universe.len() - union.len());
        }
    }

    proptest! {
        #[test]
        fn metric_identities_hold(
            tp in 0usize..200, fp in 0usize..200, fnn in 0usize..200, tn in 0usize..200,
        ) {
            let cm = ConfusionMatrix { true_pos: tp, false_pos: fp, false_neg: fnn, true_neg: tn };
            let m = correctness_metrics(&cm);
            for value in [m.precision, m.recall, m.accuracy, m.fp_rate, m.fn_rate, m.specificity, m.f_measure] {
                prop_assert!((0.0..=1.0).contains(&value));
            }
            if fp + tn > 0 {
                prop_assert!((m.specificity - (1.0 - m.fp_rate)).abs() < 1e-15);
            }
            if tp + fnn > 0 {
                let miss = fnn as f64 / (tp + fnn) as f64;
                prop_assert!((m.recall - (1.0 - miss)).abs() < 1e-15);
            }
            // f-measure is symmetric in precision and recall: swapping fp and
            // fn swaps the two and must leave it bit-identical
            let swapped = correctness_metrics(&ConfusionMatrix {
                true_pos: tp, false_pos: fnn, false_neg: fp, true_neg: tn,
            });
            prop_assert_eq!(m.f_measure, swapped.f_measure);
        }
    }
}
