//! Merging the process elements of similar projects into one recommended
//! process.
//!
//! Elements from all neighbor games are unioned and grouped by
//! (key, phase, subphase); every supporting quotation is kept with its game
//! of origin, so contradictory advice stays visible and the reader resolves
//! it. No activity flow is synthesized — elements are ordered
//! deterministically and rendering marks unknown order explicitly.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::{ElementStore, Phase, Subphase};
use crate::error::{Error, Result};
use crate::similarity::SimilarityRanking;

/// One supporting quotation: which game it came from, the passage, and
/// whether that game reported problems with the element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceQuote {
    pub game: String,
    pub desc: String,
    pub prob: bool,
}

/// A process element backed by one or more source quotations.
///
/// `prob` is true iff any source reported problems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergedElement {
    pub key: String,
    pub phase: Phase,
    pub subphase: Option<Subphase>,
    pub prob: bool,
    pub sources: Vec<SourceQuote>,
}

/// The merged process recommended for a target context.
///
/// Elements are ordered by phase (activities, then team, then
/// characteristics), activities by subphase (preproduction, production,
/// postproduction, then subphase-less ones), and by key within each group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecommendedProcess {
    pub target: String,
    #[serde(rename = "neighbors")]
    pub neighbor_games: Vec<String>,
    pub elements: Vec<MergedElement>,
}

impl RecommendedProcess {
    /// Distinct canonical keys of the recommendation — the Sr set.
    pub fn element_set(&self) -> BTreeSet<String> {
        self.elements.iter().map(|e| e.key.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing process: {e}")))
    }
}

fn subphase_rank(subphase: Option<Subphase>) -> u8 {
    match subphase {
        Some(Subphase::Preproduction) => 0,
        Some(Subphase::Production) => 1,
        Some(Subphase::Postproduction) => 2,
        None => 3, // unknown order sorts after the known stages
    }
}

/// Builds the recommended process for `ranking.target` from the elements of
/// its neighbors.
///
/// The store should already be normalized (dictionary applied) so that alias
/// keys merge. Feedback records are commentary, not process elements, and are
/// left out. An empty ranking or neighbors without any process element is an
/// error.
pub fn recommend(store: &ElementStore, ranking: &SimilarityRanking) -> Result<RecommendedProcess> {
    let neighbor_games: Vec<String> =
        ranking.neighbors.iter().map(|n| n.game.clone()).collect();
    if neighbor_games.is_empty() {
        return Err(Error::EmptyRecommendation {
            neighbors: neighbor_games,
        });
    }

    // group key -> (subphase, quotes tagged with the neighbor's rank)
    type Group = (Option<Subphase>, Vec<(usize, SourceQuote)>);
    let mut groups: BTreeMap<(Phase, u8, String), Group> = BTreeMap::new();
    for (rank, game) in neighbor_games.iter().enumerate() {
        for record in store.records_of(game) {
            if record.phase == Phase::Feedback {
                continue;
            }
            let group = (
                record.phase,
                subphase_rank(record.subphase),
                record.key.clone(),
            );
            let entry = groups.entry(group).or_insert((record.subphase, Vec::new()));
            entry.1.push((
                rank,
                SourceQuote {
                    game: record.game.clone(),
                    desc: record.desc.clone(),
                    prob: record.prob,
                },
            ));
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyRecommendation {
            neighbors: neighbor_games,
        });
    }

    let elements = groups
        .into_iter()
        .map(|((phase, _, key), (subphase, mut tagged))| {
            // closest neighbor's quote first, then by passage text
            tagged.sort_by(|a, b| {
                a.0.cmp(&b.0)
                    .then_with(|| a.1.desc.cmp(&b.1.desc))
                    .then_with(|| a.1.prob.cmp(&b.1.prob))
            });
            let sources: Vec<SourceQuote> = tagged.into_iter().map(|(_, quote)| quote).collect();
            MergedElement {
                prob: sources.iter().any(|s| s.prob),
                key,
                phase,
                subphase,
                sources,
            }
        })
        .collect();

    Ok(RecommendedProcess {
        target: ranking.target.clone(),
        neighbor_games,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ingest_elements;
    use crate::similarity::Neighbor;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn ranking_over(target: &str, games: &[&str]) -> SimilarityRanking {
        SimilarityRanking {
            target: target.to_string(),
            neighbors: games
                .iter()
                .enumerate()
                .map(|(i, g)| Neighbor {
                    game: g.to_string(),
                    distance: i as f64,
                })
                .collect(),
        }
    }

    fn toy_store() -> ElementStore {
        let lines = [
            r#"{"game":"g1","phase":"activities","subphase":"preproduction","element":"prototyping","desc":"g1 built paper prototypes","prob":false}"#,
            r#"{"game":"g1","phase":"activities","subphase":"production","element":"testing","desc":"g1 tested weekly","prob":true}"#,
            r#"{"game":"g1","phase":"team","element":"small team","desc":"three people","prob":false}"#,
            r#"{"game":"g2","phase":"activities","subphase":"preproduction","element":"prototyping","desc":"g2 prototyped in a jam","prob":false}"#,
            r#"{"game":"g2","phase":"activities","subphase":"preproduction","element":"pitch","desc":"g2 pitched to a publisher","prob":false}"#,
            r#"{"game":"g2","phase":"feedback","element":"feedback","desc":"would ship earlier next time","prob":false}"#,
            r#"{"game":"g3","phase":"characteristics","element":"scope","desc":"kept the scope tiny","prob":true}"#,
            r#"{"game":"g3","phase":"activities","element":"refactoring","desc":"rewrote the input layer","prob":false}"#,
        ];
        ingest_elements(Cursor::new(lines.join("\n"))).unwrap()
    }

    #[test]
    fn single_neighbor_copies_its_elements() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g1"])).unwrap();
        assert_eq!(process.target, "t");
        assert_eq!(process.neighbor_games, vec!["g1"]);
        assert_eq!(process.elements.len(), 3);
        assert!(process.elements.iter().all(|e| e.sources.len() == 1));
        let keys: Vec<&str> = process.elements.iter().map(|e| e.key.as_str()).collect();
        assert_eq!(keys, vec!["prototyping", "testing", "small team"]);
    }

    #[test]
    fn shared_key_merges_sources() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g1", "g2"])).unwrap();
        let prototyping = process
            .elements
            .iter()
            .find(|e| e.key == "prototyping")
            .unwrap();
        assert_eq!(prototyping.sources.len(), 2);
        // nearest neighbor's quote first
        assert_eq!(prototyping.sources[0].game, "g1");
        assert_eq!(prototyping.sources[1].game, "g2");
        assert!(!prototyping.prob);
        // disjoint keys stay separate
        assert_eq!(process.elements.len(), 4);
    }

    #[test]
    fn ordering_is_phase_subphase_key() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g3", "g2", "g1"])).unwrap();
        let order: Vec<(Phase, Option<Subphase>, &str)> = process
            .elements
            .iter()
            .map(|e| (e.phase, e.subphase, e.key.as_str()))
            .collect();
        assert_eq!(
            order,
            vec![
                (Phase::Activities, Some(Subphase::Preproduction), "pitch"),
                (Phase::Activities, Some(Subphase::Preproduction), "prototyping"),
                (Phase::Activities, Some(Subphase::Production), "testing"),
                (Phase::Activities, None, "refactoring"),
                (Phase::Team, None, "small team"),
                (Phase::Characteristics, None, "scope"),
            ]
        );
    }

    #[test]
    fn prob_propagates_from_any_source() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g1", "g3"])).unwrap();
        let testing = process.elements.iter().find(|e| e.key == "testing").unwrap();
        assert!(testing.prob);
        let scope = process.elements.iter().find(|e| e.key == "scope").unwrap();
        assert!(scope.prob);
        let prototyping = process
            .elements
            .iter()
            .find(|e| e.key == "prototyping")
            .unwrap();
        assert!(!prototyping.prob);
    }

    #[test]
    fn feedback_records_are_not_recommended() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g2"])).unwrap();
        assert!(process.elements.iter().all(|e| e.phase != Phase::Feedback));
        assert!(!process.element_set().contains("feedback"));
    }

    #[test]
    fn empty_ranking_is_an_error() {
        let store = toy_store();
        let ranking = ranking_over("t", &[]);
        assert!(matches!(
            recommend(&store, &ranking),
            Err(Error::EmptyRecommendation { .. })
        ));
    }

    #[test]
    fn neighbors_without_elements_are_an_error() {
        let store = toy_store();
        let ranking = ranking_over("t", &["nope", "missing"]);
        match recommend(&store, &ranking) {
            Err(Error::EmptyRecommendation { neighbors }) => {
                assert_eq!(neighbors, vec!["nope", "missing"]);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn element_set_dedups_keys() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g1", "g2", "g3"])).unwrap();
        let set = process.element_set();
        assert_eq!(set.len(), 6);
        assert!(set.contains("prototyping"));
        assert!(set.contains("scope"));
    }

    #[test]
    fn json_shape_is_stable() {
        let store = toy_store();
        let process = recommend(&store, &ranking_over("t", &["g2"])).unwrap();
        let json = process.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["target"], "t");
        assert_eq!(value["neighbors"][0], "g2");
        let first = &value["elements"][0];
        assert_eq!(first["key"], "pitch");
        assert_eq!(first["phase"], "activities");
        assert_eq!(first["subphase"], "preproduction");
        assert_eq!(first["prob"], false);
        assert_eq!(first["sources"][0]["game"], "g2");
        // subphase-less elements serialize the field as null
        let process = recommend(&store, &ranking_over("t", &["g3"])).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&process.to_json().unwrap()).unwrap();
        assert!(value["elements"][0]["subphase"].is_null());
    }

    #[test]
    fn same_inputs_give_identical_json() {
        let store = toy_store();
        let ranking = ranking_over("t", &["g1", "g2", "g3"]);
        let a = recommend(&store, &ranking).unwrap().to_json().unwrap();
        let b = recommend(&store, &ranking).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    fn arbitrary_store_and_games() -> impl Strategy<Value = (Vec<String>, ElementStore)> {
        // up to 4 games, each with a subset of a fixed key alphabet
        proptest::collection::vec(proptest::collection::vec(0usize..6, 1..5), 1..4).prop_map(
            |games| {
                let alphabet = ["a", "b", "c", "d", "e", "f"];
                let mut lines = Vec::new();
                let mut names = Vec::new();
                for (gi, keys) in games.iter().enumerate() {
                    let name = format!("g{gi}");
                    let mut seen = std::collections::BTreeSet::new();
                    for &k in keys {
                        if seen.insert(k) {
                            lines.push(format!(
                                r#"{{"game":"{name}","phase":"activities","element":"{}","desc":"quote {gi}-{k}","prob":{}}}"#,
                                alphabet[k],
                                k % 2 == 0
                            ));
                        }
                    }
                    names.push(name);
                }
                let store = ingest_elements(Cursor::new(lines.join("\n"))).unwrap();
                (names, store)
            },
        )
    }

    proptest! {
        #[test]
        fn union_is_complete_and_invents_nothing((names, store) in arbitrary_store_and_games()) {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let ranking = ranking_over("t", &refs);
            let process = recommend(&store, &ranking).unwrap();

            // every neighbor record appears as a source exactly once
            let mut emitted: Vec<(String, String)> = process
                .elements
                .iter()
                .flat_map(|e| e.sources.iter().map(|s| (s.game.clone(), s.desc.clone())))
                .collect();
            emitted.sort();
            let mut expected: Vec<(String, String)> = store
                .elements_of(&names)
                .iter()
                .filter(|r| r.phase != Phase::Feedback)
                .map(|r| (r.game.clone(), r.desc.clone()))
                .collect();
            expected.sort();
            prop_assert_eq!(emitted, expected);

            // no two elements share a group key
            let mut groups: Vec<(String, Phase, Option<Subphase>)> = process
                .elements
                .iter()
                .map(|e| (e.key.clone(), e.phase, e.subphase))
                .collect();
            let before = groups.len();
            groups.sort();
            groups.dedup();
            prop_assert_eq!(before, groups.len());
        }

        #[test]
        fn adding_a_neighbor_never_removes_anything((names, store) in arbitrary_store_and_games()) {
            prop_assume!(names.len() >= 2);
            let all: Vec<&str> = names.iter().map(String::as_str).collect();
            let fewer = &all[..all.len() - 1];
            let small = recommend(&store, &ranking_over("t", fewer)).unwrap();
            let big = recommend(&store, &ranking_over("t", &all)).unwrap();
            for element in &small.elements {
                let grown = big
                    .elements
                    .iter()
                    .find(|e| {
                        e.key == element.key
                            && e.phase == element.phase
                            && e.subphase == element.subphase
                    })
                    .expect("element vanished when a neighbor was added");
                for source in &element.sources {
                    prop_assert!(grown.sources.contains(source));
                }
            }
        }
    }
}
