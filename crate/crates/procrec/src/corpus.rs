//! Storage for process elements extracted from postmortems.
//!
//! Elements live in a JSON Lines file, one record per line, carrying the
//! fields `game`, `phase`, optional `subphase`, `element`, `desc` and `prob`.
//! An [`AbstractionDictionary`] maps alias element names onto canonical keys
//! so that semantically equal elements merge downstream.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which part of the development process an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Activities,
    Team,
    Characteristics,
    /// Meta-commentary from the postmortem author. Stored, but excluded from
    /// recommendation and evaluation universes.
    Feedback,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Activities => "activities",
            Phase::Team => "team",
            Phase::Characteristics => "characteristics",
            Phase::Feedback => "feedback",
        }
    }
}

/// Production stage of an activity. Only meaningful for `Phase::Activities`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subphase {
    Preproduction,
    Production,
    Postproduction,
}

impl Subphase {
    pub fn as_str(self) -> &'static str {
        match self {
            Subphase::Preproduction => "preproduction",
            Subphase::Production => "production",
            Subphase::Postproduction => "postproduction",
        }
    }
}

/// One process element extracted from a postmortem.
///
/// `key` is the element index name, lowercase and trimmed. `desc` holds the
/// supporting quotation, and `prob` marks elements the postmortem author
/// reported problems with.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub game: String,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subphase: Option<Subphase>,
    #[serde(rename = "element")]
    pub key: String,
    pub desc: String,
    pub prob: bool,
}

impl ElementRecord {
    /// Normalizes fields in place and checks the record invariants.
    fn validate(&mut self) -> std::result::Result<(), String> {
        self.key = self.key.trim().to_lowercase();
        if self.key.is_empty() {
            return Err("element key is empty".into());
        }
        if self.desc.is_empty() {
            return Err("desc is empty".into());
        }
        if self.game.trim().is_empty() {
            return Err("game name is empty".into());
        }
        if self.subphase.is_some() && self.phase != Phase::Activities {
            return Err(format!(
                "subphase is only valid for activities records, phase is {}",
                self.phase.as_str()
            ));
        }
        Ok(())
    }
}

/// Alias element name -> canonical key mapping.
///
/// Lookups are idempotent: every canonical key is a fixed point, so no alias
/// chain is longer than one hop.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbstractionDictionary {
    entries: BTreeMap<String, String>,
}

impl AbstractionDictionary {
    pub fn new(entries: BTreeMap<String, String>) -> Result<Self> {
        let dict = AbstractionDictionary { entries };
        dict.check()?;
        Ok(dict)
    }

    /// Parses the dictionary from a JSON object of alias -> canonical pairs.
    pub fn from_json(source: &str) -> Result<Self> {
        let entries: BTreeMap<String, String> =
            serde_json::from_str(source).map_err(|e| Error::InvalidDictionary {
                reason: e.to_string(),
            })?;
        Self::new(entries)
    }

    fn check(&self) -> Result<()> {
        for (alias, canonical) in &self.entries {
            if alias.trim() != alias || canonical.trim() != canonical {
                return Err(Error::InvalidDictionary {
                    reason: format!("entry {alias:?} -> {canonical:?} has surrounding whitespace"),
                });
            }
            if *alias != alias.to_lowercase() || *canonical != canonical.to_lowercase() {
                return Err(Error::InvalidDictionary {
                    reason: format!("entry {alias:?} -> {canonical:?} is not lowercase"),
                });
            }
            if canonical.is_empty() || alias.is_empty() {
                return Err(Error::InvalidDictionary {
                    reason: "empty alias or canonical key".into(),
                });
            }
            // canonical keys must be fixed points, otherwise lookups would chain
            if let Some(next) = self.entries.get(canonical) {
                if next != canonical {
                    return Err(Error::InvalidDictionary {
                        reason: format!(
                            "canonical key {canonical:?} is itself an alias for {next:?}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical key for `key`; identity when no alias is registered.
    pub fn lookup<'a>(&'a self, key: &'a str) -> &'a str {
        self.entries.get(key).map(String::as_str).unwrap_or(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Immutable collection of [`ElementRecord`]s with a per-game index and the
/// set of distinct canonical keys present.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElementStore {
    records: Vec<ElementRecord>,
    index: BTreeMap<String, Vec<usize>>,
    universe: BTreeSet<String>,
}

impl ElementStore {
    /// Builds a store from already validated records.
    pub fn from_records(records: Vec<ElementRecord>) -> Self {
        let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut universe = BTreeSet::new();
        for (pos, record) in records.iter().enumerate() {
            index.entry(record.game.clone()).or_default().push(pos);
            universe.insert(record.key.clone());
        }
        ElementStore {
            records,
            index,
            universe,
        }
    }

    pub fn records(&self) -> &[ElementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Game names in lexicographic order.
    pub fn games(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn game_count(&self) -> usize {
        self.index.len()
    }

    pub fn contains_game(&self, game: &str) -> bool {
        self.index.contains_key(game)
    }

    /// Distinct canonical keys across all records, feedback included.
    pub fn universe(&self) -> &BTreeSet<String> {
        &self.universe
    }

    /// Distinct canonical keys of process elements, i.e. everything except
    /// feedback records. This is the universe recommendations and evaluations
    /// run against.
    pub fn process_universe(&self) -> BTreeSet<String> {
        self.records
            .iter()
            .filter(|r| r.phase != Phase::Feedback)
            .map(|r| r.key.clone())
            .collect()
    }

    /// All records of `game`, in store order.
    pub fn records_of(&self, game: &str) -> Vec<&ElementRecord> {
        match self.index.get(game) {
            Some(positions) => positions.iter().map(|&p| &self.records[p]).collect(),
            None => Vec::new(),
        }
    }

    /// Records belonging to any of `games`, in store order. Unknown names
    /// contribute nothing; repeated names do not duplicate records.
    pub fn elements_of<S: AsRef<str>>(&self, games: &[S]) -> Vec<&ElementRecord> {
        let wanted: BTreeSet<&str> = games.iter().map(AsRef::as_ref).collect();
        self.records
            .iter()
            .filter(|r| wanted.contains(r.game.as_str()))
            .collect()
    }

    /// Canonical keys of `game`'s process elements (feedback excluded).
    pub fn process_keys_of(&self, game: &str) -> BTreeSet<String> {
        self.records_of(game)
            .into_iter()
            .filter(|r| r.phase != Phase::Feedback)
            .map(|r| r.key.clone())
            .collect()
    }

    /// Returns a new store with every key replaced by its dictionary lookup.
    /// Applying the same dictionary twice is a no-op.
    pub fn normalize(&self, dict: &AbstractionDictionary) -> ElementStore {
        let records = self
            .records
            .iter()
            .map(|r| {
                let mut out = r.clone();
                out.key = dict.lookup(&r.key).to_string();
                out
            })
            .collect();
        ElementStore::from_records(records)
    }

    /// Serializes the store back to JSON Lines, one record per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)
                .map_err(|e| Error::Internal(format!("serializing record: {e}")))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(format!("non-utf8 output: {e}")))
    }
}

/// Reads a JSON Lines stream of element records into a store.
///
/// Keys are lowercased and trimmed on the way in. Blank lines are skipped.
/// A record that fails to parse, violates an invariant, or exactly repeats an
/// earlier record rejects the whole stream with its line number.
pub fn ingest_elements<R: BufRead>(reader: R) -> Result<ElementStore> {
    let mut records: Vec<ElementRecord> = Vec::new();
    let mut seen: HashSet<ElementRecord> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: ElementRecord =
            serde_json::from_str(&line).map_err(|e| Error::InvalidRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        record.validate().map_err(|reason| Error::InvalidRecord {
            line: line_no,
            reason,
        })?;
        if !seen.insert(record.clone()) {
            return Err(Error::DuplicateRecord { line: line_no });
        }
        records.push(record);
    }
    Ok(ElementStore::from_records(records))
}
