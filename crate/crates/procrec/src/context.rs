//! The 61-variable video game context catalog and per-project context vectors.
//!
//! A context describes a project as 61 booleans grouped into six categories
//! (activities, team, management, technical, platform, design). The catalog
//! itself is data, bundled from `data/catalog.json`, so the variable set can
//! grow without touching code — the engine only requires a consistent column
//! order.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of context variables in the bundled catalog.
pub const VARIABLE_COUNT: usize = 61;

const CATALOG_JSON: &str = include_str!("../data/catalog.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableGroup {
    Activities,
    Team,
    Management,
    Technical,
    Platform,
    Design,
}

impl VariableGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableGroup::Activities => "activities",
            VariableGroup::Team => "team",
            VariableGroup::Management => "management",
            VariableGroup::Technical => "technical",
            VariableGroup::Platform => "platform",
            VariableGroup::Design => "design",
        }
    }
}

/// One catalog entry: id (`v01`..`v61`), its group and the printed name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextVariable {
    pub id: String,
    pub group: VariableGroup,
    pub description: String,
}

/// The ordered variable catalog. Defines the global column order every
/// context vector and matrix aligns to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableCatalog {
    variables: Vec<ContextVariable>,
}

impl VariableCatalog {
    /// The catalog bundled with the crate.
    pub fn bundled() -> VariableCatalog {
        Self::from_json(CATALOG_JSON).expect("bundled catalog is valid")
    }

    /// Parses a catalog from a JSON array of `{id, group, description}`.
    pub fn from_json(source: &str) -> Result<VariableCatalog> {
        let variables: Vec<ContextVariable> =
            serde_json::from_str(source).map_err(|e| Error::InvalidCatalog {
                reason: e.to_string(),
            })?;
        if variables.is_empty() {
            return Err(Error::InvalidCatalog {
                reason: "catalog has no variables".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for (pos, var) in variables.iter().enumerate() {
            let expected = format!("v{:02}", pos + 1);
            if var.id != expected {
                return Err(Error::InvalidCatalog {
                    reason: format!("id {:?} at position {} (want {expected:?})", var.id, pos + 1),
                });
            }
            if !seen.insert(var.id.clone()) {
                return Err(Error::InvalidCatalog {
                    reason: format!("duplicate id {:?}", var.id),
                });
            }
            if var.description.trim().is_empty() {
                return Err(Error::InvalidCatalog {
                    reason: format!("variable {} has an empty description", var.id),
                });
            }
        }
        Ok(VariableCatalog { variables })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[ContextVariable] {
        &self.variables
    }

    /// Column index of a variable id, e.g. `v01` -> 0.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&ContextVariable> {
        self.variables.iter().find(|v| v.id == id)
    }

    /// Header ids in column order: `v01`, `v02`, ...
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.id.as_str())
    }
}

impl Default for VariableCatalog {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Per-project binary context, aligned to the catalog column order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextVector {
    pub game: String,
    values: Vec<bool>,
}

impl ContextVector {
    pub fn new(game: impl Into<String>, values: Vec<bool>, catalog: &VariableCatalog) -> Result<Self> {
        let game = game.into();
        if values.len() != catalog.len() {
            return Err(Error::DimensionMismatch {
                expected: catalog.len(),
                got: values.len(),
            });
        }
        if !values.iter().any(|&v| v) {
            return Err(Error::EmptyContext { game });
        }
        if game.trim().is_empty() {
            return Err(Error::InvalidContext {
                line: 0,
                reason: "empty game name".into(),
            });
        }
        Ok(ContextVector { game, values })
    }

    /// Builds a vector by setting the named variable ids true and the rest
    /// false. Input order does not matter; unknown ids are rejected.
    pub fn from_ids<S: AsRef<str>>(
        game: impl Into<String>,
        ids: &[S],
        catalog: &VariableCatalog,
    ) -> Result<Self> {
        let mut values = vec![false; catalog.len()];
        for id in ids {
            let id = id.as_ref();
            let pos = catalog.position(id).ok_or_else(|| Error::InvalidContext {
                line: 0,
                reason: format!("unknown variable id {id:?}"),
            })?;
            values[pos] = true;
        }
        ContextVector::new(game, values, catalog)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn true_count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// The vector as 0.0/1.0 reals, the form the similarity engine consumes.
    pub fn as_reals(&self) -> Vec<f64> {
        self.values.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect()
    }

    /// Ids of the variables set true, in column order.
    pub fn true_ids<'a>(&'a self, catalog: &'a VariableCatalog) -> Vec<&'a str> {
        catalog
            .variables()
            .iter()
            .zip(&self.values)
            .filter(|(_, &set)| set)
            .map(|(var, _)| var.id.as_str())
            .collect()
    }
}

/// Soft sanity warnings for a context vector. These never reject: the catalog
/// declares no hard exclusivity, so implausible combinations only warn.
pub fn lint_context(vector: &ContextVector, catalog: &VariableCatalog) -> Vec<String> {
    let mut warnings = Vec::new();
    let set = |id: &str| catalog.position(id).map(|p| vector.values[p]).unwrap_or(false);

    let sizes = ["v19", "v20", "v21"];
    let size_count = sizes.iter().filter(|id| set(id)).count();
    if size_count > 1 {
        warnings.push("conflicting team size: more than one of v19/v20/v21 is set".to_string());
    }
    if size_count == 0 {
        warnings.push("no team size: none of v19/v20/v21 is set".to_string());
    }
    if set("v07") && set("v08") {
        warnings.push(
            "conflicting pre-production length: both v07 (short) and v08 (long) are set"
                .to_string(),
        );
    }
    warnings
}

/// The context table: one row per project, unique game names, shared column
/// order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContextMatrix {
    rows: Vec<ContextVector>,
}

impl ContextMatrix {
    pub fn new() -> ContextMatrix {
        ContextMatrix { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[ContextVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, game: &str) -> Option<&ContextVector> {
        self.rows.iter().find(|r| r.game == game)
    }

    pub fn games(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.game.as_str())
    }

    /// Appends a row; duplicate game names are rejected and leave the matrix
    /// unchanged.
    pub fn append(&mut self, vector: ContextVector) -> Result<()> {
        if self.get(&vector.game).is_some() {
            return Err(Error::DuplicateGame {
                name: vector.game.clone(),
            });
        }
        self.rows.push(vector);
        Ok(())
    }

    /// Parses the context CSV: header `game,v01,...,v61`, cells in {0,1}.
    pub fn read_csv<R: Read>(reader: R, catalog: &VariableCatalog) -> Result<ContextMatrix> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = csv_reader
            .headers()
            .map_err(|e| Error::InvalidContext {
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let mut expected: Vec<String> = vec!["game".to_string()];
        expected.extend(catalog.ids().map(String::from));
        let got: Vec<&str> = headers.iter().collect();
        if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::InvalidContext {
                line: 1,
                reason: format!(
                    "header must be game,{} (got {} columns)",
                    catalog.ids().collect::<Vec<_>>().join(","),
                    got.len()
                ),
            });
        }

        let mut matrix = ContextMatrix::new();
        for (idx, row) in csv_reader.records().enumerate() {
            let line = idx + 2; // header is line 1
            let row = row.map_err(|e| Error::InvalidContext {
                line,
                reason: e.to_string(),
            })?;
            if row.len() != catalog.len() + 1 {
                return Err(Error::InvalidContext {
                    line,
                    reason: format!("expected {} columns, got {}", catalog.len() + 1, row.len()),
                });
            }
            let game = row.get(0).unwrap_or("").to_string();
            let mut values = Vec::with_capacity(catalog.len());
            for cell in row.iter().skip(1) {
                match cell {
                    "0" => values.push(false),
                    "1" => values.push(true),
                    other => {
                        return Err(Error::InvalidContext {
                            line,
                            reason: format!("cell value {other:?} is not 0 or 1"),
                        })
                    }
                }
            }
            let vector =
                ContextVector::new(game, values, catalog).map_err(|e| match e {
                    Error::EmptyContext { game } => Error::InvalidContext {
                        line,
                        reason: format!("context of {game:?} has no true variable"),
                    },
                    other => other,
                })?;
            matrix.append(vector).map_err(|e| match e {
                Error::DuplicateGame { name } => Error::InvalidContext {
                    line,
                    reason: format!("duplicate game name {name:?}"),
                },
                other => other,
            })?;
        }
        Ok(matrix)
    }

    /// Writes the matrix back out in the same CSV layout; a read/write round
    /// trip reproduces the input cell for cell.
    pub fn write_csv<W: Write>(&self, out: W, catalog: &VariableCatalog) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = vec!["game"];
        header.extend(catalog.ids());
        writer
            .write_record(&header)
            .map_err(|e| Error::Internal(format!("writing header: {e}")))?;
        for row in &self.rows {
            let mut record: Vec<String> = Vec::with_capacity(catalog.len() + 1);
            record.push(row.game.clone());
            record.extend(row.values.iter().map(|&v| if v { "1" } else { "0" }.to_string()));
            writer
                .write_record(&record)
                .map_err(|e| Error::Internal(format!("writing row: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| Error::Internal(format!("flushing csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self, catalog: &VariableCatalog) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, catalog)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(format!("non-utf8 csv: {e}")))
    }
}
