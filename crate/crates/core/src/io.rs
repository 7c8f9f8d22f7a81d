//! JSON map and report files.
//!
//! ```json
//! {"top": [{"label": "A", "length": "2/3"}, {"label": "B", "length": "1/3"}],
//!  "bottom": [{"label": "B", "length": "1/3"}, {"label": "A", "length": "2/3"}],
//!  "slopes": {"A": "1", "B": "1"}}
//! ```
//!
//! A gap is `{"gap": "1/4"}`. Scalars are `"p/q"` strings or
//! `{"a": "p/q", "b": "p/q", "d": 5}` for `a + b√d`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::decompose::{check_bounds, BoundCheck, DecompositionReport, ValidationSummary};
use crate::ggiet::{GGiet, GietError, Item, ItemKind, Label, Layout, Violation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub d: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub label: Label,
    pub length: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapDoc {
    pub gap: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ItemDoc {
    Interval(IntervalDoc),
    Gap(GapDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    pub top: Vec<ItemDoc>,
    pub bottom: Vec<ItemDoc>,
    pub slopes: BTreeMap<Label, Scalar>,
    /// Optional fill colors for rendering, e.g. `"#ffcc00"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<BTreeMap<Label, String>>,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error(transparent)]
    Build(#[from] GietError),
    #[error("invalid map: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("declared field sqrt({declared}) but data lives in sqrt({found})")]
    FieldMismatch { declared: u64, found: u64 },
}

impl From<serde_json::Error> for MapError {
    fn from(e: serde_json::Error) -> Self {
        MapError::Json { line: e.line(), column: e.column(), msg: e.to_string() }
    }
}

fn to_items(v: &[ItemDoc]) -> Vec<Item> {
    v.iter()
        .map(|i| match i {
            ItemDoc::Interval(x) => Item::interval(x.label.clone(), x.length.clone()),
            ItemDoc::Gap(g) => Item::gap(g.gap.clone()),
        })
        .collect()
}

fn to_docs(l: &Layout) -> Vec<ItemDoc> {
    l.items()
        .iter()
        .map(|i| match &i.kind {
            ItemKind::Interval(label) => {
                ItemDoc::Interval(IntervalDoc { label: label.clone(), length: i.length.clone() })
            }
            ItemKind::Gap => ItemDoc::Gap(GapDoc { gap: i.length.clone() }),
        })
        .collect()
}

impl MapFile {
    pub fn parse(text: &str) -> Result<MapFile, MapError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_map(m: &GGiet) -> MapFile {
        MapFile {
            field: m.field().ok().flatten().map(|d| FieldSpec { d }),
            top: to_docs(m.top()),
            bottom: to_docs(m.bottom()),
            slopes: m.slopes().clone(),
            colors: None,
        }
    }

    /// Builds and validates the map. Layouts are canonicalized on the way.
    pub fn to_map(&self) -> Result<GGiet, MapError> {
        let m =
            GGiet::new(Layout::new(to_items(&self.top))?, Layout::new(to_items(&self.bottom))?, self.slopes.clone());
        let v = m.validate();
        if !v.is_empty() {
            return Err(MapError::Invalid(v));
        }
        if let (Some(decl), Ok(Some(found))) = (&self.field, m.field()) {
            if decl.d != found {
                return Err(MapError::FieldMismatch { declared: decl.d, found });
            }
        }
        Ok(m)
    }

    /// Messages describing what canonicalization changed, if anything.
    pub fn canonicalization_notes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, docs) in [("top", &self.top), ("bottom", &self.bottom)] {
            if let Ok(l) = Layout::new(to_items(docs)) {
                if l.items().len() != docs.len() {
                    out.push(format!("{} line: {} items merged or dropped into {}", name, docs.len(), l.items().len()));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }
}

/// A decomposition report with its bound checks and, when run, the
/// cross-validation summary. The input map is echoed inside `report`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub report: DecompositionReport,
    pub bounds: BoundCheck,
    #[serde(default)]
    pub validation: Option<ValidationSummary>,
}

impl ReportFile {
    pub fn new(report: DecompositionReport, validation: Option<ValidationSummary>) -> ReportFile {
        let bounds = check_bounds(&report);
        ReportFile { report, bounds, validation }
    }

    pub fn parse(text: &str) -> Result<ReportFile, MapError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl Serialize for GGiet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MapFile::from_map(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GGiet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = MapFile::deserialize(d)?;
        f.to_map().map_err(serde::de::Error::custom)
    }
}
