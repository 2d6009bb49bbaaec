use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProbeError;
use crate::training::text::tokenize;

/// Value recorded for an attribute an item does not carry.
pub const UNKNOWN_VALUE: &str = "unknown";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub title: Vec<String>,
    pub attributes: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    items: Vec<Item>,
    schema: BTreeMap<String, BTreeSet<String>>,
}

/// One line of a catalog file.
#[derive(Deserialize)]
struct CatalogLine {
    id: serde_json::Value,
    title: String,
    #[serde(default)]
    attributes: BTreeMap<String, serde_json::Value>,
}

fn value_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Catalog {
    /// Infer the schema and fill every missing attribute with `"unknown"`.
    /// Attribute values are lowercased and trimmed.
    pub fn new(mut items: Vec<Item>) -> Result<Self, ProbeError> {
        if items.is_empty() {
            return Err(ProbeError::EmptyCatalog);
        }
        let mut ids = HashSet::new();
        for item in &items {
            if !ids.insert(item.id.as_str()) {
                return Err(ProbeError::DuplicateId(item.id.clone()));
            }
        }
        let mut schema: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for item in &mut items {
            for v in item.attributes.values_mut() {
                *v = v.trim().to_lowercase();
            }
            for (k, v) in &item.attributes {
                schema.entry(k.clone()).or_default().insert(v.clone());
            }
        }
        for (attr, values) in schema.iter_mut() {
            values.insert(UNKNOWN_VALUE.to_string());
            for item in &mut items {
                item.attributes
                    .entry(attr.clone())
                    .or_insert_with(|| UNKNOWN_VALUE.to_string());
            }
        }
        Ok(Catalog { items, schema })
    }

    /// JSON Lines: `{"id": .., "title": "..", "attributes": {..}}` per line.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, ProbeError> {
        let mut items = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CatalogLine = serde_json::from_str(&line)
                .map_err(|e| ProbeError::CatalogLine(n + 1, e.to_string()))?;
            items.push(Item {
                id: value_text(&parsed.id),
                title: tokenize(&parsed.title),
                attributes: parsed
                    .attributes
                    .iter()
                    .map(|(k, v)| (k.clone(), value_text(v)))
                    .collect(),
            });
        }
        Self::new(items)
    }

    pub fn load(path: &Path) -> Result<Self, ProbeError> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn schema(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.schema
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.schema.keys().map(String::as_str)
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.schema.contains_key(attribute)
    }

    pub(crate) fn require(&self, attribute: &str) -> Result<(), ProbeError> {
        if self.has_attribute(attribute) {
            Ok(())
        } else {
            Err(ProbeError::UnknownAttribute(attribute.to_string()))
        }
    }

    /// The item's value for `attribute`; `"unknown"` when unset.
    pub fn value(&self, item: usize, attribute: &str) -> &str {
        self.items[item]
            .attributes
            .get(attribute)
            .map(String::as_str)
            .unwrap_or(UNKNOWN_VALUE)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.items.iter().position(|i| i.id == id)
    }
}
