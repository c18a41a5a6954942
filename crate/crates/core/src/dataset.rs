//! Registry of ingested knowledge graphs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense identifier of a registered dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetId(pub u32);

impl DatasetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: DatasetId,
    pub name: String,
    pub source_path: String,
    pub triple_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("dataset {0:?} is already registered")]
    DuplicateName(String),
    #[error("dataset name must not be empty")]
    EmptyName,
    #[error("unknown dataset id {0}")]
    UnknownId(DatasetId),
}

/// Datasets in registration order; ids are dense from 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetRegistry {
    datasets: Vec<Dataset>,
}

impl DatasetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, source_path: &str) -> Result<DatasetId, RegistryError> {
        if name.is_empty() {
            return Err(RegistryError::EmptyName);
        }
        if self.by_name(name).is_some() {
            return Err(RegistryError::DuplicateName(name.to_string()));
        }
        let id = DatasetId(self.datasets.len() as u32);
        self.datasets.push(Dataset {
            id,
            name: name.to_string(),
            source_path: source_path.to_string(),
            triple_count: 0,
        });
        Ok(id)
    }

    pub fn set_triple_count(&mut self, id: DatasetId, count: u64) -> Result<(), RegistryError> {
        let dataset = self
            .datasets
            .get_mut(id.index())
            .ok_or(RegistryError::UnknownId(id))?;
        dataset.triple_count = count;
        Ok(())
    }

    pub fn get(&self, id: DatasetId) -> Option<&Dataset> {
        self.datasets.get(id.index())
    }

    pub fn by_name(&self, name: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.name == name)
    }

    pub fn contains(&self, id: DatasetId) -> bool {
        id.index() < self.datasets.len()
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Dataset> {
        self.datasets.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_names_unique() {
        let mut registry = DatasetRegistry::new();
        assert_eq!(registry.register("kgA", "a.nt").unwrap(), DatasetId(0));
        assert_eq!(registry.register("kgB", "b.nt").unwrap(), DatasetId(1));
        assert_eq!(
            registry.register("kgA", "other.nt"),
            Err(RegistryError::DuplicateName("kgA".into()))
        );
        assert_eq!(registry.len(), 2);
        assert_eq!(registry.by_name("kgB").unwrap().source_path, "b.nt");
    }

    #[test]
    fn triple_count_updates() {
        let mut registry = DatasetRegistry::new();
        let id = registry.register("kgA", "a.nt").unwrap();
        registry.set_triple_count(id, 6).unwrap();
        assert_eq!(registry.get(id).unwrap().triple_count, 6);
        assert_eq!(
            registry.set_triple_count(DatasetId(9), 1),
            Err(RegistryError::UnknownId(DatasetId(9)))
        );
        assert_eq!(registry.register("", "x"), Err(RegistryError::EmptyName));
    }
}
