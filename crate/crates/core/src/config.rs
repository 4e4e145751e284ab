//! Serializable blocks shared by run configs and library specs.

use serde::{Deserialize, Serialize};

use crate::consistency::{ConsistencyFactor, FactorKind};
use crate::error::Result;
use crate::families::{FamilyRef, FamilyRegistry, Hyperparameters};

/// `{"id": "gauss_loc", "params": {"sigma0": 1.0}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub id: String,
    #[serde(default)]
    pub params: Hyperparameters,
}

impl FamilyConfig {
    pub fn new(id: &str) -> Self {
        FamilyConfig {
            id: id.to_owned(),
            params: Hyperparameters::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }

    pub fn build(&self) -> Result<FamilyRef> {
        FamilyRegistry::builtin().build(&self.id, &self.params)
    }
}

/// Builds the family and resolves the factor kind against it.
pub fn build_pair(family: &FamilyConfig, factor: &FactorKind) -> Result<(FamilyRef, ConsistencyFactor)> {
    let fam = family.build()?;
    let f = ConsistencyFactor::for_family(factor, fam.as_ref())?;
    Ok((fam, f))
}
