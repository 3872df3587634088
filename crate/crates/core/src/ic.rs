//! Information-content measures over taxonomy nodes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::taxonomy::{Taxonomy, TaxonomyError};

/// How much information a single concept code carries.
///
/// `Level` reads the node depth directly: the root carries none, each
/// step away from it adds one unit. `Sanchez` is a corpus-free estimate
/// from the tree shape: nodes subsuming few leaves relative to their
/// ancestor count are more informative. Both yield 0.0 at the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IcMeasure {
    Level,
    Sanchez,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown information-content measure {0:?} (expected `level` or `sanchez`)")]
pub struct ParseIcError(pub String);

impl IcMeasure {
    pub const ALL: [IcMeasure; 2] = [IcMeasure::Level, IcMeasure::Sanchez];

    pub fn name(self) -> &'static str {
        match self {
            IcMeasure::Level => "level",
            IcMeasure::Sanchez => "sanchez",
        }
    }
}

impl fmt::Display for IcMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IcMeasure {
    type Err = ParseIcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "level" => Ok(IcMeasure::Level),
            "sanchez" => Ok(IcMeasure::Sanchez),
            other => Err(ParseIcError(other.to_owned())),
        }
    }
}

/// Information content of every node in one taxonomy under one measure.
///
/// Values are computed eagerly so concept-similarity scoring never pays
/// more than an index lookup per node.
#[derive(Debug, Clone, PartialEq)]
pub struct IcTable {
    measure: IcMeasure,
    values: Vec<f64>,
    max: f64,
}

impl IcTable {
    pub fn compute(taxonomy: &Taxonomy, measure: IcMeasure) -> Self {
        let n = taxonomy.node_count();
        let values: Vec<f64> = (0..n)
            .map(|id| match measure {
                IcMeasure::Level => f64::from(taxonomy.depth_by_id(id)),
                IcMeasure::Sanchez => {
                    let leaves = taxonomy.leaf_count_by_id(id) as f64;
                    let subsumers = f64::from(taxonomy.subsumer_count_by_id(id));
                    let total = taxonomy.total_leaves() as f64;
                    -((leaves / subsumers + 1.0) / (total + 1.0)).ln()
                }
            })
            .collect();
        let max = values.iter().copied().fold(0.0, f64::max);
        Self { measure, values, max }
    }

    pub fn measure(&self) -> IcMeasure {
        self.measure
    }

    /// Largest information content of any node in the taxonomy.
    pub fn max_ic(&self) -> f64 {
        self.max
    }

    pub(crate) fn value_by_id(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn get(&self, taxonomy: &Taxonomy, code: &str) -> Result<f64, TaxonomyError> {
        Ok(self.values[taxonomy.id_of(code)?])
    }
}

/// Convenience wrapper computing one value without building a table.
pub fn ic(taxonomy: &Taxonomy, measure: IcMeasure, code: &str) -> Result<f64, TaxonomyError> {
    IcTable::compute(taxonomy, measure).get(taxonomy, code)
}
