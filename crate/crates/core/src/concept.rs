//! Pairwise concept similarity and distance measures.
//!
//! Six measures are supported, each combining tree structure (depths,
//! shortest paths, the lowest common ancestor) with the information
//! content of the nodes involved. One of them is a distance, the rest
//! are similarities; [`Direction`] keeps the two apart so downstream
//! matching knows whether to maximize or minimize.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ic::{IcMeasure, IcTable};
use crate::taxonomy::{Taxonomy, TaxonomyError};

/// Whether larger values mean "more alike" or "further apart".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Similarity,
    Distance,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Similarity => "similarity",
            Direction::Distance => "distance",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sign of the exponential decay factor in the Li measure.
///
/// `OriginalExponent` decays with taxonomic distance (the behavior the
/// measure was designed for). `TableLiteral` flips the sign so similarity
/// grows with distance; it exists so published result tables using that
/// form can be replicated verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LiVariant {
    #[default]
    OriginalExponent,
    TableLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown li variant {0:?} (expected `original` or `table`)")]
pub struct ParseLiVariantError(pub String);

impl LiVariant {
    pub fn name(self) -> &'static str {
        match self {
            LiVariant::OriginalExponent => "original",
            LiVariant::TableLiteral => "table",
        }
    }
}

impl fmt::Display for LiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LiVariant {
    type Err = ParseLiVariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(LiVariant::OriginalExponent),
            "table" => Ok(LiVariant::TableLiteral),
            other => Err(ParseLiVariantError(other.to_owned())),
        }
    }
}

/// The six concept-level measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CsMeasure {
    /// Nguyen & Al-Mubaid path/depth distance.
    NguyenAlMubaid,
    /// Depth-ratio similarity ignoring the common ancestor.
    PathBased,
    /// Leacock & Chodorow log-scaled similarity.
    LeacockChodorow,
    /// One-parameter Wu & Palmer simplification against the tree depth.
    SimpleWuPalmer,
    /// Li's exponential/tanh hybrid.
    Li,
    /// Classic Wu & Palmer IC ratio.
    WuPalmer,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown concept measure {0:?} (expected one of `nguyen`, `path`, `lch`, `swupalmer`, `li`, `wupalmer`)")]
pub struct ParseCsError(pub String);

impl CsMeasure {
    pub const ALL: [CsMeasure; 6] = [
        CsMeasure::NguyenAlMubaid,
        CsMeasure::PathBased,
        CsMeasure::LeacockChodorow,
        CsMeasure::SimpleWuPalmer,
        CsMeasure::Li,
        CsMeasure::WuPalmer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CsMeasure::NguyenAlMubaid => "nguyen",
            CsMeasure::PathBased => "path",
            CsMeasure::LeacockChodorow => "lch",
            CsMeasure::SimpleWuPalmer => "swupalmer",
            CsMeasure::Li => "li",
            CsMeasure::WuPalmer => "wupalmer",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            CsMeasure::NguyenAlMubaid => Direction::Distance,
            _ => Direction::Similarity,
        }
    }

    /// Whether the formula reads information content at all. The two
    /// purely structural measures give identical values under any
    /// [`IcMeasure`].
    pub fn uses_ic(self) -> bool {
        !matches!(self, CsMeasure::NguyenAlMubaid | CsMeasure::PathBased)
    }
}

impl fmt::Display for CsMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CsMeasure {
    type Err = ParseCsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nguyen" => Ok(CsMeasure::NguyenAlMubaid),
            "path" => Ok(CsMeasure::PathBased),
            "lch" => Ok(CsMeasure::LeacockChodorow),
            "swupalmer" => Ok(CsMeasure::SimpleWuPalmer),
            "li" => Ok(CsMeasure::Li),
            "wupalmer" => Ok(CsMeasure::WuPalmer),
            other => Err(ParseCsError(other.to_owned())),
        }
    }
}

/// A concept-pair score together with its orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsValue {
    pub value: f64,
    pub direction: Direction,
}

pub(crate) fn cs_by_id(
    tax: &Taxonomy,
    ic: &IcTable,
    measure: CsMeasure,
    li_variant: LiVariant,
    a: usize,
    b: usize,
) -> f64 {
    let l = tax.lca_by_id(a, b);
    let max_depth = f64::from(tax.max_depth());
    match measure {
        CsMeasure::NguyenAlMubaid => {
            let path = f64::from(tax.shortest_path_by_id(a, b));
            let d_l = f64::from(tax.depth_by_id(l));
            // A concept is at distance 0 from itself even though the raw
            // formula would take the log of a non-positive number there.
            ((path - 1.0).max(0.0) * (max_depth - d_l) + 1.0).ln()
        }
        CsMeasure::PathBased => {
            let depth_sum = f64::from(tax.depth_by_id(a) + tax.depth_by_id(b));
            if depth_sum == 0.0 {
                // Both concepts are the root; report the formula's
                // supremum instead of dividing by zero.
                max_depth
            } else {
                max_depth / depth_sum
            }
        }
        CsMeasure::LeacockChodorow => {
            let ic_max = ic.max_ic();
            if ic_max == 0.0 {
                return 0.0;
            }
            let num = ic.value_by_id(a) + ic.value_by_id(b) - 2.0 * ic.value_by_id(l) + 1.0;
            -(num / (2.0 * ic_max)).ln()
        }
        CsMeasure::SimpleWuPalmer => {
            if max_depth == 0.0 {
                1.0
            } else {
                1.0 - (max_depth - ic.value_by_id(l)) / max_depth
            }
        }
        CsMeasure::Li => {
            let dist = ic.value_by_id(a) + ic.value_by_id(b) - 2.0 * ic.value_by_id(l);
            let exponent = match li_variant {
                LiVariant::OriginalExponent => -0.2 * dist,
                LiVariant::TableLiteral => 0.2 * dist,
            };
            exponent.exp() * (0.6 * ic.value_by_id(l)).tanh()
        }
        CsMeasure::WuPalmer => {
            let denom = ic.value_by_id(a) + ic.value_by_id(b);
            if denom == 0.0 {
                // Both concepts carry zero information; only identity is
                // a perfect match.
                if a == b {
                    1.0
                } else {
                    0.0
                }
            } else {
                2.0 * ic.value_by_id(l) / denom
            }
        }
    }
}

/// Score one concept pair.
pub fn cs(
    tax: &Taxonomy,
    icm: IcMeasure,
    measure: CsMeasure,
    li_variant: LiVariant,
    a: &str,
    b: &str,
) -> Result<CsValue, TaxonomyError> {
    let a_id = tax.id_of(a)?;
    let b_id = tax.id_of(b)?;
    let table = IcTable::compute(tax, icm);
    Ok(CsValue {
        value: cs_by_id(tax, &table, measure, li_variant, a_id, b_id),
        direction: measure.direction(),
    })
}

/// Score every pair of `set_a` × `set_b`; entry `(i, j)` compares
/// `set_a[i]` with `set_b[j]`. Unknown codes are collected and reported
/// together.
pub fn cs_matrix(
    tax: &Taxonomy,
    icm: IcMeasure,
    measure: CsMeasure,
    li_variant: LiVariant,
    set_a: &[&str],
    set_b: &[&str],
) -> Result<Vec<Vec<f64>>, TaxonomyError> {
    let resolve = |codes: &[&str]| -> (Vec<usize>, Vec<String>) {
        let mut ids = Vec::with_capacity(codes.len());
        let mut missing = Vec::new();
        for &code in codes {
            match tax.id_of(code) {
                Ok(id) => ids.push(id),
                Err(_) => missing.push(code.to_owned()),
            }
        }
        (ids, missing)
    };
    let (ids_a, mut missing) = resolve(set_a);
    let (ids_b, missing_b) = resolve(set_b);
    missing.extend(missing_b);
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(TaxonomyError::UnknownCodes { codes: missing });
    }

    let table = IcTable::compute(tax, icm);
    Ok(ids_a
        .iter()
        .map(|&a| {
            ids_b
                .iter()
                .map(|&b| cs_by_id(tax, &table, measure, li_variant, a, b))
                .collect()
        })
        .collect())
}
