//! Generators for the example spaces.
//!
//! Each generator takes a JSON parameter record (unknown fields rejected)
//! that always includes a budget window.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::SpaceHandle;

mod branch_tree;
mod coarse_union;
mod line;
mod log_line;
mod prime_cycle;
mod regular_tree;
mod tree_line;
mod ultrametric;

pub use branch_tree::{BranchTree, BranchTreeParams};
pub use coarse_union::{CoarseUnion, CoarseUnionParams};
pub use line::{IntegerLine, IntegerLineParams};
pub use log_line::{LogLine, LogLineParams};
pub use prime_cycle::{PrimeCycle, PrimeCycleParams};
pub use regular_tree::{RegularTree, RegularTreeParams};
pub use tree_line::{TreeLine, TreeLineParams};
pub use ultrametric::{UltrametricProduct, UltrametricParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogTag {
    IntegerLine,
    UltrametricProduct,
    LogLine,
    PrimeCycle,
    TreeLine,
    BranchTree,
    RegularTree,
    CoarseUnion,
}

impl CatalogTag {
    pub const ALL: [CatalogTag; 8] = [
        CatalogTag::IntegerLine,
        CatalogTag::UltrametricProduct,
        CatalogTag::LogLine,
        CatalogTag::PrimeCycle,
        CatalogTag::TreeLine,
        CatalogTag::BranchTree,
        CatalogTag::RegularTree,
        CatalogTag::CoarseUnion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogTag::IntegerLine => "integer_line",
            CatalogTag::UltrametricProduct => "ultrametric_product",
            CatalogTag::LogLine => "log_line",
            CatalogTag::PrimeCycle => "prime_cycle",
            CatalogTag::TreeLine => "tree_line",
            CatalogTag::BranchTree => "branch_tree",
            CatalogTag::RegularTree => "regular_tree",
            CatalogTag::CoarseUnion => "coarse_union",
        }
    }
}

impl fmt::Display for CatalogTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

fn parse_params<P: DeserializeOwned>(params: &serde_json::Value) -> Result<P> {
    let value = if params.is_null() { serde_json::json!({}) } else { params.clone() };
    serde_json::from_value(value).map_err(|e| Error::InvalidParams(e.to_string()))
}

/// Builds a catalog space from its tag and JSON parameters (`null` selects defaults).
pub fn make_example(tag: &str, params: &serde_json::Value) -> Result<SpaceHandle> {
    let tag: CatalogTag = tag.parse()?;
    Ok(match tag {
        CatalogTag::IntegerLine => Arc::new(IntegerLine::new(parse_params(params)?)?),
        CatalogTag::UltrametricProduct => Arc::new(UltrametricProduct::new(parse_params(params)?)?),
        CatalogTag::LogLine => Arc::new(LogLine::new(parse_params(params)?)?),
        CatalogTag::PrimeCycle => Arc::new(PrimeCycle::new(parse_params(params)?)?),
        CatalogTag::TreeLine => Arc::new(TreeLine::new(parse_params(params)?)?),
        CatalogTag::BranchTree => Arc::new(BranchTree::new(parse_params(params)?)?),
        CatalogTag::RegularTree => Arc::new(RegularTree::new(parse_params(params)?)?),
        CatalogTag::CoarseUnion => Arc::new(CoarseUnion::new(parse_params(params)?)?),
    })
}

/// Largest window materialized by `window()` on generated spaces.
pub(crate) const WINDOW_POINT_LIMIT: usize = 2_000_000;

pub(crate) fn window_too_large(tag: &str, count: u128) -> Error {
    Error::Budget(format!("{tag}: window of {count} points exceeds the enumeration limit {WINDOW_POINT_LIMIT}"))
}

/// `⌊delta⌋`, refusing an infinite radius.
pub(crate) fn floor_radius(tag: &str, delta: &crate::dist::Dist) -> Result<u64> {
    delta.floor_u64().ok_or_else(|| Error::Budget(format!("{tag}: radius {delta} is not finite")))
}
