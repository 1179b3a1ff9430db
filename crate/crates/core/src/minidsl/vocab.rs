use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Emits a free-form report line. Not part of any coverage tier.
pub const PRINT_COMMAND: &str = "print";

/// Every command the interpreter understands.
pub const VOCABULARY: &[&str] = &[
    "model",
    "node",
    "geomTransf",
    "uniaxialMaterial",
    "element",
    "fix",
    "mass",
    "timeSeries",
    "pattern",
    "load",
    "system",
    "numberer",
    "constraints",
    "test",
    "algorithm",
    "integrator",
    "analysis",
    "analyze",
    "eigen",
    "reportPeriod",
    PRINT_COMMAND,
];

const DEFAULT_TIER1: &[&str] = &["model", "node", "geomTransf", "uniaxialMaterial", "element"];
const DEFAULT_TIER2: &[&str] = &["fix", "mass", "timeSeries", "pattern", "load"];
const DEFAULT_TIER3: &[&str] = &[
    "system",
    "numberer",
    "constraints",
    "test",
    "algorithm",
    "integrator",
    "analysis",
    "analyze",
    "eigen",
    "reportPeriod",
];

pub fn is_registered(name: &str) -> bool {
    VOCABULARY.contains(&name)
}

#[derive(Debug, Error, PartialEq)]
pub enum TierError {
    #[error("tier {0} is empty")]
    EmptyTier(usize),
    #[error("command '{name}' appears in tiers {first} and {second}")]
    Overlap {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("command '{0}' is not in the registered vocabulary")]
    Unregistered(String),
    #[error("invalid tiers file: {0}")]
    Format(String),
}

/// Topology, boundary/load and analysis/solver command groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiTiers {
    tiers: [BTreeSet<String>; 3],
}

/// Serialized form of [`ApiTiers`]: one command-name list per tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierLists {
    pub tier1: Vec<String>,
    pub tier2: Vec<String>,
    pub tier3: Vec<String>,
}

impl ApiTiers {
    pub fn new<I, S>(tier1: I, tier2: I, tier3: I) -> Result<Self, TierError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let collect = |it: I| it.into_iter().map(Into::into).collect::<BTreeSet<String>>();
        let tiers = [collect(tier1), collect(tier2), collect(tier3)];
        for (k, tier) in tiers.iter().enumerate() {
            if tier.is_empty() {
                return Err(TierError::EmptyTier(k + 1));
            }
            for name in tier {
                if !is_registered(name) {
                    return Err(TierError::Unregistered(name.clone()));
                }
                for (j, other) in tiers.iter().enumerate().skip(k + 1) {
                    if other.contains(name) {
                        return Err(TierError::Overlap {
                            name: name.clone(),
                            first: k + 1,
                            second: j + 1,
                        });
                    }
                }
            }
        }
        Ok(Self { tiers })
    }

    /// Reads a TOML document with `tier1`, `tier2`, `tier3` string arrays.
    pub fn from_toml(text: &str) -> Result<Self, TierError> {
        let file: TierLists = toml::from_str(text).map_err(|e| TierError::Format(e.to_string()))?;
        Self::from_lists(&file)
    }

    pub fn from_lists(lists: &TierLists) -> Result<Self, TierError> {
        Self::new(lists.tier1.clone(), lists.tier2.clone(), lists.tier3.clone())
    }

    pub fn to_lists(&self) -> TierLists {
        let list = |k: usize| self.tiers[k].iter().cloned().collect();
        TierLists {
            tier1: list(0),
            tier2: list(1),
            tier3: list(2),
        }
    }

    /// `k` is 1-based.
    pub fn tier(&self, k: usize) -> &BTreeSet<String> {
        &self.tiers[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BTreeSet<String>> {
        self.tiers.iter()
    }

    pub fn all_names(&self) -> BTreeSet<&str> {
        self.tiers.iter().flatten().map(String::as_str).collect()
    }
}

impl Default for ApiTiers {
    fn default() -> Self {
        Self::new(
            DEFAULT_TIER1.iter().copied(),
            DEFAULT_TIER2.iter().copied(),
            DEFAULT_TIER3.iter().copied(),
        )
        .expect("default tiers are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tiers_have_documented_sizes() {
        let tiers = ApiTiers::default();
        assert_eq!(tiers.tier(1).len(), 5);
        assert_eq!(tiers.tier(2).len(), 5);
        assert_eq!(tiers.tier(3).len(), 10);
        assert!(!tiers.all_names().contains(PRINT_COMMAND));
    }

    #[test]
    fn rejects_overlap_and_empty() {
        let err = ApiTiers::new(vec!["node"], vec!["node"], vec!["eigen"]).unwrap_err();
        assert!(matches!(err, TierError::Overlap { first: 1, second: 2, .. }));
        let err = ApiTiers::new(vec!["node"], Vec::<&str>::new(), vec!["eigen"]).unwrap_err();
        assert_eq!(err, TierError::EmptyTier(2));
        let err = ApiTiers::new(vec!["frobnicate"], vec!["fix"], vec!["eigen"]).unwrap_err();
        assert_eq!(err, TierError::Unregistered("frobnicate".into()));
    }

    #[test]
    fn parses_tiers_file() {
        let tiers = ApiTiers::from_toml(
            "tier1 = [\"node\", \"element\"]\ntier2 = [\"fix\"]\ntier3 = [\"eigen\"]\n",
        )
        .unwrap();
        assert_eq!(tiers.tier(1).len(), 2);
        assert!(ApiTiers::from_toml("tier1 = 3").is_err());
    }
}
