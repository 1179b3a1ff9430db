use std::collections::BTreeSet;

use serde::Serialize;

use super::vocab::{is_registered, ApiTiers};
use super::Program;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticReport {
    pub api_set: BTreeSet<String>,
    pub coverage: [f64; 3],
    pub undef_count: usize,
}

/// Distinct registered command names used by the program.
pub fn extract_api_set(p: &Program) -> BTreeSet<String> {
    p.commands
        .iter()
        .filter(|c| is_registered(&c.name))
        .map(|c| c.name.clone())
        .collect()
}

/// Fraction of each tier's commands present in `api`.
pub fn tier_coverage(api: &BTreeSet<String>, tiers: &ApiTiers) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (slot, tier) in out.iter_mut().zip(tiers.iter()) {
        let hit = tier.iter().filter(|name| api.contains(*name)).count();
        *slot = hit as f64 / tier.len() as f64;
    }
    out
}

/// Each (use line, tag) whose tag has no definition on an earlier line counts once.
pub fn count_undefined(p: &Program) -> usize {
    p.var_uses
        .iter()
        .filter(|(tag, line)| p.var_defs.get(tag).is_none_or(|def| def >= line))
        .count()
}

pub fn static_report(p: &Program, tiers: &ApiTiers) -> StaticReport {
    let api_set = extract_api_set(p);
    let coverage = tier_coverage(&api_set, tiers);
    StaticReport {
        api_set,
        coverage,
        undef_count: count_undefined(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minidsl::parse;

    fn names(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn api_set_deduplicates() {
        let p = parse("node 1 0 0\nnode 2 0 3\nfix 1 1 1 1\neigen 1").unwrap();
        assert_eq!(extract_api_set(&p), names(&["node", "fix", "eigen"]));
        assert!(extract_api_set(&parse("").unwrap()).is_empty());
    }

    #[test]
    fn unknown_commands_are_excluded() {
        let p = parse("node 1 0 0\nwibble 2").unwrap();
        assert_eq!(extract_api_set(&p), names(&["node"]));
    }

    #[test]
    fn coverage_counts() {
        let tiers = ApiTiers::default();
        let all: BTreeSet<String> = tiers.all_names().iter().map(|s| s.to_string()).collect();
        assert_eq!(tier_coverage(&all, &tiers), [1.0, 1.0, 1.0]);
        assert_eq!(tier_coverage(&BTreeSet::new(), &tiers), [0.0, 0.0, 0.0]);
        let two = names(&["node", "element", "mass"]);
        let c = tier_coverage(&two, &tiers);
        assert_eq!(c[0], 0.4);
        assert_eq!(c[1], 0.2);
        assert_eq!(c[2], 0.0);
    }

    #[test]
    fn undefined_element_endpoints() {
        let p = parse("geomTransf Linear 1\nelement elasticBeamColumn 1 1 2 0.1 2e10 1e-3 1").unwrap();
        assert_eq!(count_undefined(&p), 2);
    }

    #[test]
    fn lone_fix_on_missing_node() {
        assert_eq!(count_undefined(&parse("fix 7 1 1 1").unwrap()), 1);
    }

    #[test]
    fn later_definition_does_not_cover_earlier_use() {
        let p = parse("mass 3 1 0 0\nnode 3 0 0\nmass 3 1 0 0").unwrap();
        assert_eq!(count_undefined(&p), 1);
        let moved = parse("node 3 0 0\nmass 3 1 0 0\nmass 3 1 0 0").unwrap();
        assert_eq!(count_undefined(&moved), 0);
    }

    #[test]
    fn same_tag_twice_on_one_line_counts_once() {
        let p = parse("geomTransf Linear 1\nelement elasticBeamColumn 1 5 5 0.1 2e10 1e-3 1").unwrap();
        assert_eq!(count_undefined(&p), 1);
    }

    #[test]
    fn truss_uses_material_namespace() {
        let p = parse("node 1 0 0\nnode 2 1 0\nelement truss 1 1 2 0.01 4").unwrap();
        assert_eq!(count_undefined(&p), 1);
        let p = parse("node 1 0 0\nnode 2 1 0\nuniaxialMaterial Elastic 4 2e11\nelement truss 1 1 2 0.01 4")
            .unwrap();
        assert_eq!(count_undefined(&p), 0);
    }
}
