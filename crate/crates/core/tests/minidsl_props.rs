mod common;

use proptest::prelude::*;

use spc_core::minidsl::{
    count_undefined, extract_api_set, parse, parse_recovering, tier_coverage, ApiTiers, Program, VOCABULARY,
};

fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        (-10_000i64..10_000).prop_map(|v| v.to_string()),
        (-1e9f64..1e9).prop_map(|v| format!("{v:?}")),
        (1e-12f64..1e12).prop_map(|v| format!("{v:e}")),
        "[A-Za-z][A-Za-z0-9_]{0,8}",
        "[a-z ]{0,12}".prop_map(|s| format!("\"{s}\"")),
    ]
}

fn command_line() -> impl Strategy<Value = String> {
    let name = prop_oneof![
        proptest::sample::select(VOCABULARY.to_vec()).prop_map(str::to_string),
        Just("print".to_string()),
        "[a-z][a-zA-Z]{0,10}",
    ];
    prop_oneof![
        4 => (name, prop::collection::vec(literal(), 0..8)).prop_map(|(n, args)| {
            std::iter::once(n).chain(args).collect::<Vec<_>>().join(" ")
        }),
        1 => Just(String::new()),
        1 => "# [a-z ]{0,20}",
    ]
}

fn program_text() -> impl Strategy<Value = String> {
    prop::collection::vec(command_line(), 0..40).prop_map(|lines| lines.join("\n") + "\n")
}

fn reparse(p: &Program) -> Program {
    parse(&p.to_source()).expect("printed program re-parses")
}

proptest! {
    #[test]
    fn print_parse_round_trip(src in program_text()) {
        let p = parse_recovering(&src).0;
        prop_assert_eq!(&reparse(&p).commands, &p.commands);
    }

    #[test]
    fn api_set_is_registered_and_bounded(src in program_text()) {
        let p = parse_recovering(&src).0;
        let api = extract_api_set(&p);
        prop_assert!(api.len() <= p.commands.len());
        prop_assert!(api.iter().all(|n| VOCABULARY.contains(&n.as_str()) || n == "print"));
    }

    #[test]
    fn coverage_is_monotone(src in program_text(), extra in proptest::sample::select(VOCABULARY.to_vec())) {
        let tiers = ApiTiers::default();
        let p = parse_recovering(&src).0;
        let before = tier_coverage(&extract_api_set(&p), &tiers);
        let mut api = extract_api_set(&p);
        api.insert(extra.to_string());
        let after = tier_coverage(&api, &tiers);
        let q = parse_recovering(&format!("{src}{extra}\n")).0;
        let appended = tier_coverage(&extract_api_set(&q), &tiers);
        for k in 0..3 {
            prop_assert!(after[k] >= before[k]);
            prop_assert!(appended[k] >= before[k]);
            prop_assert!((0.0..=1.0).contains(&after[k]));
        }
    }

    /// Nodes are defined somewhere in the program and referenced by `fix`
    /// lines; hoisting one definition to the top covers exactly the uses of
    /// that node that preceded it.
    #[test]
    fn hoisting_a_definition_covers_its_earlier_uses(
        ops in prop::collection::vec((any::<bool>(), 1i64..6), 1..30),
        pick in 0usize..30,
    ) {
        let lines: Vec<String> = ops
            .iter()
            .map(|&(def, tag)| if def { format!("node {tag} 0.0 0.0") } else { format!("fix {tag} 1 1 1") })
            .collect();
        let defs: Vec<usize> = (0..lines.len()).filter(|&i| ops[i].0).collect();
        prop_assume!(!defs.is_empty());
        let moved = defs[pick % defs.len()];
        let tag = ops[moved].1;
        let first_def = (0..lines.len()).find(|&i| ops[i].0 && ops[i].1 == tag).unwrap();
        let covered = (0..first_def).filter(|&i| !ops[i].0 && ops[i].1 == tag).count();

        let before = count_undefined(&parse(&lines.join("\n")).unwrap());
        let mut hoisted = lines.clone();
        let line = hoisted.remove(moved);
        hoisted.insert(0, line);
        let after = count_undefined(&parse(&hoisted.join("\n")).unwrap());
        prop_assert_eq!(before - after, covered);
        if covered > 0 {
            prop_assert!(after < before);
        }
    }
}

#[test]
fn fuzz_corpus_round_trips_where_it_parses() {
    let mut parsed = 0;
    for src in common::fuzz_corpus(500, 11) {
        let (p, failures) = parse_recovering(&src);
        if failures.is_empty() {
            assert_eq!(reparse(&p).commands, p.commands, "{src}");
            parsed += 1;
        }
    }
    assert!(parsed > 100, "only {parsed} programs parsed");
}
