//! Cross-module invariants over seeded random inputs.

mod common;

use proptest::prelude::*;
use std::collections::HashSet;
use tptl::formula::{
    alpha_rename, check_encapsulated, parse, prepare, translate_mtl, validate_closed, Formula,
    NodeKind,
};
use tptl::oracle::{eval_mtl, eval_semantics, Environment};
use tptl::trace::{load_trace, write_csv, TraceFormat};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printed_formulas_reparse(seed: u64, encapsulated: bool) {
        let mut rng = common::rng(seed);
        let formula = if encapsulated {
            common::random_encapsulated(&mut rng)
        } else {
            common::random_closed(&mut rng)
        };
        let text = formula.to_string();
        prop_assert_eq!(parse(&text).unwrap(), formula, "printed as {}", text);
    }

    #[test]
    fn generated_fragment_formulas_pass_validation(seed: u64) {
        let formula = common::random_encapsulated(&mut common::rng(seed));
        prop_assert!(validate_closed(&formula).is_ok());
        prop_assert!(check_encapsulated(&formula).is_ok());
    }

    #[test]
    fn interval_translations_stay_in_the_fragment(seed: u64) {
        let mtl = common::random_mtl(&mut common::rng(seed));
        let translated = translate_mtl(&mtl);
        prop_assert!(validate_closed(&translated).is_ok());
        prop_assert!(check_encapsulated(&translated).is_ok());
        let text = translated.to_string();
        prop_assert_eq!(parse(&text).unwrap(), translated);
    }
}

#[test]
fn block_indexing_invariants() {
    for seed in 0..500u64 {
        let mut rng = common::rng(seed);
        let formula = common::random_encapsulated(&mut rng);
        let indexed = prepare(&formula).unwrap();
        let rows = indexed.len();
        assert_eq!(rows, formula.size());

        // The binder-free outer region and the frozen subtrees tile the
        // row range without overlap.
        let mut covered = vec![false; rows + 1];
        covered[1..=indexed.outer_max()].fill(true);
        for subtree in indexed.subtrees() {
            assert!(subtree.parent < subtree.root);
            assert_eq!(subtree.root, subtree.min);
            assert!(subtree.min <= subtree.max);
            assert!(matches!(indexed.node(subtree.parent), NodeKind::Freeze(..)));
            let block = subtree.min..=subtree.max;
            assert!(
                !covered[block.clone()].iter().any(|&claimed| claimed),
                "rows {block:?} lie in two blocks"
            );
            covered[block].fill(true);
        }
        assert!(covered[1..].iter().all(|&c| c), "rows must all lie in a block");

        for pair in indexed.subtrees().windows(2) {
            assert!(pair[0].root > pair[1].root, "subtrees ordered by decreasing root");
        }

        for row in 1..=rows {
            if let NodeKind::Constraint(variable, _, _) = indexed.node(row) {
                let home = indexed
                    .subtrees()
                    .iter()
                    .find(|subtree| &subtree.variable == variable)
                    .expect("constraint variable has a subtree");
                assert!(home.min <= row && row <= home.max);
            }
        }
    }
}

fn collect_binders(formula: &Formula, out: &mut Vec<String>) {
    if let Formula::Freeze(name, _) = formula {
        out.push(name.clone());
    }
    for child in formula.children() {
        collect_binders(child, out);
    }
}

#[test]
fn renaming_binders_preserves_semantics() {
    let env = Environment::new();
    for seed in 0..300u64 {
        let mut rng = common::rng(seed + 7_000_000);
        let formula = common::random_closed(&mut rng);
        let trace = common::random_trace(&mut rng, 8);
        let renamed = alpha_rename(&formula);

        let mut binders = Vec::new();
        collect_binders(&renamed, &mut binders);
        let distinct: HashSet<&String> = binders.iter().collect();
        assert_eq!(distinct.len(), binders.len(), "renamed binders are distinct");

        for i in 0..trace.len() {
            assert_eq!(
                eval_semantics(&formula, &trace, i, &env).unwrap(),
                eval_semantics(&renamed, &trace, i, &env).unwrap(),
                "seed {seed}, position {i}"
            );
        }
    }
}

#[test]
fn interval_translation_agrees_pointwise() {
    let env = Environment::new();
    for seed in 0..300u64 {
        let mut rng = common::rng(seed + 9_000_000);
        let mtl = common::random_mtl(&mut rng);
        let trace = common::random_trace(&mut rng, 10);
        let translated = translate_mtl(&mtl);
        for i in 0..trace.len() {
            assert_eq!(
                eval_mtl(&mtl, &trace, i),
                eval_semantics(&translated, &trace, i, &env).unwrap(),
                "seed {seed}, position {i}"
            );
        }
    }
}

#[test]
fn traces_round_trip_through_csv() {
    for seed in 0..200u64 {
        let mut rng = common::rng(seed + 5_000_000);
        let trace = common::random_trace(&mut rng, 12);
        let mut bytes = Vec::new();
        write_csv(&trace, &mut bytes).unwrap();
        let reloaded = load_trace(bytes.as_slice(), TraceFormat::Csv, false).unwrap();
        assert_eq!(reloaded.props(), trace.props());
        assert_eq!(reloaded.times(), trace.times());
        for i in 0..trace.len() {
            assert_eq!(reloaded.state(i), trace.state(i));
        }
    }
}
