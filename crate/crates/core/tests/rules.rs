mod common;

use std::collections::BTreeSet;

use parfwd_core::{reduce, rewrite_moves, MarkovAssumptionSet, MiExpr, ReduceOptions, Rule};

#[test]
fn every_rule_preserves_information_values() {
    for case in common::rule_cases() {
        let r = common::check_rule_case(&case, 50, 2024);
        assert!(r.checked_moves >= 50, "{:?}: only {} moves", r.family, r.checked_moves);
        assert!(r.max_error <= 1e-9, "{:?}: error {}", r.family, r.max_error);
    }
}

#[test]
fn cases_exercise_every_rule() {
    let mut seen = BTreeSet::new();
    for case in common::rule_cases() {
        for e in &case.exprs {
            for (rule, _) in rewrite_moves(e, &case.assumptions).unwrap() {
                if rule.family() == case.family {
                    seen.insert(rule);
                }
            }
        }
    }
    let all = [
        Rule::ArgSplit,
        Rule::ArgMerge,
        Rule::OutputSplit,
        Rule::OutputMerge,
        Rule::MarkovDrop,
        Rule::DeterministicVanish,
        Rule::DeterministicCondition,
        Rule::DeterministicEntropy,
        Rule::SelfInformation,
    ];
    assert_eq!(seen, all.into_iter().collect());
}

#[test]
fn reduction_is_symmetric() {
    let e = |s: &str| s.parse::<MiExpr>().unwrap();
    let none = MarkovAssumptionSet::new();
    let a = e("I(X[0],X[1,1],X[2,1];Y[3])");
    let b = e("I(X[0];Y[3]|X[1,1],X[2,1]) + I(X[1,1];Y[3]|X[2,1]) + I(X[2,1];Y[3])");
    let forward = reduce(&a, &none, &b, ReduceOptions::default()).unwrap();
    let backward = reduce(&b, &none, &a, ReduceOptions::default()).unwrap();
    assert_eq!(forward.len(), backward.len());
    assert_eq!(forward.reversed().end(), &a);
}
