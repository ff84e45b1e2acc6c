mod common;

use parfwd_core::{check_capacity, source_region, ChannelInputs, MarkovAssumptionSet, ReduceOptions};

fn check(file: &str) -> parfwd_core::CapacityReport {
    let doc = common::load(file);
    let spec = doc.to_spec().unwrap();
    let region = source_region(&spec).unwrap();
    check_capacity(&region, &ChannelInputs::of(&spec), &doc.assumptions, ReduceOptions::default()).unwrap()
}

#[test]
fn bundled_capacity_claims_verify() {
    for file in ["protocol_b.spec", "short_range_k2.spec", "short_range_k3.spec", "semideterministic.spec"] {
        let report = check(file);
        assert!(report.verified(), "{file}:\n{report}");
        for cut in &report.cuts {
            let (_, d) = cut.matched.as_ref().unwrap();
            assert!(d.len() <= 8);
        }
    }
}

#[test]
fn protocol_b_summary() {
    assert_eq!(check("protocol_b.spec").summary(), "capacity verified: 3/3 cuts");
}

#[test]
fn without_assumptions_capacity_is_not_claimed() {
    let doc = common::load("protocol_b.spec");
    let spec = doc.to_spec().unwrap();
    let region = source_region(&spec).unwrap();
    let report = check_capacity(
        &region,
        &ChannelInputs::of(&spec),
        &MarkovAssumptionSet::new(),
        ReduceOptions::default(),
    )
    .unwrap();
    assert!(!report.verified());
    assert_eq!(report.summary(), "capacity not verified: 1/3 cuts");
}
