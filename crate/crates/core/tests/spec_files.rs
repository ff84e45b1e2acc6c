mod common;

use parfwd_core::protocols;
use parfwd_core::SpecDocument;

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn bundled_specs_round_trip() {
    for path in common::bundled_specs() {
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = SpecDocument::parse(&text).unwrap();
        assert_eq!(squash(&doc.to_text()), squash(&text), "{}", path.display());
        assert_eq!(SpecDocument::parse(&doc.to_text()).unwrap(), doc);
    }
}

#[test]
fn bundled_specs_match_library_protocols() {
    let cases = [
        ("single_relay_df.spec", protocols::single_relay_df()),
        ("protocol_a.spec", protocols::protocol_a()),
        ("protocol_b.spec", protocols::protocol_b()),
        ("multihop_k2.spec", protocols::multihop(2)),
        ("multihop_k3.spec", protocols::multihop(3)),
        ("short_range_k2.spec", protocols::short_range(2)),
        ("short_range_k3.spec", protocols::short_range(3)),
        ("coupled_k3.spec", protocols::coupled(3)),
        ("semideterministic.spec", protocols::semideterministic()),
        ("generalized_df.spec", protocols::generalized_df()),
        ("four_relay_branching.spec", protocols::four_relay_branching()),
        ("decoding_sets_valid.spec", protocols::mixed_decoding(true)),
        ("invalid/decoding_sets_invalid.spec", protocols::mixed_decoding(false)),
    ];
    for (file, spec) in cases {
        assert_eq!(common::load(file).to_spec().unwrap(), spec, "{file}");
    }
}

#[test]
fn valid_specs_validate_and_invalid_one_fails() {
    for path in common::bundled_specs() {
        let doc = SpecDocument::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let report = doc.to_spec().unwrap().validate_decoding_sets();
        let invalid = path.parent().unwrap().ends_with("invalid");
        assert_eq!(report.is_valid(), !invalid, "{}:\n{report}", path.display());
    }
}

#[test]
fn stack_gap_is_reported_by_name() {
    let report = common::load("invalid/decoding_sets_invalid.spec")
        .to_spec()
        .unwrap()
        .validate_decoding_sets();
    assert!(report.to_string().contains("P3 fail (m[1,2])"), "{report}");
}
