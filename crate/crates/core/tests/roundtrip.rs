mod common;

use ontomas::builder::{build_abox, parse_csv_bundle, render_csv_bundle};
use ontomas::kb::{KnowledgeBase, Term, Triple};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{bundle, case_study_kb, oracle, random_history};

#[test]
fn hand_written_turtle_loads_into_the_canonical_form() {
    let text = std::fs::read_to_string(common::fixture("turtle/hand_written.ttl")).unwrap();
    let kb = KnowledgeBase::load_turtle(&text).unwrap();
    let dump = kb.dump_turtle();
    assert_ne!(dump, text, "fixture is deliberately non-canonical");
    assert_eq!(KnowledgeBase::load_turtle(&dump).unwrap().dump_turtle(), dump);
}

#[test]
fn building_twice_is_idempotent() {
    let pd = parse_csv_bundle(&bundle("two_cells")).unwrap();
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &pd).unwrap();
    let once = kb.dump_turtle();
    let stats = build_abox(&mut kb, &pd).unwrap();
    assert_eq!(stats.inserted, 0);
    assert_eq!(kb.dump_turtle(), once);
}

#[test]
fn rendered_csv_survives_a_second_trip() {
    for name in ["case_study", "two_cells"] {
        let pd = parse_csv_bundle(&bundle(name)).unwrap();
        let rendered = render_csv_bundle(&pd);
        assert_eq!(parse_csv_bundle(&rendered).unwrap(), pd, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_graphs_round_trip_through_turtle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = oracle::random_graph(&mut rng);
        let mut kb = KnowledgeBase::new();
        for t in &triples {
            kb.insert(t.clone()).unwrap();
        }
        let dump = kb.dump_turtle();
        let back = KnowledgeBase::load_turtle(&dump).unwrap();
        prop_assert_eq!(back.graph(), kb.graph());
        prop_assert_eq!(back.dump_turtle(), dump);
    }

    #[test]
    fn runtime_histories_round_trip_through_turtle(seed in any::<u64>(), n in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kb = case_study_kb();
        random_history(&mut kb, &mut rng, n);
        let dump = kb.dump_turtle();
        let back = KnowledgeBase::load_turtle(&dump).unwrap();
        prop_assert!(back.graph() == kb.graph());
        prop_assert_eq!(back.dump_turtle(), dump);
    }

    #[test]
    fn string_literals_with_awkward_text_round_trip(text in "[ -~\\t\\n\\r\u{e9}\u{4e2d}]{0,24}") {
        let mut kb = KnowledgeBase::new();
        let s = Term::Iri(ontomas::kb::Iri::new("http://example.org/manufacturing#F9").unwrap());
        let p = Term::Iri(ontomas::kb::Iri::new("http://example.org/manufacturing#note").unwrap());
        kb.insert(Triple::new(s, p, Term::string(&text)).unwrap()).unwrap();
        let back = KnowledgeBase::load_turtle(&kb.dump_turtle()).unwrap();
        prop_assert_eq!(back.graph(), kb.graph());
    }
}
