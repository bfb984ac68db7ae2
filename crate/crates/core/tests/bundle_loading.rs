use std::path::Path;

use pibase_core::corpus::{load_documents, read_documents, SourceDocument};
use pibase_core::deduction::{close_bundle, close_bundle_sequential, Engine};
use pibase_core::synthetic::{generate, SyntheticConfig};
use proptest::prelude::*;

fn fixture(name: &str) -> Vec<SourceDocument> {
    read_documents(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name),
    )
    .unwrap()
}

fn broken_mini() -> Vec<SourceDocument> {
    let mut docs = fixture("counterexamples-mini");
    docs.push(SourceDocument::new(
        "theorems/T000900.md",
        "---\nuid: T000900\nif:\n  P000001: true\nthen:\n  P000777: true\n---\n",
    ));
    docs.push(SourceDocument::new(
        "properties/P000900.md",
        "---\nuid: P000900\nname: hausdorff\n---\n",
    ));
    docs.push(SourceDocument::new(
        "properties/P000901.md",
        "---\nuid: P000901\n---\n",
    ));
    docs.push(SourceDocument::new(
        "spaces/S000001/properties/P000099.md",
        "---\nspace: S000002\nproperty: P000099\nvalue: true\n---\n",
    ));
    docs
}

#[test]
fn canonical_documents_reload_to_the_same_bundle() {
    for name in ["listings", "counterexamples-mini"] {
        let bundle = load_documents(fixture(name)).unwrap();
        let canonical = bundle.to_documents();
        let reloaded = load_documents(canonical.clone()).unwrap();
        assert_eq!(reloaded, bundle);
        assert_eq!(reloaded.to_documents(), canonical);
    }
}

#[test]
fn every_error_is_reported() {
    let report = load_documents(broken_mini()).unwrap_err();
    let codes: Vec<(String, &str)> = report
        .errors
        .iter()
        .map(|e| (e.path.display().to_string(), e.kind.code()))
        .collect();
    assert_eq!(
        codes,
        vec![
            ("properties/P000900.md".to_string(), "duplicate_name"),
            ("properties/P000901.md".to_string(), "parse"),
            (
                "spaces/S000001/properties/P000099.md".to_string(),
                "path_mismatch"
            ),
            (
                "spaces/S000001/properties/P000099.md".to_string(),
                "dangling_reference"
            ),
            ("theorems/T000900.md".to_string(), "dangling_reference"),
        ]
    );
}

#[test]
fn synthetic_closure_matches_sequential() {
    let bundle = generate(&SyntheticConfig {
        spaces: 200,
        ..SyntheticConfig::default()
    });
    let engine = Engine::from_bundle(&bundle);
    let closed = close_bundle(&bundle, &engine);
    assert!(closed.is_consistent());
    assert_eq!(closed, close_bundle_sequential(&bundle, &engine));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn load_order_does_not_matter(docs in Just(fixture("counterexamples-mini")).prop_shuffle()) {
        prop_assert_eq!(load_documents(docs).unwrap(), load_documents(fixture("counterexamples-mini")).unwrap());
    }

    #[test]
    fn error_reports_do_not_depend_on_order(docs in Just(broken_mini()).prop_shuffle()) {
        prop_assert_eq!(load_documents(docs).unwrap_err(), load_documents(broken_mini()).unwrap_err());
    }
}
