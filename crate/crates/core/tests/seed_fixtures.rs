//! Shipped seed files must equal what the builders produce.
//! Run with `CROSSDEP_BLESS=1` to regenerate them.

use std::fs;
use std::path::PathBuf;

use crossdep::seed::{build_case_study_links, build_ict, build_smart_home, ict_provenance};
use crossdep::text::{serialize_links, serialize_ontology};

fn seeds_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../seeds")
}

fn check(name: &str, expected: String) {
    let path = seeds_dir().join(name);
    if std::env::var_os("CROSSDEP_BLESS").is_some() {
        fs::write(&path, &expected).unwrap();
        return;
    }
    let actual = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        actual == expected,
        "{name} drifted from its builder; rerun with CROSSDEP_BLESS=1"
    );
}

#[test]
fn smart_home_onto() {
    check("smart_home.onto", serialize_ontology(&build_smart_home()));
}

#[test]
fn ict_onto() {
    check("ict.onto", serialize_ontology(&build_ict()));
}

#[test]
fn case_study_links() {
    check("case_study.links", serialize_links(&build_case_study_links()));
}

#[test]
fn ict_provenance_list() {
    check("ict_provenance.txt", ict_provenance());
}
