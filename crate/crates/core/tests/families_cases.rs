//! Every family instance lands in exactly one structural case, and it is the
//! case expected for its family.

use wdrd::arcs::{classify_case, CaseId};
use wdrd::families::{enumerate_instances, FamilyId, FamilySpec};
use wdrd::scheme::{compute_relations, intersection_tensor};

fn expected(spec: &FamilySpec) -> (CaseId, Option<u32>) {
    match (spec.family, spec.i) {
        (FamilyId::I, _) | (FamilyId::Iii, _) => (CaseId::C5, Some(2)),
        (FamilyId::Ii, Some(1)) => (CaseId::C5, spec.p),
        (FamilyId::Ii, _) => (CaseId::C6, None),
        (FamilyId::Iv, Some(0)) => (CaseId::C1, spec.q),
        (FamilyId::Iv, _) => (CaseId::C4, spec.q),
        (FamilyId::Vii, Some(1)) => (CaseId::C2, None),
        (FamilyId::Vii, _) => (CaseId::C3, None),
        _ => (CaseId::C6, None),
    }
}

#[test]
fn every_family_instance_has_its_expected_case() {
    let specs = enumerate_instances(120);
    assert!(specs.len() > 100);
    for spec in specs {
        let inst = spec.construct().unwrap();
        let table = inst.digraph.distance_table().unwrap();
        let p = intersection_tensor(&compute_relations(&inst.digraph, &table)).unwrap();
        let verdict = classify_case(&p).unwrap_or_else(|e| panic!("{spec}: {e}"));
        let (case, q) = expected(&spec);
        assert_eq!(verdict.case, case, "{spec}: K = {:?}", verdict.k_set);
        if let Some(q) = q {
            assert_eq!(verdict.q, Some(q), "{spec}");
        }
        let mixed = verdict.facts["mixed"].as_array().unwrap();
        assert!(!mixed.iter().any(|r| r == 1), "{spec}: (1,1) listed as mixed");
    }
}

#[test]
fn case_verdict_json_shape() {
    let inst = FamilySpec::viii(5, 3).construct().unwrap();
    let table = inst.digraph.distance_table().unwrap();
    let p = intersection_tensor(&compute_relations(&inst.digraph, &table)).unwrap();
    let json = classify_case(&p).unwrap().to_json();
    assert_eq!(json["case"], "C6");
    assert_eq!(json["q"], 5);
    assert_eq!(json["K"], serde_json::json!([[1, 1], [1, 4], [1, 5]]));
    assert_eq!(json["facts"]["mixed"], serde_json::json!([5]));
}
