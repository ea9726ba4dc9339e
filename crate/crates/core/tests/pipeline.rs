use std::path::PathBuf;

use satclass::pipeline::{Bounds, Inputs, Run};

fn fixture(name: &str) -> Inputs {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    Inputs::load(&dir.join("signature.sig"), &dir.join("theory.thy"), &dir.join("model.mdl")).unwrap()
}

#[test]
fn fixtures_run_at_default_bounds() {
    for name in ["unary", "propositional", "functional"] {
        let run = Run::execute(fixture(name), Bounds::default()).unwrap();
        let r = &run.report;
        assert!(r.passed, "{name}: {}", serde_json::to_string(r).unwrap());
        assert_eq!(r.universe, 4096);
        assert!(r.reference_model);
        assert!(r.truth_set.passed() && r.tarski.passed() && r.reflection.passed() && r.q.passed() && r.agreement.passed());
    }
}

#[test]
fn grid_rows_follow_the_signature() {
    let unary = Run::execute(fixture("unary"), Bounds { universe: 512, ..Bounds::default() }).unwrap();
    assert_eq!(unary.report.grid_rows, 4);
    let prop = Run::execute(fixture("propositional"), Bounds { universe: 512, ..Bounds::default() }).unwrap();
    assert_eq!((prop.report.psi, prop.report.grid_rows), (0, 0));
}
