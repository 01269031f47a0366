use proxpareto::corpus::{bundled, selftest, BUNDLED};
use proxpareto::problem_file::ProblemFile;

#[test]
fn every_bundled_problem_loads_and_round_trips() {
    for pf in bundled().unwrap() {
        let again = ProblemFile::from_json(&pf.to_json().unwrap()).unwrap();
        assert_eq!(again, pf, "{}", pf.name);
    }
    assert_eq!(bundled().unwrap().len(), BUNDLED.len());
}

#[test]
fn selftest_passes() {
    let outcomes = selftest(0x5eed).unwrap();
    for o in &outcomes {
        println!("{} {}/{} [{}]: {}", if o.passed { "PASS" } else { "FAIL" }, o.problem, o.check, o.provenance, o.detail);
    }
    assert!(outcomes.iter().all(|o| o.passed));
}
