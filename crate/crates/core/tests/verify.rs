use pointwave::verify::run_suite;

#[test]
fn full_suite_passes() {
    let rep = run_suite(7).unwrap();
    for c in &rep.checks {
        println!("{:<24} {:<48} {:>12.4e} {}", c.module, c.name, c.value, c.bound);
    }
    let failed: Vec<_> = rep.failures().map(|c| c.name).collect();
    assert!(rep.passed(), "{failed:?}");
    assert!(rep.checks.len() >= 30);
}
