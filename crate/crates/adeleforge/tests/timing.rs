#[test]
fn time_criteria() {
    for r in adeleforge::selftest::run_all(42) {
        println!("criterion {}: {} -> {} ({} ms)", r.index, r.name, r.pass, r.elapsed_ms);
        for d in &r.details { println!("   {d}"); }
    }
}
