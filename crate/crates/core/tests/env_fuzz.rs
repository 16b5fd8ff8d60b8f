mod common;

#[test]
fn million_random_steps_keep_invariants() {
    let (steps, violations) = common::env_fuzz(1_000_000, 99);
    assert!(steps >= 1_000_000);
    assert!(violations.is_empty(), "{violations:#?}");
}
