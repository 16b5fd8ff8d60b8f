mod common;

#[test]
fn greedy_matches_exhaustive_enumeration() {
    assert_eq!(common::greedy_mismatches(10_000, 5), 0);
}
