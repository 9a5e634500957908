mod support;

use proptest::prelude::*;

#[test]
fn latch_template_with_and_without_hold() {
    // c1 -> FALSE, c2 -> TRUE, the shape of the latch in the corpus
    for hold in [true, false] {
        assert_eq!(support::template_soundness(&[(0, false), (1, true)], hold), Ok(16));
    }
}

#[test]
fn first_match_wins_on_overlapping_guards() {
    // "a AND b" is shadowed by "a" whenever both hold
    assert_eq!(support::template_soundness(&[(0, true), (4, false), (8, true)], true), Ok(16));
}

proptest! {
    #[test]
    fn compiled_templates_match_the_statement(
        cases in prop::collection::vec((0..support::GUARDS.len(), any::<bool>()), 1..=3),
        hold in any::<bool>(),
    ) {
        prop_assert_eq!(support::template_soundness(&cases, hold), Ok(16));
    }
}
