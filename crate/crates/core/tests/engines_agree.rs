mod support;

use proptest::prelude::*;

use scanverif_core::corpus::random::random_program;
use scanverif_core::engines::{
    replay_counterexample, verify_bmc, verify_explicit, Outcome, VerificationCase, DEFAULT_BIT_BUDGET,
};
use scanverif_core::sat::Limits;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Both engines reach the same verdict class, and every counterexample
    /// either of them produces replays at its stated cycle.
    #[test]
    fn explicit_and_bmc(seed in any::<u64>()) {
        let r = random_program(seed);
        let p = support::typed_il(&r.source);
        let case = VerificationCase::new(&p, &p.requirements[0].id, Some(r.bound)).unwrap();
        let e = verify_explicit(&case, DEFAULT_BIT_BUDGET);
        let b = verify_bmc(&case, Limits::default());
        prop_assert_eq!(e.outcome.class(), b.outcome.class(), "{}", r.source);
        for v in [&e, &b] {
            if let Outcome::Violated { counterexample } = &v.outcome {
                let replay = replay_counterexample(&case.program, counterexample);
                prop_assert!(replay.is_confirmed(), "{:?}\n{}", replay, r.source);
            }
        }
    }
}
