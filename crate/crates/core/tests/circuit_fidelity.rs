mod support;

use proptest::prelude::*;

use scanverif_core::corpus::random::random_program;

#[test]
fn corpus_programs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, p) in support::load_corpus(dir.path()) {
        let n = support::circuit_fidelity(&p.program, 1000, 1).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(n, 1000);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_programs(seed in any::<u64>()) {
        let r = random_program(seed);
        let p = support::typed_il(&r.source);
        prop_assert_eq!(support::circuit_fidelity(&p, 256, seed), Ok(256));
    }
}
