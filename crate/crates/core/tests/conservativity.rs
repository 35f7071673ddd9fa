//! Both sides of every dL axiom instance met while unfolding a loop-free
//! linear program agree at random states.

use pdtl_testkit::conservativity::{check_axiom_instances, Tally};
use pdtl_testkit::gen::{linear_formula, linear_program, point};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn axiom_instances_agree_at_random_states(
        program in linear_program(),
        post in linear_formula(),
        points in prop::collection::vec(point(), 20),
    ) {
        let mut tally = Tally::default();
        let checked = check_axiom_instances(&program, &post, &points, &mut tally);
        prop_assert!(checked.is_ok(), "{}", checked.unwrap_err());
    }
}
