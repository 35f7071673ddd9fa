//! Claims the kernel proves about unrolled linear programs are confirmed by
//! the simulator.

use pdtl_testkit::differential::{instance, run_corpus};
use pdtl_testkit::draw;

#[test]
fn proved_claims_hold_in_simulation() {
    let corpus = draw(&instance(), 400, 7);
    let closed = run_corpus(&corpus).unwrap_or_else(|e| panic!("{e}"));
    assert!(closed >= 50, "only {closed} of {} claims closed", corpus.len());
}
