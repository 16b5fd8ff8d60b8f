mod common;

use std::time::Instant;

#[test]
fn backprop_agrees_with_central_differences_on_random_nets() {
    let start = Instant::now();
    let worst = common::gradient_check(200, 0x6EAD);
    assert!(worst < 1e-4, "max relative error {worst:e}");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}
