mod common;

use common::oracles::nitsche_gap;

#[test]
fn zero_shift_reduces_to_nitsche() {
    let (worst, _) = nitsche_gap(1.0);
    assert!(worst <= 1e-13, "max entry difference {worst:.3e}");
}

#[test]
fn zero_shift_reduces_to_nitsche_at_production_penalty() {
    // entries reach O(α); allow a few ulps of the largest one
    let (worst, scale) = nitsche_gap(400.0);
    assert!(worst <= 4.0 * f64::EPSILON * scale, "max entry difference {worst:.3e} at scale {scale:.1}");
}
