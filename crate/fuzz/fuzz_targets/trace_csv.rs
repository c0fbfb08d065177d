#![no_main]

//! Empirical trace parsing must never crash, and every marginal it accepts
//! must satisfy the marginal invariants (non-empty, finite, non-negative).

use libfuzzer_sys::fuzz_target;

use ofdm_frontier::interference::load_empirical;

fuzz_target!(|data: &[u8]| {
    for column in 0..3 {
        for has_header in [false, true] {
            if let Ok(marginal) = load_empirical(data, column, has_header) {
                marginal.validate().expect("accepted trace must be valid");
                let (mean, variance) = marginal.moments();
                assert!(mean.is_finite() && mean >= 0.0);
                assert!(variance.is_finite() && variance >= 0.0);
            }
        }
    }
});
