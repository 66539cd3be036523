#![no_main]

use grasscurve::Curve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(c) = Curve::from_json(text) else { return };
    // accepted curves round-trip exactly and are safe to analyse
    let again = Curve::from_json(&c.to_json()).expect("serialised curve parses");
    assert_eq!(c, again);
    if c.n() <= 6 && c.d() <= 12 {
        let _ = c.verify(1e-10);
    }
});
