#![no_main]

use grasscurve::parse::parse_complex;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(z) = parse_complex(text) {
        assert!(z.re.is_finite() && z.im.is_finite());
        let printed = format!("{}{:+}i", z.re, z.im);
        assert_eq!(parse_complex(&printed).expect("printed value parses"), z);
    }
});
