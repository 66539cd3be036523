//! Replays the checked-in fuzz corpus seeds through the parser entry points.

use std::path::PathBuf;

use grasscurve::parse::parse_complex;
use grasscurve::Curve;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn curve_json_seeds() {
    let mut accepted = 0;
    for (name, bytes) in seeds("curve_json") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        match Curve::from_json(text) {
            Ok(c) => {
                accepted += 1;
                assert_eq!(Curve::from_json(&c.to_json()).unwrap(), c, "{name}");
                let _ = c.verify(1e-10);
            }
            Err(e) => assert!(!e.to_string().is_empty(), "{name}"),
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn curve_json_seed_verdicts() {
    let read = |n: &str| {
        std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/curve_json").join(n))
            .unwrap()
    };
    assert!(Curve::from_json(&read("dn2.json")).unwrap().verify(1e-10).passed());
    assert!(Curve::from_json(&read("found_2_4.json")).unwrap().verify(1e-10).passed());
    for bad in ["garbage.json", "short_row.json", "zero_n.json", "bad_version.json", "unknown_field.json", "overflow.json"] {
        assert!(Curve::from_json(&read(bad)).is_err(), "{bad}");
    }
}

#[test]
fn parse_complex_seeds() {
    for (name, bytes) in seeds("parse_complex") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(z) = parse_complex(text) {
            assert!(z.re.is_finite() && z.im.is_finite(), "{name}");
            assert_eq!(parse_complex(&format!("{}{:+}i", z.re, z.im)).unwrap(), z, "{name}");
        }
    }
}
