//! Text forms of complex numbers: `3`, `-0.5i`, `1+2i`, `2.5e-3-1e2j`, `i`, `-i`.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn real(s: &str, whole: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse(format!("invalid complex number {whole:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite component in {whole:?}")));
    }
    Ok(v)
}

fn imag(s: &str, whole: &str) -> Result<f64> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(s, whole),
    }
}

pub fn parse_complex(input: &str) -> Result<Complex64> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex number".into()));
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(real(&s, input)?, 0.0));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(real(&body[..k], input)?, imag(&body[k..], input)?)),
        None => Ok(Complex64::new(0.0, imag(body, input)?)),
    }
}
