//! Complex literals of the form `a+bi`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseComplexError {
    #[error("empty complex literal")]
    Empty,
    #[error("invalid complex literal {0:?}; expected a, bi or a+bi")]
    Invalid(String),
    #[error("complex literal {0:?} is not finite")]
    NonFinite(String),
}

fn decimal(s: &str) -> Option<f64> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    // f64::from_str also takes "inf" and "nan"; only plain decimals are allowed here.
    if body.is_empty() || !body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    if !body.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')) {
        return None;
    }
    s.parse().ok()
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` with decimal `a`, `b` (exponents allowed).
pub fn parse_complex(text: &str) -> Result<Complex64, ParseComplexError> {
    if text.is_empty() {
        return Err(ParseComplexError::Empty);
    }
    let invalid = || ParseComplexError::Invalid(text.to_owned());
    let value = match text.strip_suffix('i') {
        None => Complex64::new(decimal(text).ok_or_else(invalid)?, 0.0),
        Some(head) => {
            let bytes = head.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
            match split {
                Some(i) => {
                    let re = decimal(&head[..i]).ok_or_else(invalid)?;
                    let im = decimal(&head[i..]).ok_or_else(invalid)?;
                    Complex64::new(re, im)
                }
                None => Complex64::new(0.0, decimal(head).ok_or_else(invalid)?),
            }
        }
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(ParseComplexError::NonFinite(text.to_owned()))
    }
}

/// Formats `z` so that [`parse_complex`] reads it back exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}
