//! Text formats. Every number is a hex-mantissa dyadic literal.
//!
//! - polynomial: `degree <n>` then `n + 1` complex coefficients, constant first
//! - points and values: one complex literal per line
//! - intervals: `<a> <b>` per line, with a trailing ` exact` on zero-width hits
//!
//! Blank lines and lines starting with `#` are skipped on input.

use std::fmt::Write as _;

use polyeval::refine::IsolatingInterval;
use polyeval::{ApproxPoly, Dyadic, DyadicComplex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn complex(line: usize, s: &str) -> Result<DyadicComplex, ParseError> {
    s.parse().map_err(|_| ParseError { line, msg: format!("invalid complex literal `{s}`") })
}

fn dyadic(line: usize, s: &str) -> Result<Dyadic, ParseError> {
    s.parse().map_err(|_| ParseError { line, msg: format!("invalid dyadic literal `{s}`") })
}

pub fn parse_poly(text: &str) -> Result<ApproxPoly, ParseError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(ParseError { line: 1, msg: "missing `degree <n>` header".into() })?;
    let deg: usize = header
        .strip_prefix("degree")
        .map(str::trim)
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| ParseError { line: hl, msg: format!("expected `degree <n>`, found `{header}`") })?;
    let mut coeffs = Vec::with_capacity(deg + 1);
    let mut last = hl;
    for (ln, l) in lines {
        if coeffs.len() == deg + 1 {
            return Err(ParseError { line: ln, msg: format!("more than {} coefficients", deg + 1) });
        }
        coeffs.push(complex(ln, l)?);
        last = ln;
    }
    if coeffs.len() != deg + 1 {
        return Err(ParseError { line: last, msg: format!("expected {} coefficients, found {}", deg + 1, coeffs.len()) });
    }
    Ok(ApproxPoly::exact(coeffs).with_degree_bound(deg))
}

pub fn format_poly(f: &ApproxPoly) -> String {
    let deg = f.degree_bound().max(f.degree().unwrap_or(0));
    let mut s = format!("degree {deg}\n");
    for k in 0..=deg {
        writeln!(s, "{}", f.coeff(k)).unwrap();
    }
    s
}

pub fn parse_complex_list(text: &str) -> Result<Vec<DyadicComplex>, ParseError> {
    content_lines(text).map(|(ln, l)| complex(ln, l)).collect()
}

pub fn format_complex_list(v: &[DyadicComplex]) -> String {
    v.iter().fold(String::new(), |mut s, z| {
        writeln!(s, "{z}").unwrap();
        s
    })
}

pub fn parse_intervals(text: &str) -> Result<Vec<IsolatingInterval>, ParseError> {
    content_lines(text)
        .map(|(ln, l)| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let (a, b) = match parts.as_slice() {
                [a, b] | [a, b, "exact"] => (dyadic(ln, a)?, dyadic(ln, b)?),
                _ => return Err(ParseError { line: ln, msg: "expected `<a> <b>`".into() }),
            };
            if a >= b {
                return Err(ParseError { line: ln, msg: "interval needs a < b".into() });
            }
            Ok(IsolatingInterval::new(a, b))
        })
        .collect()
}

pub fn format_intervals(v: &[IsolatingInterval]) -> String {
    v.iter().fold(String::new(), |mut s, iv| {
        let flag = if iv.exact { " exact" } else { "" };
        writeln!(s, "{} {}{flag}", iv.a, iv.b).unwrap();
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_roundtrip() {
        let text = "degree 2\n0x1p0+0x0p0i\n-0x3p-2-0x1p4i\n0x0p0+0x5p0i\n";
        let f = parse_poly(text).unwrap();
        assert_eq!(format_poly(&f), text);
    }

    #[test]
    fn poly_errors() {
        assert_eq!(parse_poly("deg 2\n").unwrap_err().line, 1);
        let e = parse_poly("degree 1\n0x1p0+0x0p0i\n\n0x1p0+0xzp0i\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert_eq!(parse_poly("degree 2\n0x1p0+0x0p0i\n").unwrap_err().line, 2);
        assert_eq!(parse_poly("degree 0\n0x1p0+0x0p0i\n0x1p0+0x0p0i\n").unwrap_err().line, 3);
    }

    #[test]
    fn intervals() {
        let v = parse_intervals("# roots\n0x1p0 0x1p1\n").unwrap();
        assert_eq!(format_intervals(&v), "0x1p0 0x1p1\n");
        assert_eq!(parse_intervals("0x1p1 0x1p0\n").unwrap_err().line, 1);
        assert_eq!(parse_intervals("0x1p0\n").unwrap_err().line, 1);
    }
}
