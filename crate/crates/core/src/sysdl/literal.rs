//! Complex, vector, matrix and Pauli-expression literals.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::Matrix;

/// A malformed literal; `offset` is a byte offset into the literal text.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message}")]
pub struct LiteralError {
    pub offset: usize,
    pub message: String,
}

fn fail<T>(offset: usize, message: impl Into<String>) -> Result<T, LiteralError> {
    Err(LiteralError {
        offset,
        message: message.into(),
    })
}

/// Length of the leading decimal `[+-]? (d+ (. d*)? | . d+) ([eE] [+-]? d+)?`
/// in `b[start..]`, or `None`.
fn scan_decimal(b: &[u8], start: usize) -> Option<usize> {
    let mut i = start;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return None;
        }
        i = j;
    }
    Some(i - start)
}

fn to_f64(text: &str, offset: usize) -> Result<f64, LiteralError> {
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => fail(offset, format!("number `{text}` out of range")),
        Err(_) => fail(offset, format!("malformed number `{text}`")),
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi` or `-bi` with decimal `a`, `b`.
pub fn parse_complex(literal: &str) -> Result<Complex64, LiteralError> {
    let lead = literal.len() - literal.trim_start().len();
    let s = literal.trim();
    let b = s.as_bytes();
    if s.is_empty() {
        return fail(lead, "expected a number");
    }
    let Some(n1) = scan_decimal(b, 0) else {
        return fail(lead, format!("malformed complex literal `{s}`"));
    };
    if n1 == b.len() {
        return Ok(Complex64::new(to_f64(s, lead)?, 0.0));
    }
    if n1 + 1 == b.len() && b[n1] == b'i' {
        return Ok(Complex64::new(0.0, to_f64(&s[..n1], lead)?));
    }
    if b[n1] == b'+' || b[n1] == b'-' {
        if let Some(n2) = scan_decimal(b, n1) {
            let end = n1 + n2;
            if end + 1 == b.len() && b[end] == b'i' {
                let re = to_f64(&s[..n1], lead)?;
                let im = to_f64(&s[n1..end], lead + n1)?;
                return Ok(Complex64::new(re, im));
            }
            return fail(lead + end, format!("expected `i` to close imaginary part in `{s}`"));
        }
    }
    fail(lead + n1, format!("malformed complex literal `{s}`"))
}

/// Shortest text that parses back to exactly `z`, signed zeros included.
pub fn format_complex(z: Complex64) -> String {
    let re = format_real(z.re);
    if z.im == 0.0 && z.im.is_sign_positive() {
        re
    } else if z.im.is_sign_negative() {
        format!("{re}-{}i", format_real(-z.im))
    } else {
        format!("{re}+{}i", format_real(z.im))
    }
}

pub(crate) fn format_real(x: f64) -> String {
    // Debug output is the shortest round-tripping form and switches to
    // exponent notation for very large or small magnitudes.
    format!("{x:?}")
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), LiteralError> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            fail(self.pos, format!("expected `{}`", ch as char))
        }
    }

    fn token(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']'))
            .unwrap_or(rest.len());
        self.pos += len;
        (start, &rest[..len])
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    /// `[ c, c, ... ]`
    fn vector(&mut self) -> Result<Vec<Complex64>, LiteralError> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        loop {
            let (at, tok) = self.token();
            if tok.is_empty() {
                return fail(at, "expected a complex number");
            }
            out.push(parse_complex(tok).map_err(|e| LiteralError {
                offset: at + e.offset,
                message: e.message,
            })?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return fail(self.pos, "expected `,` or `]`"),
            }
        }
    }
}

/// Parses `[c0, c1, ...]`.
pub fn parse_vector(src: &str) -> Result<Vec<Complex64>, LiteralError> {
    let mut cur = Cursor::new(src);
    let v = cur.vector()?;
    if !cur.at_end() {
        return fail(cur.pos, "trailing characters after vector");
    }
    Ok(v)
}

/// Parses a square `dim × dim` matrix written as bracketed rows:
/// `[[a, b], [c, d]]`.
pub fn parse_matrix(src: &str, dim: usize) -> Result<Matrix<f64>, LiteralError> {
    let mut cur = Cursor::new(src);
    cur.expect(b'[')?;
    let mut rows = Vec::new();
    loop {
        let row_at = {
            cur.skip_ws();
            cur.pos
        };
        let row = cur.vector()?;
        if row.len() != dim {
            return fail(row_at, format!("row has {} entries, expected {dim}", row.len()));
        }
        rows.push(row);
        cur.skip_ws();
        match cur.peek() {
            Some(b',') => cur.pos += 1,
            Some(b']') => {
                cur.pos += 1;
                break;
            }
            _ => return fail(cur.pos, "expected `,` or `]`"),
        }
        if rows.len() > dim {
            return fail(cur.pos, format!("more than {dim} rows"));
        }
    }
    if rows.len() != dim {
        return fail(0, format!("matrix has {} rows, expected {dim}", rows.len()));
    }
    if !cur.at_end() {
        return fail(cur.pos, "trailing characters after matrix");
    }
    Ok(Matrix::from_row_major(dim, rows.into_iter().flatten().collect()).expect("square by construction"))
}

/// Largest register a Pauli expression may act on.
pub const MAX_QUBITS: usize = 6;

fn pauli_factor(ch: u8) -> Option<Matrix<f64>> {
    match ch {
        b'I' => Some(Matrix::identity(2)),
        b'X' => Some(Matrix::pauli_x()),
        b'Y' => Some(Matrix::pauli_y()),
        b'Z' => Some(Matrix::pauli_z()),
        _ => None,
    }
}

/// `Σ coeff · P_1 ⊗ … ⊗ P_n` from `coeff WORD (± coeff WORD)*`, where the
/// leftmost letter of each word acts on the most significant qubit.
pub fn parse_pauli_expr(src: &str, n_qubits: usize) -> Result<Matrix<f64>, LiteralError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return fail(0, format!("Pauli expressions support 1 to {MAX_QUBITS} qubits, got {n_qubits}"));
    }
    let dim = 1usize << n_qubits;
    let mut total = Matrix::zeros(dim);
    let mut cur = Cursor::new(src);
    let mut sign = 1.0;
    loop {
        let (at, coeff_text) = cur.token();
        if coeff_text.is_empty() {
            return fail(at, "expected a coefficient");
        }
        let coeff = parse_complex(coeff_text).map_err(|e| LiteralError {
            offset: at + e.offset,
            message: e.message,
        })?;
        let (word_at, word) = cur.token();
        if word.is_empty() {
            return fail(word_at, "expected a Pauli word after the coefficient");
        }
        if let Some(bad) = word.bytes().position(|ch| pauli_factor(ch).is_none()) {
            return fail(word_at + bad, format!("invalid Pauli letter in `{word}` (expected I, X, Y or Z)"));
        }
        if word.len() != n_qubits {
            return fail(word_at, format!("Pauli word `{word}` has length {}, expected {n_qubits}", word.len()));
        }
        let mut term = Matrix::identity(1);
        for ch in word.bytes() {
            term = term.kron(&pauli_factor(ch).expect("checked above"));
        }
        total += &term.scale(coeff * sign);

        cur.skip_ws();
        match cur.peek() {
            None => return Ok(total),
            Some(b'+') => sign = 1.0,
            Some(b'-') => sign = -1.0,
            Some(_) => return fail(cur.pos, "expected `+`, `-` or end of expression"),
        }
        cur.pos += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.4375+0i").unwrap(), Complex64::new(0.4375, 0.0));
        assert_eq!(parse_complex("-1i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5i").unwrap(), Complex64::new(0.001, 2.5));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("2.5-0.5i").unwrap(), Complex64::new(2.5, -0.5));
        assert_eq!(parse_complex(".5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("1E+2i").unwrap(), Complex64::new(0.0, 100.0));
    }

    #[test]
    fn malformed_complex() {
        for bad in ["", "i", "-i", "1+i", "1+2", "1e", "1..2", "inf", "nan", "1+2j", "1+-2i", "0x10", "1e999", "--1"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formatting_round_trips() {
        for z in [
            Complex64::new(0.1, 0.0),
            Complex64::new(-0.0, 0.0),
            Complex64::new(1.0, -0.0),
            Complex64::new(1e-300, -7.5e21),
            Complex64::new(std::f64::consts::PI, std::f64::consts::E),
        ] {
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back.re.to_bits(), z.re.to_bits());
            assert_eq!(back.im.to_bits(), z.im.to_bits());
        }
    }

    #[test]
    fn pauli_expressions() {
        assert_eq!(parse_pauli_expr("1.0 Z", 1).unwrap(), Matrix::pauli_z());
        let h = parse_pauli_expr("0.5 XX + 0.5 YY", 2).unwrap();
        let rows: [&[f64]; 4] = [&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]];
        let explicit = Matrix::from_real_rows(&rows).unwrap();
        assert!(h.max_abs_diff(&explicit) < 1e-15);
        let e = parse_pauli_expr("1.0 XZY", 2).unwrap_err();
        assert!(e.message.contains("length"));
        assert_eq!(e.offset, 4);
    }

    #[test]
    fn pauli_order_and_signs() {
        let zi = parse_pauli_expr("1 ZI", 2).unwrap();
        assert_eq!(zi, Matrix::pauli_z().kron(&Matrix::identity(2)));
        let d = parse_pauli_expr("-1 Z - -1 Z", 1).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        assert!(parse_pauli_expr("1 Q", 1).is_err());
        assert!(parse_pauli_expr("1 X +", 1).is_err());
        assert!(parse_pauli_expr("1 X * 2 Y", 1).is_err());
        assert!(parse_pauli_expr("", 1).is_err());
    }

    #[test]
    fn matrices() {
        let m = parse_matrix("[[1, 0-1i], [0+1i, -1]]", 2).unwrap();
        assert_eq!(m, Matrix::pauli_y() + Matrix::pauli_z());
        assert!(parse_matrix("[[1, 0], [0]]", 2).is_err());
        assert!(parse_matrix("[[1, 0], [0, 1]] x", 2).is_err());
        assert!(parse_matrix("[[1, 0], [0, 1], [0, 1]]", 2).is_err());
        assert!(parse_matrix("[[1, 0]", 2).is_err());
        assert_eq!(parse_vector(" [1, 2i ] ").unwrap().len(), 2);
    }
}
