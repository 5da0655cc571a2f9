//! Polynomial strings: `+ - * ^`, parentheses, integer coefficients.

use relci_core::graded::{Poly, PolyRing};
use relci_core::Field;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {message} (column {column} of {source_text:?})")]
pub struct PolyParseError {
    pub field: String,
    pub column: usize,
    pub message: String,
    pub source_text: String,
}

struct Parser<'a, F: Field> {
    ring: &'a PolyRing<F>,
    src: &'a [u8],
    pos: usize,
}

type Parsed<E> = Result<Poly<E>, (usize, String)>;

impl<'a, F: Field> Parser<'a, F> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Parsed<F::Elem> {
        let field = self.ring.field();
        let mut acc = Poly::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            acc = if sign < 0 { acc.sub(field, &t) } else { acc.add(field, &t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Parsed<F::Elem> {
        let field = self.ring.field();
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(field, &self.factor()?);
                }
                // juxtaposition: `2x`, `x y`, `x(y+z)`
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' || c == b'_' => {
                    acc = acc.mul(field, &self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Parsed<F::Elem> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let e = self.uint()?;
            let e = u32::try_from(e).map_err(|_| (start, "exponent too large".to_string()))?;
            return Ok(base.pow(self.ring.field(), e));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u64, (usize, String)> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err((start, "expected a number".into()));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| (start, "number too large".into()))
    }

    fn atom(&mut self) -> Parsed<F::Elem> {
        let field = self.ring.field();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err((self.pos, "expected ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let n = self.uint()?;
                let n = i64::try_from(n).map_err(|_| (start, "coefficient too large".to_string()))?;
                Ok(Poly::constant(field, field.from_i64(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.ring.var_index(name) {
                    Some(i) => Ok(self.ring.var(i)),
                    None => Err((start, format!("unknown variable {:?}", name))),
                }
            }
            Some(c) => Err((self.pos, format!("unexpected {:?}", c as char))),
            None => Err((self.pos, "unexpected end of input".into())),
        }
    }
}

/// Parse a polynomial in the ring's variables. `field_name` identifies the
/// scenario entry in error messages.
pub fn parse_poly<F: Field>(ring: &PolyRing<F>, field_name: &str, text: &str) -> Result<Poly<F::Elem>, PolyParseError> {
    let mut p = Parser { ring, src: text.as_bytes(), pos: 0 };
    let err = |(column, message): (usize, String)| PolyParseError {
        field: field_name.to_string(),
        column: column + 1,
        message,
        source_text: text.to_string(),
    };
    if text.trim().is_empty() {
        return Err(err((0, "empty polynomial".into())));
    }
    let out = p.expr().map_err(err)?;
    if p.peek().is_some() {
        return Err(err((p.pos, "trailing input".into())));
    }
    Ok(out)
}

/// As [`parse_poly`], also requiring a homogeneous result (zero allowed).
pub fn parse_homogeneous<F: Field>(ring: &PolyRing<F>, field_name: &str, text: &str) -> Result<Poly<F::Elem>, PolyParseError> {
    let p = parse_poly(ring, field_name, text)?;
    if !p.is_zero() && p.homogeneous_degree(ring.weights()).is_none() {
        return Err(PolyParseError {
            field: field_name.to_string(),
            column: 1,
            message: "polynomial is not homogeneous".into(),
            source_text: text.to_string(),
        });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use relci_core::PrimeField;

    fn ring() -> PolyRing<PrimeField> {
        PolyRing::new(PrimeField::new(32003).unwrap(), &["x", "y", "z"]).unwrap()
    }

    #[test]
    fn parses_sums_products_and_powers() {
        let r = ring();
        let f = r.field();
        let p = parse_poly(&r, "f", "x^2 + x*y").unwrap();
        let x = r.var(0);
        let y = r.var(1);
        assert_eq!(p, x.mul(f, &x).add(f, &x.mul(f, &y)));
        assert_eq!(parse_poly(&r, "g", "-y").unwrap(), y.neg(f));
        assert_eq!(parse_poly(&r, "g", "(x+y)^2 - 2x y").unwrap(), parse_poly(&r, "g", "x^2+y^2").unwrap());
        assert_eq!(parse_poly(&r, "g", "3 x y - x*y*3").unwrap(), Poly::zero());
        assert_eq!(parse_poly(&r, "g", "0").unwrap(), Poly::zero());
    }

    #[test]
    fn reports_position_and_field() {
        let r = ring();
        let e = parse_poly(&r, "f[2]", "x + w").unwrap_err();
        assert_eq!(e.field, "f[2]");
        assert_eq!(e.column, 5);
        assert!(e.message.contains("\"w\""));
        assert!(parse_poly(&r, "f", "x +").is_err());
        assert!(parse_poly(&r, "f", "(x").is_err());
        assert!(parse_poly(&r, "f", "").is_err());
        assert!(parse_homogeneous(&r, "f", "x^2 + y").is_err());
    }
}
