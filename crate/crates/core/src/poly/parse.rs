//! Textual polynomial syntax.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ['^' integer]
//! atom   := integer ['/' integer] | name | '(' expr ')'
//! ```
//!
//! `p/q` is only accepted between two integer literals. [`format_poly`]
//! prints the canonical form, which re-parses to the identical term map.

use super::{MultiPoly, PolyError, DEFAULT_TERM_CAP};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Reverse;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, PolyError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Token::Int(src[start..i].parse().unwrap())));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Token::Name(src[start..i].to_string())));
                continue;
            }
            other => {
                return Err(PolyError::Parse {
                    position: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    vars: &'a [String],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Parse {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = acc.mul_capped(&self.factor()?, DEFAULT_TERM_CAP)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly, PolyError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Token::Int(k)) => {
                    let k: u32 = match k.try_into() {
                        Ok(k) => k,
                        Err(_) => return self.err("exponent too large"),
                    };
                    if self.peek() == Some(&Token::Caret) {
                        return self.err("chained exponents need parentheses");
                    }
                    return base.pow_capped(k, DEFAULT_TERM_CAP);
                }
                _ => {
                    self.pos -= 1;
                    return self.err("expected a nonnegative integer exponent");
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        let n = self.vars.len();
        match self.next() {
            Some(Token::Int(num)) => {
                if self.peek() == Some(&Token::Slash) {
                    self.pos += 1;
                    match self.next() {
                        Some(Token::Int(den)) if !den.is_zero() => {
                            Ok(MultiPoly::constant(n, BigRational::new(num, den)))
                        }
                        Some(Token::Int(_)) => {
                            self.pos -= 1;
                            self.err("zero denominator")
                        }
                        _ => {
                            self.pos -= 1;
                            self.err("'/' is only allowed between integer literals")
                        }
                    }
                } else {
                    Ok(MultiPoly::constant(n, BigRational::from_integer(num)))
                }
            }
            Some(Token::Name(name)) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(MultiPoly::var(n, i)),
                None => {
                    self.pos -= 1;
                    self.err(format!("unknown variable {name:?}"))
                }
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        self.err("expected ')'")
                    }
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a number, a variable or '('")
            }
        }
    }
}

/// Parse a polynomial in the named variables.
pub fn parse_poly(src: &str, vars: &[String]) -> Result<MultiPoly, PolyError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(PolyError::Parse {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        vars,
        end: src.len(),
    };
    let out = p.expr()?;
    if p.pos < p.tokens.len() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical text form: terms by descending total degree, then descending
/// exponent vector.
pub fn format_poly(p: &MultiPoly, vars: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by_key(|(e, _)| (Reverse(e.iter().sum::<u32>()), Reverse((*e).clone())));
    let mut out = String::new();
    for (k, (e, c)) in terms.into_iter().enumerate() {
        let negative = c.is_negative();
        let mag = c.abs();
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mono: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| {
                if k == 1 {
                    vars[i].clone()
                } else {
                    format!("{}^{}", vars[i], k)
                }
            })
            .collect();
        if mono.is_empty() {
            out.push_str(&fmt_rational(&mag));
        } else {
            if !mag.is_one() {
                out.push_str(&fmt_rational(&mag));
                out.push('*');
            }
            out.push_str(&mono.join("*"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rational};
    use proptest::prelude::*;

    fn vars() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_rational_literals_and_powers() {
        let p = parse_poly("3/4*x*y - (y - x^2)^2 + 1", &vars()).unwrap();
        assert_eq!(p.coefficient(&[1, 1, 0]), rational(3, 4));
        assert_eq!(p.coefficient(&[4, 0, 0]), int(-1));
        assert_eq!(p.coefficient(&[2, 1, 0]), int(2));
        assert_eq!(p.coefficient(&[0, 0, 0]), int(1));
    }

    #[test]
    fn canonical_print() {
        let p = parse_poly("y^2 - x + 3/4*x*y - 1", &vars()).unwrap();
        assert_eq!(format_poly(&p, &vars()), "3/4*x*y + y^2 - x - 1");
        let q = parse_poly("-x", &vars()).unwrap();
        assert_eq!(format_poly(&q, &vars()), "-x");
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "x +", "x / y", "2^x", "w", "(x", "x^2^2", "1/0", "x $ y"] {
            assert!(parse_poly(bad, &vars()).is_err(), "{bad} accepted");
        }
    }

    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec(
            (
                prop::collection::vec(0u32..4, 3),
                -20i64..20,
                1i64..9,
            ),
            0..8,
        )
        .prop_map(|ts| {
            MultiPoly::from_terms(3, ts.into_iter().map(|(e, n, d)| (e, rational(n, d)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly()) {
            let text = format_poly(&p, &vars());
            let back = parse_poly(&text, &vars()).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn evaluation_is_a_ring_homomorphism(
            p in arb_poly(), q in arb_poly(),
            pt in prop::collection::vec((-5i64..5, 1i64..4), 3),
        ) {
            let pt: Vec<_> = pt.into_iter().map(|(n, d)| rational(n, d)).collect();
            let ep = p.eval(&pt).unwrap();
            let eq = q.eval(&pt).unwrap();
            prop_assert_eq!(p.mul(&q).unwrap().eval(&pt).unwrap(), &ep * &eq);
            prop_assert_eq!(p.add(&q).unwrap().eval(&pt).unwrap(), ep + eq);
        }
    }
}
