use num_rational::Rational64;
use thiserror::Error;

use super::{Const, Expr};

/// Parse failures. Offsets are byte positions into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("invalid coordinate names: {0}")]
    InvalidCoordNames(String),
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonIntegerExponent { offset } => Some(*offset),
            ParseError::InvalidCoordNames(_) => None,
        }
    }
}

const FUNCTIONS: [&str; 4] = ["sin", "cos", "exp", "sqrt"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(s) => format!("number `{s}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = pos;
            let mut seen_exp = false;
            while let Some(&(p, ch)) = chars.peek() {
                let accept = ch.is_ascii_digit()
                    || ch == '.'
                    || (!seen_exp && (ch == 'e' || ch == 'E'))
                    || (seen_exp && (ch == '+' || ch == '-') && matches!(src[..p].chars().last(), Some('e' | 'E')));
                if !accept {
                    break;
                }
                if ch == 'e' || ch == 'E' {
                    seen_exp = true;
                }
                end = p + ch.len_utf8();
                chars.next();
            }
            out.push((Tok::Num(src[pos..end].to_string()), pos));
            continue;
        }
        if is_ident_start(c) {
            let mut end = pos;
            while let Some(&(p, ch)) = chars.peek() {
                if !is_ident_char(ch) {
                    break;
                }
                end = p + ch.len_utf8();
                chars.next();
            }
            out.push((Tok::Ident(src[pos..end].to_string()), pos));
            continue;
        }
        return Err(ParseError::Syntax {
            offset: pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn parse_number(text: &str, offset: usize) -> Result<Const, ParseError> {
    let bad = || ParseError::Syntax {
        offset,
        message: format!("malformed number `{text}`"),
    };
    if text.contains(['e', 'E']) {
        let value: f64 = text.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                offset,
                message: format!("number `{text}` is out of range"),
            });
        }
        return Ok(Const::Float(value));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = digits.parse::<i64>().ok();
    let denom = 10i64.checked_pow(frac_part.len() as u32);
    match (numer, denom) {
        (Some(n), Some(d)) => Ok(Const::Rational(Rational64::new(n, d))),
        _ => {
            let value: f64 = text.parse().map_err(|_| bad())?;
            Ok(Const::Float(value))
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.unary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.exponent()?;
            base = Expr::Pow(Box::new(base), exponent);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.offset();
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        match self.peek().clone() {
            Tok::Num(text) if text.bytes().all(|b| b.is_ascii_digit()) => {
                self.bump();
                let value: i32 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("exponent `{text}` is too large"),
                })?;
                Ok(if negative { -value } else { value })
            }
            Tok::End => Err(self.unexpected("an integer exponent")),
            _ => Err(ParseError::NonIntegerExponent { offset: start }),
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(text) => Ok(Expr::Const(parse_number(&text, offset)?)),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(index) = self.names.iter().position(|n| *n == name) {
                    return Ok(Expr::Coord(index));
                }
                if FUNCTIONS.contains(&name.as_str()) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected(&format!("`(` after `{name}`")));
                    }
                    self.bump();
                    let arg = Box::new(self.expr()?);
                    if *self.peek() != Tok::RParen {
                        return Err(self.unexpected("`)`"));
                    }
                    self.bump();
                    return Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        "exp" => Expr::Exp(arg),
                        _ => Expr::Sqrt(arg),
                    });
                }
                if name == "pi" {
                    return Ok(Expr::float(std::f64::consts::PI));
                }
                Err(ParseError::UnknownIdentifier { name, offset })
            }
            other => {
                self.pos -= usize::from(other != Tok::End);
                Err(self.unexpected("a number, identifier or `(`"))
            }
        }
    }
}

fn check_names(names: &[String]) -> Result<(), ParseError> {
    for (i, name) in names.iter().enumerate() {
        let mut chars = name.chars();
        let valid = chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char);
        if !valid {
            return Err(ParseError::InvalidCoordNames(format!("`{name}` is not an identifier")));
        }
        if FUNCTIONS.contains(&name.as_str()) {
            return Err(ParseError::InvalidCoordNames(format!("`{name}` is a function name")));
        }
        if names[..i].contains(name) {
            return Err(ParseError::InvalidCoordNames(format!("`{name}` appears twice")));
        }
    }
    Ok(())
}

/// Parses `source`, resolving identifiers to positions in `coord_names`.
pub fn parse_expr(source: &str, coord_names: &[String]) -> Result<Expr, ParseError> {
    check_names(coord_names)?;
    let toks = tokenize(source)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        names: coord_names,
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sum_of_product_and_constant() {
        let e = parse_expr("x1*x2 + 3", &names(&["x1", "x2"])).unwrap();
        assert_eq!(e, Expr::Add(Box::new(Expr::Coord(0) * Expr::Coord(1)), Box::new(Expr::int(3))));
    }

    #[test]
    fn power_of_function() {
        let e = parse_expr("sin(th)^2", &names(&["th", "ph"])).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::Sin(Box::new(Expr::Coord(0)))), 2));
    }

    #[test]
    fn doubled_operator_reports_offset() {
        let err = parse_expr("x1 +* 2", &names(&["x1"])).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expr("x + y", &names(&["x"])).unwrap_err();
        assert_eq!(err, ParseError::UnknownIdentifier { name: "y".into(), offset: 4 });
    }

    #[test]
    fn non_integer_exponents() {
        for src in ["x^0.5", "x^y", "x^(2)"] {
            let err = parse_expr(src, &names(&["x", "y"])).unwrap_err();
            assert_eq!(err, ParseError::NonIntegerExponent { offset: 2 }, "{src}");
        }
    }

    #[test]
    fn signed_and_chained_exponents() {
        let e = parse_expr("x^-2^3", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::Pow(Box::new(Expr::Coord(0)), -2)), 3));
    }

    #[test]
    fn unary_minus_binds_tightest() {
        let e = parse_expr("-x^2", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::Pow(Box::new(-Expr::Coord(0)), 2));
        let e = parse_expr("2*-x", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::int(2) * -Expr::Coord(0));
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse_expr("0.1", &[]).unwrap();
        assert_eq!(e, Expr::Const(Const::Rational(Rational64::new(1, 10))));
        let e = parse_expr("1e-3", &[]).unwrap();
        assert_eq!(e, Expr::Const(Const::Float(1e-3)));
    }

    #[test]
    fn coordinates_shadow_pi() {
        assert_eq!(parse_expr("pi", &names(&["pi"])).unwrap(), Expr::Coord(0));
        assert_eq!(parse_expr("pi", &[]).unwrap(), Expr::float(std::f64::consts::PI));
    }

    #[test]
    fn bad_coordinate_names() {
        assert!(parse_expr("1", &names(&["a", "a"])).is_err());
        assert!(parse_expr("1", &names(&["sin"])).is_err());
        assert!(parse_expr("1", &names(&["2x"])).is_err());
    }

    #[test]
    fn unbalanced_parentheses() {
        let err = parse_expr("(x + 1", &names(&["x"])).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 6, .. }));
        let err = parse_expr("x + 1)", &names(&["x"])).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 5, .. }));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_expr("", &[]), Err(ParseError::Syntax { offset: 0, .. })));
    }
}
