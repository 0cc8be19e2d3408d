use super::{BinaryOp, Builder, Constant, Expr, Node, UnaryOp};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::univariate::AtomKind;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self, offset: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + offset).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.peek_byte(0).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte(0) else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit()
            || (b == b'.' && self.peek_byte(1).is_some_and(|c| c.is_ascii_digit()))
        {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self
                .peek_byte(0)
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if b"+-*/^();".contains(&b) {
            self.pos += 1;
            return Ok((Tok::Op(b as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            pos: start,
            msg: format!("unexpected character `{ch}`"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let digits = |lx: &mut Self| {
            while lx.peek_byte(0).is_some_and(|c| c.is_ascii_digit()) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.peek_byte(0) == Some(b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
            let signed = matches!(self.peek_byte(1), Some(b'+' | b'-'));
            let first = self.peek_byte(if signed { 2 } else { 1 });
            if first.is_some_and(|c| c.is_ascii_digit()) {
                self.pos += if signed { 2 } else { 1 };
                digits(self);
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                pos: start,
                msg: format!("number `{text}` is out of range"),
            });
        }
        Ok((Tok::Num(value, text.to_string()), start))
    }
}

/// Splits a decimal literal into its significant digits and the power of ten
/// of the last digit, e.g. `"1.250e2"` → `("125", 0)`.
fn decimal_digits(text: &str) -> (String, i64) {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i64>().unwrap_or(0)),
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let mut digits: String = format!("{int}{frac}");
    let mut scale = exp - frac.len() as i64;
    while digits.ends_with('0') && digits.len() > 1 {
        digits.pop();
        scale += 1;
    }
    let trimmed = digits.trim_start_matches('0');
    if trimmed.is_empty() {
        return ("0".into(), 0);
    }
    (trimmed.to_string(), scale)
}

/// Interval holding the exact value of a decimal literal whose nearest double is `value`.
pub(super) fn literal_enclosure(text: &str, value: f64) -> Interval {
    // Every double has a finite decimal expansion; 1100 digits cover them all.
    let exact = format!("{value:.1100e}");
    let (lit_digits, lit_scale) = decimal_digits(text);
    let (val_digits, val_scale) = decimal_digits(&exact);
    if lit_digits == val_digits && lit_scale == val_scale {
        Interval::point(value)
    } else {
        Interval::from_bounds(
            value.next_down().max(f64::MIN),
            value.next_up().min(f64::MAX),
        )
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arity: usize,
    b: &'a mut Builder,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected `{c}`")))
        }
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Tok::Num(_, t) => format!("number `{t}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        };
        Error::Syntax {
            pos: self.pos(),
            msg: format!("{what}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<usize> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinaryOp::Add
            } else if self.eat('-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = self.b.binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<usize> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinaryOp::Mul
            } else if self.eat('/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = self.b.binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<usize> {
        if self.eat('-') {
            let inner = self.factor()?;
            if let Node::Const(c) = self.b.nodes[inner] {
                return Ok(self.b.constant(c.neg()));
            }
            return Ok(self.b.unary(UnaryOp::Atom(AtomKind::Neg), inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<usize> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        match self.bump() {
            Tok::Num(_, text) if text.bytes().all(|c| c.is_ascii_digit()) => {
                let k: u32 = text.parse().map_err(|_| Error::Syntax {
                    pos,
                    msg: format!("exponent `{text}` is too large"),
                })?;
                if k == 0 {
                    return Err(Error::Syntax {
                        pos,
                        msg: "exponent must be a positive integer".into(),
                    });
                }
                Ok(if k == 1 {
                    base
                } else {
                    self.b.unary(UnaryOp::PowInt(k), base)
                })
            }
            _ => Err(Error::Syntax {
                pos,
                msg: "exponent must be a positive integer literal".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<usize> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(value, text) => {
                self.bump();
                Ok(self.b.constant(Constant {
                    value,
                    enclosure: literal_enclosure(&text, value),
                }))
            }
            Tok::Op('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(&name, pos)
            }
            _ => Err(self.unexpected("expected a number, variable, function or `(`")),
        }
    }

    fn identifier(&mut self, name: &str, pos: usize) -> Result<usize> {
        match name {
            "pi" => return Ok(self.b.constant(Constant::pi())),
            "e" => return Ok(self.b.constant(Constant::e())),
            _ => {}
        }
        if let Some(index) = name.strip_prefix('x') {
            if !index.is_empty() && index.bytes().all(|c| c.is_ascii_digit()) {
                let i: usize = index.parse().unwrap_or(usize::MAX);
                if i == 0 {
                    return Err(Error::UnknownIdentifier {
                        name: name.into(),
                        pos,
                    });
                }
                if i > self.arity {
                    return Err(Error::Arity {
                        index: i,
                        arity: self.arity,
                    });
                }
                return Ok(self.b.var(i - 1));
            }
        }
        let op = match name {
            "exp" => UnaryOp::Atom(AtomKind::Exp),
            "log" => UnaryOp::Atom(AtomKind::Log),
            "sin" => UnaryOp::Atom(AtomKind::Sin),
            "cos" => UnaryOp::Atom(AtomKind::Cos),
            "tan" => UnaryOp::Atom(AtomKind::Tan),
            "inv" => UnaryOp::Atom(AtomKind::Inv),
            "sqr" => UnaryOp::Atom(AtomKind::Sqr),
            "cot" => UnaryOp::Cot,
            "sqrt" => UnaryOp::Sqrt,
            _ => {
                return Err(Error::UnknownIdentifier {
                    name: name.into(),
                    pos,
                })
            }
        };
        self.expect('(')?;
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(self.b.unary(op, arg))
    }
}

pub(super) fn parse(text: &str, arity: usize, mut b: Builder) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        arity,
        b: &mut b,
    };
    let mut outputs = vec![p.expr()?];
    while p.eat(';') {
        outputs.push(p.expr()?);
    }
    if *p.peek() != Tok::End {
        return Err(p.unexpected("expected an operator or end of input"));
    }
    b.finish(arity, outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax_pos(text: &str) -> usize {
        match Expr::parse(text, 2) {
            Err(Error::Syntax { pos, .. }) => pos,
            other => panic!("{text}: expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn literal_enclosures() {
        assert_eq!(literal_enclosure("0.5", 0.5), Interval::point(0.5));
        assert_eq!(literal_enclosure("2.50e1", 25.0), Interval::point(25.0));
        assert_eq!(literal_enclosure("0000.125", 0.125), Interval::point(0.125));
        let tenth = literal_enclosure("0.1", 0.1);
        assert!(tenth.lo() < 0.1 && tenth.hi() > 0.1);
        let tiny = literal_enclosure("1e-30", 1e-30);
        assert!(tiny.lo() < tiny.hi());
        assert_eq!(literal_enclosure("0", 0.0), Interval::ZERO);
    }

    #[test]
    fn error_positions() {
        assert_eq!(syntax_pos("x1 +"), 4);
        assert_eq!(syntax_pos("(x1"), 3);
        assert_eq!(syntax_pos("x1 $ x2"), 3);
        assert_eq!(syntax_pos("x1^2.5"), 3);
        assert_eq!(syntax_pos("x1^0"), 3);
        assert_eq!(syntax_pos("x1 x2"), 3);
        assert_eq!(syntax_pos("sin x1"), 4);
        assert!(matches!(
            Expr::parse("foo(x1)", 2),
            Err(Error::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("x0", 2),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            Expr::parse("x1 + x3", 2),
            Err(Error::Arity { index: 3, arity: 2 })
        ));
    }

    #[test]
    fn precedence_and_folding() {
        let e = Expr::parse("1 + 2 * x1 ^ 2 - -3", 1).unwrap();
        assert_eq!(e.to_string(), "((1.0 + (2.0 * (x1)^2)) - (-3.0))");
        let e = Expr::parse("-x1 ^ 2", 1).unwrap();
        assert_eq!(e.to_string(), "(-(x1)^2)");
        let e = Expr::parse("x1 / x2 / 2", 2).unwrap();
        assert_eq!(e.to_string(), "((x1 / x2) / 2.0)");
        let e = Expr::parse("  sin ( x1 )^1 ; -pi ; 1.5E+2", 1).unwrap();
        assert_eq!(e.output_count(), 3);
        assert_eq!(e.to_string(), "sin(x1); (-pi); 150.0");
    }
}
