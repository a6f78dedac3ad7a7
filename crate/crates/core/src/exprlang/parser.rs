use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func, SourceSpan};
use crate::tolerances::MAX_EXPONENT;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        span: SourceSpan,
        found: String,
        expected: Vec<String>,
    },
    #[error("exponent at {span} must be an integer literal")]
    NonIntegerExponent { span: SourceSpan },
    #[error("exponent {value} at {span} outside ±{MAX_EXPONENT}")]
    ExponentOutOfRange { span: SourceSpan, value: i64 },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::NonIntegerExponent { span }
            | ParseError::ExponentOutOfRange { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let ch = src[pos..].chars().next().expect("in bounds");
        if ch.is_whitespace() {
            pos += ch.len_utf8();
            continue;
        }
        let start = pos;
        let simple = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            pos += 1;
            out.push(Token {
                tok,
                span: SourceSpan::new(start, pos),
            });
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit)) {
            let mut integral = true;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'.' {
                integral = false;
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut look = pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    integral = false;
                    pos = look;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let text = &src[start..pos];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                span: SourceSpan::new(start, pos),
                found: format!("malformed number '{text}'"),
                expected: vec!["number".into()],
            })?;
            out.push(Token {
                tok: Tok::Num { value, integral },
                span: SourceSpan::new(start, pos),
            });
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..pos].to_string()),
                span: SourceSpan::new(start, pos),
            });
            continue;
        }
        return Err(ParseError::Syntax {
            span: SourceSpan::new(start, start + ch.len_utf8()),
            found: format!("character '{ch}'"),
            expected: vec!["expression".into()],
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(src.len(), src.len()),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const ATOM_START: &[&str] = &["number", "x", "y", "i", "conj", "exp", "log", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            span: t.span,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str, also: &[&str]) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            let mut expected = vec![name];
            expected.extend_from_slice(also);
            Err(self.unexpected(&expected))
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            let minus = self.bump();
            let inner = self.unary()?;
            let span = minus.span.join(inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (value, exp_span) = self.exponent()?;
        if value.unsigned_abs() > MAX_EXPONENT as u64 {
            return Err(ParseError::ExponentOutOfRange { span: exp_span, value });
        }
        let span = base.span.join(exp_span);
        Ok(Expr {
            kind: ExprKind::Pow(Box::new(base), value as i32),
            span,
        })
    }

    /// `-`? INT (`^` exponent)?, folded right-associatively.
    fn exponent(&mut self) -> Result<(i64, SourceSpan), ParseError> {
        let start = self.peek().span;
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        let magnitude = match t.tok {
            Tok::Num { value, integral: true } if value <= 1e6 => value as i64,
            Tok::Num { integral: true, .. } => {
                return Err(ParseError::ExponentOutOfRange {
                    span: start.join(t.span),
                    value: i64::MAX,
                })
            }
            Tok::Eof => {
                return Err(ParseError::Syntax {
                    span: t.span,
                    found: t.tok.describe(),
                    expected: vec!["integer exponent".into()],
                })
            }
            _ => return Err(ParseError::NonIntegerExponent { span: t.span }),
        };
        let base = if negative { -magnitude } else { magnitude };
        let mut span = start.join(t.span);
        if self.peek().tok != Tok::Caret {
            return Ok((base, span));
        }
        self.bump();
        let (rest, rest_span) = self.exponent()?;
        span = span.join(rest_span);
        if rest < 0 && base.abs() != 1 {
            return Err(ParseError::NonIntegerExponent { span });
        }
        let value = if rest < 0 {
            if rest % 2 == 0 { 1 } else { base }
        } else {
            u32::try_from(rest)
                .ok()
                .and_then(|r| base.checked_pow(r))
                .ok_or(ParseError::ExponentOutOfRange { span, value: i64::MAX })?
        };
        Ok((value, span))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Num(*value),
                    span: t.span,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                let kind = match name.as_str() {
                    "x" => ExprKind::X,
                    "y" => ExprKind::Y,
                    "i" => ExprKind::I,
                    other => {
                        let Some(func) = Func::from_name(other) else {
                            return Err(ParseError::Syntax {
                                span: t.span,
                                found: t.tok.describe(),
                                expected: ATOM_START.iter().map(|s| s.to_string()).collect(),
                            });
                        };
                        self.expect(Tok::LParen, "'('", &[])?;
                        let arg = self.additive()?;
                        let close = self.expect(Tok::RParen, "')'", &["operator"])?;
                        return Ok(Expr {
                            kind: ExprKind::Call(func, Box::new(arg)),
                            span: t.span.join(close.span),
                        });
                    }
                };
                Ok(Expr { kind, span: t.span })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.additive()?;
                self.expect(Tok::RParen, "')'", &["operator"])?;
                Ok(inner)
            }
            _ => Err(self.unexpected(ATOM_START)),
        }
    }
}

/// Parses the expression language.
///
/// Precedence from tightest: `^` (integer literal exponent, right
/// associative), unary `-`, `* /`, `+ -`. Implicit multiplication is a syntax
/// error.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.additive()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_root_is_div() {
        let e = parse("2*i*y^2/(conj(x)+2)^2").unwrap();
        assert!(matches!(e.kind, ExprKind::Binary(BinOp::Div, _, _)));
    }

    #[test]
    fn unclosed_paren_span() {
        let err = parse("x*(y").unwrap_err();
        assert_eq!(err.span().start, 4);
        match err {
            ParseError::Syntax { expected, .. } => assert!(expected.contains(&"')'".to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn variable_exponent_rejected() {
        assert!(matches!(parse("y^x"), Err(ParseError::NonIntegerExponent { .. })));
    }

    #[test]
    fn lexer_rejects_garbage() {
        assert!(matches!(parse("x $ y"), Err(ParseError::Syntax { span, .. }) if span.start == 2));
    }
}
