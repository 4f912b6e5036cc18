//! Lexer and recursive-descent parser for the problem-file grammar.
//!
//! Statements are terminated by `;`:
//!
//! ```text
//! vars x1 x2;
//! unknowns y1 y2;
//! trunc 12;
//! eq y1^2 - y2^2 + y1*x1^3 + y2*x2^3 + x1^7;   # repeatable
//! ideal J = <x1, x2>^3;                        # the ^k suffix is optional
//! submodule V1 = [x1, 0], [0, x2];
//! task solve;          # or certify(tougeron|fisher|bk), deform-root,
//!                      # deform-eig, determinacy(r0|k0)
//! ```
//!
//! Expressions use rationals `3/2`, declared names, `+ - * ^` and
//! parentheses; `^` binds tighter than `*`, which binds tighter than `+`/`-`;
//! unary minus is allowed; `^` takes a non-negative integer literal.
//! Whitespace is insignificant and `#` starts a line comment.

use std::fmt;

use germ_core::{Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}:{}: {}",
            self.line, self.col, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    Eq,
    Comma,
    Semi,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut u32, col: &mut u32| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                chars.next();
                bump(c, &mut line, &mut col);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Int(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' => Tok::LAngle,
            '>' => Tok::RAngle,
            '=' => Tok::Eq,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            _ => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character '{c}'"),
                })
            }
        };
        chars.next();
        bump(c, &mut line, &mut col);
        out.push(Spanned {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (u32, u32) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn expect_semi(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::Semi, "';'")
    }

    pub fn take_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    pub fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => Some(s.as_str()),
            _ => None,
        }
    }

    pub fn peek_is_semi(&self) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Semi, .. }))
    }

    pub fn take_uint(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Int(s), ..
            }) => {
                let v = s
                    .parse::<u32>()
                    .map_err(|_| self.error("integer out of range"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    pub fn eat_langle(&mut self) -> bool {
        self.eat(Tok::LAngle)
    }

    pub fn expect_rangle(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::RAngle, "'>'")
    }

    pub fn eat_lbracket(&mut self) -> bool {
        self.eat(Tok::LBracket)
    }

    pub fn expect_lbracket(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::LBracket, "'['")
    }

    pub fn expect_rbracket(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::RBracket, "']'")
    }

    pub fn eat_comma(&mut self) -> bool {
        self.eat(Tok::Comma)
    }

    pub fn eat_caret(&mut self) -> bool {
        self.eat(Tok::Caret)
    }

    pub fn eat_lparen(&mut self) -> bool {
        self.eat(Tok::LParen)
    }

    /// For hyphenated task names (`deform-root`), assembled at the
    /// statement level since `-` is an operator inside expressions.
    pub fn eat_minus(&mut self) -> bool {
        self.eat(Tok::Minus)
    }

    pub fn expect_rparen(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::RParen, "')'")
    }

    pub fn expect_eq(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::Eq, "'='")
    }

    /// Expression parsing: `+`/`-` < `*` < `^`, with unary minus.
    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            if self.eat(Tok::Plus) {
                let rhs = self.parse_term()?;
                acc = Expr::Add(Box::new(acc), Box::new(rhs));
            } else if self.eat(Tok::Minus) {
                let rhs = self.parse_term()?;
                acc = Expr::Sub(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_factor()?;
        while self.eat(Tok::Star) {
            let rhs = self.parse_factor()?;
            acc = Expr::Mul(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(Tok::Minus) {
            let inner = self.parse_factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let mut base = self.parse_atom()?;
        while self.eat(Tok::Caret) {
            let e = self.take_uint()?;
            base = Expr::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Int(s), ..
            }) => {
                self.pos += 1;
                let num: Integer = s.parse().map_err(|_| self.error("bad integer"))?;
                // rational literal p/q
                if matches!(
                    self.peek(),
                    Some(Spanned {
                        tok: Tok::Slash,
                        ..
                    })
                ) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Spanned {
                            tok: Tok::Int(d), ..
                        }) => {
                            self.pos += 1;
                            let den: Integer = d.parse().map_err(|_| self.error("bad integer"))?;
                            if den == Integer::from(0) {
                                return Err(self.error("zero denominator"));
                            }
                            Ok(Expr::Num(Rational::new(num, den)))
                        }
                        _ => Err(self.error("expected a denominator after '/'")),
                    }
                } else {
                    Ok(Expr::Num(Rational::from_integer(num)))
                }
            }
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Spanned {
                tok: Tok::LParen, ..
            }) => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            _ => Err(self.error("expected a number, name or '('")),
        }
    }
}
