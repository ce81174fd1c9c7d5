//! Arithmetic expressions in `x` and `t`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'x' | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | sinh | cosh | exp | sqrt | abs
//! ```
//!
//! Unary minus binds looser than `^`, so `-2^2` is `-4`. There is no
//! implicit multiplication.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Unexpected {
        found: String,
        expected: Vec<&'static str>,
    },
    UnknownIdentifier(String),
    Arity {
        function: &'static str,
        expected: usize,
        found: usize,
    },
    TooDeep,
}

/// A syntax error at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "found {found}, expected one of: {}", expected.join(", "))
            }
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            ParseErrorKind::Arity {
                function,
                expected,
                found,
            } => write!(
                f,
                "`{function}` takes {expected} argument(s), {found} given"
            ),
            ParseErrorKind::TooDeep => write!(f, "expression nested too deeply"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite result in {0}")]
    NonFinite(String),
}

/// Variable values for evaluation; `None` marks an unbound variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub x: Option<f64>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(u8),
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Sym(c) => format!("`{}`", *c as char),
            Token::End => "end of input".to_string(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Token::End, start));
        };
        if c.is_ascii_digit() || (c == b'.' && self.peek_digit(self.pos + 1)) {
            return self.number(start).map(|v| (Token::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            return Ok((Token::Ident(word.to_string()), start));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((Token::Sym(c), start));
        }
        let found = String::from_utf8_lossy(&self.src[start..]);
        let found = found.chars().next().unwrap_or('?');
        Err(ParseError {
            offset: start,
            kind: ParseErrorKind::Unexpected {
                found: format!("character {found:?}"),
                expected: vec!["number", "identifier", "operator", "parenthesis"],
            },
        })
    }

    fn peek_digit(&self, at: usize) -> bool {
        self.src.get(at).is_some_and(u8::is_ascii_digit)
    }

    fn number(&mut self, start: usize) -> Result<f64, ParseError> {
        while self.peek_digit(self.pos) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.peek_digit(self.pos) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.src.get(look), Some(b'+' | b'-')) {
                look += 1;
            }
            if self.peek_digit(look) {
                self.pos = look;
                while self.peek_digit(self.pos) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::Unexpected {
                    found: format!("literal `{text}`"),
                    expected: vec!["finite number"],
                },
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    token: Token,
    offset: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let (token, offset) = lexer.next()?;
        Ok(Self {
            lexer,
            token,
            offset,
            depth: 0,
        })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (token, offset) = self.lexer.next()?;
        self.token = token;
        self.offset = offset;
        Ok(())
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset,
            kind: ParseErrorKind::Unexpected {
                found: self.token.describe(),
                expected: expected.to_vec(),
            },
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.offset,
                kind: ParseErrorKind::TooDeep,
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.token {
                Token::Sym(b'+') => BinOp::Add,
                Token::Sym(b'-') => BinOp::Sub,
                _ => break,
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.token {
                Token::Sym(b'*') => BinOp::Mul,
                Token::Sym(b'/') => BinOp::Div,
                _ => break,
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let e = if self.token == Token::Sym(b'-') {
            self.bump()?;
            Expr::Neg(Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.token == Token::Sym(b'^') {
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const START: &[&str] = &["number", "identifier", "`-`", "`(`"];
        match self.token.clone() {
            Token::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Token::Sym(b'(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect_close()?;
                Ok(e)
            }
            Token::Ident(name) => {
                let at = self.offset;
                self.bump()?;
                match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "t" => return Ok(Expr::Var(Var::T)),
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "e" => return Ok(Expr::Const(Constant::E)),
                    _ => {}
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    });
                };
                if self.token != Token::Sym(b'(') {
                    return Err(self.unexpected(&["`(`"]));
                }
                self.bump()?;
                let mut args = vec![self.expr()?];
                while self.token == Token::Sym(b',') {
                    self.bump()?;
                    args.push(self.expr()?);
                }
                self.expect_close()?;
                if args.len() != 1 {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::Arity {
                            function: func.name(),
                            expected: 1,
                            found: args.len(),
                        },
                    });
                }
                Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
            }
            _ => Err(self.unexpected(START)),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.token != Token::Sym(b')') {
            return Err(self.unexpected(&["`)`", "operator"]));
        }
        self.bump()
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.token != Token::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn checked(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(what.to_string()))
    }
}

impl Expr {
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates with both variables bound.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.eval_with(Bindings {
            x: Some(x),
            t: Some(t),
        })
    }

    pub fn eval_with(&self, b: Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(Var::X) => b.x.ok_or(EvalError::Unbound("x")),
            Expr::Var(Var::T) => b.t.ok_or(EvalError::Unbound("t")),
            Expr::Const(Constant::Pi) => Ok(std::f64::consts::PI),
            Expr::Const(Constant::E) => Ok(std::f64::consts::E),
            Expr::Neg(e) => Ok(-e.eval_with(b)?),
            Expr::Binary(op, l, r) => {
                let l = l.eval_with(b)?;
                let r = r.eval_with(b)?;
                match op {
                    BinOp::Add => checked(l + r, "addition"),
                    BinOp::Sub => checked(l - r, "subtraction"),
                    BinOp::Mul => checked(l * r, "multiplication"),
                    BinOp::Div => {
                        if r == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            checked(l / r, "division")
                        }
                    }
                    BinOp::Pow => {
                        if l < 0.0 && r.fract() != 0.0 {
                            return Err(EvalError::Domain(format!(
                                "negative base {l} with non-integer exponent {r}"
                            )));
                        }
                        if l == 0.0 && r < 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        checked(l.powf(r), "power")
                    }
                }
            }
            Expr::Call(func, arg) => {
                let a = arg.eval_with(b)?;
                let v = match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt of negative {a}")));
                        }
                        a.sqrt()
                    }
                };
                checked(v, func.name())
            }
        }
    }
}

/// Canonical, fully parenthesized form; parsing it gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}
