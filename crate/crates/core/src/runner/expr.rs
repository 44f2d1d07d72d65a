//! Arithmetic expressions for forcing terms and exact solutions.
//!
//! Grammar, loosest binding first: `+ -`, then `* /`, then unary minus, then
//! right-associative `^`. Variables are `x` (an alias of `x1`), `x1` and `x2`;
//! constants `pi` and `e`; functions `exp sin cos sinh cosh log`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    X1,
    X2,
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
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Log,
}

/// Parsed expression. Literals are non-negative; signs are unary nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Log => "log",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::X1) => f.write_str("x1"),
            Expr::Var(Var::X2) => f.write_str("x2"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            // the exponent may carry its own sign: 2^-1
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Err(syntax(start, "unexpected end of input"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(syntax(self.pos, "expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(rest.len());
            let name = &rest[..len];
            self.pos += len;
            return match name {
                "x" => Ok(Expr::Var(Var::X)),
                "x1" => Ok(Expr::Var(Var::X1)),
                "x2" => Ok(Expr::Var(Var::X2)),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                _ => match Func::from_name(name) {
                    Some(func) => {
                        if !self.eat('(') {
                            return Err(syntax(self.pos, format!("expected '(' after {name}")));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(syntax(self.pos, "expected ')'"));
                        }
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { name: name.to_string(), offset: start }),
                },
            };
        }
        Err(syntax(start, format!("unexpected character '{c}'")))
    }

    fn number(&mut self, start: usize) -> Result<Expr> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut n = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            n += digits(&mut i);
        }
        if n == 0 {
            return Err(syntax(start, "malformed number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            // only an exponent if digits follow, so that `2e` stays a product error rather than a number
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) > 0 {
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| syntax(start, format!("malformed number '{text}'")))?;
        self.pos = i;
        Ok(Expr::Num(v))
    }
}

/// Parse an expression.
pub fn parse_expression(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    if p.peek().is_none() {
        return Err(syntax(0, "empty expression"));
    }
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(syntax(p.pos, format!("unexpected '{c}'")));
    }
    Ok(e)
}

fn eval_err(msg: impl Into<String>) -> Error {
    Error::Evaluation(msg.into())
}

impl Expr {
    /// Evaluate at a point; `x` and `x1` read the first coordinate, `x2` the second.
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X | Var::X1) => *p.first().ok_or_else(|| eval_err("point has no coordinates"))?,
            Expr::Var(Var::X2) => *p.get(1).ok_or_else(|| eval_err("x2 used on a 1-D point"))?,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(p)?, b.eval(p)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(func, a) => {
                let a = a.eval(p)?;
                match func {
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(eval_err(format!("log of non-positive argument {a}")));
                        }
                        a.ln()
                    }
                }
            }
        })
    }

    /// True if the expression reads the given coordinate (0 for x/x1, 1 for x2).
    pub fn uses_coordinate(&self, d: usize) -> bool {
        match self {
            Expr::Var(Var::X | Var::X1) => d == 0,
            Expr::Var(Var::X2) => d == 1,
            Expr::Num(_) | Expr::Pi | Expr::E => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_coordinate(d),
            Expr::Bin(_, a, b) => a.uses_coordinate(d) || b.uses_coordinate(d),
        }
    }

    /// True if the expression has no variables.
    pub fn is_constant(&self) -> bool {
        !self.uses_coordinate(0) && !self.uses_coordinate(1)
    }

    /// Symbolic derivative with respect to coordinate `d` (0 for x/x1, 1 for x2).
    pub fn derivative(&self, d: usize) -> Expr {
        use Expr::*;
        let bx = Box::new;
        let zero = Num(0.0);
        if !self.uses_coordinate(d) {
            return zero;
        }
        match self {
            Var(_) => Num(1.0),
            Num(_) | Pi | E => zero,
            Neg(a) => Neg(bx(a.derivative(d))),
            Bin(BinOp::Add, a, b) => Bin(BinOp::Add, bx(a.derivative(d)), bx(b.derivative(d))),
            Bin(BinOp::Sub, a, b) => Bin(BinOp::Sub, bx(a.derivative(d)), bx(b.derivative(d))),
            Bin(BinOp::Mul, a, b) => Bin(
                BinOp::Add,
                bx(Bin(BinOp::Mul, bx(a.derivative(d)), b.clone())),
                bx(Bin(BinOp::Mul, a.clone(), bx(b.derivative(d)))),
            ),
            Bin(BinOp::Div, a, b) => Bin(
                BinOp::Div,
                bx(Bin(
                    BinOp::Sub,
                    bx(Bin(BinOp::Mul, bx(a.derivative(d)), b.clone())),
                    bx(Bin(BinOp::Mul, a.clone(), bx(b.derivative(d)))),
                )),
                bx(Bin(BinOp::Pow, b.clone(), bx(Num(2.0)))),
            ),
            Bin(BinOp::Pow, a, b) if !b.uses_coordinate(d) => {
                // b a^(b−1) a′
                let reduced = Bin(BinOp::Sub, b.clone(), bx(Num(1.0)));
                Bin(
                    BinOp::Mul,
                    bx(Bin(BinOp::Mul, b.clone(), bx(Bin(BinOp::Pow, a.clone(), bx(reduced))))),
                    bx(a.derivative(d)),
                )
            }
            Bin(BinOp::Pow, a, b) => {
                // a^b (b′ log a + b a′/a)
                let log_a = Call(Func::Log, a.clone());
                let inner = Bin(
                    BinOp::Add,
                    bx(Bin(BinOp::Mul, bx(b.derivative(d)), bx(log_a))),
                    bx(Bin(BinOp::Div, bx(Bin(BinOp::Mul, b.clone(), bx(a.derivative(d)))), a.clone())),
                );
                Bin(BinOp::Mul, bx(self.clone()), bx(inner))
            }
            Call(func, a) => {
                let outer = match func {
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => Neg(bx(Call(Func::Sin, a.clone()))),
                    Func::Sinh => Call(Func::Cosh, a.clone()),
                    Func::Cosh => Call(Func::Sinh, a.clone()),
                    Func::Log => Bin(BinOp::Div, bx(Num(1.0)), a.clone()),
                };
                Bin(BinOp::Mul, bx(outer), bx(a.derivative(d)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str, p: &[f64]) -> f64 {
        parse_expression(s).unwrap().eval(p).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(ev("2", &[0.3]), 2.0);
        assert_eq!(ev("10*(x - x^2)", &[0.5]), 2.5);
        assert!((ev("sin(pi*x1)", &[0.5, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("2^3^2", &[0.0]), 512.0);
        assert_eq!(ev("-2^2", &[0.0]), -4.0);
        assert_eq!(ev("2^-1", &[0.0]), 0.5);
        assert_eq!(ev("1 - 2 - 3", &[0.0]), -4.0);
        assert_eq!(ev("8 / 4 / 2", &[0.0]), 1.0);
        assert_eq!(ev("2 + 3 * 4", &[0.0]), 14.0);
        assert_eq!(ev("-x*3", &[2.0]), -6.0);
        assert_eq!(ev(" 1.5e1 + .5 ", &[0.0]), 15.5);
        assert_eq!(ev("x2 - x1", &[1.0, 3.0]), 2.0);
        assert!((ev("e", &[0.0]) - std::f64::consts::E).abs() < 1e-16);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_expression("x +").unwrap_err(),
            Error::Syntax { offset: 3, message: "unexpected end of input".into() }
        );
        assert!(
            matches!(parse_expression("1 + foo(x)"), Err(Error::UnknownIdentifier { ref name, offset: 4 }) if name == "foo")
        );
        assert!(matches!(parse_expression("(x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression("x $"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression("   "), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expression("2x"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse_expression("sin x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn log_domain() {
        let e = parse_expression("log(x)").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Evaluation(_))));
        assert!(matches!(e.eval(&[-1.0]), Err(Error::Evaluation(_))));
        assert_eq!(e.eval(&[1.0]).unwrap(), 0.0);
        assert!(parse_expression("x2").unwrap().eval(&[1.0]).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let cases = [
            "x^3 - 2*x + 1",
            "exp(-3*x)*sin(pi*x)",
            "cosh(x)/(1 + x^2)",
            "log(2 + x)*sinh(x)",
            "x^x",
            "-(5/3)*x^3 + (10/12)*x^4 + (14/15)*x",
        ];
        for s in cases {
            let e = parse_expression(s).unwrap();
            let d = e.derivative(0);
            for x in [0.3, 0.7, 1.1] {
                let h = 1e-6;
                let fd = (e.eval(&[x + h]).unwrap() - e.eval(&[x - h]).unwrap()) / (2.0 * h);
                assert!((d.eval(&[x]).unwrap() - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{s} at {x}");
            }
        }
        let e = parse_expression("sin(pi*x1)*sinh(pi*(1 - x2))").unwrap();
        let (p, h) = ([0.3, 0.6], 1e-6);
        let fd = (e.eval(&[p[0], p[1] + h]).unwrap() - e.eval(&[p[0], p[1] - h]).unwrap()) / (2.0 * h);
        assert!((e.derivative(1).eval(&p).unwrap() - fd).abs() < 1e-6);
        assert!(e.derivative(1).derivative(1).uses_coordinate(1));
        assert!(parse_expression("3*pi").unwrap().is_constant());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            Just(Expr::Var(Var::X)),
            Just(Expr::Var(Var::X1)),
            Just(Expr::Var(Var::X2)),
            Just(Expr::Pi),
            Just(Expr::E),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let op =
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
            let func = prop_oneof![
                Just(Func::Exp),
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Sinh),
                Just(Func::Cosh),
                Just(Func::Log)
            ];
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
                (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse_expression(&printed).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(parse_expression(&back.to_string()).unwrap(), back);
        }
    }
}
