//! A small expression language for scalar fields on the slit tangent bundle.
//!
//! Grammar: `+ - * / ^`, parentheses, `sqrt exp log sin cos abs`, variables
//! `x1..xn`, `y1..yn` and real literals. `^` is right-associative and binds
//! tighter than unary minus, so `-y1^2` is `-(y1^2)`.

use std::fmt;

use crate::error::{FinslerError, Result};
use crate::jets::{Jet, Real, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Position coordinate, zero-based.
    X(usize),
    /// Fiber coordinate, zero-based.
    Y(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src` for a manifold of dimension `n`.
    pub fn parse(src: &str, n: usize) -> Result<Self> {
        let mut p = Parser { src, chars: src.char_indices().collect(), pos: 0, n };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn references_fiber(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Y(_)))
    }

    pub fn references_position(&self) -> bool {
        self.any(&|e| matches!(e, Expr::X(_)))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::X(_) | Expr::Y(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.any(pred),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.any(pred) || b.any(pred)
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        if self.any(&|e| matches!(e, Expr::X(_) | Expr::Y(_))) {
            None
        } else {
            Some(self.eval::<f64>(&[0.0]))
        }
    }

    /// Evaluates with `vars = (x¹..xⁿ, y¹..yⁿ)`; `vars` must be non-empty.
    pub fn eval<R: Real>(&self, vars: &[R]) -> R {
        let n = vars.len() / 2;
        match self {
            Expr::Num(c) => vars[0].constant_like(*c),
            Expr::X(i) => vars[*i].clone(),
            Expr::Y(i) => vars[n + *i].clone(),
            Expr::Neg(a) => a.eval(vars).rneg(),
            Expr::Add(a, b) => a.eval(vars).radd(&b.eval(vars)),
            Expr::Sub(a, b) => a.eval(vars).rsub(&b.eval(vars)),
            Expr::Mul(a, b) => a.eval(vars).rmul(&b.eval(vars)),
            Expr::Div(a, b) => a.eval(vars).rdiv(&b.eval(vars)),
            Expr::Pow(a, b) => match b.constant_value() {
                Some(p) => a.eval(vars).powf(p),
                None => b.eval(vars).rmul(&a.eval(vars).ln()).exp(),
            },
            Expr::Call(f, a) => {
                let v = a.eval(vars);
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FinslerError {
        FinslerError::Parse { column: self.pos + 1, message: format!("{message} in `{}`", self.src) }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| FinslerError::Parse {
                column: start + 1,
                message: format!("malformed number `{text}` in `{}`", self.src),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        if let Some(func) = Func::from_name(&name) {
            if !self.eat('(') {
                return Err(self.error("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let (kind, digits) = name.split_at(1);
        let index: usize = digits.parse().map_err(|_| FinslerError::Parse {
            column: start + 1,
            message: format!("unknown identifier `{name}` in `{}`", self.src),
        })?;
        if index == 0 || index > self.n {
            return Err(FinslerError::Parse {
                column: start + 1,
                message: format!("variable `{name}` out of range for dimension {}", self.n),
            });
        }
        match kind {
            "x" => Ok(Expr::X(index - 1)),
            "y" => Ok(Expr::Y(index - 1)),
            _ => Err(FinslerError::Parse {
                column: start + 1,
                message: format!("unknown identifier `{name}` in `{}`", self.src),
            }),
        }
    }
}

/// An expression viewed as a scalar field on a manifold of dimension `n`.
#[derive(Debug, Clone)]
pub struct ExprField {
    pub expr: Expr,
    pub n: usize,
}

impl ExprField {
    pub fn parse(src: &str, n: usize) -> Result<Self> {
        Ok(Self { expr: Expr::parse(src, n)?, n })
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_f64(&self, vars: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(vars))
    }

    fn eval_jet(&self, vars: &[Jet]) -> Result<Jet> {
        Ok(self.expr.eval(vars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, vars: &[f64]) -> f64 {
        Expr::parse(src, vars.len() / 2).unwrap().eval(vars)
    }

    #[test]
    fn precedence_and_associativity() {
        let v = [2.0, 3.0, 0.5, 4.0];
        assert_eq!(eval("x1 + x2 * y2", &v), 14.0);
        assert_eq!(eval("-y2^2", &v), -16.0);
        assert!((eval("x1^x2^1", &v) - 8.0).abs() < 1e-12);
        assert_eq!(eval("2^3^2", &v), 512.0);
        assert_eq!(eval("(x1 + x2) / y1", &v), 10.0);
        assert_eq!(eval("x2 - x1 - 1", &v), 0.0);
    }

    #[test]
    fn functions_and_literals() {
        let v = [0.0, 1.0, 1.0, 2.0];
        assert!((eval("exp(x1) + sqrt(y2 * 2) + log(x2)", &v) - 3.0).abs() < 1e-15);
        assert!((eval("sin(0) + cos(0) + abs(-2.5e-1)", &v) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn quartic_norm() {
        let v = [0.0, 0.0, 1.0, 1.0];
        assert!((eval("(y1^4+y2^4)^(1/4)", &v) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["y1 +", "(y1", "y3", "z1", "foo(y1)", "y1 y2", "sqrt y1", "x0"] {
            assert!(
                matches!(Expr::parse(bad, 2), Err(FinslerError::Parse { .. })),
                "{bad} should fail"
            );
        }
    }

    #[test]
    fn fiber_detection() {
        assert!(Expr::parse("x1 + y2", 2).unwrap().references_fiber());
        assert!(!Expr::parse("0.1*x1 + 0.05*x2", 2).unwrap().references_fiber());
    }
}
