//! Call expressions such as `annulus(0.0, 0.0, sqrt(0.1), 0.45)` used in
//! config values.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// A literal written with digits only; kept exact beyond 2^53.
    Int(u64),
    Call { name: String, args: Vec<Expr> },
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ExprError(pub String);

impl Expr {
    /// Numeric value, folding the arithmetic helpers `sqrt(x)` and `neg(x)`.
    pub fn number(&self) -> Result<f64, ExprError> {
        match self {
            Expr::Num(x) => Ok(*x),
            Expr::Int(i) => Ok(*i as f64),
            Expr::Call { name, args } if args.len() == 1 && name == "sqrt" => Ok(args[0].number()?.sqrt()),
            Expr::Call { name, .. } => Err(ExprError(format!("expected a number, found `{name}(...)`"))),
        }
    }

    /// Name and arguments of a call.
    pub fn call(&self) -> Result<(&str, &[Expr]), ExprError> {
        match self {
            Expr::Call { name, args } => Ok((name, args)),
            Expr::Num(x) => Err(ExprError(format!("expected name(args), found number {x}"))),
            Expr::Int(i) => Err(ExprError(format!("expected name(args), found number {i}"))),
        }
    }

    /// Exact non-negative integer value.
    pub fn integer(&self) -> Result<u64, ExprError> {
        match self {
            Expr::Int(i) => Ok(*i),
            Expr::Num(x) if *x >= 0.0 && x.fract() == 0.0 && *x < 9007199254740992.0 => Ok(*x as u64),
            other => Err(ExprError(format!("expected a non-negative integer, found `{other}`"))),
        }
    }

    /// All arguments as numbers, checking the count.
    pub fn numbers(args: &[Expr], name: &str, counts: &[usize]) -> Result<Vec<f64>, ExprError> {
        if !counts.contains(&args.len()) {
            let want = counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" or ");
            return Err(ExprError(format!("{name} takes {want} arguments, got {}", args.len())));
        }
        args.iter().map(Expr::number).collect()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError(format!("expected `{}` at offset {}", c as char, self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            if c.is_ascii_alphanumeric() || matches!(c, b'.' | b'_' | b'-' | b'+') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default();
        if token.is_empty() {
            return Err(ExprError(format!("expected a value at offset {start}")));
        }
        if self.peek() == Some(b'(') {
            if !token.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                return Err(ExprError(format!("bad function name `{token}`")));
            }
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() != Some(b')') {
                loop {
                    args.push(self.expr()?);
                    if self.peek() == Some(b',') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(b')')?;
            Ok(Expr::Call {
                name: token.to_string(),
                args,
            })
        } else if token.bytes().all(|c| c.is_ascii_digit()) {
            match token.parse::<u64>() {
                Ok(i) => Ok(Expr::Int(i)),
                // too long for u64: fall back to a float
                Err(_) => token.parse::<f64>().map(Expr::Num).map_err(|_| ExprError(format!("bad number `{token}`"))),
            }
        } else {
            token
                .parse::<f64>()
                .map(Expr::Num)
                .map_err(|_| ExprError(format!("bad number `{token}`")))
        }
    }
}

/// Parses a comma-separated list of expressions; the empty string gives an
/// empty list.
pub fn parse_list(s: &str) -> Result<Vec<Expr>, ExprError> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    if p.peek().is_none() {
        return Ok(out);
    }
    loop {
        out.push(p.expr()?);
        match p.peek() {
            Some(b',') => p.pos += 1,
            None => return Ok(out),
            Some(c) => return Err(ExprError(format!("unexpected `{}` at offset {}", c as char, p.pos))),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, ExprError> {
    let mut v = parse_list(s)?;
    if v.len() != 1 {
        return Err(ExprError(format!("expected one value, found {}", v.len())));
    }
    Ok(v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_calls() {
        let e = parse_expr("difference(annulus(0, 0, 0.45, 0.675), triangle(0,0, 0.9,0.45, 0.9,-0.45))").unwrap();
        let (name, args) = e.call().unwrap();
        assert_eq!(name, "difference");
        assert_eq!(args.len(), 2);
        assert_eq!(args[1].call().unwrap().1[5], Expr::Num(-0.45));
    }

    #[test]
    fn lists_and_numbers() {
        let l = parse_list("linear(1), linear(2.0, -1e-3)").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(parse_list("  ").unwrap(), vec![]);
        assert_eq!(parse_expr("sqrt(0.25)").unwrap().number().unwrap(), 0.5);
        assert!(parse_list("a(1,").is_err());
        assert!(parse_list("1 2").is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = parse_expr("f(0.1, g(), 3)").unwrap();
        assert_eq!(e.to_string(), "f(0.1, g(), 3)");
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn long_integers_stay_exact() {
        let e = parse_expr("18446744073709551615").unwrap();
        assert_eq!(e.integer().unwrap(), u64::MAX);
        assert_eq!(e.to_string(), "18446744073709551615");
        assert!(parse_expr("1.5").unwrap().integer().is_err());
        assert_eq!(parse_expr("3").unwrap().number().unwrap(), 3.0);
    }
}
