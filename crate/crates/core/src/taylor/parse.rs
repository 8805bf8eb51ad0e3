//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := unary (('*'|'/') unary)*
//! unary    := '-' unary | factor
//! factor   := base ('^' exponent)?
//! exponent := integer | '-' integer | '(' '-'? integer ')'
//! base     := number | 't' | func '(' expr ')' | '(' expr ')'
//! func     := exp | log | sin | cos | sqrt
//! ```

use super::expr::{Expr, Func};
use super::TaylorError;

pub fn parse(text: &str) -> Result<Expr, TaylorError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TaylorError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn syntax(&self, message: &str) -> TaylorError {
        TaylorError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn expr(&mut self) -> Result<Expr, TaylorError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, TaylorError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, TaylorError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, TaylorError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, TaylorError> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let n = self.integer()?;
            self.expect(b')')?;
            return Ok(if neg { -n } else { n });
        }
        let neg = self.eat(b'-');
        let n = self.integer()?;
        Ok(if neg { -n } else { n })
    }

    fn integer(&mut self) -> Result<i32, TaylorError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer exponent"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        s.parse().map_err(|_| TaylorError::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })
    }

    fn number(&mut self) -> Result<Expr, TaylorError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let int = digits(self);
        let mut frac = false;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = digits(self);
        }
        if !int && !frac {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        s.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| TaylorError::Syntax { offset: start, message: "malformed number".into() })
    }

    fn base(&mut self) -> Result<Expr, TaylorError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
                if name == "t" {
                    return Ok(Expr::Var);
                }
                match Func::from_name(name) {
                    Some(f) => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(TaylorError::UnknownIdentifier { name: name.to_string(), offset: start }),
                }
            }
            Some(c) => Err(self.syntax(&format!("unexpected character '{}'", c as char))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Box<Expr> {
        Box::new(Expr::Const(x))
    }

    #[test]
    fn examples() {
        assert_eq!(
            parse("sin(t)+1").unwrap(),
            Expr::Add(Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var))), c(1.0))
        );
        assert_eq!(
            parse("0.5/(1+t)").unwrap(),
            Expr::Div(c(0.5), Box::new(Expr::Add(c(1.0), Box::new(Expr::Var))))
        );
        match parse("t+") {
            Err(TaylorError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), -4.0);
        let e = parse("8/4/2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        let e = parse("-t^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0);
        let e = parse("2*t^-1 + t^(-2)").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 1.25);
        let e = parse("1.5e2 * .5").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 75.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("foo(t)"),
            Err(TaylorError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(parse("t^1.5"), Err(TaylorError::Syntax { .. })));
        assert!(matches!(parse("(t"), Err(TaylorError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t t"), Err(TaylorError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn display_round_trips() {
        for src in ["sin(t)+1", "0.5/(1+t)", "-t^2*exp(-t)", "t^(-3)", "1e-9*t - 2.5e20", "sqrt(log(2+t^2))"] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }
}
