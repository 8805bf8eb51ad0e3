use std::fmt;

use super::jet::Jet;
use super::TaylorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree in the single variable `t`.
///
/// `log` and `sqrt` are valid where their argument is positive and `/` where
/// the denominator is nonzero; evaluation outside reports a domain error.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Replace every occurrence of `t` by `by`.
    pub fn substitute(&self, by: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(by));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => by.clone(),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Pow(a, e) => Expr::Pow(s(a), *e),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Call(f, a) => Expr::Call(*f, s(a)),
        }
    }

    /// Point value.
    pub fn eval(&self, t: f64) -> Result<f64, TaylorError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Add(a, b) => a.eval(t)? + b.eval(t)?,
            Expr::Sub(a, b) => a.eval(t)? - b.eval(t)?,
            Expr::Mul(a, b) => a.eval(t)? * b.eval(t)?,
            Expr::Div(a, b) => {
                let d = b.eval(t)?;
                if d == 0.0 {
                    return Err(TaylorError::Domain { op: "division", t });
                }
                a.eval(t)? / d
            }
            Expr::Pow(a, e) => {
                let x = a.eval(t)?;
                if x == 0.0 && *e < 0 {
                    return Err(TaylorError::Domain { op: "negative power", t });
                }
                x.powi(*e)
            }
            Expr::Neg(a) => -a.eval(t)?,
            Expr::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Log if x > 0.0 => x.ln(),
                    Func::Sqrt if x > 0.0 => x.sqrt(),
                    Func::Log => return Err(TaylorError::Domain { op: "log", t }),
                    Func::Sqrt => return Err(TaylorError::Domain { op: "sqrt", t }),
                }
            }
        })
    }

    /// Jet of order `k` at `t`, node by node.
    pub fn jet(&self, t: f64, k: usize) -> Result<Jet, TaylorError> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(t, *c, k),
            Expr::Var => Jet::variable(t, t, k),
            Expr::Add(a, b) => &a.jet(t, k)? + &b.jet(t, k)?,
            Expr::Sub(a, b) => &a.jet(t, k)? - &b.jet(t, k)?,
            Expr::Mul(a, b) => &a.jet(t, k)? * &b.jet(t, k)?,
            Expr::Div(a, b) => {
                let d = b.jet(t, k)?.recip().ok_or(TaylorError::Domain { op: "division", t })?;
                &a.jet(t, k)? * &d
            }
            Expr::Pow(a, e) => a
                .jet(t, k)?
                .powi(*e)
                .ok_or(TaylorError::Domain { op: "negative power", t })?,
            Expr::Neg(a) => -&a.jet(t, k)?,
            Expr::Call(f, a) => {
                let x = a.jet(t, k)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin_cos().0,
                    Func::Cos => x.sin_cos().1,
                    Func::Log => x.ln().ok_or(TaylorError::Domain { op: "log", t })?,
                    Func::Sqrt => x.sqrt().ok_or(TaylorError::Domain { op: "sqrt", t })?,
                }
            }
        })
    }
}

fn fmt_num(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let a = c.abs();
    let body = if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{a:e}")
    } else {
        format!("{a}")
    };
    if c.is_sign_negative() && c != 0.0 {
        write!(f, "(-{body})")
    } else {
        f.write_str(&body)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_num(*c, f),
            Expr::Var => f.write_str("t"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, e) if *e < 0 => write!(f, "({a}^(-{}))", e.unsigned_abs()),
            Expr::Pow(a, e) => write!(f, "({a}^{e})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
