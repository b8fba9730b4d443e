use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use super::{Atom, Coeff, Expr, FunctionDecl};
use crate::error::Result;

/// Unevaluated expression tree, as produced by the parser before
/// canonicalization.
#[derive(Clone, Debug)]
pub enum Node {
    Num(Coeff),
    Sym(Arc<str>),
    Apply {
        func: Arc<FunctionDecl>,
        slots: Vec<u8>,
        args: Vec<Node>,
    },
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
}

impl Node {
    pub fn canonicalize(&self) -> Result<Expr> {
        Ok(match self {
            Node::Num(c) => Expr::constant(c.clone()),
            Node::Sym(s) => Expr::atom(Atom::Sym(s.clone())),
            Node::Apply { func, slots, args } => {
                let args = args
                    .iter()
                    .map(Node::canonicalize)
                    .collect::<Result<Vec<_>>>()?;
                Expr::atom(Atom::apply(func, slots.clone(), args)?)
            }
            Node::Neg(a) => -a.canonicalize()?,
            Node::Add(a, b) => a.canonicalize()? + b.canonicalize()?,
            Node::Sub(a, b) => a.canonicalize()? - b.canonicalize()?,
            Node::Mul(a, b) => a.canonicalize()? * b.canonicalize()?,
            Node::Div(a, b) => a.canonicalize()?.checked_div(&b.canonicalize()?)?,
            Node::Pow(a, e) => a.canonicalize()?.pow(*e)?,
        })
    }

    /// Direct evaluation of the tree, without canonicalization. `app` gives
    /// values of opaque applications from their label and argument values.
    /// `None` on division by zero.
    pub fn eval(
        &self,
        sym: &dyn Fn(&str) -> Coeff,
        app: &dyn Fn(&str, &[Coeff]) -> Coeff,
    ) -> Option<Coeff> {
        Some(match self {
            Node::Num(c) => c.clone(),
            Node::Sym(s) => sym(s),
            Node::Apply { func, slots, args } => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(sym, app))
                    .collect::<Option<Vec<_>>>()?;
                let label = if slots.is_empty() {
                    func.name().to_string()
                } else {
                    let digits: String = slots.iter().map(|s| char::from(b'0' + s)).collect();
                    format!("{}_d{}", func.name(), digits)
                };
                app(&label, &vals)
            }
            Node::Neg(a) => -a.eval(sym, app)?,
            Node::Add(a, b) => a.eval(sym, app)? + b.eval(sym, app)?,
            Node::Sub(a, b) => a.eval(sym, app)? - b.eval(sym, app)?,
            Node::Mul(a, b) => a.eval(sym, app)? * b.eval(sym, app)?,
            Node::Div(a, b) => {
                let d = b.eval(sym, app)?;
                if d.is_zero() {
                    return None;
                }
                a.eval(sym, app)? / d
            }
            Node::Pow(a, e) => {
                let v = a.eval(sym, app)?;
                if *e < 0 {
                    if v.is_zero() {
                        return None;
                    }
                    num::pow::pow(v.recip(), e.unsigned_abs() as usize)
                } else if *e == 0 {
                    Coeff::one()
                } else {
                    num::pow::pow(v, *e as usize)
                }
            }
        })
    }
}

/// Fully parenthesized source form.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "({}/{})", c.numer(), c.denom())
                }
            }
            Node::Sym(s) => f.write_str(s),
            Node::Apply { func, slots, args } => {
                f.write_str(func.name())?;
                if !slots.is_empty() {
                    f.write_str("_d")?;
                    for s in slots {
                        write!(f, "{s}")?;
                    }
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, e) => write!(f, "({a})^{e}"),
        }
    }
}
