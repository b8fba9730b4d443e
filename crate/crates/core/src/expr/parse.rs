//! Recursive-descent parser for the ASCII expression grammar:
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | pow
//! pow   := atom ('^' integer)?
//! atom  := rational | identifier | identifier '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers may carry jet suffixes: primes (`q'`, `q''`) or a bracketed
//! multi-index (`u[1,0]`). Spellings are resolved through the [`Context`].

use num::BigInt;

use super::{Context, Expr, Node};
use crate::error::{Error, Result};

pub fn parse(text: &str, ctx: &Context) -> Result<Expr> {
    parse_node(text, ctx)?.canonicalize()
}

pub fn parse_node(text: &str, ctx: &Context) -> Result<Node> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ctx,
    };
    let node = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(node)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Context,
}

impl Parser<'_> {
    fn error(&self, message: String) -> Error {
        Error::Syntax {
            offset: self.pos,
            message,
        }
    }

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

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Node::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Node::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.pow()
    }

    fn pow(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected integer exponent".into()));
            }
            let e: i32 = digits.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: "exponent too large".into(),
            })?;
            return Ok(Node::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits();
                let n: BigInt = d.parse().expect("digit string");
                Ok(Node::Num(n.into()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        if self.peek() == Some(b'(') {
            return self.application(name, start);
        }
        // Jet suffixes attach directly to the identifier.
        let mut spelling = name;
        if self.src.get(self.pos) == Some(&b'\'') {
            while self.src.get(self.pos) == Some(&b'\'') {
                spelling.push('\'');
                self.pos += 1;
            }
        } else if self.src.get(self.pos) == Some(&b'[') {
            self.pos += 1;
            let mut idx = Vec::new();
            loop {
                self.skip_ws();
                let d = self.digits();
                if d.is_empty() {
                    return Err(self.error("expected derivative count".into()));
                }
                idx.push(d.parse::<u32>().map_err(|_| self.error("index too large".into()))?);
                if self.eat(b',') {
                    continue;
                }
                if self.eat(b']') {
                    break;
                }
                return Err(self.error("expected `,` or `]`".into()));
            }
            let parts: Vec<String> = idx.iter().map(u32::to_string).collect();
            spelling = format!("{spelling}[{}]", parts.join(","));
        }
        match self.ctx.resolve_symbol(&spelling) {
            Some(s) => Ok(Node::Sym(s)),
            None => Err(Error::Undeclared {
                name: spelling,
                offset: start,
            }),
        }
    }

    fn application(&mut self, name: String, start: usize) -> Result<Node> {
        let Some((func, slots)) = self.ctx.resolve_function(&name) else {
            return Err(Error::Undeclared {
                name,
                offset: start,
            });
        };
        self.eat(b'(');
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.error("expected `)` or `,`".into()));
        }
        if args.len() != func.arity() {
            return Err(Error::Arity {
                name,
                expected: func.arity(),
                found: args.len(),
            });
        }
        Ok(Node::Apply { func, slots, args })
    }
}
