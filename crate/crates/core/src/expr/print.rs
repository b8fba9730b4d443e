use num::{One, Signed};

use super::poly::{Coeff, Monomial, Poly};
use super::{Atom, Expr};

pub fn print(e: &Expr) -> String {
    let num = print_poly(e.numer());
    let den = e.denom();
    if den.is_one() {
        return num;
    }
    let num = if e.numer().len() > 1 {
        format!("({num})")
    } else {
        num
    };
    let simple_den = den.len() == 1 && den.terms()[0].1.is_one() && den.terms()[0].0.factors().len() == 1;
    if simple_den {
        format!("{num}/{}", print_poly(den))
    } else {
        format!("{num}/({})", print_poly(den))
    }
}

pub fn print_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().enumerate() {
        if i == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&print_term(m, &c.abs()));
    }
    out
}

fn print_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn print_term(m: &Monomial, c: &Coeff) -> String {
    if m.is_one() {
        return print_coeff(c);
    }
    let mono = m
        .factors()
        .iter()
        .map(|(a, e)| {
            if *e == 1 {
                print_atom(a)
            } else {
                format!("{}^{e}", print_atom(a))
            }
        })
        .collect::<Vec<_>>()
        .join("*");
    if c.is_one() {
        mono
    } else {
        format!("{}*{mono}", print_coeff(c))
    }
}

pub fn print_atom(a: &Atom) -> String {
    match a {
        Atom::Sym(s) => s.to_string(),
        Atom::App(app) => {
            let args: Vec<String> = app.args().iter().map(print).collect();
            format!("{}({})", app.label(), args.join(", "))
        }
    }
}
