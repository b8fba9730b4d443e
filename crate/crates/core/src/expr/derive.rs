//! Derivations and substitution.
//!
//! A derivation is fixed by its values on symbols; opaque applications are
//! handled by the chain rule, using either the function's declared rules or
//! fresh formal-derivative atoms. Partial derivatives and total derivatives
//! are both instances.

use std::collections::HashMap;
use std::sync::Arc;

use num::One;

use super::poly::{Coeff, Monomial, Poly};
use super::{placeholder, Atom, Expr, FunctionDecl};

/// Linear map satisfying the Leibniz rule, given by its action on symbols.
pub struct Derivation<'a> {
    on_symbol: &'a dyn Fn(&str) -> Option<Expr>,
}

impl<'a> Derivation<'a> {
    pub fn new(on_symbol: &'a dyn Fn(&str) -> Option<Expr>) -> Self {
        Derivation { on_symbol }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let mut cache = HashMap::new();
        let dn = self.apply_poly(e.numer(), &mut cache);
        if e.denom().is_one() {
            return dn;
        }
        let dd = self.apply_poly(e.denom(), &mut cache);
        let n = Expr::from_poly(e.numer().clone());
        let d = Expr::from_poly(e.denom().clone());
        let top = &(&dn * &d) - &(&n * &dd);
        top.checked_div(&(&d * &d))
            .expect("denominator of a canonical expression is nonzero")
    }

    fn apply_poly(&self, p: &Poly, cache: &mut HashMap<Atom, Expr>) -> Expr {
        let mut acc = Expr::zero();
        for a in p.atoms() {
            let da = match cache.get(&a) {
                Some(d) => d.clone(),
                None => {
                    let d = self.apply_atom(&a);
                    cache.insert(a.clone(), d.clone());
                    d
                }
            };
            if da.is_zero() {
                continue;
            }
            let partial = Expr::from_poly(p.partial(&a));
            acc = &acc + &(&partial * &da);
        }
        acc
    }

    fn apply_atom(&self, a: &Atom) -> Expr {
        match a {
            Atom::Sym(s) => (self.on_symbol)(s).unwrap_or_else(Expr::zero),
            Atom::App(app) => {
                let mut acc = Expr::zero();
                for (k, arg) in app.args().iter().enumerate() {
                    let darg = self.apply(arg);
                    if darg.is_zero() {
                        continue;
                    }
                    let outer = slot_derivative(a, k);
                    acc = &acc + &(&outer * &darg);
                }
                acc
            }
        }
    }
}

/// Partial derivative of an opaque application with respect to argument `k`
/// (0-based).
fn slot_derivative(a: &Atom, k: usize) -> Expr {
    let app = a.as_application().expect("application");
    let func = app.func();
    match func.rules() {
        Some(rules) => {
            let mut bindings = HashMap::new();
            for (j, arg) in app.args().iter().enumerate() {
                bindings.insert(placeholder(j + 1), arg.clone());
            }
            substitute_with(&rules[k], &bindings, Some(func))
        }
        None => {
            let mut slots = app.slots().to_vec();
            slots.push(k as u8 + 1);
            Expr::atom(
                Atom::apply(func, slots, app.args().to_vec()).expect("arity preserved"),
            )
        }
    }
}

/// Exact partial derivative with respect to the symbol `v`.
pub fn diff_partial(e: &Expr, v: &str) -> Expr {
    let one = |s: &str| if s == v { Some(Expr::one()) } else { None };
    Derivation::new(&one).apply(e)
}

/// Simultaneous substitution of symbols (including inside function
/// arguments), followed by canonicalization.
pub fn substitute(e: &Expr, bindings: &HashMap<String, Expr>) -> Expr {
    substitute_with(e, bindings, None)
}

pub(crate) fn substitute_with(
    e: &Expr,
    bindings: &HashMap<String, Expr>,
    rebind: Option<&Arc<FunctionDecl>>,
) -> Expr {
    let mut image = |a: &Atom| -> Option<Expr> {
        match a {
            Atom::Sym(s) => bindings.get(&**s).cloned(),
            Atom::App(app) => {
                let new_args: Vec<Expr> = app
                    .args()
                    .iter()
                    .map(|x| substitute_with(x, bindings, rebind))
                    .collect();
                let func = match rebind {
                    Some(f) if f.name() == app.func().name() => f,
                    _ => app.func(),
                };
                let same_func = Arc::ptr_eq(func, app.func());
                if same_func && new_args.as_slice() == app.args() {
                    None
                } else {
                    Some(Expr::atom(
                        Atom::apply(func, app.slots().to_vec(), new_args).expect("arity preserved"),
                    ))
                }
            }
        }
    };
    map_atoms(e, &mut image)
}

/// Replaces atoms by expressions (`None` keeps the atom). The result is put
/// over a single common denominator before the one final reduction.
pub(crate) fn map_atoms(e: &Expr, image: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Expr {
    let mut images: HashMap<Atom, Option<Expr>> = HashMap::new();
    for a in e.atoms() {
        let im = image(&a);
        images.insert(a, im);
    }
    if images.values().all(Option::is_none) {
        return e.clone();
    }
    let (n1, d1) = map_poly(e.numer(), &images);
    if e.denom().is_one() {
        return Expr::from_parts(n1, d1).expect("nonzero denominator");
    }
    let (n2, d2) = map_poly(e.denom(), &images);
    let num = Expr::from_parts(n1, d1).expect("nonzero denominator");
    let den = Expr::from_parts(n2, d2).expect("nonzero denominator");
    num.checked_div(&den)
        .expect("substitution made a denominator vanish")
}

fn map_poly(p: &Poly, images: &HashMap<Atom, Option<Expr>>) -> (Poly, Poly) {
    // Largest exponent of each rationally-valued atom sets the common denominator.
    let mut max_exp: HashMap<&Atom, u32> = HashMap::new();
    for (m, _) in p.terms() {
        for (a, e) in m.factors() {
            if let Some(Some(v)) = images.get(a) {
                if !v.is_polynomial() {
                    let entry = max_exp.entry(a).or_insert(0);
                    *entry = (*entry).max(*e);
                }
            }
        }
    }
    let mut common = Poly::one();
    for (a, k) in &max_exp {
        let v = images[*a].as_ref().expect("image");
        common = common.mul(&v.denom().pow(*k));
    }
    let mut powers: HashMap<(Atom, u32), Poly> = HashMap::new();
    let mut pow_of = |poly: &Poly, a: &Atom, e: u32, tag: u32| -> Poly {
        // tag distinguishes numerator powers (0) from denominator powers (1)
        let key = (a.clone(), e * 2 + tag);
        powers.entry(key).or_insert_with(|| poly.pow(e)).clone()
    };
    let mut terms: Vec<Poly> = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let mut kept = Monomial::one();
        let mut t = Poly::constant(c.clone());
        let mut seen: Vec<&Atom> = Vec::new();
        for (a, e) in m.factors() {
            match images.get(a) {
                Some(Some(v)) => {
                    t = t.mul(&pow_of(v.numer(), a, *e, 0));
                    if let Some(k) = max_exp.get(a) {
                        seen.push(a);
                        if k > e {
                            t = t.mul(&pow_of(v.denom(), a, k - e, 1));
                        }
                    }
                }
                _ => kept = kept.mul(&Monomial::atom(a.clone(), *e)),
            }
        }
        for (a, k) in &max_exp {
            if !seen.iter().any(|s| s == a) {
                let v = images[*a].as_ref().expect("image");
                t = t.mul(&pow_of(v.denom(), a, *k, 1));
            }
        }
        terms.push(t.mul_term(&kept, &Coeff::one()));
    }
    let num = sum_polys(terms);
    (num, common)
}

/// Balanced pairwise summation keeps merges cheap.
fn sum_polys(mut v: Vec<Poly>) -> Poly {
    if v.is_empty() {
        return Poly::zero();
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.add(&b)),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().expect("nonempty")
}
