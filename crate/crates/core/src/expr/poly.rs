//! Sparse multivariate polynomials over the rationals, with atoms as variables.
//!
//! Terms are kept sorted in descending lexicographic order, where the atom
//! order (ascending) gives variable priority. Lex is a monomial order, so
//! multiplying by a single term preserves sortedness.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num::{BigRational, One, Signed, Zero};

use super::Atom;

pub type Coeff = BigRational;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(pub(crate) Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(b, _)| b == a)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && &other.0[j].0 == a {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((a.clone(), e - f));
                }
                j += 1;
            } else {
                if j < other.0.len() && other.0[j].0 < *a {
                    return None;
                }
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1.min(b[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }

    /// Removes `a` entirely, returning its exponent and the remaining monomial.
    pub fn split_off(&self, a: &Atom) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(b, f)| {
                if b == a {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((xa, ea)), Some((xb, eb))) => match xa.cmp(xb) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => i += 1,
                        o => return o,
                    },
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                },
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly(pub(crate) Vec<(Monomial, Coeff)>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![(Monomial::one(), c)])
        }
    }

    pub fn atom(a: Atom) -> Self {
        Poly(vec![(Monomial::atom(a, 1), Coeff::one())])
    }

    pub fn term(m: Monomial, c: Coeff) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![(m, c)])
        }
    }

    /// Builds from unsorted terms, combining duplicates.
    pub fn from_terms(mut terms: Vec<(Monomial, Coeff)>) -> Self {
        terms.sort_by(|x, y| y.0.cmp(&x.0));
        let mut out: Vec<(Monomial, Coeff)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some((lm, lc)) = out.last_mut() {
                if *lm == m {
                    *lc += c;
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly(out)
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty() || (self.0.len() == 1 && self.0[0].0.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].0.is_one() && self.0[0].1.is_one()
    }

    pub fn constant_value(&self) -> Option<Coeff> {
        match self.0.as_slice() {
            [] => Some(Coeff::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn lead(&self) -> Option<&(Monomial, Coeff)> {
        self.0.first()
    }

    pub fn lead_coeff(&self) -> Coeff {
        self.0.first().map(|t| t.1.clone()).unwrap_or_else(Coeff::zero)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.0 {
            for (a, _) in &m.0 {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.0.iter().map(|(m, _)| m.degree_in(a)).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Coeff) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        if k.is_one() {
            return self.clone();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_term(&self, m: &Monomial, k: &Coeff) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(n, c)| (n.mul(m), c * k)).collect())
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.0.first() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, true)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.len() == 1 {
            return self.mul_term(&other.0[0].0, &other.0[0].1);
        }
        if self.len() == 1 {
            return other.mul_term(&self.0[0].0, &self.0[0].1);
        }
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut terms = Vec::with_capacity(small.len() * big.len());
        for (m, c) in &small.0 {
            for (n, d) in &big.0 {
                terms.push((m.mul(n), c * d));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if d.is_one() {
            return Some(self.clone());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        if d.len() == 1 {
            let (dm, dc) = &d.0[0];
            let inv = dc.recip();
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.0 {
                out.push((m.div(dm)?, c * &inv));
            }
            return Some(Poly(out));
        }
        let (dm, dc) = &d.0[0];
        let inv = dc.recip();
        let mut r = self.clone();
        let mut q = Vec::new();
        while let Some((lm, lc)) = r.0.first() {
            let m = lm.div(dm)?;
            let c = lc * &inv;
            r = r.sub(&d.mul_term(&m, &c));
            q.push((m, c));
        }
        Some(Poly(q))
    }

    /// Divides every monomial by `m` (which must divide all of them).
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        Poly(
            self.0
                .iter()
                .map(|(n, c)| (n.div(m).expect("monomial divides"), c.clone()))
                .collect(),
        )
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.0.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Dense coefficient list in `a` (index = degree), coefficients free of `a`.
    pub fn coefficients_in(&self, a: &Atom) -> Vec<Poly> {
        let deg = self.degree_in(a) as usize;
        let mut buckets: Vec<Vec<(Monomial, Coeff)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.0 {
            let (e, rest) = m.split_off(a);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coefficients(a: &Atom, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (e, c) in coeffs.iter().enumerate() {
            let m = Monomial::atom(a.clone(), e as u32);
            for (n, k) in &c.0 {
                terms.push((n.mul(&m), k.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    /// Partial derivative treating `a` as an independent variable.
    pub fn partial(&self, a: &Atom) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.0 {
            let e = m.degree_in(a);
            if e == 0 {
                continue;
            }
            let (_, rest) = m.split_off(a);
            let m2 = rest.mul(&Monomial::atom(a.clone(), e - 1));
            terms.push((m2, c * Coeff::from_integer(e.into())));
        }
        Poly::from_terms(terms)
    }

    pub fn leading_is_negative(&self) -> bool {
        self.0.first().map(|t| t.1.is_negative()).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Atom {
        Atom::symbol(s)
    }

    fn p(terms: &[(&[(&str, u32)], i64)]) -> Poly {
        Poly::from_terms(
            terms
                .iter()
                .map(|(m, c)| {
                    let mut mono = Monomial::one();
                    for (a, e) in m.iter() {
                        mono = mono.mul(&Monomial::atom(sym(a), *e));
                    }
                    (mono, Coeff::from_integer((*c).into()))
                })
                .collect(),
        )
    }

    #[test]
    fn lex_order_puts_leading_variable_first() {
        let xy = Monomial::atom(sym("x"), 1).mul(&Monomial::atom(sym("y'"), 1));
        let xpy = Monomial::atom(sym("x'"), 1).mul(&Monomial::atom(sym("y"), 1));
        assert!(xy > xpy);
        assert!(Monomial::atom(sym("x"), 2) > Monomial::atom(sym("x"), 1));
        assert!(Monomial::atom(sym("y"), 1) > Monomial::one());
    }

    #[test]
    fn exact_division_round_trips() {
        let a = p(&[(&[("x", 1)], 1), (&[("y", 1)], 1)]);
        let b = p(&[(&[("x", 1)], 1), (&[], -3)]);
        let ab = a.mul(&b);
        assert_eq!(ab.div_exact(&a).unwrap(), b);
        assert_eq!(ab.div_exact(&b).unwrap(), a);
        let c = p(&[(&[("z", 1)], 1), (&[], 1)]);
        assert!(ab.div_exact(&c).is_none());
    }

    #[test]
    fn coefficient_split_round_trips() {
        let a = p(&[(&[("x", 2), ("y", 1)], 3), (&[("y", 2)], -1), (&[("x", 1)], 2)]);
        let cs = a.coefficients_in(&sym("x"));
        assert_eq!(cs.len(), 3);
        assert_eq!(Poly::from_coefficients(&sym("x"), &cs), a);
    }

    #[test]
    fn partial_derivative() {
        let a = p(&[(&[("x", 3)], 2), (&[("x", 1), ("y", 1)], 1)]);
        let d = a.partial(&sym("x"));
        assert_eq!(d, p(&[(&[("x", 2)], 6), (&[("y", 1)], 1)]));
    }
}
