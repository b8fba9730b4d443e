//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive remainder sequences, with two shortcuts that handle
//! the common cases cheaply: variables present in only one operand reduce
//! the problem to coefficient gcds, and a modular evaluation test certifies
//! coprimality without running the remainder sequence at all.

use std::collections::{BTreeSet, HashMap};

use num::{BigInt, Integer, One, ToPrimitive};

use super::poly::{Coeff, Poly};
use super::Atom;

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a1 = a.div_monomial(&ma);
    let b1 = b.div_monomial(&mb);
    let g = gcd_stripped(&a1, &b1);
    g.mul_term(&mg, &Coeff::one()).monic()
}

/// Both operands nonzero and free of monomial content.
fn gcd_stripped(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 || b.len() == 1 {
        // A single term without monomial content is a constant.
        return Poly::one();
    }
    if a.monic() == b.monic() {
        return a.monic();
    }
    let va = a.atoms();
    let vb = b.atoms();
    if let Some(v) = va.difference(&vb).next() {
        return gcd_with_coefficients(b, a, v);
    }
    if let Some(v) = vb.difference(&va).next() {
        return gcd_with_coefficients(a, b, v);
    }
    let shared: Vec<Atom> = va.into_iter().collect();
    if modular_coprime(a, b, &shared) {
        return Poly::one();
    }
    let v = shared
        .iter()
        .min_by_key(|v| (a.degree_in(v) + b.degree_in(v), a.degree_in(v).min(b.degree_in(v))))
        .expect("shared variables")
        .clone();
    let ua = a.coefficients_in(&v);
    let ub = b.coefficients_in(&v);
    let (ca, pa) = primitive_split(ua);
    let (cb, pb) = primitive_split(ub);
    let c = gcd(&ca, &cb);
    let g = prs(pa, pb);
    Poly::from_coefficients(&v, &g).mul(&c)
}

/// gcd(keep, split) where `v` occurs in `split` only: every coefficient of
/// `split` in `v` must be divisible by the result.
fn gcd_with_coefficients(keep: &Poly, split: &Poly, v: &Atom) -> Poly {
    let mut coeffs: Vec<Poly> = split
        .coefficients_in(v)
        .into_iter()
        .filter(|c| !c.is_zero())
        .collect();
    coeffs.sort_by_key(|c| c.len());
    let mut g = keep.clone();
    for c in &coeffs {
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g.monic()
}

fn content(coeffs: &[Poly]) -> Poly {
    let mut order: Vec<&Poly> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    order.sort_by_key(|c| c.len());
    let mut g = Poly::zero();
    for c in order {
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn primitive_split(coeffs: Vec<Poly>) -> (Poly, Vec<Poly>) {
    let c = content(&coeffs);
    if c.is_one() {
        return (c, coeffs);
    }
    let pp = coeffs
        .iter()
        .map(|x| x.div_exact(&c).expect("content divides coefficient"))
        .collect();
    (c, pp)
}

fn trim(v: &mut Vec<Poly>) {
    while v.len() > 1 && v.last().map(Poly::is_zero).unwrap_or(false) {
        v.pop();
    }
    if v.len() == 1 && v[0].is_zero() {
        v.clear();
    }
}

/// Pseudo-remainder up to a nonzero factor from the coefficient ring.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lcb = &b[db];
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lcr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for (j, bj) in b.iter().enumerate() {
            r[j + shift] = r[j + shift].sub(&lcr.mul(bj));
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        trim(&mut r);
    }
    r
}

fn prs(a: Vec<Poly>, b: Vec<Poly>) -> Vec<Poly> {
    let (mut a, mut b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    loop {
        if b.len() == 1 {
            return vec![Poly::one()];
        }
        let r = prem(&a, &b);
        if r.is_empty() {
            return b;
        }
        let (_, pr) = primitive_split(r);
        a = b;
        b = pr;
    }
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, PRIME - 2)
}

fn reduce_int(n: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let r = n.mod_floor(&p);
    r.to_u64().expect("reduced residue fits")
}

fn reduce_coeff(c: &Coeff) -> Option<u64> {
    let d = reduce_int(c.denom());
    if d == 0 {
        return None;
    }
    let n = reduce_int(c.numer());
    Some(mulmod(n, invmod(d)))
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) % PRIME
    }
}

/// Image of `p` in Z_P[v] with every other atom evaluated.
fn univariate_image(p: &Poly, v: &Atom, values: &HashMap<Atom, u64>) -> Option<Vec<u64>> {
    let deg = p.degree_in(v) as usize;
    let mut out = vec![0u64; deg + 1];
    for (m, c) in p.terms() {
        let mut t = reduce_coeff(c)?;
        let mut e_v = 0;
        for (a, e) in m.factors() {
            if a == v {
                e_v = *e as usize;
            } else {
                t = mulmod(t, powmod(values[a], *e as u64));
            }
        }
        out[e_v] = (out[e_v] + t) % PRIME;
    }
    Some(out)
}

fn trim_mod(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim_mod(&mut a);
    trim_mod(&mut b);
    loop {
        if b.is_empty() {
            return a.len().saturating_sub(1);
        }
        // a <- a mod b
        let lb = invmod(*b.last().unwrap());
        while a.len() >= b.len() {
            let k = mulmod(*a.last().unwrap(), lb);
            let shift = a.len() - b.len();
            for (j, bj) in b.iter().enumerate() {
                let s = mulmod(k, *bj);
                a[j + shift] = (a[j + shift] + PRIME - s) % PRIME;
            }
            a.pop();
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// True only when the gcd is certainly constant. Uses the fact that a
/// specialization keeping the leading coefficient in `v` alive cannot lower
/// the degree in `v` of a common factor.
fn modular_coprime(a: &Poly, b: &Poly, vars: &[Atom]) -> bool {
    let mut atoms: BTreeSet<Atom> = a.atoms();
    atoms.extend(b.atoms());
    let mut rng = SplitMix(0x5EED_0F_7715_7ED5);
    let values: HashMap<Atom, u64> = atoms.into_iter().map(|x| (x, rng.next().max(2))).collect();
    for v in vars {
        let (Some(ia), Some(ib)) = (
            univariate_image(a, v, &values),
            univariate_image(b, v, &values),
        ) else {
            return false;
        };
        if ia.last() == Some(&0) || ib.last() == Some(&0) {
            return false;
        }
        if gcd_degree_mod(ia, ib) > 0 {
            return false;
        }
    }
    true
}
