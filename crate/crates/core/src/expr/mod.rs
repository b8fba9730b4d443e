//! Exact symbolic expressions.
//!
//! An [`Expr`] is a reduced quotient of two polynomials with rational
//! coefficients. The polynomial variables ("atoms") are symbols and opaque
//! function applications whose arguments are themselves canonical, so two
//! expressions that agree as rational functions of their atoms are
//! structurally identical.

mod ast;
mod derive;
mod gcd;
mod parse;
mod poly;
mod print;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};

pub use ast::Node;
pub use derive::{diff_partial, substitute, Derivation};
pub use gcd::gcd;
pub use parse::{parse, parse_node};
pub use poly::{Coeff, Monomial, Poly};

/// A declared opaque function.
///
/// Without derivative rules, partial derivatives are fresh opaque symbols
/// (`f_d1`, `f_d11`, `f_d12`, ...). With rules, the derivative with respect
/// to argument `k` is the rule expression with placeholders `_1.._n`
/// replaced by the actual arguments.
#[derive(Debug)]
pub struct FunctionDecl {
    name: Arc<str>,
    arity: usize,
    rules: Option<Vec<Expr>>,
}

impl FunctionDecl {
    pub fn new(name: &str, arity: usize) -> Result<Arc<FunctionDecl>> {
        check_function_name(name, arity)?;
        Ok(Arc::new(FunctionDecl {
            name: name.into(),
            arity,
            rules: None,
        }))
    }

    /// Declares a function whose partial derivatives are given by `rules`,
    /// written over the placeholder symbols `_1.._n` and possibly the
    /// function itself.
    pub fn with_rules(name: &str, arity: usize, rules: &[&str]) -> Result<Arc<FunctionDecl>> {
        check_function_name(name, arity)?;
        if rules.len() != arity {
            return Err(Error::Declaration(format!(
                "function `{name}` has arity {arity} but {} derivative rule(s)",
                rules.len()
            )));
        }
        // Rules may mention the function itself; they are parsed against a
        // provisional declaration and rebound by name when applied.
        let provisional = Arc::new(FunctionDecl {
            name: name.into(),
            arity,
            rules: None,
        });
        let mut ctx = Context::new();
        for k in 1..=arity {
            ctx.add_symbol(&placeholder(k))?;
        }
        ctx.functions.insert(name.into(), provisional);
        let parsed = rules
            .iter()
            .map(|r| parse(r, &ctx))
            .collect::<Result<Vec<Expr>>>()
            .map_err(|e| Error::Declaration(format!("derivative rule of `{name}`: {e}")))?;
        Ok(Arc::new(FunctionDecl {
            name: name.into(),
            arity,
            rules: Some(parsed),
        }))
    }

    pub(crate) fn rules(&self) -> Option<&[Expr]> {
        self.rules.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn has_rules(&self) -> bool {
        self.rules.is_some()
    }
}

fn check_function_name(name: &str, arity: usize) -> Result<()> {
    if !is_identifier(name) {
        return Err(Error::Declaration(format!("`{name}` is not an identifier")));
    }
    if split_derivative_label(name).is_some() {
        return Err(Error::Declaration(format!(
            "`{name}` collides with generated derivative names"
        )));
    }
    if arity == 0 || arity > 9 {
        return Err(Error::Declaration(format!(
            "function `{name}` must have arity 1..=9"
        )));
    }
    Ok(())
}

pub(crate) fn placeholder(k: usize) -> String {
    format!("_{k}")
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `f_d12` into (`f`, [1, 2]).
pub(crate) fn split_derivative_label(label: &str) -> Option<(&str, Vec<u8>)> {
    let pos = label.rfind("_d")?;
    let (base, digits) = (&label[..pos], &label[pos + 2..]);
    if base.is_empty() || digits.is_empty() || !digits.bytes().all(|b| (b'1'..=b'9').contains(&b)) {
        return None;
    }
    let slots: Vec<u8> = digits.bytes().map(|b| b - b'0').collect();
    if slots.windows(2).any(|w| w[0] > w[1]) {
        return None;
    }
    Some((base, slots))
}

/// Application of an opaque function (or one of its formal derivatives).
#[derive(Debug)]
pub struct Application {
    func: Arc<FunctionDecl>,
    slots: Vec<u8>,
    label: Arc<str>,
    args: Vec<Expr>,
}

impl Application {
    pub fn func(&self) -> &Arc<FunctionDecl> {
        &self.func
    }

    /// Sorted 1-based argument slots differentiated so far.
    pub fn slots(&self) -> &[u8] {
        &self.slots
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn args(&self) -> &[Expr] {
        &self.args
    }
}

/// A polynomial variable: a named symbol or an opaque application.
#[derive(Clone, Debug)]
pub enum Atom {
    Sym(Arc<str>),
    App(Arc<Application>),
}

impl Atom {
    pub fn symbol(name: &str) -> Atom {
        Atom::Sym(name.into())
    }

    pub fn apply(func: &Arc<FunctionDecl>, slots: Vec<u8>, args: Vec<Expr>) -> Result<Atom> {
        if args.len() != func.arity {
            return Err(Error::Arity {
                name: func.name.to_string(),
                expected: func.arity,
                found: args.len(),
            });
        }
        let mut slots = slots;
        slots.sort_unstable();
        let label: Arc<str> = if slots.is_empty() {
            func.name.clone()
        } else {
            let digits: String = slots.iter().map(|s| char::from(b'0' + s)).collect();
            format!("{}_d{}", func.name, digits).into()
        };
        Ok(Atom::App(Arc::new(Application {
            func: func.clone(),
            slots,
            label,
            args,
        })))
    }

    pub fn name(&self) -> &str {
        match self {
            Atom::Sym(s) => s,
            Atom::App(a) => &a.label,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Atom::Sym(s) => Some(s),
            Atom::App(_) => None,
        }
    }

    pub fn as_application(&self) -> Option<&Application> {
        match self {
            Atom::Sym(_) => None,
            Atom::App(a) => Some(a),
        }
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Atom {}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Name first, symbols before applications of the same name, then arguments.
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Sym(a), Atom::Sym(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.cmp(b)
                }
            }
            (Atom::Sym(a), Atom::App(b)) => (**a).cmp(&*b.label).then(Ordering::Less),
            (Atom::App(a), Atom::Sym(b)) => (*a.label).cmp(&**b).then(Ordering::Greater),
            (Atom::App(a), Atom::App(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.label.cmp(&b.label).then_with(|| a.args.cmp(&b.args))
            }
        }
    }
}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Atom::Sym(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            Atom::App(a) => {
                1u8.hash(state);
                a.label.hash(state);
                a.args.hash(state);
            }
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Ratio {
    num: Poly,
    den: Poly,
}

/// Immutable canonical expression: a reduced rational function of atoms
/// whose denominator has leading coefficient one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Ratio>);

impl Expr {
    pub(crate) fn from_poly(p: Poly) -> Expr {
        Expr(Arc::new(Ratio {
            num: p,
            den: Poly::one(),
        }))
    }

    /// Reduces `num / den`.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if let Some(c) = den.constant_value() {
            return Ok(Expr::from_poly(num.scale(&c.recip())));
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        Ok(Expr::normalized(num, den))
    }

    /// Scales an already-coprime pair so the denominator is monic.
    fn normalized(num: Poly, den: Poly) -> Expr {
        let lc = den.lead_coeff();
        if lc.is_one() {
            return Expr(Arc::new(Ratio { num, den }));
        }
        let inv = lc.recip();
        let num = num.scale(&inv);
        let den = den.scale(&inv);
        if den.is_one() {
            return Expr::from_poly(num);
        }
        Expr(Arc::new(Ratio { num, den }))
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::from_poly(Poly::constant(Coeff::from_integer(n.into())))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        assert!(d != 0, "zero denominator in rational literal");
        Expr::from_poly(Poly::constant(Coeff::new(n.into(), d.into())))
    }

    pub fn constant(c: Coeff) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::from_poly(Poly::atom(Atom::symbol(name)))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::from_poly(Poly::atom(a))
    }

    pub fn apply(func: &Arc<FunctionDecl>, args: Vec<Expr>) -> Result<Expr> {
        Ok(Expr::atom(Atom::apply(func, Vec::new(), args)?))
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom(&self) -> &Poly {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        if self.0.den.is_one() {
            self.0.num.constant_value()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Every atom of numerator and denominator (not descending into arguments).
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.0.num.atoms();
        s.extend(self.0.den.atoms());
        s
    }

    /// Every symbol name, including those inside function arguments.
    pub fn free_symbols(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Arc<str>>) {
        for a in self.atoms() {
            match a {
                Atom::Sym(s) => {
                    out.insert(s);
                }
                Atom::App(app) => {
                    for e in &app.args {
                        e.collect_symbols(out);
                    }
                }
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.free_symbols().iter().any(|s| &**s == name)
    }

    pub fn checked_add(&self, other: &Expr) -> Expr {
        let (a, b) = (&*self.0, &*other.0);
        if a.num.is_zero() {
            return other.clone();
        }
        if b.num.is_zero() {
            return self.clone();
        }
        if a.den.is_one() && b.den.is_one() {
            return Expr::from_poly(a.num.add(&b.num));
        }
        if a.den == b.den {
            let num = a.num.add(&b.num);
            return reduce_against(num, a.den.clone(), &a.den);
        }
        let g = gcd(&a.den, &b.den);
        if g.is_one() {
            let num = a.num.mul(&b.den).add(&b.num.mul(&a.den));
            let den = a.den.mul(&b.den);
            return Expr::normalized_or_zero(num, den);
        }
        let ad = a.den.div_exact(&g).expect("gcd divides");
        let bd = b.den.div_exact(&g).expect("gcd divides");
        let num = a.num.mul(&bd).add(&b.num.mul(&ad));
        let den = a.den.mul(&bd);
        reduce_against(num, den, &g)
    }

    fn normalized_or_zero(num: Poly, den: Poly) -> Expr {
        if num.is_zero() {
            Expr::zero()
        } else {
            Expr::normalized(num, den)
        }
    }

    pub fn checked_mul(&self, other: &Expr) -> Expr {
        let (a, b) = (&*self.0, &*other.0);
        if a.num.is_zero() || b.num.is_zero() {
            return Expr::zero();
        }
        if a.den.is_one() && b.den.is_one() {
            return Expr::from_poly(a.num.mul(&b.num));
        }
        let g1 = gcd(&a.num, &b.den);
        let g2 = gcd(&b.num, &a.den);
        let an = a.num.div_exact(&g1).expect("gcd divides");
        let bd = b.den.div_exact(&g1).expect("gcd divides");
        let bn = b.num.div_exact(&g2).expect("gcd divides");
        let ad = a.den.div_exact(&g2).expect("gcd divides");
        Expr::normalized(an.mul(&bn), ad.mul(&bd))
    }

    pub fn recip(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Expr::normalized(self.0.den.clone(), self.0.num.clone()))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        Ok(self.checked_mul(&other.recip()?))
    }

    pub fn pow(&self, e: i32) -> Result<Expr> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        let e = e as u32;
        if e == 0 {
            return Ok(Expr::one());
        }
        Ok(Expr::normalized_or_zero(
            self.0.num.pow(e),
            self.0.den.pow(e),
        ))
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr(Arc::new(Ratio {
            num: self.0.num.scale(c),
            den: self.0.den.clone(),
        }))
    }

    /// Sum of many expressions sharing a common denominator computation.
    pub fn sum<'a, I: IntoIterator<Item = &'a Expr>>(items: I) -> Expr {
        let mut acc = Expr::zero();
        for e in items {
            acc = acc.checked_add(e);
        }
        acc
    }

    /// Exact evaluation with rational values for atoms. Returns `None` when an
    /// atom is unassigned or the denominator vanishes.
    pub fn eval_rational(&self, value: &dyn Fn(&Atom) -> Option<Coeff>) -> Option<Coeff> {
        let mut cache: HashMap<Atom, Coeff> = HashMap::new();
        let n = eval_poly(&self.0.num, value, &mut cache)?;
        let d = eval_poly(&self.0.den, value, &mut cache)?;
        if d.is_zero() {
            None
        } else {
            Some(n / d)
        }
    }

    /// Canonical string form; reparses to an identical expression.
    pub fn to_canonical_string(&self) -> String {
        print::print(self)
    }
}

fn eval_poly(
    p: &Poly,
    value: &dyn Fn(&Atom) -> Option<Coeff>,
    cache: &mut HashMap<Atom, Coeff>,
) -> Option<Coeff> {
    let mut total = Coeff::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (a, e) in m.factors() {
            let v = match cache.get(a) {
                Some(v) => v.clone(),
                None => {
                    let v = value(a)?;
                    cache.insert(a.clone(), v.clone());
                    v
                }
            };
            t *= num::pow::pow(v, *e as usize);
        }
        total += t;
    }
    Some(total)
}

/// `num/den` where any common factor of `num` and `den` divides `g`.
fn reduce_against(num: Poly, den: Poly, g: &Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    let h = gcd(&num, g);
    if h.is_one() {
        return Expr::normalized(num, den);
    }
    let num = num.div_exact(&h).expect("gcd divides");
    let den = den.div_exact(&h).expect("gcd divides");
    Expr::normalized(num, den)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", print::print(self))
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.checked_add(rhs)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        self.checked_add(&rhs)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.checked_add(&-rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self.checked_add(&-&rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.checked_mul(rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self.checked_mul(&rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(Ratio {
            num: self.0.num.neg(),
            den: self.0.den.clone(),
        }))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<BigInt> for Expr {
    fn from(n: BigInt) -> Expr {
        Expr::constant(BigRational::from_integer(n))
    }
}

/// Symbol table used by the parser: declared symbol names, spelling aliases
/// (`q[2]` for `q''`) and function declarations.
#[derive(Clone, Debug, Default)]
pub struct Context {
    symbols: BTreeSet<Arc<str>>,
    aliases: HashMap<String, Arc<str>>,
    functions: BTreeMap<Arc<str>, Arc<FunctionDecl>>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_symbol(&mut self, name: &str) -> Result<Arc<str>> {
        if self.symbols.contains(name) || self.functions.contains_key(name) {
            return Err(Error::Declaration(format!("`{name}` declared twice")));
        }
        let n: Arc<str> = name.into();
        self.symbols.insert(n.clone());
        Ok(n)
    }

    pub fn add_alias(&mut self, spelling: &str, canonical: &str) {
        if let Some(c) = self.symbols.get(canonical) {
            self.aliases.insert(spelling.to_string(), c.clone());
        }
    }

    pub fn add_function(&mut self, decl: Arc<FunctionDecl>) -> Result<()> {
        if self.symbols.contains(decl.name()) || self.functions.contains_key(decl.name()) {
            return Err(Error::Declaration(format!(
                "`{}` declared twice",
                decl.name()
            )));
        }
        self.functions.insert(decl.name.clone(), decl);
        Ok(())
    }

    pub fn resolve_symbol(&self, spelling: &str) -> Option<Arc<str>> {
        self.symbols
            .get(spelling)
            .cloned()
            .or_else(|| self.aliases.get(spelling).cloned())
    }

    pub fn function(&self, name: &str) -> Option<&Arc<FunctionDecl>> {
        self.functions.get(name)
    }

    pub fn functions(&self) -> impl Iterator<Item = &Arc<FunctionDecl>> {
        self.functions.values()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Arc<str>> {
        self.symbols.iter()
    }

    /// Resolves a (possibly derivative) function label such as `f_d1`.
    pub fn resolve_function(&self, label: &str) -> Option<(Arc<FunctionDecl>, Vec<u8>)> {
        if let Some(f) = self.functions.get(label) {
            return Some((f.clone(), Vec::new()));
        }
        let (base, slots) = split_derivative_label(label)?;
        let f = self.functions.get(base)?;
        if f.has_rules() || slots.iter().any(|&s| s as usize > f.arity) {
            return None;
        }
        Some((f.clone(), slots))
    }
}

/// Canonicalizes an unevaluated tree; the identity on expressions that are
/// already canonical.
pub fn canonicalize(node: &Node) -> Result<Expr> {
    node.canonicalize()
}
