//! Jet spaces: coordinate registry, multi-indices, total derivatives and
//! vector fields.
//!
//! Jet coordinates are ordinary symbols of the expression kernel. With one
//! independent variable they are spelled with primes (`q`, `q'`, `q''`, with
//! `q[2]` accepted as an alias); otherwise with a bracketed multi-index
//! (`u[1,0]`), the undifferentiated variable keeping its bare name.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Context, Derivation, Expr, FunctionDecl};

/// Per-variable derivative counts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(p: usize) -> MultiIndex {
        MultiIndex(vec![0; p])
    }

    pub fn new(counts: Vec<u32>) -> MultiIndex {
        MultiIndex(counts)
    }

    pub fn unit(p: usize, i: usize) -> MultiIndex {
        MultiIndex::zero(p).increment(i)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn increment(&self, i: usize) -> MultiIndex {
        let mut c = self.0.clone();
        c[i] += 1;
        MultiIndex(c)
    }

    pub fn decrement(&self, i: usize) -> Option<MultiIndex> {
        let mut c = self.0.clone();
        c[i] = c[i].checked_sub(1)?;
        Some(MultiIndex(c))
    }

    /// Smallest variable index with a nonzero count.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&k| k > 0)
    }

    /// Every multi-index of total order `k` over `p` variables, in
    /// lexicographically decreasing order of counts.
    pub fn all_of_order(p: usize, k: u32) -> Vec<MultiIndex> {
        fn rec(p: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == p {
                prefix.push(k);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for first in (0..=k).rev() {
                prefix.push(first);
                rec(p, k - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(p, k, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct JetSpace {
    independents: Vec<Arc<str>>,
    dependents: Vec<Arc<str>>,
    order: u32,
    parameters: Vec<Arc<str>>,
    ctx: Context,
    coords: HashMap<Arc<str>, (usize, MultiIndex)>,
    names: HashMap<(usize, MultiIndex), Arc<str>>,
}

impl JetSpace {
    pub fn new(independents: &[&str], dependents: &[&str], order: u32) -> Result<JetSpace> {
        if independents.is_empty() || dependents.is_empty() {
            return Err(Error::Declaration(
                "at least one independent and one dependent variable required".into(),
            ));
        }
        if order == 0 {
            return Err(Error::Declaration("jet order must be at least 1".into()));
        }
        for name in independents.iter().chain(dependents) {
            if !crate::expr::is_identifier(name) {
                return Err(Error::Declaration(format!("`{name}` is not an identifier")));
            }
        }
        let p = independents.len();
        let mut ctx = Context::new();
        let mut indep = Vec::new();
        for x in independents {
            indep.push(ctx.add_symbol(x)?);
        }
        let mut space = JetSpace {
            independents: indep,
            dependents: Vec::new(),
            order,
            parameters: Vec::new(),
            ctx,
            coords: HashMap::new(),
            names: HashMap::new(),
        };
        for (a, u) in dependents.iter().enumerate() {
            space.dependents.push(Arc::from(*u));
            for k in 0..=order {
                for j in MultiIndex::all_of_order(p, k) {
                    let name = if p == 1 {
                        format!("{u}{}", "'".repeat(k as usize))
                    } else if k == 0 {
                        u.to_string()
                    } else {
                        format!("{u}{j:?}")
                    };
                    let sym = space.ctx.add_symbol(&name)?;
                    // Bracketed spelling works in every dimension.
                    space.ctx.add_alias(&format!("{u}{j:?}"), &name);
                    space.coords.insert(sym.clone(), (a, j.clone()));
                    space.names.insert((a, j), sym);
                }
            }
        }
        Ok(space)
    }

    pub fn add_parameter(&mut self, name: &str) -> Result<()> {
        if !crate::expr::is_identifier(name) {
            return Err(Error::Declaration(format!("`{name}` is not an identifier")));
        }
        let s = self.ctx.add_symbol(name)?;
        self.parameters.push(s);
        Ok(())
    }

    pub fn add_function(&mut self, decl: Arc<FunctionDecl>) -> Result<()> {
        self.ctx.add_function(decl)
    }

    pub fn p(&self) -> usize {
        self.independents.len()
    }

    pub fn q(&self) -> usize {
        self.dependents.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn independents(&self) -> &[Arc<str>] {
        &self.independents
    }

    pub fn dependents(&self) -> &[Arc<str>] {
        &self.dependents
    }

    pub fn parameters(&self) -> &[Arc<str>] {
        &self.parameters
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        crate::expr::parse(text, &self.ctx)
    }

    pub fn coordinate_name(&self, a: usize, j: &MultiIndex) -> Result<&Arc<str>> {
        self.names.get(&(a, j.clone())).ok_or_else(|| {
            Error::OrderOverflow(format!(
                "{}{:?} exceeds declared order {}",
                self.dependents[a], j, self.order
            ))
        })
    }

    /// The jet coordinate u^a_J.
    pub fn coordinate(&self, a: usize, j: &MultiIndex) -> Result<Expr> {
        Ok(Expr::symbol(self.coordinate_name(a, j)?))
    }

    pub fn u(&self, a: usize) -> Expr {
        Expr::symbol(&self.names[&(a, MultiIndex::zero(self.p()))])
    }

    /// First derivative u^a_i.
    pub fn du(&self, a: usize, i: usize) -> Expr {
        Expr::symbol(&self.names[&(a, MultiIndex::unit(self.p(), i))])
    }

    pub fn x(&self, i: usize) -> Expr {
        Expr::symbol(&self.independents[i])
    }

    /// `(a, J)` when `name` is a jet coordinate.
    pub fn lookup(&self, name: &str) -> Option<(usize, &MultiIndex)> {
        self.coords.get(name).map(|(a, j)| (*a, j))
    }

    pub fn independent_index(&self, name: &str) -> Option<usize> {
        self.independents.iter().position(|x| &**x == name)
    }

    /// Highest jet order among the coordinates of `e` (0 if none).
    pub fn jet_order(&self, e: &Expr) -> u32 {
        e.free_symbols()
            .iter()
            .filter_map(|s| self.lookup(s).map(|(_, j)| j.order()))
            .max()
            .unwrap_or(0)
    }

    /// D_i e = ∂e/∂x^i + Σ u^a_{J,i} ∂e/∂u^a_J.
    pub fn total_derivative(&self, e: &Expr, i: usize) -> Result<Expr> {
        let k = self.jet_order(e);
        if k >= self.order {
            return Err(Error::OrderOverflow(format!(
                "total derivative of an order-{k} expression in a jet space of order {}",
                self.order
            )));
        }
        let xi = &self.independents[i];
        let on_symbol = |s: &str| -> Option<Expr> {
            if s == &**xi {
                return Some(Expr::one());
            }
            let (a, j) = self.coords.get(s)?;
            Some(Expr::symbol(&self.names[&(*a, j.increment(i))]))
        };
        Ok(Derivation::new(&on_symbol).apply(e))
    }

    /// D_J e, applying the increments of `j` from the last variable to the first.
    pub fn total_derivative_multi(&self, e: &Expr, j: &MultiIndex) -> Result<Expr> {
        let mut out = e.clone();
        for i in (0..self.p()).rev() {
            for _ in 0..j.counts()[i] {
                out = self.total_derivative(&out, i)?;
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to the jet coordinate u^a_J.
    pub fn partial(&self, e: &Expr, a: usize, j: &MultiIndex) -> Result<Expr> {
        Ok(crate::expr::diff_partial(e, self.coordinate_name(a, j)?))
    }
}

/// Components (ξ^i, φ^a) of a vector field ξ^i ∂_{x^i} + φ^a ∂_{u^a}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    xi: Vec<Expr>,
    phi: Vec<Expr>,
}

impl VectorField {
    pub fn new(space: &JetSpace, xi: Vec<Expr>, phi: Vec<Expr>) -> Result<VectorField> {
        if xi.len() != space.p() || phi.len() != space.q() {
            return Err(Error::Dimension(format!(
                "vector field needs {} horizontal and {} vertical components, got {} and {}",
                space.p(),
                space.q(),
                xi.len(),
                phi.len()
            )));
        }
        Ok(VectorField { xi, phi })
    }

    pub fn vertical(space: &JetSpace, phi: Vec<Expr>) -> Result<VectorField> {
        VectorField::new(space, vec![Expr::zero(); space.p()], phi)
    }

    pub fn parse(space: &JetSpace, xi: &[&str], phi: &[&str]) -> Result<VectorField> {
        let xi = xi.iter().map(|s| space.parse(s)).collect::<Result<_>>()?;
        let phi = phi.iter().map(|s| space.parse(s)).collect::<Result<_>>()?;
        VectorField::new(space, xi, phi)
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn is_vertical(&self) -> bool {
        self.xi.iter().all(Expr::is_zero)
    }

    pub fn scale(&self, k: &Expr) -> VectorField {
        VectorField {
            xi: self.xi.iter().map(|e| e * k).collect(),
            phi: self.phi.iter().map(|e| e * k).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
            phi: self.phi.iter().zip(&other.phi).map(|(a, b)| a + b).collect(),
        }
    }
}

/// The evolutionary representative Q^a = φ^a − ξ^i u^a_i.
pub fn evolutionary(space: &JetSpace, x: &VectorField) -> VectorField {
    if x.is_vertical() {
        return x.clone();
    }
    let phi = (0..space.q())
        .map(|a| {
            let mut q = x.phi[a].clone();
            for (i, xi) in x.xi.iter().enumerate() {
                if !xi.is_zero() {
                    q = &q - &(xi * &space.du(a, i));
                }
            }
            q
        })
        .collect();
    VectorField {
        xi: vec![Expr::zero(); space.p()],
        phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn appendix() -> JetSpace {
        let mut s = JetSpace::new(&["t"], &["x", "y", "z"], 2).unwrap();
        s.add_function(FunctionDecl::new("f", 1).unwrap()).unwrap();
        s
    }

    #[test]
    fn multi_indices_of_order() {
        let v = MultiIndex::all_of_order(2, 2);
        assert_eq!(format!("{v:?}"), "[[2,0], [1,1], [0,2]]");
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
    }

    #[test]
    fn prime_and_bracket_spellings_agree() {
        let s = appendix();
        assert_eq!(s.parse("x[2]").unwrap(), s.parse("x''").unwrap());
        assert_eq!(s.parse("x[0]").unwrap(), s.parse("x").unwrap());
        assert!(matches!(s.parse("x'''"), Err(Error::Undeclared { .. })));
    }

    #[test]
    fn total_derivative_examples() {
        let s = JetSpace::new(&["t"], &["q"], 2).unwrap();
        assert_eq!(s.total_derivative(&s.u(0), 0).unwrap(), s.du(0, 0));

        let s = appendix();
        let beta = s.parse("(x^2+y^2)*z").unwrap();
        assert_eq!(
            s.total_derivative(&beta, 0).unwrap(),
            s.parse("2*x*x'*z + 2*y*y'*z + (x^2+y^2)*z'").unwrap()
        );
        let fb = s.parse("f((x^2+y^2)*z)").unwrap();
        assert_eq!(
            s.total_derivative(&fb, 0).unwrap(),
            s.parse("f_d1((x^2+y^2)*z)*(2*x*x'*z + 2*y*y'*z + (x^2+y^2)*z')")
                .unwrap()
        );
    }

    #[test]
    fn total_derivative_refuses_top_order() {
        let s = appendix();
        let e = s.parse("x''").unwrap();
        assert!(matches!(
            s.total_derivative(&e, 0),
            Err(Error::OrderOverflow(_))
        ));
    }

    #[test]
    fn mixed_total_derivatives_commute() {
        let s = JetSpace::new(&["t", "x"], &["u"], 3).unwrap();
        let e = s.parse("u*u[1,0]^2 + t*x*u[0,1]").unwrap();
        let a = s.total_derivative(&s.total_derivative(&e, 0).unwrap(), 1).unwrap();
        let b = s.total_derivative(&s.total_derivative(&e, 1).unwrap(), 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evolutionary_representatives() {
        let s = JetSpace::new(&["t"], &["q"], 2).unwrap();
        let dt = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        assert_eq!(evolutionary(&s, &dt).phi()[0], s.parse("-q'").unwrap());

        let s = appendix();
        let x = VectorField::parse(&s, &["0"], &["-y", "x", "0"]).unwrap();
        assert_eq!(evolutionary(&s, &x), x);
        let once = evolutionary(&s, &VectorField::parse(&s, &["t"], &["x", "0", "0"]).unwrap());
        assert_eq!(evolutionary(&s, &once), once);
    }
}
