//! Euler–Lagrange and twisted Euler–Lagrange equations, normal forms,
//! momenta and conservation laws.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{substitute, Expr};
use crate::jet::{evolutionary, JetSpace, MultiIndex, VectorField};
use crate::matrix::Matrix;
use crate::par;
use crate::prolong::TwistForm;
use crate::symmetry::symmetry_residual;

#[derive(Clone, Debug)]
pub struct VariationalProblem<'a> {
    space: &'a JetSpace,
    lagrangian: Expr,
    twist: Option<TwistForm>,
}

impl<'a> VariationalProblem<'a> {
    pub fn new(space: &'a JetSpace, lagrangian: Expr, twist: Option<TwistForm>) -> Result<Self> {
        if space.jet_order(&lagrangian) > 1 {
            return Err(Error::Domain("Lagrangian must be first order".into()));
        }
        Ok(VariationalProblem {
            space,
            lagrangian,
            twist,
        })
    }

    pub fn space(&self) -> &'a JetSpace {
        self.space
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn twist(&self) -> Option<&TwistForm> {
        self.twist.as_ref()
    }

    pub fn with_twist(&self, twist: Option<TwistForm>) -> Self {
        VariationalProblem {
            space: self.space,
            lagrangian: self.lagrangian.clone(),
            twist,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationKind {
    Standard,
    Twisted,
}

/// Left-hand sides E_a of E_a = 0.
#[derive(Clone, Debug)]
pub struct EquationSet {
    pub lhs: Vec<Expr>,
    pub kind: EquationKind,
}

/// π^i_a = ∂L/∂u^a_i, indexed `[a][i]`.
pub fn momenta(p: &VariationalProblem) -> Vec<Vec<Expr>> {
    let s = p.space;
    (0..s.q())
        .map(|a| {
            (0..s.p())
                .map(|i| {
                    s.partial(&p.lagrangian, a, &MultiIndex::unit(s.p(), i))
                        .expect("first-order coordinate")
                })
                .collect()
        })
        .collect()
}

/// E_a = ∂L/∂u^a − D_i π^i_a; any twist on the problem is ignored.
pub fn euler_lagrange(p: &VariationalProblem) -> Result<EquationSet> {
    let s = p.space;
    let pi = momenta(p);
    let lhs = par::try_map_range(s.q(), |a| {
        let mut e = s.partial(&p.lagrangian, a, &MultiIndex::zero(s.p()))?;
        for (i, pia) in pi[a].iter().enumerate() {
            e = &e - &s.total_derivative(pia, i)?;
        }
        Ok::<_, Error>(e)
    })?;
    Ok(EquationSet {
        lhs,
        kind: EquationKind::Standard,
    })
}

/// E_a = ∂L/∂u^a − D_i π^i_a + π^i_b (Λ_i)^b_a.
pub fn twisted_euler_lagrange(p: &VariationalProblem) -> Result<EquationSet> {
    let mu = p
        .twist
        .as_ref()
        .ok_or_else(|| Error::Domain("twisted equations need a twist".into()))?;
    let standard = euler_lagrange(p)?;
    let pi = momenta(p);
    let lhs = standard
        .lhs
        .into_iter()
        .enumerate()
        .map(|(a, e)| &e + &twist_term(p.space, mu, &pi, a))
        .collect();
    Ok(EquationSet {
        lhs,
        kind: EquationKind::Twisted,
    })
}

/// π^i_b (Λ_i)^b_a.
pub fn twist_term(space: &JetSpace, mu: &TwistForm, pi: &[Vec<Expr>], a: usize) -> Expr {
    let mut acc = Expr::zero();
    for i in 0..space.p() {
        for (b, pib) in pi.iter().enumerate() {
            let l = mu.lambda(i).get(b, a);
            if !l.is_zero() && !pib[i].is_zero() {
                acc = &acc + &(&pib[i] * l);
            }
        }
    }
    acc
}

/// Solved principal derivatives u^a_{2e_1} (accelerations when p = 1).
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub targets: Vec<String>,
    pub solutions: Vec<Expr>,
    pub determinant: Expr,
}

impl NormalForm {
    pub fn bindings(&self) -> HashMap<String, Expr> {
        self.targets
            .iter()
            .cloned()
            .zip(self.solutions.iter().cloned())
            .collect()
    }
}

pub fn solve_accelerations(space: &JetSpace, eqs: &EquationSet) -> Result<NormalForm> {
    let q = space.q();
    let second = MultiIndex::unit(space.p(), 0).increment(0);
    let targets: Vec<String> = (0..q)
        .map(|b| space.coordinate_name(b, &second).map(|s| s.to_string()))
        .collect::<Result<_>>()?;
    let zero: HashMap<String, Expr> = targets.iter().map(|t| (t.clone(), Expr::zero())).collect();
    let rows = par::try_map_range(q, |a| {
        let e = &eqs.lhs[a];
        let row: Vec<Expr> = (0..q)
            .map(|b| space.partial(e, b, &second))
            .collect::<Result<_>>()?;
        for m in &row {
            if targets.iter().any(|t| m.depends_on(t)) {
                return Err(Error::Domain(
                    "equations are not affine in the highest derivatives".into(),
                ));
            }
        }
        Ok::<_, Error>((row, substitute(e, &zero)))
    })?;
    let (m_rows, h): (Vec<Vec<Expr>>, Vec<Expr>) = rows.into_iter().unzip();
    let mass = Matrix::from_rows(m_rows)?;
    let det = mass.determinant()?;
    if det.is_zero() {
        return Err(Error::DegenerateLagrangian {
            det: det.to_string(),
        });
    }
    let rhs: Vec<Expr> = h.iter().map(|e| -e).collect();
    let solutions = mass.solve(&rhs)?;
    let nf = NormalForm {
        targets,
        solutions,
        determinant: det,
    };
    let b = nf.bindings();
    for e in &eqs.lhs {
        if !substitute(e, &b).is_zero() {
            return Err(Error::Domain("normal form fails back-substitution".into()));
        }
    }
    Ok(nf)
}

/// J (mechanics, one component) or the current P^i (fields).
#[derive(Clone, Debug)]
pub struct ConservedObject {
    pub field: String,
    pub components: Vec<Expr>,
}

fn noether(
    p: &VariationalProblem,
    x: &VectorField,
    name: &str,
    enforce: bool,
) -> Result<ConservedObject> {
    let s = p.space;
    let q = evolutionary(s, x);
    if enforce {
        let rep = symmetry_residual(s, &p.lagrangian, &q, p.twist.as_ref(), name)?;
        if !rep.verdict {
            return Err(Error::NotASymmetry {
                residual: rep.residual.to_string(),
            });
        }
    }
    let pi = momenta(p);
    let components = (0..s.p())
        .map(|i| {
            let mut acc = Expr::zero();
            for (a, phi) in q.phi().iter().enumerate() {
                acc = &acc + &(phi * &pi[a][i]);
            }
            acc
        })
        .collect();
    Ok(ConservedObject {
        field: name.to_string(),
        components,
    })
}

/// J = φ^a ∂L/∂q̇^a for a (twisted) symmetry of a mechanical Lagrangian.
/// With `enforce` the symmetry condition is checked first.
pub fn conserved_quantity(
    p: &VariationalProblem,
    x: &VectorField,
    name: &str,
    enforce: bool,
) -> Result<ConservedObject> {
    if p.space.p() != 1 {
        return Err(Error::Domain(
            "conserved quantities need one independent variable; use a current".into(),
        ));
    }
    noether(p, x, name, enforce)
}

/// P^i = φ^a π^i_a for a field theory.
pub fn conserved_current(
    p: &VariationalProblem,
    x: &VectorField,
    name: &str,
    enforce: bool,
) -> Result<ConservedObject> {
    if p.space.p() < 2 {
        return Err(Error::Domain(
            "currents need at least two independent variables".into(),
        ));
    }
    noether(p, x, name, enforce)
}

/// D_i P^i with the solved principal derivatives substituted.
pub fn conservation_residual(
    space: &JetSpace,
    c: &ConservedObject,
    nf: &NormalForm,
) -> Result<Expr> {
    let parts = par::try_map_range(c.components.len(), |i| {
        space.total_derivative(&c.components[i], i)
    })?;
    let r = substitute(&Expr::sum(&parts), &nf.bindings());
    if nf.targets.iter().any(|t| r.depends_on(t)) {
        return Err(Error::Domain(
            "residual still contains unresolved highest derivatives".into(),
        ));
    }
    Ok(r)
}
