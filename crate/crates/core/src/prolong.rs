//! Standard and twisted prolongations.
//!
//! The twisted recursion is
//!
//! ```text
//! Ψ^a_{J,i} = D_i Ψ^a_J + (Λ_i)^a_b Ψ^b_J − u^b_{J,m} [δ^a_b D_i ξ^m + (Λ_i)^a_b ξ^m]
//! ```
//!
//! and reduces to the standard formula entry by entry when every Λ_i vanishes.
//! For a multi-index the last step increments the smallest variable index; a
//! second path (last step on the largest index) is evaluated whenever the two
//! differ and must agree.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{JetSpace, MultiIndex, VectorField};
use crate::matrix::Matrix;
use crate::par;

/// One q×q matrix Λ_i per independent variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistForm {
    lambdas: Vec<Matrix>,
}

impl TwistForm {
    pub fn new(space: &JetSpace, lambdas: Vec<Matrix>) -> Result<TwistForm> {
        if lambdas.len() != space.p() {
            return Err(Error::Dimension(format!(
                "twist needs {} matrices, got {}",
                space.p(),
                lambdas.len()
            )));
        }
        for m in &lambdas {
            if m.rows() != space.q() || m.cols() != space.q() {
                return Err(Error::Dimension(format!(
                    "twist matrices must be {q}x{q}",
                    q = space.q()
                )));
            }
            if m.entries().iter().any(|e| space.jet_order(e) > 1) {
                return Err(Error::Declaration(
                    "twist entries may depend on first derivatives at most".into(),
                ));
            }
        }
        Ok(TwistForm { lambdas })
    }

    pub fn zero(space: &JetSpace) -> TwistForm {
        TwistForm {
            lambdas: vec![Matrix::zeros(space.q(), space.q()); space.p()],
        }
    }

    /// Scalar twist for a single dependent variable and a single
    /// independent variable.
    pub fn scalar(space: &JetSpace, lambda: Expr) -> Result<TwistForm> {
        TwistForm::new(space, vec![Matrix::from_rows(vec![vec![lambda]])?])
    }

    /// Λ_i = S⁻¹ D_i S, which satisfies the compatibility condition for any
    /// invertible S.
    pub fn darboux(space: &JetSpace, s: &Matrix) -> Result<TwistForm> {
        let inv = s.inverse()?;
        let lambdas = (0..space.p())
            .map(|i| {
                let ds = s.try_map(|e| space.total_derivative(e, i))?;
                inv.mul(&ds)
            })
            .collect::<Result<_>>()?;
        TwistForm::new(space, lambdas)
    }

    pub fn lambda(&self, i: usize) -> &Matrix {
        &self.lambdas[i]
    }

    pub fn lambdas(&self) -> &[Matrix] {
        &self.lambdas
    }

    pub fn is_zero(&self) -> bool {
        self.lambdas.iter().all(Matrix::is_zero)
    }
}

/// Coefficients Ψ^a_J of a prolonged field, for 0 ≤ |J| ≤ order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProlongedField {
    base: VectorField,
    order: u32,
    coeffs: BTreeMap<(MultiIndex, usize), Expr>,
}

impl ProlongedField {
    pub fn base(&self) -> &VectorField {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficient(&self, a: usize, j: &MultiIndex) -> Option<&Expr> {
        self.coeffs.get(&(j.clone(), a))
    }

    /// Coefficients with |J| ≥ 1 in order of increasing |J|, then decreasing
    /// multi-index, then dependent variable.
    pub fn coefficients(&self) -> Vec<(usize, MultiIndex, Expr)> {
        let mut v: Vec<_> = self
            .coeffs
            .iter()
            .filter(|((j, _), _)| j.order() > 0)
            .map(|((j, a), e)| (*a, j.clone(), e.clone()))
            .collect();
        v.sort_by(|x, y| {
            (x.1.order(), std::cmp::Reverse(&x.1), x.0).cmp(&(
                y.1.order(),
                std::cmp::Reverse(&y.1),
                y.0,
            ))
        });
        v
    }

    /// ξ^i ∂e/∂x^i + Σ Ψ^a_J ∂e/∂u^a_J.
    pub fn apply(&self, space: &JetSpace, e: &Expr) -> Result<Expr> {
        let k = space.jet_order(e);
        if k > self.order {
            return Err(Error::OrderOverflow(format!(
                "expression of order {k} needs a prolongation of at least that order, got {}",
                self.order
            )));
        }
        let mut terms = Vec::new();
        for s in e.free_symbols() {
            let coeff = if let Some(i) = space.independent_index(&s) {
                self.base.xi()[i].clone()
            } else if let Some((a, j)) = space.lookup(&s) {
                self.coeffs[&(j.clone(), a)].clone()
            } else {
                continue;
            };
            if coeff.is_zero() {
                continue;
            }
            terms.push((s, coeff));
        }
        let parts = par::map(&terms, |(s, c)| c * &crate::expr::diff_partial(e, s));
        Ok(Expr::sum(&parts))
    }
}

/// Standard prolongation ψ^a_{J,i} = D_i ψ^a_J − u^a_{J,m} D_i ξ^m.
pub fn prolong_standard(space: &JetSpace, x: &VectorField, k: u32) -> Result<ProlongedField> {
    prolong_with(space, x, None, k)
}

/// Twisted prolongation with the compatibility sentinel described in the
/// module docs.
pub fn prolong_twisted(
    space: &JetSpace,
    x: &VectorField,
    mu: &TwistForm,
    k: u32,
) -> Result<ProlongedField> {
    prolong_with(space, x, Some(mu), k)
}

fn prolong_with(
    space: &JetSpace,
    x: &VectorField,
    mu: Option<&TwistForm>,
    k: u32,
) -> Result<ProlongedField> {
    if k > space.order() {
        return Err(Error::OrderOverflow(format!(
            "prolongation of order {k} in a jet space of order {}",
            space.order()
        )));
    }
    let p = space.p();
    let q = space.q();
    let mut coeffs = BTreeMap::new();
    for a in 0..q {
        coeffs.insert((MultiIndex::zero(p), a), x.phi()[a].clone());
    }
    // D_i ξ^m is shared by every step in direction i.
    let dxi: Vec<Vec<Expr>> = (0..p)
        .map(|i| {
            x.xi()
                .iter()
                .map(|e| space.total_derivative(e, i))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    for level in 1..=k {
        let targets: Vec<(MultiIndex, usize)> = MultiIndex::all_of_order(p, level)
            .into_iter()
            .flat_map(|j| (0..q).map(move |a| (j.clone(), a)))
            .collect();
        let computed = par::try_map(&targets, |(j, a)| {
            let first = j.first_nonzero().expect("nonzero order");
            let primary = step(space, x, mu, &dxi, &coeffs, j, first, *a)?;
            let last = p - 1 - j.counts().iter().rev().position(|&c| c > 0).expect("nonzero");
            if last != first {
                let alt = step(space, x, mu, &dxi, &coeffs, j, last, *a)?;
                if alt != primary {
                    return Err(Error::IncompatibleTwist(format!(
                        "coefficient of {}{:?} depends on the recursion path",
                        space.dependents()[*a],
                        j
                    )));
                }
            }
            Ok(primary)
        })?;
        for (key, e) in targets.into_iter().zip(computed) {
            coeffs.insert(key, e);
        }
    }
    Ok(ProlongedField {
        base: x.clone(),
        order: k,
        coeffs,
    })
}

/// Ψ^a_J obtained from the coefficients at J − e_i by one step in direction i.
#[allow(clippy::too_many_arguments)]
fn step(
    space: &JetSpace,
    x: &VectorField,
    mu: Option<&TwistForm>,
    dxi: &[Vec<Expr>],
    coeffs: &BTreeMap<(MultiIndex, usize), Expr>,
    j: &MultiIndex,
    i: usize,
    a: usize,
) -> Result<Expr> {
    let parent = j.decrement(i).expect("direction present in multi-index");
    let mut out = space.total_derivative(&coeffs[&(parent.clone(), a)], i)?;
    for (m, d) in dxi[i].iter().enumerate() {
        if !d.is_zero() {
            let u = space.coordinate(a, &parent.increment(m))?;
            out = &out - &(&u * d);
        }
    }
    let Some(mu) = mu else {
        return Ok(out);
    };
    let lam = mu.lambda(i);
    for b in 0..space.q() {
        let l = lam.get(a, b);
        if l.is_zero() {
            continue;
        }
        // Ψ^b_J − ξ^m u^b_{J,m}
        let mut v = coeffs[&(parent.clone(), b)].clone();
        for (m, xi) in x.xi().iter().enumerate() {
            if !xi.is_zero() {
                v = &v - &(xi * &space.coordinate(b, &parent.increment(m))?);
            }
        }
        out = &out + &(l * &v);
    }
    Ok(out)
}

/// Difference between the two recursion paths for the coefficient of u^a_J
/// (last step on the smallest versus the largest variable index). Zero when
/// the twist is compatible.
pub fn path_discrepancy(
    space: &JetSpace,
    x: &VectorField,
    mu: &TwistForm,
    a: usize,
    j: &MultiIndex,
) -> Result<Expr> {
    let path = |last_first: bool| -> Result<Expr> {
        let mut coeffs = BTreeMap::new();
        for b in 0..space.q() {
            coeffs.insert((MultiIndex::zero(space.p()), b), x.phi()[b].clone());
        }
        let dxi: Vec<Vec<Expr>> = (0..space.p())
            .map(|i| {
                x.xi()
                    .iter()
                    .map(|e| space.total_derivative(e, i))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        // Steps in the order the path applies them.
        let mut dirs: Vec<usize> = j
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
            .collect();
        if last_first {
            dirs.reverse();
        }
        let mut cur = MultiIndex::zero(space.p());
        for i in dirs {
            let next = cur.increment(i);
            let vals = (0..space.q())
                .map(|b| step(space, x, Some(mu), &dxi, &coeffs, &next, i, b))
                .collect::<Result<Vec<_>>>()?;
            for (b, v) in vals.into_iter().enumerate() {
                coeffs.insert((next.clone(), b), v);
            }
            cur = next;
        }
        Ok(coeffs[&(cur, a)].clone())
    };
    Ok(&path(true)? - &path(false)?)
}

#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub holds: bool,
    /// R_ik = D_iΛ_k − D_kΛ_i + [Λ_i, Λ_k] for each pair i < k.
    pub residuals: Vec<((usize, usize), Matrix)>,
}

pub fn check_compatibility(space: &JetSpace, mu: &TwistForm) -> Result<CompatibilityReport> {
    let p = space.p();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |k| (i, k)))
        .collect();
    let residuals = par::try_map(&pairs, |&(i, k)| {
        let (li, lk) = (mu.lambda(i), mu.lambda(k));
        let di_lk = lk.try_map(|e| space.total_derivative(e, i))?;
        let dk_li = li.try_map(|e| space.total_derivative(e, k))?;
        let r = di_lk.sub(&dk_li)?.add(&li.commutator(lk)?)?;
        Ok(((i, k), r))
    })?;
    Ok(CompatibilityReport {
        holds: residuals.iter().all(|(_, r)| r.is_zero()),
        residuals,
    })
}
