//! Seeded random generators for expressions, fields, Lagrangians, gauge
//! matrices and twists. Used by the property suites and the bench.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{Expr, FunctionDecl};
use crate::jet::{JetSpace, MultiIndex, VectorField};
use crate::matrix::Matrix;
use crate::prolong::TwistForm;

/// Independent variables followed by every u^a_J with |J| ≤ `max_order`.
pub fn coordinates(space: &JetSpace, max_order: u32) -> Vec<Expr> {
    let mut out: Vec<Expr> = (0..space.p()).map(|i| space.x(i)).collect();
    for k in 0..=max_order.min(space.order()) {
        for j in MultiIndex::all_of_order(space.p(), k) {
            for a in 0..space.q() {
                out.push(space.coordinate(a, &j).expect("order checked"));
            }
        }
    }
    out
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn small_int(&mut self) -> i64 {
        let n = self.rng.gen_range(1..=5);
        if self.rng.gen_bool(0.5) {
            -n
        } else {
            n
        }
    }

    /// A nonzero rational with small numerator and denominator.
    pub fn rational(&mut self) -> Expr {
        let n = self.small_int();
        Expr::rational(n, self.rng.gen_range(1..=3))
    }

    pub fn monomial(&mut self, atoms: &[Expr], max_deg: u32) -> Expr {
        let deg = self.rng.gen_range(0..=max_deg);
        let mut m = self.rational();
        for _ in 0..deg {
            m = &m * atoms.choose(&mut self.rng).expect("atoms");
        }
        m
    }

    pub fn polynomial(&mut self, atoms: &[Expr], terms: usize, max_deg: u32) -> Expr {
        let ms: Vec<Expr> = (0..terms).map(|_| self.monomial(atoms, max_deg)).collect();
        Expr::sum(&ms)
    }

    /// A random expression tree over `leaves` with sums, products, small
    /// powers, quotients by strictly positive denominators and applications
    /// of `funcs`.
    pub fn tree(&mut self, leaves: &[Expr], funcs: &[Arc<FunctionDecl>], depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return if self.rng.gen_bool(0.8) {
                leaves.choose(&mut self.rng).expect("leaves").clone()
            } else {
                self.rational()
            };
        }
        let choice = self.rng.gen_range(0..if funcs.is_empty() { 5 } else { 6 });
        match choice {
            0 => self.tree(leaves, funcs, depth - 1) + self.tree(leaves, funcs, depth - 1),
            1 => self.tree(leaves, funcs, depth - 1) - self.tree(leaves, funcs, depth - 1),
            2 => self.tree(leaves, funcs, depth - 1) * self.tree(leaves, funcs, depth - 1),
            3 => {
                let e = self.rng.gen_range(2..=3);
                self.tree(leaves, funcs, depth - 1).pow(e).expect("positive power")
            }
            4 => {
                let n = self.tree(leaves, funcs, depth - 1);
                let d = self.tree(leaves, funcs, depth - 1);
                let d = &(&d * &d) + &Expr::one();
                n.checked_div(&d).expect("positive denominator")
            }
            _ => {
                let f = funcs.choose(&mut self.rng).expect("funcs").clone();
                let args = (0..f.arity())
                    .map(|_| self.tree(leaves, funcs, depth - 1))
                    .collect();
                Expr::apply(&f, args).expect("arity matches")
            }
        }
    }

    /// A field whose components are polynomials on J⁰.
    pub fn field(&mut self, space: &JetSpace, vertical: bool, max_deg: u32) -> VectorField {
        let base = coordinates(space, 0);
        let xi = (0..space.p())
            .map(|_| {
                if vertical {
                    Expr::zero()
                } else {
                    self.polynomial(&base, 2, max_deg)
                }
            })
            .collect();
        let phi = (0..space.q())
            .map(|_| self.polynomial(&base, 3, max_deg))
            .collect();
        VectorField::new(space, xi, phi).expect("dimensions match")
    }

    /// A polynomial Lagrangian on J¹ with at least one quadratic term in
    /// first derivatives.
    pub fn lagrangian(&mut self, space: &JetSpace, max_deg: u32) -> Expr {
        let all = coordinates(space, 1);
        let l = self.polynomial(&all, 4, max_deg);
        let a = self.rng.gen_range(0..space.q());
        let i = self.rng.gen_range(0..space.p());
        let du = space.du(a, i);
        &l + &(&du * &du)
    }

    /// A product of elementary matrices I + p·E_ij with p polynomial on J⁰,
    /// so the determinant is 1 and the inverse is polynomial.
    pub fn unimodular(&mut self, space: &JetSpace, steps: usize, max_deg: u32) -> Matrix {
        let n = space.q();
        let base = coordinates(space, 0);
        let mut r = Matrix::identity(n);
        if n < 2 {
            return r;
        }
        for _ in 0..steps {
            let i = self.rng.gen_range(0..n);
            let mut j = self.rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut e = Matrix::identity(n);
            e.set(i, j, self.polynomial(&base, 2, max_deg));
            r = r.mul(&e).expect("square");
        }
        r
    }

    /// Λ_i = S⁻¹ D_iS for a random unimodular S; compatible by construction.
    pub fn darboux_twist(&mut self, space: &JetSpace) -> Result<TwistForm> {
        let s = self.unimodular(space, space.q() + 1, 1);
        TwistForm::darboux(space, &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let s = JetSpace::new(&["t"], &["u", "v"], 2).unwrap();
        let leaves = coordinates(&s, 1);
        let a = Gen::new(7).tree(&leaves, &[], 4);
        let b = Gen::new(7).tree(&leaves, &[], 4);
        assert_eq!(a, b);
    }

    #[test]
    fn unimodular_has_unit_determinant() {
        let s = JetSpace::new(&["t"], &["u", "v", "w"], 2).unwrap();
        let mut g = Gen::new(3);
        for _ in 0..5 {
            let r = g.unimodular(&s, 4, 2);
            assert!(r.determinant().unwrap().is_one());
            assert!(r.inverse().unwrap().entries().iter().all(Expr::is_polynomial));
        }
    }
}
