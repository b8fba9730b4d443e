//! Symmetry verdicts, brackets of vector fields, structure constants and
//! solvability.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{diff_partial, Atom, Coeff, Expr};
use crate::jet::{evolutionary, JetSpace, MultiIndex, VectorField};
use crate::matrix::Matrix;
use crate::par;
use crate::prolong::{prolong_standard, prolong_twisted, ProlongedField, TwistForm};

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub field: String,
    pub twisted: bool,
    pub residual: Expr,
    pub verdict: bool,
}

/// Residual of the first (twisted) prolongation of the evolutionary form of
/// `x` applied to the Lagrangian.
pub fn symmetry_residual(
    space: &JetSpace,
    lagrangian: &Expr,
    x: &VectorField,
    mu: Option<&TwistForm>,
    name: &str,
) -> Result<SymmetryReport> {
    let q = evolutionary(space, x);
    let pf = match mu {
        Some(mu) => prolong_twisted(space, &q, mu, 1)?,
        None => prolong_standard(space, &q, 1)?,
    };
    let residual = pf.apply(space, lagrangian)?;
    Ok(SymmetryReport {
        field: name.to_string(),
        twisted: mu.is_some(),
        verdict: residual.is_zero(),
        residual,
    })
}

fn require_point_field(space: &JetSpace, x: &VectorField) -> Result<()> {
    let order = x
        .xi()
        .iter()
        .chain(x.phi())
        .map(|e| space.jet_order(e))
        .max()
        .unwrap_or(0);
    if order > 0 {
        return Err(Error::Domain(
            "brackets need components depending on independent and dependent variables only"
                .into(),
        ));
    }
    Ok(())
}

/// X(e) for a field on the base space.
fn act(space: &JetSpace, x: &VectorField, e: &Expr) -> Expr {
    let mut acc = Expr::zero();
    for (i, xi) in x.xi().iter().enumerate() {
        if !xi.is_zero() {
            acc = &acc + &(xi * &diff_partial(e, space.independents()[i].as_ref()));
        }
    }
    for (a, phi) in x.phi().iter().enumerate() {
        if !phi.is_zero() {
            acc = &acc + &(phi * &space.partial(e, a, &MultiIndex::zero(space.p())).expect("order 0"));
        }
    }
    acc
}

/// Lie bracket [A, B] of fields on the base space; for vertical fields the
/// components are φ^j_A ∂φ^i_B/∂u^j − φ^j_B ∂φ^i_A/∂u^j.
pub fn commutator(space: &JetSpace, a: &VectorField, b: &VectorField) -> Result<VectorField> {
    require_point_field(space, a)?;
    require_point_field(space, b)?;
    let comp = |ea: &Expr, eb: &Expr| &act(space, a, eb) - &act(space, b, ea);
    let xi = a.xi().iter().zip(b.xi()).map(|(x, y)| comp(x, y)).collect();
    let phi = a.phi().iter().zip(b.phi()).map(|(x, y)| comp(x, y)).collect();
    VectorField::new(space, xi, phi)
}

/// Plain bracket of vertical component vectors.
pub fn component_bracket(space: &JetSpace, a: &[Expr], b: &[Expr]) -> Result<Vec<Expr>> {
    let fa = VectorField::vertical(space, a.to_vec())?;
    let fb = VectorField::vertical(space, b.to_vec())?;
    Ok(commutator(space, &fa, &fb)?.phi().to_vec())
}

/// {a, b}_(S) = {S a, S b}.
pub fn deformed_bracket(space: &JetSpace, a: &[Expr], b: &[Expr], s: &Matrix) -> Result<Vec<Expr>> {
    s.inverse()?;
    component_bracket(space, &s.mul_vec(a)?, &s.mul_vec(b)?)
}

#[derive(Clone, Debug)]
pub struct ProlongedCommutator {
    /// Components of [A, B] on the base.
    pub base: VectorField,
    /// Coefficients of [A^(k), B^(k)] along ∂/∂u^a_J, |J| ≥ 1.
    pub coefficients: Vec<(usize, MultiIndex, Expr)>,
    /// Standard case only: whether the coefficients equal those of the
    /// prolongation of [A, B].
    pub matches_prolongation: Option<bool>,
}

impl ProlongedCommutator {
    pub fn is_zero(&self) -> bool {
        self.base.xi().iter().chain(self.base.phi()).all(Expr::is_zero)
            && self.coefficients.iter().all(|(_, _, e)| e.is_zero())
    }
}

pub fn prolonged_commutator(
    space: &JetSpace,
    a: &VectorField,
    b: &VectorField,
    mu: Option<&TwistForm>,
    k: u32,
) -> Result<ProlongedCommutator> {
    let base = commutator(space, a, b)?;
    let prolong = |x: &VectorField| -> Result<ProlongedField> {
        match mu {
            Some(mu) => prolong_twisted(space, x, mu, k),
            None => prolong_standard(space, x, k),
        }
    };
    let (pa, pb) = (prolong(a)?, prolong(b)?);
    let targets = pa.coefficients();
    let coefficients = par::try_map(&targets, |(c, j, ea)| {
        let eb = pb.coefficient(*c, j).expect("same shape");
        Ok::<_, Error>((*c, j.clone(), &pa.apply(space, eb)? - &pb.apply(space, ea)?))
    })?;
    let matches_prolongation = match mu {
        Some(_) => None,
        None => {
            let pc = prolong_standard(space, &base, k)?;
            Some(
                coefficients
                    .iter()
                    .all(|(c, j, e)| pc.coefficient(*c, j) == Some(e)),
            )
        }
    };
    Ok(ProlongedCommutator {
        base,
        coefficients,
        matches_prolongation,
    })
}

#[derive(Clone, Debug)]
pub enum Bracket {
    Plain,
    /// Component vectors b_a are mapped to S b_a before bracketing, and the
    /// result is expanded in the S b_k.
    Deformed(Matrix),
}

#[derive(Clone, Debug)]
pub struct AlgebraStructure {
    pub dim: usize,
    pub deformed: bool,
    /// c[a][b][k] with [e_a, e_b] = c^k_{ab} e_k, when the bracket closes.
    pub constants: Option<Vec<Vec<Vec<Coeff>>>>,
    /// Dimensions of g, [g,g], [[g,g],[g,g]], ... until it stabilises.
    pub derived_series: Vec<usize>,
    pub solvable: Option<bool>,
    pub abelian: Option<bool>,
    pub failure: Option<String>,
}

const SEED: u64 = 0x7477_6973_746a_6574;

pub fn algebra_structure(
    space: &JetSpace,
    fields: &[VectorField],
    bracket: &Bracket,
) -> Result<AlgebraStructure> {
    let n = fields.len();
    for f in fields {
        if !f.is_vertical() {
            return Err(Error::Domain("algebra basis must consist of vertical fields".into()));
        }
        require_point_field(space, f)?;
    }
    let images: Vec<Vec<Expr>> = match bracket {
        Bracket::Plain => fields.iter().map(|f| f.phi().to_vec()).collect(),
        Bracket::Deformed(s) => {
            s.inverse()?;
            fields
                .iter()
                .map(|f| s.mul_vec(f.phi()))
                .collect::<Result<_>>()?
        }
    };
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let brackets = par::try_map(&pairs, |&(a, b)| component_bracket(space, &images[a], &images[b]))?;

    let mut out = AlgebraStructure {
        dim: n,
        deformed: matches!(bracket, Bracket::Deformed(_)),
        constants: None,
        derived_series: Vec::new(),
        solvable: None,
        abelian: None,
        failure: None,
    };
    let mut c = vec![vec![vec![Coeff::zero(); n]; n]; n];
    for (&(a, b), v) in pairs.iter().zip(&brackets) {
        match expand(&images, v) {
            Ok(coeffs) => {
                for k in 0..n {
                    c[b][a][k] = -coeffs[k].clone();
                    c[a][b][k] = coeffs[k].clone();
                }
            }
            Err(reason) => {
                out.failure = Some(format!(
                    "bracket of fields {} and {} does not close: {reason}",
                    a + 1,
                    b + 1
                ));
                return Ok(out);
            }
        }
    }
    out.derived_series = derived_series(&c);
    out.solvable = Some(out.derived_series.last() == Some(&0));
    out.abelian = Some(c.iter().flatten().flatten().all(Zero::is_zero));
    out.constants = Some(c);
    Ok(out)
}

/// Rational coefficients c with v = Σ c_k w_k, found from random evaluations
/// and then verified exactly.
fn expand(basis: &[Vec<Expr>], v: &[Expr]) -> std::result::Result<Vec<Coeff>, String> {
    let n = basis.len();
    if v.iter().all(Expr::is_zero) {
        return Ok(vec![Coeff::zero(); n]);
    }
    let mut atoms = std::collections::BTreeSet::new();
    for e in basis.iter().flatten().chain(v) {
        atoms.extend(e.atoms());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut rows: Vec<Vec<Coeff>> = Vec::new();
    let wanted = n + 4;
    let mut points = 0;
    let mut attempts = 0;
    while points < wanted {
        attempts += 1;
        if attempts > 50 * wanted {
            return Err("no regular evaluation points found".into());
        }
        let values: BTreeMap<Atom, Coeff> = atoms
            .iter()
            .map(|a| (a.clone(), random_rational(&mut rng)))
            .collect();
        let eval = |e: &Expr| e.eval_rational(&|a| values.get(a).cloned());
        let mut block = Vec::new();
        let mut ok = true;
        for (comp, target) in v.iter().enumerate() {
            let mut row = Vec::with_capacity(n + 1);
            for w in basis {
                match eval(&w[comp]) {
                    Some(x) => row.push(x),
                    None => ok = false,
                }
            }
            match eval(target) {
                Some(x) => row.push(x),
                None => ok = false,
            }
            block.push(row);
        }
        if ok {
            rows.extend(block);
            points += 1;
        }
    }
    let coeffs = solve_rational(rows, n)?;
    let mut residual = v.to_vec();
    for (k, w) in basis.iter().enumerate() {
        let ck = Expr::constant(coeffs[k].clone());
        for (r, wc) in residual.iter_mut().zip(w) {
            *r = &*r - &(&ck * wc);
        }
    }
    if residual.iter().all(Expr::is_zero) {
        Ok(coeffs)
    } else {
        Err("no constant structure coefficients".into())
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Coeff {
    let n: i64 = rng.gen_range(-60..=60);
    let d: i64 = rng.gen_range(1..=13);
    Coeff::new(n.into(), d.into())
}

/// Solves an overdetermined augmented system (last column is the right-hand
/// side) exactly; fails if it is inconsistent or underdetermined.
fn solve_rational(mut rows: Vec<Vec<Coeff>>, n: usize) -> std::result::Result<Vec<Coeff>, String> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..=n {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return Err("no constant structure coefficients".into());
    }
    if pivots.len() < n {
        return Err("basis fields are linearly dependent".into());
    }
    Ok((0..n).map(|i| rows[i][n].clone()).collect())
}

/// Row-reduces and returns a basis of the row space.
fn row_basis(mut rows: Vec<Vec<Coeff>>) -> Vec<Vec<Coeff>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return rows;
    };
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..width {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

fn derived_series(c: &[Vec<Vec<Coeff>>]) -> Vec<usize> {
    let n = c.len();
    let bracket = |x: &[Coeff], y: &[Coeff]| -> Vec<Coeff> {
        let mut out = vec![Coeff::zero(); n];
        for a in 0..n {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..n {
                if y[b].is_zero() {
                    continue;
                }
                let w = &x[a] * &y[b];
                for k in 0..n {
                    out[k] += &w * &c[a][b][k];
                }
            }
        }
        out
    };
    let mut current: Vec<Vec<Coeff>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect())
        .collect();
    let mut dims = vec![n];
    while !current.is_empty() {
        let mut next = Vec::new();
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let v = bracket(&current[i], &current[j]);
                if v.iter().any(|x| !x.is_zero()) {
                    next.push(v);
                }
            }
        }
        let next = row_basis(next);
        let stalled = next.len() == current.len();
        dims.push(next.len());
        if stalled {
            break;
        }
        current = next;
    }
    dims
}

/// Formats a rational for reports.
pub fn coeff_string(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else if c.is_negative() {
        format!("-{}/{}", c.numer().abs(), c.denom())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}
