//! Double-precision evaluation of expressions, fixed-step RK4 integration of
//! normal forms, conserved-quantity drift and finite-difference checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num::ToPrimitive;

use crate::error::{Error, Result};
use crate::expr::{diff_partial, Atom, Expr, Poly};
use crate::jet::{JetSpace, MultiIndex};
use crate::par;
use crate::variational::NormalForm;

/// Denominators smaller than this abort evaluation.
pub const SINGULARITY_THRESHOLD: f64 = 1e-9;

/// Numeric stand-ins for opaque functions of one argument.
#[derive(Clone, Debug, PartialEq)]
pub enum Implementation {
    Identity,
    Constant(f64),
    /// a·x^k
    Power { coeff: f64, exponent: f64 },
    /// a·exp(b·x)
    ExpLinear { coeff: f64, rate: f64 },
}

impl Implementation {
    /// n-th derivative at x.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        match *self {
            Implementation::Identity => match n {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            },
            Implementation::Constant(c) => {
                if n == 0 {
                    c
                } else {
                    0.0
                }
            }
            Implementation::Power { coeff, exponent } => {
                let mut c = coeff;
                for i in 0..n {
                    c *= exponent - i as f64;
                }
                if c == 0.0 {
                    return 0.0;
                }
                let e = exponent - n as f64;
                if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
                    c * x.powi(e as i32)
                } else {
                    c * x.powf(e)
                }
            }
            Implementation::ExpLinear { coeff, rate } => {
                coeff * rate.powi(n as i32) * (rate * x).exp()
            }
        }
    }
}

pub type Catalog = BTreeMap<String, Implementation>;

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Call {
        imp: Implementation,
        order: usize,
        arg: usize,
    },
    Add(usize, usize),
    Mul(usize, usize),
    Powi(usize, i32),
    /// Checked against the singularity threshold.
    Div(usize, usize),
}

/// Register program for one expression; `out` names the result register.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    out: usize,
    slots: Vec<String>,
}

struct Builder<'a> {
    ops: Vec<Op>,
    slot_index: HashMap<&'a str, usize>,
    params: &'a BTreeMap<String, f64>,
    catalog: &'a Catalog,
    atom_regs: HashMap<Atom, usize>,
    pow_regs: HashMap<(usize, u32), usize>,
}

impl Builder<'_> {
    fn push(&mut self, op: Op) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn atom(&mut self, a: &Atom) -> Result<usize> {
        if let Some(&r) = self.atom_regs.get(a) {
            return Ok(r);
        }
        let r = match a {
            Atom::Sym(s) => {
                if let Some(&i) = self.slot_index.get(&**s) {
                    self.push(Op::Slot(i))
                } else if let Some(&v) = self.params.get(&**s) {
                    self.push(Op::Const(v))
                } else {
                    return Err(Error::MissingImplementation(s.to_string()));
                }
            }
            Atom::App(app) => {
                let name = app.func().name();
                let imp = self
                    .catalog
                    .get(name)
                    .ok_or_else(|| Error::MissingImplementation(app.label().to_string()))?
                    .clone();
                if app.args().len() != 1 {
                    return Err(Error::MissingImplementation(app.label().to_string()));
                }
                let arg = self.expr(&app.args()[0])?;
                self.push(Op::Call {
                    imp,
                    order: app.slots().len(),
                    arg,
                })
            }
        };
        self.atom_regs.insert(a.clone(), r);
        Ok(r)
    }

    fn power(&mut self, base: usize, k: u32) -> usize {
        if k == 1 {
            return base;
        }
        if let Some(&r) = self.pow_regs.get(&(base, k)) {
            return r;
        }
        let r = self.push(Op::Powi(base, k as i32));
        self.pow_regs.insert((base, k), r);
        r
    }

    fn poly(&mut self, p: &Poly) -> Result<usize> {
        let mut acc: Option<usize> = None;
        for (m, c) in p.terms() {
            let mut term = self.push(Op::Const(c.to_f64().unwrap_or(f64::NAN)));
            for (a, k) in m.factors() {
                let base = self.atom(a)?;
                let pw = self.power(base, *k);
                term = self.push(Op::Mul(term, pw));
            }
            acc = Some(match acc {
                None => term,
                Some(s) => self.push(Op::Add(s, term)),
            });
        }
        Ok(match acc {
            Some(r) => r,
            None => self.push(Op::Const(0.0)),
        })
    }

    fn expr(&mut self, e: &Expr) -> Result<usize> {
        let n = self.poly(e.numer())?;
        if e.denom().is_one() {
            return Ok(n);
        }
        let d = self.poly(e.denom())?;
        Ok(self.push(Op::Div(n, d)))
    }
}

/// Compiles `e` against the ordered input `slots`; parameters are folded in
/// as constants and opaque functions looked up in `catalog`.
pub fn compile(
    e: &Expr,
    slots: &[String],
    params: &BTreeMap<String, f64>,
    catalog: &Catalog,
) -> Result<CompiledExpr> {
    let mut b = Builder {
        ops: Vec::new(),
        slot_index: slots.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect(),
        params,
        catalog,
        atom_regs: HashMap::new(),
        pow_regs: HashMap::new(),
    };
    let out = b.expr(e)?;
    Ok(CompiledExpr {
        ops: b.ops,
        out,
        slots: slots.to_vec(),
    })
}

impl CompiledExpr {
    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    /// Value at `state`, or the offending denominator when one falls below
    /// the singularity threshold.
    pub fn eval(&self, state: &[f64]) -> std::result::Result<f64, f64> {
        let mut regs = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Slot(i) => state[*i],
                Op::Call { imp, order, arg } => imp.eval(*order, regs[*arg]),
                Op::Add(a, b) => regs[*a] + regs[*b],
                Op::Mul(a, b) => regs[*a] * regs[*b],
                Op::Powi(a, k) => f64::powi(regs[*a], *k),
                Op::Div(a, b) => {
                    let d: f64 = regs[*b];
                    if d.abs() < SINGULARITY_THRESHOLD {
                        return Err(d);
                    }
                    regs[*a] / d
                }
            };
            regs.push(v);
        }
        Ok(regs[self.out])
    }
}

/// Time-sampled states (q, q̇) on a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dim: usize,
    pub step: f64,
    pub integrator: &'static str,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for i in 1..=self.dim {
            write!(s, ",q{i}").unwrap();
        }
        for i in 1..=self.dim {
            write!(s, ",qd{i}").unwrap();
        }
        s.push('\n');
        for (t, y) in self.times.iter().zip(&self.states) {
            write!(s, "{t:.16e}").unwrap();
            for v in y {
                write!(s, ",{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Input vector `t, q.., q'..` at sample `n`.
    pub fn input(&self, n: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.states[n].len());
        v.push(self.times[n]);
        v.extend_from_slice(&self.states[n]);
        v
    }
}

/// Input slot names `t, q^a, q'^a` of a mechanical jet space.
pub fn state_slots(space: &JetSpace) -> Vec<String> {
    let mut v = vec![space.independents()[0].to_string()];
    for k in 0..2 {
        for a in 0..space.q() {
            v.push(
                space
                    .coordinate_name(a, &MultiIndex::new(vec![k]))
                    .expect("order 1 declared")
                    .to_string(),
            );
        }
    }
    v
}

pub struct Integrator {
    rhs: Vec<CompiledExpr>,
    dim: usize,
}

impl Integrator {
    pub fn new(
        space: &JetSpace,
        nf: &NormalForm,
        params: &BTreeMap<String, f64>,
        catalog: &Catalog,
    ) -> Result<Integrator> {
        if space.p() != 1 {
            return Err(Error::Domain("integration needs one independent variable".into()));
        }
        let slots = state_slots(space);
        let rhs = nf
            .solutions
            .iter()
            .map(|e| compile(e, &slots, params, catalog))
            .collect::<Result<_>>()?;
        Ok(Integrator {
            rhs,
            dim: space.q(),
        })
    }

    fn field(&self, t: f64, y: &[f64], out: &mut [f64]) -> std::result::Result<(), f64> {
        let n = self.dim;
        let mut input = Vec::with_capacity(1 + 2 * n);
        input.push(t);
        input.extend_from_slice(y);
        out[..n].copy_from_slice(&y[n..]);
        for (a, f) in self.rhs.iter().enumerate() {
            out[n + a] = f.eval(&input)?;
        }
        Ok(())
    }

    /// Classical fixed-step RK4 from `t0` to `t_end`.
    pub fn integrate(&self, ic: &[f64], t0: f64, t_end: f64, h: f64) -> Result<Trajectory> {
        let n = self.dim;
        if ic.len() != 2 * n {
            return Err(Error::Dimension(format!(
                "initial condition needs {} values, got {}",
                2 * n,
                ic.len()
            )));
        }
        if !(h > 0.0) || !(t_end > t0) {
            return Err(Error::Usage("need step > 0 and t_end > t0".into()));
        }
        let steps = ((t_end - t0) / h).round() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        let mut y = ic.to_vec();
        times.push(t0);
        states.push(y.clone());
        let m = 2 * n;
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut tmp = vec![0.0; m];
        for step in 0..steps {
            let t = t0 + step as f64 * h;
            let sing = |value: f64| Error::NumericSingularity { index: step, value };
            self.field(t, &y, &mut k1).map_err(sing)?;
            for i in 0..m {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            self.field(t + 0.5 * h, &tmp, &mut k2).map_err(sing)?;
            for i in 0..m {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            self.field(t + 0.5 * h, &tmp, &mut k3).map_err(sing)?;
            for i in 0..m {
                tmp[i] = y[i] + h * k3[i];
            }
            self.field(t + h, &tmp, &mut k4).map_err(sing)?;
            for i in 0..m {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: step });
            }
            times.push(t0 + (step + 1) as f64 * h);
            states.push(y.clone());
        }
        Ok(Trajectory {
            times,
            states,
            dim: n,
            step: h,
            integrator: "rk4",
        })
    }
}

pub fn integrate(
    space: &JetSpace,
    nf: &NormalForm,
    params: &BTreeMap<String, f64>,
    catalog: &Catalog,
    ic: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    Integrator::new(space, nf, params, catalog)?.integrate(ic, 0.0, t_end, h)
}

/// Values of a compiled quantity at every sample of a trajectory.
pub fn sample(c: &CompiledExpr, traj: &Trajectory) -> Result<Vec<f64>> {
    par::try_map_range(traj.times.len(), |n| {
        c.eval(&traj.input(n))
            .map_err(|value| Error::NumericSingularity { index: n, value })
    })
}

#[derive(Clone, Debug)]
pub struct Drift {
    pub initial: f64,
    pub max_abs: f64,
    pub relative: f64,
}

/// max_t |J(t) − J(0)|, absolute and relative to |J(0)|.
pub fn drift(c: &CompiledExpr, traj: &Trajectory) -> Result<Drift> {
    let v = sample(c, traj)?;
    let j0 = v[0];
    let max_abs = v.iter().map(|x| (x - j0).abs()).fold(0.0, f64::max);
    let relative = if j0 != 0.0 {
        max_abs / j0.abs()
    } else if max_abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Drift {
        initial: j0,
        max_abs,
        relative,
    })
}

/// Largest pointwise relative mismatch between the central-difference rate of
/// `j` along `traj` and the compiled `rate`, over interior samples.
pub fn rate_mismatch(j: &CompiledExpr, rate: &CompiledExpr, traj: &Trajectory) -> Result<f64> {
    let jv = sample(j, traj)?;
    let rv = sample(rate, traj)?;
    let h = traj.step;
    let mut worst: f64 = 0.0;
    for n in 1..jv.len().saturating_sub(1) {
        let fd = (jv[n + 1] - jv[n - 1]) / (2.0 * h);
        let scale = rv[n].abs().max(f64::MIN_POSITIVE);
        worst = worst.max((fd - rv[n]).abs() / scale);
    }
    Ok(worst)
}

/// Central difference of `e` in `v` against the compiled exact partial,
/// as a relative error floored at unit scale. Points give values for `slots`.
pub fn fd_check(
    e: &Expr,
    v: &str,
    slots: &[String],
    points: &[Vec<f64>],
    params: &BTreeMap<String, f64>,
    catalog: &Catalog,
) -> Result<f64> {
    let idx = slots
        .iter()
        .position(|s| s == v)
        .ok_or_else(|| Error::Usage(format!("`{v}` is not an input slot")))?;
    let f = compile(e, slots, params, catalog)?;
    let df = compile(&diff_partial(e, v), slots, params, catalog)?;
    let errs = par::try_map(points, |pt| {
        let sing = |value| Error::NumericSingularity { index: 0, value };
        let x = pt[idx];
        let h = 1e-6 * x.abs().max(1.0);
        let mut up = pt.clone();
        up[idx] = x + h;
        let mut dn = pt.clone();
        dn[idx] = x - h;
        let fd = (f.eval(&up).map_err(sing)? - f.eval(&dn).map_err(sing)?) / (2.0 * h);
        let exact = df.eval(pt).map_err(sing)?;
        Ok::<_, Error>((fd - exact).abs() / exact.abs().max(1.0))
    })?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}
