//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use twistjet::expr::FunctionDecl;
use twistjet::gauge::{check_gauge_relation, gauge_twist, lambda_from_r, GaugeMatrix};
use twistjet::gen::Gen;
use twistjet::jet::{JetSpace, MultiIndex, VectorField};
use twistjet::numeric::{compile, drift, rate_mismatch, state_slots, Integrator};
use twistjet::problem::Problem;
use twistjet::prolong::{check_compatibility, path_discrepancy, prolong_standard, prolong_twisted};
use twistjet::symmetry::{algebra_structure, commutator, prolonged_commutator, symmetry_residual, Bracket};
use twistjet::variational::{
    conservation_residual, conserved_current, conserved_quantity, euler_lagrange,
    solve_accelerations, twisted_euler_lagrange, ConservedObject, VariationalProblem,
};
use twistjet::{Expr, Matrix, TwistForm};

const DRIFT_TWISTED_MAX: f64 = 1e-8;
const DRIFT_STANDARD_MIN: f64 = 1e-3;
const RATE_MISMATCH_MAX: f64 = 1e-4;
const RK4_RATIO: (f64, f64) = (12.0, 20.0);

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn load(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    Problem::from_toml(&std::fs::read_to_string(path).expect("shipped problem")).expect("valid problem")
}

fn appendix_golden() -> Check {
    let a = Appendix::new();
    let l = &a.lagrangian;
    let s = &a.space;
    ensure(e(symmetry_residual(s, l, &a.x, None, "X"))?.verdict, || "X(1) L != 0".into())?;
    let ry = e(symmetry_residual(s, l, &a.y, None, "Y"))?;
    ensure(ry.residual == a.parse(Y_STANDARD_RESIDUAL), || format!("Y(1) L = {}", ry.residual))?;

    let one = MultiIndex::new(vec![1]);
    let yl = e(prolong_twisted(s, &a.y, &a.mu, 1))?;
    let want = ["x'", "y'", "-2*(z' + {r2}*z*{F})"];
    for (k, w) in want.iter().enumerate() {
        ensure(yl.coefficient(k, &one) == Some(&a.parse(w)), || format!("twisted Y psi[{k}]"))?;
    }
    let xl = e(prolong_twisted(s, &a.x, &a.mu, 1))?;
    let want = ["-y'", "x'", "0"];
    for (k, w) in want.iter().enumerate() {
        ensure(xl.coefficient(k, &one) == Some(&a.parse(w)), || format!("twisted X psi[{k}]"))?;
    }

    let c = e(commutator(s, &a.x, &a.y))?;
    ensure(c.phi().iter().all(Expr::is_zero), || "[X,Y] != 0".into())?;
    ensure(e(prolonged_commutator(s, &a.x, &a.y, None, 1))?.is_zero(), || "[X(1),Y(1)] != 0".into())?;
    ensure(e(prolonged_commutator(s, &a.x, &a.y, Some(&a.mu), 1))?.is_zero(), || "twisted commutator != 0".into())?;
    for (f, n) in [(&a.x, "X"), (&a.y, "Y")] {
        ensure(e(symmetry_residual(s, l, f, Some(&a.mu), n))?.verdict, || format!("{n}_mu(1) L != 0"))?;
    }

    let p = e(VariationalProblem::new(s, l.clone(), Some(a.mu.clone())))?;
    let jx = e(conserved_quantity(&p, &a.x, "X", true))?;
    let jy = e(conserved_quantity(&p, &a.y, "Y", true))?;
    ensure(jx.components[0] == a.parse(J_X), || "J_X".into())?;
    ensure(jy.components[0] == a.parse(J_Y), || "J_Y".into())?;
    let tel = e(twisted_euler_lagrange(&p))?;
    for (got, want) in tel.lhs.iter().zip(TWISTED_EL) {
        ensure(*got == a.parse(want), || "twisted EL".into())?;
    }
    let nf = e(solve_accelerations(s, &tel))?;
    for (got, want) in nf.solutions.iter().zip(ACCELERATIONS) {
        ensure(*got == a.parse(want), || "solved accelerations".into())?;
    }
    for j in [&jx, &jy] {
        ensure(e(conservation_residual(s, j, &nf))?.is_zero(), || format!("D_t J_{} != 0", j.field))?;
    }
    let std = e(solve_accelerations(s, &e(euler_lagrange(&p))?))?;
    let r = e(conservation_residual(s, &jy, &std))?;
    ensure(r == a.parse(J_Y_STANDARD_RESIDUAL), || format!("standard residual of J_Y = {r}"))?;

    let w_space = e(JetSpace::new(&["t"], &["xi", "eta", "zeta"], 2))?;
    let lw = e(w_space.parse("(1/2)*zeta'*(xi'^2 + eta'^2)"))?;
    let w = e(VectorField::parse(&w_space, &["0"], &["xi", "eta", "-2*zeta"]))?;
    ensure(e(symmetry_residual(&w_space, &lw, &w, None, "W"))?.verdict, || "W(1) L != 0".into())?;
    Ok("exact".into())
}

fn degeneration() -> Check {
    let mut g = Gen::new(0xd0);
    let names = ["u", "v", "w"];
    for n in 0..100 {
        let q = 1 + n % 3;
        let k = 1 + (n / 3) as u32 % 3;
        let s = e(JetSpace::new(&["t"], &names[..q], k))?;
        let x = g.field(&s, n % 2 == 0, 2);
        let zero = TwistForm::zero(&s);
        let std = e(prolong_standard(&s, &x, k))?;
        ensure(e(prolong_twisted(&s, &x, &zero, k))? == std, || format!("field {n} (q={q}, k={k})"))?;
    }
    for n in 0..30 {
        let p = 1 + n % 2;
        let q = 1 + (n / 2) % 2;
        let s = e(JetSpace::new(&["t", "s"][..p], &names[..q], 2))?;
        let l = g.lagrangian(&s, 2);
        let vp = e(VariationalProblem::new(&s, l, Some(TwistForm::zero(&s))))?;
        let (t, st) = (e(twisted_euler_lagrange(&vp))?, e(euler_lagrange(&vp))?);
        ensure(t.lhs == st.lhs, || format!("Lagrangian {n}"))?;
    }
    Ok("100 fields, 30 Lagrangians, exact".into())
}

fn gauge_correspondence() -> Check {
    let mut g = Gen::new(0x6a);
    let names = ["u", "v", "w"];
    let one = MultiIndex::new(vec![1]);
    for n in 0..50 {
        let q = 2 + n % 2;
        let s = e(JetSpace::new(&["t"], &names[..q], 2))?;
        let z = g.field(&s, true, 2);
        let r = e(GaugeMatrix::new(&s, g.unimodular(&s, q + 1, 1)))?;
        let (x, mu) = e(gauge_twist(&s, &z, &r))?;
        let dz: Vec<Expr> = e(z.phi().iter().map(|p| s.total_derivative(p, 0)).collect())?;
        let want = e(r.matrix().mul_vec(&dz))?;
        let pf = e(prolong_twisted(&s, &x, &mu, 1))?;
        for (a, w) in want.iter().enumerate() {
            ensure(pf.coefficient(a, &one) == Some(w), || format!("case {n}: psi[{a}]"))?;
        }
        ensure(e(lambda_from_r(&s, &r))?.lambdas() == mu.lambdas(), || format!("case {n}: Lambda"))?;
        let res = e(check_gauge_relation(&s, &r, &mu))?;
        ensure(res.iter().all(Matrix::is_zero), || format!("case {n}: gauge relation"))?;
    }
    Ok("50 cases, exact".into())
}

fn compatibility() -> Check {
    let s = e(JetSpace::new(&["x", "y"], &["u", "v"], 3))?;
    let mut g = Gen::new(0xc0);
    for n in 0..3 {
        let mu = e(g.darboux_twist(&s))?;
        ensure(e(check_compatibility(&s, &mu))?.holds, || format!("Darboux twist {n}"))?;
        let x = g.field(&s, true, 1);
        for a in 0..2 {
            let d = e(path_discrepancy(&s, &x, &mu, a, &MultiIndex::new(vec![1, 1])))?;
            ensure(d.is_zero(), || format!("Darboux twist {n}: path discrepancy"))?;
        }
    }
    let s = e(JetSpace::new(&["x", "y"], &["u"], 3))?;
    let lam = vec![e(Matrix::from_rows(vec![vec![e(s.parse("u"))?]]))?, Matrix::zeros(1, 1)];
    let rep = e(check_compatibility(&s, &e(TwistForm::new(&s, lam))?))?;
    ensure(!rep.holds, || "counterexample passes".into())?;
    let r = rep.residuals[0].1.get(0, 0).clone();
    ensure(r == e(s.parse("-u[0,1]"))?, || format!("counterexample residual {r}"))?;
    Ok("exact".into())
}

fn residual_modulo_twisted(vp: &VariationalProblem, c: &ConservedObject) -> std::result::Result<Expr, String> {
    let nf = e(solve_accelerations(vp.space(), &e(twisted_euler_lagrange(vp))?))?;
    e(conservation_residual(vp.space(), c, &nf))
}

fn propositions() -> Check {
    let a = Appendix::new();
    let vp = e(VariationalProblem::new(&a.space, a.lagrangian.clone(), Some(a.mu.clone())))?;
    for (f, n) in [(&a.x, "X"), (&a.y, "Y")] {
        let c = e(conserved_quantity(&vp, f, n, true))?;
        ensure(residual_modulo_twisted(&vp, &c)?.is_zero(), || format!("appendix {n}"))?;
    }

    let p = load("exp_decay.toml");
    let vp = e(VariationalProblem::new(&p.space, e(p.lagrangian())?.clone(), Some(e(p.twist("mu"))?.clone())))?;
    let c = e(conserved_quantity(&vp, e(p.field("X"))?, "X", true))?;
    ensure(residual_modulo_twisted(&vp, &c)?.is_zero(), || "exponential instance".into())?;

    // Wave equation with the shift symmetry carried by R = E(-a t - b x).
    let mut s = e(JetSpace::new(&["t", "x"], &["u"], 2))?;
    e(s.add_parameter("a"))?;
    e(s.add_parameter("b"))?;
    e(s.add_function(e(FunctionDecl::with_rules("E", 1, &["E(_1)"]))?))?;
    let l = e(s.parse("(1/2)*(u[1,0]^2 - u[0,1]^2)"))?;
    let shift = e(VectorField::parse(&s, &["0", "0"], &["1"]))?;
    let r = e(GaugeMatrix::new(&s, e(Matrix::from_rows(vec![vec![e(s.parse("E(-a*t - b*x)"))?]]))?))?;
    let (x, mu) = e(gauge_twist(&s, &shift, &r))?;
    let vp = e(VariationalProblem::new(&s, l, Some(mu)))?;
    let c = e(conserved_current(&vp, &x, "X", true))?;
    ensure(residual_modulo_twisted(&vp, &c)?.is_zero(), || "gauged field theory".into())?;
    Ok("3 fixtures, exact".into())
}

fn numeric() -> Check {
    let mut notes = Vec::new();

    let p = load("exp_decay.toml");
    let vp = e(VariationalProblem::new(&p.space, e(p.lagrangian())?.clone(), Some(e(p.twist("mu"))?.clone())))?;
    let nf = e(solve_accelerations(&p.space, &e(twisted_euler_lagrange(&vp))?))?;
    let int = e(Integrator::new(&p.space, &nf, &p.numeric.parameters, &p.numeric.catalog))?;
    let err = |h: f64| -> std::result::Result<f64, String> {
        let t = e(int.integrate(&[0.0, 1.0], 0.0, 1.0, h))?;
        Ok((t.states.last().unwrap()[1] - std::f64::consts::E).abs())
    };
    let ratio = err(0.1)? / err(0.05)?;
    ensure((RK4_RATIO.0..=RK4_RATIO.1).contains(&ratio), || format!("RK4 ratio {ratio:.2}"))?;
    notes.push(format!("ratio {ratio:.2}"));

    let p = load("appendix_a.toml");
    let (params, catalog) = (&p.numeric.parameters, &p.numeric.catalog);
    let ic = p.numeric.ic.clone().unwrap();
    let (t_end, h) = (p.numeric.t_end.unwrap(), p.numeric.step.unwrap());
    let slots = state_slots(&p.space);
    let vp = e(VariationalProblem::new(&p.space, e(p.lagrangian())?.clone(), Some(e(p.twist("mu"))?.clone())))?;
    let twisted = e(solve_accelerations(&p.space, &e(twisted_euler_lagrange(&vp))?))?;
    let standard = e(solve_accelerations(&p.space, &e(euler_lagrange(&vp))?))?;
    let run = |nf| -> std::result::Result<_, String> {
        e(e(Integrator::new(&p.space, nf, params, catalog))?.integrate(&ic, 0.0, t_end, h))
    };
    let (tw, st) = (run(&twisted)?, run(&standard)?);
    let j = |f: &str| -> std::result::Result<_, String> {
        let c = e(conserved_quantity(&vp, e(p.field(f))?, f, true))?;
        e(compile(&c.components[0], &slots, params, catalog))
    };
    let (jx, jy) = (j("X")?, j("Y")?);
    for (name, c) in [("J_X", &jx), ("J_Y", &jy)] {
        let d = e(drift(c, &tw))?;
        ensure(d.relative < DRIFT_TWISTED_MAX, || format!("{name} twisted drift {:.2e}", d.relative))?;
        notes.push(format!("{name} {:.1e}", d.relative));
    }
    let d = e(drift(&jy, &st))?;
    ensure(d.relative > DRIFT_STANDARD_MIN, || format!("J_Y standard drift {:.2e}", d.relative))?;
    notes.push(format!("J_Y standard {:.2e}", d.relative));
    let a = Appendix::new();
    let rate = e(compile(&a.parse("{F}*{r2}*{rho2}*z"), &slots, params, catalog))?;
    let m = e(rate_mismatch(&jy, &rate, &st))?;
    ensure(m < RATE_MISMATCH_MAX, || format!("rate mismatch {m:.2e}"))?;
    notes.push(format!("rate mismatch {m:.1e}"));
    Ok(notes.join(", "))
}

fn algebra() -> Check {
    let a = Appendix::new();
    let alg = e(algebra_structure(&a.space, &[a.x.clone(), a.y.clone()], &Bracket::Plain))?;
    ensure(alg.abelian == Some(true) && alg.solvable == Some(true), || "appendix pair".into())?;

    let p = load("sl2.toml");
    let fs: Vec<VectorField> = ["A", "B", "C"].iter().map(|n| p.field(n).unwrap().clone()).collect();
    let alg = e(algebra_structure(&p.space, &fs, &Bracket::Plain))?;
    ensure(alg.solvable == Some(false), || "sl(2) reported solvable".into())?;
    let c = alg.constants.ok_or("sl(2) bracket did not close")?;
    let q = |n: i64| num::BigRational::from_integer(n.into());
    let want: BTreeMap<(usize, usize), [i64; 3]> =
        [((0, 1), [1, 0, 0]), ((0, 2), [0, 2, 0]), ((1, 2), [0, 0, 1])].into();
    for ((i, k), w) in want {
        for m in 0..3 {
            ensure(c[i][k][m] == q(w[m]) && c[k][i][m] == -q(w[m]), || format!("c[{i}][{k}][{m}]"))?;
        }
    }
    Ok(format!("derived series {:?}", alg.derived_series))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, u64); 7] = [
        ("appendix golden suite", appendix_golden, 60),
        ("degeneration to the standard case", degeneration, 120),
        ("gauge correspondence", gauge_correspondence, 60),
        ("compatibility and path independence", compatibility, 60),
        ("conservation modulo twisted equations", propositions, 60),
        ("numeric drift and RK4 order", numeric, 30),
        ("algebra structure and solvability", algebra, 60),
    ];
    let mut failed = 0;
    for (n, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(note) if took > Duration::from_secs(*limit) => Err(format!("{note}; over {limit} s")),
            other => other,
        };
        let (tag, note) = match &outcome {
            Ok(note) => ("PASS", note),
            Err(why) => ("FAIL", why),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} {} {name} [{:.2} s / {limit} s] {note}", n + 1, took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
