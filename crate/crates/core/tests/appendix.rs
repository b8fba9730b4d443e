mod common;

use common::*;
use twistjet::expr::substitute;
use twistjet::jet::{JetSpace, MultiIndex, VectorField};
use twistjet::prolong::{prolong_standard, prolong_twisted};
use twistjet::symmetry::{
    algebra_structure, commutator, prolonged_commutator, symmetry_residual, Bracket,
};
use twistjet::variational::{
    conservation_residual, conserved_quantity, euler_lagrange, momenta, solve_accelerations,
    twisted_euler_lagrange, VariationalProblem,
};

#[test]
fn lagrangian_momenta() {
    let a = Appendix::new();
    let p = VariationalProblem::new(&a.space, a.lagrangian.clone(), None).unwrap();
    let pi = momenta(&p);
    assert_eq!(pi[2][0], a.parse("(1/2)*{rho2}"));
    assert_eq!(pi[0][0], a.parse("(z' + {r2}*z*{F})*x'"));
}

#[test]
fn standard_and_twisted_residuals() {
    let a = Appendix::new();
    let l = &a.lagrangian;
    assert!(symmetry_residual(&a.space, l, &a.x, None, "X").unwrap().verdict);
    let ry = symmetry_residual(&a.space, l, &a.y, None, "Y").unwrap();
    assert_eq!(ry.residual, a.parse(Y_STANDARD_RESIDUAL));
    assert!(!ry.verdict);
    for f in [&a.x, &a.y] {
        assert!(symmetry_residual(&a.space, l, f, Some(&a.mu), "")
            .unwrap()
            .verdict);
    }
}

#[test]
fn prolongation_coefficients() {
    let a = Appendix::new();
    let one = MultiIndex::new(vec![1]);
    let coeffs = |pf: &twistjet::ProlongedField| -> Vec<_> {
        (0..3).map(|k| pf.coefficient(k, &one).unwrap().clone()).collect()
    };
    let x1 = coeffs(&prolong_standard(&a.space, &a.x, 1).unwrap());
    assert_eq!(x1, vec![a.parse("-y'"), a.parse("x'"), a.parse("0")]);
    let y1 = coeffs(&prolong_standard(&a.space, &a.y, 1).unwrap());
    assert_eq!(y1, vec![a.parse("x'"), a.parse("y'"), a.parse("-2*z'")]);
    let xl = coeffs(&prolong_twisted(&a.space, &a.x, &a.mu, 1).unwrap());
    assert_eq!(xl, x1);
    let yl = coeffs(&prolong_twisted(&a.space, &a.y, &a.mu, 1).unwrap());
    assert_eq!(
        yl,
        vec![a.parse("x'"), a.parse("y'"), a.parse("-2*(z' + {r2}*z*{F})")]
    );
}

#[test]
fn fields_and_prolongations_commute() {
    let a = Appendix::new();
    let c = commutator(&a.space, &a.x, &a.y).unwrap();
    assert!(c.phi().iter().all(|e| e.is_zero()));
    let std = prolonged_commutator(&a.space, &a.x, &a.y, None, 1).unwrap();
    assert!(std.is_zero());
    assert_eq!(std.matches_prolongation, Some(true));
    assert!(prolonged_commutator(&a.space, &a.x, &a.y, Some(&a.mu), 1)
        .unwrap()
        .is_zero());
    let alg = algebra_structure(&a.space, &[a.x.clone(), a.y.clone()], &Bracket::Plain).unwrap();
    assert_eq!(alg.abelian, Some(true));
    assert_eq!(alg.derived_series, vec![2, 0]);
}

#[test]
fn twisted_equations_and_normal_form() {
    let a = Appendix::new();
    let p = VariationalProblem::new(&a.space, a.lagrangian.clone(), Some(a.mu.clone())).unwrap();
    let tel = twisted_euler_lagrange(&p).unwrap();
    for (got, want) in tel.lhs.iter().zip(TWISTED_EL) {
        assert_eq!(*got, a.parse(want));
    }
    let el = euler_lagrange(&p).unwrap();
    assert_eq!(el.lhs[0], tel.lhs[0]);
    assert_eq!(el.lhs[1], tel.lhs[1]);
    assert_ne!(el.lhs[2], tel.lhs[2]);

    let nf = solve_accelerations(&a.space, &tel).unwrap();
    for (got, want) in nf.solutions.iter().zip(ACCELERATIONS) {
        assert_eq!(*got, a.parse(want));
    }
}

#[test]
fn conserved_quantities() {
    let a = Appendix::new();
    let p = VariationalProblem::new(&a.space, a.lagrangian.clone(), Some(a.mu.clone())).unwrap();
    let jx = conserved_quantity(&p, &a.x, "X", true).unwrap();
    let jy = conserved_quantity(&p, &a.y, "Y", true).unwrap();
    assert_eq!(jx.components[0], a.parse(J_X));
    assert_eq!(jy.components[0], a.parse(J_Y));
    assert_eq!(
        a.space.total_derivative(&jx.components[0], 0).unwrap(),
        a.parse(DT_J_X)
    );
    assert_eq!(
        a.space.total_derivative(&jy.components[0], 0).unwrap(),
        a.parse(DT_J_Y)
    );

    let nf = solve_accelerations(&a.space, &twisted_euler_lagrange(&p).unwrap()).unwrap();
    assert!(conservation_residual(&a.space, &jx, &nf).unwrap().is_zero());
    assert!(conservation_residual(&a.space, &jy, &nf).unwrap().is_zero());

    let std = solve_accelerations(&a.space, &euler_lagrange(&p).unwrap()).unwrap();
    assert!(conservation_residual(&a.space, &jx, &std).unwrap().is_zero());
    assert_eq!(
        conservation_residual(&a.space, &jy, &std).unwrap(),
        a.parse(J_Y_STANDARD_RESIDUAL)
    );
}

#[test]
fn fixture_accelerations_close_the_time_derivatives() {
    let a = Appendix::new();
    let b = ["x''", "y''", "z''"]
        .iter()
        .zip(ACCELERATIONS)
        .map(|(k, v)| (k.to_string(), a.parse(v)))
        .collect();
    assert!(substitute(&a.parse(DT_J_X), &b).is_zero());
    assert!(substitute(&a.parse(DT_J_Y), &b).is_zero());
}

#[test]
fn gauge_frame_rescaling() {
    let s = JetSpace::new(&["t"], &["xi", "eta", "zeta"], 2).unwrap();
    let l = s.parse("(1/2)*zeta'*(xi'^2 + eta'^2)").unwrap();
    let w = VectorField::parse(&s, &["0"], &["xi", "eta", "-2*zeta"]).unwrap();
    assert!(symmetry_residual(&s, &l, &w, None, "W").unwrap().verdict);
}
