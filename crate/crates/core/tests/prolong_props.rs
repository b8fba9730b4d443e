use twistjet::gauge::{gauge_twist, GaugeMatrix};
use twistjet::gen::Gen;
use twistjet::jet::evolutionary;
use twistjet::prolong::{check_compatibility, path_discrepancy, prolong_standard, prolong_twisted};
use twistjet::{Expr, JetSpace, Matrix, MultiIndex, TwistForm, VectorField};

fn space(p: usize, q: usize, order: u32) -> JetSpace {
    let indep = ["t", "s"];
    let dep = ["u", "v", "w"];
    JetSpace::new(&indep[..p], &dep[..q], order).unwrap()
}

/// Standard prolongation in closed form: ψ_J = D_J Q + ξ^m u_{J+e_m}.
#[test]
fn standard_prolongation_closed_form() {
    let mut g = Gen::new(21);
    for n in 0..20 {
        let (p, q) = (1 + n % 2, 1 + n % 3);
        let k = if p == 1 { 3 } else { 2 };
        let s = space(p, q, k + 1);
        let x = g.field(&s, false, 2);
        let ev = evolutionary(&s, &x);
        let pf = prolong_standard(&s, &x, k).unwrap();
        for (a, j, e) in pf.coefficients() {
            let mut want = s.total_derivative_multi(&ev.phi()[a], &j).unwrap();
            for (m, xi) in x.xi().iter().enumerate() {
                want = &want + &(xi * &s.coordinate(a, &j.increment(m)).unwrap());
            }
            assert_eq!(e, want, "field {n}, u^{a}_{j:?}");
        }
    }
}

/// For a vertical X = R·Z and Λ_i = −(D_iR)R⁻¹ every twisted coefficient is
/// R·D_J Z.
#[test]
fn gauged_prolongation_closed_form() {
    let mut g = Gen::new(22);
    for n in 0..12 {
        let (p, q) = (1 + n % 2, 2 + n % 2);
        let k = if p == 1 { 3 } else { 2 };
        let s = space(p, q, k);
        let z = g.field(&s, true, 2);
        let r = GaugeMatrix::new(&s, g.unimodular(&s, q, 1)).unwrap();
        let (x, mu) = gauge_twist(&s, &z, &r).unwrap();
        let pf = prolong_twisted(&s, &x, &mu, k).unwrap();
        for order in 1..=k {
            for j in MultiIndex::all_of_order(p, order) {
                let dz: Vec<Expr> = z
                    .phi()
                    .iter()
                    .map(|e| s.total_derivative_multi(e, &j).unwrap())
                    .collect();
                let want = r.matrix().mul_vec(&dz).unwrap();
                for a in 0..q {
                    assert_eq!(pf.coefficient(a, &j).unwrap(), &want[a], "case {n}, {j:?}");
                }
            }
        }
    }
}

#[test]
fn prolongation_is_linear() {
    let s = space(1, 2, 3);
    let mut g = Gen::new(23);
    let mu = g.darboux_twist(&s).unwrap();
    for _ in 0..10 {
        let (a, b) = (g.field(&s, false, 2), g.field(&s, true, 2));
        let (ca, cb) = (g.rational(), g.rational());
        let sum = a.scale(&ca).add(&b.scale(&cb));
        for twist in [None, Some(&mu)] {
            let pr = |x: &VectorField| match twist {
                Some(mu) => prolong_twisted(&s, x, mu, 2).unwrap(),
                None => prolong_standard(&s, x, 2).unwrap(),
            };
            let (pa, pb, ps) = (pr(&a), pr(&b), pr(&sum));
            for (c, j, e) in ps.coefficients() {
                let want = &(&ca * pa.coefficient(c, &j).unwrap()) + &(&cb * pb.coefficient(c, &j).unwrap());
                assert_eq!(e, want);
            }
        }
    }
}

#[test]
fn darboux_twists_are_path_independent() {
    let s = space(2, 2, 3);
    let mut g = Gen::new(24);
    for _ in 0..4 {
        let mu = g.darboux_twist(&s).unwrap();
        assert!(check_compatibility(&s, &mu).unwrap().holds);
        let x = g.field(&s, true, 1);
        for j in [MultiIndex::new(vec![1, 1]), MultiIndex::new(vec![2, 1])] {
            for a in 0..2 {
                assert!(path_discrepancy(&s, &x, &mu, a, &j).unwrap().is_zero());
            }
        }
        prolong_twisted(&s, &x, &mu, 3).unwrap();
    }
}

#[test]
fn incompatible_twist_is_detected() {
    let s = space(2, 1, 3);
    let u = s.parse("u").unwrap();
    let mu = TwistForm::new(
        &s,
        vec![Matrix::from_rows(vec![vec![u]]).unwrap(), Matrix::zeros(1, 1)],
    )
    .unwrap();
    let rep = check_compatibility(&s, &mu).unwrap();
    assert!(!rep.holds);
    assert_eq!(*rep.residuals[0].1.get(0, 0), s.parse("-u[0,1]").unwrap());
    let x = VectorField::parse(&s, &["0", "0"], &["1"]).unwrap();
    let d = path_discrepancy(&s, &x, &mu, 0, &MultiIndex::new(vec![1, 1])).unwrap();
    assert!(!d.is_zero());
    assert!(prolong_twisted(&s, &x, &mu, 2).is_err());
}
