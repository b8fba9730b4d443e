//! Gauge matrices R and their relation R⁻¹ D_iR + R⁻¹ Λ_i R = 0 to twists.
//!
//! Gauge matrices depend on independent and dependent variables only.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::{JetSpace, VectorField};
use crate::matrix::Matrix;
use crate::numeric::{compile, sample, state_slots, Catalog, Trajectory};
use crate::prolong::TwistForm;

#[derive(Clone, Debug)]
pub struct GaugeMatrix {
    r: Matrix,
    inv: Matrix,
}

impl GaugeMatrix {
    pub fn new(space: &JetSpace, r: Matrix) -> Result<GaugeMatrix> {
        if r.rows() != space.q() || r.cols() != space.q() {
            return Err(Error::Dimension(format!(
                "gauge matrix must be {q}x{q}",
                q = space.q()
            )));
        }
        if r.entries().iter().any(|e| space.jet_order(e) > 0) {
            return Err(Error::Domain(
                "gauge matrices may not depend on derivatives".into(),
            ));
        }
        let inv = r.inverse()?;
        debug_assert_eq!(r.mul(&inv)?, Matrix::identity(space.q()));
        Ok(GaugeMatrix { r, inv })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inv
    }
}

fn d(space: &JetSpace, m: &Matrix, i: usize) -> Result<Matrix> {
    m.try_map(|e| space.total_derivative(e, i))
}

/// R⁻¹ D_iR + R⁻¹ Λ_i R for each independent variable.
pub fn check_gauge_relation(
    space: &JetSpace,
    r: &GaugeMatrix,
    mu: &TwistForm,
) -> Result<Vec<Matrix>> {
    (0..space.p())
        .map(|i| {
            let a = r.inv.mul(&d(space, &r.r, i)?)?;
            let b = r.inv.mul(mu.lambda(i))?.mul(&r.r)?;
            a.add(&b)
        })
        .collect()
}

/// Λ_i = −(D_iR) R⁻¹.
pub fn lambda_from_r(space: &JetSpace, r: &GaugeMatrix) -> Result<TwistForm> {
    let lambdas = (0..space.p())
        .map(|i| Ok(d(space, &r.r, i)?.mul(&r.inv)?.neg()))
        .collect::<Result<_>>()?;
    let mu = TwistForm::new(space, lambdas)?;
    debug_assert!(check_gauge_relation(space, r, &mu)?
        .iter()
        .all(Matrix::is_zero));
    Ok(mu)
}

/// The field with components R ξ together with the twist −(DR)R⁻¹.
pub fn gauge_twist(
    space: &JetSpace,
    z: &VectorField,
    r: &GaugeMatrix,
) -> Result<(VectorField, TwistForm)> {
    if !z.is_vertical() {
        return Err(Error::Domain("gauge transformation needs a vertical field".into()));
    }
    let phi = r.r.mul_vec(z.phi())?;
    Ok((VectorField::vertical(space, phi)?, lambda_from_r(space, r)?))
}

#[derive(Clone, Debug)]
pub struct GaugeSolution {
    pub times: Vec<f64>,
    pub samples: Vec<DMatrix<f64>>,
    /// Largest entry of R⁻¹(dR/dt + ΛR), with dR/dt from central differences.
    pub residual: f64,
}

/// Integrates dR/dt = −Λ R, R(t₀) = I, along a trajectory with RK4.
/// Midpoint values of Λ come from cubic interpolation of the samples.
pub fn solve_r_numeric(
    space: &JetSpace,
    mu: &TwistForm,
    traj: &Trajectory,
    params: &BTreeMap<String, f64>,
    catalog: &Catalog,
) -> Result<GaugeSolution> {
    if space.p() != 1 {
        return Err(Error::Domain("numeric gauge needs one independent variable".into()));
    }
    let q = space.q();
    let slots = state_slots(space);
    let lam = mu.lambda(0);
    let mut entries = Vec::with_capacity(q * q);
    for e in lam.entries() {
        entries.push(sample(&compile(e, &slots, params, catalog)?, traj)?);
    }
    let n = traj.times.len();
    let at = |k: usize| DMatrix::from_fn(q, q, |i, j| entries[i * q + j][k]);
    let lambdas: Vec<DMatrix<f64>> = (0..n).map(at).collect();
    let mid = |k: usize| -> DMatrix<f64> {
        if n < 4 {
            return (&lambdas[k] + &lambdas[k + 1]) * 0.5;
        }
        let s = k.saturating_sub(1).min(n - 4);
        // Lagrange cubic through samples s..s+3 at node position k + 1/2.
        let x = (k - s) as f64 + 0.5;
        let w = [
            -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
            x * (x - 2.0) * (x - 3.0) / 2.0,
            -x * (x - 1.0) * (x - 3.0) / 2.0,
            x * (x - 1.0) * (x - 2.0) / 6.0,
        ];
        (0..4).fold(DMatrix::zeros(q, q), |acc, m| acc + &lambdas[s + m] * w[m])
    };
    let h = traj.step;
    let mut r = DMatrix::<f64>::identity(q, q);
    let mut samples = vec![r.clone()];
    for k in 0..n - 1 {
        let lm = mid(k);
        let k1 = -&lambdas[k] * &r;
        let k2 = -&lm * (&r + &k1 * (0.5 * h));
        let k3 = -&lm * (&r + &k2 * (0.5 * h));
        let k4 = -&lambdas[k + 1] * (&r + &k3 * h);
        r += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: k });
        }
        samples.push(r.clone());
    }
    let mut residual: f64 = 0.0;
    for k in 1..n.saturating_sub(1) {
        let dr = (&samples[k + 1] - &samples[k - 1]) / (2.0 * h);
        let inv = samples[k]
            .clone()
            .try_inverse()
            .ok_or(Error::NumericSingularity { index: k, value: 0.0 })?;
        let res = inv * (dr + &lambdas[k] * &samples[k]);
        residual = residual.max(res.amax());
    }
    Ok(GaugeSolution {
        times: traj.times.clone(),
        samples,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::FunctionDecl;

    fn line() -> JetSpace {
        let mut s = JetSpace::new(&["t"], &["q"], 2).unwrap();
        s.add_parameter("c").unwrap();
        s.add_function(FunctionDecl::with_rules("E", 1, &["E(_1)"]).unwrap())
            .unwrap();
        s
    }

    fn scalar(s: &JetSpace, e: &str) -> Matrix {
        Matrix::from_rows(vec![vec![s.parse(e).unwrap()]]).unwrap()
    }

    #[test]
    fn exponential_gauge() {
        let s = line();
        let r = GaugeMatrix::new(&s, scalar(&s, "E(-c*t)")).unwrap();
        let mu = lambda_from_r(&s, &r).unwrap();
        assert_eq!(*mu.lambda(0), scalar(&s, "c"));
        let res = check_gauge_relation(&s, &r, &mu).unwrap();
        assert!(res[0].is_zero());

        let id = GaugeMatrix::new(&s, Matrix::identity(1)).unwrap();
        let res = check_gauge_relation(&s, &id, &TwistForm::scalar(&s, s.parse("c").unwrap()).unwrap())
            .unwrap();
        assert_eq!(res[0], scalar(&s, "c"));

        let z = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let (x, mu) = gauge_twist(&s, &z, &r).unwrap();
        assert_eq!(x.phi()[0], s.parse("E(-c*t)").unwrap());
        assert_eq!(*mu.lambda(0), scalar(&s, "c"));
    }

    #[test]
    fn shear_gauge() {
        let s = JetSpace::new(&["t"], &["u", "v"], 2).unwrap();
        let m = Matrix::from_rows(vec![
            vec![s.parse("1").unwrap(), s.parse("t").unwrap()],
            vec![s.parse("0").unwrap(), s.parse("1").unwrap()],
        ])
        .unwrap();
        let r = GaugeMatrix::new(&s, m).unwrap();
        let mu = lambda_from_r(&s, &r).unwrap();
        let want = Matrix::from_rows(vec![
            vec![s.parse("0").unwrap(), s.parse("-1").unwrap()],
            vec![s.parse("0").unwrap(), s.parse("0").unwrap()],
        ])
        .unwrap();
        assert_eq!(*mu.lambda(0), want);
    }

    #[test]
    fn derivative_dependence_is_rejected() {
        let s = line();
        assert!(matches!(
            GaugeMatrix::new(&s, scalar(&s, "1 + q'^2")),
            Err(Error::Domain(_))
        ));
    }
}
