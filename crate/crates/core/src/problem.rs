//! TOML problem files.
//!
//! ```toml
//! [space]
//! independent = ["t"]
//! dependent = ["q"]
//! order = 2
//! parameters = ["c"]
//! [space.functions]
//! f = 1
//! E = { arity = 1, derivatives = ["E(_1)"] }
//!
//! [lagrangian]
//! expr = "(1/2)*q'^2"
//!
//! [fields.X]
//! phi = ["E(-c*t)"]
//!
//! [twist.mu]
//! t = [["c"]]
//!
//! [gauge.R]
//! matrix = [["E(-c*t)"]]
//!
//! [numeric]
//! ic = [0.0, 1.0]
//! t_end = 1.0
//! step = 1e-3
//! [numeric.parameters]
//! c = 1.0
//! [numeric.functions]
//! E = { kind = "exp-linear", coeff = 1.0, rate = 1.0 }
//!
//! [quantities]
//! J = "E(-c*t)*q'"
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, FunctionDecl};
use crate::gauge::GaugeMatrix;
use crate::jet::{JetSpace, VectorField};
use crate::matrix::Matrix;
use crate::numeric::{Catalog, Implementation};
use crate::prolong::TwistForm;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub space: SpaceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<LagrangianSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, FieldSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub twist: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gauge: BTreeMap<String, GaugeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub quantities: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum FunctionSpec {
    Arity(usize),
    Full {
        arity: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        derivatives: Option<Vec<String>>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSection {
    pub expr: String,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<String>>,
    pub phi: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NumericSection {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, ImplementationSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ImplementationSpec {
    Identity,
    Constant { value: f64 },
    Power { coeff: f64, exponent: f64 },
    ExpLinear { coeff: f64, rate: f64 },
}

impl From<&ImplementationSpec> for Implementation {
    fn from(s: &ImplementationSpec) -> Self {
        match *s {
            ImplementationSpec::Identity => Implementation::Identity,
            ImplementationSpec::Constant { value } => Implementation::Constant(value),
            ImplementationSpec::Power { coeff, exponent } => {
                Implementation::Power { coeff, exponent }
            }
            ImplementationSpec::ExpLinear { coeff, rate } => {
                Implementation::ExpLinear { coeff, rate }
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NumericSettings {
    pub catalog: Catalog,
    pub parameters: BTreeMap<String, f64>,
    pub ic: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
}

/// A problem file with every expression parsed against its space.
#[derive(Clone, Debug)]
pub struct Problem {
    pub space: JetSpace,
    pub lagrangian: Option<Expr>,
    pub fields: BTreeMap<String, VectorField>,
    pub twists: BTreeMap<String, TwistForm>,
    pub gauges: BTreeMap<String, GaugeMatrix>,
    pub numeric: NumericSettings,
    pub quantities: BTreeMap<String, Expr>,
}

fn ctx<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Problem(_) => e,
        other => Error::Problem(format!("{what}: {other}")),
    })
}

impl ProblemFile {
    pub fn from_toml(text: &str) -> Result<ProblemFile> {
        toml::from_str(text).map_err(|e| Error::Problem(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files serialize")
    }

    pub fn build(&self) -> Result<Problem> {
        let sp = &self.space;
        let indep: Vec<&str> = sp.independent.iter().map(String::as_str).collect();
        let dep: Vec<&str> = sp.dependent.iter().map(String::as_str).collect();
        let mut space = ctx("[space]", JetSpace::new(&indep, &dep, sp.order))?;
        for p in &sp.parameters {
            ctx("[space] parameters", space.add_parameter(p))?;
        }
        for (name, spec) in &sp.functions {
            let what = format!("[space.functions] {name}");
            let decl = match spec {
                FunctionSpec::Arity(a) => FunctionDecl::new(name, *a),
                FunctionSpec::Full {
                    arity,
                    derivatives: None,
                } => FunctionDecl::new(name, *arity),
                FunctionSpec::Full {
                    arity,
                    derivatives: Some(rules),
                } => {
                    let rules: Vec<&str> = rules.iter().map(String::as_str).collect();
                    FunctionDecl::with_rules(name, *arity, &rules)
                }
            };
            let decl = ctx(&what, decl)?;
            ctx(&what, space.add_function(decl))?;
        }

        let lagrangian = match &self.lagrangian {
            Some(l) => Some(ctx("[lagrangian] expr", space.parse(&l.expr))?),
            None => None,
        };

        let mut fields = BTreeMap::new();
        for (name, f) in &self.fields {
            let what = format!("[fields.{name}]");
            let zeros = vec!["0".to_string(); space.p()];
            let xi: Vec<&str> = f.xi.as_ref().unwrap_or(&zeros).iter().map(String::as_str).collect();
            let phi: Vec<&str> = f.phi.iter().map(String::as_str).collect();
            fields.insert(name.clone(), ctx(&what, VectorField::parse(&space, &xi, &phi))?);
        }

        let mut twists = BTreeMap::new();
        for (name, per_var) in &self.twist {
            let what = format!("[twist.{name}]");
            for key in per_var.keys() {
                if space.independent_index(key).is_none() {
                    return Err(Error::Problem(format!(
                        "{what}: `{key}` is not an independent variable"
                    )));
                }
            }
            let mut lambdas = Vec::new();
            for x in space.independents() {
                let m = match per_var.get(&**x) {
                    Some(rows) => ctx(&what, Matrix::parse(rows, space.context()))?,
                    None => Matrix::zeros(space.q(), space.q()),
                };
                lambdas.push(m);
            }
            twists.insert(name.clone(), ctx(&what, TwistForm::new(&space, lambdas))?);
        }

        let mut gauges = BTreeMap::new();
        for (name, g) in &self.gauge {
            let what = format!("[gauge.{name}]");
            let m = ctx(&what, Matrix::parse(&g.matrix, space.context()))?;
            gauges.insert(name.clone(), ctx(&what, GaugeMatrix::new(&space, m))?);
        }

        let numeric = match &self.numeric {
            None => NumericSettings::default(),
            Some(n) => {
                for f in n.functions.keys() {
                    if space.context().function(f).is_none() {
                        return Err(Error::Problem(format!(
                            "[numeric.functions]: `{f}` is not a declared function"
                        )));
                    }
                }
                for p in n.parameters.keys() {
                    if !space.parameters().iter().any(|q| &**q == p) {
                        return Err(Error::Problem(format!(
                            "[numeric.parameters]: `{p}` is not a declared parameter"
                        )));
                    }
                }
                NumericSettings {
                    catalog: n.functions.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
                    parameters: n.parameters.clone(),
                    ic: n.ic.clone(),
                    t_end: n.t_end,
                    step: n.step,
                }
            }
        };

        let mut quantities = BTreeMap::new();
        for (name, e) in &self.quantities {
            let what = format!("[quantities] {name}");
            quantities.insert(name.clone(), ctx(&what, space.parse(e))?);
        }

        Ok(Problem {
            space,
            lagrangian,
            fields,
            twists,
            gauges,
            numeric,
            quantities,
        })
    }

    /// The same file with every expression in canonical printed form.
    pub fn canonical(&self) -> Result<ProblemFile> {
        let p = self.build()?;
        let mut out = self.clone();
        let print = |e: &Expr| e.to_string();
        if let (Some(l), Some(e)) = (out.lagrangian.as_mut(), &p.lagrangian) {
            l.expr = print(e);
        }
        for (name, f) in out.fields.iter_mut() {
            let v = &p.fields[name];
            if f.xi.is_some() {
                f.xi = Some(v.xi().iter().map(print).collect());
            }
            f.phi = v.phi().iter().map(print).collect();
        }
        for (name, per_var) in out.twist.iter_mut() {
            for (var, rows) in per_var.iter_mut() {
                let i = p.space.independent_index(var).expect("validated");
                *rows = p.twists[name]
                    .lambda(i)
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(print).collect())
                    .collect();
            }
        }
        for (name, g) in out.gauge.iter_mut() {
            g.matrix = p.gauges[name]
                .matrix()
                .to_rows()
                .iter()
                .map(|r| r.iter().map(print).collect())
                .collect();
        }
        for (name, q) in out.quantities.iter_mut() {
            *q = print(&p.quantities[name]);
        }
        Ok(out)
    }
}

impl Problem {
    pub fn from_toml(text: &str) -> Result<Problem> {
        ProblemFile::from_toml(text)?.build()
    }

    pub fn lagrangian(&self) -> Result<&Expr> {
        self.lagrangian
            .as_ref()
            .ok_or_else(|| Error::Problem("no [lagrangian] section".into()))
    }

    pub fn field(&self, name: &str) -> Result<&VectorField> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::Problem(format!("no field `{name}`")))
    }

    pub fn twist(&self, name: &str) -> Result<&TwistForm> {
        self.twists
            .get(name)
            .ok_or_else(|| Error::Problem(format!("no twist `{name}`")))
    }

    pub fn gauge(&self, name: &str) -> Result<&GaugeMatrix> {
        self.gauges
            .get(name)
            .ok_or_else(|| Error::Problem(format!("no gauge `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[space]
independent = ["t"]
dependent = ["q"]
order = 2
parameters = ["c"]
[space.functions]
E = { arity = 1, derivatives = ["E(_1)"] }

[lagrangian]
expr = "q'^2/2"

[fields.X]
phi = ["E(-c*t)"]

[twist.mu]
t = [["c"]]

[gauge.R]
matrix = [["E(-c*t)"]]

[numeric]
ic = [0.0, 1.0]
t_end = 1.0
step = 1e-3
[numeric.parameters]
c = 1.0
[numeric.functions]
E = { kind = "exp-linear", coeff = 1.0, rate = 1.0 }
"#;

    #[test]
    fn sample_builds() {
        let p = Problem::from_toml(SAMPLE).unwrap();
        assert_eq!(p.field("X").unwrap().phi()[0].to_string(), "E(-c*t)");
        assert_eq!(p.twist("mu").unwrap().lambda(0).get(0, 0).to_string(), "c");
        assert!(p.numeric.catalog.contains_key("E"));
    }

    #[test]
    fn canonical_round_trip() {
        let f = ProblemFile::from_toml(SAMPLE).unwrap();
        let c = f.canonical().unwrap();
        assert_eq!(c.lagrangian.as_ref().unwrap().expr, "1/2*q'^2");
        let again = ProblemFile::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.canonical().unwrap(), c);
    }

    #[test]
    fn bad_files_are_parse_errors() {
        let bad = SAMPLE.replace("phi = [\"E(-c*t)\"]", "phi = [\"E(-c*t\"]");
        let e = Problem::from_toml(&bad).unwrap_err();
        assert_eq!(e.class(), crate::ErrorClass::Parse);
        assert!(e.to_string().contains("[fields.X]"));
        let e = Problem::from_toml("[space]\nindependent = 3").unwrap_err();
        assert_eq!(e.class(), crate::ErrorClass::Parse);
    }
}
