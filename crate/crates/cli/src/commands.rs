use std::fmt::Write as _;
use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use twistjet::gauge::check_gauge_relation;
use twistjet::numeric::{compile, drift, fd_check, state_slots, Integrator};
use twistjet::problem::{Problem, ProblemFile};
use twistjet::prolong::{check_compatibility, prolong_standard, prolong_twisted};
use twistjet::symmetry::{
    algebra_structure, coeff_string, commutator, deformed_bracket, symmetry_residual, Bracket,
};
use twistjet::variational::{
    conservation_residual, conserved_current, conserved_quantity, euler_lagrange,
    solve_accelerations, twisted_euler_lagrange, EquationSet, VariationalProblem,
};
use twistjet::{Error, Expr, JetSpace, Matrix, Result, TwistForm, VectorField};

use crate::{Cli, Command};

pub struct Report {
    pub command: &'static str,
    pub text: String,
    pub json: Map<String, Value>,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report {
            command,
            text: String::new(),
            json: Map::new(),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn set(&mut self, key: &str, v: Value) {
        self.json.insert(key.to_string(), v);
    }

    pub fn json_string(&self) -> String {
        let mut m = self.json.clone();
        m.insert("schema".into(), json!(1));
        m.insert("command".into(), json!(self.command));
        serde_json::to_string_pretty(&Value::Object(m)).expect("json")
    }
}

fn read(cli: &Cli) -> Result<String> {
    let path = cli
        .problem
        .as_ref()
        .ok_or_else(|| Error::Usage("--problem FILE is required".into()))?;
    fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn strings(es: &[Expr]) -> Vec<String> {
    es.iter().map(Expr::to_string).collect()
}

fn matrix_text(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", strings(r).join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn matrix_json(m: &Matrix) -> Value {
    json!(m.to_rows().iter().map(|r| strings(r)).collect::<Vec<_>>())
}

fn twist<'a>(p: &'a Problem, name: Option<&String>) -> Result<Option<&'a TwistForm>> {
    name.map(|n| p.twist(n)).transpose()
}

fn equations(vp: &VariationalProblem) -> Result<EquationSet> {
    match vp.twist() {
        Some(_) => twisted_euler_lagrange(vp),
        None => euler_lagrange(vp),
    }
}

fn field_lines(r: &mut Report, space: &JetSpace, x: &VectorField) {
    for (i, e) in x.xi().iter().enumerate() {
        r.line(format!("xi[{}] = {e}", space.independents()[i]));
    }
    for (a, e) in x.phi().iter().enumerate() {
        r.line(format!("phi[{}] = {e}", space.dependents()[a]));
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "SYMMETRY"
    } else {
        "NOT-A-SYMMETRY"
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let text = read(cli)?;
    if let Command::Fmt = cli.command {
        let out = ProblemFile::from_toml(&text)?.canonical()?.to_toml();
        let mut r = Report::new("fmt");
        r.text = out.clone();
        r.set("toml", json!(out));
        return Ok(r);
    }
    let p = Problem::from_toml(&text)?;
    let space = &p.space;
    match &cli.command {
        Command::Prolong {
            field,
            order,
            twist: tw,
        } => {
            let x = p.field(field)?;
            let mu = twist(&p, tw.as_ref())?;
            let pf = match mu {
                Some(mu) => prolong_twisted(space, x, mu, *order)?,
                None => prolong_standard(space, x, *order)?,
            };
            let mut r = Report::new("prolong");
            field_lines(&mut r, space, x);
            let mut coeffs = Vec::new();
            for (a, j, e) in pf.coefficients() {
                let name = space.coordinate_name(a, &j)?;
                r.line(format!("psi[{name}] = {e}"));
                coeffs.push(json!({"coordinate": name.to_string(), "value": e.to_string()}));
            }
            r.set("field", json!(field));
            r.set("twist", json!(tw));
            r.set("order", json!(order));
            r.set("xi", json!(strings(x.xi())));
            r.set("phi", json!(strings(x.phi())));
            r.set("coefficients", Value::Array(coeffs));
            Ok(r)
        }
        Command::CheckSymmetry { field, twist: tw } => {
            let rep = symmetry_residual(space, p.lagrangian()?, p.field(field)?, twist(&p, tw.as_ref())?, field)?;
            if !rep.verdict {
                return Err(Error::NotASymmetry {
                    residual: rep.residual.to_string(),
                });
            }
            let mut r = Report::new("check-symmetry");
            r.line(verdict(true));
            r.set("field", json!(field));
            r.set("twist", json!(tw));
            r.set("verdict", json!(verdict(true)));
            Ok(r)
        }
        Command::Residual { field, flow } => {
            let mu = twist(&p, flow.twist.as_ref())?;
            let rep = symmetry_residual(space, p.lagrangian()?, p.field(field)?, mu, field)?;
            let mut r = Report::new("residual");
            r.line(rep.residual.to_string());
            r.line(verdict(rep.verdict));
            r.set("field", json!(field));
            r.set("twist", json!(flow.twist));
            r.set("residual", json!(rep.residual.to_string()));
            r.set("verdict", json!(verdict(rep.verdict)));
            Ok(r)
        }
        Command::El { twist: tw } => {
            let vp = VariationalProblem::new(space, p.lagrangian()?.clone(), twist(&p, tw.as_ref())?.cloned())?;
            let eqs = equations(&vp)?;
            let mut r = Report::new("el");
            let mut out = Map::new();
            for (a, e) in eqs.lhs.iter().enumerate() {
                let name = &space.dependents()[a];
                r.line(format!("E[{name}] = {e}"));
                out.insert(name.to_string(), json!(e.to_string()));
            }
            r.set("twist", json!(tw));
            r.set("equations", Value::Object(out));
            Ok(r)
        }
        Command::NormalForm { twist: tw } => {
            let vp = VariationalProblem::new(space, p.lagrangian()?.clone(), twist(&p, tw.as_ref())?.cloned())?;
            let nf = solve_accelerations(space, &equations(&vp)?)?;
            let mut r = Report::new("normal-form");
            let mut out = Map::new();
            for (t, e) in nf.targets.iter().zip(&nf.solutions) {
                r.line(format!("{t} = {e}"));
                out.insert(t.clone(), json!(e.to_string()));
            }
            r.line(format!("det = {}", nf.determinant));
            r.set("twist", json!(tw));
            r.set("solutions", Value::Object(out));
            r.set("determinant", json!(nf.determinant.to_string()));
            Ok(r)
        }
        Command::Conserved { field, twist: tw } => {
            let vp = VariationalProblem::new(space, p.lagrangian()?.clone(), Some(p.twist(tw)?.clone()))?;
            let x = p.field(field)?;
            let c = if space.p() == 1 {
                conserved_quantity(&vp, x, field, true)?
            } else {
                conserved_current(&vp, x, field, true)?
            };
            let nf = solve_accelerations(space, &twisted_euler_lagrange(&vp)?)?;
            let res = conservation_residual(space, &c, &nf)?;
            let mut r = Report::new("conserved");
            if space.p() == 1 {
                r.line(format!("J = {}", c.components[0]));
            } else {
                for (i, e) in c.components.iter().enumerate() {
                    r.line(format!("P[{}] = {e}", space.independents()[i]));
                }
            }
            r.line(format!("residual = {res}"));
            r.set("field", json!(field));
            r.set("twist", json!(tw));
            r.set("components", json!(strings(&c.components)));
            r.set("residual", json!(res.to_string()));
            r.set("conserved", json!(res.is_zero()));
            Ok(r)
        }
        Command::Compat { twist: tw } => {
            let rep = check_compatibility(space, p.twist(tw)?)?;
            let mut r = Report::new("compat");
            let mut out = Vec::new();
            for ((i, k), m) in &rep.residuals {
                let (a, b) = (&space.independents()[*i], &space.independents()[*k]);
                r.line(format!("R[{a},{b}] = {}", matrix_text(m)));
                out.push(json!({"pair": [a.to_string(), b.to_string()], "residual": matrix_json(m)}));
            }
            r.line(if rep.holds { "COMPATIBLE" } else { "INCOMPATIBLE" });
            r.set("twist", json!(tw));
            r.set("holds", json!(rep.holds));
            r.set("residuals", Value::Array(out));
            Ok(r)
        }
        Command::Bracket { fields, deformed } => {
            let [a, b] = fields.as_slice() else {
                return Err(Error::Usage("--fields takes exactly two names".into()));
            };
            let (fa, fb) = (p.field(a)?, p.field(b)?);
            let mut r = Report::new("bracket");
            match deformed {
                None => {
                    let c = commutator(space, fa, fb)?;
                    field_lines(&mut r, space, &c);
                    r.set("xi", json!(strings(c.xi())));
                    r.set("phi", json!(strings(c.phi())));
                }
                Some(g) => {
                    if !fa.is_vertical() || !fb.is_vertical() {
                        return Err(Error::Domain("deformed bracket needs vertical fields".into()));
                    }
                    let s = p.gauge(g)?.inverse();
                    let c = deformed_bracket(space, fa.phi(), fb.phi(), s)?;
                    for (k, e) in c.iter().enumerate() {
                        r.line(format!("phi[{}] = {e}", space.dependents()[k]));
                    }
                    r.set("phi", json!(strings(&c)));
                }
            }
            r.set("fields", json!(fields));
            r.set("deformed", json!(deformed));
            Ok(r)
        }
        Command::Algebra { fields, deformed } => {
            let fs: Vec<VectorField> = fields
                .iter()
                .map(|f| p.field(f).cloned())
                .collect::<Result<_>>()?;
            let bracket = match deformed {
                None => Bracket::Plain,
                Some(g) => Bracket::Deformed(p.gauge(g)?.inverse().clone()),
            };
            let alg = algebra_structure(space, &fs, &bracket)?;
            let mut r = Report::new("algebra");
            r.line(format!("dim = {}", alg.dim));
            let mut brackets = Vec::new();
            if let Some(c) = &alg.constants {
                for a in 0..alg.dim {
                    for b in a + 1..alg.dim {
                        let terms: Vec<String> = (0..alg.dim)
                            .filter(|&k| coeff_string(&c[a][b][k]) != "0")
                            .map(|k| format!("{}*{}", coeff_string(&c[a][b][k]), fields[k]))
                            .collect();
                        let rhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                        r.line(format!("[{}, {}] = {rhs}", fields[a], fields[b]));
                        brackets.push(json!({
                            "pair": [fields[a], fields[b]],
                            "constants": c[a][b].iter().map(coeff_string).collect::<Vec<_>>(),
                        }));
                    }
                }
            }
            let series: Vec<String> = alg.derived_series.iter().map(usize::to_string).collect();
            r.line(format!("derived series = {}", series.join(" > ")));
            let yn = |b: Option<bool>| b.map_or("unknown", |b| if b { "yes" } else { "no" });
            r.line(format!("abelian = {}", yn(alg.abelian)));
            r.line(format!("solvable = {}", yn(alg.solvable)));
            if let Some(f) = &alg.failure {
                r.line(format!("failure = {f}"));
            }
            r.set("fields", json!(fields));
            r.set("deformed", json!(deformed));
            r.set("dim", json!(alg.dim));
            r.set("brackets", Value::Array(brackets));
            r.set("closed", json!(alg.constants.is_some()));
            r.set("derived_series", json!(alg.derived_series));
            r.set("abelian", json!(alg.abelian));
            r.set("solvable", json!(alg.solvable));
            r.set("failure", json!(alg.failure));
            Ok(r)
        }
        Command::GaugeCheck { gauge, twist: tw } => {
            let res = check_gauge_relation(space, p.gauge(gauge)?, p.twist(tw)?)?;
            let holds = res.iter().all(Matrix::is_zero);
            let mut r = Report::new("gauge-check");
            let mut out = Map::new();
            for (i, m) in res.iter().enumerate() {
                let x = &space.independents()[i];
                r.line(format!("G[{x}] = {}", matrix_text(m)));
                out.insert(x.to_string(), matrix_json(m));
            }
            r.line(if holds { "GAUGE-EQUIVALENT" } else { "NOT-GAUGE-EQUIVALENT" });
            r.set("gauge", json!(gauge));
            r.set("twist", json!(tw));
            r.set("residuals", Value::Object(out));
            r.set("holds", json!(holds));
            Ok(r)
        }
        Command::Simulate {
            twist: tw,
            ic,
            t_end,
            step,
            watch,
            csv,
        } => simulate(&p, tw.as_ref(), ic.as_ref(), *t_end, *step, watch, csv.as_ref()),
        Command::FdCheck {
            expr,
            var,
            points,
            seed,
        } => {
            let e = match expr {
                Some(s) => space.parse(s)?,
                None => p.lagrangian()?.clone(),
            };
            let slots = if space.p() == 1 {
                state_slots(space)
            } else {
                twistjet::gen::coordinates(space, 1)
                    .iter()
                    .map(Expr::to_string)
                    .collect()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pts: Vec<Vec<f64>> = (0..*points)
                .map(|_| slots.iter().map(|_| rng.gen_range(0.5..1.5)).collect())
                .collect();
            let err = fd_check(&e, var, &slots, &pts, &p.numeric.parameters, &p.numeric.catalog)?;
            let mut r = Report::new("fd-check");
            r.line(format!("max relative error = {err:.3e}"));
            r.set("var", json!(var));
            r.set("points", json!(points));
            r.set("seed", json!(seed));
            r.set("max_relative_error", json!(err));
            Ok(r)
        }
        Command::Fmt => unreachable!("handled above"),
    }
}

fn simulate(
    p: &Problem,
    tw: Option<&String>,
    ic: Option<&Vec<f64>>,
    t_end: Option<f64>,
    step: Option<f64>,
    watch: &[String],
    csv: Option<&std::path::PathBuf>,
) -> Result<Report> {
    let space = &p.space;
    let n = &p.numeric;
    let ic = ic
        .or(n.ic.as_ref())
        .ok_or_else(|| Error::Usage("no initial condition (--ic or [numeric] ic)".into()))?;
    let t_end = t_end
        .or(n.t_end)
        .ok_or_else(|| Error::Usage("no end time (--t-end or [numeric] t_end)".into()))?;
    let h = step
        .or(n.step)
        .ok_or_else(|| Error::Usage("no step (--step or [numeric] step)".into()))?;
    let vp = VariationalProblem::new(space, p.lagrangian()?.clone(), twist(p, tw)?.cloned())?;
    let nf = solve_accelerations(space, &equations(&vp)?)?;
    let slots = state_slots(space);
    let mut watched = Vec::new();
    for name in watch {
        let e = match (p.quantities.get(name), name.strip_prefix("J_")) {
            (Some(e), _) => e.clone(),
            (None, Some(f)) if p.fields.contains_key(f) => {
                conserved_quantity(&vp, p.field(f)?, f, false)?.components[0].clone()
            }
            _ => return Err(Error::Usage(format!("unknown quantity `{name}`"))),
        };
        watched.push((name, compile(&e, &slots, &n.parameters, &n.catalog)?));
    }
    let traj = Integrator::new(space, &nf, &n.parameters, &n.catalog)?.integrate(ic, 0.0, t_end, h)?;
    if let Some(path) = csv {
        fs::write(path, traj.to_csv())
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut r = Report::new("simulate");
    let last = traj.states.last().expect("nonempty");
    r.line(format!(
        "flow = {}, steps = {}, h = {h:e}, t_end = {t_end}",
        tw.map_or("standard".to_string(), |t| format!("twisted ({t})")),
        traj.times.len() - 1
    ));
    let mut final_state = String::new();
    for (i, v) in last.iter().enumerate() {
        if i > 0 {
            final_state.push_str(", ");
        }
        let _ = write!(final_state, "{}={v:.10e}", slots[i + 1]);
    }
    r.line(format!("final: {final_state}"));
    let mut out = Map::new();
    for (name, c) in &watched {
        let d = drift(c, &traj)?;
        r.line(format!(
            "{name}: initial = {:.10e}, max drift = {:.3e}, relative drift = {:.3e}",
            d.initial, d.max_abs, d.relative
        ));
        out.insert(
            name.to_string(),
            json!({"initial": d.initial, "max_abs_drift": d.max_abs, "relative_drift": d.relative}),
        );
    }
    r.set("twist", json!(tw));
    r.set("step", json!(h));
    r.set("t_end", json!(t_end));
    r.set("steps", json!(traj.times.len() - 1));
    r.set("final_state", json!(last));
    r.set("watch", Value::Object(out));
    Ok(r)
}
