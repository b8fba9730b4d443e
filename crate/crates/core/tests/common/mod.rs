#![allow(dead_code)]

use twistjet::expr::FunctionDecl;
use twistjet::jet::{JetSpace, VectorField};
use twistjet::matrix::Matrix;
use twistjet::prolong::TwistForm;
use twistjet::Expr;

pub const LAGRANGIAN: &str =
    "(1/2)*(z' + (x^2+y^2)*z*f((x^2+y^2)*z))*(x'^2+y'^2) - g((x^2+y^2)*z)";

/// Expands the abbreviations F, F_β, G_β, r², ρ² used in the written-out
/// formulas.
pub fn expand(s: &str) -> String {
    s.replace("{Fb}", "f_d1((x^2+y^2)*z)")
        .replace("{Gb}", "g_d1((x^2+y^2)*z)")
        .replace("{F}", "f((x^2+y^2)*z)")
        .replace("{r2}", "(x^2+y^2)")
        .replace("{r4}", "(x^2+y^2)^2")
        .replace("{r6}", "(x^2+y^2)^3")
        .replace("{rho2}", "(x'^2+y'^2)")
}

pub struct Appendix {
    pub space: JetSpace,
    pub lagrangian: Expr,
    pub x: VectorField,
    pub y: VectorField,
    pub mu: TwistForm,
}

impl Appendix {
    pub fn new() -> Appendix {
        let mut space = JetSpace::new(&["t"], &["x", "y", "z"], 2).unwrap();
        space.add_function(FunctionDecl::new("f", 1).unwrap()).unwrap();
        space.add_function(FunctionDecl::new("g", 1).unwrap()).unwrap();
        let lagrangian = space.parse(LAGRANGIAN).unwrap();
        let x = VectorField::parse(&space, &["0"], &["-y", "x", "0"]).unwrap();
        let y = VectorField::parse(&space, &["0"], &["x", "y", "-2*z"]).unwrap();
        let mut l = Matrix::zeros(3, 3);
        l.set(2, 2, space.parse("(x^2+y^2)*f((x^2+y^2)*z)").unwrap());
        let mu = TwistForm::new(&space, vec![l]).unwrap();
        Appendix {
            space,
            lagrangian,
            x,
            y,
            mu,
        }
    }

    pub fn parse(&self, s: &str) -> Expr {
        self.space.parse(&expand(s)).unwrap()
    }
}

pub const TWISTED_EL: [&str; 3] = [
    "-2*{Gb}*x*z - 2*{F}*x'*y*y'*z - {F}*x*(x'^2 - y'^2)*z + x''*(-{F}*x^2*z - {F}*y^2*z - z') - {F}*x^2*x'*z' \
     - {F}*x'*y^2*z' - {Fb}*{r2}*z*(x*(x'^2 - y'^2)*z + x^2*x'*z' + x'*y*(2*y'*z + y*z')) - x'*z''",
    "-2*{Gb}*y*z + {F}*x'^2*y*z - 2*{F}*x*x'*y'*z - {F}*y*y'^2*z + y''*(-{F}*x^2*z - {F}*y^2*z - z') - {F}*x^2*y'*z' \
     - {F}*y^2*y'*z' - {Fb}*{r2}*z*(-x'^2*y*z + 2*x*x'*y'*z + y'*(y*y'*z + x^2*z' + y^2*z')) - y'*z''",
    "-x'*x'' - y'*y'' + (1/2)*(-2*{Gb}*{r2} + {F}*{r2}*{rho2} + {r2}*{rho2}*({F} + {Fb}*{r2}*z))",
];

/// Solved accelerations. The z equation closes one parenthesis that the
/// typeset formula leaves open.
pub const ACCELERATIONS: [&str; 3] = [
    "({rho2}*({F}*{r2}*z + z'))^-1 * ((1/2)*(2*{F}^2*{r4}*{rho2}*x'*z + (-2*{Gb} + {Fb}*{r2}*{rho2}*z)*(2*x*y'^2*z \
     + x'*(-2*y*y'*z + x^2*z' + y^2*z')) + {F}*({Fb}*{r6}*{rho2}*x'*z^2 + 2*(-{Gb}*{r4}*x'*z \
     + {rho2}*(x*y'^2*z + x'*(-y*y'*z + x^2*z' + y^2*z'))))))",
    "-({rho2}*({F}*{r2}*z + z'))^-1 * (-x'*(x'*y - x*y')*z*(-2*{Gb} + {F}*{rho2} + {Fb}*{r2}*{rho2}*z) \
     + {r2}*(1/2)*y'*(-2*{Gb} + 2*{F}*{rho2} + {Fb}*{r2}*{rho2}*z)*(-{F}*{r2}*z - z'))",
    "-(2*{rho2})^-1 * ((2*{F}^2*{r4}*{rho2}*z - 2*{Gb}*(-2*x*x'*z + x^2*z' + y*(-2*y'*z + y*z')) \
     + {Fb}*{r2}*{rho2}*z*(2*x*x'*z + 3*x^2*z' + y*(2*y'*z + 3*y*z')) + {F}*({Fb}*{r6}*{rho2}*z^2 \
     + 2*(-{Gb}*{r4}*z + {rho2}*(x*x'*z + 2*x^2*z' + y*(y'*z + 2*y*z'))))))",
];

pub const J_X: &str = "x*y'*({F}*{r2}*z + z') - y*x'*({F}*{r2}*z + z')";
pub const J_Y: &str = "x*x'*({F}*{r2}*z + z') + y*y'*({F}*{r2}*z + z') - {rho2}*z";

pub const DT_J_X: &str = "-2*{F}*x*x'^2*y*z + 2*{F}*x^2*x'*y'*z - 2*{F}*x'*y^2*y'*z + 2*{F}*x*y*y'^2*z \
    - {F}*x^2*x'*y*z' - {F}*x'*y^3*z' + {F}*x^3*y'*z' + {F}*x*y^2*y'*z' + y''*({F}*x^3*z + {F}*x*y^2*z + x*z') \
    + x''*(-{F}*x^2*y*z - {F}*y^3*z - y*z') + {Fb}*{r2}*(-x'*y + x*y')*z*(2*x*x'*z + x^2*z' \
    + y*(2*y'*z + y*z')) + (-x'*y + x*y')*z''";

pub const DT_J_Y: &str = "3*{F}*x^2*x'^2*z + {F}*x'^2*y^2*z + 4*{F}*x*x'*y*y'*z + {F}*x^2*y'^2*z + 3*{F}*y^2*y'^2*z \
    + {F}*x^3*x'*z' + {F}*x*x'*y^2*z' + {F}*x^2*y*y'*z' + {F}*y^3*y'*z' \
    + x''*({F}*x^3*z - 2*x'*z + {F}*x*y^2*z + x*z') + y''*({F}*x^2*y*z + {F}*y^3*z - 2*y'*z + y*z') \
    + {Fb}*{r2}*(x*x' + y*y')*z*(2*x*x'*z + x^2*z' + y*(2*y'*z + y*z')) + (x*x' + y*y')*z''";

pub const Y_STANDARD_RESIDUAL: &str = "(x^2+y^2)*(x'^2+y'^2)*z*f((x^2+y^2)*z)";
pub const J_Y_STANDARD_RESIDUAL: &str = "{F}*{r2}*{rho2}*z";
