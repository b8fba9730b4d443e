//! Dense matrices of expressions over the rational-function field.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Context, Expr};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn parse(rows: &[Vec<String>], ctx: &Context) -> Result<Matrix> {
        let parsed = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| crate::expr::parse(s, ctx))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(parsed)
    }

    pub fn column(v: Vec<Expr>) -> Matrix {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Expr>> {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Matrix> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> Matrix {
        self.map(|e| -e)
    }

    pub fn scale(&self, k: &Expr) -> Matrix {
        self.map(|e| e * k)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Expr::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Result<Vec<Expr>> {
        Ok(self.mul(&Matrix::column(v.to_vec()))?.data)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Matrix) -> Result<Matrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Row reduction shared by `determinant` and `inverse`: returns the
    /// determinant and, when requested, the inverse.
    fn eliminate(&self, want_inverse: bool) -> Result<(Expr, Option<Matrix>)> {
        if !self.is_square() {
            return Err(Error::Dimension("square matrix required".into()));
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = Matrix::identity(n).to_rows();
        let mut det = Expr::one();
        for col in 0..n {
            // Prefer the pivot with the fewest terms to limit expression swell.
            let pivot = (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .min_by_key(|&r| a[r][col].numer().len() + a[r][col].denom().len());
            let Some(p) = pivot else {
                return Ok((Expr::zero(), None));
            };
            if p != col {
                a.swap(p, col);
                inv.swap(p, col);
                det = -det;
            }
            let piv = a[col][col].clone();
            det = &det * &piv;
            let pinv = piv.recip()?;
            for j in 0..n {
                a[col][j] = &a[col][j] * &pinv;
                if want_inverse {
                    inv[col][j] = &inv[col][j] * &pinv;
                }
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                if !want_inverse && r < col {
                    continue;
                }
                let factor = a[r][col].clone();
                for j in 0..n {
                    if !a[col][j].is_zero() {
                        a[r][j] = &a[r][j] - &(&factor * &a[col][j]);
                    }
                    if want_inverse && !inv[col][j].is_zero() {
                        inv[r][j] = &inv[r][j] - &(&factor * &inv[col][j]);
                    }
                }
            }
        }
        let inverse = if want_inverse {
            Some(Matrix::from_rows(inv)?)
        } else {
            None
        };
        Ok((det, inverse))
    }

    pub fn determinant(&self) -> Result<Expr> {
        Ok(self.eliminate(false)?.0)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        match self.eliminate(true)? {
            (_, Some(inv)) => Ok(inv),
            (det, None) => Err(Error::Singular {
                det: det.to_string(),
            }),
        }
    }

    /// Solves `self * x = rhs` for a square nonsingular matrix.
    pub fn solve(&self, rhs: &[Expr]) -> Result<Vec<Expr>> {
        self.inverse()?.mul_vec(rhs)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let s: Vec<String> = row.iter().map(Expr::to_string).collect();
            write!(f, "{}", s.join(", "))?;
        }
        write!(f, "]")
    }
}
