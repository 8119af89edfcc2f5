//! Dense matrices and vectors over [`Rational`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Vector = Vec<Rational>;

/// Row-major dense matrix with explicit dimensions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Matrix> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::Dimension("matrix needs at least one column".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix from integer-like literals; panics on malformed input.
    pub fn from_strs(rows: &[&[&str]]) -> Matrix {
        Matrix::from_rows(
            rows.iter().map(|row| row.iter().map(|s| crate::rational::r(s)).collect()).collect(),
        )
        .expect("well-formed matrix literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix has {} columns but vector has length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn mul_vec_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix has {} columns but vector has length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a.to_f64() * b).sum())
            .collect())
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
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + &(a * other.get(k, j));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix sum needs equal shapes".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension("horizontal concatenation needs equal row counts".into()));
        }
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().chain(other.row(i)).cloned().collect())
            .collect();
        Matrix::from_rows(rows)
    }

    /// Vertical concatenation (stacking `other` below `self`).
    pub fn vconcat(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension("vertical concatenation needs equal column counts".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Matrix, D::Error> {
        let rows = Vec::<Vec<Rational>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, _)| !x.is_zero()).map(|(x, y)| x * y).sum()
}

/// Vertical concatenation of column vectors.
pub fn vcat(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().chain(b).cloned().collect()
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Rational::to_f64).collect()
}

pub fn ints(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| Rational::from_int(x)).collect()
}

/// Set of 1-based indices at which `x` attains its maximum.
pub fn argmax_set(x: &[Rational]) -> Result<Vec<usize>> {
    let m = x.iter().max().ok_or_else(|| Error::Dimension("argmax of an empty vector".into()))?;
    Ok(x.iter().enumerate().filter(|(_, v)| *v == m).map(|(i, _)| i + 1).collect())
}

/// Float counterpart of [`argmax_set`].
pub fn argmax_set_f64(x: &[f64]) -> Result<Vec<usize>> {
    if x.is_empty() {
        return Err(Error::Dimension("argmax of an empty vector".into()));
    }
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(x.iter().enumerate().filter(|(_, v)| **v == m).map(|(i, _)| i + 1).collect())
}

/// A permutation of `{1..m}` stored as its image list `pi(1), …, pi(m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Permutation> {
        let m = image.len();
        let mut seen = vec![false; m];
        for &p in &image {
            if p == 0 || p > m || seen[p - 1] {
                return Err(Error::Invalid(format!("{image:?} is not a bijection on 1..{m}")));
            }
            seen[p - 1] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(m: usize) -> Permutation {
        Permutation((1..=m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p - 1] = i + 1;
        }
        Permutation(inv)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i - 1]).collect())
    }

    /// All permutations of `{1..m}` in lexicographic order.
    pub fn all(m: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            let m = used.len();
            if prefix.len() == m {
                out.push(Permutation(prefix.clone()));
                return;
            }
            for v in 1..=m {
                if !used[v - 1] {
                    used[v - 1] = true;
                    prefix.push(v);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[v - 1] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; m], &mut out);
        out
    }
}

/// `result[i] = x[pi(i)]`.
pub fn apply_permutation<T: Clone>(pi: &Permutation, x: &[T]) -> Result<Vec<T>> {
    if pi.len() != x.len() {
        return Err(Error::Dimension(format!(
            "permutation on {} points applied to a vector of length {}",
            pi.len(),
            x.len()
        )));
    }
    Ok(pi.0.iter().map(|&p| x[p - 1].clone()).collect())
}
