//! Exact linear algebra over the rationals.
//!
//! Vectors are plain `Vec<Rational>`; matrices are dense and row-major. All
//! routines are deterministic: pivots are chosen as the first nonzero entry
//! scanning columns left to right, free variables are set to zero, and
//! complements are completed greedily with standard basis vectors.

use crate::error::{dim_err, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rational = num_rational::BigRational;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-2/5"` and the like.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn zero_vec(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Rational> {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Rational, a: &[Rational]) -> Vec<Rational> {
    a.iter().map(|x| c * x).collect()
}

/// `acc += c * v`
pub fn axpy(acc: &mut [Rational], c: &Rational, v: &[Rational]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += c * x;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: zero_vec(rows * cols) }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return dim_err(format!("row {i} has length {}, expected {cols}", row.len()));
            }
            data.extend(row);
        }
        Ok(QMatrix { rows: r, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| q(x))).collect();
        QMatrix { rows: rows.len(), cols, data }
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(columns: &[Vec<Rational>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
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

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.data)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return dim_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return dim_err(format!("cannot apply {}x{} to vector of length {}", self.rows, self.cols, v.len()));
        }
        let mut out = zero_vec(self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            for (a, x) in self.row(i).iter().zip(v) {
                if !a.is_zero() && !x.is_zero() {
                    *o += a * x;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err("matrix sum of different shapes");
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(QMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err("matrix difference of different shapes");
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(QMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows {
            return dim_err("hstack of matrices with different row counts");
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.cols {
            return dim_err("vstack of matrices with different column counts");
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(QMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &QMatrix, b: &QMatrix, c: &QMatrix, d: &QMatrix) -> Result<QMatrix> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    pub fn rank(&self) -> usize {
        rref(self).rank()
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if self.rows != self.cols {
            return dim_err("inverse of a non-square matrix");
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(n))?;
        let r = rref(&aug);
        if r.pivots.len() < n || (n > 0 && r.pivots[n - 1] != n - 1) {
            return Err(crate::error::Error::Validation("matrix is singular".into()));
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.reduced.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }
}

#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: QMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Reduced row echelon form by Gauss-Jordan elimination.
pub fn rref(a: &QMatrix) -> Rref {
    let mut m = a.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
        if p != r {
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
        }
        let inv = m.get(r, c).recip();
        for j in c..m.cols {
            let idx = r * m.cols + j;
            m.data[idx] = &m.data[idx] * &inv;
        }
        let pivot_row: Vec<Rational> = m.row(r).to_vec();
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let f = m.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in c..m.cols {
                if !pivot_row[j].is_zero() {
                    let idx = i * m.cols + j;
                    m.data[idx] -= &f * &pivot_row[j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { reduced: m, pivots }
}

/// One solution of `a x = b` with free variables set to zero, or `None` when
/// the system is inconsistent.
pub fn solve(a: &QMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    if b.len() != a.rows {
        return dim_err(format!("right-hand side has length {}, expected {}", b.len(), a.rows));
    }
    let bm = QMatrix::from_columns(&[b.to_vec()], a.rows);
    let r = rref(&a.hstack(&bm)?);
    if r.pivots.last() == Some(&a.cols) {
        return Ok(None);
    }
    let mut x = zero_vec(a.cols);
    for (i, &p) in r.pivots.iter().enumerate() {
        x[p] = r.reduced.get(i, a.cols).clone();
    }
    Ok(Some(x))
}

/// Basis of the null space: one vector per free column, with a one in that
/// column and the negated pivot-row entries in the pivot columns.
pub fn kernel_basis(a: &QMatrix) -> Vec<Vec<Rational>> {
    let r = rref(a);
    let mut is_pivot = vec![false; a.cols];
    for &p in &r.pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for f in (0..a.cols).filter(|&c| !is_pivot[c]) {
        let mut v = unit_vec(a.cols, f);
        for (i, &p) in r.pivots.iter().enumerate() {
            v[p] = -r.reduced.get(i, f).clone();
        }
        out.push(v);
    }
    out
}

/// Incrementally maintained echelon basis of a subspace, used for repeated
/// membership tests and coordinate extraction.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    /// Reduced rows with their pivot column, plus the combination of the
    /// inserted vectors that produced each row.
    rows: Vec<(usize, Vec<Rational>, Vec<Rational>)>,
    inserted: usize,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon { dim, rows: Vec::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the current rows. Returns the remainder and the
    /// coefficients `c` over the inserted vectors with `v = remainder + sum c_i w_i`.
    fn reduce(&self, v: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let mut rem = v.to_vec();
        let mut comb = zero_vec(self.inserted);
        for (p, row, rc) in &self.rows {
            let f = rem[*p].clone();
            if f.is_zero() {
                continue;
            }
            let nf = -f.clone();
            axpy(&mut rem, &nf, row);
            for (c, x) in comb.iter_mut().zip(rc) {
                if !x.is_zero() {
                    *c += &f * x;
                }
            }
        }
        (rem, comb)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        is_zero_vec(&self.reduce(v).0)
    }

    /// Coefficients of `v` over the vectors inserted so far (including the
    /// dependent ones, which get zero weight), or `None` if `v` is outside the span.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        let (rem, comb) = self.reduce(v);
        is_zero_vec(&rem).then_some(comb)
    }

    /// Inserts `v`; returns `true` if it enlarged the span.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.dim, "echelon insert dimension");
        let (rem, comb) = self.reduce(v);
        self.inserted += 1;
        for (_, _, rc) in self.rows.iter_mut() {
            rc.push(Rational::zero());
        }
        let Some(p) = rem.iter().position(|x| !x.is_zero()) else { return false };
        let inv = rem[p].recip();
        let row = scale_vec(&inv, &rem);
        // row = (v - sum comb_i w_i) / rem[p]
        let mut rc: Vec<Rational> = comb.iter().map(|c| -c * &inv).collect();
        rc.push(inv);
        for (_, other, orc) in self.rows.iter_mut() {
            let f = other[p].clone();
            if f.is_zero() {
                continue;
            }
            let nf = -f;
            axpy(other, &nf, &row);
            axpy(orc, &nf, &rc);
        }
        let at = self.rows.partition_point(|(q, _, _)| *q < p);
        self.rows.insert(at, (p, row, rc));
        true
    }
}

/// Greedily picks, in order, the candidates that are independent of `sub`
/// and of the candidates already picked. Returns their indices.
pub fn extend_basis(sub: &[Vec<Rational>], candidates: &[Vec<Rational>], dim: usize) -> Vec<usize> {
    let mut e = Echelon::new(dim);
    for s in sub {
        e.insert(s);
    }
    let mut out = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        if e.insert(c) {
            out.push(i);
        }
    }
    out
}

/// Lexicographically first standard basis vectors completing `sub` to a
/// basis of the ambient space.
pub fn quotient_basis(sub: &[Vec<Rational>], ambient_dim: usize) -> Vec<Vec<Rational>> {
    let std: Vec<Vec<Rational>> = (0..ambient_dim).map(|i| unit_vec(ambient_dim, i)).collect();
    extend_basis(sub, &std, ambient_dim).into_iter().map(|i| std[i].clone()).collect()
}

/// Linearly independent subfamily (greedy, in order) spanning the same space.
pub fn independent_subset(vectors: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    extend_basis(&[], vectors, dim).into_iter().map(|i| vectors[i].clone()).collect()
}

/// Bases adapted to a linear map `psi: V -> W`.
///
/// With `domain_change = [coimage | kernel]` and `codomain_change = [image | cokernel]`
/// (as column blocks) the map becomes `[[I, 0], [0, 0]]`, and each image vector
/// is `psi` applied to the matching coimage vector.
#[derive(Clone, Debug)]
pub struct AdaptedSplit {
    pub coimage: Vec<Vec<Rational>>,
    pub kernel: Vec<Vec<Rational>>,
    pub image: Vec<Vec<Rational>>,
    pub cokernel: Vec<Vec<Rational>>,
    pub domain_change: QMatrix,
    pub codomain_change: QMatrix,
}

pub fn adapted_split(psi: &QMatrix) -> Result<AdaptedSplit> {
    let (m, n) = (psi.rows(), psi.cols());
    let kernel = kernel_basis(psi);
    let coimage = quotient_basis(&kernel, n);
    let image = coimage.iter().map(|v| psi.mul_vec(v)).collect::<Result<Vec<_>>>()?;
    let cokernel = quotient_basis(&image, m);
    let mut dom = coimage.clone();
    dom.extend(kernel.iter().cloned());
    let mut cod = image.clone();
    cod.extend(cokernel.iter().cloned());
    let domain_change = QMatrix::from_columns(&dom, n);
    let codomain_change = QMatrix::from_columns(&cod, m);
    Ok(AdaptedSplit { coimage, kernel, image, cokernel, domain_change, codomain_change })
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

pub fn abs_max(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn kernel_of_row() {
        assert_eq!(kernel_basis(&QMatrix::from_i64(&[&[1, 2]])), vec![v(&[-2, 1])]);
    }

    #[test]
    fn quotient_of_diagonal() {
        assert_eq!(quotient_basis(&[v(&[1, 1])], 2), vec![v(&[1, 0])]);
    }

    #[test]
    fn adapted_split_of_projection() {
        let s = adapted_split(&QMatrix::from_i64(&[&[1, 0]])).unwrap();
        assert_eq!(s.kernel, vec![v(&[0, 1])]);
        assert_eq!(s.coimage, vec![v(&[1, 0])]);
        assert_eq!(s.image, vec![v(&[1])]);
        assert!(s.cokernel.is_empty());
    }

    #[test]
    fn solve_inconsistent() {
        let a = QMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&a, &v(&[1, 3])).unwrap(), None);
        assert_eq!(solve(&a, &v(&[1, 2])).unwrap(), Some(v(&[1, 0])));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("-6/4"), Some(qf(-3, 2)));
        assert_eq!(format_rational(&qf(-3, 2)), "-3/2");
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn echelon_coordinates() {
        let mut e = Echelon::new(2);
        assert!(e.insert(&v(&[1, 1])));
        assert!(!e.insert(&v(&[2, 2])));
        assert!(e.insert(&v(&[0, 1])));
        let c = e.coordinates(&v(&[3, 5])).unwrap();
        assert_eq!(c, v(&[3, 0, 2]));
    }
}
