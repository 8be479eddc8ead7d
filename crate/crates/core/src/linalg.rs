//! Exact integer and rational matrices: Hermite and Smith normal forms,
//! saturated kernels, determinants and signatures.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
}

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows; `cols` is needed to describe 0-row shapes.
    pub fn try_from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>], cols: usize) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Ragged { row: i, found: r.len(), expected: cols });
            }
            data.extend(r.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    /// Panics on ragged input; use for literals.
    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::try_from_rows(rows, cols).expect("ragged matrix literal")
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::from_rows(&v)
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn block_diag(blocks: &[IntMatrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entries as machine integers, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| self.row(i).iter().map(ToPrimitive::to_i64).collect()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
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
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Congruence transform `pᵀ · self · p`.
    pub fn congruent(&self, p: &IntMatrix) -> IntMatrix {
        p.transpose().mul(self).mul(p)
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diag(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += t;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += t;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> Result<BigInt, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        negate = !negate;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        let d = a.get(n - 1, n - 1).clone();
        Ok(if negate { -d } else { d })
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hnf(self);
        (0..h.rows).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().map(|d| d.abs().is_one()).unwrap_or(false)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> =
                (0..self.cols).map(|j| format!("{:>w$}", cells[i * self.cols + j], w = width)).collect();
            writeln!(f, "[{}]", line.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<IntCell> = self.row(i).iter().map(|x| IntCell(x.clone())).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<IntCell>> = Vec::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        let rows: Vec<Vec<BigInt>> = rows.into_iter().map(|r| r.into_iter().map(|c| c.0).collect()).collect();
        IntMatrix::try_from_rows(&rows, cols).map_err(de::Error::custom)
    }
}

/// Integer that serializes as a JSON number when it fits in i64, else as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntCell(pub BigInt);

impl Serialize for IntCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for IntCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            I(i64),
            U(u64),
            S(String),
        }
        Ok(IntCell(match Raw::deserialize(d)? {
            Raw::I(v) => BigInt::from(v),
            Raw::U(v) => BigInt::from(v),
            Raw::S(s) => s.trim().parse().map_err(de::Error::custom)?,
        }))
    }
}

/// Row-style Hermite normal form: returns `(h, u)` with `h = u·m`, `u` unimodular,
/// `h` in echelon form with positive pivots and entries above each pivot in `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut p = 0;
    for col in 0..m.cols {
        if p == m.rows {
            break;
        }
        loop {
            let best = (p..m.rows).filter(|&r| !h.get(r, col).is_zero()).min_by_key(|&r| h.get(r, col).abs());
            let Some(best) = best else { break };
            h.swap_rows(p, best);
            u.swap_rows(p, best);
            let mut clean = true;
            for r in p + 1..m.rows {
                let q = h.get(r, col).div_floor(h.get(p, col));
                let k = -q;
                h.add_row_multiple(r, p, &k);
                u.add_row_multiple(r, p, &k);
                if !h.get(r, col).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h.get(p, col).is_zero() {
            continue;
        }
        if h.get(p, col).is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        for r in 0..p {
            let k = -h.get(r, col).div_floor(h.get(p, col));
            h.add_row_multiple(r, p, &k);
            u.add_row_multiple(r, p, &k);
        }
        p += 1;
    }
    (h, u)
}

/// Smith normal form with transforms: `s = u·m·v`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// Diagonal entries of `s` (length min(rows, cols)).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.s.diag()
    }
}

pub fn snf(m: &IntMatrix) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !s.get(i, j).is_zero())
            .min_by_key(|&(i, j)| s.get(i, j).abs());
        let Some((pi, pj)) = pivot else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let k = -s.get(i, t).div_floor(s.get(t, t));
                s.add_row_multiple(i, t, &k);
                u.add_row_multiple(i, t, &k);
                clean &= s.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                let k = -s.get(t, j).div_floor(s.get(t, t));
                s.add_col_multiple(j, t, &k);
                v.add_col_multiple(j, t, &k);
                clean &= s.get(t, j).is_zero();
            }
            if !clean {
                let row_min = (t + 1..rows).filter(|&i| !s.get(i, t).is_zero()).min_by_key(|&i| s.get(i, t).abs());
                let col_min = (t + 1..cols).filter(|&j| !s.get(t, j).is_zero()).min_by_key(|&j| s.get(t, j).abs());
                match (row_min, col_min) {
                    (Some(i), Some(j)) if s.get(t, j).abs() < s.get(i, t).abs() => {
                        s.swap_cols(t, j);
                        v.swap_cols(t, j);
                    }
                    (Some(i), _) => {
                        s.swap_rows(t, i);
                        u.swap_rows(t, i);
                    }
                    (None, Some(j)) => {
                        s.swap_cols(t, j);
                        v.swap_cols(t, j);
                    }
                    (None, None) => unreachable!(),
                }
                continue;
            }
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !s.get(i, j).is_multiple_of(s.get(t, t)));
            match offender {
                Some((i, _)) => {
                    s.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    Snf { s, u, v }
}

/// Saturated basis of the integer kernel `{x : m·x = 0}`, as columns.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(&m.transpose());
    let zero_rows: Vec<usize> = (0..h.rows).filter(|&i| h.row(i).iter().all(Zero::is_zero)).collect();
    IntMatrix::from_fn(m.cols, zero_rows.len(), |i, j| u.get(zero_rows[j], i).clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.pos, self.neg)
    }
}

/// Inertia of a symmetric matrix by exact congruence diagonalization over Q.
/// A zero diagonal with a nonzero off-diagonal partner is first combined into a
/// nonzero pivot (the 2×2 hyperbolic block case).
pub fn signature(g: &IntMatrix) -> Signature {
    assert!(g.is_symmetric(), "signature needs a symmetric matrix");
    let n = g.rows;
    let mut a = RatMatrix::from_int(g);
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        let diag = (k..n).find(|&i| !a.get(i, i).is_zero());
        let i = match diag {
            Some(i) => i,
            None => {
                let off = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !a.get(i, j).is_zero());
                let Some((i, j)) = off else { break };
                // row_i += row_j, col_i += col_j
                for c in 0..n {
                    let t = a.get(j, c).clone();
                    *a.get_mut(i, c) += t;
                }
                for r in 0..n {
                    let t = a.get(r, j).clone();
                    *a.get_mut(r, i) += t;
                }
                i
            }
        };
        a.swap_rows(i, k);
        a.swap_cols(i, k);
        let p = a.get(k, k).clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            let f = a.get(r, k) / &p;
            if f.is_zero() {
                continue;
            }
            for c in k + 1..n {
                let t = &f * a.get(k, c);
                *a.get_mut(r, c) -= t;
            }
        }
        for r in k + 1..n {
            *a.get_mut(r, k) = BigRational::zero();
            *a.get_mut(k, r) = BigRational::zero();
        }
    }
    Signature { pos, neg, zero: n - pos - neg }
}

/// Dense matrix of exact rationals, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn from_int(m: &IntMatrix) -> Self {
        RatMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_int(&IntMatrix::identity(n))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut data = vec![BigRational::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        RatMatrix { rows: self.rows, cols: other.cols, data }
    }

    /// Gauss–Jordan inverse; `None` when singular or non-square.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&i| !a.get(i, k).is_zero())?;
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let pivot = a.get(k, k).clone();
            for j in 0..n {
                *a.get_mut(k, j) /= &pivot;
                *inv.get_mut(k, j) /= &pivot;
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let t = &f * a.get(k, j);
                    *a.get_mut(i, j) -= t;
                    let t = &f * inv.get(k, j);
                    *inv.get_mut(i, j) -= t;
                }
            }
        }
        Some(inv)
    }

    /// Integer matrix if every entry is integral.
    pub fn to_int(&self) -> Option<IntMatrix> {
        if self.data.iter().all(|x| x.is_integer()) {
            Some(IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.to_integer()).collect() })
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn is_hnf(h: &IntMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let lead = (0..h.cols()).find(|&j| !h.get(i, j).is_zero());
            match lead {
                None => seen_zero = true,
                Some(j) => {
                    if seen_zero || last_pivot.is_some_and(|p| j <= p) || !h.get(i, j).is_positive() {
                        return false;
                    }
                    for r in 0..i {
                        if h.get(r, j).is_negative() || h.get(r, j) >= h.get(i, j) {
                            return false;
                        }
                    }
                    last_pivot = Some(j);
                }
            }
        }
        true
    }

    fn cofactor_det(a: &[Vec<i64>]) -> i64 {
        let n = a.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    a[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * a[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn hnf_trivial_cases() {
        let (h, u) = hnf(&IntMatrix::identity(3));
        assert_eq!(h, IntMatrix::identity(3));
        assert_eq!(u, IntMatrix::identity(3));
        let (h, u) = hnf(&m(&[&[0, 1], &[1, 0]]));
        assert_eq!(h, IntMatrix::identity(2));
        assert_eq!(u, m(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn hnf_preserves_determinant() {
        let a = m(&[&[2, 4], &[6, 8]]);
        let (h, u) = hnf(&a);
        assert!(is_hnf(&h));
        assert_eq!(u.mul(&a), h);
        assert_eq!(h.det().unwrap().abs(), BigInt::from(cofactor_det(&[vec![2, 4], vec![6, 8]]).abs()));
        assert_eq!(h.det().unwrap(), BigInt::from(8));
    }

    #[test]
    fn snf_examples() {
        let d = snf(&m(&[&[2, 0], &[0, 4]]));
        assert_eq!(d.s, m(&[&[2, 0], &[0, 4]]));
        assert_eq!(snf(&m(&[&[0, 1], &[1, 0]])).s, IntMatrix::identity(2));
        let a = m(&[&[2, 1], &[1, -2]]);
        let d = snf(&a);
        assert_eq!(d.s, m(&[&[1, 0], &[0, 5]]));
        assert_eq!(d.u.mul(&a).mul(&d.v), d.s);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&IntMatrix::zeros(1, 3)).rows(), 3);
        assert_eq!(kernel_basis(&IntMatrix::zeros(1, 3)).cols(), 3);
        assert!(kernel_basis(&IntMatrix::zeros(1, 3)).is_unimodular());
        assert_eq!(kernel_basis(&IntMatrix::identity(3)).cols(), 0);
        let a = m(&[&[1, 1, 1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        let f = snf(&k).invariant_factors();
        assert!(f.iter().all(One::is_one));
    }

    #[test]
    fn signature_examples() {
        let u = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(signature(&u), Signature { pos: 1, neg: 1, zero: 0 });
        assert_eq!(signature(&m(&[&[4]])), Signature { pos: 1, neg: 0, zero: 0 });
        assert_eq!(signature(&m(&[&[0, 0], &[0, 0]])), Signature { pos: 0, neg: 0, zero: 2 });
        assert_eq!(signature(&m(&[&[1, 1], &[1, 1]])), Signature { pos: 1, neg: 0, zero: 1 });
    }

    #[test]
    fn det_examples() {
        assert_eq!(IntMatrix::identity(4).det().unwrap(), BigInt::one());
        assert_eq!(m(&[&[2, 1], &[1, -2]]).det().unwrap(), BigInt::from(-5));
        assert!(matches!(IntMatrix::zeros(2, 3).det(), Err(LinalgError::NotSquare { rows: 2, cols: 3 })));
        assert_eq!(m(&[&[0, 1, 2], &[0, 3, 4], &[0, 5, 6]]).det().unwrap(), BigInt::zero());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det().unwrap(), BigInt::from(-1));
    }

    #[test]
    fn big_entries_do_not_overflow() {
        let big = BigInt::from(i64::MAX) * BigInt::from(i64::MAX);
        let a = IntMatrix::from_rows(&[vec![big.clone(), BigInt::one()], vec![BigInt::one(), BigInt::zero()]]);
        assert_eq!(a.det().unwrap(), BigInt::from(-1));
        let d = snf(&a);
        assert_eq!(d.s, IntMatrix::identity(2));
        let json = serde_json::to_string(&a).unwrap();
        let back: IntMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn rational_inverse_roundtrip() {
        let a = m(&[&[2, 1], &[1, -2]]);
        let r = RatMatrix::from_int(&a);
        let inv = r.inverse().unwrap();
        assert_eq!(r.mul(&inv).to_int().unwrap(), IntMatrix::identity(2));
        assert!(RatMatrix::from_int(&m(&[&[1, 2], &[2, 4]])).inverse().is_none());
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..5)
            .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-9i64..10, c), r))
    }

    fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
        let mut p = IntMatrix::identity(n);
        for &(a, b, k) in ops {
            let (a, b) = (a % n, b % n);
            if a != b {
                p.add_row_multiple(a, b, &BigInt::from(k));
            } else {
                p.negate_row(a);
            }
        }
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn hnf_postconditions(rows in small_matrix()) {
            let a = IntMatrix::from_rows(&rows);
            let (h, u) = hnf(&a);
            prop_assert!(u.is_unimodular());
            prop_assert_eq!(u.mul(&a), h.clone());
            prop_assert!(is_hnf(&h));
        }

        #[test]
        fn snf_postconditions(rows in small_matrix()) {
            let a = IntMatrix::from_rows(&rows);
            let d = snf(&a);
            prop_assert!(d.u.is_unimodular());
            prop_assert!(d.v.is_unimodular());
            prop_assert_eq!(d.u.mul(&a).mul(&d.v), d.s.clone());
            prop_assert!(d.s.is_diagonal());
            let f = d.invariant_factors();
            prop_assert!(f.iter().all(|x| !x.is_negative()));
            for w in f.windows(2) {
                prop_assert!(w[1].is_multiple_of(&w[0]) || w[0].is_zero() && w[1].is_zero());
            }
            if a.is_square() {
                let det = a.det().unwrap().abs();
                if !det.is_zero() {
                    prop_assert_eq!(f.iter().product::<BigInt>(), det);
                }
            }
        }

        #[test]
        fn det_matches_cofactor(rows in (1usize..5).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-9i64..10, n), n))) {
            let a = IntMatrix::from_rows(&rows);
            prop_assert_eq!(a.det().unwrap(), BigInt::from(cofactor_det(&rows)));
            prop_assert_eq!(a.rank(), a.transpose().rank());
        }

        #[test]
        fn kernel_is_saturated(rows in small_matrix()) {
            let a = IntMatrix::from_rows(&rows);
            let k = kernel_basis(&a);
            prop_assert_eq!(k.cols() + a.rank(), a.cols());
            prop_assert!(a.mul(&k).is_zero());
            if k.cols() > 0 {
                prop_assert!(snf(&k).invariant_factors().iter().all(One::is_one));
            }
        }

        #[test]
        fn signature_congruence_invariant(
            half in proptest::collection::vec(-5i64..6, 10),
            ops in proptest::collection::vec((0usize..4, 0usize..4, -3i64..4), 0..8),
        ) {
            let n = 4;
            let g = IntMatrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                BigInt::from(half[a * n - a * (a + 1) / 2 + b])
            });
            let p = unimodular(n, &ops);
            let s = signature(&g);
            prop_assert_eq!(signature(&g.congruent(&p)), s);
            prop_assert_eq!(s.pos + s.neg, g.rank());
        }
    }
}
