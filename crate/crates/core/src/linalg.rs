//! Linear algebra over `Z/p^N`: Howell forms, kernels and subquotients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, vp_u64};

/// A dense matrix over `Z/p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZmodMatrix {
    p: u64,
    n: u32,
    modulus: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ZmodMatrix {
    /// The zero matrix.
    pub fn zeros(p: u64, n: u32, rows: usize, cols: usize) -> Self {
        ZmodMatrix { p, n, modulus: p.pow(n), rows, cols, data: vec![0; rows * cols] }
    }

    /// The identity matrix.
    pub fn identity(p: u64, n: u32, size: usize) -> Self {
        let mut m = Self::zeros(p, n, size, size);
        for i in 0..size {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from signed rows, reducing entries.
    pub fn from_rows(p: u64, n: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::SpecMismatch("ragged matrix".into()));
        }
        let mut m = Self::zeros(p, n, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x.rem_euclid(m.modulus as i64) as u64);
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn exponent(&self) -> u32 {
        self.n
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        self.data[i * self.cols + j] = x % self.modulus;
    }
    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<u64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    /// All rows.
    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Builds a matrix from unsigned rows with the given column count.
    pub fn from_row_vecs(p: u64, n: u32, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(p, n, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.n, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product.
    pub fn mul(&self, other: &ZmodMatrix) -> Result<Self> {
        if self.cols != other.rows || self.modulus != other.modulus {
            return Err(Error::SpecMismatch("matrix shapes do not match".into()));
        }
        let m = self.modulus as u128;
        let mut out = Self::zeros(self.p, self.n, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u128;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = ((out.data[idx] as u128 + a * other.get(k, j) as u128) % m) as u64;
                }
            }
        }
        Ok(out)
    }

    /// `M v` for a column vector `v`.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let m = self.modulus as u128;
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(0u128, |acc, j| (acc + self.get(i, j) as u128 * v[j] as u128) % m) as u64
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }
}

fn val(x: u64, p: u64, n: u32) -> u32 {
    if x == 0 {
        n
    } else {
        vp_u64(x, p)
    }
}

fn axpy(dst: &mut [u64], a: u64, src: &[u64], m: u64) {
    if a == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src.iter()) {
        *d = ((*d as u128 + a as u128 * s as u128) % m as u128) as u64;
    }
}

fn scale(v: &mut [u64], a: u64, m: u64) {
    for x in v.iter_mut() {
        *x = ((*x as u128 * a as u128) % m as u128) as u64;
    }
}

/// A Howell form together with the transform producing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HowellForm {
    /// Nonzero rows of the form, pivots strictly increasing.
    pub form: ZmodMatrix,
    /// `transform * M = form`.
    pub transform: ZmodMatrix,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
}

impl HowellForm {
    /// Whether `v` lies in the row span.
    pub fn contains(&self, v: &[u64]) -> bool {
        let m = self.form.modulus;
        let (p, n) = (self.form.p, self.form.n);
        let mut x: Vec<u64> = v.iter().map(|&a| a % m).collect();
        for (r, &c) in self.pivots.iter().enumerate() {
            if x[c] == 0 {
                continue;
            }
            let piv = self.form.get(r, c);
            let pv = val(piv, p, n);
            if val(x[c], p, n) < pv {
                return false;
            }
            let q = x[c] / p.pow(pv);
            let row = self.form.row(r);
            axpy(&mut x, m - q % m, &row, m);
        }
        x.iter().all(|&a| a == 0)
    }

    /// `log_p` of the cardinality of the row span.
    pub fn log_cardinality(&self) -> u32 {
        let (p, n) = (self.form.p, self.form.n);
        self.pivots.iter().enumerate().map(|(r, &c)| n - val(self.form.get(r, c), p, n)).sum()
    }
}

/// Howell normal form of the row span of `m`.
///
/// Pivots are powers of `p`, entries above a pivot are reduced modulo it,
/// and the form is saturated so that membership is decided by reduction.
pub fn howell_form(m: &ZmodMatrix) -> HowellForm {
    let (p, n, md) = (m.p, m.n, m.modulus);
    let nr = m.rows;
    let mut rows: Vec<(Vec<u64>, Vec<u64>)> = (0..nr)
        .map(|i| {
            let mut t = vec![0u64; nr];
            t[i] = 1 % md;
            (m.row(i), t)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        // pivot: minimal valuation in column c among rows r..
        let best = (r..rows.len())
            .filter(|&i| rows[i].0[c] != 0)
            .min_by_key(|&i| val(rows[i].0[c], p, n));
        let Some(b) = best else { continue };
        rows.swap(r, b);
        let v = val(rows[r].0[c], p, n);
        let unit = rows[r].0[c] / p.pow(v);
        let inv = mod_inverse(unit as i128, md as i128).expect("unit") as u64;
        scale(&mut rows[r].0, inv, md);
        scale(&mut rows[r].1, inv, md);
        let pv = p.pow(v);
        let (pr, pt) = rows[r].clone();
        for i in 0..rows.len() {
            if i == r {
                continue;
            }
            let e = rows[i].0[c];
            if e == 0 {
                continue;
            }
            let q = e / pv;
            if q == 0 {
                continue;
            }
            let neg = (md - q % md) % md;
            axpy(&mut rows[i].0, neg, &pr, md);
            axpy(&mut rows[i].1, neg, &pt, md);
        }
        // saturation: p^{n-v} * pivot row vanishes in column c
        if v > 0 {
            let s = p.pow(n - v);
            let mut sr = pr.clone();
            let mut st = pt.clone();
            scale(&mut sr, s, md);
            scale(&mut st, s, md);
            if sr.iter().any(|&x| x != 0) {
                rows.push((sr, st));
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    let form = ZmodMatrix::from_row_vecs(p, n, m.cols, &rows.iter().map(|x| x.0.clone()).collect::<Vec<_>>());
    let transform = ZmodMatrix::from_row_vecs(p, n, nr, &rows.iter().map(|x| x.1.clone()).collect::<Vec<_>>());
    HowellForm { form, transform, pivots }
}

/// Generators of the kernel `{v : M v = 0}`.
pub fn kernel(m: &ZmodMatrix) -> Vec<Vec<u64>> {
    // left kernel of M^T: rows of Howell([M^T | I]) with zero M^T part
    let t = m.transpose();
    let (rows, cols) = (t.rows, t.cols);
    let mut aug = ZmodMatrix::zeros(m.p, m.n, rows, cols + rows);
    for i in 0..rows {
        for j in 0..cols {
            aug.set(i, j, t.get(i, j));
        }
        aug.set(i, cols + i, 1);
    }
    let h = howell_form(&aug);
    (0..h.form.rows)
        .filter(|&i| h.pivots[i] >= cols)
        .map(|i| h.form.row(i)[cols..].to_vec())
        .collect()
}

/// Howell form of the span of a generating set in `(Z/p^N)^dim`.
pub fn span(p: u64, n: u32, dim: usize, gens: &[Vec<u64>]) -> HowellForm {
    howell_form(&ZmodMatrix::from_row_vecs(p, n, dim, gens))
}

/// `log_p [span(Z) : span(B)]`; raises `NotASubmodule` if some generator
/// of `B` is outside `span(Z)`.
pub fn subquotient_order(p: u64, n: u32, dim: usize, z: &[Vec<u64>], b: &[Vec<u64>]) -> Result<u32> {
    let hz = span(p, n, dim, z);
    for (i, g) in b.iter().enumerate() {
        if !hz.contains(g) {
            return Err(Error::NotASubmodule { index: i });
        }
    }
    let hb = span(p, n, dim, b);
    Ok(hz.log_cardinality() - hb.log_cardinality())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_form() {
        let m = ZmodMatrix::from_rows(3, 2, &[vec![0, 1], vec![3, 0]]).unwrap();
        let h = howell_form(&m);
        assert_eq!(h.form.row_vecs(), vec![vec![3, 0], vec![0, 1]]);
        assert_eq!(h.transform.mul(&m).unwrap(), h.form);
    }

    #[test]
    fn identity_and_zero() {
        let i = ZmodMatrix::identity(3, 2, 3);
        assert_eq!(howell_form(&i).form, i);
        let z = ZmodMatrix::zeros(3, 2, 2, 2);
        assert_eq!(howell_form(&z).form.rows(), 0);
    }

    #[test]
    fn saturation_row_appears() {
        // span of (3, 1) over Z/9 contains (0, 3)
        let m = ZmodMatrix::from_rows(3, 2, &[vec![3, 1]]).unwrap();
        let h = howell_form(&m);
        assert!(h.contains(&[0, 3]));
        assert!(!h.contains(&[0, 1]));
        assert_eq!(h.log_cardinality(), 2);
    }

    #[test]
    fn kernel_of_three() {
        let m = ZmodMatrix::from_rows(3, 2, &[vec![3]]).unwrap();
        let k = kernel(&m);
        assert_eq!(span(3, 2, 1, &k).log_cardinality(), 1);
        assert!(kernel(&ZmodMatrix::identity(3, 2, 2)).is_empty());
    }

    #[test]
    fn subquotient_examples() {
        assert_eq!(subquotient_order(3, 2, 1, &[vec![1]], &[vec![3]]).unwrap(), 1);
        assert_eq!(subquotient_order(3, 2, 1, &[vec![3]], &[vec![3]]).unwrap(), 0);
        assert_eq!(subquotient_order(3, 2, 1, &[vec![3]], &[vec![1]]), Err(Error::NotASubmodule { index: 0 }));
    }
}
