//! Dense matrices and sparse echelon subspaces over the rationals.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::exact::{format_rat, parse_rat, Rat};

pub type Vector = Vec<Rat>;

pub fn zero_vector(n: usize) -> Vector {
    vec![Rat::zero(); n]
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = zero_vector(n);
    v[i] = Rat::one();
    v
}

pub fn is_zero_vector(v: &[Rat]) -> bool {
    v.iter().all(|c| c.is_zero())
}

pub fn vec_add(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rat], s: &Rat) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// `a += s * b`
pub fn axpy(a: &mut [Rat], s: &Rat, b: &[Rat]) {
    if s.is_zero() {
        return;
    }
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x += s * y;
        }
    }
}

pub fn first_nonzero(v: &[Rat]) -> Option<(usize, &Rat)> {
    v.iter().enumerate().find(|(_, c)| !c.is_zero())
}

/// Row-major rational matrix. As a linear operator, column `j` is the image
/// of basis vector `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|c| c.to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn scalar(n: usize, s: &Rat) -> Self {
        Self::identity(n).scale(s)
    }

    pub fn from_rows(rows: Vec<Vector>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(rows: usize, cols: &[Vector]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, c) in col.iter().enumerate() {
                m.data[i * cols.len() + j] = c.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|x| Rat::from_integer((*x).into())).collect())
                .collect(),
        )
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

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, v: &[Rat]) -> Vector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = zero_vector(self.rows);
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self.data[i * self.cols + j];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
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

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn trace(&self) -> Rat {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Rat {
        let mut t = Rat::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let b = other.get(k, i);
                if !b.is_zero() {
                    t += a * b;
                }
            }
        }
        t
    }

    pub fn first_nonzero_entry(&self) -> Option<(usize, usize, Rat)> {
        self.data
            .iter()
            .position(|c| !c.is_zero())
            .map(|p| (p / self.cols, p % self.cols, self.data[p].clone()))
    }

    pub fn rank(&self) -> usize {
        Subspace::span(self.cols, self.row_vectors()).dim()
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn nullspace(&self) -> Vec<Vector> {
        let mut ech = Echelon::new(self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        ech.nullspace()
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).recip();
            for j in 0..n {
                a.data[col * n + j] *= &p;
                inv.data[col * n + j] *= &p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let av = a.data[col * n + j].clone();
                    if !av.is_zero() {
                        a.data[r * n + j] -= &f * av;
                    }
                    let iv = inv.data[col * n + j].clone();
                    if !iv.is_zero() {
                        inv.data[r * n + j] -= &f * iv;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| {
                    serde_json::Value::Array(
                        self.row(i)
                            .iter()
                            .map(|c| serde_json::Value::String(format_rat(c)))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let rows = v.as_array().ok_or("matrix must be an array of rows")?;
        let rows: Vec<Vector> = rows
            .iter()
            .map(|r| parse_vector(r))
            .collect::<Result<_, _>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged matrix rows".into());
        }
        Ok(Self::from_rows(rows))
    }
}

pub fn vector_to_json(v: &[Rat]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(|c| serde_json::Value::String(format_rat(c))).collect())
}

pub fn parse_vector(v: &serde_json::Value) -> Result<Vector, String> {
    v.as_array()
        .ok_or("vector must be an array")?
        .iter()
        .map(|c| {
            let s = c.as_str().ok_or_else(|| format!("scalar must be a string, got {c}"))?;
            parse_rat(s).map_err(|e| e.to_string())
        })
        .collect()
}

type SparseRow = BTreeMap<usize, Rat>;

fn to_sparse(v: &[Rat]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

fn to_dense(r: &SparseRow, n: usize) -> Vector {
    let mut v = zero_vector(n);
    for (i, c) in r {
        v[*i] = c.clone();
    }
    v
}

/// Fully reduced row echelon form kept incrementally with sparse rows.
/// Each row is keyed by its pivot column, has a 1 there, and no other row
/// has a nonzero entry in that column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    ambient: usize,
    rows: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ambient: usize) -> Self {
        Self { ambient, rows: BTreeMap::new() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    fn reduce_sparse(&self, mut v: SparseRow) -> SparseRow {
        let hits: Vec<usize> = v.keys().filter(|k| self.rows.contains_key(k)).copied().collect();
        for p in hits {
            let Some(f) = v.get(&p).cloned() else { continue };
            for (j, c) in &self.rows[&p] {
                let e = v.entry(*j).or_insert_with(Rat::zero);
                *e -= &f * c;
                if e.is_zero() {
                    v.remove(j);
                }
            }
        }
        v
    }

    /// Residual of `v` after eliminating every pivot; zero iff `v` is in the span.
    pub fn reduce(&self, v: &[Rat]) -> Vector {
        to_dense(&self.reduce_sparse(to_sparse(v)), self.ambient)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce_sparse(to_sparse(v)).is_empty()
    }

    /// Returns true when `v` enlarged the span.
    pub fn insert(&mut self, v: Vector) -> bool {
        assert_eq!(v.len(), self.ambient, "dimension mismatch");
        self.insert_sparse(to_sparse(&v))
    }

    pub fn insert_sparse(&mut self, v: SparseRow) -> bool {
        let mut r = self.reduce_sparse(v);
        let Some((&p, lead)) = r.iter().next() else { return false };
        let inv = lead.recip();
        for c in r.values_mut() {
            *c *= &inv;
        }
        for row in self.rows.values_mut() {
            if let Some(f) = row.remove(&p) {
                for (j, c) in &r {
                    if *j == p {
                        continue;
                    }
                    let e = row.entry(*j).or_insert_with(Rat::zero);
                    *e -= &f * c;
                    if e.is_zero() {
                        row.remove(j);
                    }
                }
            }
        }
        r.retain(|_, c| !c.is_zero());
        self.rows.insert(p, r);
        true
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.rows.values().map(|r| to_dense(r, self.ambient)).collect()
    }

    /// Coordinates of `v` against [`Self::basis`], or `None` if outside the span.
    pub fn coordinates(&self, v: &[Rat]) -> Option<Vector> {
        if !self.contains(v) {
            return None;
        }
        Some(self.rows.keys().map(|p| v[*p].clone()).collect())
    }

    /// Solution space of the homogeneous system whose equations are the rows.
    pub fn nullspace(&self) -> Vec<Vector> {
        (0..self.ambient)
            .filter(|c| !self.rows.contains_key(c))
            .map(|free| {
                let mut x = zero_vector(self.ambient);
                x[free] = Rat::one();
                for (p, row) in &self.rows {
                    if let Some(c) = row.get(&free) {
                        x[*p] = -c.clone();
                    }
                }
                x
            })
            .collect()
    }
}

/// A linear subspace of `Q^n`, stored in reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ech: Echelon,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self { ech: Echelon::new(ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, (0..ambient).map(|i| unit_vector(ambient, i)))
    }

    pub fn span(ambient: usize, vectors: impl IntoIterator<Item = Vector>) -> Self {
        let mut ech = Echelon::new(ambient);
        for v in vectors {
            ech.insert(v);
        }
        Self { ech }
    }

    pub fn ambient(&self) -> usize {
        self.ech.ambient
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.ech.basis()
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.ech.contains(v)
    }

    pub fn reduce(&self, v: &[Rat]) -> Vector {
        self.ech.reduce(v)
    }

    pub fn coordinates(&self, v: &[Rat]) -> Option<Vector> {
        self.ech.coordinates(v)
    }

    pub fn insert(&mut self, v: Vector) -> bool {
        self.ech.insert(v)
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.ech.rows.values().all(|r| other.ech.reduce_sparse(r.clone()).is_empty())
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for r in other.ech.rows.values() {
            out.ech.insert_sparse(r.clone());
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let a = self.basis();
        let b = other.basis();
        if a.is_empty() || b.is_empty() {
            return Self::zero(self.ambient());
        }
        // x·A − y·B = 0 ⇒ x·A lies in both.
        let n = self.ambient();
        let mut cols: Vec<Vector> = a.clone();
        cols.extend(b.iter().map(|v| vec_scale(v, &-Rat::one())));
        let m = Matrix::from_columns(n, &cols);
        let sols = m.nullspace();
        Self::span(
            n,
            sols.into_iter().map(|s| {
                let mut v = zero_vector(n);
                for (i, ai) in a.iter().enumerate() {
                    axpy(&mut v, &s[i], ai);
                }
                v
            }),
        )
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.ech.rows == other.ech.rows
    }

    /// Standard basis indices completing `self` to the whole space, chosen
    /// greedily in index order.
    pub fn greedy_complement(&self) -> Vec<usize> {
        let mut acc = self.clone();
        (0..self.ambient())
            .filter(|&i| acc.insert(unit_vector(self.ambient(), i)))
            .collect()
    }
}

/// Coordinates relative to a fixed list of linearly independent vectors.
#[derive(Clone, Debug)]
pub struct BasisCoords {
    basis: Vec<Vector>,
    left_inverse: Matrix,
}

impl BasisCoords {
    /// `None` when the vectors are dependent.
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Option<Self> {
        if basis.is_empty() {
            return Some(Self { basis, left_inverse: Matrix::zeros(0, ambient) });
        }
        let b = Matrix::from_columns(ambient, &basis);
        let bt = b.transpose();
        let left_inverse = bt.mul(&b).inverse()?.mul(&bt);
        Some(Self { basis, left_inverse })
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `None` when `v` is outside the span.
    pub fn coords(&self, v: &[Rat]) -> Option<Vector> {
        let c = self.left_inverse.apply(v);
        let mut back = zero_vector(v.len());
        for (ci, bi) in c.iter().zip(&self.basis) {
            axpy(&mut back, ci, bi);
        }
        (back.as_slice() == v).then_some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, rat};

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        assert!(Matrix::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = Matrix::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(is_zero_vector(&m.apply(&v)));
        }
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn subspace_operations() {
        let e = |i| unit_vector(3, i);
        let xy = Subspace::span(3, vec![e(0), e(1)]);
        let yz = Subspace::span(3, vec![e(1), e(2)]);
        let meet = xy.intersection(&yz);
        assert_eq!(meet.dim(), 1);
        assert!(meet.contains(&e(1)));
        assert_eq!(xy.sum(&yz).dim(), 3);
        assert!(meet.is_subspace_of(&xy));
        assert_eq!(xy.greedy_complement(), vec![2]);
        let diag = Subspace::span(3, vec![vec![rat(1), rat(1), rat(0)]]);
        assert_eq!(diag.greedy_complement(), vec![0, 2]);
        assert_eq!(diag.coordinates(&[rat(3), rat(3), rat(0)]), Some(vec![rat(3)]));
        assert_eq!(diag.coordinates(&[rat(3), rat(2), rat(0)]), None);
    }

    #[test]
    fn echelon_stays_reduced() {
        let mut ech = Echelon::new(3);
        ech.insert(vec![rat(1), rat(1), rat(1)]);
        ech.insert(vec![rat(0), rat(2), rat(1)]);
        let basis = ech.basis();
        assert_eq!(basis[0], vec![rat(1), rat(0), frac(1, 2)]);
        assert_eq!(basis[1], vec![rat(0), rat(1), frac(1, 2)]);
        assert!(!ech.insert(vec![rat(1), rat(3), rat(2)]));
    }

    #[test]
    fn basis_coordinates() {
        let b = BasisCoords::new(3, vec![vec![rat(1), rat(1), rat(0)], vec![rat(0), rat(1), rat(1)]]).unwrap();
        assert_eq!(b.coords(&[rat(2), rat(5), rat(3)]), Some(vec![rat(2), rat(3)]));
        assert_eq!(b.coords(&[rat(1), rat(0), rat(0)]), None);
        assert!(BasisCoords::new(2, vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]]).is_none());
    }
}
