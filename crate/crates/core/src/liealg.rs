//! Finite-dimensional Lie algebras over Q given by structure constants.
//!
//! Also hosts the Killing form, the centroid solver, the root decomposition
//! relative to a supplied Cartan subalgebra, and the brute-force enumeration
//! of closed symmetric root subsystems.

use std::collections::{BTreeMap, HashMap};

use num::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{format_rat, parse_rat, Rat};
use crate::linalg::{
    axpy, first_nonzero, is_zero_vector, parse_vector, unit_vector, vec_scale, vector_to_json,
    zero_vector, Echelon, Matrix, Subspace, Vector,
};

pub const LIE_SCHEMA: &str = "lie-algebra.v1";
pub const ROOT_SCHEMA: &str = "root-datum.v1";

/// Largest `n` accepted by [`build_sl`].
pub const MAX_SL_RANK: usize = 6;
/// Largest number of `±α` pairs [`enumerate_closed_symmetric`] will scan.
pub const MAX_SIGN_PAIRS: usize = 12;
const MAX_EIGEN_CANDIDATES: i64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("sl_n requires 2 <= n <= {MAX_SL_RANK}, got {0}")]
    RankOutOfRange(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Killing form is degenerate")]
    SingularForm,
    #[error("Cartan elements {0} and {1} do not commute")]
    NonAbelianCartan(usize, usize),
    #[error("root decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("{pairs} sign pairs exceed the enumeration budget of {MAX_SIGN_PAIRS}")]
    BudgetExceeded { pairs: usize },
    #[error("root subset is not closed and symmetric: {0}")]
    NotClosedSymmetric(String),
    #[error("invalid input: {0}")]
    Input(String),
}

/// Structure constants `[e_i, e_j] = sum_k c_ij^k e_k`, stored sparse per pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    labels: Vec<String>,
    table: Vec<Vec<(usize, Rat)>>,
}

impl LieAlgebra {
    /// Builds from raw entries without checking the Lie axioms; see [`validate`].
    pub fn from_structure(
        labels: Vec<String>,
        entries: impl IntoIterator<Item = (usize, usize, Vec<(usize, Rat)>)>,
    ) -> Result<Self, LieError> {
        let dim = labels.len();
        if dim == 0 {
            return Err(LieError::Input("algebra must have positive dimension".into()));
        }
        let mut dense = vec![BTreeMap::<usize, Rat>::new(); dim * dim];
        for (i, j, terms) in entries {
            if i >= dim || j >= dim {
                return Err(LieError::Input(format!("basis index ({i},{j}) out of range")));
            }
            for (k, c) in terms {
                if k >= dim {
                    return Err(LieError::Input(format!("basis index {k} out of range")));
                }
                *dense[i * dim + j].entry(k).or_insert_with(Rat::zero) += c;
            }
        }
        let table = dense
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        Ok(Self { dim, labels, table })
    }

    pub fn abelian(n: usize) -> Self {
        let labels = (1..=n).map(|i| format!("z{i}")).collect();
        Self::from_structure(labels, std::iter::empty()).expect("abelian algebra")
    }

    /// `gl_n` with the commutator bracket, basis `E_ij` in row-major order.
    pub fn gl(n: usize) -> Self {
        let idx = |i: usize, j: usize| i * n + j;
        let mut entries = Vec::new();
        for (a, b) in (0..n).flat_map(|a| (0..n).map(move |b| (a, b))) {
            for (c, d) in (0..n).flat_map(|c| (0..n).map(move |d| (c, d))) {
                // [E_ab, E_cd] = δ_bc E_ad − δ_da E_cb
                let mut terms = Vec::new();
                if b == c {
                    terms.push((idx(a, d), Rat::one()));
                }
                if d == a {
                    terms.push((idx(c, b), -Rat::one()));
                }
                entries.push((idx(a, b), idx(c, d), terms));
            }
        }
        let labels = (0..n * n).map(|k| format!("E{}{}", k / n + 1, k % n + 1)).collect();
        Self::from_structure(labels, entries).expect("gl_n")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        unit_vector(self.dim, i)
    }

    pub fn structure(&self, i: usize, j: usize) -> &[(usize, Rat)] {
        &self.table[i * self.dim + j]
    }

    fn check_dim(&self, v: &[Rat]) -> Result<(), LieError> {
        if v.len() != self.dim {
            return Err(LieError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(())
    }

    pub fn try_bracket(&self, x: &[Rat], y: &[Rat]) -> Result<Vector, LieError> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.bracket(x, y))
    }

    /// Bilinear extension of the structure constants. Panics on a length mismatch;
    /// use [`Self::try_bracket`] for unchecked input.
    pub fn bracket(&self, x: &[Rat], y: &[Rat]) -> Vector {
        assert!(x.len() == self.dim && y.len() == self.dim, "dimension mismatch");
        let mut out = zero_vector(self.dim);
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let terms = self.structure(i, j);
                if terms.is_empty() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in terms {
                    out[*k] += &ab * c;
                }
            }
        }
        out
    }

    /// `[e_i, y]`
    pub fn bracket_basis_left(&self, i: usize, y: &[Rat]) -> Vector {
        let mut out = zero_vector(self.dim);
        for (j, b) in y.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (k, c) in self.structure(i, j) {
                out[*k] += b * c;
            }
        }
        out
    }

    /// `ad(x)`: column `j` is `[x, e_j]`.
    pub fn ad(&self, x: &[Rat]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim).map(|j| self.bracket(x, &self.basis_vector(j))).collect();
        Matrix::from_columns(self.dim, &cols)
    }

    pub fn try_ad(&self, x: &[Rat]) -> Result<Matrix, LieError> {
        self.check_dim(x)?;
        Ok(self.ad(x))
    }

    fn ad_basis(&self) -> Vec<Matrix> {
        (0..self.dim).map(|i| self.ad(&self.basis_vector(i))).collect()
    }

    /// Gram matrix of the Killing form on the basis.
    pub fn killing(&self) -> Matrix {
        let ads = self.ad_basis();
        let mut g = Matrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let t = ads[i].trace_of_product(&ads[j]);
                g.set(i, j, t.clone());
                g.set(j, i, t);
            }
        }
        g
    }

    pub fn killing_pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.ad(x).trace_of_product(&self.ad(y))
    }

    /// `P*` with `<P x, y> = <x, P* y>`, i.e. `G^{-1} P^T G`.
    pub fn killing_adjoint(&self, p: &Matrix) -> Result<Matrix, LieError> {
        let g = self.killing();
        adjoint_with_gram(&g, p)
    }

    /// Basis vectors spanning the center.
    pub fn center(&self) -> Vec<Vector> {
        let mut ech = Echelon::new(self.dim);
        for j in 0..self.dim {
            // row: z ↦ [z, e_j]_k
            for k in 0..self.dim {
                let row: Vector = (0..self.dim)
                    .map(|i| {
                        self.structure(i, j)
                            .iter()
                            .find(|(kk, _)| *kk == k)
                            .map_or_else(Rat::zero, |(_, c)| c.clone())
                    })
                    .collect();
                if !is_zero_vector(&row) {
                    ech.insert(row);
                }
            }
        }
        ech.nullspace()
    }

    pub fn to_json(&self) -> Value {
        let mut structure = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let terms = self.structure(i, j);
                if terms.is_empty() {
                    continue;
                }
                let t: Vec<Value> = terms.iter().map(|(k, c)| json!([k, format_rat(c)])).collect();
                structure.push(json!([i, j, t]));
            }
        }
        json!({
            "schema": LIE_SCHEMA,
            "dim": self.dim,
            "labels": self.labels,
            "structure": structure,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, LieError> {
        let bad = |m: &str| LieError::Input(m.to_string());
        check_schema(v, LIE_SCHEMA).map_err(LieError::Input)?;
        let dim = v["dim"].as_u64().ok_or_else(|| bad("missing dim"))? as usize;
        let labels: Vec<String> = match v.get("labels") {
            Some(Value::Array(ls)) => ls
                .iter()
                .map(|l| l.as_str().map(str::to_string).ok_or_else(|| bad("labels must be strings")))
                .collect::<Result<_, _>>()?,
            _ => (0..dim).map(|i| format!("e{i}")).collect(),
        };
        if labels.len() != dim {
            return Err(bad("label count differs from dim"));
        }
        let mut entries = Vec::new();
        for e in v["structure"].as_array().ok_or_else(|| bad("missing structure"))? {
            let i = e[0].as_u64().ok_or_else(|| bad("structure index"))? as usize;
            let j = e[1].as_u64().ok_or_else(|| bad("structure index"))? as usize;
            let mut terms = Vec::new();
            for t in e[2].as_array().ok_or_else(|| bad("structure terms"))? {
                let k = t[0].as_u64().ok_or_else(|| bad("structure index"))? as usize;
                let c = parse_rat(t[1].as_str().ok_or_else(|| bad("scalar must be a string"))?)
                    .map_err(|e| LieError::Input(e.to_string()))?;
                terms.push((k, c));
            }
            entries.push((i, j, terms));
        }
        Self::from_structure(labels, entries)
    }
}

pub(crate) fn check_schema(v: &Value, expected: &str) -> Result<(), String> {
    match v.get("schema").and_then(Value::as_str) {
        Some(s) if s == expected => Ok(()),
        Some(s) => Err(format!("unsupported schema {s:?}, expected {expected:?}")),
        None => Err(format!("missing schema field, expected {expected:?}")),
    }
}

pub fn adjoint_with_gram(gram: &Matrix, p: &Matrix) -> Result<Matrix, LieError> {
    let inv = gram.inverse().ok_or(LieError::SingularForm)?;
    Ok(inv.mul(&p.transpose()).mul(gram))
}

pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> LieAlgebra {
    let n = a.dim;
    let mut labels: Vec<String> = a.labels.iter().map(|l| format!("{l}.1")).collect();
    labels.extend(b.labels.iter().map(|l| format!("{l}.2")));
    let mut entries = Vec::new();
    for i in 0..a.dim {
        for j in 0..a.dim {
            entries.push((i, j, a.structure(i, j).to_vec()));
        }
    }
    for i in 0..b.dim {
        for j in 0..b.dim {
            let t = b.structure(i, j).iter().map(|(k, c)| (k + n, c.clone())).collect();
            entries.push((i + n, j + n, t));
        }
    }
    LieAlgebra::from_structure(labels, entries).expect("direct sum")
}

/// Outcome of checking the Lie axioms on basis elements.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub antisymmetry_failure: Option<(usize, usize)>,
    pub jacobi_failure: Option<(usize, usize, usize)>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.antisymmetry_failure.is_none() && self.jacobi_failure.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "antisymmetry": match self.antisymmetry_failure {
                None => json!({"status": "pass"}),
                Some((i, j)) => json!({"status": "fail", "witness": [i, j]}),
            },
            "jacobi": match self.jacobi_failure {
                None => json!({"status": "pass"}),
                Some((i, j, k)) => json!({"status": "fail", "witness": [i, j, k]}),
            },
        })
    }
}

pub fn validate(g: &LieAlgebra) -> ValidationReport {
    let n = g.dim;
    let mut report = ValidationReport::default();
    'anti: for i in 0..n {
        for j in i..n {
            let s = crate::linalg::vec_add(
                &g.bracket(&g.basis_vector(i), &g.basis_vector(j)),
                &g.bracket(&g.basis_vector(j), &g.basis_vector(i)),
            );
            if !is_zero_vector(&s) {
                report.antisymmetry_failure = Some((i, j));
                break 'anti;
            }
        }
    }
    'jac: for i in 0..n {
        for j in 0..n {
            let eij = g.bracket(&g.basis_vector(i), &g.basis_vector(j));
            for k in 0..n {
                // [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
                let a = g.bracket_basis_left(i, &g.bracket(&g.basis_vector(j), &g.basis_vector(k)));
                let b = g.bracket_basis_left(j, &g.bracket(&g.basis_vector(k), &g.basis_vector(i)));
                let c = g.bracket_basis_left(k, &eij);
                let s: Vector = a.iter().zip(&b).zip(&c).map(|((x, y), z)| x + y + z).collect();
                if !is_zero_vector(&s) {
                    report.jacobi_failure = Some((i, j, k));
                    break 'jac;
                }
            }
        }
    }
    report
}

/// `sl_n` together with its standard root datum.
///
/// Basis: `H_i = E_ii − E_{i+1,i+1}` first, then the off-diagonal `E_ij`
/// sorted lexicographically by their root functional on `(H_1, …, H_{n−1})`.
pub fn build_sl(n: usize) -> Result<(LieAlgebra, RootDatum), LieError> {
    if !(2..=MAX_SL_RANK).contains(&n) {
        return Err(LieError::RankOutOfRange(n));
    }
    let rank = n - 1;
    // ε_i − ε_j evaluated on H_k.
    let functional = |i: usize, j: usize| -> Vec<i64> {
        (0..rank)
            .map(|k| {
                let d = |a: usize| (a == k) as i64 - (a == k + 1) as i64;
                d(i) - d(j)
            })
            .collect()
    };
    let mut offdiag: Vec<(Vec<i64>, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (functional(i, j), i, j))
        .collect();
    offdiag.sort();

    #[derive(Clone, Copy)]
    enum Elem {
        H(usize),
        E(usize, usize),
    }
    let mut basis: Vec<Elem> = (0..rank).map(Elem::H).collect();
    basis.extend(offdiag.iter().map(|(_, i, j)| Elem::E(*i, *j)));
    let labels: Vec<String> = basis
        .iter()
        .map(|b| match b {
            Elem::H(k) => format!("H{}", k + 1),
            Elem::E(i, j) => format!("E{}{}", i + 1, j + 1),
        })
        .collect();
    let index: HashMap<(usize, usize), usize> = offdiag
        .iter()
        .enumerate()
        .map(|(p, (_, i, j))| ((*i, *j), rank + p))
        .collect();

    let as_matrix = |b: Elem| -> Matrix {
        let mut m = Matrix::zeros(n, n);
        match b {
            Elem::H(k) => {
                m.set(k, k, Rat::one());
                m.set(k + 1, k + 1, -Rat::one());
            }
            Elem::E(i, j) => m.set(i, j, Rat::one()),
        }
        m
    };
    let to_coords = |m: &Matrix| -> Vec<(usize, Rat)> {
        let mut out = Vec::new();
        let mut acc = Rat::zero();
        for k in 0..rank {
            acc += m.get(k, k);
            if !acc.is_zero() {
                out.push((k, acc.clone()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !m.get(i, j).is_zero() {
                    out.push((index[&(i, j)], m.get(i, j).clone()));
                }
            }
        }
        out
    };
    let mats: Vec<Matrix> = basis.iter().map(|b| as_matrix(*b)).collect();
    let mut entries = Vec::new();
    for (a, ma) in mats.iter().enumerate() {
        for (b, mb) in mats.iter().enumerate() {
            let comm = ma.mul(mb).sub(&mb.mul(ma));
            entries.push((a, b, to_coords(&comm)));
        }
    }
    let g = LieAlgebra::from_structure(labels, entries)?;
    let cartan: Vec<Vector> = (0..rank).map(|k| g.basis_vector(k)).collect();
    let rd = root_decomposition(&g, &cartan)?;
    Ok((g, rd))
}

/// Basis of the solution space of `T[x,y] = [Tx,y] = [x,Ty]`.
pub fn centroid_basis(g: &LieAlgebra) -> Vec<Matrix> {
    let n = g.dim;
    let var = |a: usize, b: usize| a * n + b; // entry (a, b) of T
    let mut ech = Echelon::new(n * n);
    let coeff = |i: usize, j: usize, k: usize| -> Option<&Rat> {
        g.structure(i, j).iter().find(|(kk, _)| *kk == k).map(|(_, c)| c)
    };
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                // T([e_i,e_j])_a = sum_k c_ij^k t_{a,k}
                let mut lhs: BTreeMap<usize, Rat> = BTreeMap::new();
                for (k, c) in g.structure(i, j) {
                    *lhs.entry(var(a, *k)).or_insert_with(Rat::zero) += c;
                }
                // [T e_i, e_j]_a = sum_b t_{b,i} c_bj^a ; [e_i, T e_j]_a = sum_b t_{b,j} c_ib^a
                let mut left = lhs.clone();
                let mut right = lhs;
                for b in 0..n {
                    if let Some(c) = coeff(b, j, a) {
                        *left.entry(var(b, i)).or_insert_with(Rat::zero) -= c;
                    }
                    if let Some(c) = coeff(i, b, a) {
                        *right.entry(var(b, j)).or_insert_with(Rat::zero) -= c;
                    }
                }
                for mut row in [left, right] {
                    row.retain(|_, c| !c.is_zero());
                    if !row.is_empty() {
                        ech.insert_sparse(row);
                    }
                }
            }
        }
    }
    ech.nullspace()
        .into_iter()
        .map(|v| Matrix::from_rows(v.chunks(n).map(|r| r.to_vec()).collect()))
        .collect()
}

/// Roots, root vectors and coroots relative to a fixed Cartan basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDatum {
    ambient: usize,
    cartan: Vec<Vector>,
    roots: Vec<Vector>,
    root_vectors: Vec<Vector>,
    coroots: Vec<Vector>,
    negatives: Vec<usize>,
    cartan_coords: Matrix,
}

impl RootDatum {
    fn assemble(
        ambient: usize,
        cartan: Vec<Vector>,
        roots: Vec<Vector>,
        root_vectors: Vec<Vector>,
        coroots: Vec<Vector>,
    ) -> Result<Self, LieError> {
        let fail = |m: String| LieError::DecompositionFailure(m);
        let lookup: HashMap<&Vector, usize> = roots.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let negatives = roots
            .iter()
            .map(|r| {
                let neg: Vector = r.iter().map(|c| -c).collect();
                lookup.get(&neg).copied().ok_or_else(|| fail("roots are not closed under negation".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let r = cartan.len();
        let c = Matrix::from_columns(ambient, &cartan);
        let ctc = c.transpose().mul(&c);
        let cartan_coords = if r == 0 {
            Matrix::zeros(0, ambient)
        } else {
            ctc.inverse()
                .ok_or_else(|| fail("Cartan basis is linearly dependent".into()))?
                .mul(&c.transpose())
        };
        Ok(Self { ambient, cartan, roots, root_vectors, coroots, negatives, cartan_coords })
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn cartan(&self) -> &[Vector] {
        &self.cartan
    }

    pub fn roots(&self) -> &[Vector] {
        &self.roots
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn root_vector(&self, i: usize) -> &Vector {
        &self.root_vectors[i]
    }

    pub fn root_vectors(&self) -> &[Vector] {
        &self.root_vectors
    }

    pub fn coroot(&self, i: usize) -> &Vector {
        &self.coroots[i]
    }

    pub fn negative(&self, i: usize) -> usize {
        self.negatives[i]
    }

    pub fn find_root(&self, functional: &[Rat]) -> Option<usize> {
        self.roots.iter().position(|r| r.as_slice() == functional)
    }

    /// Coordinates of `h` (assumed in the Cartan span) on the Cartan basis.
    pub fn cartan_coordinates(&self, h: &[Rat]) -> Vector {
        self.cartan_coords.apply(h)
    }

    pub fn cartan_space(&self) -> Subspace {
        Subspace::span(self.ambient, self.cartan.iter().cloned())
    }

    /// `α(h)` for root index `alpha`.
    pub fn eval_root(&self, alpha: usize, h: &[Rat]) -> Rat {
        self.cartan_coordinates(h)
            .iter()
            .zip(&self.roots[alpha])
            .map(|(c, a)| c * a)
            .sum()
    }

    /// `(α, β)` pairs `α ↦ −α` with the lower index first.
    pub fn sign_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.roots.len())
            .filter(|&i| i < self.negatives[i])
            .map(|i| (i, self.negatives[i]))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let vs = |vs: &[Vector]| Value::Array(vs.iter().map(|v| vector_to_json(v)).collect());
        json!({
            "schema": ROOT_SCHEMA,
            "cartan": vs(&self.cartan),
            "roots": vs(&self.roots),
            "rootvecs": vs(&self.root_vectors),
            "coroots": vs(&self.coroots),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, LieError> {
        check_schema(v, ROOT_SCHEMA).map_err(LieError::Input)?;
        let field = |name: &str| -> Result<Vec<Vector>, LieError> {
            v[name]
                .as_array()
                .ok_or_else(|| LieError::Input(format!("missing {name}")))?
                .iter()
                .map(|x| parse_vector(x).map_err(LieError::Input))
                .collect()
        };
        let cartan = field("cartan")?;
        let roots = field("roots")?;
        let root_vectors = field("rootvecs")?;
        let coroots = field("coroots")?;
        let ambient = root_vectors
            .first()
            .or(cartan.first())
            .map(|x| x.len())
            .ok_or_else(|| LieError::Input("empty root datum".into()))?;
        if roots.len() != root_vectors.len() || roots.len() != coroots.len() {
            return Err(LieError::Input("roots, rootvecs and coroots differ in length".into()));
        }
        Self::assemble(ambient, cartan, roots, root_vectors, coroots)
    }
}

/// Split a `k`-dimensional restricted operator into rational eigenspaces.
fn rational_eigenspaces(m: &Matrix) -> Result<Vec<(Rat, Vec<Vector>)>, LieError> {
    let k = m.rows();
    if k == 0 {
        return Ok(Vec::new());
    }
    // Scale to an integer matrix: its rational eigenvalues are integers
    // bounded by the maximal absolute row sum.
    let mut den = num::BigInt::one();
    for i in 0..k {
        for j in 0..k {
            den = num::integer::lcm(den, m.get(i, j).denom().clone());
        }
    }
    let scale = Rat::from_integer(den.clone());
    let mi = m.scale(&scale);
    let bound = (0..k)
        .map(|i| mi.row(i).iter().map(|c| c.abs()).sum::<Rat>())
        .max()
        .unwrap_or_else(Rat::zero);
    let bound = bound.to_integer().to_i64().filter(|b| *b <= MAX_EIGEN_CANDIDATES).ok_or_else(|| {
        LieError::DecompositionFailure("eigenvalue search range exceeds budget".into())
    })?;
    let mut found = Vec::new();
    let mut total = 0;
    for cand in -bound..=bound {
        let shifted = mi.sub(&Matrix::scalar(k, &Rat::from_integer(cand.into())));
        let ns = shifted.nullspace();
        if !ns.is_empty() {
            total += ns.len();
            found.push((Rat::new(cand.into(), den.clone()), ns));
        }
    }
    if total != k {
        return Err(LieError::DecompositionFailure(
            "ad-action is not diagonalizable with rational eigenvalues".into(),
        ));
    }
    Ok(found)
}

/// Simultaneous eigenspace decomposition of `{ad h : h ∈ cartan}`.
pub fn root_decomposition(g: &LieAlgebra, cartan: &[Vector]) -> Result<RootDatum, LieError> {
    for h in cartan {
        g.check_dim(h)?;
    }
    for i in 0..cartan.len() {
        for j in i + 1..cartan.len() {
            if !is_zero_vector(&g.bracket(&cartan[i], &cartan[j])) {
                return Err(LieError::NonAbelianCartan(i, j));
            }
        }
    }
    let n = g.dim;
    let mut spaces: Vec<(Vector, Subspace)> = vec![(Vec::new(), Subspace::full(n))];
    for h in cartan {
        let ad = g.ad(h);
        let mut next = Vec::new();
        for (weight, space) in spaces {
            let basis = space.basis();
            let images: Vec<Vector> = basis
                .iter()
                .map(|b| {
                    space.coordinates(&ad.apply(b)).ok_or_else(|| {
                        LieError::DecompositionFailure("weight space is not ad-invariant".into())
                    })
                })
                .collect::<Result<_, _>>()?;
            let restricted = Matrix::from_columns(basis.len(), &images);
            for (value, vecs) in rational_eigenspaces(&restricted)? {
                let lifted = vecs.into_iter().map(|c| {
                    let mut v = zero_vector(n);
                    for (ci, bi) in c.iter().zip(&basis) {
                        axpy(&mut v, ci, bi);
                    }
                    v
                });
                let mut w = weight.clone();
                w.push(value);
                next.push((w, Subspace::span(n, lifted)));
            }
        }
        spaces = next;
    }
    let mut roots: Vec<(Vector, Vector)> = Vec::new();
    for (weight, space) in spaces {
        if is_zero_vector(&weight) {
            continue;
        }
        if space.dim() != 1 {
            return Err(LieError::DecompositionFailure(format!(
                "root space of dimension {}",
                space.dim()
            )));
        }
        let v = space.basis().remove(0);
        let lead = first_nonzero(&v).map(|(_, c)| c.clone()).expect("nonzero root vector");
        roots.push((weight, vec_scale(&v, &lead.recip())));
    }
    roots.sort();
    let lookup: HashMap<Vector, usize> = roots.iter().enumerate().map(|(i, (r, _))| (r.clone(), i)).collect();
    let mut coroots = Vec::with_capacity(roots.len());
    for (r, x) in &roots {
        let neg: Vector = r.iter().map(|c| -c).collect();
        let j = *lookup.get(&neg).ok_or_else(|| {
            LieError::DecompositionFailure("roots are not closed under negation".into())
        })?;
        coroots.push(g.bracket(x, &roots[j].1));
    }
    let (functionals, vectors) = roots.into_iter().unzip();
    RootDatum::assemble(n, cartan.to_vec(), functionals, vectors, coroots)
}

/// A closed symmetric subset of the roots with its irreducible components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootSubsystem {
    members: Vec<usize>,
    components: Vec<Vec<usize>>,
}

impl RootSubsystem {
    /// Validates closure and symmetry, then computes components.
    pub fn from_members(rd: &RootDatum, members: &[usize]) -> Result<Self, LieError> {
        let mut set: Vec<usize> = members.to_vec();
        set.sort_unstable();
        set.dedup();
        if let Some(&bad) = set.iter().find(|&&i| i >= rd.root_count()) {
            return Err(LieError::NotClosedSymmetric(format!("root index {bad} out of range")));
        }
        if let Err(why) = closed_symmetric_violation(rd, &set) {
            return Err(LieError::NotClosedSymmetric(why));
        }
        let components = components_of(rd, &set);
        Ok(Self { members: set, components })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn contains(&self, root: usize) -> bool {
        self.members.binary_search(&root).is_ok()
    }

    pub fn component_of(&self, root: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&root))
    }

    pub fn to_json(&self) -> Value {
        json!({"members": self.members, "components": self.components})
    }
}

fn closed_symmetric_violation(rd: &RootDatum, set: &[usize]) -> Result<(), String> {
    let inset = |i: usize| set.binary_search(&i).is_ok();
    for &a in set {
        if !inset(rd.negative(a)) {
            return Err(format!("root {a} present without its negative"));
        }
        for &b in set {
            let sum: Vector = rd.roots[a].iter().zip(&rd.roots[b]).map(|(x, y)| x + y).collect();
            if let Some(c) = rd.find_root(&sum) {
                if !inset(c) {
                    return Err(format!("roots {a} + {b} = {c} escapes the subset"));
                }
            }
        }
    }
    Ok(())
}

/// Independent predicate used to re-check enumeration output.
pub fn is_closed_symmetric(rd: &RootDatum, members: &[usize]) -> bool {
    let mut set = members.to_vec();
    set.sort_unstable();
    set.dedup();
    closed_symmetric_violation(rd, &set).is_ok()
}

fn components_of(rd: &RootDatum, set: &[usize]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..set.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let inset = |i: usize| set.binary_search(&i).is_ok();
    for (ia, &a) in set.iter().enumerate() {
        for (ib, &b) in set.iter().enumerate().skip(ia + 1) {
            let nonorth = !rd.eval_root(a, rd.coroot(b)).is_zero() || !rd.eval_root(b, rd.coroot(a)).is_zero();
            let linked = [1, -1].iter().any(|s| {
                let f: Vector = rd.roots[a]
                    .iter()
                    .zip(&rd.roots[b])
                    .map(|(x, y)| x + Rat::from_integer((*s).into()) * y)
                    .collect();
                rd.find_root(&f).is_some_and(inset)
            });
            if nonorth || linked {
                let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &a) in set.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(a);
    }
    groups.into_values().collect()
}

/// Every closed symmetric subset, ordered by size (largest first) and then
/// by member list.
pub fn enumerate_closed_symmetric(rd: &RootDatum) -> Result<Vec<RootSubsystem>, LieError> {
    let pairs = rd.sign_pairs();
    if pairs.len() > MAX_SIGN_PAIRS {
        return Err(LieError::BudgetExceeded { pairs: pairs.len() });
    }
    let mut found: Vec<Vec<usize>> = (0u32..(1 << pairs.len()))
        .filter_map(|mask| {
            let mut set: Vec<usize> = pairs
                .iter()
                .enumerate()
                .filter(|(p, _)| mask >> p & 1 == 1)
                .flat_map(|(_, (a, b))| [*a, *b])
                .collect();
            set.sort_unstable();
            closed_symmetric_violation(rd, &set).ok().map(|_| set)
        })
        .collect();
    found.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(found
        .into_iter()
        .map(|set| {
            let components = components_of(rd, &set);
            RootSubsystem { members: set, components }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::linalg::vec_add;

    fn sl2() -> (LieAlgebra, RootDatum) {
        build_sl(2).unwrap()
    }

    fn e(g: &LieAlgebra, l: &str) -> Vector {
        g.basis_vector(g.index_of(l).unwrap())
    }

    #[test]
    fn sl2_brackets() {
        let (g, _) = sl2();
        assert_eq!(g.dim(), 3);
        let (ev, fv, hv) = (e(&g, "E12"), e(&g, "E21"), e(&g, "H1"));
        assert_eq!(g.bracket(&ev, &fv), hv);
        assert_eq!(g.bracket(&hv, &ev), vec_scale(&ev, &rat(2)));
        assert_eq!(g.bracket(&hv, &fv), vec_scale(&fv, &rat(-2)));
        let x = vec_add(&ev, &vec_scale(&hv, &rat(3)));
        assert!(is_zero_vector(&g.bracket(&x, &x)));
    }

    #[test]
    fn sl_dimensions_and_ranges() {
        let (g3, rd3) = build_sl(3).unwrap();
        assert_eq!(g3.dim(), 8);
        assert_eq!(rd3.root_count(), 6);
        assert_eq!(build_sl(1).unwrap_err(), LieError::RankOutOfRange(1));
        assert_eq!(build_sl(7).unwrap_err(), LieError::RankOutOfRange(7));
        for n in 2..=4 {
            let (g, rd) = build_sl(n).unwrap();
            assert!(validate(&g).passes());
            assert!(g.killing().inverse().is_some());
            assert_eq!(rd.rank() + rd.root_count(), g.dim());
        }
    }

    #[test]
    fn ad_h_diagonal() {
        let (g, _) = sl2();
        let ad = g.ad(&e(&g, "H1"));
        let (ie, ih, if_) = (g.index_of("E12").unwrap(), g.index_of("H1").unwrap(), g.index_of("E21").unwrap());
        assert_eq!(ad.get(ie, ie), &rat(2));
        assert_eq!(ad.get(ih, ih), &rat(0));
        assert_eq!(ad.get(if_, if_), &rat(-2));
        assert!(g.try_ad(&[rat(1)]).is_err());
        assert!(g.try_bracket(&[rat(1)], &e(&g, "H1")).is_err());
    }

    #[test]
    fn sl2_killing_values() {
        let (g, _) = sl2();
        let (ev, fv, hv) = (e(&g, "E12"), e(&g, "E21"), e(&g, "H1"));
        assert_eq!(g.killing_pair(&hv, &hv), rat(8));
        assert_eq!(g.killing_pair(&ev, &fv), rat(4));
        assert_eq!(g.killing_pair(&ev, &ev), rat(0));
        let id = Matrix::identity(3);
        assert_eq!(g.killing_adjoint(&id).unwrap(), id);
        let adh = g.ad(&hv);
        assert_eq!(g.killing_adjoint(&adh).unwrap(), adh.scale(&rat(-1)));
        assert_eq!(LieAlgebra::abelian(2).killing_adjoint(&Matrix::identity(2)), Err(LieError::SingularForm));
    }

    #[test]
    fn validate_reports_violations() {
        let labels: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let bad = LieAlgebra::from_structure(
            labels,
            vec![(0, 1, vec![(0, rat(1))]), (1, 0, vec![(0, rat(1))])],
        )
        .unwrap();
        assert_eq!(validate(&bad).antisymmetry_failure, Some((0, 1)));

        // [e1,e2]=e3, [e1,e3]=e1: the Jacobiator of (e1,e2,e3) is e3
        let labels: Vec<String> = ["e1", "e2", "e3"].iter().map(|s| s.to_string()).collect();
        let bad = LieAlgebra::from_structure(
            labels,
            vec![
                (0, 1, vec![(2, rat(1))]),
                (1, 0, vec![(2, rat(-1))]),
                (0, 2, vec![(0, rat(1))]),
                (2, 0, vec![(0, rat(-1))]),
            ],
        )
        .unwrap();
        let r = validate(&bad);
        assert!(r.antisymmetry_failure.is_none());
        assert!(r.jacobi_failure.is_some());
    }

    #[test]
    fn direct_sum_blocks() {
        let (s, _) = sl2();
        let ss = direct_sum(&s, &s);
        assert_eq!(ss.dim(), 6);
        for i in 0..3 {
            for j in 3..6 {
                assert!(ss.structure(i, j).is_empty());
            }
        }
        let sz = direct_sum(&s, &LieAlgebra::abelian(1));
        assert_eq!(sz.dim(), 4);
        assert_eq!(sz.center().len(), 1);
        let k = ss.killing();
        let ks = s.killing();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if (i < 3) == (j < 3) { ks.get(i % 3, j % 3).clone() } else { rat(0) };
                assert_eq!(k.get(i, j), &expected);
            }
        }
    }

    #[test]
    fn killing_invariance_on_sl3() {
        let (g, _) = build_sl(3).unwrap();
        let k = g.killing();
        for x in 0..g.dim() {
            for y in 0..g.dim() {
                let xy = g.bracket(&g.basis_vector(x), &g.basis_vector(y));
                for z in 0..g.dim() {
                    let xz = g.bracket(&g.basis_vector(x), &g.basis_vector(z));
                    let a: Rat = (0..g.dim()).map(|i| &xy[i] * k.get(i, z)).sum();
                    let b: Rat = (0..g.dim()).map(|i| &xz[i] * k.get(y, i)).sum();
                    assert_eq!(a + b, rat(0));
                }
            }
        }
    }

    #[test]
    fn centroid_dimensions() {
        let (s, _) = sl2();
        let c = centroid_basis(&s);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0], Matrix::identity(3).scale(c[0].get(0, 0)));
        assert_eq!(centroid_basis(&direct_sum(&s, &s)).len(), 2);
        assert_eq!(centroid_basis(&LieAlgebra::abelian(2)).len(), 4);
    }

    #[test]
    fn root_data() {
        let (g, rd) = sl2();
        assert_eq!(rd.roots(), &[vec![rat(-2)], vec![rat(2)]]);
        let ia = rd.find_root(&[rat(2)]).unwrap();
        assert_eq!(rd.root_vector(ia), &e(&g, "E12"));
        assert_eq!(rd.coroot(ia), &e(&g, "H1"));
        let (g3, rd3) = build_sl(3).unwrap();
        for i in 0..rd3.root_count() {
            for h in rd3.cartan() {
                let lhs = g3.bracket(h, rd3.root_vector(i));
                assert_eq!(lhs, vec_scale(rd3.root_vector(i), &rd3.eval_root(i, h)));
            }
            assert_eq!(rd3.negative(rd3.negative(i)), i);
        }
        let ab = LieAlgebra::abelian(3);
        let cartan: Vec<Vector> = (0..3).map(|i| ab.basis_vector(i)).collect();
        assert_eq!(root_decomposition(&ab, &cartan).unwrap().root_count(), 0);
        let bad = vec![e(&g, "E12"), e(&g, "E21")];
        assert_eq!(root_decomposition(&g, &bad).unwrap_err(), LieError::NonAbelianCartan(0, 1));
        let nilp = vec![e(&g, "E12")];
        assert!(matches!(root_decomposition(&g, &nilp), Err(LieError::DecompositionFailure(_))));
    }

    #[test]
    fn subsystem_counts() {
        let (_, rd2) = sl2();
        assert_eq!(enumerate_closed_symmetric(&rd2).unwrap().len(), 2);
        let (_, rd3) = build_sl(3).unwrap();
        let subs = enumerate_closed_symmetric(&rd3).unwrap();
        assert_eq!(subs.len(), 5);
        assert_eq!(subs[0].members().len(), 6);
        assert_eq!(subs[0].components().len(), 1);
        let (s, _) = sl2();
        let ss = direct_sum(&s, &s);
        let cartan = vec![ss.basis_vector(0), ss.basis_vector(3)];
        let rd = root_decomposition(&ss, &cartan).unwrap();
        let subs = enumerate_closed_symmetric(&rd).unwrap();
        assert_eq!(subs.len(), 4);
        assert_eq!(subs[0].components().len(), 2);
        for s in &subs {
            assert!(is_closed_symmetric(&rd, s.members()));
        }
    }

    #[test]
    fn from_members_rejects_open_sets() {
        let (_, rd3) = build_sl(3).unwrap();
        let pairs = rd3.sign_pairs();
        let two: Vec<usize> = pairs.iter().take(2).flat_map(|(a, b)| [*a, *b]).collect();
        assert!(RootSubsystem::from_members(&rd3, &two).is_err());
        assert!(RootSubsystem::from_members(&rd3, &[pairs[0].0]).is_err());
        let one = RootSubsystem::from_members(&rd3, &[pairs[0].0, pairs[0].1]).unwrap();
        assert_eq!(one.components().len(), 1);
    }

    #[test]
    fn json_roundtrip() {
        let (g, rd) = build_sl(3).unwrap();
        assert_eq!(LieAlgebra::from_json(&g.to_json()).unwrap(), g);
        assert_eq!(RootDatum::from_json(&rd.to_json()).unwrap(), rd);
        let mut bad = g.to_json();
        bad["schema"] = json!("lie-algebra.v9");
        assert!(LieAlgebra::from_json(&bad).is_err());
    }
}
