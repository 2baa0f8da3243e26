//! Averaging operators: `T(T(a)·b) = T(a)·T(b) = T(a·T(b))`.
//!
//! The ordinary case lives here. Conformal families, the homogeneous
//! constructor and the structure checks are in the submodules.

mod conformal;
mod homogeneous;
mod structure;

pub use conformal::{
    conjugate_family, is_conformal_averaging, t_star_image, ConfAveOp, ConfAveragingReport, CONF_AVE_SCHEMA,
    MAX_FAMILY_DEGREE,
};
pub use homogeneous::{
    h0_basis, h0_perp_basis, homogeneous_build, random_spec, HomogeneousFamily, HomogeneousSpec, XiSpec, HOMOG_SCHEMA,
};
pub use structure::{verify_structure_theorems, StructureReport};

use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{format_rat, Rat};
use crate::conformal::{kernel_and_quotient, ConfOperator, CurAlgebra};
use crate::liealg::{LieAlgebra, RootDatum};
use crate::linalg::{is_zero_vector, unit_vector, vector_to_json, zero_vector, Matrix, Subspace, Vector};
use crate::report::Check;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AvgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrices do not form a group: {0}")]
    NotAGroup(Value),
    #[error("operators do not commute: entry ({row},{col}) of the commutator is {value}")]
    NonCommuting { row: usize, col: usize, value: String },
    #[error("operator is not averaging: {0}")]
    NotAveraging(Value),
    #[error("Killing form is degenerate")]
    SingularForm,
    #[error("operator family is empty")]
    EmptyFamily,
    #[error("family degree {0} exceeds the cap of {MAX_FAMILY_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("no ξ given for component {0}")]
    MissingXi(usize),
    #[error("ξ for component {0} is zero")]
    ZeroXi(usize),
    #[error("ξ values disagree inside component {0}")]
    InconsistentXi(usize),
    #[error("h_0^⊥ family entry {0} has the wrong shape or leaves h_0^⊥")]
    BadHperp(usize),
    #[error("Cartan subalgebra does not split as h_0 ⊕ h_0^⊥")]
    NotSemisimple,
    #[error("constructed family failed verification: {0}")]
    ConstructionFailed(Value),
    #[error("invalid input: {0}")]
    Input(String),
}

/// An algebra whose product the averaging identities are stated for.
pub trait Product {
    fn dim(&self) -> usize;
    fn product(&self, x: &[Rat], y: &[Rat]) -> Vector;
    fn label(&self, i: usize) -> String;
}

impl Product for LieAlgebra {
    fn dim(&self) -> usize {
        LieAlgebra::dim(self)
    }

    fn product(&self, x: &[Rat], y: &[Rat]) -> Vector {
        self.bracket(x, y)
    }

    fn label(&self, i: usize) -> String {
        self.labels()[i].clone()
    }
}

/// `End(Q^n)` with composition; basis `E_ij` in row-major order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixAlgebra {
    n: usize,
}

impl MatrixAlgebra {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn to_matrix(&self, v: &[Rat]) -> Matrix {
        Matrix::from_rows(v.chunks(self.n).map(|r| r.to_vec()).collect())
    }

    pub fn to_vector(&self, m: &Matrix) -> Vector {
        m.row_vectors().into_iter().flatten().collect()
    }
}

impl Product for MatrixAlgebra {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn product(&self, x: &[Rat], y: &[Rat]) -> Vector {
        self.to_vector(&self.to_matrix(x).mul(&self.to_matrix(y)))
    }

    fn label(&self, i: usize) -> String {
        format!("E{}{}", i / self.n + 1, i % self.n + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `T([T(a),b]) = [T(a),T(b)]` only; enough for anticommutative products.
    Lie,
    /// Both equalities.
    Associative,
}

fn check_square(t: &Matrix, dim: usize) -> Result<(), AvgError> {
    if t.rows() != dim || t.cols() != dim {
        return Err(AvgError::DimensionMismatch { expected: dim, got: t.rows().max(t.cols()) });
    }
    Ok(())
}

/// First basis pair violating the averaging identity, if any.
pub fn is_averaging<A: Product>(alg: &A, t: &Matrix, mode: Mode) -> Result<Option<Value>, AvgError> {
    let d = alg.dim();
    check_square(t, d)?;
    let cols: Vec<Vector> = t.columns();
    for a in 0..d {
        for b in 0..d {
            let eb = unit_vector(d, b);
            let ta_b = alg.product(&cols[a], &eb);
            let mid = alg.product(&cols[a], &cols[b]);
            let left = t.apply(&ta_b);
            if left != mid {
                return Ok(Some(averaging_witness(alg, a, b, "T(T(a)b) = T(a)T(b)", &left, &mid)));
            }
            if mode == Mode::Associative {
                let right = t.apply(&alg.product(&unit_vector(d, a), &cols[b]));
                if right != mid {
                    return Ok(Some(averaging_witness(alg, a, b, "T(aT(b)) = T(a)T(b)", &right, &mid)));
                }
            }
        }
    }
    Ok(None)
}

fn averaging_witness<A: Product>(alg: &A, a: usize, b: usize, identity: &str, lhs: &[Rat], rhs: &[Rat]) -> Value {
    json!({
        "pair": [alg.label(a), alg.label(b)],
        "identity": identity,
        "lhs": vector_to_json(lhs),
        "rhs": vector_to_json(rhs),
    })
}

/// A linear map verified to satisfy the averaging identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AveragingOp {
    op: Matrix,
    associative: bool,
}

impl AveragingOp {
    /// Verifies the Lie-mode identity on `g`.
    pub fn verify(g: &LieAlgebra, t: Matrix) -> Result<Self, AvgError> {
        match is_averaging(g, &t, Mode::Lie)? {
            None => Ok(Self { op: t, associative: false }),
            Some(w) => Err(AvgError::NotAveraging(w)),
        }
    }

    /// Verifies both identities on `End(Q^n)`.
    pub fn verify_associative(alg: &MatrixAlgebra, t: Matrix) -> Result<Self, AvgError> {
        match is_averaging(alg, &t, Mode::Associative)? {
            None => Ok(Self { op: t, associative: true }),
            Some(w) => Err(AvgError::NotAveraging(w)),
        }
    }

    pub fn op(&self) -> &Matrix {
        &self.op
    }

    pub fn into_op(self) -> Matrix {
        self.op
    }

    pub fn is_associative(&self) -> bool {
        self.associative
    }
}

/// `ψ ↦ Σ_g g ψ g^{-1}` on `gl(V)` for a finite matrix group.
pub fn group_averaging(mats: &[Matrix]) -> Result<Matrix, AvgError> {
    let first = mats.first().ok_or_else(|| AvgError::NotAGroup(json!("empty list")))?;
    let n = first.rows();
    for m in mats {
        check_square(m, n)?;
    }
    let find = |m: &Matrix| mats.iter().position(|x| x == m);
    let mut inverses = Vec::with_capacity(mats.len());
    for (i, a) in mats.iter().enumerate() {
        let inv = a.inverse().ok_or_else(|| AvgError::NotAGroup(json!({"singular": i})))?;
        if find(&inv).is_none() {
            return Err(AvgError::NotAGroup(json!({"missing_inverse_of": i})));
        }
        for (j, b) in mats.iter().enumerate() {
            if find(&a.mul(b)).is_none() {
                return Err(AvgError::NotAGroup(json!({"product": [i, j], "matrix": a.mul(b).to_json()})));
            }
        }
        inverses.push(inv);
    }
    let alg = MatrixAlgebra::new(n);
    let cols: Vec<Vector> = (0..n * n)
        .map(|k| {
            let e = alg.to_matrix(&unit_vector(n * n, k));
            let mut acc = Matrix::zeros(n, n);
            for (g, gi) in mats.iter().zip(&inverses) {
                acc = acc.add(&g.mul(&e).mul(gi));
            }
            alg.to_vector(&acc)
        })
        .collect();
    Ok(Matrix::from_columns(n * n, &cols))
}

/// `T1 ∘ T2` for commuting averaging operators, re-verified.
pub fn compose_commuting(g: &LieAlgebra, t1: &AveragingOp, t2: &AveragingOp) -> Result<AveragingOp, AvgError> {
    let a = t1.op.mul(&t2.op);
    let b = t2.op.mul(&t1.op);
    if let Some((row, col, value)) = a.sub(&b).first_nonzero_entry() {
        return Err(AvgError::NonCommuting { row, col, value: format_rat(&value) });
    }
    AveragingOp::verify(g, a)
}

/// Projection onto the Cartan subalgebra along the root spaces.
pub fn cartan_projection(g: &LieAlgebra, rd: &RootDatum) -> Matrix {
    let d = g.dim();
    let mut inputs: Vec<Vector> = rd.cartan().to_vec();
    inputs.extend(rd.root_vectors().iter().cloned());
    let mut outputs: Vec<Vector> = rd.cartan().to_vec();
    outputs.extend(std::iter::repeat_n(zero_vector(d), rd.root_count()));
    let inv = Matrix::from_columns(d, &inputs).inverse().expect("Cartan plus root vectors form a basis");
    Matrix::from_columns(d, &outputs).mul(&inv)
}

/// Leibniz algebra `{a,b} = [T(a),b]`: the identity, `ker T` as a two-sided
/// ideal, and Lie validity of the quotient.
pub fn leibniz_check(g: &LieAlgebra, t: &Matrix) -> Result<Vec<Check>, AvgError> {
    let d = g.dim();
    check_square(t, d)?;
    let cols = t.columns();
    let lb = |x: &[Rat], y: &[Rat]| g.bracket(&t.apply(x), y);
    let mut identity = None;
    'id: for x in 0..d {
        let ex = unit_vector(d, x);
        for y in 0..d {
            let ey = unit_vector(d, y);
            let xy = g.bracket(&cols[x], &ey);
            for z in 0..d {
                let ez = unit_vector(d, z);
                let lhs: Vector = {
                    let a = lb(&ex, &lb(&ey, &ez));
                    let b = lb(&ey, &lb(&ex, &ez));
                    a.iter().zip(&b).map(|(p, q)| p - q).collect()
                };
                let rhs = lb(&xy, &ez);
                if lhs != rhs {
                    identity = Some(json!({"triple": [g.labels()[x], g.labels()[y], g.labels()[z]]}));
                    break 'id;
                }
            }
        }
    }
    let kernel = t.nullspace();
    let kspace = Subspace::span(d, kernel.iter().cloned());
    let mut ideal = None;
    'ideal: for k in &kernel {
        for a in 0..d {
            let ea = unit_vector(d, a);
            if !is_zero_vector(&lb(k, &ea)) || !kspace.contains(&lb(&ea, k)) {
                ideal = Some(json!({"kernel_vector": vector_to_json(k), "basis": g.labels()[a]}));
                break 'ideal;
            }
        }
    }
    let quotient = if ideal.is_none() {
        let kq = kernel_and_quotient(&CurAlgebra::unchecked(g.clone()), &ConfOperator::new(vec![t.clone()]))
            .map_err(|e| AvgError::Input(e.to_string()))?;
        Check::from_witness("leibniz-quotient-lie", (!kq.validation.passes()).then(|| kq.validation.to_json()))
    } else {
        Check::fail("leibniz-quotient-lie", json!("not reached: kernel is not an ideal"))
    };
    Ok(vec![
        Check::from_witness("leibniz-identity", identity),
        Check::from_witness("leibniz-kernel-ideal", ideal),
        quotient,
    ])
}

/// `{a,b}_T = [T(a), b]` on basis vectors, as `(i, j, vector)` triples.
pub fn leibniz_table(g: &LieAlgebra, t: &Matrix) -> Vec<(usize, usize, Vector)> {
    let d = g.dim();
    let cols = t.columns();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let v = g.bracket(&cols[i], &unit_vector(d, j));
            if !is_zero_vector(&v) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Killing symmetry `⟨Tx,y⟩ = ⟨x,Ty⟩`; first failing basis pair.
pub fn killing_symmetry_witness(g: &LieAlgebra, t: &Matrix) -> Option<(usize, usize)> {
    let k = g.killing();
    let kt = k.mul(t);
    let tk = t.transpose().mul(&k);
    let d = g.dim();
    (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).find(|&(i, j)| kt.get(i, j) != tk.get(i, j))
}
