//! The classical Yang–Baxter equation over operator-valued Laurent polynomials.
//!
//! Tensors in `g ⊗ g` are stored as coefficient matrices `X` with
//! `X = Σ X[i][j] e_i ⊗ e_j`. The Killing identification
//! `a ⊗ b ↦ (x ↦ ⟨a, x⟩ b)` then reads `P = Xᵀ G`.

use std::collections::{BTreeMap, HashMap};

use num::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::averaging::{is_conformal_averaging, t_star_image, AveragingOp, AvgError, ConfAveOp, MAX_FAMILY_DEGREE};
use crate::exact::{factorial, format_rat, pow, evaluation_grid, poleform_combine, PoleForm, Rat, Sign};
use crate::liealg::{check_schema, LieAlgebra, RootDatum};
use crate::linalg::{is_zero_vector, unit_vector, vec_add, vec_sub, vector_to_json, Matrix, Vector};
use crate::report::Check;

pub const LAURENT_SCHEMA: &str = "laurent-op.v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CybeError {
    #[error("Killing form is degenerate")]
    SingularForm,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not symmetric in the requested sense: {0}")]
    NotSymmetric(Value),
    #[error("precondition failed: {0}")]
    Precondition(Value),
    #[error("principal part of order {0} exceeds the family degree cap")]
    DegreeTooLarge(usize),
    #[error("invalid input: {0}")]
    Input(String),
}

impl From<AvgError> for CybeError {
    fn from(e: AvgError) -> Self {
        match e {
            AvgError::SingularForm => CybeError::SingularForm,
            AvgError::DimensionMismatch { expected, got } => CybeError::DimensionMismatch { expected, got },
            other => CybeError::Precondition(json!(other.to_string())),
        }
    }
}

/// `P_u = Σ_k P_k u^k` with finitely many nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentOp {
    dim: usize,
    coeffs: BTreeMap<i32, Matrix>,
}

impl LaurentOp {
    pub fn new(dim: usize, coeffs: impl IntoIterator<Item = (i32, Matrix)>) -> Result<Self, CybeError> {
        let mut map: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (k, m) in coeffs {
            if m.rows() != dim || m.cols() != dim {
                return Err(CybeError::DimensionMismatch { expected: dim, got: m.rows().max(m.cols()) });
            }
            let sum = match map.remove(&k) {
                Some(prev) => prev.add(&m),
                None => m,
            };
            map.insert(k, sum);
        }
        map.retain(|_, m| !m.is_zero());
        Ok(Self { dim, coeffs: map })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    /// `m · u^k`
    pub fn single(k: i32, m: Matrix) -> Self {
        let dim = m.rows();
        Self::new(dim, [(k, m)]).expect("square matrix")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Matrix> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i32) -> Matrix {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| Matrix::zeros(self.dim, self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self, CybeError> {
        if self.dim != other.dim {
            return Err(CybeError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Self::new(self.dim, self.coeffs.iter().chain(&other.coeffs).map(|(k, m)| (*k, m.clone())))
    }

    /// `P_u` at a rational point; `u` must be nonzero when negative powers occur.
    pub fn at(&self, u: &Rat) -> Matrix {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for (k, m) in &self.coeffs {
            let s = if *k >= 0 { pow(u, *k as u32) } else { pow(u, k.unsigned_abs()).recip() };
            acc = acc.add(&m.scale(&s));
        }
        acc
    }

    /// Coefficientwise Killing adjoint `(P_u)* = Σ (P_k)* u^k`.
    pub fn adjoint(&self, g: &LieAlgebra) -> Result<Self, CybeError> {
        let gram = Gram::new(g)?;
        Ok(gram.adjoint_op(self))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": LAURENT_SCHEMA,
            "dim": self.dim,
            "coeffs": self.coeffs.iter().map(|(k, m)| json!([k, m.to_json()])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CybeError> {
        check_schema(v, LAURENT_SCHEMA).map_err(CybeError::Input)?;
        let raw = v["coeffs"].as_array().ok_or_else(|| CybeError::Input("missing coeffs".into()))?;
        let mut coeffs = Vec::with_capacity(raw.len());
        for entry in raw {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| CybeError::Input("coeff entries are [k, matrix]".into()))?;
            let k = pair[0].as_i64().and_then(|k| i32::try_from(k).ok()).ok_or_else(|| CybeError::Input("exponent must be an integer".into()))?;
            coeffs.push((k, Matrix::from_json(&pair[1]).map_err(CybeError::Input)?));
        }
        let dim = match v.get("dim").and_then(Value::as_u64) {
            Some(d) => d as usize,
            None => coeffs.first().map(|(_, m)| m.rows()).ok_or_else(|| CybeError::Input("empty operator needs a dim".into()))?,
        };
        Self::new(dim, coeffs)
    }
}

/// Killing gram and its inverse, computed once per algebra.
struct Gram {
    g: Matrix,
    inv: Matrix,
}

impl Gram {
    fn new(alg: &LieAlgebra) -> Result<Self, CybeError> {
        let g = alg.killing();
        let inv = g.inverse().ok_or(CybeError::SingularForm)?;
        Ok(Self { g, inv })
    }

    fn adjoint(&self, p: &Matrix) -> Matrix {
        self.inv.mul(&p.transpose()).mul(&self.g)
    }

    fn adjoint_op(&self, p: &LaurentOp) -> LaurentOp {
        LaurentOp { dim: p.dim, coeffs: p.coeffs.iter().map(|(k, m)| (*k, self.adjoint(m))).collect() }
    }
}

/// `X ↦ φ_X`, i.e. `P = Xᵀ G`.
pub fn tensor_to_op(g: &LieAlgebra, x: &Matrix) -> Result<Matrix, CybeError> {
    let gram = Gram::new(g)?;
    check_square(g.dim(), x)?;
    Ok(x.transpose().mul(&gram.g))
}

/// `P ↦ X = G⁻¹ Pᵀ`
pub fn op_to_tensor(g: &LieAlgebra, p: &Matrix) -> Result<Matrix, CybeError> {
    let gram = Gram::new(g)?;
    check_square(g.dim(), p)?;
    Ok(gram.inv.mul(&p.transpose()))
}

fn check_square(dim: usize, m: &Matrix) -> Result<(), CybeError> {
    if m.rows() != dim || m.cols() != dim {
        return Err(CybeError::DimensionMismatch { expected: dim, got: m.rows().max(m.cols()) });
    }
    Ok(())
}

/// Exponents of `u^i v^j (u+v)^k`.
type Mono = (i32, i32, i32);

/// Sparse accumulator of `Σ c · u^i v^j (u+v)^k`.
#[derive(Default)]
struct MonoSum(HashMap<Mono, Rat>);

impl MonoSum {
    fn add(&mut self, m: Mono, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(m).or_insert_with(Rat::zero);
        *e += c;
    }

    fn to_poleform(&self) -> PoleForm {
        let mut terms: Vec<(&Mono, &Rat)> = self.0.iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by_key(|(m, _)| **m);
        let forms: Vec<(PoleForm, Sign)> = terms.into_iter().map(|(&(i, j, k), c)| (PoleForm::monomial(c.clone(), i, j, k), Sign::Plus)).collect();
        poleform_combine(&forms).expect("all terms use (u, v)")
    }
}

/// Left side of the operator equation on `(e_a, e_b)`, one PoleForm per coordinate.
fn operator_lhs_cols(g: &LieAlgebra, p: &[(i32, Vec<Vector>, Matrix)], pstar: &[(i32, Vec<Vector>)], a: usize, b: usize) -> Vec<PoleForm> {
    let d = g.dim();
    let mut acc: Vec<MonoSum> = (0..d).map(|_| MonoSum::default()).collect();
    let mut push = |m: Mono, v: &Vector, sign: &Rat| {
        for (c, x) in v.iter().enumerate() {
            if !x.is_zero() {
                acc[c].add(m, &(x * sign));
            }
        }
    };
    let one = Rat::from_integer(1.into());
    let minus = -one.clone();
    let eb = unit_vector(d, b);
    // P_{u+v}([x, P*_u(y)])
    for (l, sl) in pstar {
        let inner = g.bracket_basis_left(a, &sl[b]);
        if is_zero_vector(&inner) {
            continue;
        }
        for (k, _, pk) in p {
            push((*l, 0, *k), &pk.apply(&inner), &one);
        }
    }
    // −P_v([P_u(x), y])
    for (l, cl, _) in p {
        let inner = g.bracket(&cl[a], &eb);
        if is_zero_vector(&inner) {
            continue;
        }
        for (k, _, pk) in p {
            push((*l, *k, 0), &pk.apply(&inner), &minus);
        }
    }
    // [P_{u+v}(x), P_v(y)]
    for (k, ck, _) in p {
        for (l, cl, _) in p {
            push((0, *l, *k), &g.bracket(&ck[a], &cl[b]), &one);
        }
    }
    acc.iter().map(MonoSum::to_poleform).collect()
}

fn prepared(p: &LaurentOp) -> Vec<(i32, Vec<Vector>, Matrix)> {
    p.coeffs.iter().map(|(k, m)| (*k, m.columns(), m.clone())).collect()
}

/// Left side of the operator equation on the basis pair `(e_a, e_b)`.
pub fn operator_lhs(g: &LieAlgebra, p: &LaurentOp, a: usize, b: usize) -> Result<Vec<PoleForm>, CybeError> {
    check_square(g.dim(), &p.coeff(0))?;
    let gram = Gram::new(g)?;
    let pp = prepared(p);
    let ps: Vec<(i32, Vec<Vector>)> = gram.adjoint_op(p).coeffs.iter().map(|(k, m)| (*k, m.columns())).collect();
    Ok(operator_lhs_cols(g, &pp, &ps, a, b))
}

/// Outcome of the exact and the sampled check.
#[derive(Clone, Debug, PartialEq)]
pub struct CybeReport {
    pub poleform_witness: Option<Value>,
    pub grid_witness: Option<Value>,
}

impl CybeReport {
    pub fn passed(&self) -> bool {
        self.poleform_witness.is_none() && self.grid_witness.is_none()
    }

    pub fn paths_agree(&self) -> bool {
        self.poleform_witness.is_none() == self.grid_witness.is_none()
    }

    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::from_witness("cybe-poleform", self.poleform_witness.clone()),
            Check::from_witness("cybe-grid", self.grid_witness.clone()),
        ]
    }
}

/// `P_{u+v}([x,P*_u(y)]) − P_v([P_u(x),y]) + [P_{u+v}(x),P_v(y)] = 0` on every basis pair.
pub fn cybe_check_operator(g: &LieAlgebra, p: &LaurentOp) -> Result<CybeReport, CybeError> {
    let d = g.dim();
    if p.dim != d {
        return Err(CybeError::DimensionMismatch { expected: d, got: p.dim });
    }
    let gram = Gram::new(g)?;
    let pstar = gram.adjoint_op(p);
    let pp = prepared(p);
    let ps: Vec<(i32, Vec<Vector>)> = pstar.coeffs.iter().map(|(k, m)| (*k, m.columns())).collect();
    let labels = g.labels();

    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
    let poleform_witness = pairs
        .par_iter()
        .map(|&(a, b)| {
            let lhs = operator_lhs_cols(g, &pp, &ps, a, b);
            lhs.iter().position(|f| !f.is_zero()).map(|c| {
                json!({"x": labels[a], "y": labels[b], "coordinate": labels[c], "poleform": lhs[c].to_json(), "display": lhs[c].to_string()})
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    let grid_witness = evaluation_grid().into_iter().find_map(|(u, v)| {
        let s = &u + &v;
        let (psum, pu, pv, pstar_u) = (p.at(&s), p.at(&u), p.at(&v), pstar.at(&u));
        let (psum_c, pu_c, pv_c, pstar_c) = (psum.columns(), pu.columns(), pv.columns(), pstar_u.columns());
        for a in 0..d {
            for b in 0..d {
                let t1 = psum.apply(&g.bracket_basis_left(a, &pstar_c[b]));
                let t2 = pv.apply(&g.bracket(&pu_c[a], &unit_vector(d, b)));
                let t3 = g.bracket(&psum_c[a], &pv_c[b]);
                let total = vec_add(&vec_sub(&t1, &t2), &t3);
                if !is_zero_vector(&total) {
                    return Some(json!({"u": format_rat(&u), "v": format_rat(&v), "x": labels[a], "y": labels[b], "value": vector_to_json(&total)}));
                }
            }
        }
        None
    });
    Ok(CybeReport { poleform_witness, grid_witness })
}

/// Tensor series `X(u) = Σ_k X_k u^k` with coefficient matrices as above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSeries {
    pub dim: usize,
    pub coeffs: BTreeMap<i32, Matrix>,
}

impl TensorSeries {
    pub fn from_op(g: &LieAlgebra, p: &LaurentOp) -> Result<Self, CybeError> {
        let gram = Gram::new(g)?;
        Ok(Self { dim: p.dim, coeffs: p.coeffs.iter().map(|(k, m)| (*k, gram.inv.mul(&m.transpose()))).collect() })
    }

    pub fn to_op(&self, g: &LieAlgebra) -> Result<LaurentOp, CybeError> {
        let gram = Gram::new(g)?;
        LaurentOp::new(self.dim, self.coeffs.iter().map(|(k, x)| (*k, x.transpose().mul(&gram.g))))
    }
}

/// Element of `g ⊗ g ⊗ g` with PoleForm coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorElem3 {
    pub coords: BTreeMap<(usize, usize, usize), PoleForm>,
}

fn sparse(m: &Matrix) -> Vec<(usize, usize, Rat)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for (j, c) in m.row(i).iter().enumerate() {
            if !c.is_zero() {
                out.push((i, j, c.clone()));
            }
        }
    }
    out
}

/// `[X^{12}(u), X^{13}(u+v)] + [X^{12}(u), X^{23}(v)] + [X^{13}(u+v), X^{23}(v)]`
pub fn cybe_tensor_lhs(g: &LieAlgebra, x: &TensorSeries) -> TensorElem3 {
    let terms: Vec<(i32, Vec<(usize, usize, Rat)>)> = x.coeffs.iter().map(|(k, m)| (*k, sparse(m))).collect();
    let mut acc: HashMap<(usize, usize, usize), MonoSum> = HashMap::new();
    let mut add = |key: (usize, usize, usize), m: Mono, c: Rat| acc.entry(key).or_default().add(m, &c);
    for (k, xk) in &terms {
        for (l, xl) in &terms {
            for (p, q, a) in xk {
                for (r, s, b) in xl {
                    let ab = a * b;
                    // [a_p ⊗ b_q ⊗ 1, c_r ⊗ 1 ⊗ d_s] with X(u), X(u+v)
                    for (t, c) in g.structure(*p, *r) {
                        add((*t, *q, *s), (*k, 0, *l), &ab * c);
                    }
                    // [a_p ⊗ b_q ⊗ 1, 1 ⊗ c_r ⊗ d_s] with X(u), X(v)
                    for (t, c) in g.structure(*q, *r) {
                        add((*p, *t, *s), (*k, *l, 0), &ab * c);
                    }
                    // [a_p ⊗ 1 ⊗ b_q, 1 ⊗ c_r ⊗ d_s] with X(u+v), X(v)
                    for (t, c) in g.structure(*q, *s) {
                        add((*p, *r, *t), (0, *l, *k), &ab * c);
                    }
                }
            }
        }
    }
    let coords = acc
        .into_iter()
        .map(|(key, sum)| (key, sum.to_poleform()))
        .filter(|(_, f)| !f.is_zero())
        .collect();
    TensorElem3 { coords }
}

/// Tensor form; `Some(witness)` on failure.
pub fn cybe_check_tensor(g: &LieAlgebra, x: &TensorSeries) -> Result<Option<Value>, CybeError> {
    if x.dim != g.dim() {
        return Err(CybeError::DimensionMismatch { expected: g.dim(), got: x.dim });
    }
    Gram::new(g)?;
    let lhs = cybe_tensor_lhs(g, x);
    let labels = g.labels();
    Ok(lhs.coords.iter().next().map(|((i, j, k), f)| {
        json!({"coordinate": [labels[*i], labels[*j], labels[*k]], "poleform": f.to_json(), "display": f.to_string()})
    }))
}

/// `T_m = P_{−m−1}`: the coefficients of `Res_{u=0} P_u e^{λu}` in divided powers.
pub fn residue_extract(p: &LaurentOp) -> Result<ConfAveOp, CybeError> {
    let order = p.coeffs.keys().next().filter(|k| **k < 0).map_or(0, |k| k.unsigned_abs() as usize);
    if order > MAX_FAMILY_DEGREE + 1 {
        return Err(CybeError::DegreeTooLarge(order - 1));
    }
    let family: Vec<Matrix> = if order == 0 { vec![Matrix::zeros(p.dim, p.dim)] } else { (0..order).map(|m| p.coeff(-(m as i32) - 1)).collect() };
    Ok(ConfAveOp::new(family)?)
}

/// CYBE precondition, then conformal averaging of the residue.
pub fn theorem1_roundtrip(g: &LieAlgebra, p: &LaurentOp) -> Result<Vec<Check>, CybeError> {
    let cy = cybe_check_operator(g, p)?;
    let pre = Check::from_witness("roundtrip-cybe", cy.poleform_witness.clone().or(cy.grid_witness.clone()));
    if !pre.passed() {
        return Ok(vec![pre]);
    }
    let t = residue_extract(p)?;
    let rep = is_conformal_averaging(g, &t)?;
    Ok(vec![pre, Check::from_witness("roundtrip-residue-averaging", rep.witness().cloned())])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// `⟨Tx, y⟩ = ⟨x, Ty⟩`
    Strict,
    /// `T([T*(x), y] − [T(x), y]) = 0`
    Relaxed,
}

/// First basis pair violating the chosen symmetry condition.
pub fn symmetry_witness(g: &LieAlgebra, t: &Matrix, mode: Symmetry) -> Result<Option<Value>, CybeError> {
    let d = g.dim();
    check_square(d, t)?;
    let gram = Gram::new(g)?;
    let labels = g.labels();
    let tc = t.columns();
    match mode {
        Symmetry::Strict => {
            let lhs = gram.g.mul(t);
            let rhs = t.transpose().mul(&gram.g);
            for a in 0..d {
                for b in 0..d {
                    if lhs.get(b, a) != rhs.get(b, a) {
                        return Ok(Some(json!({"x": labels[a], "y": labels[b], "<Tx,y>": format_rat(rhs.get(b, a)), "<x,Ty>": format_rat(lhs.get(b, a))})));
                    }
                }
            }
        }
        Symmetry::Relaxed => {
            let tsc = gram.adjoint(t).columns();
            for a in 0..d {
                let diff = vec_sub(&tsc[a], &tc[a]);
                for b in 0..d {
                    let v = t.apply(&g.bracket(&diff, &unit_vector(d, b)));
                    if !is_zero_vector(&v) {
                        return Ok(Some(json!({"x": labels[a], "y": labels[b], "value": vector_to_json(&v)})));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `P_u = T / u` for a symmetric averaging operator.
pub fn solution_from_symmetric_averaging(g: &LieAlgebra, t: &AveragingOp, mode: Symmetry) -> Result<LaurentOp, CybeError> {
    if t.is_associative() {
        return Err(CybeError::Input("expected a Lie averaging operator".into()));
    }
    if let Some(w) = symmetry_witness(g, t.op(), mode)? {
        return Err(CybeError::NotSymmetric(w));
    }
    Ok(LaurentOp::single(-1, t.op().clone()))
}

/// `P_u = u^{-1} T_{u^{-1}}`, so `P_{−n−1} = T_n / n!`.
pub fn solution_from_conformal_averaging(g: &LieAlgebra, rd: &RootDatum, t: &ConfAveOp) -> Result<LaurentOp, CybeError> {
    if t.dim() != g.dim() {
        return Err(CybeError::DimensionMismatch { expected: g.dim(), got: t.dim() });
    }
    if let Some(w) = is_conformal_averaging(g, t)?.witness() {
        return Err(CybeError::Precondition(json!({"reason": "not conformal averaging", "witness": w})));
    }
    let image = t_star_image(t);
    if let Some(h) = rd.cartan().iter().find(|h| !image.contains(h)) {
        return Err(CybeError::Precondition(json!({"reason": "Cartan element outside T_*(g)", "vector": vector_to_json(h)})));
    }
    LaurentOp::new(
        g.dim(),
        t.family().iter().enumerate().map(|(n, m)| (-(n as i32) - 1, m.scale(&factorial(n as u32).recip()))),
    )
}

/// Both readings of the constant skew specialization.
#[derive(Clone, Debug, PartialEq)]
pub struct RotaBaxterReport {
    /// `[Rx, Ry] = R([Rx, y]) + R([x, Ry])`
    pub standard: Option<Value>,
    /// `[Rx, Ry] = R([x, Ry]) + R([x, Ry])`, as literally displayed.
    pub literal: Option<Value>,
}

impl RotaBaxterReport {
    pub fn passed(&self) -> bool {
        self.standard.is_none()
    }

    pub fn readings_agree(&self) -> bool {
        self.standard.is_none() == self.literal.is_none()
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![Check::from_witness("rota-baxter", self.standard.clone())];
        if !self.readings_agree() {
            out.push(Check::info("rota-baxter-literal-reading", Some(json!({"literal_passes": self.literal.is_none(), "witness": self.literal}))));
        }
        out
    }
}

/// `([Rx, Ry], R([Rx, y]) + R([x, Ry]), 2 R([x, Ry]))` on `(e_a, e_b)`.
pub fn rota_baxter_sides(g: &LieAlgebra, r: &Matrix, a: usize, b: usize) -> (Vector, Vector, Vector) {
    let d = g.dim();
    let (ra, rb) = (r.column(a), r.column(b));
    let lhs = g.bracket(&ra, &rb);
    let x_ry = r.apply(&g.bracket_basis_left(a, &rb));
    let rx_y = r.apply(&g.bracket(&ra, &unit_vector(d, b)));
    (lhs, vec_add(&rx_y, &x_ry), vec_add(&x_ry, &x_ry))
}

pub fn rota_baxter_check(g: &LieAlgebra, r: &Matrix) -> Result<RotaBaxterReport, CybeError> {
    let d = g.dim();
    check_square(d, r)?;
    let labels = g.labels();
    let mut standard = None;
    let mut literal = None;
    for a in 0..d {
        for b in 0..d {
            let (lhs, std_rhs, lit_rhs) = rota_baxter_sides(g, r, a, b);
            let w = |rhs: &Vector| json!({"x": labels[a], "y": labels[b], "lhs": vector_to_json(&lhs), "rhs": vector_to_json(rhs)});
            if standard.is_none() && lhs != std_rhs {
                standard = Some(w(&std_rhs));
            }
            if literal.is_none() && lhs != lit_rhs {
                literal = Some(w(&lit_rhs));
            }
        }
    }
    Ok(RotaBaxterReport { standard, literal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{cartan_projection, homogeneous_build, random_spec};
    use crate::exact::{frac, rat};
    use crate::liealg::{build_sl, direct_sum, enumerate_closed_symmetric};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sl2() -> (LieAlgebra, RootDatum) {
        build_sl(2).unwrap()
    }

    fn idx(g: &LieAlgebra, l: &str) -> usize {
        g.index_of(l).unwrap()
    }

    #[test]
    fn casimir_is_identity() {
        let (g, _) = sl2();
        let (h, f, e) = (idx(&g, "H1"), idx(&g, "E21"), idx(&g, "E12"));
        let mut omega = Matrix::zeros(3, 3);
        omega.set(h, h, frac(1, 8));
        omega.set(e, f, frac(1, 4));
        omega.set(f, e, frac(1, 4));
        assert_eq!(tensor_to_op(&g, &omega).unwrap(), Matrix::identity(3));
        assert_eq!(op_to_tensor(&g, &Matrix::identity(3)).unwrap(), omega);
    }

    #[test]
    fn swap_is_adjoint() {
        let (g, _) = sl2();
        for i in 0..3 {
            for j in 0..3 {
                let mut x = Matrix::zeros(3, 3);
                x.set(i, j, rat(1));
                let p = tensor_to_op(&g, &x).unwrap();
                let swapped = tensor_to_op(&g, &x.transpose()).unwrap();
                assert_eq!(g.killing_adjoint(&p).unwrap(), swapped);
            }
        }
    }

    #[test]
    fn identity_over_u_solves() {
        let (g, _) = sl2();
        let p = LaurentOp::single(-1, Matrix::identity(3));
        let r = cybe_check_operator(&g, &p).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p).unwrap()).unwrap().is_none());
    }

    #[test]
    fn cartan_projection_solves() {
        let (g, rd) = sl2();
        let t = AveragingOp::verify(&g, cartan_projection(&g, &rd)).unwrap();
        let p = solution_from_symmetric_averaging(&g, &t, Symmetry::Strict).unwrap();
        assert!(cybe_check_operator(&g, &p).unwrap().passed());
        assert!(cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p).unwrap()).unwrap().is_none());
    }

    #[test]
    fn ad_e_fails_at_sample_point() {
        let (g, _) = sl2();
        let e = idx(&g, "E12");
        let ad = g.ad(&g.basis_vector(e));
        let p = LaurentOp::single(-1, ad);
        let r = cybe_check_operator(&g, &p).unwrap();
        assert!(r.poleform_witness.is_some() && r.grid_witness.is_some());
        assert!(cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p).unwrap()).unwrap().is_some());

        // (f, f): total is 2h / (v (u+v)), so h/3 at (1, 2)
        let f = idx(&g, "E21");
        let lhs = operator_lhs(&g, &p, f, f).unwrap();
        let h = idx(&g, "H1");
        let expected = PoleForm::monomial(rat(2), 0, -1, -1);
        assert_eq!(lhs[h], expected);
        assert_eq!(lhs[h].eval(&rat(1), &rat(2)), Some(frac(1, 3)));
        assert!(lhs.iter().enumerate().all(|(c, x)| c == h || x.is_zero()));
    }

    /// Contracting the tensor left side against the gram recovers the operator left side.
    #[test]
    fn tensor_contracts_to_operator() {
        let (g, _) = sl2();
        let gram = g.killing();
        let mut a = Matrix::zeros(3, 3);
        a.set(0, 1, rat(1));
        a.set(2, 0, rat(-2));
        a.set(1, 1, rat(3));
        let p = LaurentOp::new(3, [(-1, a), (0, Matrix::identity(3)), (-2, g.ad(&g.basis_vector(0)))]).unwrap();
        let z = cybe_tensor_lhs(&g, &TensorSeries::from_op(&g, &p).unwrap());
        for xa in 0..3 {
            for yb in 0..3 {
                let op = operator_lhs(&g, &p, xa, yb).unwrap();
                for t in 0..3 {
                    let mut terms = Vec::new();
                    for ((r, s, tt), f) in &z.coords {
                        if *tt == t {
                            terms.push((f.scale(&(gram.get(*r, xa) * gram.get(*s, yb))), Sign::Plus));
                        }
                    }
                    let contracted = poleform_combine(&terms).unwrap();
                    assert_eq!(contracted, op[t], "pair ({xa},{yb}) coordinate {t}");
                }
            }
        }
    }

    #[test]
    fn residues() {
        let a = Matrix::identity(2);
        let mut b = Matrix::zeros(2, 2);
        b.set(0, 1, rat(1));
        let c = Matrix::scalar(2, &rat(5));
        let p = LaurentOp::new(2, [(-2, a.clone()), (-1, b.clone()), (0, c)]).unwrap();
        let t = residue_extract(&p).unwrap();
        assert_eq!(t.family(), &[b, a.clone()]);
        assert_eq!(residue_extract(&LaurentOp::single(-1, a.clone())).unwrap(), ConfAveOp::ordinary(a.clone()));
        assert_eq!(residue_extract(&LaurentOp::single(3, a)).unwrap(), ConfAveOp::zero(2));
    }

    #[test]
    fn roundtrip_on_identity() {
        let (g, _) = sl2();
        let checks = theorem1_roundtrip(&g, &LaurentOp::single(-1, Matrix::identity(3))).unwrap();
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(Check::passed));
        let bad = theorem1_roundtrip(&g, &LaurentOp::single(-1, g.ad(&g.basis_vector(2)))).unwrap();
        assert_eq!(bad.len(), 1);
        assert!(!bad[0].passed());
    }

    #[test]
    fn conformal_solution_on_sl2() {
        // T_λ(h) = (1 + λ) h, zero on e and f
        let (g, rd) = sl2();
        let h = idx(&g, "H1");
        let mut t0 = Matrix::zeros(3, 3);
        t0.set(h, h, rat(1));
        let t = ConfAveOp::new(vec![t0.clone(), t0.clone()]).unwrap();
        let p = solution_from_conformal_averaging(&g, &rd, &t).unwrap();
        assert_eq!(p.coeffs().len(), 2);
        assert_eq!(p.coeff(-1), t0);
        assert_eq!(p.coeff(-2), t0);
        assert!(cybe_check_operator(&g, &p).unwrap().passed());
        let back = residue_extract(&p).unwrap();
        assert!(is_conformal_averaging(&g, &back).unwrap().passed());
    }

    #[test]
    fn ordinary_families_match_example() {
        let (g, rd) = sl2();
        let proj = cartan_projection(&g, &rd);
        let a = solution_from_conformal_averaging(&g, &rd, &ConfAveOp::ordinary(proj.clone())).unwrap();
        let b = solution_from_symmetric_averaging(&g, &AveragingOp::verify(&g, proj).unwrap(), Symmetry::Strict).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sl3_homogeneous_families_solve() {
        let (g, rd) = build_sl(3).unwrap();
        let subs = enumerate_closed_symmetric(&rd).unwrap();
        assert_eq!(subs.len(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for sub in &subs {
            let spec = random_spec(&rd, sub, &mut rng, 2);
            let fam = homogeneous_build(&g, &rd, &spec).unwrap();
            let p = solution_from_conformal_averaging(&g, &rd, &fam.op).unwrap();
            let r = cybe_check_operator(&g, &p).unwrap();
            assert!(r.passed(), "{:?} {r:?}", sub.members());
            assert!(cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p).unwrap()).unwrap().is_none());
            let rt = theorem1_roundtrip(&g, &p).unwrap();
            assert!(rt.iter().all(Check::passed));
        }
    }

    #[test]
    fn symmetry_modes() {
        let (g, rd) = sl2();
        let id = AveragingOp::verify(&g, Matrix::identity(3)).unwrap();
        assert!(solution_from_symmetric_averaging(&g, &id, Symmetry::Relaxed).is_ok());
        let proj = cartan_projection(&g, &rd);
        assert!(symmetry_witness(&g, &proj, Symmetry::Relaxed).unwrap().is_none());
        // T(a, b) = (a, a) on sl2 ⊕ sl2 is averaging but not symmetric
        let gg = direct_sum(&g, &g);
        let mut t = Matrix::zeros(6, 6);
        for i in 0..3 {
            t.set(i, i, rat(1));
            t.set(i + 3, i, rat(1));
        }
        let op = AveragingOp::verify(&gg, t).unwrap();
        assert!(matches!(solution_from_symmetric_averaging(&gg, &op, Symmetry::Strict), Err(CybeError::NotSymmetric(_))));
    }

    #[test]
    fn rota_baxter_examples() {
        let (g, _) = sl2();
        assert!(rota_baxter_check(&g, &Matrix::zeros(3, 3)).unwrap().passed());
        let rep = rota_baxter_check(&g, &Matrix::identity(3)).unwrap();
        assert!(!rep.passed());
        // the pair (e, f) fails: [e, f] = h but the right side is 2h
        let (e, f, h) = (idx(&g, "E12"), idx(&g, "E21"), idx(&g, "H1"));
        let (lhs, rhs, _) = rota_baxter_sides(&g, &Matrix::identity(3), e, f);
        assert_eq!(lhs, g.basis_vector(h));
        assert_eq!(rhs, vec_add(&lhs, &lhs));
    }

    /// R(e) = h, R(h) = −2e, R(f) = 0, checked against a hand-expanded oracle.
    #[test]
    fn rota_baxter_brute_force() {
        let (g, _) = sl2();
        let (h, f, e) = (idx(&g, "H1"), idx(&g, "E21"), idx(&g, "E12"));
        let mut r = Matrix::zeros(3, 3);
        r.set(h, e, rat(1));
        r.set(e, h, rat(-2));
        let rv = |i: usize| r.column(i);
        let br = |x: &Vector, y: &Vector| g.bracket(x, y);
        let mut oracle = true;
        for a in [h, f, e] {
            for b in [h, f, e] {
                let (x, y) = (g.basis_vector(a), g.basis_vector(b));
                let lhs = br(&rv(a), &rv(b));
                let rhs = vec_add(&r.apply(&br(&rv(a), &y)), &r.apply(&br(&x, &rv(b))));
                oracle &= lhs == rhs;
            }
        }
        assert_eq!(rota_baxter_check(&g, &r).unwrap().passed(), oracle);
    }

    /// `h ∧ e` is a constant skew solution, hence Rota–Baxter.
    #[test]
    fn jordanian_constant_solution() {
        let (g, _) = sl2();
        let (h, e) = (idx(&g, "H1"), idx(&g, "E12"));
        let mut x = Matrix::zeros(3, 3);
        x.set(h, e, rat(1));
        x.set(e, h, rat(-1));
        let r = tensor_to_op(&g, &x).unwrap();
        assert_eq!(g.killing_adjoint(&r).unwrap(), r.scale(&rat(-1)));
        assert!(cybe_check_operator(&g, &LaurentOp::single(0, r.clone())).unwrap().passed());
        assert!(rota_baxter_check(&g, &r).unwrap().passed());
    }

    #[test]
    fn laurent_json_roundtrip() {
        let p = LaurentOp::new(2, [(-3, Matrix::identity(2)), (1, Matrix::scalar(2, &frac(-1, 2)))]).unwrap();
        assert_eq!(LaurentOp::from_json(&p.to_json()).unwrap(), p);
        let z = LaurentOp::zero(4);
        assert_eq!(LaurentOp::from_json(&z.to_json()).unwrap(), z);
        let mut bad = p.to_json();
        bad["schema"] = json!("laurent-op.v0");
        assert!(LaurentOp::from_json(&bad).is_err());
    }

    fn small_matrix(d: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-2i64..=2, d * d).prop_map(move |v| {
            Matrix::from_rows(v.chunks(d).map(|r| r.iter().map(|x| rat(*x)).collect()).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conversions_are_inverse(p in small_matrix(3)) {
            let (g, _) = sl2();
            prop_assert_eq!(tensor_to_op(&g, &op_to_tensor(&g, &p).unwrap()).unwrap(), p.clone());
            prop_assert_eq!(op_to_tensor(&g, &tensor_to_op(&g, &p).unwrap()).unwrap(), p);
        }

        #[test]
        fn residue_is_linear(a in small_matrix(2), b in small_matrix(2), c in small_matrix(2), k in -3i32..2) {
            let p = LaurentOp::new(2, [(-1, a.clone()), (k, b.clone())]).unwrap();
            let q = LaurentOp::new(2, [(-2, c.clone()), (-1, b.clone())]).unwrap();
            let lhs = residue_extract(&p.add(&q).unwrap()).unwrap();
            let (rp, rq) = (residue_extract(&p).unwrap(), residue_extract(&q).unwrap());
            for n in 0..3 {
                prop_assert_eq!(lhs.coeff(n), rp.coeff(n).add(&rq.coeff(n)));
            }
        }

        #[test]
        fn operator_and_tensor_agree(a in small_matrix(3), b in small_matrix(3), k in -2i32..1) {
            let (g, _) = sl2();
            let p = LaurentOp::new(3, [(-1, a), (k, b)]).unwrap();
            let op = cybe_check_operator(&g, &p).unwrap();
            let tensor = cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p).unwrap()).unwrap();
            prop_assert!(op.paths_agree());
            prop_assert_eq!(op.passed(), tensor.is_none());
        }

        /// For skew constants the operator equation is the Rota–Baxter identity.
        #[test]
        fn skew_constants_are_rota_baxter(v in proptest::collection::vec(-2i64..=2, 3)) {
            let (g, _) = sl2();
            let mut x = Matrix::zeros(3, 3);
            for (n, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
                x.set(i, j, rat(v[n]));
                x.set(j, i, rat(-v[n]));
            }
            let r = tensor_to_op(&g, &x).unwrap();
            let cy = cybe_check_operator(&g, &LaurentOp::single(0, r.clone())).unwrap();
            prop_assert_eq!(cy.passed(), rota_baxter_check(&g, &r).unwrap().passed());
        }
    }
}
