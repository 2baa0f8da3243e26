//! The current conformal algebra `Cur g = Q[∂] ⊗ g`.
//!
//! n-products are obtained by rewriting: ∂ on the left is removed with
//! `[∂a⟨n⟩b] = −n[a⟨n−1⟩b]`, ∂ on the right with
//! `[a⟨n⟩∂b] = ∂[a⟨n⟩b] + n[a⟨n−1⟩b]`, and generators multiply as
//! `(1⊗a)⟨n⟩(1⊗b) = δ_{n,0} ⊗ [a,b]`.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::averaging::ConfAveOp;
use crate::exact::{binomial, factorial, Rat};
use crate::liealg::{check_schema, validate, LieAlgebra, ValidationReport};
use crate::linalg::{
    axpy, is_zero_vector, parse_vector, unit_vector, vector_to_json, zero_vector, BasisCoords,
    Matrix, Subspace, Vector,
};
use crate::report::Check;

/// Largest ∂-degree a [`ConfElem`] may carry.
pub const MAX_DEGREE: u32 = 64;
pub const CONF_ELEM_SCHEMA: &str = "conf-elem.v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfError {
    #[error("∂-degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeOverflow(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("base algebra fails the Lie axioms")]
    InvalidBase,
    #[error("operator is not conformal averaging on Cur g: {0}")]
    NotAveraging(String),
    #[error("kernel is not an ideal of the Leibniz structure: {0}")]
    KernelNotIdeal(String),
    #[error("invalid input: {0}")]
    Input(String),
}

/// `Σ_k ∂^k ⊗ a_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfElem {
    dim: usize,
    terms: BTreeMap<u32, Vector>,
}

impl ConfElem {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    /// `1 ⊗ a`
    pub fn generator(a: Vector) -> Self {
        let dim = a.len();
        Self::zero(dim).plus_term(0, &a, &Rat::one())
    }

    /// `∂^k ⊗ a`
    pub fn monomial(k: u32, a: Vector) -> Result<Self, ConfError> {
        if k > MAX_DEGREE {
            return Err(ConfError::DegreeOverflow(k));
        }
        let dim = a.len();
        Ok(Self::zero(dim).plus_term(k, &a, &Rat::one()))
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (u32, Vector)>) -> Result<Self, ConfError> {
        let mut out = Self::zero(dim);
        for (k, a) in terms {
            if a.len() != dim {
                return Err(ConfError::DimensionMismatch { expected: dim, got: a.len() });
            }
            if k > MAX_DEGREE {
                return Err(ConfError::DegreeOverflow(k));
            }
            out = out.plus_term(k, &a, &Rat::one());
        }
        Ok(out)
    }

    fn plus_term(mut self, k: u32, a: &[Rat], s: &Rat) -> Self {
        self.add_term(k, a, s);
        self
    }

    fn add_term(&mut self, k: u32, a: &[Rat], s: &Rat) {
        if s.is_zero() || is_zero_vector(a) {
            return;
        }
        let slot = self.terms.entry(k).or_insert_with(|| zero_vector(self.dim));
        axpy(slot, s, a);
        if is_zero_vector(slot) {
            self.terms.remove(&k);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<u32, Vector> {
        &self.terms
    }

    pub fn coeff(&self, k: u32) -> Vector {
        self.terms.get(&k).cloned().unwrap_or_else(|| zero_vector(self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, &Rat::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, &-Rat::one())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::zero(self.dim).add_scaled(self, s)
    }

    pub fn add_scaled(&self, other: &Self, s: &Rat) -> Self {
        let mut out = self.clone();
        for (k, a) in &other.terms {
            out.add_term(*k, a, s);
        }
        out
    }

    /// `∂^k · self`
    pub fn partial_pow(&self, k: u32) -> Result<Self, ConfError> {
        if let Some(d) = self.max_degree() {
            if d + k > MAX_DEGREE {
                return Err(ConfError::DegreeOverflow(d + k));
            }
        }
        Ok(Self { dim: self.dim, terms: self.terms.iter().map(|(d, a)| (d + k, a.clone())).collect() })
    }

    pub fn partial(&self) -> Result<Self, ConfError> {
        self.partial_pow(1)
    }

    /// Apply a linear map to every coefficient.
    pub fn map(&self, m: &Matrix) -> Self {
        let mut out = Self::zero(m.rows());
        for (k, a) in &self.terms {
            out.add_term(*k, &m.apply(a), &Rat::one());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(k, a)| json!([k, vector_to_json(a)])).collect();
        json!({"schema": CONF_ELEM_SCHEMA, "terms": terms})
    }

    pub fn from_json(v: &Value, dim: usize) -> Result<Self, ConfError> {
        check_schema(v, CONF_ELEM_SCHEMA).map_err(ConfError::Input)?;
        let bad = |m: &str| ConfError::Input(m.to_string());
        let mut terms = Vec::new();
        for t in v["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
            let k = t[0].as_u64().ok_or_else(|| bad("degree must be a nonnegative integer"))?;
            let k = u32::try_from(k).map_err(|_| ConfError::DegreeOverflow(u32::MAX))?;
            terms.push((k, parse_vector(&t[1]).map_err(ConfError::Input)?));
        }
        Self::from_terms(dim, terms)
    }

    fn describe(&self, labels: &[String]) -> String {
        if self.terms.len() == 1 {
            let (k, a) = self.terms.iter().next().expect("one term");
            let nz: Vec<usize> = (0..a.len()).filter(|i| !a[*i].is_zero()).collect();
            if nz.len() == 1 && a[nz[0]].is_one() {
                let d = match k {
                    0 => String::new(),
                    1 => "∂".to_string(),
                    k => format!("∂^{k}"),
                };
                return format!("{d}{}", labels[nz[0]]);
            }
        }
        self.to_json()["terms"].to_string()
    }
}

/// `[∂^i a⟨n⟩∂^j b] = Σ_k c_k ∂^k [a,b]`, derived by the two rewrite rules.
fn rewrite(i: u32, j: u32, n: u32, memo: &mut HashMap<(u32, u32, u32), BTreeMap<u32, Rat>>) -> BTreeMap<u32, Rat> {
    if let Some(r) = memo.get(&(i, j, n)) {
        return r.clone();
    }
    let out = if i > 0 {
        if n == 0 {
            BTreeMap::new()
        } else {
            let s = -Rat::from_integer(n.into());
            rewrite(i - 1, j, n - 1, memo).into_iter().map(|(k, c)| (k, c * &s)).collect()
        }
    } else if j > 0 {
        let mut acc: BTreeMap<u32, Rat> = rewrite(0, j - 1, n, memo).into_iter().map(|(k, c)| (k + 1, c)).collect();
        if n > 0 {
            let s = Rat::from_integer(n.into());
            for (k, c) in rewrite(0, j - 1, n - 1, memo) {
                *acc.entry(k).or_insert_with(Rat::zero) += c * &s;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        acc
    } else if n == 0 {
        BTreeMap::from([(0, Rat::one())])
    } else {
        BTreeMap::new()
    };
    memo.insert((i, j, n), out.clone());
    out
}

/// `Cur g` over a fixed base algebra.
#[derive(Clone, Debug)]
pub struct CurAlgebra {
    base: LieAlgebra,
}

impl CurAlgebra {
    /// Rejects base algebras that fail the Lie axioms.
    pub fn new(base: LieAlgebra) -> Result<Self, ConfError> {
        if !validate(&base).passes() {
            return Err(ConfError::InvalidBase);
        }
        Ok(Self { base })
    }

    /// Skips validation; used to probe how axiom failures propagate.
    pub fn unchecked(base: LieAlgebra) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &LieAlgebra {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn generator(&self, i: usize) -> ConfElem {
        ConfElem::generator(unit_vector(self.dim(), i))
    }

    /// Generators `1⊗e_i` followed by `∂⊗e_i`.
    fn small_elements(&self) -> Vec<ConfElem> {
        let mut v: Vec<ConfElem> = (0..self.dim()).map(|i| self.generator(i)).collect();
        v.extend((0..self.dim()).map(|i| self.generator(i).partial().expect("degree 1")));
        v
    }

    fn check_elem(&self, x: &ConfElem) -> Result<(), ConfError> {
        if x.dim != self.dim() {
            return Err(ConfError::DimensionMismatch { expected: self.dim(), got: x.dim });
        }
        Ok(())
    }

    pub fn n_product(&self, x: &ConfElem, y: &ConfElem, n: u32) -> Result<ConfElem, ConfError> {
        self.check_elem(x)?;
        self.check_elem(y)?;
        let mut memo = HashMap::new();
        let mut out = ConfElem::zero(self.dim());
        for (i, a) in &x.terms {
            for (j, b) in &y.terms {
                let coeffs = rewrite(*i, *j, n, &mut memo);
                if coeffs.is_empty() {
                    continue;
                }
                let ab = self.base.bracket(a, b);
                if is_zero_vector(&ab) {
                    continue;
                }
                for (k, c) in coeffs {
                    if k > MAX_DEGREE {
                        return Err(ConfError::DegreeOverflow(k));
                    }
                    out.add_term(k, &ab, &c);
                }
            }
        }
        Ok(out)
    }
}

type Product<'a> = dyn Fn(&ConfElem, &ConfElem, u32) -> Result<ConfElem, ConfError> + Sync + 'a;

fn pair_witness(labels: &[String], x: &ConfElem, y: &ConfElem, n: u32, lhs: &ConfElem, rhs: &ConfElem) -> Value {
    json!({
        "x": x.describe(labels),
        "y": y.describe(labels),
        "n": n,
        "lhs": lhs.to_json()["terms"],
        "rhs": rhs.to_json()["terms"],
    })
}

/// `[a⟨n⟩b] = Σ_s (−1)^{n+s+1}/s! ∂^s [b⟨n+s⟩a]`; first failing pair.
fn anticommutativity_witness(
    labels: &[String],
    elems: &[ConfElem],
    nmax: u32,
    prod: &Product<'_>,
) -> Result<Option<Value>, ConfError> {
    for x in elems {
        for y in elems {
            let smax = x.max_degree().unwrap_or(0) + y.max_degree().unwrap_or(0) + 1;
            for n in 0..=nmax {
                let lhs = prod(x, y, n)?;
                let mut rhs = ConfElem::zero(x.dim);
                for s in 0..=smax {
                    let t = prod(y, x, n + s)?;
                    if t.is_zero() {
                        continue;
                    }
                    let sign = if (n + s + 1) % 2 == 0 { Rat::one() } else { -Rat::one() };
                    rhs = rhs.add_scaled(&t.partial_pow(s)?, &(sign / factorial(s)));
                }
                if lhs != rhs {
                    return Ok(Some(pair_witness(labels, x, y, n, &lhs, &rhs)));
                }
            }
        }
    }
    Ok(None)
}

/// `[a⟨n⟩[b⟨m⟩c]] − [b⟨m⟩[a⟨n⟩c]] = Σ_s C(n,s) [[a⟨n−s⟩b]⟨m+s⟩c]` on generator triples.
fn jacobi_witness(cur: &CurAlgebra, nmax: u32, prod: &Product<'_>) -> Result<Option<Value>, ConfError> {
    let d = cur.dim();
    let labels = cur.base.labels();
    let found: Result<Vec<Option<Value>>, ConfError> = (0..d)
        .into_par_iter()
        .map(|ia| {
            let a = cur.generator(ia);
            for ib in 0..d {
                let b = cur.generator(ib);
                for ic in 0..d {
                    let c = cur.generator(ic);
                    for n in 0..=nmax {
                        for m in 0..=nmax {
                            let lhs = prod(&a, &prod(&b, &c, m)?, n)?.sub(&prod(&b, &prod(&a, &c, n)?, m)?);
                            let mut rhs = ConfElem::zero(d);
                            for s in 0..=n {
                                let ab = prod(&a, &b, n - s)?;
                                if ab.is_zero() {
                                    continue;
                                }
                                rhs = rhs.add_scaled(&prod(&ab, &c, m + s)?, &binomial(n, s));
                            }
                            if lhs != rhs {
                                return Ok(Some(json!({
                                    "triple": [labels[ia], labels[ib], labels[ic]],
                                    "n": n,
                                    "m": m,
                                    "lhs": lhs.to_json()["terms"],
                                    "rhs": rhs.to_json()["terms"],
                                })));
                            }
                        }
                    }
                }
            }
            Ok(None)
        })
        .collect();
    Ok(found?.into_iter().flatten().next())
}

/// Locality, the two ∂-rules, anticommutativity and Jacobi, each up to `nmax`.
pub fn check_axioms(cur: &CurAlgebra, nmax: u32) -> Result<Vec<Check>, ConfError> {
    if nmax < 2 {
        return Err(ConfError::Input("Nmax must be at least 2".into()));
    }
    let labels = cur.base.labels();
    let prod = |x: &ConfElem, y: &ConfElem, n: u32| cur.n_product(x, y, n);
    let gens: Vec<ConfElem> = (0..cur.dim()).map(|i| cur.generator(i)).collect();
    let small = cur.small_elements();

    let mut locality = None;
    'loc: for x in &gens {
        for y in &gens {
            for n in 1..=nmax {
                let p = prod(x, y, n)?;
                if !p.is_zero() {
                    locality = Some(pair_witness(labels, x, y, n, &p, &ConfElem::zero(cur.dim())));
                    break 'loc;
                }
            }
        }
    }

    let mut c2 = None;
    let mut c3 = None;
    for x in &small {
        for y in &small {
            for n in 0..=nmax {
                let prev = if n == 0 { ConfElem::zero(cur.dim()) } else { prod(x, y, n - 1)? };
                let nr = Rat::from_integer(n.into());
                if c2.is_none() {
                    let lhs = prod(&x.partial()?, y, n)?;
                    let rhs = prev.scale(&-nr.clone());
                    if lhs != rhs {
                        c2 = Some(pair_witness(labels, x, y, n, &lhs, &rhs));
                    }
                }
                if c3.is_none() {
                    let lhs = prod(x, &y.partial()?, n)?;
                    let rhs = prod(x, y, n)?.partial()?.add_scaled(&prev, &nr);
                    if lhs != rhs {
                        c3 = Some(pair_witness(labels, x, y, n, &lhs, &rhs));
                    }
                }
            }
        }
    }

    Ok(vec![
        Check::from_witness("locality", locality),
        Check::from_witness("c2", c2),
        Check::from_witness("c3", c3),
        Check::from_witness("anticommutativity", anticommutativity_witness(labels, &small, nmax, &prod)?),
        Check::from_witness("jacobi", jacobi_witness(cur, nmax, &prod)?),
    ])
}

/// The `Q[∂]`-linear operator `T(1⊗a) = Σ_n (−∂)^{(n)} ⊗ T_n(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfOperator {
    family: Vec<Matrix>,
}

impl ConfOperator {
    pub fn new(family: Vec<Matrix>) -> Self {
        Self { family }
    }

    pub fn family(&self) -> &[Matrix] {
        &self.family
    }
}

impl From<&ConfAveOp> for ConfOperator {
    fn from(t: &ConfAveOp) -> Self {
        Self::new(t.family().to_vec())
    }
}

pub fn apply_conf_operator(t: &ConfOperator, x: &ConfElem) -> Result<ConfElem, ConfError> {
    let mut out = ConfElem::zero(x.dim);
    for (n, tn) in t.family.iter().enumerate() {
        if tn.rows() != x.dim {
            return Err(ConfError::DimensionMismatch { expected: tn.rows(), got: x.dim });
        }
        let n = n as u32;
        let sign = if n % 2 == 0 { Rat::one() } else { -Rat::one() };
        let s = sign / factorial(n);
        for (k, a) in &x.terms {
            if k + n > MAX_DEGREE {
                return Err(ConfError::DegreeOverflow(k + n));
            }
            out.add_term(k + n, &tn.apply(a), &s);
        }
    }
    Ok(out)
}

/// `T([T(x)⟨n⟩y]) = [T(x)⟨n⟩T(y)]` for `x, y ∈ {1⊗e_i, ∂⊗e_i}` and `n ≤ nmax`.
pub fn check_conformal_averaging_on_cur(cur: &CurAlgebra, t: &ConfOperator, nmax: u32) -> Result<Check, ConfError> {
    let labels = cur.base.labels();
    let small = cur.small_elements();
    let found: Result<Vec<Option<Value>>, ConfError> = small
        .par_iter()
        .map(|x| {
            let tx = apply_conf_operator(t, x)?;
            for y in &small {
                let ty = apply_conf_operator(t, y)?;
                for n in 0..=nmax {
                    let lhs = apply_conf_operator(t, &cur.n_product(&tx, y, n)?)?;
                    let rhs = cur.n_product(&tx, &ty, n)?;
                    if lhs != rhs {
                        return Ok(Some(pair_witness(labels, x, y, n, &lhs, &rhs)));
                    }
                }
            }
            Ok(None)
        })
        .collect();
    Ok(Check::from_witness("conformal-averaging-on-cur", found?.into_iter().flatten().next()))
}

/// `{x⟨n⟩y}_T = [T(x)⟨n⟩y]`
pub fn leibniz_product(cur: &CurAlgebra, t: &ConfOperator, x: &ConfElem, y: &ConfElem, n: u32) -> Result<ConfElem, ConfError> {
    cur.n_product(&apply_conf_operator(t, x)?, y, n)
}

#[derive(Clone, Debug)]
pub struct LeibnizReport {
    /// Jacobi-type identity for the new products; decides pass/fail.
    pub jacobi: Check,
    /// Informational: anticommutativity is not expected to hold.
    pub anticommutativity: Check,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.jacobi.passed()
    }

    pub fn checks(&self) -> Vec<Check> {
        vec![self.jacobi.clone(), self.anticommutativity.clone()]
    }
}

/// Builds `{·⟨n⟩·}_T` and checks the Jacobi-type identity for it.
///
/// Rejects operators that are not conformal averaging on `Cur g`.
pub fn leibniz_products_and_check(cur: &CurAlgebra, t: &ConfOperator, nmax: u32) -> Result<LeibnizReport, ConfError> {
    let pre = check_conformal_averaging_on_cur(cur, t, nmax)?;
    if !pre.passed() {
        return Err(ConfError::NotAveraging(pre.witness.map(|w| w.to_string()).unwrap_or_default()));
    }
    let prod = |x: &ConfElem, y: &ConfElem, n: u32| leibniz_product(cur, t, x, y, n);
    let jacobi = Check::from_witness("leibniz-jacobi", jacobi_witness(cur, nmax, &prod)?);
    let gens: Vec<ConfElem> = (0..cur.dim()).map(|i| cur.generator(i)).collect();
    let anti = anticommutativity_witness(cur.base.labels(), &gens, nmax, &prod)?;
    Ok(LeibnizReport { jacobi, anticommutativity: Check::info("leibniz-anticommutativity", anti) })
}

/// Quotient `C_T / Ker T` restricted to generators, plus its split-null analysis.
#[derive(Clone, Debug)]
pub struct KernelQuotient {
    /// Basis of `∩_n ker T_n`.
    pub kernel: Vec<Vector>,
    /// Basis indices of `g` spanning the chosen complement.
    pub complement: Vec<usize>,
    /// Induced 0-product on the complement.
    pub quotient: LieAlgebra,
    pub validation: ValidationReport,
    /// `[T_n a, b] ∈ Ker` for every `n ≥ 1`.
    pub higher_products_vanish: Check,
    pub split_null: SplitNull,
}

/// Intrinsic comparison of the quotient with `[T_*, T_*] ⊕ Z(T_*)`.
#[derive(Clone, Debug)]
pub struct SplitNull {
    pub center_dim: usize,
    pub derived_dim: usize,
    /// `T_0` applied to lifts of a basis of the quotient's derived algebra.
    pub derived_image: Vec<Vector>,
    pub checks: Vec<Check>,
}

impl SplitNull {
    pub fn passed(&self) -> bool {
        crate::report::all_passed(&self.checks)
    }
}

impl KernelQuotient {
    pub fn passed(&self) -> bool {
        self.validation.passes() && self.higher_products_vanish.passed() && self.split_null.passed()
    }

    /// Compares against an externally predicted `(dim h_0^⊥, g_0)`.
    pub fn matches_prediction(&self, hperp_dim: usize, g0: &Subspace) -> Check {
        let image = Subspace::span(g0.ambient(), self.split_null.derived_image.iter().cloned());
        let ok_center = self.split_null.center_dim == hperp_dim;
        let ok_g0 = image.equals(g0) && self.split_null.derived_image.len() == g0.dim();
        if ok_center && ok_g0 {
            Check::pass("split-null-prediction")
        } else {
            Check::fail(
                "split-null-prediction",
                json!({
                    "center_dim": self.split_null.center_dim,
                    "expected_center_dim": hperp_dim,
                    "derived_dim": self.split_null.derived_dim,
                    "expected_g0_dim": g0.dim(),
                    "g0_matches": ok_g0,
                }),
            )
        }
    }
}

fn center_of_subalgebra(g: &LieAlgebra, basis: &[Vector]) -> Vec<Vector> {
    let k = basis.len();
    if k == 0 {
        return Vec::new();
    }
    // z = Σ c_i b_i with [z, b_j] = 0 for every j.
    let mut rows = Vec::new();
    let brackets: Vec<Vec<Vector>> = basis.iter().map(|bi| basis.iter().map(|bj| g.bracket(bi, bj)).collect()).collect();
    for j in 0..k {
        for coord in 0..g.dim() {
            rows.push((0..k).map(|i| brackets[i][j][coord].clone()).collect::<Vector>());
        }
    }
    Matrix::from_rows(rows)
        .nullspace()
        .into_iter()
        .map(|c| {
            let mut z = zero_vector(g.dim());
            for (ci, bi) in c.iter().zip(basis) {
                axpy(&mut z, ci, bi);
            }
            z
        })
        .collect()
}

fn derived_span(g: &LieAlgebra, basis: &[Vector]) -> Subspace {
    let mut s = Subspace::zero(g.dim());
    for (i, bi) in basis.iter().enumerate() {
        for bj in &basis[i + 1..] {
            s.insert(g.bracket(bi, bj));
        }
    }
    s
}

pub fn kernel_and_quotient(cur: &CurAlgebra, t: &ConfOperator) -> Result<KernelQuotient, ConfError> {
    let g = &cur.base;
    let d = g.dim();
    if t.family.is_empty() || t.family.iter().any(|m| m.rows() != d || m.cols() != d) {
        return Err(ConfError::Input("operator family does not match the base algebra".into()));
    }
    let stacked = Matrix::from_rows(t.family.iter().flat_map(|m| m.row_vectors()).collect());
    let kernel = stacked.nullspace();
    let kspace = Subspace::span(d, kernel.iter().cloned());

    // Guard: {a⟨n⟩k}_T = 1⊗[T_n a, k] must stay in the kernel.
    for (n, tn) in t.family.iter().enumerate() {
        for a in 0..d {
            let ta = tn.column(a);
            for k in &kernel {
                if !kspace.contains(&g.bracket(&ta, k)) {
                    return Err(ConfError::KernelNotIdeal(format!("[T_{n}({}), kernel vector] leaves the kernel", g.labels()[a])));
                }
            }
        }
    }

    let complement = kspace.greedy_complement();
    let mut full_basis = kernel.clone();
    full_basis.extend(complement.iter().map(|&i| unit_vector(d, i)));
    let coords = BasisCoords::new(d, full_basis).expect("kernel plus complement is a basis");
    let kd = kernel.len();
    let modk = |v: &[Rat]| -> Vector { coords.coords(v).expect("full basis")[kd..].to_vec() };

    let t0 = &t.family[0];
    let mut entries = Vec::new();
    let mut higher = None;
    for (qi, &ci) in complement.iter().enumerate() {
        let ei = unit_vector(d, ci);
        let t0e = t0.apply(&ei);
        for (qj, &cj) in complement.iter().enumerate() {
            let ej = unit_vector(d, cj);
            let c = modk(&g.bracket(&t0e, &ej));
            entries.push((qi, qj, c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()));
            if higher.is_none() {
                for (n, tn) in t.family.iter().enumerate().skip(1) {
                    let v = g.bracket(&tn.apply(&ei), &ej);
                    if !kspace.contains(&v) {
                        higher = Some(json!({"n": n, "pair": [g.labels()[ci], g.labels()[cj]]}));
                        break;
                    }
                }
            }
        }
    }
    let labels = complement.iter().map(|&i| g.labels()[i].clone()).collect();
    let quotient = LieAlgebra::from_structure(labels, entries).map_err(|e| ConfError::Input(e.to_string()))?;
    let validation = validate(&quotient);

    let lift = |q: &[Rat]| -> Vector {
        let mut v = zero_vector(d);
        for (c, &i) in q.iter().zip(&complement) {
            v[i] = c.clone();
        }
        v
    };
    let split_null = split_null_analysis(g, t, &quotient, &lift);

    Ok(KernelQuotient {
        kernel,
        complement,
        quotient,
        validation,
        higher_products_vanish: Check::from_witness("higher-products-vanish", higher),
        split_null,
    })
}

fn split_null_analysis(g: &LieAlgebra, t: &ConfOperator, q: &LieAlgebra, lift: &dyn Fn(&[Rat]) -> Vector) -> SplitNull {
    let qd = q.dim();
    let qbasis: Vec<Vector> = (0..qd).map(|i| unit_vector(qd, i)).collect();
    let zq = q.center();
    let dq = derived_span(q, &qbasis);
    let dq_basis = dq.basis();
    let zq_space = Subspace::span(qd, zq.iter().cloned());

    let tstar = Subspace::span(g.dim(), t.family.iter().flat_map(|m| m.columns()));
    let tstar_basis = tstar.basis();
    let zt = center_of_subalgebra(g, &tstar_basis);
    let dt = derived_span(g, &tstar_basis);

    let mut checks = Vec::new();
    checks.push(if zq.len() == zt.len() {
        Check::pass("quotient-center-dim")
    } else {
        Check::fail("quotient-center-dim", json!({"quotient": zq.len(), "t_star": zt.len()}))
    });
    let complementary = dq.dim() + zq.len() == qd && dq.intersection(&zq_space).dim() == 0;
    checks.push(if complementary {
        Check::pass("quotient-derived-plus-center")
    } else {
        Check::fail("quotient-derived-plus-center", json!({"derived": dq.dim(), "center": zq.len(), "dim": qd}))
    });

    let t0 = &t.family[0];
    let image: Vec<Vector> = dq_basis.iter().map(|b| t0.apply(&lift(b))).collect();
    let image_space = Subspace::span(g.dim(), image.iter().cloned());
    let bijective = image_space.dim() == dq_basis.len() && image_space.equals(&dt);
    checks.push(if bijective {
        Check::pass("t0-maps-derived-onto-g0")
    } else {
        Check::fail("t0-maps-derived-onto-g0", json!({"image_dim": image_space.dim(), "derived_dim": dq_basis.len(), "g0_dim": dt.dim()}))
    });

    if bijective {
        let in_q = BasisCoords::new(qd, dq_basis.clone()).expect("echelon basis is independent");
        let in_g = BasisCoords::new(g.dim(), image.clone()).expect("image is independent");
        let mut witness = None;
        'sc: for i in 0..dq_basis.len() {
            for j in 0..dq_basis.len() {
                let a = in_q.coords(&q.bracket(&dq_basis[i], &dq_basis[j]));
                let b = in_g.coords(&g.bracket(&image[i], &image[j]));
                if a.is_none() || a != b {
                    witness = Some(json!({"pair": [i, j]}));
                    break 'sc;
                }
            }
        }
        checks.push(Check::from_witness("derived-structure-constants", witness));
    } else {
        checks.push(Check::fail("derived-structure-constants", json!("not reached: no bijection onto g_0")));
    }

    SplitNull { center_dim: zq.len(), derived_dim: dq.dim(), derived_image: image, checks }
}
