//! Conformal averaging families `T_λ = Σ_n λ^{(n)} T_n`.

use num::Zero;
use serde_json::{json, Value};

use super::AvgError;
use crate::exact::{binomial, factorial, pow, BiPoly, BiVars, Rat};
use crate::liealg::{adjoint_with_gram, check_schema, LieAlgebra, LieError};
use crate::linalg::{unit_vector, vector_to_json, zero_vector, Matrix, Subspace, Vector};

pub const CONF_AVE_SCHEMA: &str = "conf-ave-op.v1";
/// Largest `N` accepted for a family.
pub const MAX_FAMILY_DEGREE: usize = 8;

/// `(T_0, …, T_N)` with `T_N ≠ 0` unless `N = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfAveOp {
    family: Vec<Matrix>,
}

impl ConfAveOp {
    /// Trims trailing zero coefficients.
    pub fn new(mut family: Vec<Matrix>) -> Result<Self, AvgError> {
        let dim = family.first().ok_or(AvgError::EmptyFamily)?.rows();
        for m in &family {
            if m.rows() != dim || m.cols() != dim {
                return Err(AvgError::DimensionMismatch { expected: dim, got: m.rows().max(m.cols()) });
            }
        }
        while family.len() > 1 && family.last().is_some_and(Matrix::is_zero) {
            family.pop();
        }
        if family.len() > MAX_FAMILY_DEGREE + 1 {
            return Err(AvgError::DegreeTooLarge(family.len() - 1));
        }
        Ok(Self { family })
    }

    pub fn ordinary(t: Matrix) -> Self {
        Self::new(vec![t]).expect("single square matrix")
    }

    pub fn zero(dim: usize) -> Self {
        Self::ordinary(Matrix::zeros(dim, dim))
    }

    pub fn degree(&self) -> usize {
        self.family.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.family[0].rows()
    }

    pub fn family(&self) -> &[Matrix] {
        &self.family
    }

    /// `T_n`, zero past the degree.
    pub fn coeff(&self, n: usize) -> Matrix {
        self.family.get(n).cloned().unwrap_or_else(|| Matrix::zeros(self.dim(), self.dim()))
    }

    /// `T_λ` at a rational `λ`.
    pub fn at(&self, lambda: &Rat) -> Matrix {
        let mut acc = Matrix::zeros(self.dim(), self.dim());
        for (n, t) in self.family.iter().enumerate() {
            let n = n as u32;
            acc = acc.add(&t.scale(&(pow(lambda, n) / factorial(n))));
        }
        acc
    }

    /// `(T_n / n!)`
    pub fn factorial_rescaled(&self) -> Self {
        let family = self.family.iter().enumerate().map(|(n, t)| t.scale(&factorial(n as u32).recip())).collect();
        Self::new(family).expect("same shape")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": CONF_AVE_SCHEMA,
            "N": self.degree(),
            "family": self.family.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, AvgError> {
        check_schema(v, CONF_AVE_SCHEMA).map_err(AvgError::Input)?;
        let family = v["family"]
            .as_array()
            .ok_or_else(|| AvgError::Input("missing family".into()))?
            .iter()
            .map(|m| Matrix::from_json(m).map_err(AvgError::Input))
            .collect::<Result<Vec<_>, _>>()?;
        let op = Self::new(family)?;
        if let Some(n) = v.get("N").and_then(Value::as_u64) {
            if n as usize != op.degree() {
                return Err(AvgError::Input(format!("declared N = {n} but the family has degree {}", op.degree())));
            }
        }
        Ok(op)
    }
}

/// Results of the two independent verification paths.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfAveragingReport {
    /// `[T_n x, T_m y] = Σ_t C(n,t) T_{m+t}([T_{n−t} x, y])`
    pub coefficient_witness: Option<Value>,
    /// `T_{λ+μ}([T_λ x, y]) = [T_λ x, T_μ y]` expanded in `Q[λ, μ]`.
    pub bipoly_witness: Option<Value>,
}

impl ConfAveragingReport {
    pub fn passed(&self) -> bool {
        self.coefficient_witness.is_none() && self.bipoly_witness.is_none()
    }

    pub fn paths_agree(&self) -> bool {
        self.coefficient_witness.is_none() == self.bipoly_witness.is_none()
    }

    pub fn witness(&self) -> Option<&Value> {
        self.coefficient_witness.as_ref().or(self.bipoly_witness.as_ref())
    }
}

fn coefficient_path(g: &LieAlgebra, t: &ConfAveOp) -> Option<Value> {
    let d = g.dim();
    let big_n = t.degree();
    let cols: Vec<Vec<Vector>> = t.family.iter().map(Matrix::columns).collect();
    let labels = g.labels();
    for x in 0..d {
        // [T_k x, y] for every k, reused across m.
        let txy: Vec<Vec<Vector>> = cols.iter().map(|c| (0..d).map(|y| g.bracket_basis_left_of(&c[x], y)).collect()).collect();
        for y in 0..d {
            // n can reach 2N on the right-hand side while the left vanishes.
            for n in 0..=2 * big_n {
                for m in 0..=big_n {
                    let lhs = if n <= big_n { g.bracket(&cols[n][x], &cols[m][y]) } else { zero_vector(d) };
                    let mut rhs = zero_vector(d);
                    for tt in 0..=n {
                        if m + tt > big_n || n - tt > big_n {
                            continue;
                        }
                        let v = t.family[m + tt].apply(&txy[n - tt][y]);
                        let c = binomial(n as u32, tt as u32);
                        for (r, vi) in rhs.iter_mut().zip(&v) {
                            *r += &c * vi;
                        }
                    }
                    if lhs != rhs {
                        return Some(json!({
                            "pair": [labels[x], labels[y]],
                            "n": n,
                            "m": m,
                            "lhs": vector_to_json(&lhs),
                            "rhs": vector_to_json(&rhs),
                        }));
                    }
                }
            }
        }
    }
    None
}

fn bipoly_path(g: &LieAlgebra, t: &ConfAveOp) -> Option<Value> {
    let d = g.dim();
    let cols: Vec<Vec<Vector>> = t.family.iter().map(Matrix::columns).collect();
    let labels = g.labels();
    let vars = BiVars::LambdaMu;
    let inv_fact: Vec<Rat> = (0..=t.degree()).map(|n| factorial(n as u32).recip()).collect();
    for x in 0..d {
        for y in 0..d {
            let mut lhs = vec![BiPoly::zero(vars); d];
            let mut rhs = vec![BiPoly::zero(vars); d];
            for (n, cn) in cols.iter().enumerate() {
                let inner = g.bracket_basis_left_of(&cn[x], y);
                for (m, tm) in t.family.iter().enumerate() {
                    // (λ+μ)^{(m)} λ^{(n)} T_m([T_n x, y])
                    let outer = tm.apply(&inner);
                    let mono = BiPoly::sum_power(m as u32, vars).shift(n as u32, 0);
                    let s = &inv_fact[m] * &inv_fact[n];
                    for (p, c) in lhs.iter_mut().zip(&outer) {
                        if !c.is_zero() {
                            p.add_scaled(&mono, &(c * &s));
                        }
                    }
                    // λ^{(n)} μ^{(m)} [T_n x, T_m y]
                    let br = g.bracket(&cn[x], &cols[m][y]);
                    for (p, c) in rhs.iter_mut().zip(&br) {
                        if !c.is_zero() {
                            p.add_term((n as u32, m as u32), &(c * &s));
                        }
                    }
                }
            }
            if let Some(k) = (0..d).find(|&k| lhs[k] != rhs[k]) {
                return Some(json!({
                    "pair": [labels[x], labels[y]],
                    "coordinate": labels[k],
                    "difference": lhs[k].sub(&rhs[k]).to_json(),
                }));
            }
        }
    }
    None
}

/// Both verification paths; callers should also assert they agree.
pub fn is_conformal_averaging(g: &LieAlgebra, t: &ConfAveOp) -> Result<ConfAveragingReport, AvgError> {
    if t.dim() != g.dim() {
        return Err(AvgError::DimensionMismatch { expected: g.dim(), got: t.dim() });
    }
    Ok(ConfAveragingReport { coefficient_witness: coefficient_path(g, t), bipoly_witness: bipoly_path(g, t) })
}

/// `T*_λ = Σ λ^{(n)} T*_n` with `*` the Killing adjoint.
pub fn conjugate_family(g: &LieAlgebra, t: &ConfAveOp) -> Result<ConfAveOp, AvgError> {
    let gram = g.killing();
    let family = t
        .family
        .iter()
        .map(|m| adjoint_with_gram(&gram, m))
        .collect::<Result<Vec<_>, LieError>>()
        .map_err(|_| AvgError::SingularForm)?;
    ConfAveOp::new(family)
}

/// `T_*(g) = Σ_n im T_n`.
pub fn t_star_image(t: &ConfAveOp) -> Subspace {
    Subspace::span(t.dim(), t.family.iter().flat_map(Matrix::columns))
}

impl LieAlgebra {
    /// `[x, e_j]`
    pub fn bracket_basis_left_of(&self, x: &[Rat], j: usize) -> Vector {
        self.bracket(x, &unit_vector(self.dim(), j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::liealg::build_sl;

    fn h_only(c: &[i64]) -> ConfAveOp {
        ConfAveOp::new(
            c.iter()
                .map(|ci| {
                    let mut m = Matrix::zeros(3, 3);
                    m.set(0, 0, rat(*ci));
                    m
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn examples() {
        let (g, _) = build_sl(2).unwrap();
        let r = is_conformal_averaging(&g, &ConfAveOp::ordinary(Matrix::identity(3))).unwrap();
        assert!(r.passed());
        let r = is_conformal_averaging(&g, &h_only(&[1, 1])).unwrap();
        assert!(r.passed(), "{r:?}");
        // T_λ(e) = λ e
        let ie = g.index_of("E12").unwrap();
        let mut t1 = Matrix::zeros(3, 3);
        t1.set(ie, ie, rat(1));
        let bad = ConfAveOp::new(vec![Matrix::zeros(3, 3), t1]).unwrap();
        let r = is_conformal_averaging(&g, &bad).unwrap();
        assert!(!r.passed());
        assert!(r.paths_agree());
        let w = r.coefficient_witness.unwrap();
        let pair: Vec<&str> = w["pair"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert!(pair.contains(&"E12"));
    }

    #[test]
    fn shape_rules() {
        assert_eq!(ConfAveOp::new(vec![]), Err(AvgError::EmptyFamily));
        let t = ConfAveOp::new(vec![Matrix::identity(2), Matrix::zeros(2, 2)]).unwrap();
        assert_eq!(t.degree(), 0);
        assert!(matches!(ConfAveOp::new(vec![Matrix::identity(2); 10]), Err(AvgError::DegreeTooLarge(9))));
        assert!(ConfAveOp::new(vec![Matrix::identity(2), Matrix::identity(3)]).is_err());
        let t = h_only(&[1, 2, 3]);
        assert_eq!(ConfAveOp::from_json(&t.to_json()).unwrap(), t);
        assert_eq!(t.factorial_rescaled().coeff(2).get(0, 0), &crate::exact::frac(3, 2));
        assert_eq!(t.at(&rat(2)).get(0, 0), &rat(1 + 2 * 2 + 3 * 2));
    }

    #[test]
    fn conjugation_and_image() {
        let (g, _) = build_sl(2).unwrap();
        let t = h_only(&[1, 1]);
        assert_eq!(conjugate_family(&g, &t).unwrap(), t);
        assert_eq!(t_star_image(&t).dim(), 1);
        assert_eq!(t_star_image(&ConfAveOp::zero(3)).dim(), 0);
        assert_eq!(t_star_image(&ConfAveOp::ordinary(Matrix::identity(3))).dim(), 3);
        assert_eq!(conjugate_family(&LieAlgebra::abelian(3), &t), Err(AvgError::SingularForm));
    }
}
