//! Exact scalar and polynomial arithmetic.
//!
//! Scalars are arbitrary-precision rationals. Rational functions only ever
//! need poles along `u = 0`, `v = 0` and `u + v = 0`, so [`PoleForm`] stores a
//! bivariate numerator over the fixed monic denominator `u^a v^b (u+v)^c`.
//! With that denominator fixed, stripping common factors gives a unique
//! representation and structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("variable tag mismatch: {0:?} vs {1:?}")]
    TagMismatch(BiVars, BiVars),
    #[error("cannot parse rational from {0:?}")]
    BadRational(String),
    #[error("cannot parse exponent key {0:?}")]
    BadExponent(String),
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn factorial(n: u32) -> Rat {
    (1..=n as i64).fold(Rat::one(), |acc, k| acc * rat(k))
}

pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return Rat::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Always `"p/q"`, including integers (`"3/1"`).
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"p/q"` or a bare integer `"p"`.
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let bad = || ExactError::BadRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = t.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Serde adapter for `Rat` as a `"p/q"` string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a sequence of `Rat`.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rat).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    Lambda,
    Partial,
    U,
}

/// Dense univariate polynomial; `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
    var: Var,
}

impl UniPoly {
    pub fn zero(var: Var) -> Self {
        Self { coeffs: Vec::new(), var }
    }

    pub fn new(mut coeffs: Vec<Rat>, var: Var) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs, var }
    }

    /// `x^n / n!`
    pub fn divided_power(n: u32, var: Var) -> Self {
        let mut coeffs = vec![Rat::zero(); n as usize + 1];
        coeffs[n as usize] = factorial(n).recip();
        Self { coeffs, var }
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::new(coeffs, self.var)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.var);
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs, self.var)
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect(), self.var)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * x + c)
    }

    /// Sparse `{"k": "p/q"}` map.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k.to_string(), serde_json::Value::String(format_rat(c))))
            .collect();
        serde_json::Value::Object(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiVars {
    UV,
    LambdaMu,
}

/// Sparse bivariate polynomial with no stored zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rat>,
    vars: BiVars,
}

impl BiPoly {
    pub fn zero(vars: BiVars) -> Self {
        Self { terms: BTreeMap::new(), vars }
    }

    pub fn constant(c: Rat, vars: BiVars) -> Self {
        Self::monomial(c, 0, 0, vars)
    }

    pub fn monomial(c: Rat, i: u32, j: u32, vars: BiVars) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Self { terms, vars }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = ((u32, u32), Rat)>, vars: BiVars) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in iter {
            p.add_term(e, &c);
        }
        p
    }

    /// `(x + y)^k` expanded.
    pub fn sum_power(k: u32, vars: BiVars) -> Self {
        Self::from_terms((0..=k).map(|i| ((i, k - i), binomial(k, i))), vars)
    }

    pub fn vars(&self) -> BiVars {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn add_term(&mut self, e: (u32, u32), c: &Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: &Rat) {
        if s.is_zero() {
            return;
        }
        for (e, c) in &other.terms {
            self.add_term(*e, &(c * s));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-Rat::one());
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(self.vars);
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
            vars: self.vars,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.vars);
        for ((i1, j1), a) in &self.terms {
            for ((i2, j2), b) in &other.terms {
                out.add_term((i1 + i2, j1 + j2), &(a * b));
            }
        }
        out
    }

    /// Multiply by `x^i y^j`.
    pub fn shift(&self, i: u32, j: u32) -> Self {
        Self {
            terms: self.terms.iter().map(|((a, b), c)| ((a + i, b + j), c.clone())).collect(),
            vars: self.vars,
        }
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        self.terms.iter().fold(Rat::zero(), |acc, ((i, j), c)| {
            acc + c * pow(x, *i) * pow(y, *j)
        })
    }

    fn divisible_by_first(&self) -> bool {
        self.terms.keys().all(|(i, _)| *i > 0)
    }

    fn divisible_by_second(&self) -> bool {
        self.terms.keys().all(|(_, j)| *j > 0)
    }

    fn div_first(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|((i, j), c)| ((i - 1, *j), c.clone())).collect(),
            vars: self.vars,
        }
    }

    fn div_second(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|((i, j), c)| ((*i, j - 1), c.clone())).collect(),
            vars: self.vars,
        }
    }

    /// Exact division by `(x + y)`, or `None` if it leaves a remainder.
    ///
    /// Synthetic division in `x` over `Q[y]`: with `p = sum_i c_i(y) x^i` and
    /// quotient `q = sum_i q_i(y) x^i`, `q_{d-1} = c_d`,
    /// `q_{i-1} = c_i - y q_i`, and the remainder `c_0 - y q_0` must vanish.
    pub fn div_sum(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let d = self.terms.keys().map(|(i, _)| *i).max().unwrap_or(0);
        let mut slices: Vec<BTreeMap<u32, Rat>> = vec![BTreeMap::new(); d as usize + 1];
        for ((i, j), c) in &self.terms {
            slices[*i as usize].insert(*j, c.clone());
        }
        if d == 0 {
            return None;
        }
        let mut quotient: Vec<BTreeMap<u32, Rat>> = vec![BTreeMap::new(); d as usize];
        quotient[d as usize - 1] = slices[d as usize].clone();
        for i in (1..d as usize).rev() {
            let mut qi = slices[i].clone();
            for (j, c) in &quotient[i] {
                let e = qi.entry(j + 1).or_insert_with(Rat::zero);
                *e -= c;
            }
            qi.retain(|_, c| !c.is_zero());
            quotient[i - 1] = qi;
        }
        let mut rem = slices[0].clone();
        for (j, c) in &quotient[0] {
            let e = rem.entry(j + 1).or_insert_with(Rat::zero);
            *e -= c;
        }
        if rem.values().any(|c| !c.is_zero()) {
            return None;
        }
        let terms = quotient
            .into_iter()
            .enumerate()
            .flat_map(|(i, qi)| qi.into_iter().map(move |(j, c)| ((i as u32, j), c)));
        Some(Self::from_terms(terms, self.vars))
    }

    /// Sparse `{"i,j": "p/q"}` map.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .terms
            .iter()
            .map(|((i, j), c)| (format!("{i},{j}"), serde_json::Value::String(format_rat(c))))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(v: &serde_json::Value, vars: BiVars) -> Result<Self, ExactError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ExactError::BadExponent(v.to_string()))?;
        let mut p = Self::zero(vars);
        for (k, c) in obj {
            let (i, j) = k
                .split_once(',')
                .and_then(|(i, j)| Some((i.trim().parse().ok()?, j.trim().parse().ok()?)))
                .ok_or_else(|| ExactError::BadExponent(k.clone()))?;
            let c = c
                .as_str()
                .ok_or_else(|| ExactError::BadRational(c.to_string()))
                .and_then(parse_rat)?;
            p.add_term((i, j), &c);
        }
        Ok(p)
    }
}

pub fn pow(x: &Rat, k: u32) -> Rat {
    (0..k).fold(Rat::one(), |acc, _| acc * x)
}

/// Exponents `(a, b, c)` of the denominator `u^a v^b (u+v)^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Poles {
    pub u: u32,
    pub v: u32,
    pub sum: u32,
}

impl Poles {
    pub fn new(u: u32, v: u32, sum: u32) -> Self {
        Self { u, v, sum }
    }

    fn max(self, o: Self) -> Self {
        Self::new(self.u.max(o.u), self.v.max(o.v), self.sum.max(o.sum))
    }
}

/// Canonical rational function `N(u,v) / (u^a v^b (u+v)^c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleForm {
    numerator: BiPoly,
    poles: Poles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl PoleForm {
    pub fn zero() -> Self {
        Self { numerator: BiPoly::zero(BiVars::UV), poles: Poles::default() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::polynomial(BiPoly::constant(c, BiVars::UV))
    }

    pub fn polynomial(p: BiPoly) -> Self {
        Self::new(p, Poles::default())
    }

    pub fn new(numerator: BiPoly, poles: Poles) -> Self {
        let mut p = Self { numerator, poles };
        p.canonicalize();
        p
    }

    /// `c · u^i · v^j · (u+v)^k` for arbitrary integer exponents.
    pub fn monomial(c: Rat, i: i32, j: i32, k: i32) -> Self {
        let vars = BiVars::UV;
        let mut num = BiPoly::constant(c, vars).shift(i.max(0) as u32, j.max(0) as u32);
        if k > 0 {
            num = num.mul(&BiPoly::sum_power(k as u32, vars));
        }
        let poles = Poles::new((-i).max(0) as u32, (-j).max(0) as u32, (-k).max(0) as u32);
        Self::new(num, poles)
    }

    pub fn numerator(&self) -> &BiPoly {
        &self.numerator
    }

    pub fn poles(&self) -> Poles {
        self.poles
    }

    pub fn vars(&self) -> BiVars {
        self.numerator.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_canonical(&self) -> bool {
        let mut c = self.clone();
        c.canonicalize();
        &c == self
    }

    pub fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.poles = Poles::default();
            return;
        }
        while self.poles.u > 0 && self.numerator.divisible_by_first() {
            self.numerator = self.numerator.div_first();
            self.poles.u -= 1;
        }
        while self.poles.v > 0 && self.numerator.divisible_by_second() {
            self.numerator = self.numerator.div_second();
            self.poles.v -= 1;
        }
        while self.poles.sum > 0 {
            match self.numerator.div_sum() {
                Some(q) => {
                    self.numerator = q;
                    self.poles.sum -= 1;
                }
                None => break,
            }
        }
    }

    /// Numerator rewritten over the larger denominator `target`.
    fn lifted_numerator(&self, target: Poles) -> BiPoly {
        let mut n = self.numerator.shift(target.u - self.poles.u, target.v - self.poles.v);
        let extra = target.sum - self.poles.sum;
        if extra > 0 {
            n = n.mul(&BiPoly::sum_power(extra, self.vars()));
        }
        n
    }

    pub fn add(&self, other: &Self) -> Self {
        combine_unchecked([(self, Sign::Plus), (other, Sign::Plus)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        combine_unchecked([(self, Sign::Plus), (other, Sign::Minus)])
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::new(self.numerator.scale(s), self.poles)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.numerator.mul(&other.numerator),
            Poles::new(
                self.poles.u + other.poles.u,
                self.poles.v + other.poles.v,
                self.poles.sum + other.poles.sum,
            ),
        )
    }

    /// `None` when `(u, v)` hits a pole.
    pub fn eval(&self, u: &Rat, v: &Rat) -> Option<Rat> {
        let s = u + v;
        let den = pow(u, self.poles.u) * pow(v, self.poles.v) * pow(&s, self.poles.sum);
        if den.is_zero() {
            return None;
        }
        Some(self.numerator.eval(u, v) / den)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "numerator": self.numerator.to_json(),
            "poles": [self.poles.u, self.poles.v, self.poles.sum],
        })
    }
}

impl fmt::Display for PoleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .numerator
            .terms()
            .map(|((i, j), c)| format!("({})u^{}v^{}", c, i, j))
            .collect();
        write!(
            f,
            "[{}] / (u^{} v^{} (u+v)^{})",
            parts.join(" + "),
            self.poles.u,
            self.poles.v,
            self.poles.sum
        )
    }
}

fn combine_unchecked<'a>(terms: impl IntoIterator<Item = (&'a PoleForm, Sign)> + Clone) -> PoleForm {
    let target = terms
        .clone()
        .into_iter()
        .fold(Poles::default(), |acc, (p, _)| acc.max(p.poles));
    let mut num = BiPoly::zero(BiVars::UV);
    for (p, sign) in terms {
        let s = match sign {
            Sign::Plus => Rat::one(),
            Sign::Minus => -Rat::one(),
        };
        num.add_scaled(&p.lifted_numerator(target), &s);
    }
    PoleForm::new(num, target)
}

/// Signed sum of pole forms in canonical form.
pub fn poleform_combine(terms: &[(PoleForm, Sign)]) -> Result<PoleForm, ExactError> {
    if let Some((first, _)) = terms.first() {
        for (p, _) in terms {
            if p.vars() != first.vars() {
                return Err(ExactError::TagMismatch(first.vars(), p.vars()));
            }
        }
    }
    Ok(combine_unchecked(terms.iter().map(|(p, s)| (p, *s))))
}

pub fn poleform_is_zero(p: &PoleForm) -> bool {
    p.is_zero()
}

/// Univariate Laurent polynomial `sum_k p_k u^k` with finitely many terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i32, Rat>,
}

impl LaurentPoly {
    pub fn new(iter: impl IntoIterator<Item = (i32, Rat)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in iter {
            let e = coeffs.entry(k).or_insert_with(Rat::zero);
            *e += c;
        }
        coeffs.retain(|_, c: &mut Rat| !c.is_zero());
        Self { coeffs }
    }

    pub fn term(k: i32, c: Rat) -> Self {
        Self::new([(k, c)])
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Rat> {
        &self.coeffs
    }
}

/// How a one-variable Laurent object is promoted to two variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    /// `u ↦ u + v`
    UPlusV,
    /// `u` stays in the `u` slot.
    KeepU,
    /// `u ↦ v`
    RebindV,
}

pub fn substitute_shift(p: &LaurentPoly, rule: ShiftRule) -> PoleForm {
    let terms: Vec<PoleForm> = p
        .coeffs
        .iter()
        .map(|(k, c)| match rule {
            ShiftRule::UPlusV => PoleForm::monomial(c.clone(), 0, 0, *k),
            ShiftRule::KeepU => PoleForm::monomial(c.clone(), *k, 0, 0),
            ShiftRule::RebindV => PoleForm::monomial(c.clone(), 0, *k, 0),
        })
        .collect();
    combine_unchecked(terms.iter().map(|t| (t, Sign::Plus)))
}

/// The fixed cross-check grid: `u, v ∈ {1, 2, 3, 5, 7}`.
pub fn evaluation_grid() -> Vec<(Rat, Rat)> {
    const PTS: [i64; 5] = [1, 2, 3, 5, 7];
    PTS.iter()
        .flat_map(|u| PTS.iter().map(move |v| (rat(*u), rat(*v))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inv_u() -> PoleForm {
        PoleForm::monomial(rat(1), -1, 0, 0)
    }

    #[test]
    fn three_term_identity_vanishes() {
        let a = PoleForm::monomial(rat(1), -1, 0, -1);
        let b = PoleForm::monomial(rat(1), -1, -1, 0);
        let c = PoleForm::monomial(rat(1), 0, -1, -1);
        let s = poleform_combine(&[(a, Sign::Plus), (b, Sign::Minus), (c, Sign::Plus)]).unwrap();
        assert!(poleform_is_zero(&s));
        assert_eq!(s.poles(), Poles::default());
    }

    #[test]
    fn additive_identity() {
        let s = poleform_combine(&[(inv_u(), Sign::Plus), (PoleForm::zero(), Sign::Plus)]).unwrap();
        assert_eq!(s, inv_u());
    }

    #[test]
    fn sum_of_reciprocals() {
        let inv_v = PoleForm::monomial(rat(1), 0, -1, 0);
        let s = poleform_combine(&[(inv_u(), Sign::Plus), (inv_v, Sign::Plus)]).unwrap();
        let expected = BiPoly::from_terms([((1, 0), rat(1)), ((0, 1), rat(1))], BiVars::UV);
        assert_eq!(s.numerator(), &expected);
        assert_eq!(s.poles(), Poles::new(1, 1, 0));
    }

    #[test]
    fn tag_mismatch_is_rejected() {
        let lm = PoleForm {
            numerator: BiPoly::constant(rat(1), BiVars::LambdaMu),
            poles: Poles::default(),
        };
        let err = poleform_combine(&[(inv_u(), Sign::Plus), (lm, Sign::Plus)]).unwrap_err();
        assert!(matches!(err, ExactError::TagMismatch(..)));
    }

    #[test]
    fn is_zero_cases() {
        assert!(poleform_is_zero(&PoleForm::zero()));
        let u_minus_u = BiPoly::from_terms([((1, 0), rat(1)), ((1, 0), rat(-1))], BiVars::UV);
        assert!(PoleForm::new(u_minus_u, Poles::new(1, 0, 0)).is_zero());
        let nz = PoleForm::new(
            BiPoly::from_terms([((1, 0), rat(1)), ((0, 1), rat(1))], BiVars::UV),
            Poles::new(1, 1, 0),
        );
        assert!(!poleform_is_zero(&nz));
    }

    #[test]
    fn canonical_form_strips_shared_factors() {
        // (u+v)^2 u / (u^2 (u+v)^3) = 1 / (u (u+v))
        let num = BiPoly::sum_power(2, BiVars::UV).shift(1, 0);
        let p = PoleForm::new(num, Poles::new(2, 0, 3));
        assert_eq!(p.numerator(), &BiPoly::constant(rat(1), BiVars::UV));
        assert_eq!(p.poles(), Poles::new(1, 0, 1));
        assert!(PoleForm::new(BiPoly::zero(BiVars::UV), Poles::new(3, 2, 1)).poles() == Poles::default());
    }

    #[test]
    fn shift_examples() {
        let p = substitute_shift(&LaurentPoly::term(-1, rat(1)), ShiftRule::UPlusV);
        assert_eq!(p.numerator(), &BiPoly::constant(rat(1), BiVars::UV));
        assert_eq!(p.poles(), Poles::new(0, 0, 1));

        let p = substitute_shift(&LaurentPoly::term(-2, rat(1)), ShiftRule::UPlusV);
        assert_eq!(p.poles(), Poles::new(0, 0, 2));

        let p = substitute_shift(&LaurentPoly::new([(-1, rat(1)), (0, rat(1))]), ShiftRule::UPlusV);
        // (1 + (u+v)) / (u+v)
        let expected = BiPoly::from_terms(
            [((0, 0), rat(1)), ((1, 0), rat(1)), ((0, 1), rat(1))],
            BiVars::UV,
        );
        assert_eq!(p.numerator(), &expected);
        assert_eq!(p.poles(), Poles::new(0, 0, 1));

        let p = substitute_shift(&LaurentPoly::term(-3, rat(2)), ShiftRule::RebindV);
        assert_eq!(p.poles(), Poles::new(0, 3, 0));
    }

    #[test]
    fn div_sum_detects_remainder() {
        let p = BiPoly::from_terms([((2, 0), rat(1)), ((0, 2), rat(-1))], BiVars::UV);
        let q = p.div_sum().unwrap();
        let expected = BiPoly::from_terms([((1, 0), rat(1)), ((0, 1), rat(-1))], BiVars::UV);
        assert_eq!(q, expected);
        let r = BiPoly::from_terms([((2, 0), rat(1)), ((0, 2), rat(1))], BiVars::UV);
        assert!(r.div_sum().is_none());
        assert!(BiPoly::constant(rat(3), BiVars::UV).div_sum().is_none());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rat(&frac(-6, 4)), "-3/2");
        assert_eq!(format_rat(&rat(5)), "5/1");
        assert_eq!(parse_rat("-3/2").unwrap(), frac(-3, 2));
        assert_eq!(parse_rat("7").unwrap(), rat(7));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn unipoly_basics() {
        let p = UniPoly::divided_power(3, Var::Lambda);
        assert_eq!(p.eval(&rat(2)), frac(8, 6));
        let q = UniPoly::new(vec![rat(1), rat(1), rat(0)], Var::Lambda);
        assert_eq!(q.degree(), Some(1));
        assert_eq!(q.mul(&q).coeffs(), &[rat(1), rat(2), rat(1)]);
        assert!(UniPoly::new(vec![rat(0)], Var::U).is_zero());
    }

    fn arb_poleform() -> impl Strategy<Value = PoleForm> {
        (
            prop::collection::vec(((0u32..3, 0u32..3), -4i64..5), 0..5),
            0u32..3,
            0u32..3,
            0u32..3,
        )
            .prop_map(|(terms, a, b, c)| {
                let num = BiPoly::from_terms(terms.into_iter().map(|(e, k)| (e, rat(k))), BiVars::UV);
                PoleForm::new(num, Poles::new(a, b, c))
            })
    }

    proptest! {
        #[test]
        fn combine_commutes(p in arb_poleform(), q in arb_poleform()) {
            let a = poleform_combine(&[(p.clone(), Sign::Plus), (q.clone(), Sign::Plus)]).unwrap();
            let b = poleform_combine(&[(q, Sign::Plus), (p, Sign::Plus)]).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn self_difference_vanishes(p in arb_poleform()) {
            let d = poleform_combine(&[(p.clone(), Sign::Plus), (p, Sign::Minus)]).unwrap();
            prop_assert!(d.is_zero());
        }

        #[test]
        fn canonicalization_idempotent(p in arb_poleform()) {
            let mut q = p.clone();
            q.canonicalize();
            prop_assert_eq!(&q, &p);
            prop_assert!(p.is_canonical());
        }

        #[test]
        fn evaluation_agrees_with_decision(p in arb_poleform(), q in arb_poleform()) {
            // p·q − q·p is claimed zero; p + q is compared against pointwise sums.
            let zero = p.mul(&q).sub(&q.mul(&p));
            prop_assert!(zero.is_zero());
            for (u, v) in evaluation_grid() {
                prop_assert_eq!(zero.eval(&u, &v).unwrap(), Rat::zero());
                let s = p.add(&q);
                prop_assert_eq!(s.eval(&u, &v).unwrap(), p.eval(&u, &v).unwrap() + q.eval(&u, &v).unwrap());
            }
            if !p.is_zero() {
                let hit = evaluation_grid().iter().any(|(u, v)| !p.eval(u, v).unwrap().is_zero());
                prop_assert!(hit);
            }
        }
    }
}
