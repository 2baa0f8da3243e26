//! Homogeneous conformal averaging operators on a semisimple algebra.
//!
//! Given a closed symmetric subsystem `Δ'`, one nonzero `ξ` per irreducible
//! component and an arbitrary family on `h_0^⊥`:
//! `T_λ(x_α) = ξ x_α`, `T_λ(h_α) = ξ h_α` for `α ∈ Δ'`, the remaining root
//! spaces are killed, and `T_n` acts on `h_0^⊥` by the supplied family.

use std::collections::BTreeMap;

use num::Zero;
use rand::Rng;
use serde_json::{json, Map, Value};

use super::conformal::{is_conformal_averaging, ConfAveOp, MAX_FAMILY_DEGREE};
use super::AvgError;
use crate::exact::{format_rat, parse_rat, Rat};
use crate::liealg::{check_schema, LieAlgebra, RootDatum, RootSubsystem};
use crate::linalg::{axpy, zero_vector, BasisCoords, Matrix, Subspace, Vector};

pub const HOMOG_SCHEMA: &str = "homog-spec.v1";

/// ξ given per irreducible component, or per root (must agree within a component).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XiSpec {
    PerComponent(BTreeMap<usize, Rat>),
    PerRoot(BTreeMap<usize, Rat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousSpec {
    pub subsystem: RootSubsystem,
    pub xi: XiSpec,
    /// `T_n|_{h_0^⊥}`, either square in the canonical `h_0^⊥` basis or
    /// full-size matrices that preserve `h_0^⊥`.
    pub hperp: Vec<Matrix>,
}

impl HomogeneousSpec {
    pub fn to_json(&self) -> Value {
        let xi = match &self.xi {
            XiSpec::PerComponent(m) | XiSpec::PerRoot(m) => {
                m.iter().map(|(k, v)| (k.to_string(), Value::String(format_rat(v)))).collect::<Map<_, _>>()
            }
        };
        let key = match self.xi {
            XiSpec::PerComponent(_) => "xi",
            XiSpec::PerRoot(_) => "xi_roots",
        };
        let mut v = json!({
            "schema": HOMOG_SCHEMA,
            "subsystem": self.subsystem.members(),
            "hperp": self.hperp.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        });
        v[key] = Value::Object(xi);
        v
    }

    pub fn from_json(v: &Value, rd: &RootDatum) -> Result<Self, AvgError> {
        check_schema(v, HOMOG_SCHEMA).map_err(AvgError::Input)?;
        let bad = |m: &str| AvgError::Input(m.to_string());
        let members = v["subsystem"]
            .as_array()
            .ok_or_else(|| bad("missing subsystem"))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("root indices must be integers")))
            .collect::<Result<Vec<_>, _>>()?;
        let subsystem = RootSubsystem::from_members(rd, &members).map_err(|e| AvgError::Input(e.to_string()))?;
        let parse_map = |m: &Value| -> Result<BTreeMap<usize, Rat>, AvgError> {
            m.as_object()
                .ok_or_else(|| bad("xi must be an object"))?
                .iter()
                .map(|(k, val)| {
                    let k: usize = k.parse().map_err(|_| bad("xi keys must be integers"))?;
                    let s = val.as_str().ok_or_else(|| bad("xi values must be \"p/q\" strings"))?;
                    Ok((k, parse_rat(s).map_err(|e| AvgError::Input(e.to_string()))?))
                })
                .collect()
        };
        let xi = match (v.get("xi"), v.get("xi_roots")) {
            (Some(m), None) => XiSpec::PerComponent(parse_map(m)?),
            (None, Some(m)) => XiSpec::PerRoot(parse_map(m)?),
            (None, None) => XiSpec::PerComponent(BTreeMap::new()),
            (Some(_), Some(_)) => return Err(bad("give either xi or xi_roots, not both")),
        };
        let hperp = match v.get("hperp") {
            None => Vec::new(),
            Some(h) => h
                .as_array()
                .ok_or_else(|| bad("hperp must be a list of matrices"))?
                .iter()
                .map(|m| Matrix::from_json(m).map_err(AvgError::Input))
                .collect::<Result<_, _>>()?,
        };
        Ok(Self { subsystem, xi, hperp })
    }
}

/// A constructed family with the data it was built from.
#[derive(Clone, Debug)]
pub struct HomogeneousFamily {
    pub op: ConfAveOp,
    pub subsystem: RootSubsystem,
    /// One value per component, in component order.
    pub xi: Vec<Rat>,
    pub h0: Vec<Vector>,
    pub h0_perp: Vec<Vector>,
}

impl HomogeneousFamily {
    /// `g_0 = h_0 ⊕ Σ_{α∈Δ'} Q x_α`
    pub fn g0(&self, rd: &RootDatum) -> Subspace {
        let mut vs = self.h0.clone();
        vs.extend(self.subsystem.members().iter().map(|&a| rd.root_vector(a).clone()));
        Subspace::span(rd.ambient_dim(), vs)
    }

    /// `g_0` plus the images of the family on `h_0^⊥`.
    pub fn predicted_t_star(&self, rd: &RootDatum) -> Subspace {
        let mut s = self.g0(rd);
        for t in self.op.family() {
            for h in &self.h0_perp {
                s.insert(t.apply(h));
            }
        }
        s
    }
}

/// Basis of `span{h_α : α ∈ Δ'}`.
pub fn h0_basis(rd: &RootDatum, sub: &RootSubsystem) -> Vec<Vector> {
    Subspace::span(rd.ambient_dim(), sub.members().iter().map(|&a| rd.coroot(a).clone())).basis()
}

/// Canonical basis of `{h ∈ h : α(h) = 0 for all α ∈ Δ'}`.
pub fn h0_perp_basis(rd: &RootDatum, sub: &RootSubsystem) -> Vec<Vector> {
    let r = rd.rank();
    if r == 0 {
        return Vec::new();
    }
    let mut rows: Vec<Vector> = sub.members().iter().map(|&a| rd.roots()[a].clone()).collect();
    rows.push(zero_vector(r));
    Matrix::from_rows(rows)
        .nullspace()
        .into_iter()
        .map(|c| {
            let mut h = zero_vector(rd.ambient_dim());
            for (ci, hi) in c.iter().zip(rd.cartan()) {
                axpy(&mut h, ci, hi);
            }
            h
        })
        .collect()
}

fn resolve_xi(sub: &RootSubsystem, xi: &XiSpec) -> Result<Vec<Rat>, AvgError> {
    let comps = sub.components();
    let mut out = Vec::with_capacity(comps.len());
    match xi {
        XiSpec::PerComponent(m) => {
            if let Some(k) = m.keys().find(|&&k| k >= comps.len()) {
                return Err(AvgError::Input(format!("component index {k} out of range")));
            }
            for c in 0..comps.len() {
                let v = m.get(&c).ok_or(AvgError::MissingXi(c))?;
                out.push(v.clone());
            }
        }
        XiSpec::PerRoot(m) => {
            if let Some(k) = m.keys().find(|&&k| !sub.contains(k)) {
                return Err(AvgError::Input(format!("root {k} is not in the subsystem")));
            }
            for (c, comp) in comps.iter().enumerate() {
                let mut vals = comp.iter().filter_map(|a| m.get(a));
                let first = vals.next().ok_or(AvgError::MissingXi(c))?;
                if vals.any(|v| v != first) {
                    return Err(AvgError::InconsistentXi(c));
                }
                out.push(first.clone());
            }
        }
    }
    if let Some(c) = out.iter().position(Rat::is_zero) {
        return Err(AvgError::ZeroXi(c));
    }
    Ok(out)
}

/// Images `T_n(b_j)` of the `h_0^⊥` basis for each supplied matrix.
fn hperp_images(dim: usize, basis: &[Vector], family: &[Matrix]) -> Result<Vec<Vec<Vector>>, AvgError> {
    let d = basis.len();
    let coords = BasisCoords::new(dim, basis.to_vec()).expect("canonical basis is independent");
    family
        .iter()
        .enumerate()
        .map(|(n, m)| {
            if m.rows() == d && m.cols() == d {
                Ok((0..d)
                    .map(|j| {
                        let mut v = zero_vector(dim);
                        for (i, bi) in basis.iter().enumerate() {
                            axpy(&mut v, m.get(i, j), bi);
                        }
                        v
                    })
                    .collect())
            } else if m.rows() == dim && m.cols() == dim {
                basis
                    .iter()
                    .map(|b| {
                        let img = m.apply(b);
                        coords.coords(&img).map(|_| img).ok_or(AvgError::BadHperp(n))
                    })
                    .collect()
            } else {
                Err(AvgError::BadHperp(n))
            }
        })
        .collect()
}

pub fn homogeneous_build(g: &LieAlgebra, rd: &RootDatum, spec: &HomogeneousSpec) -> Result<HomogeneousFamily, AvgError> {
    let dim = g.dim();
    if rd.ambient_dim() != dim {
        return Err(AvgError::DimensionMismatch { expected: dim, got: rd.ambient_dim() });
    }
    if spec.hperp.len() > MAX_FAMILY_DEGREE + 1 {
        return Err(AvgError::DegreeTooLarge(spec.hperp.len() - 1));
    }
    let sub = &spec.subsystem;
    let xi = resolve_xi(sub, &spec.xi)?;
    let h0_perp = h0_perp_basis(rd, sub);
    let images = hperp_images(dim, &h0_perp, &spec.hperp)?;
    let levels = spec.hperp.len().max(1);

    let mut inputs: Vec<Vector> = Vec::with_capacity(dim);
    let mut outputs: Vec<Vec<Vector>> = vec![Vec::with_capacity(dim); levels];
    let push = |inputs: &mut Vec<Vector>, outputs: &mut Vec<Vec<Vector>>, v: Vector, out: &dyn Fn(usize) -> Vector| {
        for (n, o) in outputs.iter_mut().enumerate() {
            o.push(out(n));
        }
        inputs.push(v);
    };
    let zero = zero_vector(dim);
    for a in 0..rd.root_count() {
        let x = rd.root_vector(a).clone();
        let scale = sub.component_of(a).map(|c| xi[c].clone());
        let out = |n: usize| match (&scale, n) {
            (Some(s), 0) => x.iter().map(|c| c * s).collect(),
            _ => zero.clone(),
        };
        push(&mut inputs, &mut outputs, x.clone(), &out);
    }
    let mut h0 = Vec::new();
    for (c, comp) in sub.components().iter().enumerate() {
        let basis = Subspace::span(dim, comp.iter().map(|&a| rd.coroot(a).clone())).basis();
        for h in basis {
            let s = xi[c].clone();
            let hs: Vector = h.iter().map(|v| v * &s).collect();
            let out = |n: usize| if n == 0 { hs.clone() } else { zero.clone() };
            push(&mut inputs, &mut outputs, h.clone(), &out);
            h0.push(h);
        }
    }
    for (j, b) in h0_perp.iter().enumerate() {
        let out = |n: usize| images.get(n).map_or_else(|| zero.clone(), |im| im[j].clone());
        push(&mut inputs, &mut outputs, b.clone(), &out);
    }
    if inputs.len() != dim {
        return Err(AvgError::NotSemisimple);
    }
    let inv = Matrix::from_columns(dim, &inputs).inverse().ok_or(AvgError::NotSemisimple)?;
    let family = outputs.iter().map(|o| Matrix::from_columns(dim, o).mul(&inv)).collect();
    let op = ConfAveOp::new(family)?;

    let report = is_conformal_averaging(g, &op)?;
    if let Some(w) = report.witness() {
        return Err(AvgError::ConstructionFailed(w.clone()));
    }
    Ok(HomogeneousFamily { op, subsystem: sub.clone(), xi, h0, h0_perp })
}

fn random_nonzero_rat<R: Rng + ?Sized>(rng: &mut R) -> Rat {
    let mut p = 0i64;
    while p == 0 {
        p = rng.gen_range(-5..=5);
    }
    Rat::new(p.into(), rng.gen_range(1i64..=3).into())
}

/// Random spec for `sub`: ξ with numerator in `[−5,5]∖{0}` and denominator
/// in `1..=3`, and an `h_0^⊥` family of degree at most `max_degree` with
/// entries in `[−3,3]`.
///
/// The family is resampled until its images span `h_0^⊥` (so the operator is
/// homogeneous) and its joint kernel on `h_0^⊥` is trivial. Without the second
/// condition `g = T_*(g) ⊕ Ker T_λ` fails; see the tests.
pub fn random_spec<R: Rng + ?Sized>(rd: &RootDatum, sub: &RootSubsystem, rng: &mut R, max_degree: usize) -> HomogeneousSpec {
    let xi = XiSpec::PerComponent((0..sub.components().len()).map(|c| (c, random_nonzero_rat(rng))).collect());
    let d = h0_perp_basis(rd, sub).len();
    let hperp = if d == 0 {
        Vec::new()
    } else {
        loop {
            let n = rng.gen_range(0..=max_degree.min(MAX_FAMILY_DEGREE));
            let fam: Vec<Matrix> = (0..=n)
                .map(|_| {
                    Matrix::from_rows(
                        (0..d).map(|_| (0..d).map(|_| Rat::from_integer(rng.gen_range(-3i64..=3).into())).collect()).collect(),
                    )
                })
                .collect();
            let side = Matrix::from_rows((0..d).map(|i| fam.iter().flat_map(|m| m.row(i).to_vec()).collect()).collect());
            let stacked = Matrix::from_rows(fam.iter().flat_map(Matrix::row_vectors).collect());
            if side.rank() == d && stacked.rank() == d {
                break fam;
            }
        }
    };
    HomogeneousSpec { subsystem: sub.clone(), xi, hperp }
}
