//! Exact checks of the structure of `T_*(g)` for a homogeneous family.

use serde_json::{json, Value};

use super::conformal::{is_conformal_averaging, t_star_image, ConfAveOp};
use crate::liealg::{LieAlgebra, RootDatum};
use crate::linalg::{unit_vector, vec_sub, vector_to_json, BasisCoords, Matrix, Subspace, Vector};
use crate::report::{all_passed, Check};

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub checks: Vec<Check>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.checks.iter().map(Check::to_json).collect())
    }
}

fn image_of(ms: &[Matrix], dim: usize) -> Subspace {
    Subspace::span(dim, ms.iter().flat_map(Matrix::columns))
}

/// `{z ∈ span(basis) : [z, b] = 0 for every b}`
fn center_within(g: &LieAlgebra, basis: &[Vector]) -> Subspace {
    let d = g.dim();
    if basis.is_empty() {
        return Subspace::zero(d);
    }
    let mut rows = Vec::new();
    for bj in basis {
        let cols: Vec<Vector> = basis.iter().map(|bi| g.bracket(bi, bj)).collect();
        for k in 0..d {
            rows.push(cols.iter().map(|c| c[k].clone()).collect::<Vector>());
        }
    }
    let z = Matrix::from_rows(rows).nullspace().into_iter().map(|c| {
        let mut v = crate::linalg::zero_vector(d);
        for (ci, bi) in c.iter().zip(basis) {
            crate::linalg::axpy(&mut v, ci, bi);
        }
        v
    });
    Subspace::span(d, z)
}

fn derived(g: &LieAlgebra, basis: &[Vector]) -> Subspace {
    let mut s = Subspace::zero(g.dim());
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            s.insert(g.bracket(a, b));
        }
    }
    s
}

/// Killing form of a subalgebra computed from its own adjoint action.
fn intrinsic_killing_invertible(g: &LieAlgebra, basis: &[Vector]) -> bool {
    if basis.is_empty() {
        return true;
    }
    let coords = BasisCoords::new(g.dim(), basis.to_vec()).expect("echelon basis");
    let k = basis.len();
    let ads: Vec<Matrix> = basis
        .iter()
        .map(|x| {
            let cols: Vec<Vector> = basis.iter().map(|y| coords.coords(&g.bracket(x, y)).expect("subalgebra")).collect();
            Matrix::from_columns(k, &cols)
        })
        .collect();
    let mut gram = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram.set(i, j, ads[i].trace_of_product(&ads[j]));
        }
    }
    gram.inverse().is_some()
}

fn subspace_witness(name: &str, v: &[crate::exact::Rat]) -> Value {
    json!({"reason": name, "vector": vector_to_json(v)})
}

/// Preconditions (averaging, homogeneity) and the six structure checks.
///
/// When a precondition fails only the preconditions are reported.
pub fn verify_structure_theorems(g: &LieAlgebra, rd: &RootDatum, t: &ConfAveOp) -> StructureReport {
    let d = g.dim();
    let mut checks = Vec::new();
    let avg = match is_conformal_averaging(g, t) {
        Ok(r) => Check::from_witness("precondition-averaging", r.witness().cloned()),
        Err(e) => Check::fail("precondition-averaging", json!(e.to_string())),
    };
    let tstar = t_star_image(t);
    let cartan_missing = rd.cartan().iter().find(|h| !tstar.contains(h));
    let homog = Check::from_witness("precondition-homogeneous", cartan_missing.map(|h| subspace_witness("Cartan element outside T_*(g)", h)));
    let ready = avg.passed() && homog.passed();
    checks.push(avg);
    checks.push(homog);
    if !ready {
        return StructureReport { checks };
    }

    let tb = tstar.basis();
    let family = t.family();
    let big_n = t.degree();

    // (a) closure
    let mut a = None;
    'a: for (i, x) in tb.iter().enumerate() {
        for y in &tb[i + 1..] {
            let v = g.bracket(x, y);
            if !tstar.contains(&v) {
                a = Some(subspace_witness("bracket leaves T_*(g)", &v));
                break 'a;
            }
        }
    }
    checks.push(Check::from_witness("a-closed", a));

    // (b) reductivity certificate
    let der = derived(g, &tb);
    let center = center_within(g, &tb);
    let delta_prime: Vec<usize> = (0..rd.root_count()).filter(|&r| tstar.contains(rd.root_vector(r))).collect();
    let g0 = {
        let mut vs: Vec<Vector> = delta_prime.iter().map(|&r| rd.root_vector(r).clone()).collect();
        vs.extend(delta_prime.iter().map(|&r| rd.coroot(r).clone()));
        Subspace::span(d, vs)
    };
    let tt = image_of(&family.iter().map(|m| m.mul(&Matrix::from_columns(d, &tb))).collect::<Vec<_>>(), d);
    let mut b = Vec::new();
    if der.dim() + center.dim() != tstar.dim() || der.intersection(&center).dim() != 0 {
        b.push(json!({"reason": "derived and center do not split T_*(g)", "derived": der.dim(), "center": center.dim(), "t_star": tstar.dim()}));
    }
    if !intrinsic_killing_invertible(g, &der.basis()) {
        b.push(json!({"reason": "derived subalgebra has degenerate Killing form"}));
    }
    if let Some(&r) = delta_prime.iter().find(|&&r| !delta_prime.contains(&rd.negative(r))) {
        b.push(json!({"reason": "Δ' is not symmetric", "root": r}));
    }
    if !der.equals(&g0) {
        b.push(json!({"reason": "derived subalgebra differs from g_0", "derived": der.dim(), "g0": g0.dim()}));
    }
    if !g0.is_subspace_of(&tt) {
        b.push(json!({"reason": "g_0 not contained in T_*(T_*(g))"}));
    }
    checks.push(Check::from_witness("b-reductive", (!b.is_empty()).then(|| Value::Array(b))));

    // (c) g = T_*(g) ⊕ Ker
    let stacked = Matrix::from_rows(family.iter().flat_map(Matrix::row_vectors).collect());
    let kernel = Subspace::span(d, stacked.nullspace());
    let c_ok = tstar.dim() + kernel.dim() == d && tstar.intersection(&kernel).dim() == 0;
    checks.push(Check::from_witness(
        "c-decomposition",
        (!c_ok).then(|| json!({"t_star": tstar.dim(), "kernel": kernel.dim(), "dim": d, "intersection": tstar.intersection(&kernel).dim()})),
    ));

    // T_(n) = Σ_{m ≥ n} im T_m, with T_(N+1) = 0
    let filtration: Vec<Subspace> = (0..=big_n + 1).map(|n| image_of(&family[n.min(family.len())..], d)).collect();

    // (d) filtration ideals
    let mut dd = None;
    'd: for (n, tn) in filtration.iter().enumerate().take(big_n + 1) {
        for x in &tb {
            for y in tn.basis() {
                let v = g.bracket(x, &y);
                if !tn.contains(&v) {
                    dd = Some(json!({"n": n, "vector": vector_to_json(&v)}));
                    break 'd;
                }
            }
        }
    }
    checks.push(Check::from_witness("d-filtration-ideals", dd));

    // (e) [T_k x, T_n a] − T_n([T_k x, a]) ∈ T_(n+1)
    let cols: Vec<Vec<Vector>> = family.iter().map(Matrix::columns).collect();
    let mut e = None;
    'e: for (k, ck) in cols.iter().enumerate() {
        for x in 0..d {
            for (n, cn) in cols.iter().enumerate() {
                for ai in 0..d {
                    let lhs = g.bracket(&ck[x], &cn[ai]);
                    let rhs = family[n].apply(&g.bracket(&ck[x], &unit_vector(d, ai)));
                    let diff = vec_sub(&lhs, &rhs);
                    if !filtration[n + 1].contains(&diff) {
                        e = Some(json!({"k": k, "n": n, "pair": [g.labels()[x], g.labels()[ai]]}));
                        break 'e;
                    }
                }
            }
        }
    }
    checks.push(Check::from_witness("e-quotient-homomorphism", e));

    // (f) [g, h_0^⊥] ⊆ Ker and [h_0^⊥, T_*(g)] = 0
    let h0perp: Vec<Vector> = {
        let r = rd.rank();
        let mut rows: Vec<Vector> = delta_prime.iter().map(|&a| rd.roots()[a].clone()).collect();
        rows.push(crate::linalg::zero_vector(r));
        Matrix::from_rows(rows)
            .nullspace()
            .into_iter()
            .map(|c| {
                let mut h = crate::linalg::zero_vector(d);
                for (ci, hi) in c.iter().zip(rd.cartan()) {
                    crate::linalg::axpy(&mut h, ci, hi);
                }
                h
            })
            .collect()
    };
    let mut f = None;
    'f: for h in &h0perp {
        for x in 0..d {
            let v = g.bracket(&unit_vector(d, x), h);
            if !kernel.contains(&v) {
                f = Some(json!({"reason": "[g, h_0^⊥] not in Ker", "basis": g.labels()[x]}));
                break 'f;
            }
        }
        for y in &tb {
            let v = g.bracket(h, y);
            if v.iter().any(|c| !num::Zero::is_zero(c)) {
                f = Some(json!({"reason": "[h_0^⊥, T_*(g)] ≠ 0", "vector": vector_to_json(&v)}));
                break 'f;
            }
        }
    }
    checks.push(Check::from_witness("f-complement-h", f));

    StructureReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::cartan_projection;
    use crate::exact::rat;
    use crate::liealg::build_sl;

    #[test]
    fn identity_is_trivially_reductive() {
        let (g, rd) = build_sl(3).unwrap();
        let r = verify_structure_theorems(&g, &rd, &ConfAveOp::ordinary(Matrix::identity(8)));
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn cartan_projection_passes() {
        let (g, rd) = build_sl(2).unwrap();
        let r = verify_structure_theorems(&g, &rd, &ConfAveOp::ordinary(cartan_projection(&g, &rd)));
        assert!(r.passed(), "{:?}", r.checks);
    }

    /// Keep `T_0(x_α) = x_α` but kill `x_{−α}`.
    #[test]
    fn corrupted_family_stops_at_precondition() {
        let (g, rd) = build_sl(2).unwrap();
        let ia = rd.find_root(&[rat(2)]).unwrap();
        let ineg = rd.negative(ia);
        let mut t = Matrix::identity(3);
        let k = g.index_of("E21").unwrap();
        assert_eq!(rd.root_vector(ineg), &g.basis_vector(k));
        t.set(k, k, rat(0));
        let r = verify_structure_theorems(&g, &rd, &ConfAveOp::ordinary(t));
        assert!(!r.passed());
        assert_eq!(r.checks.len(), 2);
        assert!(!r.checks[0].passed());
    }

    #[test]
    fn non_homogeneous_is_reported() {
        let (g, rd) = build_sl(2).unwrap();
        let r = verify_structure_theorems(&g, &rd, &ConfAveOp::zero(3));
        assert!(r.checks[0].passed());
        assert!(!r.checks[1].passed());
    }
}
