//! Acceptance criteria 1 to 10, one test each, over a shared seeded sweep.
//!
//! Run with `cargo test -p cybe-forge --test acceptance -- --nocapture` to see
//! the per-criterion summary lines.

use std::sync::OnceLock;

use cybe_forge::exact::{rat, Rat};
use cybe_forge::liealg::{build_sl, LieAlgebra};
use cybe_forge::linalg::Matrix;
use cybe_forge::sweep::{CriterionResult, Sweep, SweepConfig, SUBSYSTEM_COUNTS};

const SEED: u64 = 20_241_016;

fn sweep() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| Sweep::new(SweepConfig { seed: SEED, ..SweepConfig::default() }))
}

fn finish(r: CriterionResult, extra: Vec<(String, bool)>) {
    let failed_extra: Vec<&String> = extra.iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    let ok = r.passed() && failed_extra.is_empty();
    println!("{} | oracles: {} checked, {} failed => {}", r.summary_line(), extra.len(), failed_extra.len(), if ok { "PASS" } else { "FAIL" });
    assert!(r.passed(), "criterion {} failed: {:?}", r.id, r.first_failure());
    assert!(failed_extra.is_empty(), "criterion {} oracle mismatch: {failed_extra:?}", r.id);
}

/// The 2×2 (or n×n) matrix behind a basis label of `sl_n`.
fn label_matrix(label: &str, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let digits: Vec<usize> = label[1..].chars().map(|c| c.to_digit(10).unwrap() as usize).collect();
    if label.starts_with('H') {
        let i = digits[0] - 1;
        m.set(i, i, rat(1));
        m.set(i + 1, i + 1, rat(-1));
    } else {
        m.set(digits[0] - 1, digits[1] - 1, rat(1));
    }
    m
}

/// Killing form of `sl_n` is `2n tr(XY)`.
fn killing_trace_oracle(g: &LieAlgebra, n: usize) -> bool {
    let k = g.killing();
    let mats: Vec<Matrix> = g.labels().iter().map(|l| label_matrix(l, n)).collect();
    let scale = rat(2 * n as i64);
    (0..g.dim()).all(|i| (0..g.dim()).all(|j| *k.get(i, j) == mats[i].mul(&mats[j]).trace() * &scale))
}

/// The structure constants agree with matrix commutators.
fn commutator_oracle(g: &LieAlgebra, n: usize) -> bool {
    let mats: Vec<Matrix> = g.labels().iter().map(|l| label_matrix(l, n)).collect();
    (0..g.dim()).all(|i| {
        (0..g.dim()).all(|j| {
            let v = g.bracket(&g.basis_vector(i), &g.basis_vector(j));
            let mut from_v = Matrix::zeros(n, n);
            for (c, m) in v.iter().zip(&mats) {
                from_v = from_v.add(&m.scale(c));
            }
            from_v == mats[i].mul(&mats[j]).sub(&mats[j].mul(&mats[i]))
        })
    })
}

/// Closed symmetric subsets of the `A_{n−1}` roots `ε_i − ε_j`, by brute force.
fn brute_force_subsystems(n: usize) -> usize {
    let positive: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut count = 0;
    for mask in 0u32..(1 << positive.len()) {
        let mut set = std::collections::HashSet::new();
        for (b, &(i, j)) in positive.iter().enumerate() {
            if mask >> b & 1 == 1 {
                set.insert((i, j));
                set.insert((j, i));
            }
        }
        // (ε_i − ε_j) + (ε_j − ε_k) = ε_i − ε_k is the only way two roots add to a root
        let closed = set.iter().all(|&(i, j)| set.iter().all(|&(j2, k)| j2 != j || k == i || set.contains(&(i, k))));
        if closed {
            count += 1;
        }
    }
    count
}

#[test]
fn criterion_01_lie_kernel() {
    let s = sweep();
    let mut extra = Vec::new();
    for n in 2..=4 {
        let (g, _) = build_sl(n).unwrap();
        extra.push((format!("killing-trace/sl{n}"), killing_trace_oracle(&g, n)));
        extra.push((format!("commutators/sl{n}"), commutator_oracle(&g, n)));
    }
    finish(s.criterion1(), extra);
}

#[test]
fn criterion_02_conformal_axioms() {
    finish(sweep().criterion2(), Vec::new());
}

#[test]
fn criterion_03_classification_sweep() {
    let s = sweep();
    let mut extra = Vec::new();
    for (case, subs) in s.cases.iter().zip(&s.subsystems) {
        let oracle = match case.name.as_str() {
            "sl2+sl2" => brute_force_subsystems(2) * brute_force_subsystems(2),
            name => brute_force_subsystems(name[2..].parse().unwrap()),
        };
        extra.push((format!("brute-force-count/{}", case.name), oracle == subs.len()));
        let golden = SUBSYSTEM_COUNTS.iter().find(|(n, _)| *n == case.name).map(|(_, k)| *k);
        extra.push((format!("golden-count/{}", case.name), golden == Some(oracle)));
    }
    let expected_families: usize = s.subsystems.iter().map(Vec::len).sum::<usize>() * s.config.trials;
    extra.push(("family-count".into(), s.families.len() == expected_families));
    finish(s.criterion3(), extra);
}

#[test]
fn criterion_04_structure_theorems() {
    let s = sweep();
    let r = s.criterion4();
    // six structure checks plus two preconditions per family
    let extra = vec![("checks-per-family".to_string(), r.checks.len() == 8 * s.families.len())];
    finish(r, extra);
}

#[test]
fn criterion_05_averaging_on_cur() {
    let s = sweep();
    let r = s.criterion5();
    let extra = vec![("one-check-per-family".to_string(), r.checks.len() == s.families.len())];
    finish(r, extra);
}

#[test]
fn criterion_06_leibniz_layer() {
    finish(sweep().criterion6(), Vec::new());
}

#[test]
fn criterion_07_cybe_solutions() {
    // 1/((u+v)u) − 1/(uv) + 1/((u+v)v) = 0 at every grid point, by hand
    let grid_ok = cybe_forge::exact::evaluation_grid().iter().all(|(u, v)| {
        let s: Rat = u + v;
        let one = rat(1);
        &one / (&s * u) - &one / (u * v) + &one / (&s * v) == rat(0)
    });
    finish(sweep().criterion7(), vec![("three-term-identity".into(), grid_ok)]);
}

#[test]
fn criterion_08_residues() {
    finish(sweep().criterion8(), Vec::new());
}

#[test]
fn criterion_09_negative_controls() {
    let r = sweep().criterion9();
    let witnessed = r.checks.iter().all(|c| c.witness.is_some());
    finish(r, vec![("witnesses-attached".into(), witnessed)]);
}

#[test]
fn criterion_10_centroid() {
    finish(sweep().criterion10(), Vec::new());
}
