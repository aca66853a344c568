//! Transition matrices of quotient Cayley graphs, symmetric spectra, and
//! verification of the `ℓ2` mixing bounds.
//!
//! The simple transition matrix is the Cayley-graph adjacency matrix
//! normalized by `1/|S|`; generator multiplicity is respected. The lazy
//! operator is `L = (1/2) I + (1/2) P`, whose spectrum lies in `[0, 1]`.
//!
//! Full spectra come from a dependency-free cyclic Jacobi diagonalization
//! (tolerance 1e-12, at most 100 sweeps). Above the full-spectrum cap only
//! the second eigenvalue is computed, by power iteration orthogonal to the
//! known top eigenvector (the uniform vector).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quotients::{CayleyAction, FiniteGroupTable, QuotientMap};
use crate::walks;

/// Order cap for full-spectrum diagonalization.
pub const FULL_SPECTRUM_CAP: usize = 3_000;
/// Jacobi stopping tolerance on the off-diagonal norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Power-iteration residual target and iteration cap.
pub const ITERATION_TOLERANCE: f64 = 1e-9;
pub const ITERATION_MAX_STEPS: usize = 200_000;

/// Dense symmetric walk operator on a finite quotient.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    order: usize,
    data: Vec<f64>,
    lazy: bool,
}

impl TransitionMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.order + y]
    }

    pub fn from_rows(order: usize, data: Vec<f64>, lazy: bool) -> TransitionMatrix {
        assert_eq!(data.len(), order * order);
        TransitionMatrix { order, data, lazy }
    }
}

fn check_symmetric_generators(t: &FiniteGroupTable) -> Result<()> {
    let mut gens: Vec<u32> = t.generators().to_vec();
    let mut invs: Vec<u32> = t.generators().iter().map(|&g| t.inv(g)).collect();
    gens.sort_unstable();
    invs.sort_unstable();
    if gens == invs {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "generator multiset of {} is not symmetric",
            t.name()
        )))
    }
}

/// Simple walk operator `P(x, y) = (1/|S|)·#{s ∈ S : y = x·s}`.
pub fn build_simple_transition(t: &FiniteGroupTable) -> Result<TransitionMatrix> {
    check_symmetric_generators(t)?;
    let n = t.order();
    let w = 1.0 / t.generators().len() as f64;
    let mut data = alloc::vec![0.0; n * n];
    for x in 0..n as u32 {
        for &s in t.generators() {
            data[x as usize * n + t.mul(x, s) as usize] += w;
        }
    }
    Ok(TransitionMatrix {
        order: n,
        data,
        lazy: false,
    })
}

/// Lazy walk operator `L = (1/2) I + (1/2) P`.
pub fn build_lazy_transition(t: &FiniteGroupTable) -> Result<TransitionMatrix> {
    let mut m = build_simple_transition(t)?;
    let n = m.order;
    for x in 0..n {
        for y in 0..n {
            let v = m.data[x * n + y] * 0.5;
            m.data[x * n + y] = if x == y { v + 0.5 } else { v };
        }
    }
    m.lazy = true;
    Ok(m)
}

/// Eigenvalues in descending order, the second-largest value, and the
/// off-diagonal residual the diagonalization achieved.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub mu2: f64,
    pub residual: f64,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            let v = a[p * n + q];
            acc += 2.0 * v * v;
        }
    }
    libm::sqrt(acc)
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_spectrum(m: &TransitionMatrix) -> Result<Spectrum> {
    let n = m.order;
    if n > FULL_SPECTRUM_CAP {
        return Err(Error::capacity(format!(
            "order {n} exceeds the full-spectrum cap {FULL_SPECTRUM_CAP}; \
             use the second-eigenvalue iteration instead"
        )));
    }
    for x in 0..n {
        for y in x + 1..n {
            if (m.data[x * n + y] - m.data[y * n + x]).abs() > 1e-12 {
                return Err(Error::usage("matrix is not symmetric"));
            }
        }
    }
    let mut a = m.data.clone();
    let mut frob = 0.0;
    for v in &a {
        frob += v * v;
    }
    let tol = JACOBI_TOLERANCE * libm::sqrt(frob).max(1.0);
    let mut residual = off_diagonal_norm(&a, n);
    let mut sweeps = 0;
    while residual > tol && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_p = aip - s * (aiq + tau * aip);
                    let new_q = aiq + s * (aip - tau * aiq);
                    a[i * n + p] = new_p;
                    a[p * n + i] = new_p;
                    a[i * n + q] = new_q;
                    a[q * n + i] = new_q;
                }
            }
        }
        residual = off_diagonal_norm(&a, n);
        sweeps += 1;
    }
    if residual > tol {
        return Err(Error::numerical(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps; residual {residual:e}"
        )));
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    let mu2 = if n >= 2 { eigenvalues[1] } else { 0.0 };
    Ok(Spectrum {
        eigenvalues,
        mu2,
        residual,
    })
}

/// Second eigenvalue of the lazy operator by power iteration on the
/// orthogonal complement of the uniform vector. Valid because the lazy
/// spectrum is non-negative, so the dominant value in the complement is
/// exactly the second eigenvalue.
pub fn lazy_mu2_by_iteration(action: &CayleyAction) -> Result<f64> {
    let n = action.order();
    if n < 2 {
        return Ok(0.0);
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            // deterministic pseudo-random start
            let r = crate::rng::mix64(0x5eed_0d5e ^ i as u64);
            (r >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    project_and_normalize(&mut v);
    let k = action.generator_count();
    let w = 0.5 / k as f64;
    let mut lv = alloc::vec![0.0; n];
    let mut mu = 0.0f64;
    for _ in 0..ITERATION_MAX_STEPS {
        for (i, slot) in lv.iter_mut().enumerate() {
            let mut acc = 0.5 * v[i];
            for s in 0..k {
                acc += w * v[action.target(s)[i] as usize];
            }
            *slot = acc;
        }
        mu = dot(&v, &lv);
        // residual of the Rayleigh pair (v, mu)
        let mut res = 0.0;
        for i in 0..n {
            let d = lv[i] - mu * v[i];
            res += d * d;
        }
        if libm::sqrt(res) <= ITERATION_TOLERANCE {
            return Ok(mu);
        }
        core::mem::swap(&mut v, &mut lv);
        project_and_normalize(&mut v);
    }
    Err(Error::numerical(format!(
        "second-eigenvalue iteration did not reach {ITERATION_TOLERANCE:e} \
         in {ITERATION_MAX_STEPS} steps (last estimate {mu})"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_and_normalize(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
    let norm = libm::sqrt(dot(v, v));
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Closed-form second eigenvalue of the lazy `±1` walk on `Z/m`:
/// `1/2 + 1/2·cos(2π/m)`. Checked against the Jacobi spectrum in tests.
pub fn lazy_cycle_second_eigenvalue(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    0.5 + 0.5 * libm::cos(2.0 * core::f64::consts::PI / m as f64)
}

#[derive(Debug, Clone)]
pub struct MixingViolation {
    pub step: u64,
    pub check: &'static str,
    pub excess: f64,
}

/// Report of the two mixing inequalities over `n = 0..=n_max`:
/// `||σ L^n − p_u||_2 <= μ2^n` and `|P(X_n ∈ N) − 1/[G:N]| <= μ2^n`.
#[derive(Debug, Clone)]
pub struct MixingReport {
    pub quotient: String,
    pub order: usize,
    pub mu2: f64,
    /// Largest measured value minus bound over all steps and both checks;
    /// negative when every step has margin.
    pub max_slack: f64,
    pub violations: Vec<MixingViolation>,
}

impl MixingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_mixing_bound(map: &QuotientMap, n_max: u64) -> Result<MixingReport> {
    verify_mixing_bound_with_tolerance(map, n_max, 1e-9)
}

pub fn verify_mixing_bound_with_tolerance(
    map: &QuotientMap,
    n_max: u64,
    slack_tolerance: f64,
) -> Result<MixingReport> {
    let table = map.table()?;
    let lazy = build_lazy_transition(&table)?;
    let spectrum = symmetric_spectrum(&lazy)?;
    let mu2 = spectrum.mu2;
    let action = CayleyAction::from_table(&table);
    let n = table.order();
    let uniform = 1.0 / n as f64;
    let mut p = alloc::vec![0.0; n];
    p[action.identity() as usize] = 1.0;
    let mut scratch = Vec::with_capacity(n);
    let mut bound = 1.0f64; // mu2^0
    let mut max_slack = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for step in 0..=n_max {
        if step > 0 {
            walks::push_step(&action, &mut p, &mut scratch);
            bound *= mu2;
        }
        let mut l2 = 0.0;
        for &x in &p {
            let d = x - uniform;
            l2 += d * d;
        }
        let l2 = libm::sqrt(l2);
        let residue = (p[action.identity() as usize] - uniform).abs();
        for (check, measured) in [("l2", l2), ("identity-mass", residue)] {
            let excess = measured - bound;
            if excess > max_slack {
                max_slack = excess;
            }
            if excess > slack_tolerance {
                violations.push(MixingViolation {
                    step,
                    check,
                    excess,
                });
            }
        }
    }
    Ok(MixingReport {
        quotient: map.name(),
        order: n,
        mu2,
        max_slack,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use crate::quotients::FiniteGroupTable;

    #[test]
    fn permutation_matrix_spectrum() {
        let m = TransitionMatrix::from_rows(2, alloc::vec![0.0, 1.0, 1.0, 0.0], false);
        let s = symmetric_spectrum(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_matrix_spectrum() {
        let mut data = alloc::vec![0.0; 9];
        for i in 0..3 {
            data[i * 3 + i] = 1.0;
        }
        let m = TransitionMatrix::from_rows(3, data, false);
        let s = symmetric_spectrum(&m).unwrap();
        for v in &s.eigenvalues {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_symmetric_is_rejected() {
        let m = TransitionMatrix::from_rows(2, alloc::vec![0.0, 1.0, 0.5, 0.5], false);
        assert!(matches!(symmetric_spectrum(&m), Err(Error::Usage(_))));
    }

    #[test]
    fn cyclic_lazy_spectra_match_hand_values() {
        // Z/2 with S = {1, 1}: P swaps the states, lazy eigenvalues {1, 0}
        let t2 = FiniteGroupTable::cyclic(2);
        let p = build_simple_transition(&t2).unwrap();
        assert_eq!(p.entry(0, 1), 1.0);
        assert_eq!(p.entry(0, 0), 0.0);
        let l = build_lazy_transition(&t2).unwrap();
        let s = symmetric_spectrum(&l).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!(s.eigenvalues[1].abs() < 1e-10);
        assert!(s.mu2.abs() < 1e-10);

        // Z/3: lazy eigenvalues {1, 1/4, 1/4}
        let s3 = symmetric_spectrum(
            &build_lazy_transition(&FiniteGroupTable::cyclic(3)).unwrap(),
        )
        .unwrap();
        assert!((s3.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((s3.eigenvalues[1] - 0.25).abs() < 1e-10);
        assert!((s3.eigenvalues[2] - 0.25).abs() < 1e-10);

        // Z/4: lazy eigenvalues {1, 1/2, 1/2, 0}
        let s4 = symmetric_spectrum(
            &build_lazy_transition(&FiniteGroupTable::cyclic(4)).unwrap(),
        )
        .unwrap();
        let expect = [1.0, 0.5, 0.5, 0.0];
        for (a, b) in s4.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((s4.mu2 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn cyclic_spectra_match_circulant_formula() {
        for m in [5u64, 7, 12, 50] {
            let t = FiniteGroupTable::cyclic(m);
            let s = symmetric_spectrum(&build_lazy_transition(&t).unwrap()).unwrap();
            let expected = oracles::lazy_cycle_eigenvalues(m);
            for (a, b) in s.eigenvalues.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "m={m}: {a} vs {b}");
            }
            assert!(
                (s.mu2 - lazy_cycle_second_eigenvalue(m)).abs() < 1e-10,
                "m={m}"
            );
        }
    }

    #[test]
    fn lazy_spectrum_is_affine_image_of_simple_spectrum() {
        let t = FiniteGroupTable::heisenberg_mod(2).unwrap();
        let simple = symmetric_spectrum(&build_simple_transition(&t).unwrap()).unwrap();
        let lazy = symmetric_spectrum(&build_lazy_transition(&t).unwrap()).unwrap();
        for (l, p) in lazy.eigenvalues.iter().zip(&simple.eigenvalues) {
            assert!((l - (0.5 + 0.5 * p)).abs() < 1e-9);
        }
        // all lazy eigenvalues in [0, 1]
        for &l in &lazy.eigenvalues {
            assert!((-1e-10..=1.0 + 1e-10).contains(&l));
        }
    }

    #[test]
    fn power_iteration_matches_jacobi() {
        for t in [
            FiniteGroupTable::cyclic(12),
            FiniteGroupTable::heisenberg_mod(3).unwrap(),
        ] {
            let full = symmetric_spectrum(&build_lazy_transition(&t).unwrap()).unwrap();
            let action = CayleyAction::from_table(&t);
            let mu2 = lazy_mu2_by_iteration(&action).unwrap();
            assert!(
                (mu2 - full.mu2).abs() < 1e-7,
                "{}: {mu2} vs {}",
                t.name(),
                full.mu2
            );
        }
    }

    #[test]
    fn mixing_bound_examples() {
        // Z mod 2: the chain mixes in one step and mu2 = 0
        let q2 = crate::quotients::QuotientMap::integer_mod(2).unwrap();
        let r = verify_mixing_bound(&q2, 50).unwrap();
        assert!(r.passed());
        assert!(r.mu2.abs() < 1e-10);

        // Z mod 3 at n=1: |1/2 - 1/3| = 1/6 <= mu2 = 1/4
        let q3 = crate::quotients::QuotientMap::integer_mod(3).unwrap();
        let r = verify_mixing_bound(&q3, 100).unwrap();
        assert!(r.passed());
        assert!((r.mu2 - 0.25).abs() < 1e-10);
        // the true slack is never positive; once both sides underflow the
        // measured distance bottoms out at rounding noise around 1e-16
        assert!(r.max_slack <= 1e-12);
    }

    #[test]
    fn mu2_strictly_below_one_on_connected_quotients() {
        for m in 2..=20u64 {
            let q = crate::quotients::QuotientMap::integer_mod(m).unwrap();
            let r = verify_mixing_bound(&q, 10).unwrap();
            assert!(r.mu2 < 1.0 - 1e-9, "m={m}");
        }
    }
}
