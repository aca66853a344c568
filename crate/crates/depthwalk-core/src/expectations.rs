//! The truncated limit series `2 + Σ_{k≥2} 1/[G:Λ_k]`, divergence
//! diagnostics, and convergence reports comparing expected-depth estimates
//! against that series.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::depth::DepthEngine;
use crate::error::Result;
use crate::groups::{Family, GroupDescriptor};
use crate::quotients::{lambda_table, LambdaTable, TailRule};
use crate::rational::Rational;
use crate::rng::mix64;
use crate::spectra::lazy_cycle_second_eigenvalue;
use crate::walks::{
    exact_expected_depth_integer, monte_carlo_expected_depth, prob_zero_integer_walk, WalkConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    LcmTail,
    Geometric,
    None,
}

impl TailMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailMethod::LcmTail => "lcm-tail",
            TailMethod::Geometric => "geometric",
            TailMethod::None => "none",
        }
    }
}

/// Value of a truncated series with explicit truncation bookkeeping.
/// `value` always includes the two leading terms, so it is at least 2.
#[derive(Debug, Clone)]
pub struct SeriesEstimate {
    pub value: f64,
    pub truncation: u64,
    /// Upper bound on the dropped tail; infinite when no bound is known.
    pub tail_bound: f64,
    pub tail_method: TailMethod,
    pub divergent: bool,
}

/// Partial sum `2 + Σ_{k=2}^{K} 1/[G:Λ_k]` with the family's tail bound.
pub fn presumed_limit(table: &LambdaTable) -> SeriesEstimate {
    let mut value = 2.0;
    for e in &table.entries {
        value += 1.0 / e.index as f64;
    }
    let (tail_bound, tail_method) = match &table.tail {
        TailRule::LcmPower { next_m, d } => {
            let bound =
                2.0 * (table.truncation + 1) as f64 / libm::pow(*next_m as f64, *d as f64);
            let method = if *d == 1 {
                TailMethod::LcmTail
            } else {
                TailMethod::Geometric
            };
            (bound, method)
        }
        TailRule::Unknown => (f64::INFINITY, TailMethod::None),
    };
    SeriesEstimate {
        value,
        truncation: table.truncation,
        tail_bound,
        tail_method,
        divergent: false,
    }
}

/// Heuristic divergence indicator with the full partial-sum trace. Flags
/// when the partial sums pass the threshold while the last term has not
/// decayed below `1/K`. Evidence, never a verdict: divergence of a series
/// is not decidable from finitely many terms.
#[derive(Debug, Clone)]
pub struct DivergenceDiagnostics {
    pub flagged: bool,
    pub threshold: f64,
    /// partial sums of `Σ 1/[G:Λ_k]` (without the leading 2)
    pub partial_sums: Vec<f64>,
    pub last_term: f64,
}

pub fn divergence_flag(table: &LambdaTable, threshold: f64) -> DivergenceDiagnostics {
    let mut partial_sums = Vec::with_capacity(table.entries.len());
    let mut acc = 0.0;
    let mut last_term = 0.0;
    for e in &table.entries {
        last_term = 1.0 / e.index as f64;
        acc += last_term;
        partial_sums.push(acc);
    }
    let k = table.truncation as f64;
    let flagged = acc > threshold && last_term >= 1.0 / k;
    DivergenceDiagnostics {
        flagged,
        threshold,
        partial_sums,
        last_term,
    }
}

/// Rigorous deficiency bound for the exact integer route: the expected
/// depth at step `n` sits above the K-partial sum minus
/// `(K+1)·P(X_n = 0) + Σ_{k=2}^{K} μ2(m_k)^n`, since each cyclic quotient
/// obeys the `ℓ2` mixing bound and dropped terms are non-negative.
pub fn integer_defect_bound(n: u64, kmax: u64) -> Result<f64> {
    let ms = crate::quotients::lcm_sequence(kmax)?;
    let p0 = prob_zero_integer_walk(n);
    let mut bound = (kmax + 1) as f64 * p0;
    for m in &ms {
        let mu2 = lazy_cycle_second_eigenvalue(*m as u64);
        bound += libm::pow(mu2, n as f64);
    }
    Ok(bound)
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: u64,
    pub estimate: f64,
    /// `None` for the exact integer route.
    pub std_error: Option<f64>,
    pub cap_hits: u64,
    pub gap: f64,
    pub fatou_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub group: String,
    pub truncation: u64,
    pub partial_limit: f64,
    pub tail_bound: f64,
    pub tail_method: TailMethod,
    /// Smallest step count at which the lower-bound check is applied for
    /// Monte Carlo rows (exact rows are checked at every step count).
    pub fatou_floor: u64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn fatou_violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.fatou_ok).count()
    }
}

/// Compare expected-depth estimates against the truncated series across a
/// grid of step counts.
///
/// The integers use the exact route and the rigorous defect bound; other
/// families are estimated by Monte Carlo with `trials` walks per grid
/// point. For Monte Carlo rows the lower-bound column is heuristic: rows
/// with `n < fatou_floor = 100·K` are not flagged (the chain cannot have
/// mixed), and beyond it a row is flagged when the estimate falls more than
/// five standard errors below the partial sum minus any finite tail
/// allowance.
pub fn convergence_report(
    group: &GroupDescriptor,
    n_grid: &[u64],
    trials: u64,
    kmax: u64,
    seed: u64,
    depth_cap: u64,
) -> Result<ConvergenceReport> {
    let table = lambda_table(group, kmax)?;
    let series = presumed_limit(&table);
    let partial = series.value;
    let tail_allowance = if series.tail_bound.is_finite() {
        series.tail_bound
    } else {
        0.0
    };
    let fatou_floor = 100 * kmax;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let row = match group.family() {
            Family::Integer => {
                let estimate = exact_expected_depth_integer(n)?;
                let defect = integer_defect_bound(n, kmax)?;
                ConvergenceRow {
                    n,
                    estimate,
                    std_error: None,
                    cap_hits: 0,
                    gap: estimate - partial,
                    fatou_ok: estimate >= partial - defect - 1e-9,
                }
            }
            _ => {
                let cfg = WalkConfig {
                    group: group.clone(),
                    steps: n,
                    seed: mix64(seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                    trials,
                };
                let est = monte_carlo_expected_depth(&cfg, depth_cap)?;
                let fatou_ok = n < fatou_floor
                    || est.mean >= partial - tail_allowance - 5.0 * est.std_error;
                ConvergenceRow {
                    n,
                    estimate: est.mean,
                    std_error: Some(est.std_error),
                    cap_hits: est.cap_hits,
                    gap: est.mean - partial,
                    fatou_ok,
                }
            }
        };
        rows.push(row);
    }
    Ok(ConvergenceReport {
        group: group.name().to_string(),
        truncation: kmax,
        partial_limit: partial,
        tail_bound: series.tail_bound,
        tail_method: series.tail_method,
        fatou_floor,
        rows,
    })
}

/// Exact mean depth of a uniform element of a finite table group.
pub fn uniform_expected_depth(
    table: alloc::sync::Arc<crate::quotients::FiniteGroupTable>,
) -> Result<Rational> {
    let order = table.order();
    let group = GroupDescriptor::finite(table);
    let mut engine = DepthEngine::new(&group)?;
    let mut total = Rational::ZERO;
    for x in 0..order as u32 {
        let d = engine.depth(&crate::groups::Element::FiniteIndex(x), order as u64 + 1)?;
        let v = d
            .value
            .exact()
            .expect("depth in a finite group is at most the order");
        total = total.add(&Rational::integer(v as i128));
    }
    Ok(total.div(&Rational::integer(order as i128)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotients::{lambda_table, LambdaEntry, Provenance};

    #[test]
    fn presumed_limit_integer_k10() {
        let t = lambda_table(&GroupDescriptor::integer(), 10).unwrap();
        let s = presumed_limit(&t);
        // 2 + 1/2 + 1/6 + 1/12 + 2/60 + 1/420 + 1/840 + 2/2520
        let expected = 2.0
            + 0.5
            + 1.0 / 6.0
            + 1.0 / 12.0
            + 2.0 / 60.0
            + 1.0 / 420.0
            + 1.0 / 840.0
            + 2.0 / 2520.0;
        assert!((s.value - expected).abs() < 1e-12);
        assert!((s.value - 2.7877).abs() < 1e-4);
        assert_eq!(s.tail_method, TailMethod::LcmTail);
        // the bound must dominate the actual tail; spot check 40 terms
        let ms = crate::quotients::lcm_sequence(50).unwrap();
        let actual_tail: f64 = (11..=50u64).map(|k| 1.0 / ms[(k - 2) as usize] as f64).sum();
        assert!(s.tail_bound >= actual_tail);
    }

    #[test]
    fn presumed_limit_truncation_one_is_exactly_two() {
        let t = lambda_table(&GroupDescriptor::integer(), 1).unwrap();
        assert!(t.entries.is_empty());
        let s = presumed_limit(&t);
        assert_eq!(s.value, 2.0);
    }

    #[test]
    fn presumed_limit_lattice_k6() {
        let t = lambda_table(&GroupDescriptor::lattice(2), 6).unwrap();
        let s = presumed_limit(&t);
        let expected = 2.0 + 0.25 + 1.0 / 36.0 + 1.0 / 144.0 + 2.0 / 3600.0;
        assert!((s.value - expected).abs() < 1e-12);
        assert_eq!(s.tail_method, TailMethod::Geometric);
    }

    #[test]
    fn consecutive_truncations_differ_by_one_term() {
        for k in 2..=11u64 {
            let a = presumed_limit(&lambda_table(&GroupDescriptor::integer(), k).unwrap());
            let b = presumed_limit(&lambda_table(&GroupDescriptor::integer(), k + 1).unwrap());
            let m_next = crate::quotients::lcm_value(k + 1).unwrap() as f64;
            assert!((b.value - a.value - 1.0 / m_next).abs() < 1e-12, "K={k}");
        }
    }

    fn synthetic_table(indices: impl Iterator<Item = u128>) -> LambdaTable {
        let entries: Vec<LambdaEntry> = indices
            .enumerate()
            .map(|(i, index)| LambdaEntry {
                k: i as u64 + 2,
                index,
                provenance: Provenance::Enumeration,
            })
            .collect();
        LambdaTable {
            group: "synthetic".into(),
            truncation: entries.len() as u64 + 1,
            entries,
            tail: crate::quotients::TailRule::Unknown,
        }
    }

    #[test]
    fn divergence_flag_examples() {
        // harmonic: [G:Λ_k] = k diverges and is flagged
        let harmonic = synthetic_table((2..=2000u128).map(|k| k));
        let d = divergence_flag(&harmonic, 4.0);
        assert!(d.flagged);
        // geometric: [G:Λ_k] = 2^k converges and is not flagged
        let geometric = synthetic_table((2..=60u128).map(|k| 1u128 << k.min(100)));
        let d = divergence_flag(&geometric, 4.0);
        assert!(!d.flagged);
        // the true lcm table decays super-fast and is not flagged
        let t = lambda_table(&GroupDescriptor::integer(), 12).unwrap();
        let d = divergence_flag(&t, 1.0);
        assert!(!d.flagged);
    }

    #[test]
    fn integer_convergence_report_small_grid() {
        let report = convergence_report(
            &GroupDescriptor::integer(),
            &[1, 10, 100],
            0,
            8,
            7,
            16,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 3);
        // E[D(X_1)] = 1, far below the truncated series: approach from below
        assert!((report.rows[0].estimate - 1.0).abs() < 1e-12);
        assert!(report.rows[0].estimate < report.partial_limit);
        // the rigorous lower-bound check holds at every n
        assert_eq!(report.fatou_violations(), 0);
        // estimates increase toward the series value on this grid
        assert!(report.rows[1].estimate > report.rows[0].estimate);
        assert!(report.rows[2].estimate > report.rows[1].estimate);
    }

    #[test]
    fn defect_bound_decays() {
        // at K=5 the slowest cyclic factor is mod 60, which has relaxed by
        // n = 10^4; larger K keeps slow mod-m_k factors in the bound
        let d1 = integer_defect_bound(100, 5).unwrap();
        let d2 = integer_defect_bound(10_000, 5).unwrap();
        assert!(d2 < d1);
        assert!(d2 < 0.05);
        let wide = integer_defect_bound(10_000, 8).unwrap();
        assert!(wide > d2); // the mod-420 and mod-840 terms are still large
    }

    /// Summation-swap identity at finite level, exactly as rationals: with
    /// `μ(A) = |A|/|G|` and `Λ_0 = Λ_1 = G`,
    /// `Σ_k k·(μ(Λ_{k-1}) − μ(Λ_k)) = Σ_ℓ (μ(Λ_ℓ) − 1/|G|)`,
    /// and both equal the mean depth of a uniform element.
    #[test]
    fn residual_average_summation_swap() {
        use crate::quotients::{finite_lambda_subgroups, FiniteGroupTable};
        use alloc::sync::Arc;

        let tables = alloc::vec![
            Arc::new(FiniteGroupTable::cyclic(6)),
            Arc::new(FiniteGroupTable::heisenberg_mod(2).unwrap()),
            Arc::new(
                FiniteGroupTable::direct_product(
                    &FiniteGroupTable::cyclic(4),
                    &FiniteGroupTable::cyclic(6),
                )
                .unwrap()
            ),
        ];
        for table in tables {
            let order = table.order() as u64;
            let g = Rational::integer(order as i128);
            // Λ_k stabilizes to {e} once k reaches the order
            let lambdas = finite_lambda_subgroups(&table, order + 1).unwrap();
            let mu = |k: u64| -> Rational {
                if k <= 1 {
                    Rational::ONE
                } else {
                    Rational::new(
                        lambdas[(k - 2) as usize].order() as i128,
                        order as i128,
                    )
                }
            };
            let mut weighted = Rational::ZERO;
            let mut flat = Rational::ZERO;
            for k in 1..=order + 1 {
                let diff = mu(k - 1).sub(&mu(k));
                weighted = weighted.add(&diff.scale(k as i128));
            }
            for l in 0..=order + 1 {
                flat = flat.add(&mu(l).sub(&Rational::ONE.div(&g)));
            }
            let direct = uniform_expected_depth(table).unwrap();
            assert_eq!(weighted, flat);
            assert_eq!(weighted, direct);
        }
    }
}
