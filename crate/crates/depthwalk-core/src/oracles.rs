//! Independent reference implementations used by the test suites.
//!
//! Nothing in the library proper may depend on this module: every function
//! here exists to cross-check a production code path by a different route
//! (exhaustive enumeration, closed forms, brute force). Compiled only for
//! tests and for dependents that opt into the `oracles` feature.

use alloc::vec::Vec;

/// A finite-index sublattice of `Z^d` (`d` = 2 or 3) in row Hermite normal
/// form. For `d = 2` the rows are `(a, b), (0, c)` with `0 <= b < c`; for
/// `d = 3` they are `(a, b, c), (0, d, e), (0, 0, f)` with the entries
/// above each pivot reduced modulo the pivot below them.
#[derive(Debug, Clone)]
pub struct HnfLattice {
    pub index: u64,
    rows: Vec<Vec<i64>>,
}

impl HnfLattice {
    pub fn contains(&self, v: &[i64]) -> bool {
        // back-substitute through the triangular basis
        let d = self.rows.len();
        assert_eq!(v.len(), d);
        let mut rem: Vec<i64> = v.to_vec();
        for i in 0..d {
            let pivot = self.rows[i][i];
            if rem[i] % pivot != 0 {
                return false;
            }
            let q = rem[i] / pivot;
            for j in i..d {
                rem[j] -= q * self.rows[i][j];
            }
        }
        rem.iter().all(|&x| x == 0)
    }
}

/// Every sublattice of `Z^d` of index between 1 and `max_index`, sorted by
/// index. The count for fixed index `i` in `Z^2` is the divisor sum
/// `σ(i)`, which the tests verify.
pub fn hnf_sublattices(d: usize, max_index: u64) -> Vec<HnfLattice> {
    let mut out = Vec::new();
    match d {
        2 => {
            for a in 1..=max_index as i64 {
                for c in 1..=max_index as i64 / a {
                    for b in 0..c {
                        out.push(HnfLattice {
                            index: (a * c) as u64,
                            rows: alloc::vec![alloc::vec![a, b], alloc::vec![0, c]],
                        });
                    }
                }
            }
        }
        3 => {
            for a in 1..=max_index as i64 {
                for dd in 1..=max_index as i64 / a {
                    for f in 1..=max_index as i64 / (a * dd) {
                        for b in 0..dd {
                            for c in 0..f {
                                for e in 0..f {
                                    out.push(HnfLattice {
                                        index: (a * dd * f) as u64,
                                        rows: alloc::vec![
                                            alloc::vec![a, b, c],
                                            alloc::vec![0, dd, e],
                                            alloc::vec![0, 0, f],
                                        ],
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => panic!("hnf_sublattices supports d = 2 or 3"),
    }
    out.sort_by_key(|l| l.index);
    out
}

/// Smallest index `<= max(enumerated)` of a sublattice avoiding `v`, or
/// `None` when every enumerated sublattice contains `v`.
pub fn lattice_depth_via_hnf(lattices: &[HnfLattice], v: &[i64]) -> Option<u64> {
    lattices
        .iter()
        .filter(|l| !l.contains(v))
        .map(|l| l.index)
        .min()
}

/// Eigenvalues of the lazy `±1` walk operator on `Z/m`, by the circulant
/// closed form `1/2 + 1/2·cos(2πj/m)`, sorted descending.
pub fn lazy_cycle_eigenvalues(m: u64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..m)
        .map(|j| 0.5 + 0.5 * libm::cos(2.0 * core::f64::consts::PI * j as f64 / m as f64))
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Mass at the origin of the lazy 4-generator walk on `(Z/m)^2` after `n`
/// steps, by the two-dimensional discrete Fourier closed form: the
/// characters diagonalize the walk with eigenvalues
/// `1/2 + 1/4·cos(2πr/m) + 1/4·cos(2πs/m)`.
pub fn lazy_lattice2_zero_mass(m: u64, n: u64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI / m as f64;
    let mut acc = 0.0;
    for r in 0..m {
        let cr = libm::cos(tau * r as f64);
        for s in 0..m {
            let mu = 0.5 + 0.25 * cr + 0.25 * libm::cos(tau * s as f64);
            acc += libm::pow(mu, n as f64);
        }
    }
    acc / (m * m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(n: u64) -> u64 {
        (1..=n).filter(|d| n % d == 0).sum()
    }

    #[test]
    fn hnf_counts_match_divisor_sums() {
        let lattices = hnf_sublattices(2, 12);
        for i in 1..=12u64 {
            let count = lattices.iter().filter(|l| l.index == i).count() as u64;
            assert_eq!(count, sigma(i), "index {i}");
        }
        // Z^3: seven sublattices of index 2 (p^2 + p + 1 at p = 2)
        let l3 = hnf_sublattices(3, 2);
        assert_eq!(l3.iter().filter(|l| l.index == 2).count(), 7);
    }

    #[test]
    fn hnf_membership_basics() {
        let lattices = hnf_sublattices(2, 6);
        // (mZ)^2 appears and contains exactly the coordinatewise multiples
        let diag2 = lattices
            .iter()
            .find(|l| l.index == 4 && l.contains(&[2, 0]) && l.contains(&[0, 2]) && !l.contains(&[1, 1]))
            .unwrap();
        assert!(diag2.contains(&[-4, 6]));
        assert!(!diag2.contains(&[2, 1]));
    }

    #[test]
    fn lattice2_dft_matches_direct_pushforward() {
        // cross-check the closed form against the generic quotient
        // distribution on a small case
        let map = crate::quotients::QuotientMap::lattice_mod(2, 6).unwrap();
        for n in [0u64, 1, 5, 40] {
            let d = crate::walks::exact_quotient_distribution(&map, n).unwrap();
            let direct = d.identity_mass();
            let dft = lazy_lattice2_zero_mass(6, n);
            assert!((direct - dft).abs() < 1e-12, "n={n}: {direct} vs {dft}");
        }
    }
}
