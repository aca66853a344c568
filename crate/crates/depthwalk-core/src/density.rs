//! Ball enumeration, asymptotic density ratios, and the rank-two free
//! group's closed forms.
//!
//! Balls are breadth-first layers in the word metric of the generating set.
//! For the free group the layers are produced by non-backtracking extension
//! (reduced words of length `ℓ+1` correspond bijectively to reduced words of
//! length `ℓ` with a non-cancelling letter appended), so no deduplication is
//! needed; every other family deduplicates against the visited set. All
//! census ratios are exact rationals; floats appear only in reports.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::{Element, Family, GroupDescriptor};
use crate::rational::Rational;

/// Default budget on the total number of enumerated elements.
pub const BALL_BUDGET: usize = 2_000_000;

/// One radius of a census: cumulative ball size, hits of the target subset,
/// and their exact ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallCensus {
    pub radius: u64,
    pub ball_size: u64,
    pub subset_count: u64,
    pub ratio: Rational,
}

/// Named element predicates, composable across families and reused by the
/// depth and density checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementPredicate {
    /// Reduced word length is even (free group).
    EvenWordLength,
    /// Membership in `mZ` (integers).
    MultipleOf(u64),
    /// Every coordinate divisible by `m` (integers, lattices, Heisenberg;
    /// on pairs, both components).
    CongruenceKernel(u64),
}

impl ElementPredicate {
    pub fn eval(&self, g: &Element) -> Result<bool> {
        match (self, g) {
            (ElementPredicate::EvenWordLength, Element::FreeWord(w)) => Ok(w.len() % 2 == 0),
            (ElementPredicate::MultipleOf(m), Element::Integer(v)) => {
                Ok(v.rem_euclid(*m as i64) == 0)
            }
            (ElementPredicate::CongruenceKernel(m), Element::Integer(v)) => {
                Ok(v.rem_euclid(*m as i64) == 0)
            }
            (ElementPredicate::CongruenceKernel(m), Element::Lattice(v)) => {
                Ok(v.iter().all(|c| c.rem_euclid(*m as i64) == 0))
            }
            (ElementPredicate::CongruenceKernel(m), Element::Heisenberg(x, y, z)) => {
                Ok([x, y, z].iter().all(|c| c.rem_euclid(*m as i64) == 0))
            }
            (ElementPredicate::CongruenceKernel(_), Element::Pair(a, b)) => {
                Ok(self.eval(a)? && self.eval(b)?)
            }
            _ => Err(Error::usage(format!(
                "predicate {self:?} does not apply to {g:?}"
            ))),
        }
    }

    pub fn name(&self) -> alloc::string::String {
        match self {
            ElementPredicate::EvenWordLength => "even".into(),
            ElementPredicate::MultipleOf(m) => format!("mod:{m}"),
            ElementPredicate::CongruenceKernel(m) => format!("kernel:{m}"),
        }
    }
}

/// Breadth-first layers of the ball of the given radius: `layers[r]` holds
/// exactly the elements at word distance `r`.
pub fn ball_elements(
    group: &GroupDescriptor,
    radius: u64,
    budget: usize,
) -> Result<Vec<Vec<Element>>> {
    if let Family::FreeRank2 = group.family() {
        return free_ball_elements(group, radius, budget);
    }
    let mut layers: Vec<Vec<Element>> = Vec::new();
    let mut seen: BTreeSet<Element> = BTreeSet::new();
    let e = group.identity();
    seen.insert(e.clone());
    layers.push(alloc::vec![e]);
    for r in 1..=radius {
        let mut next: Vec<Element> = Vec::new();
        for x in &layers[(r - 1) as usize] {
            for s in group.generators() {
                let y = group.multiply(x, s)?;
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        if seen.len() > budget {
            return Err(Error::capacity(format!(
                "ball enumeration budget {budget} exceeded at radius {r} \
                 ({} elements so far)",
                seen.len()
            )));
        }
        if next.is_empty() {
            // finite group exhausted; remaining layers are empty
            layers.push(next);
            for _ in r + 1..=radius {
                layers.push(Vec::new());
            }
            return Ok(layers);
        }
        next.sort();
        layers.push(next);
    }
    Ok(layers)
}

fn free_ball_elements(
    group: &GroupDescriptor,
    radius: u64,
    budget: usize,
) -> Result<Vec<Vec<Element>>> {
    let mut layers: Vec<Vec<Element>> = alloc::vec![alloc::vec![group.identity()]];
    let mut total = 1usize;
    for r in 1..=radius {
        let prev = &layers[(r - 1) as usize];
        let mut next = Vec::with_capacity(prev.len() * 3 + 1);
        for x in prev {
            let w = match x {
                Element::FreeWord(w) => w,
                _ => unreachable!(),
            };
            for l in [1i8, -1, 2, -2] {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut next_word = Vec::with_capacity(w.len() + 1);
                next_word.extend_from_slice(w);
                next_word.push(l);
                next.push(Element::FreeWord(next_word));
            }
        }
        total += next.len();
        if total > budget {
            return Err(Error::capacity(format!(
                "ball enumeration budget {budget} exceeded at radius {r}"
            )));
        }
        layers.push(next);
    }
    Ok(layers)
}

/// Cumulative census of a predicate over balls of radius `0..=radius`.
pub fn ball_census(
    group: &GroupDescriptor,
    predicate: ElementPredicate,
    radius: u64,
    budget: usize,
) -> Result<Vec<BallCensus>> {
    let layers = ball_elements(group, radius, budget)?;
    let mut out = Vec::with_capacity(layers.len());
    let mut ball = 0u64;
    let mut hits = 0u64;
    for (r, layer) in layers.iter().enumerate() {
        ball += layer.len() as u64;
        for g in layer {
            if predicate.eval(g)? {
                hits += 1;
            }
        }
        out.push(BallCensus {
            radius: r as u64,
            ball_size: ball,
            subset_count: hits,
            ratio: Rational::new(hits as i128, ball as i128),
        });
    }
    Ok(out)
}

/// `|X ∩ B(n)| / |B(n)|` as an exact rational.
pub fn density_ratio(
    group: &GroupDescriptor,
    predicate: ElementPredicate,
    radius: u64,
    budget: usize,
) -> Result<Rational> {
    let census = ball_census(group, predicate, radius, budget)?;
    Ok(census
        .last()
        .expect("census always has the radius-0 row")
        .ratio)
}

/// Closed forms for the rank-two free group with `S = {a, b, a^-1, b^-1}`:
/// ball size `2·3^n − 1` and the even-word-length density
/// `(3^{n+1} − 1)/(4·3^n − 2)` for even `n`, `(3^n − 1)/(4·3^n − 2)` for odd
/// `n`. The even/odd subsequences approach 3/4 and 1/4, so the density
/// ratio oscillates and has no limit.
pub fn free_group_closed_forms(n: u64) -> Result<(u128, Rational)> {
    if n > 60 {
        return Err(Error::capacity("free-group closed forms support n <= 60"));
    }
    let pow3 = 3i128.pow(n as u32);
    let ball = (2 * pow3 - 1) as u128;
    let ratio = if n % 2 == 0 {
        Rational::new(3 * pow3 - 1, 4 * pow3 - 2)
    } else {
        Rational::new(pow3 - 1, 4 * pow3 - 2)
    };
    Ok((ball, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::make_direct_product;
    use crate::quotients::FiniteGroupTable;
    use alloc::sync::Arc;

    #[test]
    fn integer_ball_is_an_interval() {
        let z = GroupDescriptor::integer();
        let layers = ball_elements(&z, 7, 1000).unwrap();
        let sizes: Vec<usize> = layers.iter().map(|l| l.len()).collect();
        assert_eq!(sizes, alloc::vec![1, 2, 2, 2, 2, 2, 2, 2]);
        let total: usize = sizes.iter().sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn free_ball_sizes_match_closed_form() {
        let f2 = GroupDescriptor::free_rank2();
        let layers = ball_elements(&f2, 8, BALL_BUDGET).unwrap();
        let mut ball = 0u128;
        for (n, layer) in layers.iter().enumerate() {
            ball += layer.len() as u128;
            let (expected, _) = free_group_closed_forms(n as u64).unwrap();
            assert_eq!(ball, expected, "|B({n})|");
        }
        assert_eq!(layers[1].len(), 4);
        let (b1, _) = free_group_closed_forms(1).unwrap();
        assert_eq!(b1, 5);
        let (b2, _) = free_group_closed_forms(2).unwrap();
        assert_eq!(b2, 17);
    }

    #[test]
    fn free_even_density_matches_closed_forms_exactly() {
        let f2 = GroupDescriptor::free_rank2();
        let census = ball_census(&f2, ElementPredicate::EvenWordLength, 10, BALL_BUDGET).unwrap();
        for row in &census {
            let (ball, ratio) = free_group_closed_forms(row.radius).unwrap();
            assert_eq!(row.ball_size as u128, ball);
            assert_eq!(row.ratio, ratio, "radius {}", row.radius);
        }
        // quoted values: 13/17 at n=2, 13/53 at n=3, ratio 1 at n=0
        assert_eq!(census[2].ratio, Rational::new(13, 17));
        assert_eq!(census[3].ratio, Rational::new(13, 53));
        assert_eq!(census[0].ratio, Rational::ONE);
    }

    #[test]
    fn even_odd_subsequences_oscillate() {
        let (_, r10) = free_group_closed_forms(10).unwrap();
        let (_, r11) = free_group_closed_forms(11).unwrap();
        assert!((r10.to_f64() - 0.75).abs() < 0.01);
        assert!((r11.to_f64() - 0.25).abs() < 0.01);
    }

    #[test]
    fn integer_density_example() {
        let z = GroupDescriptor::integer();
        let r = density_ratio(&z, ElementPredicate::MultipleOf(2), 4, 1000).unwrap();
        // evens in [-4, 4]: {-4, -2, 0, 2, 4} out of 9
        assert_eq!(r, Rational::new(5, 9));
    }

    #[test]
    fn polynomial_growth_ratio_decreases_toward_one() {
        for group in [GroupDescriptor::lattice(2), GroupDescriptor::heisenberg()] {
            let radius = if matches!(group.family(), Family::Lattice(_)) {
                40
            } else {
                14
            };
            let layers = ball_elements(&group, radius, BALL_BUDGET).unwrap();
            let mut balls: Vec<f64> = Vec::new();
            let mut acc = 0f64;
            for l in &layers {
                acc += l.len() as f64;
                balls.push(acc);
            }
            let ratios: Vec<f64> = balls.windows(2).map(|w| w[1] / w[0]).collect();
            // trend check over the tested range: decreasing and approaching 1
            for i in 2..ratios.len() - 1 {
                assert!(
                    ratios[i + 1] <= ratios[i] + 1e-9,
                    "{}: ratio increased at radius {i}",
                    group.name()
                );
            }
            assert!(*ratios.last().unwrap() < 1.35);
            assert!(*ratios.last().unwrap() > 1.0);
        }
    }

    #[test]
    fn exponential_growth_ratio_stays_large() {
        let f2 = GroupDescriptor::free_rank2();
        let layers = ball_elements(&f2, 9, BALL_BUDGET).unwrap();
        let mut balls: Vec<f64> = Vec::new();
        let mut acc = 0f64;
        for l in &layers {
            acc += l.len() as f64;
            balls.push(acc);
        }
        for n in 3..balls.len() - 1 {
            assert!(balls[n + 1] / balls[n] >= 2.9, "ratio dipped at {n}");
        }
    }

    #[test]
    fn finite_product_ball_exhausts_the_group() {
        let z2 = GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(2)));
        let z3 = GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(3)));
        let p = make_direct_product(&z2, &z3);
        let layers = ball_elements(&p, 6, 1000).unwrap();
        let total: usize = layers.iter().map(|l| l.len()).sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn budget_exceeded_is_a_capacity_error() {
        let f2 = GroupDescriptor::free_rank2();
        match ball_elements(&f2, 12, 1000) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("budget")),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
