//! Lazy random walks: simulation, exact quotient distributions, exact
//! integer-walk probabilities and expected-depth estimation.
//!
//! The walk starts at the identity and at each step stays put with
//! probability 1/2, otherwise multiplies on the right by a uniform element
//! of the symmetric generating multiset. Exact distributions on finite
//! quotients are computed by pushing the probability vector through the
//! generator action (cost `n·|S|·order`), never by materializing a dense
//! transition matrix.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::depth::{DepthEngine, DepthValue};
use crate::error::{Error, Result};
use crate::groups::{Element, GroupDescriptor};
use crate::quotients::{CayleyAction, QuotientMap};
use crate::rational::Rational;
use crate::rng::StepStream;

/// The laziness probability is fixed: the transition operator is
/// `L = (1/2) I + (1/2) P`.
pub const LAZINESS: f64 = 0.5;

/// Default order cap for exact distribution iteration.
pub const ITERATION_ORDER_CAP: usize = 10_000;
/// Default step budget for the exact expected-depth evaluation.
pub const EXPECTED_DEPTH_STEP_BUDGET: u64 = 200_000;
/// Largest step count accepted by the exact rational routines.
pub const RATIONAL_STEP_CAP: u64 = 32;

/// A reproducible walk experiment: group, step count, master seed and trial
/// count. The laziness probability is [`LAZINESS`] and not configurable.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub group: GroupDescriptor,
    pub steps: u64,
    pub seed: u64,
    pub trials: u64,
}

/// Terminal state of one lazy walk driven by a counter-based stream.
pub fn simulate_lazy_walk(
    group: &GroupDescriptor,
    steps: u64,
    stream: &StepStream,
) -> Result<Element> {
    let gens = group.generators();
    let mut x = group.identity();
    for step in 0..steps {
        let (move_now, idx) = stream.coin_and_index(step, gens.len());
        if move_now {
            x = group.multiply(&x, &gens[idx])?;
        }
    }
    Ok(x)
}

/// Full trajectory `X_0, ..., X_n` of one lazy walk.
pub fn simulate_lazy_walk_trajectory(
    group: &GroupDescriptor,
    steps: u64,
    stream: &StepStream,
) -> Result<Vec<Element>> {
    let gens = group.generators();
    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut x = group.identity();
    out.push(x.clone());
    for step in 0..steps {
        let (move_now, idx) = stream.coin_and_index(step, gens.len());
        if move_now {
            x = group.multiply(&x, &gens[idx])?;
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Exact distribution of the walk pushed to a finite quotient.
#[derive(Debug, Clone)]
pub struct DistributionVector {
    quotient: String,
    identity: u32,
    step: u64,
    probs: Vec<f64>,
}

impl DistributionVector {
    pub fn quotient(&self) -> &str {
        &self.quotient
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(X_n ∈ N)`: the mass at the identity coset.
    pub fn identity_mass(&self) -> f64 {
        self.probs[self.identity as usize]
    }

    pub fn l2_distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += (p - u) * (p - u);
        }
        libm::sqrt(acc)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// One application of `L` to a distribution via the generator action.
/// `scratch` must have the same length as `p`; the result lands in `p`.
pub fn push_step(action: &CayleyAction, p: &mut Vec<f64>, scratch: &mut Vec<f64>) {
    let k = action.generator_count();
    let w = 0.5 / k as f64;
    scratch.clear();
    scratch.extend(p.iter().map(|&x| 0.5 * x));
    for s in 0..k {
        let t = action.target(s);
        for (v, q) in scratch.iter_mut().enumerate() {
            // S is a symmetric multiset, so summing p over x·s equals
            // summing over x·s^{-1}.
            *q += w * p[t[v] as usize];
        }
    }
    core::mem::swap(p, scratch);
}

pub fn exact_quotient_distribution(map: &QuotientMap, steps: u64) -> Result<DistributionVector> {
    exact_quotient_distribution_with_cap(map, steps, ITERATION_ORDER_CAP)
}

pub fn exact_quotient_distribution_with_cap(
    map: &QuotientMap,
    steps: u64,
    order_cap: usize,
) -> Result<DistributionVector> {
    let order = map.order()?;
    if order > order_cap {
        return Err(Error::capacity(format!(
            "quotient order {order} exceeds iteration cap {order_cap}"
        )));
    }
    let action = map.action()?;
    let mut p = alloc::vec![0.0; order];
    p[action.identity() as usize] = 1.0;
    let mut scratch = Vec::with_capacity(order);
    for _ in 0..steps {
        push_step(&action, &mut p, &mut scratch);
    }
    Ok(DistributionVector {
        quotient: map.name(),
        identity: action.identity(),
        step: steps,
        probs: p,
    })
}

/// Distribution of the lazy `±1` walk on `Z/m` after `n` steps, by the
/// cyclic pushforward recurrence (cost `n·m`).
pub fn cyclic_pushforward(m: u64, steps: u64) -> Vec<f64> {
    let m = m as usize;
    if m == 1 {
        return alloc::vec![1.0];
    }
    let mut p = alloc::vec![0.0; m];
    let mut q = alloc::vec![0.0; m];
    p[0] = 1.0;
    for _ in 0..steps {
        q[0] = 0.5 * p[0] + 0.25 * (p[m - 1] + p[1]);
        for j in 1..m - 1 {
            q[j] = 0.5 * p[j] + 0.25 * (p[j - 1] + p[j + 1]);
        }
        q[m - 1] = 0.5 * p[m - 1] + 0.25 * (p[m - 2] + p[0]);
        core::mem::swap(&mut p, &mut q);
    }
    p
}

/// `P(X_n = 0)` for the lazy `±1` walk on `Z`, via the trinomial sum
/// `sum_j C(n; j, j, n-2j) (1/4)^{2j} (1/2)^{n-2j}` evaluated in log space.
pub fn prob_zero_integer_walk(n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let lf = ln_factorials(n as usize);
    prob_zero_from_table(n as usize, &lf)
}

/// `P(X_n = 0)` for every `n <= nmax`, sharing one log-factorial table.
pub fn prob_zero_integer_walk_upto(nmax: u64) -> Vec<f64> {
    let lf = ln_factorials(nmax as usize);
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(1.0);
    for n in 1..=nmax as usize {
        out.push(prob_zero_from_table(n, &lf));
    }
    out
}

fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(|i| libm::lgamma(i as f64 + 1.0)).collect()
}

fn prob_zero_from_table(n: usize, lf: &[f64]) -> f64 {
    let ln2 = core::f64::consts::LN_2;
    let mut acc = 0.0;
    for j in 0..=n / 2 {
        acc += libm::exp(lf[n] - 2.0 * lf[j] - lf[n - 2 * j] - (n + 2 * j) as f64 * ln2);
    }
    acc
}

/// `P(X_n ∈ mZ \ {0})`: the mod-`m` pushforward mass at zero minus the
/// point mass at the origin. Exact up to floating-point rounding; tiny
/// negative cancellation residue is clamped to zero.
pub fn prob_multiple_integer_walk(n: u64, m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::usage("modulus must be at least 2"));
    }
    if m > n {
        // the walk's support is [-n, n]
        return Ok(0.0);
    }
    let mass0 = cyclic_pushforward(m, n)[0];
    Ok((mass0 - prob_zero_integer_walk(n)).max(0.0))
}

/// `sup_{1 <= n <= nmax} P(X_n ∈ mZ \ {0})`, sharing a precomputed table of
/// `P(X_n = 0)` values (as produced by [`prob_zero_integer_walk_upto`]).
pub fn sup_prob_multiple_upto(m: u64, nmax: u64, prob_zero: &[f64]) -> Result<f64> {
    if m < 2 {
        return Err(Error::usage("modulus must be at least 2"));
    }
    let mu = m as usize;
    let mut p = alloc::vec![0.0; mu];
    let mut q = alloc::vec![0.0; mu];
    p[0] = 1.0;
    let mut sup: f64 = 0.0;
    for n in 1..=nmax as usize {
        q[0] = 0.5 * p[0] + 0.25 * (p[mu - 1] + p[1 % mu]);
        for j in 1..mu - 1 {
            q[j] = 0.5 * p[j] + 0.25 * (p[j - 1] + p[j + 1]);
        }
        if mu > 1 {
            q[mu - 1] = 0.5 * p[mu - 1] + 0.25 * (p[mu - 2] + p[0]);
        }
        core::mem::swap(&mut p, &mut q);
        sup = sup.max(p[0] - prob_zero[n]);
    }
    Ok(sup.max(0.0))
}

/// Monte Carlo estimate of `E[depth(X_n)]` with per-trial counter streams.
#[derive(Debug, Clone)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    /// Trials whose depth exceeded the cap; they contribute `cap + 1` to
    /// the mean, which is therefore a lower bound when this is nonzero.
    pub cap_hits: u64,
    pub cap: u64,
}

pub fn monte_carlo_expected_depth(cfg: &WalkConfig, cap: u64) -> Result<MonteCarloEstimate> {
    if cfg.trials == 0 {
        return Err(Error::usage("at least one trial is required"));
    }
    let mut engine = DepthEngine::new(&cfg.group)?;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut cap_hits = 0u64;
    for trial in 0..cfg.trials {
        let stream = StepStream::new(cfg.seed, trial);
        let x = simulate_lazy_walk(&cfg.group, cfg.steps, &stream)?;
        let v = match engine.depth(&x, cap)?.value {
            DepthValue::Exact(v) => v as f64,
            DepthValue::ExceedsCap { .. } => {
                cap_hits += 1;
                (cap + 1) as f64
            }
        };
        sum += v;
        sumsq += v * v;
    }
    let t = cfg.trials as f64;
    let mean = sum / t;
    let std_error = if cfg.trials >= 2 {
        let var = ((sumsq - t * mean * mean) / (t - 1.0)).max(0.0);
        libm::sqrt(var / t)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        trials: cfg.trials,
        cap_hits,
        cap,
    })
}

/// Exact `E[D_Z(X_n)]` for the lazy `±1` walk:
/// `2·P(X_n != 0) + sum_{k >= 2, m_k <= n} P(X_n ∈ m_k Z \ {0})`.
/// Terms with `m_k > n` vanish by the support bound.
pub fn exact_expected_depth_integer(n: u64) -> Result<f64> {
    if n > EXPECTED_DEPTH_STEP_BUDGET {
        return Err(Error::capacity(format!(
            "step count {n} exceeds the exact expected-depth budget {EXPECTED_DEPTH_STEP_BUDGET}"
        )));
    }
    let p0 = prob_zero_integer_walk(n);
    let mut total = 2.0 * (1.0 - p0);
    let mut mass_cache: BTreeMap<u64, f64> = BTreeMap::new();
    for m in active_moduli(n) {
        let mass0 = *mass_cache
            .entry(m)
            .or_insert_with(|| cyclic_pushforward(m, n)[0]);
        total += (mass0 - p0).max(0.0);
    }
    Ok(total)
}

/// `m_k` for every `k >= 2` with `m_k <= n`, with multiplicity in `k`.
pub(crate) fn active_moduli(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m: u128 = 1;
    let mut k: u128 = 2;
    loop {
        let g = gcd_u128(m, k);
        m = m / g * k;
        if m > n as u128 {
            break;
        }
        out.push(m as u64);
        k += 1;
    }
    out
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Exact rational routines for small step counts. These power the identity
/// checks between the series route and direct path enumeration.
pub mod exact_rational {
    use super::*;

    fn check_steps(n: u64) -> Result<usize> {
        if n > RATIONAL_STEP_CAP {
            Err(Error::capacity(format!(
                "rational walk routines accept at most {RATIONAL_STEP_CAP} steps"
            )))
        } else {
            Ok(n as usize)
        }
    }

    /// Distribution of `X_n` on `[-n, n]` as exact rationals, by stepping
    /// the full path measure (stay 1/2, move ±1 with 1/4 each).
    pub fn walk_distribution(n: u64) -> Result<Vec<(i64, Rational)>> {
        let n = check_steps(n)?;
        let size = 2 * n + 1;
        let half = Rational::new(1, 2);
        let quarter = Rational::new(1, 4);
        let mut p = alloc::vec![Rational::ZERO; size];
        p[n] = Rational::ONE;
        let mut q = alloc::vec![Rational::ZERO; size];
        for _ in 0..n {
            for (i, slot) in q.iter_mut().enumerate() {
                let mut acc = p[i].mul(&half);
                if i > 0 {
                    acc = acc.add(&p[i - 1].mul(&quarter));
                }
                if i + 1 < size {
                    acc = acc.add(&p[i + 1].mul(&quarter));
                }
                *slot = acc;
            }
            core::mem::swap(&mut p, &mut q);
        }
        Ok(p
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i as i64 - n as i64, r))
            .collect())
    }

    /// `P(X_n = 0)` as an exact rational via the trinomial sum.
    pub fn prob_zero(n: u64) -> Result<Rational> {
        let n = check_steps(n)?;
        let mut total = Rational::ZERO;
        for j in 0..=n / 2 {
            // C(n, 2j)·C(2j, j) counts the placements of j up-steps and
            // j down-steps among n slots.
            let ways = binomial(n, 2 * j) * binomial(2 * j, j);
            let weight = Rational::new(
                 2i128.pow((n - 2 * j) as u32),
                 4i128.pow(n as u32),
            );
            total = total.add(&weight.scale(ways));
        }
        Ok(total)
    }

    fn binomial(n: usize, k: usize) -> i128 {
        if k > n {
            return 0;
        }
        let mut acc: i128 = 1;
        for i in 0..k.min(n - k) {
            acc = acc * (n - i) as i128 / (i as i128 + 1);
        }
        acc
    }

    /// Mod-`m` pushforward distribution as exact rationals.
    pub fn cyclic_pushforward(m: u64, n: u64) -> Result<Vec<Rational>> {
        let n = check_steps(n)?;
        let m = m as usize;
        let half = Rational::new(1, 2);
        let quarter = Rational::new(1, 4);
        if m == 1 {
            return Ok(alloc::vec![Rational::ONE]);
        }
        let mut p = alloc::vec![Rational::ZERO; m];
        p[0] = Rational::ONE;
        let mut q = alloc::vec![Rational::ZERO; m];
        for _ in 0..n {
            for j in 0..m {
                let left = p[(j + m - 1) % m].mul(&quarter);
                let right = p[(j + 1) % m].mul(&quarter);
                q[j] = p[j].mul(&half).add(&left).add(&right);
            }
            core::mem::swap(&mut p, &mut q);
        }
        Ok(p)
    }

    /// Series route: `2·P(X_n != 0) + sum_k P(X_n ∈ m_k Z \ {0})`, exact.
    pub fn expected_depth_series(n: u64) -> Result<Rational> {
        check_steps(n)?;
        let p0 = prob_zero(n)?;
        let mut total = Rational::integer(2).mul(&Rational::ONE.sub(&p0));
        for m in active_moduli(n) {
            let mass0 = cyclic_pushforward(m, n)?[0];
            total = total.add(&mass0.sub(&p0));
        }
        Ok(total)
    }

    /// Oracle route: `E[D(X_n)] = sum_x P(X_n = x)·D_Z(x)` from the full
    /// enumerated path distribution.
    pub fn expected_depth_direct(n: u64) -> Result<Rational> {
        let dist = walk_distribution(n)?;
        let mut total = Rational::ZERO;
        for (x, p) in dist {
            if x != 0 {
                let d = crate::depth::smallest_non_divisor(x);
                total = total.add(&p.scale(d as i128));
            }
        }
        Ok(total)
    }
}
