//! The depth function `D_G` and residual finiteness growth `F_G^S`.
//!
//! `D_G(g)` is the smallest order of a finite quotient of `G` in which `g`
//! survives, with `D_G(e) = 0` by convention. Each family has its own exact
//! method:
//!
//! * `Z`: the smallest integer `m >= 2` not dividing `g`.
//! * `Z^d`: the same formula applied to the gcd of the coordinates; a
//!   coordinate projection mod that value detects the element.
//! * finite tables: scan the enumerated normal subgroups.
//! * Heisenberg: scan congruence levels. A quotient of order `q` factors
//!   through `H(Z/q)` (see [`crate::quotients::HeisenbergLambda`]), and any
//!   detection of index `i` is already visible at level `i`, so scanning
//!   prime-power levels in increasing order and stopping once the level
//!   exceeds the best index found is exact.
//! * products: the minimum of the component depths over non-identity
//!   components. The upper direction embeds a detecting quotient of a
//!   factor; for the lower direction, a quotient detecting `(g1, g2)` must
//!   keep one of `(g1, e)`, `(e, g2)` alive, and restricting to that factor
//!   detects the component with no larger index. Validated against
//!   enumeration oracles in the test suites.
//! * free group: only the index-2 parity detection is exposed; even-length
//!   words report "exceeds cap".
//!
//! Searches are capped: a result is either exact (`<= cap`) or an explicit
//! "exceeds cap", optionally with the best upper bound found.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::density;
use crate::error::{Error, Result};
use crate::groups::{Element, Family, GroupDescriptor};
use crate::quotients::{
    enumerate_normal_subgroups, heisenberg_prime_power, FiniteGroupTable, HeisenbergPrimePower,
    NormalSubgroup, MAX_TABLE_ORDER,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DepthValue {
    Exact(u64),
    ExceedsCap { cap: u64, upper_bound: Option<u64> },
}

impl DepthValue {
    /// Whether `depth > k`, when decidable from this result.
    pub fn greater_than(&self, k: u64) -> Option<bool> {
        match self {
            DepthValue::Exact(v) => Some(*v > k),
            DepthValue::ExceedsCap { cap, .. } => {
                if k <= *cap {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match self {
            DepthValue::Exact(v) => Some(*v),
            DepthValue::ExceedsCap { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthMethod {
    Formula,
    Enumeration,
    Congruence,
    ProductRule,
}

impl DepthMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DepthMethod::Formula => "formula",
            DepthMethod::Enumeration => "enumeration",
            DepthMethod::Congruence => "congruence",
            DepthMethod::ProductRule => "product-rule",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DepthResult {
    pub value: DepthValue,
    pub witness: Option<String>,
    pub method: DepthMethod,
}

impl DepthResult {
    fn exact(v: u64, witness: Option<String>, method: DepthMethod) -> DepthResult {
        DepthResult {
            value: DepthValue::Exact(v),
            witness,
            method,
        }
    }
}

/// Smallest `m >= 2` that does not divide `v` (`v != 0`).
pub fn smallest_non_divisor(v: i64) -> u64 {
    debug_assert!(v != 0);
    let v = v.unsigned_abs();
    let mut m = 2u64;
    while v % m == 0 {
        m += 1;
    }
    m
}

/// Depth computations for one group, with the per-family data (enumerated
/// normal subgroups, congruence levels) built once and reused across calls.
pub struct DepthEngine {
    group: GroupDescriptor,
    finite: Option<(Arc<FiniteGroupTable>, Vec<NormalSubgroup>)>,
    congruence_levels: BTreeMap<u64, Arc<HeisenbergPrimePower>>,
    components: Option<(Box<DepthEngine>, Box<DepthEngine>)>,
}

impl DepthEngine {
    pub fn new(group: &GroupDescriptor) -> Result<DepthEngine> {
        let finite = match group.family() {
            Family::FiniteTable(t) => {
                let normals = enumerate_normal_subgroups(t)?;
                Some((t.clone(), normals))
            }
            _ => None,
        };
        let components = match group.family() {
            Family::Product(a, b) => Some((
                Box::new(DepthEngine::new(a)?),
                Box::new(DepthEngine::new(b)?),
            )),
            _ => None,
        };
        Ok(DepthEngine {
            group: group.clone(),
            finite,
            congruence_levels: BTreeMap::new(),
            components,
        })
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn depth(&mut self, g: &Element, cap: u64) -> Result<DepthResult> {
        if cap < 2 {
            return Err(Error::usage("depth cap must be at least 2"));
        }
        self.group.validate(g)?;
        if *g == self.group.identity() {
            return Ok(DepthResult::exact(0, None, DepthMethod::Formula));
        }
        match (self.group.family().clone(), g) {
            (Family::Integer, Element::Integer(v)) => Ok(integer_depth(*v, cap)),
            (Family::Lattice(_), Element::Lattice(coords)) => Ok(lattice_depth(coords, cap)),
            (Family::FiniteTable(_), Element::FiniteIndex(i)) => {
                let (table, normals) = self.finite.as_ref().expect("prepared in new()");
                Ok(finite_depth(table, normals, *i, cap))
            }
            (Family::Heisenberg, Element::Heisenberg(..)) => self.heisenberg_depth(g, cap),
            (Family::Product(..), Element::Pair(a, b)) => {
                let (ea, eb) = self.components.as_mut().expect("prepared in new()");
                product_rule(ea, eb, a, b, cap)
            }
            (Family::FreeRank2, Element::FreeWord(w)) => {
                if w.len() % 2 == 1 {
                    Ok(DepthResult::exact(
                        2,
                        Some(String::from("word-length parity mod 2")),
                        DepthMethod::Formula,
                    ))
                } else {
                    Ok(DepthResult {
                        value: DepthValue::ExceedsCap {
                            cap,
                            upper_bound: None,
                        },
                        witness: None,
                        method: DepthMethod::Formula,
                    })
                }
            }
            _ => Err(Error::usage("element does not match group family")),
        }
    }

    fn heisenberg_depth(&mut self, g: &Element, cap: u64) -> Result<DepthResult> {
        let (x, y, z) = match g {
            Element::Heisenberg(x, y, z) => (*x, *y, *z),
            _ => unreachable!(),
        };
        let mut best: u64 = u64::MAX;
        let mut witness: Option<String> = None;
        for q in 2..=cap {
            if q >= best {
                break;
            }
            if !is_prime_power(q) {
                continue;
            }
            let (xq, yq, zq) = (
                x.rem_euclid(q as i64) as u64,
                y.rem_euclid(q as i64) as u64,
                z.rem_euclid(q as i64) as u64,
            );
            if (xq, yq, zq) == (0, 0, 0) {
                continue;
            }
            if q.pow(3) > MAX_TABLE_ORDER as u64 {
                return Err(Error::capacity(format!(
                    "Heisenberg depth scan needs the H(Z/{q}) table, above the enumeration cap; \
                     use a cap of at most 17"
                )));
            }
            let data = match self.congruence_levels.get(&q) {
                Some(d) => d.clone(),
                None => {
                    let d = heisenberg_prime_power(q)?;
                    self.congruence_levels.insert(q, d.clone());
                    d
                }
            };
            let idx = ((xq * q + yq) * q + zq) as u32;
            for n in &data.normals {
                if (n.index() as u64) < best && !n.contains(idx) {
                    best = n.index() as u64;
                    witness = Some(format!(
                        "H(Z/{q}) quotient of order {} (kernel order {})",
                        n.index(),
                        n.order()
                    ));
                }
            }
        }
        if best <= cap {
            Ok(DepthResult {
                value: DepthValue::Exact(best),
                witness,
                method: DepthMethod::Congruence,
            })
        } else {
            Ok(DepthResult {
                value: DepthValue::ExceedsCap {
                    cap,
                    upper_bound: (best != u64::MAX).then_some(best),
                },
                witness: None,
                method: DepthMethod::Congruence,
            })
        }
    }
}

fn integer_depth(v: i64, cap: u64) -> DepthResult {
    let m = smallest_non_divisor(v);
    if m <= cap {
        DepthResult::exact(m, Some(format!("Z/{m}")), DepthMethod::Formula)
    } else {
        DepthResult {
            value: DepthValue::ExceedsCap {
                cap,
                upper_bound: Some(m),
            },
            witness: None,
            method: DepthMethod::Formula,
        }
    }
}

fn lattice_depth(coords: &[i64], cap: u64) -> DepthResult {
    let mut g: i64 = 0;
    for &c in coords {
        g = gcd_i64(g, c);
    }
    debug_assert!(g != 0);
    let m = smallest_non_divisor(g);
    // Some coordinate is not divisible by m: project onto it.
    let coord = coords
        .iter()
        .position(|&c| c.rem_euclid(m as i64) != 0)
        .expect("gcd guarantees a detecting coordinate");
    if m <= cap {
        DepthResult::exact(
            m,
            Some(format!("coordinate {coord} mod {m}")),
            DepthMethod::Formula,
        )
    } else {
        DepthResult {
            value: DepthValue::ExceedsCap {
                cap,
                upper_bound: Some(m),
            },
            witness: None,
            method: DepthMethod::Formula,
        }
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn is_prime_power(n: u64) -> bool {
    crate::quotients::factor_u64(n).len() == 1
}

fn finite_depth(
    table: &FiniteGroupTable,
    normals: &[NormalSubgroup],
    element: u32,
    cap: u64,
) -> DepthResult {
    // `normals` is sorted by (order, members); scanning in order and keeping
    // the first strict improvement realizes the lexicographic tie-break
    // among detecting subgroups of the minimal index.
    let mut best: Option<&NormalSubgroup> = None;
    for n in normals {
        if !n.contains(element) && best.map_or(true, |b| n.index() < b.index()) {
            best = Some(n);
        }
    }
    let best = best.expect("the trivial subgroup detects every non-identity element");
    let value = best.index() as u64;
    if value <= cap {
        let members: Vec<String> = best
            .members()
            .iter()
            .map(|&m| format!("{}", m))
            .collect();
        DepthResult::exact(
            value,
            Some(format!(
                "{}: index-{} normal subgroup {{{}}}",
                table.name(),
                best.index(),
                members.join(",")
            )),
            DepthMethod::Enumeration,
        )
    } else {
        DepthResult {
            value: DepthValue::ExceedsCap {
                cap,
                upper_bound: Some(value),
            },
            witness: None,
            method: DepthMethod::Enumeration,
        }
    }
}

fn product_rule(
    left: &mut DepthEngine,
    right: &mut DepthEngine,
    g1: &Element,
    g2: &Element,
    cap: u64,
) -> Result<DepthResult> {
    let e1 = left.group().identity();
    let e2 = right.group().identity();
    let d1 = if *g1 != e1 {
        Some(left.depth(g1, cap)?)
    } else {
        None
    };
    let d2 = if *g2 != e2 {
        Some(right.depth(g2, cap)?)
    } else {
        None
    };
    let tag = |side: &str, r: DepthResult| DepthResult {
        value: r.value,
        witness: r.witness.map(|w| format!("{side}: {w}")),
        method: DepthMethod::ProductRule,
    };
    match (d1, d2) {
        (None, None) => Ok(DepthResult::exact(0, None, DepthMethod::ProductRule)),
        (Some(r), None) => Ok(tag("left", r)),
        (None, Some(r)) => Ok(tag("right", r)),
        (Some(r1), Some(r2)) => match (&r1.value, &r2.value) {
            (DepthValue::Exact(v1), DepthValue::Exact(v2)) => {
                // ties go to the left factor
                if v1 <= v2 {
                    Ok(tag("left", r1))
                } else {
                    Ok(tag("right", r2))
                }
            }
            (DepthValue::Exact(_), DepthValue::ExceedsCap { .. }) => Ok(tag("left", r1)),
            (DepthValue::ExceedsCap { .. }, DepthValue::Exact(_)) => Ok(tag("right", r2)),
            (
                DepthValue::ExceedsCap {
                    upper_bound: u1, ..
                },
                DepthValue::ExceedsCap {
                    upper_bound: u2, ..
                },
            ) => {
                let upper = match (u1, u2) {
                    (Some(a), Some(b)) => Some(*a.min(b)),
                    (Some(a), None) => Some(*a),
                    (None, Some(b)) => Some(*b),
                    (None, None) => None,
                };
                Ok(DepthResult {
                    value: DepthValue::ExceedsCap {
                        cap,
                        upper_bound: upper,
                    },
                    witness: None,
                    method: DepthMethod::ProductRule,
                })
            }
        },
    }
}

/// One-shot depth; builds the per-family data for a single query.
pub fn depth(g: &Element, group: &GroupDescriptor, cap: u64) -> Result<DepthResult> {
    DepthEngine::new(group)?.depth(g, cap)
}

/// Upper-bound combinator: whenever a quotient map sends `g` to a
/// non-identity element, the depth of `g` is at most the quotient order.
/// This is the only direction available through a quotient (a torsion
/// quotient, say): the bound needs no structure beyond surjectivity, and
/// no equality conditions are assumed.
pub fn quotient_upper_bound(
    map: &crate::quotients::QuotientMap,
    g: &Element,
) -> Result<Option<u64>> {
    let image = map.apply(g)?;
    let identity = map.apply(&map.source().identity())?;
    if image == identity {
        Ok(None)
    } else {
        Ok(Some(map.order()? as u64))
    }
}

/// Depth in a direct product via the component rule.
pub fn depth_product_rule(
    g1: &Element,
    g2: &Element,
    left: &GroupDescriptor,
    right: &GroupDescriptor,
    cap: u64,
) -> Result<DepthResult> {
    if cap < 2 {
        return Err(Error::usage("depth cap must be at least 2"));
    }
    left.validate(g1)?;
    right.validate(g2)?;
    product_rule(
        &mut DepthEngine::new(left)?,
        &mut DepthEngine::new(right)?,
        g1,
        g2,
        cap,
    )
}

/// `F_G^S(n)`: maximum depth over the ball of radius `n`.
///
/// The ball must fit the enumeration budget and every depth must be exact at
/// the given cap; otherwise a capacity error reports the partial maximum,
/// which is a valid lower bound.
pub fn residual_finiteness_growth(
    group: &GroupDescriptor,
    n: u64,
    cap: u64,
    ball_budget: usize,
) -> Result<u64> {
    let layers = density::ball_elements(group, n, ball_budget)?;
    let mut engine = DepthEngine::new(group)?;
    let mut max_depth = 0u64;
    for layer in &layers {
        for g in layer {
            match engine.depth(g, cap)?.value {
                DepthValue::Exact(v) => max_depth = max_depth.max(v),
                DepthValue::ExceedsCap { .. } => {
                    return Err(Error::capacity(format!(
                        "depth cap {cap} exceeded inside the radius-{n} ball; \
                         F(n) > {cap} (partial maximum {max_depth} is a lower bound)"
                    )));
                }
            }
        }
    }
    Ok(max_depth)
}
