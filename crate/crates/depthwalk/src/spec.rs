//! Parsers for group specs, quotient specs and predicate names.
//!
//! Group spec grammar (spaces are ignored):
//!
//! ```text
//! group    := atom ( "x" atom )*          left-associative product
//! atom     := "Z" | "Z^" d | "H" | "F2"
//!           | "Z/" m                      cyclic table
//!           | "SL3/" m | "SL3(Z/" m ")"   special linear table
//!           | "(" group ")"
//! ```
//!
//! Quotient specs are either `family%m` for a congruence quotient of `Z`,
//! `Z^d` or `H`, or a finite group spec (the walk pushed to itself).

use std::sync::Arc;

use depthwalk_core::error::{Error, Result};
use depthwalk_core::groups::{make_direct_product, GroupDescriptor};
use depthwalk_core::quotients::{CayleyAction, FiniteGroupTable, QuotientMap};

pub fn parse_group(spec: &str) -> Result<GroupDescriptor> {
    let cleaned: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::usage("empty group spec"));
    }
    parse_product(&cleaned)
}

fn parse_product(s: &str) -> Result<GroupDescriptor> {
    let mut parts: Vec<&str> = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::usage(format!("unbalanced ')' in group spec {s:?}")))?
            }
            'x' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::usage(format!("unbalanced '(' in group spec {s:?}")));
    }
    parts.push(&s[start..]);
    let mut groups = parts.iter().map(|p| parse_atom(p));
    let first = groups
        .next()
        .ok_or_else(|| Error::usage("empty group spec"))??;
    groups.try_fold(first, |acc, g| Ok(make_direct_product(&acc, &g?)))
}

fn parse_atom(s: &str) -> Result<GroupDescriptor> {
    if s.is_empty() {
        return Err(Error::usage("empty factor in group spec"));
    }
    if let Some(inner) = s.strip_prefix('(') {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| Error::usage(format!("unbalanced '(' in {s:?}")))?;
        return parse_product(inner);
    }
    match s {
        "Z" => return Ok(GroupDescriptor::integer()),
        "H" => return Ok(GroupDescriptor::heisenberg()),
        "F2" => return Ok(GroupDescriptor::free_rank2()),
        _ => {}
    }
    if let Some(d) = s.strip_prefix("Z^") {
        let d: usize = d
            .parse()
            .map_err(|_| Error::usage(format!("bad lattice dimension in {s:?}")))?;
        if d == 0 {
            return Err(Error::usage("lattice dimension must be positive"));
        }
        return Ok(GroupDescriptor::lattice(d));
    }
    if let Some(m) = s.strip_prefix("Z/") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in {s:?}")))?;
        if m == 0 || m > depthwalk_core::quotients::MAX_TABLE_ORDER as u64 {
            return Err(Error::capacity(format!(
                "cyclic modulus {m} outside 1..={}",
                depthwalk_core::quotients::MAX_TABLE_ORDER
            )));
        }
        return Ok(GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(
            m,
        ))));
    }
    let sl3 = s
        .strip_prefix("SL3/")
        .or_else(|| s.strip_prefix("SL3(Z/").and_then(|r| r.strip_suffix(')')));
    if let Some(m) = sl3 {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in {s:?}")))?;
        return Ok(GroupDescriptor::finite(Arc::new(FiniteGroupTable::sl3_mod(
            m,
        )?)));
    }
    Err(Error::usage(format!("unknown group spec {s:?}")))
}

/// A quotient for spectral work: either a congruence quotient map (tables
/// available under the caps) or a generator action for groups where only
/// the matrix-free second-eigenvalue iteration is feasible.
pub enum QuotientSpec {
    Map(QuotientMap),
    ActionOnly(CayleyAction),
}

pub fn parse_quotient(spec: &str) -> Result<QuotientSpec> {
    let cleaned: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((family, modulus)) = cleaned.split_once('%') {
        let m: u64 = modulus
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in quotient spec {spec:?}")))?;
        if family == "Z" {
            return Ok(QuotientSpec::Map(QuotientMap::integer_mod(m)?));
        }
        if family == "H" {
            return Ok(QuotientSpec::Map(QuotientMap::heisenberg_mod(m)?));
        }
        if let Some(d) = family.strip_prefix("Z^") {
            let d: usize = d
                .parse()
                .map_err(|_| Error::usage(format!("bad dimension in {spec:?}")))?;
            return Ok(QuotientSpec::Map(QuotientMap::lattice_mod(d, m)?));
        }
        return Err(Error::usage(format!(
            "congruence quotients support Z, Z^d and H, got {family:?}"
        )));
    }
    // a finite group itself: full table when it fits, otherwise the
    // generator action (second eigenvalue only)
    if let Some(m) = cleaned
        .strip_prefix("SL3/")
        .or_else(|| cleaned.strip_prefix("SL3(Z/").and_then(|r| r.strip_suffix(')')))
    {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in {spec:?}")))?;
        return match FiniteGroupTable::sl3_mod(m) {
            Ok(_) => {
                let group = parse_group(&cleaned)?;
                Ok(QuotientSpec::Map(QuotientMap::trivial(&group)?))
            }
            Err(Error::Capacity(_)) => Ok(QuotientSpec::ActionOnly(CayleyAction::sl3(m)?)),
            Err(e) => Err(e),
        };
    }
    let group = parse_group(&cleaned)?;
    Ok(QuotientSpec::Map(QuotientMap::trivial(&group)?))
}

pub fn parse_predicate(name: &str) -> Result<depthwalk_core::density::ElementPredicate> {
    use depthwalk_core::density::ElementPredicate;
    if name == "even" {
        return Ok(ElementPredicate::EvenWordLength);
    }
    if let Some(m) = name.strip_prefix("mod:") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in predicate {name:?}")))?;
        return Ok(ElementPredicate::MultipleOf(m));
    }
    if let Some(m) = name.strip_prefix("kernel:") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::usage(format!("bad modulus in predicate {name:?}")))?;
        return Ok(ElementPredicate::CongruenceKernel(m));
    }
    Err(Error::usage(format!(
        "unknown predicate {name:?} (expected even, mod:<m> or kernel:<m>)"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use depthwalk_core::groups::Family;

    #[test]
    fn group_specs_parse() {
        assert!(matches!(
            parse_group("Z").unwrap().family(),
            Family::Integer
        ));
        assert!(matches!(
            parse_group("Z^3").unwrap().family(),
            Family::Lattice(3)
        ));
        let z6 = parse_group("Z/6").unwrap();
        match z6.family() {
            Family::FiniteTable(t) => assert_eq!(t.order(), 6),
            _ => panic!(),
        }
        let p = parse_group("Z/4xZ/6").unwrap();
        assert_eq!(p.name(), "Z/4 x Z/6");
        let nested = parse_group("(Z/2xZ/3)xZ").unwrap();
        assert_eq!(nested.name(), "Z/2 x Z/3 x Z");
    }

    /// every emitted group name re-parses to a group with the same name
    #[test]
    fn group_names_round_trip() {
        for spec in ["Z", "Z^2", "H", "F2", "Z/6", "Z/4xZ/6", "SL3/2", "ZxZ/3"] {
            let g = parse_group(spec).unwrap();
            let reparsed = parse_group(g.name()).unwrap();
            assert_eq!(g.name(), reparsed.name(), "spec {spec}");
        }
    }

    #[test]
    fn bad_specs_are_usage_errors() {
        assert!(parse_group("").is_err());
        assert!(parse_group("Q8").is_err());
        assert!(parse_group("Z^0").is_err());
        assert!(parse_group("(ZxZ").is_err());
    }

    #[test]
    fn quotient_specs_parse() {
        match parse_quotient("Z%6").unwrap() {
            QuotientSpec::Map(m) => assert_eq!(m.order().unwrap(), 6),
            _ => panic!(),
        }
        match parse_quotient("H%2").unwrap() {
            QuotientSpec::Map(m) => assert_eq!(m.order().unwrap(), 8),
            _ => panic!(),
        }
        match parse_quotient("SL3/2").unwrap() {
            QuotientSpec::Map(m) => assert_eq!(m.order().unwrap(), 168),
            _ => panic!(),
        }
        match parse_quotient("SL3/3").unwrap() {
            QuotientSpec::ActionOnly(a) => assert_eq!(a.order(), 5616),
            _ => panic!("SL3/3 should fall back to the action"),
        }
    }
}
