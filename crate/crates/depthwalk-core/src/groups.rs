//! Value-semantics algebra for the supported group families.
//!
//! Six families are built in: the integers, integer lattices `Z^d`, finite
//! groups given by multiplication tables, the discrete Heisenberg group
//! (upper unitriangular 3x3 integer matrices in coordinates), the free group
//! of rank two on reduced words, and direct products of any two families.
//!
//! All values are immutable after construction and all operations are pure,
//! so elements and descriptors can be shared freely across workers.
//!
//! Integer payloads are guarded 64-bit: arithmetic that would overflow
//! reports a capacity error instead of wrapping.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quotients::FiniteGroupTable;

/// Free-group letters: `1 = a`, `-1 = a^-1`, `2 = b`, `-2 = b^-1`.
pub type Letter = i8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Integer(i64),
    Lattice(Vec<i64>),
    FiniteIndex(u32),
    /// Coordinates `(x, y, z)` of the unitriangular matrix
    /// `[[1, x, z], [0, 1, y], [0, 0, 1]]`.
    Heisenberg(i64, i64, i64),
    /// Reduced word: no letter is adjacent to its inverse.
    FreeWord(Vec<Letter>),
    Pair(Box<Element>, Box<Element>),
}

impl Element {
    pub fn pair(a: Element, b: Element) -> Element {
        Element::Pair(Box::new(a), Box::new(b))
    }

    pub fn free_word(letters: &[Letter]) -> Element {
        Element::FreeWord(reduce_word(letters))
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    Integer,
    Lattice(usize),
    FiniteTable(Arc<FiniteGroupTable>),
    Heisenberg,
    FreeRank2,
    Product(Box<GroupDescriptor>, Box<GroupDescriptor>),
}

/// A group family together with its symmetric generating multiset and the
/// metadata the depth and growth routines consult.
#[derive(Debug, Clone)]
pub struct GroupDescriptor {
    family: Family,
    generators: Vec<Element>,
    hirsch_length: Option<u32>,
    has_torsion: Option<bool>,
    name: String,
}

impl GroupDescriptor {
    /// `Z` with the standard generating set `{+1, -1}`.
    pub fn integer() -> GroupDescriptor {
        GroupDescriptor {
            family: Family::Integer,
            generators: alloc::vec![Element::Integer(1), Element::Integer(-1)],
            hirsch_length: Some(1),
            has_torsion: Some(false),
            name: "Z".to_string(),
        }
    }

    /// `Z^d` with generating set `{±e_1, ..., ±e_d}`.
    pub fn lattice(d: usize) -> GroupDescriptor {
        assert!(d >= 1, "lattice dimension must be at least 1");
        let mut generators = Vec::with_capacity(2 * d);
        for i in 0..d {
            for sign in [1i64, -1] {
                let mut v = alloc::vec![0i64; d];
                v[i] = sign;
                generators.push(Element::Lattice(v));
            }
        }
        GroupDescriptor {
            family: Family::Lattice(d),
            generators,
            hirsch_length: Some(d as u32),
            has_torsion: Some(false),
            name: format!("Z^{d}"),
        }
    }

    /// Discrete Heisenberg group with generating set `{a, a^-1, b, b^-1}`,
    /// `a = (1,0,0)`, `b = (0,1,0)`.
    pub fn heisenberg() -> GroupDescriptor {
        GroupDescriptor {
            family: Family::Heisenberg,
            generators: alloc::vec![
                Element::Heisenberg(1, 0, 0),
                Element::Heisenberg(-1, 0, 0),
                Element::Heisenberg(0, 1, 0),
                Element::Heisenberg(0, -1, 0),
            ],
            hirsch_length: Some(3),
            has_torsion: Some(false),
            name: "H".to_string(),
        }
    }

    /// Free group of rank two with generating set `{a, a^-1, b, b^-1}`.
    pub fn free_rank2() -> GroupDescriptor {
        GroupDescriptor {
            family: Family::FreeRank2,
            generators: alloc::vec![
                Element::FreeWord(alloc::vec![1]),
                Element::FreeWord(alloc::vec![-1]),
                Element::FreeWord(alloc::vec![2]),
                Element::FreeWord(alloc::vec![-2]),
            ],
            hirsch_length: None,
            has_torsion: Some(false),
            name: "F2".to_string(),
        }
    }

    /// Finite group from a multiplication table; the generating multiset is
    /// the one recorded in the table.
    pub fn finite(table: Arc<FiniteGroupTable>) -> GroupDescriptor {
        let generators = table
            .generators()
            .iter()
            .map(|&g| Element::FiniteIndex(g))
            .collect();
        let name = table.name().to_string();
        GroupDescriptor {
            family: Family::FiniteTable(table),
            generators,
            hirsch_length: Some(0),
            has_torsion: Some(true),
            name,
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn hirsch_length(&self) -> Option<u32> {
        self.hirsch_length
    }

    pub fn has_torsion(&self) -> Option<bool> {
        self.has_torsion
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn identity(&self) -> Element {
        match &self.family {
            Family::Integer => Element::Integer(0),
            Family::Lattice(d) => Element::Lattice(alloc::vec![0; *d]),
            Family::FiniteTable(t) => Element::FiniteIndex(t.identity()),
            Family::Heisenberg => Element::Heisenberg(0, 0, 0),
            Family::FreeRank2 => Element::FreeWord(Vec::new()),
            Family::Product(a, b) => Element::pair(a.identity(), b.identity()),
        }
    }

    /// Checks that an element is a well-formed member of this family.
    pub fn validate(&self, g: &Element) -> Result<()> {
        match (&self.family, g) {
            (Family::Integer, Element::Integer(_)) => Ok(()),
            (Family::Lattice(d), Element::Lattice(v)) if v.len() == *d => Ok(()),
            (Family::FiniteTable(t), Element::FiniteIndex(i)) if (*i as usize) < t.order() => {
                Ok(())
            }
            (Family::Heisenberg, Element::Heisenberg(..)) => Ok(()),
            (Family::FreeRank2, Element::FreeWord(w)) => {
                if is_reduced(w) {
                    Ok(())
                } else {
                    Err(Error::usage("free word is not reduced"))
                }
            }
            (Family::Product(a, b), Element::Pair(x, y)) => {
                a.validate(x)?;
                b.validate(y)
            }
            _ => Err(Error::usage(format!(
                "element {g:?} does not belong to group {}",
                self.name
            ))),
        }
    }

    /// Group product. Free-word results are reduced; fixed-width integer
    /// overflow is a capacity error.
    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element> {
        match (&self.family, g, h) {
            (Family::Integer, Element::Integer(a), Element::Integer(b)) => {
                Ok(Element::Integer(checked_add(*a, *b)?))
            }
            (Family::Lattice(d), Element::Lattice(a), Element::Lattice(b))
                if a.len() == *d && b.len() == *d =>
            {
                let mut out = Vec::with_capacity(*d);
                for i in 0..*d {
                    out.push(checked_add(a[i], b[i])?);
                }
                Ok(Element::Lattice(out))
            }
            (Family::FiniteTable(t), Element::FiniteIndex(a), Element::FiniteIndex(b))
                if (*a as usize) < t.order() && (*b as usize) < t.order() =>
            {
                Ok(Element::FiniteIndex(t.mul(*a, *b)))
            }
            (
                Family::Heisenberg,
                Element::Heisenberg(x1, y1, z1),
                Element::Heisenberg(x2, y2, z2),
            ) => {
                // (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')
                let x = checked_add(*x1, *x2)?;
                let y = checked_add(*y1, *y2)?;
                let z = checked_add(checked_add(*z1, *z2)?, checked_mul(*x1, *y2)?)?;
                Ok(Element::Heisenberg(x, y, z))
            }
            (Family::FreeRank2, Element::FreeWord(a), Element::FreeWord(b)) => {
                Ok(Element::FreeWord(concat_reduced(a, b)))
            }
            (Family::Product(fa, fb), Element::Pair(a1, a2), Element::Pair(b1, b2)) => Ok(
                Element::pair(fa.multiply(a1, b1)?, fb.multiply(a2, b2)?),
            ),
            _ => Err(Error::usage(format!(
                "family mismatch: cannot multiply {g:?} and {h:?} in {}",
                self.name
            ))),
        }
    }

    pub fn invert(&self, g: &Element) -> Result<Element> {
        match (&self.family, g) {
            (Family::Integer, Element::Integer(a)) => Ok(Element::Integer(checked_neg(*a)?)),
            (Family::Lattice(d), Element::Lattice(a)) if a.len() == *d => {
                let mut out = Vec::with_capacity(*d);
                for &c in a {
                    out.push(checked_neg(c)?);
                }
                Ok(Element::Lattice(out))
            }
            (Family::FiniteTable(t), Element::FiniteIndex(a)) if (*a as usize) < t.order() => {
                Ok(Element::FiniteIndex(t.inv(*a)))
            }
            (Family::Heisenberg, Element::Heisenberg(x, y, z)) => {
                // (x,y,z)^-1 = (-x, -y, -z + x*y)
                Ok(Element::Heisenberg(
                    checked_neg(*x)?,
                    checked_neg(*y)?,
                    checked_add(checked_neg(*z)?, checked_mul(*x, *y)?)?,
                ))
            }
            (Family::FreeRank2, Element::FreeWord(w)) => {
                Ok(Element::FreeWord(w.iter().rev().map(|&l| -l).collect()))
            }
            (Family::Product(fa, fb), Element::Pair(a, b)) => {
                Ok(Element::pair(fa.invert(a)?, fb.invert(b)?))
            }
            _ => Err(Error::usage(format!(
                "family mismatch: cannot invert {g:?} in {}",
                self.name
            ))),
        }
    }

    /// Multiset equality between the generating set and its inverses.
    pub fn generating_set_is_symmetric(&self) -> bool {
        let mut gens: Vec<Element> = self.generators.clone();
        let mut invs: Vec<Element> = match self
            .generators
            .iter()
            .map(|g| self.invert(g))
            .collect::<Result<Vec<_>>>()
        {
            Ok(v) => v,
            Err(_) => return false,
        };
        gens.sort();
        invs.sort();
        gens == invs
    }
}

/// Direct product with the embedded-union generating convention:
/// `{(s, e)} ∪ {(e, t)}`, which is symmetric whenever the factors are and
/// keeps the coordinate walks analyzable.
pub fn make_direct_product(a: &GroupDescriptor, b: &GroupDescriptor) -> GroupDescriptor {
    let ea = a.identity();
    let eb = b.identity();
    let mut generators = Vec::with_capacity(a.generators.len() + b.generators.len());
    for s in &a.generators {
        generators.push(Element::pair(s.clone(), eb.clone()));
    }
    for t in &b.generators {
        generators.push(Element::pair(ea.clone(), t.clone()));
    }
    let hirsch = match (a.hirsch_length, b.hirsch_length) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    };
    let torsion = match (a.has_torsion, b.has_torsion) {
        (Some(x), Some(y)) => Some(x || y),
        _ => None,
    };
    GroupDescriptor {
        name: format!("{} x {}", a.name, b.name),
        family: Family::Product(Box::new(a.clone()), Box::new(b.clone())),
        generators,
        hirsch_length: hirsch,
        has_torsion: torsion,
    }
}

fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b)
        .ok_or_else(|| Error::capacity("64-bit integer overflow in group arithmetic"))
}

fn checked_mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::capacity("64-bit integer overflow in group arithmetic"))
}

fn checked_neg(a: i64) -> Result<i64> {
    a.checked_neg()
        .ok_or_else(|| Error::capacity("64-bit integer overflow in group arithmetic"))
}

pub fn is_reduced(w: &[Letter]) -> bool {
    w.windows(2).all(|p| p[0] != -p[1]) && w.iter().all(|&l| matches!(l, 1 | -1 | 2 | -2))
}

/// Full stack reduction of an arbitrary letter sequence.
pub fn reduce_word(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Concatenation of two already-reduced words, cancelling at the seam only.
fn concat_reduced(a: &[Letter], b: &[Letter]) -> Vec<Letter> {
    let mut cut = 0;
    while cut < a.len() && cut < b.len() && a[a.len() - 1 - cut] == -b[cut] {
        cut += 1;
    }
    let mut out = Vec::with_capacity(a.len() + b.len() - 2 * cut);
    out.extend_from_slice(&a[..a.len() - cut]);
    out.extend_from_slice(&b[cut..]);
    out
}

// ------------------------------------------------------------------------
// Canonical text literals.
//
// Grammar (documented in the README and used by the CLI and golden files):
//   element := "Z:" int
//            | "L:" int ("," int)*
//            | "T:" uint
//            | "H:" int "," int "," int
//            | "F:" word            (word = (("a"|"b") ["^-1"])*, empty = e)
//            | "(" element "|" element ")"
// ------------------------------------------------------------------------

pub fn format_element(g: &Element) -> String {
    match g {
        Element::Integer(v) => format!("Z:{v}"),
        Element::Lattice(v) => {
            let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            format!("L:{}", coords.join(","))
        }
        Element::FiniteIndex(i) => format!("T:{i}"),
        Element::Heisenberg(x, y, z) => format!("H:{x},{y},{z}"),
        Element::FreeWord(w) => {
            let mut s = String::from("F:");
            for &l in w {
                s.push_str(match l {
                    1 => "a",
                    -1 => "a^-1",
                    2 => "b",
                    -2 => "b^-1",
                    _ => unreachable!("invalid letter"),
                });
            }
            s
        }
        Element::Pair(a, b) => format!("({}|{})", format_element(a), format_element(b)),
    }
}

pub fn parse_element(text: &str) -> Result<Element> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix('(') {
        let rest = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::usage("unbalanced parenthesis in pair literal"))?;
        let split = split_pair(rest)?;
        return Ok(Element::pair(
            parse_element(&rest[..split])?,
            parse_element(&rest[split + 1..])?,
        ));
    }
    let (tag, body) = text
        .split_once(':')
        .ok_or_else(|| Error::usage(format!("element literal without tag: {text:?}")))?;
    match tag {
        "Z" => Ok(Element::Integer(parse_i64(body)?)),
        "L" => {
            let coords = body
                .split(',')
                .map(parse_i64)
                .collect::<Result<Vec<i64>>>()?;
            if coords.is_empty() {
                return Err(Error::usage("lattice literal needs at least one coordinate"));
            }
            Ok(Element::Lattice(coords))
        }
        "T" => {
            let idx: u32 = body
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("bad table index: {body:?}")))?;
            Ok(Element::FiniteIndex(idx))
        }
        "H" => {
            let coords = body
                .split(',')
                .map(parse_i64)
                .collect::<Result<Vec<i64>>>()?;
            if coords.len() != 3 {
                return Err(Error::usage("Heisenberg literal needs three coordinates"));
            }
            Ok(Element::Heisenberg(coords[0], coords[1], coords[2]))
        }
        "F" => parse_free_word(body),
        _ => Err(Error::usage(format!("unknown element tag: {tag:?}"))),
    }
}

/// Position of the `|` separating the two components of a pair body,
/// accounting for nested pairs.
fn split_pair(body: &str) -> Result<usize> {
    let mut depth = 0usize;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::usage("unbalanced parenthesis in pair literal"))?
            }
            '|' if depth == 0 => return Ok(i),
            _ => {}
        }
    }
    Err(Error::usage("pair literal without separator"))
}

fn parse_i64(s: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::usage(format!("bad integer: {s:?}")))
}

fn parse_free_word(body: &str) -> Result<Element> {
    let bytes = body.trim().as_bytes();
    let mut letters: Vec<Letter> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let base = match bytes[i] {
            b'a' => 1,
            b'b' => 2,
            c => return Err(Error::usage(format!("bad free-word letter: {:?}", c as char))),
        };
        i += 1;
        if bytes[i..].starts_with(b"^-1") {
            letters.push(-base);
            i += 3;
        } else {
            letters.push(base);
        }
    }
    if !is_reduced(&letters) {
        return Err(Error::usage("free word literal is not reduced"));
    }
    Ok(Element::FreeWord(letters))
}
