//! Finite quotients, normal-subgroup enumeration and intersection growth.
//!
//! A [`FiniteGroupTable`] is a finite group materialized as an index-based
//! multiplication table; [`CayleyAction`] is the lighter generator-action
//! view used by walk iteration and spectral routines where the full `n x n`
//! table would be wasteful or infeasible.
//!
//! Normal subgroups are enumerated by forming conjugacy classes, taking the
//! normal closure of each class (the "atoms"), and closing the atom set
//! under joins. Since a normal subgroup is exactly a join of the atoms of
//! its member classes, the join search is complete.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::{Element, Family, GroupDescriptor};

/// Largest order for which a dense multiplication table may be built.
pub const MAX_TABLE_ORDER: usize = 5_000;
/// Largest order for generator-action representations.
pub const MAX_ACTION_ORDER: usize = 1_000_000;
/// Default cap for normal-subgroup enumeration.
pub const ENUMERATION_CAP: usize = 5_000;
/// Default truncation cap for Heisenberg intersection-growth tables.
pub const HEISENBERG_LAMBDA_CAP: u64 = 16;

// ------------------------------------------------------------------------
// FiniteGroupTable
// ------------------------------------------------------------------------

/// A finite group as a dense multiplication table plus inverse table,
/// identity index, generator indices (a symmetric multiset) and labels.
#[derive(Debug)]
pub struct FiniteGroupTable {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
    generators: Vec<u32>,
    labels: Vec<String>,
    name: String,
}

impl FiniteGroupTable {
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    #[inline]
    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn label(&self, i: u32) -> &str {
        &self.labels[i as usize]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Cyclic group `Z/m` with generators the images of `+1` and `-1`.
    /// The two images coincide when `m = 2`; the multiset keeps both.
    pub fn cyclic(m: u64) -> FiniteGroupTable {
        assert!(m >= 1 && (m as usize) <= MAX_TABLE_ORDER, "cyclic order out of range");
        let n = m as usize;
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(((a + b) % n) as u32);
            }
        }
        let inv = (0..n).map(|a| ((n - a) % n) as u32).collect();
        FiniteGroupTable {
            order: n,
            mul,
            inv,
            identity: 0,
            generators: alloc::vec![(1 % n) as u32, ((n - 1) % n) as u32],
            labels: (0..n).map(|a| a.to_string()).collect(),
            name: format!("Z/{m}"),
        }
    }

    /// Heisenberg group over `Z/m`, order `m^3`, with generators the images
    /// of `a, a^-1, b, b^-1`. Index of `(x, y, z)` is `(x*m + y)*m + z`.
    pub fn heisenberg_mod(m: u64) -> Result<FiniteGroupTable> {
        let n = (m as usize)
            .checked_pow(3)
            .filter(|&n| n <= MAX_TABLE_ORDER)
            .ok_or_else(|| {
                Error::capacity(format!(
                    "Heisenberg mod {m} has order m^3 > table cap {MAX_TABLE_ORDER}"
                ))
            })?;
        let m = m as usize;
        let idx = |x: usize, y: usize, z: usize| ((x * m + y) * m + z) as u32;
        let mut mul = alloc::vec![0u32; n * n];
        let mut inv = alloc::vec![0u32; n];
        let mut labels = Vec::with_capacity(n);
        for x1 in 0..m {
            for y1 in 0..m {
                for z1 in 0..m {
                    let a = idx(x1, y1, z1) as usize;
                    labels.push(format!("({x1},{y1},{z1})"));
                    inv[a] = idx(
                        (m - x1) % m,
                        (m - y1) % m,
                        ((m - z1) % m + x1 * y1) % m,
                    );
                    for x2 in 0..m {
                        for y2 in 0..m {
                            for z2 in 0..m {
                                let b = idx(x2, y2, z2) as usize;
                                mul[a * n + b] =
                                    idx((x1 + x2) % m, (y1 + y2) % m, (z1 + z2 + x1 * y2) % m);
                            }
                        }
                    }
                }
            }
        }
        let g = |x: usize, y: usize, z: usize| idx(x % m, y % m, z % m);
        Ok(FiniteGroupTable {
            order: n,
            mul,
            inv,
            identity: 0,
            generators: alloc::vec![
                g(1, 0, 0),
                g(m - 1, 0, 0),
                g(0, 1, 0),
                g(0, m - 1, 0),
            ],
            labels,
            name: format!("H(Z/{})", m),
        })
    }

    /// `SL3(Z/m)` generated by the twelve elementary matrices `e_ij(±1)`,
    /// built by breadth-first closure. Only small `m` fit under the table
    /// cap (order 168 for `m = 2`); larger `m` must use [`CayleyAction`].
    pub fn sl3_mod(m: u64) -> Result<FiniteGroupTable> {
        let (elems, index, gens) = sl3_bfs(m, MAX_TABLE_ORDER)?;
        let n = elems.len();
        let mut mul = alloc::vec![0u32; n * n];
        let mut inv = alloc::vec![0u32; n];
        for (a, ma) in elems.iter().enumerate() {
            for (b, mb) in elems.iter().enumerate() {
                mul[a * n + b] = index[&mat_mul(ma, mb, m as u16)];
            }
        }
        let id = index[&sl3_identity()];
        for a in 0..n {
            // Inverse located by scanning the row for the identity.
            inv[a] = (0..n as u32)
                .find(|&b| mul[a * n + b as usize] == id)
                .expect("group table row must contain the identity");
        }
        let labels = elems.iter().map(|e| sl3_label(e)).collect();
        Ok(FiniteGroupTable {
            order: n,
            mul,
            inv,
            identity: index[&sl3_identity()],
            generators: gens,
            labels,
            name: format!("SL3(Z/{m})"),
        })
    }

    /// Direct product with the embedded-union generating convention.
    pub fn direct_product(a: &FiniteGroupTable, b: &FiniteGroupTable) -> Result<FiniteGroupTable> {
        let n = a
            .order
            .checked_mul(b.order)
            .filter(|&n| n <= MAX_TABLE_ORDER)
            .ok_or_else(|| {
                Error::capacity(format!(
                    "product order {}*{} exceeds table cap {MAX_TABLE_ORDER}",
                    a.order, b.order
                ))
            })?;
        let idx = |ia: u32, ib: u32| ia * b.order as u32 + ib;
        let mut mul = alloc::vec![0u32; n * n];
        let mut inv = alloc::vec![0u32; n];
        let mut labels = Vec::with_capacity(n);
        for ia in 0..a.order as u32 {
            for ib in 0..b.order as u32 {
                let x = idx(ia, ib) as usize;
                labels.push(format!("({},{})", a.label(ia), b.label(ib)));
                inv[x] = idx(a.inv(ia), b.inv(ib));
                for ja in 0..a.order as u32 {
                    for jb in 0..b.order as u32 {
                        mul[x * n + idx(ja, jb) as usize] = idx(a.mul(ia, ja), b.mul(ib, jb));
                    }
                }
            }
        }
        let mut generators = Vec::new();
        for &g in &a.generators {
            generators.push(idx(g, b.identity));
        }
        for &g in &b.generators {
            generators.push(idx(a.identity, g));
        }
        Ok(FiniteGroupTable {
            order: n,
            mul,
            inv,
            identity: idx(a.identity, b.identity),
            generators,
            labels,
            name: format!("{} x {}", a.name, b.name),
        })
    }

    /// Materialize a finite-family descriptor (finite table or a product of
    /// finite families) as a table.
    pub fn from_descriptor(group: &GroupDescriptor) -> Result<Arc<FiniteGroupTable>> {
        match group.family() {
            Family::FiniteTable(t) => Ok(t.clone()),
            Family::Product(a, b) => {
                let ta = FiniteGroupTable::from_descriptor(a)?;
                let tb = FiniteGroupTable::from_descriptor(b)?;
                Ok(Arc::new(FiniteGroupTable::direct_product(&ta, &tb)?))
            }
            _ => Err(Error::usage(format!(
                "group {} is not a finite-table family",
                group.name()
            ))),
        }
    }

    /// Quotient by a normal subgroup, with induced generators and coset
    /// labels taken from the smallest member of each coset.
    pub fn quotient_by(&self, n: &NormalSubgroup) -> FiniteGroupTable {
        let order = self.order;
        let mut coset = alloc::vec![u32::MAX; order];
        let mut reps: Vec<u32> = Vec::with_capacity(n.index());
        for x in 0..order as u32 {
            if coset[x as usize] == u32::MAX {
                let id = reps.len() as u32;
                reps.push(x);
                for &m in n.members() {
                    coset[self.mul(m, x) as usize] = id;
                }
            }
        }
        let q = reps.len();
        debug_assert_eq!(q, n.index());
        let mut mul = alloc::vec![0u32; q * q];
        let mut inv = alloc::vec![0u32; q];
        for (i, &ri) in reps.iter().enumerate() {
            inv[i] = coset[self.inv(ri) as usize];
            for (j, &rj) in reps.iter().enumerate() {
                mul[i * q + j] = coset[self.mul(ri, rj) as usize];
            }
        }
        FiniteGroupTable {
            order: q,
            mul,
            inv,
            identity: coset[self.identity as usize],
            generators: self
                .generators
                .iter()
                .map(|&g| coset[g as usize])
                .collect(),
            labels: reps.iter().map(|&r| format!("[{}]", self.label(r))).collect(),
            name: format!("{}/N{}", self.name, n.order()),
        }
    }

    /// Structural sanity: Latin-square rows and columns, inverse-table
    /// consistency and a two-sided identity.
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        let mut seen_row = alloc::vec![false; n];
        let mut seen_col = alloc::vec![false; n];
        for a in 0..n {
            seen_row.iter_mut().for_each(|s| *s = false);
            seen_col.iter_mut().for_each(|s| *s = false);
            for b in 0..n {
                let r = self.mul[a * n + b] as usize;
                let c = self.mul[b * n + a] as usize;
                if seen_row[r] || seen_col[c] {
                    return Err(Error::usage(format!(
                        "multiplication table of {} is not a Latin square",
                        self.name
                    )));
                }
                seen_row[r] = true;
                seen_col[c] = true;
            }
            let a = a as u32;
            if self.mul(a, self.inv(a)) != self.identity
                || self.mul(self.inv(a), a) != self.identity
                || self.mul(a, self.identity) != a
                || self.mul(self.identity, a) != a
            {
                return Err(Error::usage(format!(
                    "inverse or identity inconsistency in {}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

// SL3 support -------------------------------------------------------------

type Mat = [u8; 9];

fn sl3_identity() -> Mat {
    [1, 0, 0, 0, 1, 0, 0, 0, 1]
}

fn mat_mul(a: &Mat, b: &Mat, m: u16) -> Mat {
    let mut out = [0u8; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc: u32 = 0;
            for k in 0..3 {
                acc += a[3 * i + k] as u32 * b[3 * k + j] as u32;
            }
            out[3 * i + j] = (acc % m as u32) as u8;
        }
    }
    out
}

fn sl3_label(e: &Mat) -> String {
    format!(
        "{},{},{}/{},{},{}/{},{},{}",
        e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8]
    )
}

fn sl3_generators(m: u64) -> Vec<Mat> {
    let mut gens = Vec::with_capacity(12);
    for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
        for sign in [1u64, m - 1] {
            let mut e = sl3_identity();
            e[3 * i + j] = (sign % m) as u8;
            gens.push(e);
        }
    }
    gens
}

/// BFS closure of the elementary generators; returns elements in discovery
/// order, the index map, and generator indices.
fn sl3_bfs(m: u64, cap: usize) -> Result<(Vec<Mat>, BTreeMap<Mat, u32>, Vec<u32>)> {
    if !(2..=251).contains(&m) {
        return Err(Error::usage(format!("SL3 modulus {m} unsupported")));
    }
    let gens = sl3_generators(m);
    let mut index: BTreeMap<Mat, u32> = BTreeMap::new();
    let mut elems: Vec<Mat> = Vec::new();
    index.insert(sl3_identity(), 0);
    elems.push(sl3_identity());
    let mut head = 0usize;
    while head < elems.len() {
        let cur = elems[head];
        head += 1;
        for g in &gens {
            let next = mat_mul(&cur, g, m as u16);
            if !index.contains_key(&next) {
                if elems.len() >= cap {
                    return Err(Error::capacity(format!(
                        "SL3(Z/{m}) exceeds order cap {cap}"
                    )));
                }
                index.insert(next, elems.len() as u32);
                elems.push(next);
            }
        }
    }
    let gen_indices = gens.iter().map(|g| index[g]).collect();
    Ok((elems, index, gen_indices))
}

// ------------------------------------------------------------------------
// CayleyAction
// ------------------------------------------------------------------------

/// Generator-action view of a finite quotient: for each generator `s` (in
/// multiset order) the permutation `x -> x·s`. Sufficient for distribution
/// pushforwards and for the matrix-free second-eigenvalue iteration.
#[derive(Debug)]
pub struct CayleyAction {
    order: usize,
    identity: u32,
    targets: Vec<Vec<u32>>,
    name: String,
}

impl CayleyAction {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn generator_count(&self) -> usize {
        self.targets.len()
    }

    pub fn target(&self, gen: usize) -> &[u32] {
        &self.targets[gen]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn from_table(t: &FiniteGroupTable) -> CayleyAction {
        let targets = t
            .generators()
            .iter()
            .map(|&s| (0..t.order() as u32).map(|x| t.mul(x, s)).collect())
            .collect();
        CayleyAction {
            order: t.order(),
            identity: t.identity(),
            targets,
            name: t.name().to_string(),
        }
    }

    pub fn cyclic(m: u64) -> Result<CayleyAction> {
        let n = check_action_order(m as u128, &format!("Z/{m}"))?;
        let plus: Vec<u32> = (0..n as u32).map(|x| ((x as u64 + 1) % m) as u32).collect();
        let minus: Vec<u32> = (0..n as u32)
            .map(|x| ((x as u64 + m - 1) % m) as u32)
            .collect();
        Ok(CayleyAction {
            order: n,
            identity: 0,
            targets: alloc::vec![plus, minus],
            name: format!("Z/{m}"),
        })
    }

    /// `(Z/m)^d` with mixed-radix index `((r_1·m + r_2)·m + r_3)...`,
    /// matching the fold of `direct_product` over cyclic factors.
    pub fn lattice_mod(d: usize, m: u64) -> Result<CayleyAction> {
        let n = check_action_order((m as u128).pow(d as u32), &format!("(Z/{m})^{d}"))?;
        let mut targets = Vec::with_capacity(2 * d);
        let stride = |i: usize| (m as usize).pow((d - 1 - i) as u32);
        for i in 0..d {
            let st = stride(i);
            for delta in [1u64, m - 1] {
                let mut map = Vec::with_capacity(n);
                for x in 0..n {
                    let digit = (x / st) % m as usize;
                    let next = (digit + delta as usize) % m as usize;
                    map.push((x - digit * st + next * st) as u32);
                }
                targets.push(map);
            }
        }
        Ok(CayleyAction {
            order: n,
            identity: 0,
            targets,
            name: format!("(Z/{m})^{d}"),
        })
    }

    /// Heisenberg group mod `m` without materializing the table.
    pub fn heisenberg_mod(m: u64) -> Result<CayleyAction> {
        let n = check_action_order((m as u128).pow(3), &format!("H(Z/{m})"))?;
        let mu = m as usize;
        let idx = |x: usize, y: usize, z: usize| ((x * mu + y) * mu + z) as u32;
        let decode = |v: usize| ((v / (mu * mu)) % mu, (v / mu) % mu, v % mu);
        let mut targets = Vec::with_capacity(4);
        // right multiplication by a^{±1}: (x, y, z) -> (x±1, y, z)
        for dx in [1usize, mu - 1] {
            let mut map = Vec::with_capacity(n);
            for v in 0..n {
                let (x, y, z) = decode(v);
                map.push(idx((x + dx) % mu, y, z));
            }
            targets.push(map);
        }
        // right multiplication by b^{±1}: (x, y, z) -> (x, y±1, z±x)
        for dy in [1usize, mu - 1] {
            let mut map = Vec::with_capacity(n);
            for v in 0..n {
                let (x, y, z) = decode(v);
                let dz = if dy == 1 { x } else { (mu - x) % mu };
                map.push(idx(x, (y + dy) % mu, (z + dz) % mu));
            }
            targets.push(map);
        }
        Ok(CayleyAction {
            order: n,
            identity: 0,
            targets,
            name: format!("H(Z/{m})"),
        })
    }

    pub fn sl3(m: u64) -> Result<CayleyAction> {
        let (elems, index, gen_indices) = sl3_bfs(m, MAX_ACTION_ORDER)?;
        let n = elems.len();
        let gens = sl3_generators(m);
        let mut targets = Vec::with_capacity(gens.len());
        for g in &gens {
            let mut map = Vec::with_capacity(n);
            for e in &elems {
                map.push(index[&mat_mul(e, g, m as u16)]);
            }
            targets.push(map);
        }
        let _ = gen_indices;
        Ok(CayleyAction {
            order: n,
            identity: 0,
            targets,
            name: format!("SL3(Z/{m})"),
        })
    }
}

fn check_action_order(n: u128, name: &str) -> Result<usize> {
    if n == 0 || n > MAX_ACTION_ORDER as u128 {
        Err(Error::capacity(format!(
            "order of {name} exceeds action cap {MAX_ACTION_ORDER}"
        )))
    } else {
        Ok(n as usize)
    }
}

// ------------------------------------------------------------------------
// Normal subgroups
// ------------------------------------------------------------------------

/// A normal subgroup of a finite table group: sorted member indices, order
/// and index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalSubgroup {
    members: Vec<u32>,
    index: usize,
}

impl NormalSubgroup {
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn contains(&self, x: u32) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> BitSet {
        BitSet {
            words: alloc::vec![0u64; (n + 63) / 64],
        }
    }

    #[inline]
    fn get(&self, i: u32) -> bool {
        self.words[i as usize / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: u32) {
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    fn to_vec(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                out.push(w as u32 * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    fn from_members(n: usize, members: &[u32]) -> BitSet {
        let mut bs = BitSet::new(n);
        for &m in members {
            bs.set(m);
        }
        bs
    }
}

/// Conjugacy classes as (class id per element, class members per id).
pub fn conjugacy_classes(t: &FiniteGroupTable) -> (Vec<u32>, Vec<Vec<u32>>) {
    let n = t.order();
    let mut class_of = alloc::vec![u32::MAX; n];
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for x in 0..n as u32 {
        if class_of[x as usize] != u32::MAX {
            continue;
        }
        let id = classes.len() as u32;
        let mut orbit = alloc::vec![x];
        class_of[x as usize] = id;
        let mut head = 0;
        while head < orbit.len() {
            let y = orbit[head];
            head += 1;
            for &s in t.generators() {
                let c = t.mul(t.mul(s, y), t.inv(s));
                if class_of[c as usize] == u32::MAX {
                    class_of[c as usize] = id;
                    orbit.push(c);
                }
            }
        }
        orbit.sort_unstable();
        classes.push(orbit);
    }
    (class_of, classes)
}

/// Subgroup generated by a set, by breadth-first closure under right
/// multiplication (sufficient in a finite group).
fn generated_subgroup(t: &FiniteGroupTable, gens: &[u32]) -> BitSet {
    let mut bits = BitSet::new(t.order());
    bits.set(t.identity());
    let mut queue = alloc::vec![t.identity()];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for &g in gens {
            let y = t.mul(x, g);
            if !bits.get(y) {
                bits.set(y);
                queue.push(y);
            }
        }
    }
    bits
}

/// Complete, duplicate-free list of normal subgroups, from the trivial
/// subgroup to the whole group, sorted by (order, members).
pub fn enumerate_normal_subgroups(t: &FiniteGroupTable) -> Result<Vec<NormalSubgroup>> {
    enumerate_normal_subgroups_with_cap(t, ENUMERATION_CAP)
}

pub fn enumerate_normal_subgroups_with_cap(
    t: &FiniteGroupTable,
    cap: usize,
) -> Result<Vec<NormalSubgroup>> {
    let n = t.order();
    if n > cap {
        return Err(Error::capacity(format!(
            "normal-subgroup enumeration cap is {cap}, group order is {n}"
        )));
    }

    let (_, classes) = conjugacy_classes(t);

    // Atoms: normal closures of single classes. The closure of a
    // conjugation-closed set is normal.
    let mut atom_keys: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut atoms: Vec<(Vec<u32>, BitSet)> = Vec::new();
    for class in &classes {
        let bits = generated_subgroup(t, class);
        let members = bits.to_vec();
        if !atom_keys.contains_key(&members) {
            atom_keys.insert(members.clone(), atoms.len());
            atoms.push((members, bits));
        }
    }

    // Join-lattice search. The join of two normal subgroups N, A is the
    // product set NA, filled coset by coset.
    let trivial = alloc::vec![t.identity()];
    let mut found: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut subgroups: Vec<(Vec<u32>, BitSet)> = Vec::new();
    found.insert(trivial.clone(), 0);
    subgroups.push((trivial.clone(), BitSet::from_members(n, &trivial)));
    let mut head = 0;
    while head < subgroups.len() {
        for atom_id in 0..atoms.len() {
            let (n_members, n_bits) = &subgroups[head];
            let (a_members, a_bits) = &atoms[atom_id];
            if a_bits.is_subset_of(n_bits) {
                continue;
            }
            let mut j_bits = BitSet {
                words: n_bits.words.clone(),
            };
            let n_members = n_members.clone();
            for &a in a_members {
                if !j_bits.get(a) {
                    for &m in &n_members {
                        j_bits.set(t.mul(m, a));
                    }
                }
            }
            let j_members = j_bits.to_vec();
            if !found.contains_key(&j_members) {
                found.insert(j_members.clone(), subgroups.len());
                subgroups.push((j_members, j_bits));
            }
        }
        head += 1;
    }

    let mut out: Vec<NormalSubgroup> = subgroups
        .into_iter()
        .map(|(members, _)| NormalSubgroup {
            index: n / members.len(),
            members,
        })
        .collect();
    out.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members)));
    Ok(out)
}

/// Intersection of the given sorted member lists, starting from the whole
/// group.
fn intersect_members(order: usize, sets: &[&NormalSubgroup]) -> Vec<u32> {
    let mut cur: Vec<u32> = (0..order as u32).collect();
    for s in sets {
        cur.retain(|&x| s.contains(x));
    }
    cur
}

/// `Λ_k` of a finite table group for each `k = 2..=kmax`, as member lists.
pub fn finite_lambda_subgroups(
    t: &FiniteGroupTable,
    kmax: u64,
) -> Result<Vec<NormalSubgroup>> {
    let normals = enumerate_normal_subgroups(t)?;
    let mut out = Vec::new();
    for k in 2..=kmax {
        let relevant: Vec<&NormalSubgroup> = normals
            .iter()
            .filter(|s| s.index() as u64 <= k)
            .collect();
        let members = intersect_members(t.order(), &relevant);
        out.push(NormalSubgroup {
            index: t.order() / members.len(),
            members,
        });
    }
    Ok(out)
}

// ------------------------------------------------------------------------
// lcm sequence
// ------------------------------------------------------------------------

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `m_k = lcm(1..k)` for `k = 2..=kmax`, exact.
pub fn lcm_sequence(kmax: u64) -> Result<Vec<u128>> {
    if kmax < 2 {
        return Err(Error::usage("lcm sequence needs K >= 2"));
    }
    let mut out = Vec::with_capacity(kmax as usize - 1);
    let mut m: u128 = 1;
    for k in 2..=kmax {
        let k = k as u128;
        let g = gcd_u128(m, k);
        m = (m / g).checked_mul(k).ok_or_else(|| {
            Error::capacity("lcm sequence overflows 128-bit integers at this K")
        })?;
        out.push(m);
    }
    Ok(out)
}

/// `lcm(1..k)` for a single k.
pub fn lcm_value(k: u64) -> Result<u128> {
    Ok(*lcm_sequence(k.max(2))?.last().unwrap())
}

pub(crate) fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

// ------------------------------------------------------------------------
// Quotient maps
// ------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum KernelKind {
    /// `Z -> Z/m`
    IntegerMod(u64),
    /// `Z^d -> (Z/m)^d`, coordinatewise
    LatticeMod { dim: usize, m: u64 },
    /// `H -> H(Z/m)`, coordinatewise
    HeisenbergMod(u64),
    /// Identity map on a finite-table group
    Trivial,
}

/// A congruence quotient of a supported family, with the induced generating
/// multiset on the target.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: GroupDescriptor,
    kernel: KernelKind,
}

impl QuotientMap {
    pub fn integer_mod(m: u64) -> Result<QuotientMap> {
        if m < 1 {
            return Err(Error::usage("modulus must be at least 1"));
        }
        Ok(QuotientMap {
            source: GroupDescriptor::integer(),
            kernel: KernelKind::IntegerMod(m),
        })
    }

    pub fn lattice_mod(dim: usize, m: u64) -> Result<QuotientMap> {
        if m < 1 || dim < 1 {
            return Err(Error::usage("modulus and dimension must be at least 1"));
        }
        Ok(QuotientMap {
            source: GroupDescriptor::lattice(dim),
            kernel: KernelKind::LatticeMod { dim, m },
        })
    }

    pub fn heisenberg_mod(m: u64) -> Result<QuotientMap> {
        if m < 1 {
            return Err(Error::usage("modulus must be at least 1"));
        }
        Ok(QuotientMap {
            source: GroupDescriptor::heisenberg(),
            kernel: KernelKind::HeisenbergMod(m),
        })
    }

    /// Identity quotient of a finite-family group (the walk pushed to
    /// itself; the kernel is the trivial subgroup).
    pub fn trivial(group: &GroupDescriptor) -> Result<QuotientMap> {
        FiniteGroupTable::from_descriptor(group)?;
        Ok(QuotientMap {
            source: group.clone(),
            kernel: KernelKind::Trivial,
        })
    }

    pub fn source(&self) -> &GroupDescriptor {
        &self.source
    }

    pub fn kernel(&self) -> &KernelKind {
        &self.kernel
    }

    pub fn order(&self) -> Result<usize> {
        match &self.kernel {
            KernelKind::IntegerMod(m) => Ok(*m as usize),
            KernelKind::LatticeMod { dim, m } => (*m as u128)
                .checked_pow(*dim as u32)
                .filter(|&n| n <= usize::MAX as u128)
                .map(|n| n as usize)
                .ok_or_else(|| Error::capacity("quotient order overflows")),
            KernelKind::HeisenbergMod(m) => Ok((*m as usize).pow(3)),
            KernelKind::Trivial => Ok(FiniteGroupTable::from_descriptor(&self.source)?.order()),
        }
    }

    pub fn kernel_description(&self) -> String {
        match &self.kernel {
            KernelKind::IntegerMod(m) => format!("mod {m}"),
            KernelKind::LatticeMod { m, .. } => format!("mod {m} coordinatewise"),
            KernelKind::HeisenbergMod(m) => format!("Heisenberg mod {m}"),
            KernelKind::Trivial => "trivial".to_string(),
        }
    }

    pub fn name(&self) -> String {
        match &self.kernel {
            KernelKind::IntegerMod(m) => format!("Z mod {m}"),
            KernelKind::LatticeMod { dim, m } => format!("Z^{dim} mod {m}"),
            KernelKind::HeisenbergMod(m) => format!("H mod {m}"),
            KernelKind::Trivial => self.source.name().to_string(),
        }
    }

    /// Image of an element as a target index.
    pub fn apply(&self, g: &Element) -> Result<u32> {
        self.source.validate(g)?;
        match (&self.kernel, g) {
            (KernelKind::IntegerMod(m), Element::Integer(v)) => Ok(modulo(*v, *m) as u32),
            (KernelKind::LatticeMod { dim, m }, Element::Lattice(v)) => {
                let mut idx: u64 = 0;
                for i in 0..*dim {
                    idx = idx * m + modulo(v[i], *m);
                }
                Ok(idx as u32)
            }
            (KernelKind::HeisenbergMod(m), Element::Heisenberg(x, y, z)) => {
                Ok(((modulo(*x, *m) * m + modulo(*y, *m)) * m + modulo(*z, *m)) as u32)
            }
            (KernelKind::Trivial, Element::FiniteIndex(i)) => Ok(*i),
            (KernelKind::Trivial, _) => {
                // products of finite families: recompute through the table
                Err(Error::usage(
                    "trivial quotients accept only table-index elements",
                ))
            }
            _ => Err(Error::usage("element does not match quotient source")),
        }
    }

    /// Generator-action view of the target, with the induced generator
    /// multiset (images of the source generators, in order).
    pub fn action(&self) -> Result<CayleyAction> {
        match &self.kernel {
            KernelKind::IntegerMod(m) => CayleyAction::cyclic(*m),
            KernelKind::LatticeMod { dim, m } => CayleyAction::lattice_mod(*dim, *m),
            KernelKind::HeisenbergMod(m) => CayleyAction::heisenberg_mod(*m),
            KernelKind::Trivial => {
                let table = FiniteGroupTable::from_descriptor(&self.source)?;
                Ok(CayleyAction::from_table(&table))
            }
        }
    }

    /// Dense table of the target; only available under the table cap.
    pub fn table(&self) -> Result<Arc<FiniteGroupTable>> {
        match &self.kernel {
            KernelKind::IntegerMod(m) => {
                if *m as usize > MAX_TABLE_ORDER {
                    return Err(Error::capacity(format!(
                        "cyclic table order {m} exceeds cap {MAX_TABLE_ORDER}"
                    )));
                }
                Ok(Arc::new(FiniteGroupTable::cyclic(*m)))
            }
            KernelKind::LatticeMod { dim, m } => {
                let mut t = FiniteGroupTable::cyclic(*m);
                for _ in 1..*dim {
                    t = FiniteGroupTable::direct_product(&t, &FiniteGroupTable::cyclic(*m))?;
                }
                Ok(Arc::new(t))
            }
            KernelKind::HeisenbergMod(m) => Ok(Arc::new(FiniteGroupTable::heisenberg_mod(*m)?)),
            KernelKind::Trivial => FiniteGroupTable::from_descriptor(&self.source),
        }
    }
}

fn modulo(v: i64, m: u64) -> u64 {
    v.rem_euclid(m as i64) as u64
}

// ------------------------------------------------------------------------
// Intersection growth
// ------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Formula,
    Enumeration,
    Congruence,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Formula => "formula",
            Provenance::Enumeration => "enumeration",
            Provenance::Congruence => "congruence",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaEntry {
    pub k: u64,
    pub index: u128,
    pub provenance: Provenance,
}

/// Tail rule for the series `sum_{k > K} 1/[G:Λ_k]`, decided per family.
#[derive(Debug, Clone)]
pub enum TailRule {
    /// `[G:Λ_k] = m_k^d`: the tail is at most `2(K+1)/m_{K+1}^d`, where
    /// `next_m = m_{K+1}` (unpowered).
    ///
    /// Derivation: every term with `k > K` is at most `1/m_{K+1}^d`, and by
    /// Bertrand's postulate there is a prime in `(j, 2j]`, so
    /// `m_{2j} >= (j+1)·m_j`. Summing dyadic blocks of length `2^i (K+1)`
    /// whose terms shrink by at least `K+2 >= 2` per block bounds the tail
    /// by twice the first block, i.e. `2(K+1)/m_{K+1}^d`.
    LcmPower { next_m: u128, d: u32 },
    /// No usable tail bound for this family; only the truncation is known.
    Unknown,
}

/// Mapping `k -> [G:Λ_k]` for `2 <= k <= K`, with provenance per entry and
/// a tail-bound annotation.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub group: String,
    pub truncation: u64,
    pub entries: Vec<LambdaEntry>,
    pub tail: TailRule,
}

impl LambdaTable {
    pub fn tail_note(&self) -> String {
        match &self.tail {
            TailRule::LcmPower { next_m, d } => {
                let k = self.truncation;
                if *d == 1 {
                    format!("tail <= 2({})/{next_m} (lcm doubling via Bertrand)", k + 1)
                } else {
                    format!(
                        "tail <= 2({})/{next_m}^{d} (lcm doubling via Bertrand)",
                        k + 1
                    )
                }
            }
            TailRule::Unknown => format!("no tail bound; truncated at K={}", self.truncation),
        }
    }
}

/// Intersection-growth table for a supported family.
pub fn lambda_table(group: &GroupDescriptor, kmax: u64) -> Result<LambdaTable> {
    if kmax < 1 {
        return Err(Error::usage("lambda table needs K >= 1"));
    }
    match group.family() {
        Family::Integer => {
            let ms = lcm_sequence(kmax + 1)?;
            let entries = (2..=kmax)
                .map(|k| LambdaEntry {
                    k,
                    index: ms[(k - 2) as usize],
                    provenance: Provenance::Formula,
                })
                .collect();
            Ok(LambdaTable {
                group: group.name().to_string(),
                truncation: kmax,
                entries,
                tail: TailRule::LcmPower {
                    next_m: ms[(kmax - 1) as usize],
                    d: 1,
                },
            })
        }
        Family::Lattice(d) => {
            let ms = lcm_sequence(kmax + 1)?;
            let pow = |m: u128| -> Result<u128> {
                m.checked_pow(*d as u32)
                    .ok_or_else(|| Error::capacity("lattice index overflows 128-bit integers"))
            };
            let mut entries = Vec::new();
            for k in 2..=kmax {
                entries.push(LambdaEntry {
                    k,
                    index: pow(ms[(k - 2) as usize])?,
                    provenance: Provenance::Formula,
                });
            }
            // keep the entries' overflow guard for the tail value too
            pow(ms[(kmax - 1) as usize])?;
            Ok(LambdaTable {
                group: group.name().to_string(),
                truncation: kmax,
                entries,
                tail: TailRule::LcmPower {
                    next_m: ms[(kmax - 1) as usize],
                    d: *d as u32,
                },
            })
        }
        Family::FiniteTable(t) => {
            let lambdas = finite_lambda_subgroups(t, kmax)?;
            let entries = lambdas
                .iter()
                .enumerate()
                .map(|(i, s)| LambdaEntry {
                    k: i as u64 + 2,
                    index: s.index() as u128,
                    provenance: Provenance::Enumeration,
                })
                .collect();
            Ok(LambdaTable {
                group: group.name().to_string(),
                truncation: kmax,
                entries,
                tail: TailRule::Unknown,
            })
        }
        Family::Heisenberg => {
            let lambdas = heisenberg_lambda(kmax)?;
            let entries = lambdas
                .iter()
                .map(|l| LambdaEntry {
                    k: l.k,
                    index: l.index,
                    provenance: Provenance::Congruence,
                })
                .collect();
            Ok(LambdaTable {
                group: group.name().to_string(),
                truncation: kmax,
                entries,
                tail: TailRule::Unknown,
            })
        }
        Family::Product(a, b) => {
            let mut entries = Vec::new();
            for k in 2..=kmax {
                let ta = truncated_quotient_table(a, k)?;
                let tb = truncated_quotient_table(b, k)?;
                let t = FiniteGroupTable::direct_product(&ta, &tb)?;
                let lam = finite_lambda_subgroups(&t, k)?;
                let last = lam.last().expect("k >= 2 yields at least one entry");
                entries.push(LambdaEntry {
                    k,
                    index: last.index() as u128,
                    provenance: Provenance::Enumeration,
                });
            }
            Ok(LambdaTable {
                group: group.name().to_string(),
                truncation: kmax,
                entries,
                tail: TailRule::Unknown,
            })
        }
        Family::FreeRank2 => Err(Error::usage(
            "intersection growth of the free group is not computable here",
        )),
    }
}

/// `G/Λ_k(G)` as a table, used to reduce product groups to finite ones.
fn truncated_quotient_table(group: &GroupDescriptor, k: u64) -> Result<FiniteGroupTable> {
    match group.family() {
        Family::Integer => {
            let m = lcm_value(k)?;
            if m > MAX_TABLE_ORDER as u128 {
                return Err(Error::capacity(format!(
                    "truncated quotient Z/{m} exceeds table cap {MAX_TABLE_ORDER}"
                )));
            }
            Ok(FiniteGroupTable::cyclic(m as u64))
        }
        Family::Lattice(d) => {
            let m = lcm_value(k)?;
            if m.pow(*d as u32) > MAX_TABLE_ORDER as u128 {
                return Err(Error::capacity(format!(
                    "truncated quotient (Z/{m})^{d} exceeds table cap {MAX_TABLE_ORDER}"
                )));
            }
            let m = m as u64;
            let mut t = FiniteGroupTable::cyclic(m);
            for _ in 1..*d {
                t = FiniteGroupTable::direct_product(&t, &FiniteGroupTable::cyclic(m))?;
            }
            Ok(t)
        }
        Family::FiniteTable(t) => {
            let lam = finite_lambda_subgroups(t, k)?;
            Ok(t.quotient_by(lam.last().expect("k >= 2")))
        }
        Family::Heisenberg => {
            let m = lcm_value(k)?;
            if m.pow(3) > MAX_TABLE_ORDER as u128 {
                return Err(Error::capacity(format!(
                    "truncated Heisenberg quotient mod {m} exceeds table cap {MAX_TABLE_ORDER}"
                )));
            }
            let t = FiniteGroupTable::heisenberg_mod(m as u64)?;
            let lam = finite_lambda_subgroups(&t, k)?;
            Ok(t.quotient_by(lam.last().expect("k >= 2")))
        }
        Family::Product(a, b) => {
            let ta = truncated_quotient_table(a, k)?;
            let tb = truncated_quotient_table(b, k)?;
            FiniteGroupTable::direct_product(&ta, &tb)
        }
        Family::FreeRank2 => Err(Error::usage(
            "truncated quotients of the free group are not available",
        )),
    }
}

// ------------------------------------------------------------------------
// Heisenberg congruence machinery
// ------------------------------------------------------------------------

/// Enumerated data for one congruence level `H(Z/q)`, `q` a prime power.
#[derive(Debug)]
pub struct HeisenbergPrimePower {
    pub q: u64,
    pub table: Arc<FiniteGroupTable>,
    pub normals: Vec<NormalSubgroup>,
}

pub fn heisenberg_prime_power(q: u64) -> Result<Arc<HeisenbergPrimePower>> {
    let table = Arc::new(FiniteGroupTable::heisenberg_mod(q)?);
    let normals = enumerate_normal_subgroups(&table)?;
    Ok(Arc::new(HeisenbergPrimePower { q, table, normals }))
}

/// Membership data for `Λ_k` of the discrete Heisenberg group.
///
/// Every finite quotient of order `j` factors through `H(Z/j)`: the subgroup
/// generated by j-th powers contains the mod-j congruence kernel, because
/// `a^j, b^j, c^j` (with `c = [a,b]` central) already generate it, and j-th
/// powers die in any group of order j. Hence `Λ_k` is the mod-`m_k` preimage
/// of `Λ_k(H(Z/m_k))`, which splits over the prime-power parts of `m_k`.
#[derive(Debug, Clone)]
pub struct HeisenbergLambda {
    pub k: u64,
    /// `m_k = lcm(1..k)`
    pub modulus: u64,
    /// `[H : Λ_k]`
    pub index: u128,
    /// per prime power `q | m_k`: (q, members of `Λ_k(H(Z/q))`)
    factors: Vec<(u64, Vec<u32>)>,
}

impl HeisenbergLambda {
    pub fn contains(&self, g: &Element) -> Result<bool> {
        let (x, y, z) = match g {
            Element::Heisenberg(x, y, z) => (*x, *y, *z),
            _ => return Err(Error::usage("Heisenberg element expected")),
        };
        for (q, members) in &self.factors {
            let idx =
                ((modulo(x, *q) * q + modulo(y, *q)) * q + modulo(z, *q)) as u32;
            if members.binary_search(&idx).is_err() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn factors(&self) -> &[(u64, Vec<u32>)] {
        &self.factors
    }
}

/// `Λ_k` data for `k = 2..=kmax`, computed prime-power-wise.
pub fn heisenberg_lambda(kmax: u64) -> Result<Vec<HeisenbergLambda>> {
    heisenberg_lambda_with_cap(kmax, HEISENBERG_LAMBDA_CAP)
}

pub fn heisenberg_lambda_with_cap(kmax: u64, cap: u64) -> Result<Vec<HeisenbergLambda>> {
    if kmax > cap {
        return Err(Error::capacity(format!(
            "Heisenberg lambda truncation cap is {cap}, requested K={kmax}"
        )));
    }
    if kmax < 2 {
        return Err(Error::usage("Heisenberg lambda needs K >= 2"));
    }
    let ms = lcm_sequence(kmax)?;
    let mut cache: BTreeMap<u64, Arc<HeisenbergPrimePower>> = BTreeMap::new();
    let mut out = Vec::new();
    for k in 2..=kmax {
        let m = ms[(k - 2) as usize];
        if m > u64::MAX as u128 {
            return Err(Error::capacity("Heisenberg lambda modulus overflows"));
        }
        let m = m as u64;
        let mut index: u128 = 1;
        let mut factors = Vec::new();
        for (p, a) in factor_u64(m) {
            let q = p.pow(a);
            let data = match cache.get(&q) {
                Some(d) => d.clone(),
                None => {
                    let d = heisenberg_prime_power(q)?;
                    cache.insert(q, d.clone());
                    d
                }
            };
            let relevant: Vec<&NormalSubgroup> = data
                .normals
                .iter()
                .filter(|s| s.index() as u64 <= k)
                .collect();
            let members = intersect_members(data.table.order(), &relevant);
            index = index
                .checked_mul((data.table.order() / members.len()) as u128)
                .ok_or_else(|| Error::capacity("Heisenberg lambda index overflows"))?;
            factors.push((q, members));
        }
        out.push(HeisenbergLambda {
            k,
            modulus: m,
            index,
            factors,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::make_direct_product;

    #[test]
    fn cyclic_table_is_a_group() {
        for m in [1u64, 2, 3, 6, 12] {
            let t = FiniteGroupTable::cyclic(m);
            t.validate().unwrap();
        }
    }

    #[test]
    fn heisenberg_table_is_a_group() {
        for m in [2u64, 3, 4, 6] {
            let t = FiniteGroupTable::heisenberg_mod(m).unwrap();
            t.validate().unwrap();
            assert_eq!(t.order(), (m * m * m) as usize);
        }
    }

    #[test]
    fn product_table_is_a_group_and_covers() {
        let t = FiniteGroupTable::direct_product(
            &FiniteGroupTable::cyclic(2),
            &FiniteGroupTable::cyclic(3),
        )
        .unwrap();
        t.validate().unwrap();
        assert_eq!(t.order(), 6);
        // BFS over the generators reaches all 6 elements
        let all = generated_subgroup(&t, t.generators());
        assert_eq!(all.to_vec().len(), 6);
    }

    #[test]
    fn sl3_mod2_order_is_168() {
        let t = FiniteGroupTable::sl3_mod(2).unwrap();
        assert_eq!(t.order(), 168); // (8-1)(8-2)(8-4)
        t.validate().unwrap();
        let a = CayleyAction::sl3(2).unwrap();
        assert_eq!(a.order(), 168);
        assert_eq!(a.generator_count(), 12);
    }

    #[test]
    fn sl3_mod3_action_order_is_5616() {
        let a = CayleyAction::sl3(3).unwrap();
        assert_eq!(a.order(), 5616);
        assert!(FiniteGroupTable::sl3_mod(3).is_err()); // above the table cap
    }

    /// Oracle: exhaustive subset check of the normal subgroups of Z/6.
    #[test]
    fn normal_subgroups_of_z6_match_exhaustive_subsets() {
        let t = FiniteGroupTable::cyclic(6);
        let normals = enumerate_normal_subgroups(&t).unwrap();
        let mut expected: Vec<Vec<u32>> = Vec::new();
        for mask in 0u32..64 {
            if mask & 1 == 0 {
                continue; // must contain identity
            }
            let members: Vec<u32> = (0..6).filter(|&i| mask >> i & 1 == 1).collect();
            let set = |x: u32| members.binary_search(&x).is_ok();
            let closed = members.iter().all(|&a| {
                members.iter().all(|&b| set(t.mul(a, b))) && set(t.inv(a))
            });
            // abelian: conjugation closure is automatic
            if closed {
                expected.push(members);
            }
        }
        expected.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        let got: Vec<Vec<u32>> = normals.iter().map(|s| s.members().to_vec()).collect();
        assert_eq!(got, expected);
        let indices: Vec<usize> = normals.iter().map(|s| s.index()).collect();
        assert_eq!(indices, alloc::vec![6, 3, 2, 1]);
    }

    /// Oracle: exhaustive subset check on a nonabelian group of order 8
    /// (the Heisenberg group mod 2, which is dihedral).
    #[test]
    fn normal_subgroups_of_h_mod_2_match_exhaustive_subsets() {
        let t = FiniteGroupTable::heisenberg_mod(2).unwrap();
        let normals = enumerate_normal_subgroups(&t).unwrap();
        let mut expected = 0usize;
        for mask in 0u32..256 {
            if mask & 1 == 0 {
                continue;
            }
            let members: Vec<u32> = (0..8).filter(|&i| mask >> i & 1 == 1).collect();
            let set = |x: u32| members.binary_search(&x).is_ok();
            let closed = members.iter().all(|&a| {
                members.iter().all(|&b| set(t.mul(a, b)))
                    && set(t.inv(a))
                    && (0..8u32).all(|g| set(t.mul(t.mul(g, a), t.inv(g))))
            });
            if closed {
                expected += 1;
            }
        }
        assert_eq!(normals.len(), expected);
        // dihedral of order 8: 1, center, three order-4 subgroups, whole
        assert_eq!(normals.len(), 6);
    }

    #[test]
    fn trivial_group_has_exactly_one_subgroup() {
        let t = FiniteGroupTable::cyclic(1);
        let normals = enumerate_normal_subgroups(&t).unwrap();
        assert_eq!(normals.len(), 1);
        assert_eq!(normals[0].index(), 1);
    }

    #[test]
    fn enumeration_cap_is_reported() {
        let t = FiniteGroupTable::cyclic(20);
        let err = enumerate_normal_subgroups_with_cap(&t, 10).unwrap_err();
        match err {
            Error::Capacity(msg) => assert!(msg.contains("10")),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn lcm_sequence_examples() {
        assert_eq!(lcm_sequence(5).unwrap(), alloc::vec![2, 6, 12, 60]);
        let ms = lcm_sequence(7).unwrap();
        assert_eq!(ms[4], 60); // m_6
        assert_eq!(ms[5], 420); // m_7
        // nesting as divisibility: m_k | m_{k+1}
        let ms = lcm_sequence(40).unwrap();
        for w in ms.windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
    }

    /// Oracle: m_k changes exactly at prime powers.
    #[test]
    fn lcm_stalls_exactly_off_prime_powers() {
        fn is_prime_power(n: u64) -> bool {
            let f = factor_u64(n);
            f.len() == 1
        }
        let ms = lcm_sequence(40).unwrap();
        for k in 3..=40u64 {
            let cur = ms[(k - 2) as usize];
            let prev = ms[(k - 3) as usize];
            if is_prime_power(k) {
                assert!(cur > prev, "m_{k} should grow");
            } else {
                assert_eq!(cur, prev, "m_{k} should stall");
            }
        }
    }

    #[test]
    fn lambda_table_integer() {
        let t = lambda_table(&GroupDescriptor::integer(), 5).unwrap();
        let idx: Vec<u128> = t.entries.iter().map(|e| e.index).collect();
        assert_eq!(idx, alloc::vec![2, 6, 12, 60]);
        assert!(matches!(t.tail, TailRule::LcmPower { next_m: 60, d: 1 }));
    }

    #[test]
    fn lambda_table_z6() {
        let z6 = GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(6)));
        let t = lambda_table(&z6, 3).unwrap();
        let idx: Vec<u128> = t.entries.iter().map(|e| e.index).collect();
        // Λ_2 = {0,2,4} (index 2), Λ_3 = {0} (index 6)
        assert_eq!(idx, alloc::vec![2, 6]);
    }

    #[test]
    fn lambda_indices_are_nondecreasing_and_bounded_below() {
        let groups = alloc::vec![
            GroupDescriptor::integer(),
            GroupDescriptor::lattice(2),
            GroupDescriptor::heisenberg(),
            GroupDescriptor::finite(Arc::new(FiniteGroupTable::heisenberg_mod(2).unwrap())),
        ];
        for g in groups {
            let t = lambda_table(&g, 8).unwrap();
            for w in t.entries.windows(2) {
                assert!(w[0].index <= w[1].index, "indices non-decreasing in {}", g.name());
            }
        }
        // [G:Λ_k] >= largest realized single-subgroup index <= k
        let z6 = FiniteGroupTable::cyclic(6);
        let normals = enumerate_normal_subgroups(&z6).unwrap();
        let lam = finite_lambda_subgroups(&z6, 6).unwrap();
        for (i, l) in lam.iter().enumerate() {
            let k = i + 2;
            let biggest = normals
                .iter()
                .map(|s| s.index())
                .filter(|&x| x <= k)
                .max()
                .unwrap_or(1);
            assert!(l.index() >= biggest);
        }
    }

    #[test]
    fn lambda_nesting_in_finite_groups() {
        let t = FiniteGroupTable::heisenberg_mod(2).unwrap();
        let lam = finite_lambda_subgroups(&t, 8).unwrap();
        for w in lam.windows(2) {
            // Λ_{k+1} ⊆ Λ_k
            assert!(w[1].members().iter().all(|&x| w[0].contains(x)));
        }
    }

    #[test]
    fn lambda_is_normal_in_enumerated_cases() {
        let t = FiniteGroupTable::heisenberg_mod(3).unwrap();
        let lam = finite_lambda_subgroups(&t, 9).unwrap();
        for l in lam {
            for &x in l.members() {
                for g in 0..t.order() as u32 {
                    assert!(l.contains(t.mul(t.mul(g, x), t.inv(g))));
                }
            }
        }
    }

    #[test]
    fn heisenberg_lambda_crt_equals_direct_enumeration() {
        // prime-power-wise computation vs direct enumeration on H(Z/m)
        for k in 2..=4u64 {
            let lam = heisenberg_lambda(k).unwrap();
            let l = lam.last().unwrap();
            let m = l.modulus;
            let t = FiniteGroupTable::heisenberg_mod(m).unwrap();
            let direct = finite_lambda_subgroups(&t, k).unwrap();
            let direct = direct.last().unwrap();
            let mi = m as i64;
            let mut count = 0usize;
            for x in 0..mi {
                for y in 0..mi {
                    for z in 0..mi {
                        let el = Element::Heisenberg(x, y, z);
                        let idx = ((x * mi + y) * mi + z) as u32;
                        let in_crt = l.contains(&el).unwrap();
                        assert_eq!(
                            in_crt,
                            direct.contains(idx),
                            "k={k} m={m} at ({x},{y},{z})"
                        );
                        if in_crt {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(l.index, (t.order() / count) as u128);
        }
    }

    #[test]
    fn quotient_maps_are_homomorphisms_on_samples() {
        use crate::rng::SequenceRng;
        let cases: Vec<QuotientMap> = alloc::vec![
            QuotientMap::integer_mod(7).unwrap(),
            QuotientMap::lattice_mod(2, 4).unwrap(),
            QuotientMap::heisenberg_mod(3).unwrap(),
        ];
        for q in cases {
            let action = q.action().unwrap();
            let table = q.table().unwrap();
            table.validate().unwrap();
            assert_eq!(action.order(), table.order());
            // action agrees with table on generator columns
            for (gi, &g) in table.generators().iter().enumerate() {
                for x in 0..table.order() as u32 {
                    assert_eq!(action.target(gi)[x as usize], table.mul(x, g));
                }
            }
            let src = q.source().clone();
            let mut rng = SequenceRng::new(0xfeed);
            for _ in 0..10_000 {
                let g = sample(&src, &mut rng);
                let h = sample(&src, &mut rng);
                let gh = src.multiply(&g, &h).unwrap();
                assert_eq!(
                    q.apply(&gh).unwrap(),
                    table.mul(q.apply(&g).unwrap(), q.apply(&h).unwrap())
                );
            }
            // surjectivity via BFS ball of the documented radius (the
            // modulus bounds the diameter for these congruence quotients)
            let mut seen = alloc::collections::BTreeSet::new();
            let mut frontier = alloc::vec![src.identity()];
            seen.insert(q.apply(&src.identity()).unwrap());
            for _ in 0..12 {
                let mut next = Vec::new();
                for el in &frontier {
                    for s in src.generators() {
                        let t = src.multiply(el, s).unwrap();
                        if seen.insert(q.apply(&t).unwrap()) {
                            next.push(t);
                        }
                    }
                }
                frontier = next;
            }
            assert_eq!(seen.len(), table.order(), "surjectivity of {}", q.name());
        }

        fn sample(g: &GroupDescriptor, rng: &mut SequenceRng) -> Element {
            match g.family() {
                Family::Integer => Element::Integer(rng.next_signed(500)),
                Family::Lattice(d) => {
                    Element::Lattice((0..*d).map(|_| rng.next_signed(500)).collect())
                }
                Family::Heisenberg => Element::Heisenberg(
                    rng.next_signed(200),
                    rng.next_signed(200),
                    rng.next_signed(200),
                ),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn quotient_by_rebuilds_a_group() {
        let t = FiniteGroupTable::cyclic(12);
        let normals = enumerate_normal_subgroups(&t).unwrap();
        let n4 = normals.iter().find(|s| s.index() == 4).unwrap();
        let q = t.quotient_by(n4);
        q.validate().unwrap();
        assert_eq!(q.order(), 4);
    }

    #[test]
    fn product_lambda_table_small() {
        let z4 = GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(4)));
        let z6 = GroupDescriptor::finite(Arc::new(FiniteGroupTable::cyclic(6)));
        let p = make_direct_product(&z4, &z6);
        let t = lambda_table(&p, 4).unwrap();
        // sanity: indices non-decreasing, at least the cyclic factors' growth
        assert!(t.entries[0].index >= 4); // Λ_2 at least index 4 in Z/4 x Z/6
        for w in t.entries.windows(2) {
            assert!(w[0].index <= w[1].index);
        }
    }
}
