//! The atom hierarchy as a purely combinatorial object.
//!
//! Generation 0 is a single root atom and generation 1 is a pair of atoms with
//! the complete edge relation. Every atom of generation `g >= 2` is a tagged
//! triple `(first, middle, third, tag)` of generation `g - 1` atoms with
//! `first -> middle -> third`; its parent is `middle` and its out-neighbours
//! are exactly the atoms whose `(first, middle)` equals its `(middle, third)`.
//!
//! Indices use a middle-major mixed-radix code:
//!
//! ```text
//! index = ((middle * deg + in_rank(middle, first)) * deg + out_rank(middle, third)) * 2 + tag
//! ```
//!
//! with `deg = 2^(g-1)`, so the children of any atom occupy one contiguous
//! index range.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::report::{Outcome, VerificationReport};

/// Indices are 64-bit, so `2^(g^2)` must fit: `g <= 7`.
pub const MAX_GEN: u32 = 7;
/// Default cap for operations that enumerate a whole generation.
pub const ENUMERATION_CAP: u32 = 4;

/// One atom: a generation and a canonical index below `2^(gen^2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "(u32, u64)", try_from = "(u32, u64)")]
pub struct AtomId {
    gen: u32,
    index: u64,
}

impl AtomId {
    pub const ROOT: AtomId = AtomId { gen: 0, index: 0 };

    pub fn new(gen: u32, index: u64) -> Result<Self> {
        if gen > MAX_GEN {
            return Err(Error::GenerationCap { gen, cap: MAX_GEN });
        }
        if index >= generation_size(gen) {
            return Err(Error::IndexOutOfRange { gen, index });
        }
        Ok(Self { gen, index })
    }

    pub(crate) const fn raw(gen: u32, index: u64) -> Self {
        Self { gen, index }
    }

    pub fn gen(self) -> u32 {
        self.gen
    }

    pub fn index(self) -> u64 {
        self.index
    }

    /// All atoms of one generation in index order.
    pub fn all(gen: u32) -> impl Iterator<Item = AtomId> + Clone {
        assert!(gen <= MAX_GEN, "generation {gen} above cap");
        (0..generation_size(gen)).map(move |index| AtomId { gen, index })
    }
}

impl fmt::Debug for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.gen, self.index)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.gen, self.index)
    }
}

impl From<AtomId> for (u32, u64) {
    fn from(a: AtomId) -> Self {
        (a.gen, a.index)
    }
}

impl TryFrom<(u32, u64)> for AtomId {
    type Error = Error;

    fn try_from((gen, index): (u32, u64)) -> Result<Self> {
        AtomId::new(gen, index)
    }
}

/// Decoded form of an atom of generation >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomTriple {
    pub first: AtomId,
    pub middle: AtomId,
    pub third: AtomId,
    pub tag: u8,
}

impl AtomTriple {
    pub fn new(first: AtomId, middle: AtomId, third: AtomId, tag: u8) -> Self {
        Self {
            first,
            middle,
            third,
            tag,
        }
    }
}

/// Position within a canonically ordered in- or out-neighbour list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRank(pub u64);

fn check_gen(gen: u32) -> Result<()> {
    if gen > MAX_GEN {
        Err(Error::GenerationCap { gen, cap: MAX_GEN })
    } else {
        Ok(())
    }
}

/// `2^(gen^2)` as a machine integer; `gen <= MAX_GEN`.
pub fn generation_size(gen: u32) -> u64 {
    1u64 << (gen * gen)
}

/// Number of atoms of generation `n`: `2^(n^2)`.
pub fn atom_count(n: u32) -> BigUint {
    BigUint::one() << (n as u64 * n as u64)
}

/// In- and out-degree of every atom of generation `gen`.
pub fn degree(gen: u32) -> u64 {
    1u64 << gen
}

/// Children per parent of generation `gen`.
pub fn children_per_parent(gen: u32) -> u64 {
    if gen == 0 {
        2
    } else {
        1u64 << (2 * gen + 1)
    }
}

struct Digits {
    middle: u64,
    in_rank: u64,
    out_rank: u64,
    tag: u8,
}

fn digits(a: AtomId) -> Digits {
    debug_assert!(a.gen >= 2);
    let deg = degree(a.gen - 1);
    let tag = (a.index & 1) as u8;
    let rest = a.index >> 1;
    let out_rank = rest % deg;
    let rest = rest / deg;
    Digits {
        middle: rest / deg,
        in_rank: rest % deg,
        out_rank,
        tag,
    }
}

fn compose(gen: u32, middle: u64, in_rank: u64, out_rank: u64, tag: u8) -> AtomId {
    let deg = degree(gen - 1);
    AtomId::raw(gen, ((middle * deg + in_rank) * deg + out_rank) * 2 + tag as u64)
}

pub fn decode(a: AtomId) -> Result<AtomTriple> {
    if a.gen < 2 {
        return Err(Error::PrimitiveAtom(a.gen));
    }
    Ok(decode_unchecked(a))
}

fn decode_unchecked(a: AtomId) -> AtomTriple {
    let d = digits(a);
    let middle = AtomId::raw(a.gen - 1, d.middle);
    AtomTriple {
        first: in_unrank_unchecked(middle, d.in_rank),
        middle,
        third: out_unrank_unchecked(middle, d.out_rank),
        tag: d.tag,
    }
}

fn middle_of(a: AtomId) -> AtomId {
    AtomId::raw(a.gen - 1, digits(a).middle)
}

fn first_of(a: AtomId) -> AtomId {
    let d = digits(a);
    in_unrank_unchecked(AtomId::raw(a.gen - 1, d.middle), d.in_rank)
}

fn third_of(a: AtomId) -> AtomId {
    let d = digits(a);
    out_unrank_unchecked(AtomId::raw(a.gen - 1, d.middle), d.out_rank)
}

pub fn encode(t: &AtomTriple) -> Result<AtomId> {
    let g = t.middle.gen;
    if t.first.gen != g || t.third.gen != g {
        return Err(Error::InvalidTriple(format!(
            "mixed generations {}, {}, {}",
            t.first.gen, t.middle.gen, t.third.gen
        )));
    }
    if g + 1 > MAX_GEN {
        return Err(Error::GenerationCap {
            gen: g + 1,
            cap: MAX_GEN,
        });
    }
    if t.tag > 1 {
        return Err(Error::InvalidTriple(format!("tag {} is not a bit", t.tag)));
    }
    if !is_edge_unchecked(t.first, t.middle) {
        return Err(Error::InvalidTriple(format!(
            "no edge {} -> {}",
            t.first, t.middle
        )));
    }
    if !is_edge_unchecked(t.middle, t.third) {
        return Err(Error::InvalidTriple(format!(
            "no edge {} -> {}",
            t.middle, t.third
        )));
    }
    Ok(encode_unchecked(t))
}

fn encode_unchecked(t: &AtomTriple) -> AtomId {
    compose(
        t.middle.gen + 1,
        t.middle.index,
        in_rank_unchecked(t.middle, t.first),
        out_rank_unchecked(t.middle, t.third),
        t.tag,
    )
}

pub fn parent(a: AtomId) -> Result<AtomId> {
    match a.gen {
        0 => Err(Error::RootHasNoParent),
        1 => Ok(AtomId::ROOT),
        _ => Ok(middle_of(a)),
    }
}

/// All atoms of generation `a.gen + 1` inside `a`, in index order.
pub fn children(a: AtomId) -> Result<Vec<AtomId>> {
    let gen = a.gen + 1;
    check_gen(gen)?;
    let per = children_per_parent(a.gen);
    Ok((a.index * per..(a.index + 1) * per)
        .map(|index| AtomId::raw(gen, index))
        .collect())
}

/// All atoms of generation `gen` inside `a`; always a contiguous index range.
pub fn descendants(a: AtomId, gen: u32) -> Result<impl Iterator<Item = AtomId>> {
    if gen < a.gen {
        return Err(Error::AncestorAbove {
            target: a.gen,
            gen,
        });
    }
    check_gen(gen)?;
    let shift = gen * gen - a.gen * a.gen;
    Ok((a.index << shift..(a.index + 1) << shift).map(move |index| AtomId::raw(gen, index)))
}

pub fn is_edge(a: AtomId, b: AtomId) -> Result<bool> {
    if a.gen != b.gen {
        return Err(Error::GenerationMismatch(a.gen, b.gen));
    }
    Ok(is_edge_unchecked(a, b))
}

pub(crate) fn is_edge_unchecked(a: AtomId, b: AtomId) -> bool {
    if a.gen < 2 {
        return true;
    }
    middle_of(b) == third_of(a) && first_of(b) == middle_of(a)
}

fn check_rank(gen: u32, r: EdgeRank) -> Result<()> {
    let degree = degree(gen);
    if r.0 >= degree {
        Err(Error::RankOutOfRange { rank: r.0, degree })
    } else {
        Ok(())
    }
}

/// Out-neighbours of `(D, B, C, j)` are `(B, C, C', j')` ordered by
/// `(out_rank(C, C'), j')`.
pub fn out_unrank(a: AtomId, r: EdgeRank) -> Result<AtomId> {
    check_rank(a.gen, r)?;
    Ok(out_unrank_unchecked(a, r.0))
}

fn out_unrank_unchecked(a: AtomId, r: u64) -> AtomId {
    match a.gen {
        0 => AtomId::ROOT,
        1 => AtomId::raw(1, r),
        g => {
            let middle = middle_of(a);
            let third = third_of(a);
            compose(
                g,
                third.index,
                in_rank_unchecked(third, middle),
                r >> 1,
                (r & 1) as u8,
            )
        }
    }
}

/// In-neighbours of `(D, B, C, j)` are `(W, D, B, j'')` ordered by
/// `(in_rank(D, W), j'')`.
pub fn in_unrank(a: AtomId, r: EdgeRank) -> Result<AtomId> {
    check_rank(a.gen, r)?;
    Ok(in_unrank_unchecked(a, r.0))
}

fn in_unrank_unchecked(a: AtomId, r: u64) -> AtomId {
    match a.gen {
        0 => AtomId::ROOT,
        1 => AtomId::raw(1, r),
        g => {
            let middle = middle_of(a);
            let first = first_of(a);
            compose(
                g,
                first.index,
                r >> 1,
                out_rank_unchecked(first, middle),
                (r & 1) as u8,
            )
        }
    }
}

/// Rank of `b` in the out-neighbour list of `a`.
pub fn out_rank(a: AtomId, b: AtomId) -> Result<EdgeRank> {
    if !is_edge(a, b)? {
        return Err(Error::NotAnEdge(format!("{a} -> {b}")));
    }
    Ok(EdgeRank(out_rank_unchecked(a, b)))
}

fn out_rank_unchecked(a: AtomId, b: AtomId) -> u64 {
    match a.gen {
        0 => 0,
        1 => b.index,
        _ => {
            // a = (D, B, C, j), b = (B, C, C', j'): b's out-rank digit is
            // out_rank(C, C') because b.middle = C.
            let db = digits(b);
            db.out_rank * 2 + db.tag as u64
        }
    }
}

/// Rank of `b` in the in-neighbour list of `a`.
pub fn in_rank(a: AtomId, b: AtomId) -> Result<EdgeRank> {
    if !is_edge(b, a)? {
        return Err(Error::NotAnEdge(format!("{b} -> {a}")));
    }
    Ok(EdgeRank(in_rank_unchecked(a, b)))
}

fn in_rank_unchecked(a: AtomId, b: AtomId) -> u64 {
    match a.gen {
        0 => 0,
        1 => b.index,
        _ => {
            // a = (D, B, C, j), b = (W, D, B, j''): b's in-rank digit is
            // in_rank(D, W) because b.middle = D.
            let db = digits(b);
            db.in_rank * 2 + db.tag as u64
        }
    }
}

pub fn out_neighbors(a: AtomId) -> Vec<AtomId> {
    (0..degree(a.gen))
        .map(|r| out_unrank_unchecked(a, r))
        .collect()
}

pub fn in_neighbors(a: AtomId) -> Vec<AtomId> {
    (0..degree(a.gen))
        .map(|r| in_unrank_unchecked(a, r))
        .collect()
}

/// Exhaustive check of the atom axioms at generation `n`.
pub fn verify_axioms(n: u32) -> Result<VerificationReport> {
    verify_axioms_capped(n, ENUMERATION_CAP)
}

/// As [`verify_axioms`] with an explicit enumeration cap (at most 5).
pub fn verify_axioms_capped(n: u32, cap: u32) -> Result<VerificationReport> {
    let cap = cap.min(5);
    if n > cap {
        return Err(Error::GenerationCap { gen: n, cap });
    }
    let mut report = VerificationReport::new();
    let params = json!({ "gen": n });

    report.check("atom_count", params.clone(), || {
        let enumerated = AtomId::all(n).count() as u64;
        Outcome::equal(atom_count(n), BigUint::from(enumerated))
    });

    if n >= 2 {
        report.check("codec_bijective", params.clone(), || {
            let bad = (0..generation_size(n)).into_par_iter().find_map_first(|i| {
                let a = AtomId::raw(n, i);
                let t = decode_unchecked(a);
                match encode(&t) {
                    Ok(b) if b == a => None,
                    Ok(b) => Some(format!("{a} decodes to {t:?} which encodes to {b}")),
                    Err(e) => Some(format!("{a} decodes to invalid triple: {e}")),
                }
            });
            Outcome::holds("encode(decode(a)) = a for every atom", bad)
        });
    }

    if n >= 1 {
        report.check("children", params.clone(), || {
            let expected = children_per_parent(n - 1);
            let bad = (0..generation_size(n - 1))
                .into_par_iter()
                .find_map_first(|i| {
                    let p = AtomId::raw(n - 1, i);
                    let kids = children(p).ok()?;
                    if kids.len() as u64 != expected {
                        return Some(format!("{p} has {} children", kids.len()));
                    }
                    kids.iter()
                        .find(|c| parent(**c).ok() != Some(p))
                        .map(|c| format!("child {c} of {p} reports another parent"))
                });
            Outcome::holds(&format!("every parent has {expected} children"), bad)
        });
    }

    if n == 1 {
        report.check("complete_relation", params.clone(), || {
            let all: Vec<_> = AtomId::all(1).collect();
            let bad = all
                .iter()
                .flat_map(|a| all.iter().map(move |b| (*a, *b)))
                .find(|(a, b)| !is_edge_unchecked(*a, *b))
                .map(|(a, b)| format!("{a} -/-> {b}"));
            Outcome::holds("B_i -> B_j for all i, j", bad)
        });
    }

    if n >= 2 {
        report.check("partitions", params.clone(), || {
            Outcome::holds(
                "|Omega(B)| = 2^(2n-1), |Omega(D,B)| = 2^n, |Gamma(D,B,C)| = 2",
                check_partitions(n),
            )
        });
        report.check("condition_d", params.clone(), || {
            Outcome::holds(
                "out-set of G in Gamma(D,B,C) is exactly Omega(B,C)",
                check_condition_d(n),
            )
        });
    }

    report.check("degrees", params.clone(), || {
        Outcome::holds(
            &format!("in-degree = out-degree = {}", degree(n)),
            check_degrees(n),
        )
    });

    if (2..=3).contains(&n) {
        report.check("edge_filter_brute_force", params, || {
            let all: Vec<_> = AtomId::all(n).collect();
            let bad = all.par_iter().find_map_first(|&a| {
                let filtered: Vec<AtomId> = all
                    .iter()
                    .copied()
                    .filter(|&b| is_edge_unchecked(a, b))
                    .collect();
                let mut listed = out_neighbors(a);
                listed.sort();
                (filtered != listed).then(|| format!("{a}: filter {filtered:?} vs list {listed:?}"))
            });
            Outcome::holds("is_edge filter equals out_neighbors", bad)
        });
    }

    Ok(report)
}

fn check_partitions(n: u32) -> Option<String> {
    let deg_prev = degree(n - 1);
    let omega_db = degree(n);
    (0..generation_size(n - 1))
        .into_par_iter()
        .find_map_first(|bi| {
            let b = AtomId::raw(n - 1, bi);
            let kids = children(b).ok()?;
            let mut by_d: HashMap<AtomId, Vec<AtomTriple>> = HashMap::new();
            for c in &kids {
                let t = decode_unchecked(*c);
                if t.middle != b {
                    return Some(format!("child {c} of {b} has middle {}", t.middle));
                }
                by_d.entry(t.first).or_default().push(t);
            }
            if by_d.len() as u64 != deg_prev {
                return Some(format!("{b}: {} classes Omega(D,B)", by_d.len()));
            }
            for (d, members) in &by_d {
                if !is_edge_unchecked(*d, b) {
                    return Some(format!("class Omega({d},{b}) but no edge"));
                }
                if members.len() as u64 != omega_db {
                    return Some(format!("|Omega({d},{b})| = {}", members.len()));
                }
                let mut by_c: HashMap<AtomId, usize> = HashMap::new();
                for t in members {
                    *by_c.entry(t.third).or_default() += 1;
                }
                if by_c.len() as u64 != deg_prev {
                    return Some(format!("{d},{b}: {} classes Gamma", by_c.len()));
                }
                if let Some((c, k)) = by_c.iter().find(|(_, k)| **k != 2) {
                    return Some(format!("|Gamma({d},{b},{c})| = {k}"));
                }
                if let Some(c) = by_c.keys().find(|c| !is_edge_unchecked(b, **c)) {
                    return Some(format!("class Gamma({d},{b},{c}) but no edge {b} -> {c}"));
                }
            }
            None
        })
}

fn check_condition_d(n: u32) -> Option<String> {
    let all: Vec<AtomId> = AtomId::all(n).collect();
    let mut omega_bc: HashMap<(AtomId, AtomId), Vec<AtomId>> = HashMap::new();
    for &e in &all {
        let t = decode_unchecked(e);
        omega_bc.entry((t.first, t.middle)).or_default().push(e);
    }
    all.par_iter().find_map_first(|&g| {
        let t = decode_unchecked(g);
        let expected = omega_bc
            .get(&(t.middle, t.third))
            .cloned()
            .unwrap_or_default();
        let mut out = out_neighbors(g);
        out.sort();
        (out != expected).then(|| format!("{g}: out {out:?} vs Omega {expected:?}"))
    })
}

fn check_degrees(n: u32) -> Option<String> {
    let size = generation_size(n) as usize;
    let deg = degree(n) as usize;
    let tallies: Vec<u32> = (0..size as u64)
        .into_par_iter()
        .fold(
            || vec![0u32; size],
            |mut acc, i| {
                for b in out_neighbors(AtomId::raw(n, i)) {
                    acc[b.index as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; size],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    if let Some((i, t)) = tallies.iter().enumerate().find(|(_, t)| **t as usize != deg) {
        return Some(format!("({n}, {i}) has in-degree {t} by tally"));
    }
    (0..size as u64).into_par_iter().find_map_first(|i| {
        let a = AtomId::raw(n, i);
        let out = out_neighbors(a);
        let inn = in_neighbors(a);
        let mut distinct = out.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != deg {
            return Some(format!("{a}: {} distinct out-neighbours", distinct.len()));
        }
        let mut distinct_in = inn.clone();
        distinct_in.sort();
        distinct_in.dedup();
        if distinct_in.len() != deg {
            return Some(format!("{a}: {} distinct in-neighbours", distinct_in.len()));
        }
        for (r, b) in out.iter().enumerate() {
            if !is_edge_unchecked(a, *b) {
                return Some(format!("out-neighbour {b} of {a} fails is_edge"));
            }
            if out_rank_unchecked(a, *b) != r as u64 {
                return Some(format!("out_rank({a}, {b}) != {r}"));
            }
        }
        for (r, b) in inn.iter().enumerate() {
            if !is_edge_unchecked(*b, a) {
                return Some(format!("in-neighbour {b} of {a} fails is_edge"));
            }
            if in_rank_unchecked(a, *b) != r as u64 {
                return Some(format!("in_rank({a}, {b}) != {r}"));
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(gen: u32, index: u64) -> AtomId {
        AtomId::new(gen, index).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(atom_count(0), BigUint::from(1u32));
        assert_eq!(atom_count(2), BigUint::from(16u32));
        assert_eq!(atom_count(5), BigUint::from(33_554_432u64));
    }

    #[test]
    fn index_range_is_enforced() {
        assert!(AtomId::new(0, 1).is_err());
        assert!(AtomId::new(1, 2).is_err());
        assert!(AtomId::new(2, 15).is_ok());
        assert!(AtomId::new(8, 0).is_err());
    }

    #[test]
    fn decode_extremes_at_gen_two() {
        let b0 = a(1, 0);
        let b1 = a(1, 1);
        assert_eq!(decode(a(2, 0)).unwrap(), AtomTriple::new(b0, b0, b0, 0));
        assert_eq!(decode(a(2, 15)).unwrap(), AtomTriple::new(b1, b1, b1, 1));
    }

    #[test]
    fn decode_matches_hand_enumeration_of_gen_two() {
        // Gen-1 lists are [B0, B1] in both directions, so the digits are
        // (middle, first, third, tag) read as binary.
        for i in 0..16u64 {
            let t = decode(a(2, i)).unwrap();
            let bits = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
            assert_eq!(
                (t.middle.index, t.first.index, t.third.index, t.tag as u64),
                bits
            );
        }
    }

    #[test]
    fn primitive_atoms_have_no_triple() {
        assert_eq!(decode(AtomId::ROOT), Err(Error::PrimitiveAtom(0)));
        assert_eq!(decode(a(1, 1)), Err(Error::PrimitiveAtom(1)));
    }

    #[test]
    fn encode_valid_and_invalid() {
        let b0 = a(1, 0);
        let b1 = a(1, 1);
        let id = encode(&AtomTriple::new(b0, b0, b1, 0)).unwrap();
        assert!(id.index() < 16);
        assert_eq!(id, a(2, 2));
        // At gen 2 some pairs are not edges: (B0,B0,B1,0) -/-> (B0,B0,B0,0).
        let x = a(2, 2);
        let y = a(2, 0);
        assert!(!is_edge(x, y).unwrap());
        let bad = AtomTriple::new(y, x, x, 0);
        assert!(matches!(encode(&bad), Err(Error::InvalidTriple(_))));
        assert!(matches!(
            encode(&AtomTriple::new(b0, b0, b0, 2)),
            Err(Error::InvalidTriple(_))
        ));
    }

    #[test]
    fn parents() {
        assert_eq!(parent(AtomId::ROOT), Err(Error::RootHasNoParent));
        assert_eq!(parent(a(1, 1)).unwrap(), AtomId::ROOT);
        for i in 0..16 {
            let g = a(2, i);
            assert_eq!(parent(g).unwrap(), decode(g).unwrap().middle);
        }
        let mut x = a(4, 40_000);
        for _ in 0..4 {
            x = parent(x).unwrap();
        }
        assert_eq!(x, AtomId::ROOT);
    }

    #[test]
    fn children_counts() {
        assert_eq!(children(AtomId::ROOT).unwrap().len(), 2);
        assert_eq!(children(a(1, 0)).unwrap().len(), 8);
        assert_eq!(children(a(2, 7)).unwrap().len(), 32);
        for c in children(a(2, 7)).unwrap() {
            assert_eq!(parent(c).unwrap(), a(2, 7));
        }
        assert!(children(a(7, 0)).is_err());
    }

    #[test]
    fn edges_at_low_generations() {
        for x in AtomId::all(1) {
            for y in AtomId::all(1) {
                assert!(is_edge(x, y).unwrap());
            }
        }
        assert!(is_edge(a(2, 0), a(2, 0)).unwrap());
        assert_eq!(
            is_edge(a(1, 0), a(2, 0)),
            Err(Error::GenerationMismatch(1, 2))
        );
    }

    #[test]
    fn gen_three_out_neighbours_by_filter() {
        let x = a(3, 321);
        let filtered: Vec<_> = AtomId::all(3).filter(|y| is_edge(x, *y).unwrap()).collect();
        assert_eq!(filtered.len(), 8);
        let mut listed = out_neighbors(x);
        listed.sort();
        assert_eq!(filtered, listed);
    }

    #[test]
    fn rank_bounds() {
        assert!(matches!(
            out_unrank(a(2, 3), EdgeRank(4)),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(in_unrank(a(3, 3), EdgeRank(7)).is_ok());
        assert!(matches!(
            out_rank(a(2, 2), a(2, 0)),
            Err(Error::NotAnEdge(_))
        ));
    }

    #[test]
    fn axioms_small_generations() {
        for n in 0..=3 {
            let r = verify_axioms(n).unwrap();
            assert!(r.passed(), "gen {n}:\n{r}");
        }
        assert!(verify_axioms(6).is_err());
    }

    #[test]
    fn serde_pair_form() {
        let s = serde_json::to_string(&a(3, 17)).unwrap();
        assert_eq!(s, "[3,17]");
        let back: AtomId = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a(3, 17));
        assert!(serde_json::from_str::<AtomId>("[1,5]").is_err());
    }
}
