//! Dynamics on the Cantor set of nested atom chains.
//!
//! A point is known at finite precision as a chain `a_0 ⊃ a_1 ⊃ … ⊃ a_m` with
//! `a_k` of generation `k`. Knowing the generation-`g` atom `(D, B, C, j)` of a
//! point pins the generation-`(g-1)` atom of its image to `C` and of its
//! preimage to `D`, so one step forward or backward costs one level.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atoms::{self, AtomId};
use crate::error::{Error, Result};
use crate::paths::PathSpec;

/// How a chain is extended below its deepest known level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinementRule {
    /// Always take the first child.
    Zero,
    /// Local child indices, cycled, each reduced modulo the child count.
    Stream(Vec<u64>),
}

impl RefinementRule {
    pub fn stream(choices: Vec<u64>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::InvalidPointCode("empty choice stream".into()));
        }
        Ok(Self::Stream(choices))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Stream(_) => "stream",
        }
    }

    /// Local child index used to go from generation `gen - 1` to `gen`.
    fn choice(&self, gen: u32) -> u64 {
        match self {
            Self::Zero => 0,
            Self::Stream(s) => s[(gen as usize - 1) % s.len()],
        }
    }
}

/// A point of the Cantor set at finite precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PointCodeRepr", try_from = "PointCodeRepr")]
pub struct PointCode {
    chain: Vec<AtomId>,
    rule: RefinementRule,
}

#[derive(Serialize, Deserialize)]
struct PointCodeRepr {
    chain: Vec<AtomId>,
    rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    choices: Vec<u64>,
}

impl From<PointCode> for PointCodeRepr {
    fn from(p: PointCode) -> Self {
        let rule = p.rule.name().to_string();
        let choices = match p.rule {
            RefinementRule::Zero => Vec::new(),
            RefinementRule::Stream(s) => s,
        };
        Self {
            chain: p.chain,
            rule,
            choices,
        }
    }
}

impl TryFrom<PointCodeRepr> for PointCode {
    type Error = Error;

    fn try_from(r: PointCodeRepr) -> Result<Self> {
        let rule = match r.rule.as_str() {
            "zero" => RefinementRule::Zero,
            "stream" => RefinementRule::stream(r.choices)?,
            other => return Err(Error::InvalidPointCode(format!("unknown rule {other}"))),
        };
        PointCode::new(r.chain, rule)
    }
}

impl PointCode {
    /// Validates that `chain[k]` has generation `k` and nests in `chain[k-1]`.
    pub fn new(chain: Vec<AtomId>, rule: RefinementRule) -> Result<Self> {
        if chain.first() != Some(&AtomId::ROOT) {
            return Err(Error::InvalidPointCode("chain must start at the root".into()));
        }
        for (k, w) in chain.windows(2).enumerate() {
            if w[1].gen() != k as u32 + 1 || atoms::parent(w[1])? != w[0] {
                return Err(Error::InvalidPointCode(format!(
                    "level {} atom {} is not a child of {}",
                    k + 1,
                    w[1],
                    w[0]
                )));
            }
        }
        Ok(Self { chain, rule })
    }

    /// The chain of ancestors of `a`, ending at `a`.
    pub fn from_atom(a: AtomId, rule: RefinementRule) -> Self {
        let chain = (0..=a.gen()).map(|m| ancestor_unchecked(a, m)).collect();
        Self { chain, rule }
    }

    /// The root-only code with the given rule.
    pub fn root(rule: RefinementRule) -> Self {
        Self {
            chain: vec![AtomId::ROOT],
            rule,
        }
    }

    pub fn depth(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn chain(&self) -> &[AtomId] {
        &self.chain
    }

    pub fn rule(&self) -> &RefinementRule {
        &self.rule
    }

    pub fn deepest(&self) -> AtomId {
        *self.chain.last().expect("chain is never empty")
    }

    /// Same point truncated to `depth`.
    pub fn truncated(&self, depth: usize) -> Self {
        Self {
            chain: self.chain[..=depth.min(self.depth())].to_vec(),
            rule: self.rule.clone(),
        }
    }

    /// True when both chains agree on their common prefix.
    pub fn agrees_with(&self, other: &PointCode) -> bool {
        self.chain.iter().zip(&other.chain).all(|(a, b)| a == b)
    }
}

impl fmt::Display for PointCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.chain.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊃ ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

pub fn ancestor(a: AtomId, m: u32) -> Result<AtomId> {
    if m > a.gen() {
        return Err(Error::AncestorAbove {
            target: m,
            gen: a.gen(),
        });
    }
    Ok(ancestor_unchecked(a, m))
}

fn ancestor_unchecked(mut a: AtomId, m: u32) -> AtomId {
    while a.gen() > m {
        a = atoms::parent(a).expect("generation above target is positive");
    }
    a
}

/// Generation-`(g-1)` atom containing the image of `a ∩ Λ`.
pub fn phi_image_atom(a: AtomId) -> Result<AtomId> {
    if a.gen() < 2 {
        return Err(Error::VacuousImage(a.gen()));
    }
    Ok(atoms::decode(a)?.third)
}

/// Generation-`(g-1)` atom containing the preimage of `b ∩ Λ`.
pub fn phi_preimage_atom(b: AtomId) -> Result<AtomId> {
    if b.gen() < 2 {
        return Err(Error::VacuousImage(b.gen()));
    }
    Ok(atoms::decode(b)?.first)
}

fn step(x: &PointCode, project: fn(AtomId) -> Result<AtomId>) -> Result<PointCode> {
    let mut chain = Vec::with_capacity(x.chain.len() - 1);
    chain.push(AtomId::ROOT);
    for a in &x.chain[2..] {
        chain.push(project(*a)?);
    }
    Ok(PointCode {
        chain,
        rule: x.rule.clone(),
    })
}

fn check_budget(x: &PointCode, steps: usize) -> Result<()> {
    if x.depth() < steps + 1 {
        return Err(Error::PrecisionExhausted {
            depth: x.depth(),
            needed: steps + 1,
        });
    }
    Ok(())
}

/// `steps` applications of the map; each consumes one level of precision.
///
/// The result keeps `x`'s refinement rule, so refining it afterwards picks
/// some point of the image cylinder rather than the image of a refined `x`.
pub fn forward(x: &PointCode, steps: usize) -> Result<PointCode> {
    check_budget(x, steps)?;
    let mut y = x.clone();
    for _ in 0..steps {
        y = step(&y, phi_image_atom)?;
    }
    Ok(y)
}

pub fn backward(y: &PointCode, steps: usize) -> Result<PointCode> {
    check_budget(y, steps)?;
    let mut x = y.clone();
    for _ in 0..steps {
        x = step(&x, phi_preimage_atom)?;
    }
    Ok(x)
}

/// The unique `(l+1)`-path of `n`-atoms visited by `G ∩ Λ`.
pub fn itinerary(g: AtomId, n: u32, l: u32) -> Result<PathSpec> {
    if g.gen() != n + l {
        return Err(Error::GenerationMismatch(g.gen(), n + l));
    }
    let mut atoms_seen = Vec::with_capacity(l as usize + 1);
    let mut cur = g;
    atoms_seen.push(ancestor_unchecked(cur, n));
    for _ in 0..l {
        cur = if cur.gen() >= 2 {
            atoms::decode(cur)?.third
        } else {
            AtomId::ROOT
        };
        atoms_seen.push(ancestor_unchecked(cur, n));
    }
    PathSpec::new(n, atoms_seen)
}

/// Extends the chain to `depth` with the code's refinement rule.
pub fn refine(x: &PointCode, depth: usize) -> PointCode {
    let mut chain = x.chain.clone();
    while chain.len() <= depth {
        let last = *chain.last().expect("chain is never empty");
        let gen = last.gen() + 1;
        let per = atoms::children_per_parent(last.gen());
        let local = x.rule.choice(gen) % per;
        let child = atoms::children(last).expect("refinement below generation cap")[local as usize];
        chain.push(child);
    }
    PointCode {
        chain,
        rule: x.rule.clone(),
    }
}

/// Coordinates of an atom in the product-shift picture: level-`k` bits at
/// relative positions `-(g-k)..=(g-k)`. Level 1 carries the generation-1
/// symbol and level `k >= 2` carries the tag bit of the generation-`k` atom.
pub type Window = BTreeMap<(u32, i64), u8>;

/// Merges `w` shifted by `offset` into `acc`; `None` on a conflict.
pub fn merge_window(acc: &mut Window, w: &Window, offset: i64) -> Option<usize> {
    let mut added = 0;
    for (&(level, pos), &bit) in w {
        match acc.insert((level, pos + offset), bit) {
            None => added += 1,
            Some(prev) if prev == bit => {}
            Some(_) => return None,
        }
    }
    Some(added)
}

/// Bits fixed by membership in `a`. Each atom of generation `g` fixes exactly
/// `g^2` bits and distinct atoms fix distinct assignments.
pub fn window(a: AtomId) -> Window {
    let mut w = Window::new();
    match a.gen() {
        0 => {}
        1 => {
            w.insert((1, 0), a.index() as u8);
        }
        g => {
            let t = atoms::decode(a).expect("generation >= 2");
            merge_window(&mut w, &window(t.middle), 0);
            merge_window(&mut w, &window(t.first), -1)
                .expect("first -> middle keeps windows consistent");
            merge_window(&mut w, &window(t.third), 1)
                .expect("middle -> third keeps windows consistent");
            w.insert((g, 0), t.tag);
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(gen: u32, index: u64) -> AtomId {
        AtomId::new(gen, index).unwrap()
    }

    #[test]
    fn ancestors() {
        let g = a(3, 300);
        assert_eq!(ancestor(g, 3).unwrap(), g);
        assert_eq!(ancestor(g, 0).unwrap(), AtomId::ROOT);
        assert_eq!(ancestor(g, 2).unwrap(), atoms::decode(g).unwrap().middle);
        assert!(ancestor(a(1, 0), 2).is_err());
    }

    #[test]
    fn image_and_preimage_projections() {
        let b0 = a(1, 0);
        let b1 = a(1, 1);
        let g = atoms::encode(&atoms::AtomTriple::new(b0, b0, b1, 0)).unwrap();
        assert_eq!(phi_image_atom(g).unwrap(), b1);
        let h = atoms::encode(&atoms::AtomTriple::new(b1, b0, b0, 1)).unwrap();
        assert_eq!(phi_preimage_atom(h).unwrap(), b1);
        assert_eq!(phi_image_atom(b0), Err(Error::VacuousImage(1)));
        for x in AtomId::all(2) {
            assert_eq!(phi_image_atom(x).unwrap().gen(), 1);
        }
    }

    #[test]
    fn forward_zero_steps_is_identity() {
        let x = PointCode::from_atom(a(4, 12345), RefinementRule::Zero);
        assert_eq!(forward(&x, 0).unwrap(), x);
        assert_eq!(backward(&x, 0).unwrap(), x);
    }

    #[test]
    fn precision_budget() {
        let x = PointCode::from_atom(a(2, 5), RefinementRule::Zero);
        assert!(forward(&x, 1).is_ok());
        assert!(matches!(
            forward(&x, 2),
            Err(Error::PrecisionExhausted { .. })
        ));
        let deep = refine(&x, 4);
        assert!(forward(&deep, 3).is_ok());
    }

    #[test]
    fn refine_zero_rule_takes_first_children() {
        let x = refine(&PointCode::root(RefinementRule::Zero), 3);
        assert_eq!(x.chain(), &[AtomId::ROOT, a(1, 0), a(2, 0), a(3, 0)]);
        assert_eq!(refine(&x, 3), x);
        assert_eq!(refine(&x, 1), x);
    }

    #[test]
    fn refine_stream_rule() {
        let rule = RefinementRule::stream(vec![1, 9]).unwrap();
        let x = refine(&PointCode::root(rule), 3);
        // level 1 picks child 1, level 2 picks 9 of 8 -> 1, level 3 picks 1.
        assert_eq!(x.chain()[1], a(1, 1));
        assert_eq!(x.chain()[2], a(2, 8 + 1));
        assert_eq!(x.chain()[3], a(3, 9 * 32 + 1));
        assert!(RefinementRule::stream(vec![]).is_err());
    }

    #[test]
    fn point_code_rejects_broken_nesting() {
        let err = PointCode::new(vec![AtomId::ROOT, a(1, 0), a(2, 15)], RefinementRule::Zero);
        assert!(matches!(err, Err(Error::InvalidPointCode(_))));
        assert!(PointCode::new(vec![a(1, 0)], RefinementRule::Zero).is_err());
    }

    #[test]
    fn point_code_json() {
        let x = PointCode::from_atom(a(2, 9), RefinementRule::stream(vec![3, 1]).unwrap());
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"chain":[[0,0],[1,1],[2,9]],"rule":"stream","choices":[3,1]}"#);
        let back: PointCode = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let z = PointCode::from_atom(a(1, 0), RefinementRule::Zero);
        assert_eq!(
            serde_json::to_string(&z).unwrap(),
            r#"{"chain":[[0,0],[1,0]],"rule":"zero"}"#
        );
    }

    #[test]
    fn itinerary_small_cases() {
        for g in AtomId::all(2) {
            let t = atoms::decode(g).unwrap();
            let p = itinerary(g, 1, 1).unwrap();
            assert_eq!(p.atoms(), &[t.middle, t.third]);
            assert_eq!(itinerary(g, 2, 0).unwrap().atoms(), &[g]);
        }
        assert!(itinerary(a(3, 0), 1, 1).is_err());
    }

    #[test]
    fn windows_fix_gen_squared_bits() {
        for g in 0..=3 {
            for x in AtomId::all(g) {
                assert_eq!(window(x).len() as u32, g * g);
            }
        }
    }

    #[test]
    fn window_overlap_consistency_is_the_edge_relation() {
        for g in 1..=3 {
            let all: Vec<_> = AtomId::all(g).collect();
            let ws: Vec<_> = all.iter().map(|x| window(*x)).collect();
            for (i, x) in all.iter().enumerate() {
                for (j, y) in all.iter().enumerate() {
                    let mut acc = ws[i].clone();
                    let consistent = merge_window(&mut acc, &ws[j], 1).is_some();
                    assert_eq!(consistent, atoms::is_edge(*x, *y).unwrap(), "{x} {y}");
                }
            }
        }
    }
}
