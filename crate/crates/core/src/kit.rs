//! Constructive devices: the label permutation θ and the radial relocation
//! homeomorphisms of the square.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::atoms::{self, AtomId, AtomTriple, EdgeRank};
use crate::error::{Error, Result};
use crate::report::{Outcome, VerificationReport};

pub const THETA_VERIFY_CAP: u32 = 3;
pub const THETA_EXPORT_CAP: u32 = 2;

/// A labelled point: an atom of generation `n+1` and a slot below `2^(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub atom: AtomId,
    pub slot: u64,
}

impl Label {
    pub fn new(atom: AtomId, slot: u64) -> Result<Self> {
        if atom.gen() < 2 {
            return Err(Error::PrimitiveAtom(atom.gen()));
        }
        let slots = atoms::degree(atom.gen());
        if slot >= slots {
            return Err(Error::RankOutOfRange {
                rank: slot,
                degree: slots,
            });
        }
        Ok(Self { atom, slot })
    }

    fn key(self) -> u64 {
        self.atom.index() * atoms::degree(self.atom.gen()) + self.slot
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, slot {})", self.atom, self.slot)
    }
}

/// Which slot rule θ uses. `TagFromImage` is a deliberately broken variant
/// used to show the verifier can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRule {
    Standard,
    TagFromImage,
}

pub fn theta(n: u32, label: Label) -> Result<Label> {
    theta_with(n, label, ThetaRule::Standard)
}

pub fn theta_with(n: u32, label: Label, rule: ThetaRule) -> Result<Label> {
    if label.atom.gen() != n + 1 {
        return Err(Error::GenerationMismatch(label.atom.gen(), n + 1));
    }
    let t = atoms::decode(label.atom)?;
    let half = atoms::degree(n);
    let k = atoms::in_rank(t.middle, t.first)?.0;
    let l_new = label.slot % half;
    let j_new = (label.slot / half) as u8;
    let third = atoms::out_unrank(t.third, EdgeRank(l_new))?;
    let image = atoms::encode(&AtomTriple::new(t.middle, t.third, third, j_new))?;
    let j_slot = match rule {
        ThetaRule::Standard => t.tag,
        ThetaRule::TagFromImage => j_new,
    };
    Ok(Label {
        atom: image,
        slot: k + j_slot as u64 * half,
    })
}

fn check_theta_gen(n: u32, cap: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::PrimitiveAtom(1));
    }
    if n > cap {
        return Err(Error::GenerationCap { gen: n, cap });
    }
    Ok(())
}

fn all_labels(n: u32) -> impl Iterator<Item = Label> {
    let slots = atoms::degree(n + 1);
    AtomId::all(n + 1).flat_map(move |atom| (0..slots).map(move |slot| Label { atom, slot }))
}

/// Exhaustive check that θ permutes the labels and respects the blocks
/// `Γ(D, B, C)` (atoms with first `D`, middle `B`, third `C`) and
/// `Ω(B, C)` (atoms with first `B`, middle `C`).
pub fn theta_verify(n: u32) -> Result<VerificationReport> {
    theta_verify_with(n, ThetaRule::Standard)
}

pub fn theta_verify_with(n: u32, rule: ThetaRule) -> Result<VerificationReport> {
    check_theta_gen(n, THETA_VERIFY_CAP)?;
    let g = n + 1;
    let slots = atoms::degree(g);
    let triples: Vec<AtomTriple> = AtomId::all(g).map(atoms::decode).collect::<Result<_>>()?;
    let images: Vec<Label> = all_labels(n)
        .map(|l| theta_with(n, l, rule))
        .collect::<Result<_>>()?;
    let image_of = |l: Label| images[l.key() as usize];
    let params = json!({ "n": n });
    let mut report = VerificationReport::new();

    report.check("theta_bijective", params.clone(), || {
        let mut seen = vec![false; images.len()];
        let mut dup = None;
        for (src, img) in all_labels(n).zip(&images) {
            let k = img.key() as usize;
            if seen[k] && dup.is_none() {
                dup = Some(format!("{src} hits {img} twice"));
            }
            seen[k] = true;
        }
        Outcome::holds("every label hit exactly once", dup)
    });

    report.check("theta_property_a", params.clone(), || {
        let bad = all_labels(n).find(|l| {
            let s = &triples[l.atom.index() as usize];
            let t = &triples[image_of(*l).atom.index() as usize];
            t.first != s.middle || t.middle != s.third
        });
        Outcome::holds(
            "image of a Γ(D,B,C) label lies in Ω(B,C)",
            bad.map(|l| format!("{l} -> {}", image_of(l))),
        )
    });

    // Ω(B, C) by filtering, independently of the rank functions.
    let mut omega: std::collections::HashMap<(AtomId, AtomId), Vec<AtomId>> = Default::default();
    for (i, t) in triples.iter().enumerate() {
        omega
            .entry((t.first, t.middle))
            .or_default()
            .push(AtomId::new(g, i as u64)?);
    }

    report.check("theta_property_b", params.clone(), || {
        let bad = AtomId::all(g).find_map(|e| {
            let s = &triples[e.index() as usize];
            let mut hit: Vec<AtomId> = (0..slots).map(|slot| image_of(Label { atom: e, slot }).atom).collect();
            hit.sort();
            let want = &omega[&(s.middle, s.third)];
            (hit != *want).then(|| format!("slots of {e} do not biject onto Ω({}, {})", s.middle, s.third))
        });
        Outcome::holds("each E-slot reaches each F in Ω(B,C) exactly once", bad)
    });

    report.check("theta_property_c", params, || {
        let mut gamma: std::collections::HashMap<(AtomId, AtomId), Vec<AtomId>> = Default::default();
        for (i, t) in triples.iter().enumerate() {
            gamma
                .entry((t.middle, t.third))
                .or_default()
                .push(AtomId::new(g, i as u64).expect("in range"));
        }
        let bad = gamma.iter().find_map(|(&(b, c), sources)| {
            let got: HashSet<u64> = sources
                .iter()
                .flat_map(|&e| (0..slots).map(move |slot| Label { atom: e, slot }))
                .map(|l| image_of(l).key())
                .collect();
            let want: HashSet<u64> = omega
                .get(&(b, c))
                .into_iter()
                .flatten()
                .flat_map(|&f| (0..slots).map(move |slot| Label { atom: f, slot }.key()))
                .collect();
            (got != want).then(|| {
                format!(
                    "Γ(·,{b},{c}) labels reach {} of {} Ω({b},{c}) labels",
                    got.intersection(&want).count(),
                    want.len()
                )
            })
        });
        Outcome::holds("Γ(·,B,C) labels map onto the Ω(B,C) labels", bad)
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThetaRow {
    pub n: u32,
    pub atom_index: u64,
    pub slot: u64,
    pub image_atom_index: u64,
    pub image_slot: u64,
}

/// Full θ table, small generations only.
pub fn theta_table(n: u32) -> Result<Vec<ThetaRow>> {
    check_theta_gen(n, THETA_EXPORT_CAP)?;
    all_labels(n)
        .map(|l| {
            let img = theta(n, l)?;
            Ok(ThetaRow {
                n,
                atom_index: l.atom.index(),
                slot: l.slot,
                image_atom_index: img.atom.index(),
                image_slot: img.slot,
            })
        })
        .collect()
}

const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: PlanarPoint) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    fn dist_inf(self, o: PlanarPoint) -> f64 {
        (self.x - o.x).abs().max((self.y - o.y).abs())
    }

    fn lerp(self, o: PlanarPoint, t: f64) -> PlanarPoint {
        PlanarPoint::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: PlanarPoint,
    pub max: PlanarPoint,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        min: PlanarPoint::new(0.0, 0.0),
        max: PlanarPoint::new(1.0, 1.0),
    };

    pub fn new(min: PlanarPoint, max: PlanarPoint) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y) {
            return Err(Error::InvalidBoxes(format!("degenerate box {min}..{max}")));
        }
        Ok(Self { min, max })
    }

    pub fn square(center: PlanarPoint, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::new(
            PlanarPoint::new(center.x - h, center.y - h),
            PlanarPoint::new(center.x + h, center.y + h),
        )
    }

    pub fn contains_open(&self, p: PlanarPoint) -> bool {
        self.min.x < p.x && p.x < self.max.x && self.min.y < p.y && p.y < self.max.y
    }

    pub fn contains_closed(&self, p: PlanarPoint) -> bool {
        self.min.x <= p.x && p.x <= self.max.x && self.min.y <= p.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.contains_closed(o.min) && self.contains_closed(o.max)
    }

    pub fn interiors_overlap(&self, o: &Rect) -> bool {
        self.min.x < o.max.x && o.min.x < self.max.x && self.min.y < o.max.y && o.min.y < self.max.y
    }

    /// Sup-norm distance from an interior point to the boundary.
    fn clearance(&self, p: PlanarPoint) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }
}

/// Radial homeomorphism of a rectangle fixing its boundary and sending `p` to `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Relocation {
    pub rect: Rect,
    pub p: PlanarPoint,
    pub q: PlanarPoint,
}

impl Relocation {
    pub fn new(rect: Rect, p: PlanarPoint, q: PlanarPoint) -> Result<Self> {
        if !rect.contains_open(p) || !rect.contains_open(q) {
            return Err(Error::BoundaryPoint);
        }
        Ok(Self { rect, p, q })
    }

    /// Points outside the open rectangle (the boundary included) are fixed.
    /// Otherwise the ray from `p` through `x` meets the boundary at `r`, and `x`
    /// is sent to the point of `[q, r]` with the same affine parameter.
    pub fn apply(&self, x: PlanarPoint) -> PlanarPoint {
        if !self.rect.contains_open(x) {
            return x;
        }
        if x == self.p {
            return self.q;
        }
        let (dx, dy) = (x.x - self.p.x, x.y - self.p.y);
        let hit = |d: f64, p: f64, lo: f64, hi: f64| {
            if d > 0.0 {
                (hi - p) / d
            } else if d < 0.0 {
                (lo - p) / d
            } else {
                f64::INFINITY
            }
        };
        let t = hit(dx, self.p.x, self.rect.min.x, self.rect.max.x)
            .min(hit(dy, self.p.y, self.rect.min.y, self.rect.max.y));
        let r = PlanarPoint::new(self.p.x + t * dx, self.p.y + t * dy);
        self.q.lerp(r, 1.0 / t)
    }

    pub fn inverse(&self) -> Relocation {
        Relocation {
            rect: self.rect,
            p: self.q,
            q: self.p,
        }
    }
}

/// Relocation of the unit square sending `p` to `q`, evaluated at `x`.
pub fn relocate_homeo(p: PlanarPoint, q: PlanarPoint, x: PlanarPoint) -> Result<PlanarPoint> {
    Ok(Relocation::new(Rect::UNIT, p, q)?.apply(x))
}

/// Source/target pairs to realize inside one box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxPairs {
    pub rect: Rect,
    pub pairs: Vec<(PlanarPoint, PlanarPoint)>,
}

/// Homeomorphism of the unit square that is the identity off the boxes and
/// sends every listed source to its target.
///
/// Inside a box the pairs are handled in order. Targets already placed are
/// obstacles; the current image of the next source travels to its target by
/// short hops, each a relocation supported in a small square that avoids
/// every obstacle, so earlier constraints stay fixed exactly.
#[derive(Debug, Clone)]
pub struct PointSpecifier {
    boxes: Vec<(Rect, Vec<Relocation>)>,
}

const MAX_HOPS: usize = 100_000;

impl PointSpecifier {
    pub fn new(boxes: &[BoxPairs]) -> Result<Self> {
        for (i, b) in boxes.iter().enumerate() {
            if !Rect::UNIT.contains_rect(&b.rect) {
                return Err(Error::InvalidBoxes(format!("box {i} leaves the unit square")));
            }
            if let Some(j) = (0..i).find(|&j| boxes[j].rect.interiors_overlap(&b.rect)) {
                return Err(Error::InvalidBoxes(format!("boxes {j} and {i} overlap")));
            }
            for (what, pts) in [
                ("source", b.pairs.iter().map(|p| p.0).collect::<Vec<_>>()),
                ("target", b.pairs.iter().map(|p| p.1).collect()),
            ] {
                if pts.iter().any(|p| !b.rect.contains_open(*p)) {
                    return Err(Error::BoundaryPoint);
                }
                for (k, p) in pts.iter().enumerate() {
                    if pts[..k].contains(p) {
                        return Err(Error::InvalidBoxes(format!("coincident {what} {p} in box {i}")));
                    }
                }
            }
        }
        let boxes = boxes
            .iter()
            .map(|b| Ok((b.rect, plan_box(b)?)))
            .collect::<Result<_>>()?;
        Ok(Self { boxes })
    }

    pub fn apply(&self, x: PlanarPoint) -> PlanarPoint {
        match self.boxes.iter().find(|(r, _)| r.contains_open(x)) {
            Some((_, moves)) => moves.iter().fold(x, |y, m| m.apply(y)),
            None => x,
        }
    }

    /// Number of elementary relocations composed.
    pub fn moves(&self) -> usize {
        self.boxes.iter().map(|(_, m)| m.len()).sum()
    }
}

pub fn specify_points_homeo(boxes: &[BoxPairs], x: PlanarPoint) -> Result<PlanarPoint> {
    Ok(PointSpecifier::new(boxes)?.apply(x))
}

fn plan_box(b: &BoxPairs) -> Result<Vec<Relocation>> {
    let mut moves: Vec<Relocation> = Vec::new();
    let mut placed: Vec<PlanarPoint> = Vec::new();
    for &(p, q) in &b.pairs {
        let from = moves.iter().fold(p, |y, m| m.apply(y));
        if placed.is_empty() {
            if from != q {
                moves.push(Relocation::new(b.rect, from, q)?);
            }
        } else {
            let route = route(&b.rect, from, q, &placed)?;
            for w in route.windows(2) {
                hop(&b.rect, w[0], w[1], &placed, &mut moves)?;
            }
        }
        placed.push(q);
    }
    Ok(moves)
}

fn segment_distance(o: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return o.dist(a);
    }
    let t = (((o.x - a.x) * vx + (o.y - a.y) * vy) / len2).clamp(0.0, 1.0);
    o.dist(a.lerp(b, t))
}

/// Polyline from `from` to `to` staying at least a fixed distance from every obstacle.
fn route(rect: &Rect, from: PlanarPoint, to: PlanarPoint, obstacles: &[PlanarPoint]) -> Result<Vec<PlanarPoint>> {
    let delta = obstacles
        .iter()
        .map(|o| o.dist(from).min(o.dist(to)))
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    let clear = |a: PlanarPoint, b: PlanarPoint| obstacles.iter().all(|o| segment_distance(*o, a, b) >= delta);
    if clear(from, to) {
        return Ok(vec![from, to]);
    }
    let mid = from.lerp(to, 0.5);
    let (vx, vy) = (to.x - from.x, to.y - from.y);
    let len = vx.hypot(vy).max(TOLERANCE);
    let (nx, ny) = (-vy / len, vx / len);
    let margin = rect.clearance(from).min(rect.clearance(to)) / 2.0;
    let mut step = delta;
    while step < 2.0 * (rect.max.x - rect.min.x + rect.max.y - rect.min.y) {
        for sign in [1.0, -1.0] {
            let w = PlanarPoint::new(mid.x + sign * step * nx, mid.y + sign * step * ny);
            if rect.contains_open(w) && rect.clearance(w) >= margin && clear(from, w) && clear(w, to) {
                return Ok(vec![from, w, to]);
            }
        }
        step *= 1.5;
    }
    Err(Error::InvalidBoxes(format!("no obstacle-free route from {from} to {to}")))
}

fn hop(rect: &Rect, mut a: PlanarPoint, b: PlanarPoint, obstacles: &[PlanarPoint], moves: &mut Vec<Relocation>) -> Result<()> {
    for _ in 0..MAX_HOPS {
        if a == b {
            return Ok(());
        }
        let clearance = obstacles
            .iter()
            .map(|o| o.dist_inf(a))
            .fold(rect.clearance(a), f64::min);
        let h = clearance / 2.0;
        let square = Rect::square(a, 2.0 * h)?;
        let gap = a.dist_inf(b);
        let next = if gap < h { b } else { a.lerp(b, 0.5 * h / gap) };
        moves.push(Relocation::new(square, a, next)?);
        a = next;
    }
    Err(Error::InvalidBoxes(format!("route to {b} needs too many hops")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(gen: u32, index: u64, slot: u64) -> Label {
        Label::new(AtomId::new(gen, index).unwrap(), slot).unwrap()
    }

    fn pt(x: f64, y: f64) -> PlanarPoint {
        PlanarPoint::new(x, y)
    }

    /// Bullet rules evaluated with neighbour lists found by filtering and
    /// the image atom found by searching generation 2.
    fn theta_oracle_n1(l: Label) -> Label {
        let t = atoms::decode(l.atom).unwrap();
        let ins: Vec<AtomId> = AtomId::all(1).filter(|d| atoms::is_edge(*d, t.middle).unwrap()).collect();
        let outs: Vec<AtomId> = AtomId::all(1).filter(|c| atoms::is_edge(t.third, *c).unwrap()).collect();
        let k = ins.iter().position(|d| *d == t.first).unwrap() as u64;
        let (l2, j2) = (l.slot % 2, (l.slot / 2) as u8);
        let image = AtomId::all(2)
            .find(|g| {
                let s = atoms::decode(*g).unwrap();
                s.first == t.middle && s.middle == t.third && s.third == outs[l2 as usize] && s.tag == j2
            })
            .unwrap();
        Label { atom: image, slot: k + 2 * t.tag as u64 }
    }

    #[test]
    fn theta_frozen_pairs() {
        assert_eq!(theta(1, lab(2, 0, 3)).unwrap(), lab(2, 3, 0));
        assert_eq!(theta(1, lab(2, 13, 2)).unwrap(), lab(2, 5, 3));
        for l in all_labels(1) {
            assert_eq!(theta(1, l).unwrap(), theta_oracle_n1(l), "{l}");
        }
    }

    #[test]
    fn theta_errors() {
        assert!(matches!(theta(2, lab(2, 0, 0)), Err(Error::GenerationMismatch(2, 3))));
        assert!(Label::new(AtomId::new(2, 0).unwrap(), 4).is_err());
        assert!(Label::new(AtomId::new(1, 0).unwrap(), 0).is_err());
        assert!(theta_verify(4).is_err());
    }

    #[test]
    fn theta_verifies() {
        for n in 1..=2 {
            let r = theta_verify(n).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(r.records.len(), 4);
        }
    }

    #[test]
    fn theta_mutation_is_caught() {
        let r = theta_verify_with(1, ThetaRule::TagFromImage).unwrap();
        let failed: Vec<&str> = r.records.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"theta_bijective"));
        assert!(failed.contains(&"theta_property_c"));
    }

    #[test]
    fn theta_table_shape() {
        let rows = theta_table(1).unwrap();
        assert_eq!(rows.len(), 64);
        assert_eq!(rows[3], ThetaRow { n: 1, atom_index: 0, slot: 3, image_atom_index: 3, image_slot: 0 });
        assert!(theta_table(3).is_err());
    }

    #[test]
    fn relocation_worked_example() {
        let y = relocate_homeo(pt(0.5, 0.5), pt(0.25, 0.5), pt(0.75, 0.5)).unwrap();
        // Independent parametric form: r = (1, 0.5), x is at s = 1/2 on [p, r].
        let (r, s) = (pt(1.0, 0.5), 0.5);
        let expect = pt(0.25 + s * (r.x - 0.25), 0.5 + s * (r.y - 0.5));
        assert!(y.dist(expect) < 1e-12);
        assert!(y.dist(pt(0.625, 0.5)) < 1e-12);
    }

    #[test]
    fn relocation_fixes_boundary_and_hits_target() {
        let (p, q) = (pt(0.3, 0.6), pt(0.7, 0.2));
        assert_eq!(relocate_homeo(p, q, p).unwrap(), q);
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            for b in [pt(s, 0.0), pt(s, 1.0), pt(0.0, s), pt(1.0, s)] {
                assert_eq!(relocate_homeo(p, q, b).unwrap(), b);
            }
        }
        let x = pt(0.41, 0.93);
        assert!(relocate_homeo(p, p, x).unwrap().dist(x) < 1e-15);
        assert!(matches!(relocate_homeo(pt(0.0, 0.5), q, x), Err(Error::BoundaryPoint)));
        assert!(matches!(relocate_homeo(p, pt(1.0, 0.5), x), Err(Error::BoundaryPoint)));
    }

    #[test]
    fn relocation_corner_ray() {
        let y = relocate_homeo(pt(0.5, 0.5), pt(0.5, 0.5), pt(0.75, 0.75)).unwrap();
        assert!(y.dist(pt(0.75, 0.75)) < 1e-15);
        let y = relocate_homeo(pt(0.5, 0.5), pt(0.25, 0.25), pt(0.75, 0.75)).unwrap();
        assert!(y.dist(pt(0.625, 0.625)) < 1e-12);
    }

    #[test]
    fn specify_empty_and_single() {
        let rect = Rect::square(pt(0.3, 0.3), 0.4).unwrap();
        let empty = [BoxPairs { rect, pairs: vec![] }];
        let x = pt(0.2, 0.35);
        assert_eq!(specify_points_homeo(&empty, x).unwrap(), x);

        let (p, q) = (pt(0.25, 0.3), pt(0.4, 0.2));
        let one = [BoxPairs { rect, pairs: vec![(p, q)] }];
        let h = PointSpecifier::new(&one).unwrap();
        assert_eq!(h.apply(p), q);
        let direct = Relocation::new(rect, p, q).unwrap();
        for i in 0..50 {
            let x = pt(0.1 + 0.4 * (i as f64 / 49.0), 0.12 + 0.3 * ((i * 7 % 50) as f64 / 49.0));
            assert!(h.apply(x).dist(direct.apply(x)) < 1e-12);
        }
        assert_eq!(h.apply(pt(0.8, 0.8)), pt(0.8, 0.8));
    }

    #[test]
    fn specify_two_pairs_injective() {
        let rect = Rect::new(pt(0.1, 0.1), pt(0.6, 0.6)).unwrap();
        let pairs = vec![(pt(0.2, 0.2), pt(0.5, 0.5)), (pt(0.5, 0.5), pt(0.2, 0.2))];
        let other = Rect::new(pt(0.7, 0.1), pt(0.9, 0.3)).unwrap();
        let boxes = [
            BoxPairs { rect, pairs: pairs.clone() },
            BoxPairs { rect: other, pairs: vec![(pt(0.75, 0.2), pt(0.85, 0.2))] },
        ];
        let h = PointSpecifier::new(&boxes).unwrap();
        for (p, q) in &pairs {
            assert_eq!(h.apply(*p), *q);
        }
        assert_eq!(h.apply(pt(0.75, 0.2)), pt(0.85, 0.2));
        for i in 0..=20 {
            let s = 0.1 + 0.5 * i as f64 / 20.0;
            for b in [pt(s, 0.1), pt(s, 0.6), pt(0.1, s), pt(0.6, s)] {
                assert_eq!(h.apply(b), b);
            }
        }
        let n = 100;
        let mut img: Vec<PlanarPoint> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                h.apply(pt((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64))
            })
            .collect();
        img.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        for (k, a) in img.iter().enumerate() {
            for b in &img[k + 1..] {
                if b.x - a.x > 1e-9 {
                    break;
                }
                assert!(a.dist(*b) > 1e-9, "{a} and {b} collide");
            }
        }
    }

    #[test]
    fn specify_rejects_bad_input() {
        let a = Rect::new(pt(0.1, 0.1), pt(0.5, 0.5)).unwrap();
        let b = Rect::new(pt(0.4, 0.4), pt(0.8, 0.8)).unwrap();
        let boxes = [BoxPairs { rect: a, pairs: vec![] }, BoxPairs { rect: b, pairs: vec![] }];
        assert!(matches!(PointSpecifier::new(&boxes), Err(Error::InvalidBoxes(_))));
        let dup = [BoxPairs {
            rect: a,
            pairs: vec![(pt(0.2, 0.2), pt(0.3, 0.3)), (pt(0.2, 0.2), pt(0.4, 0.3))],
        }];
        assert!(matches!(PointSpecifier::new(&dup), Err(Error::InvalidBoxes(_))));
        let edge = [BoxPairs { rect: a, pairs: vec![(pt(0.1, 0.2), pt(0.3, 0.3))] }];
        assert!(matches!(PointSpecifier::new(&edge), Err(Error::BoundaryPoint)));
    }
}
