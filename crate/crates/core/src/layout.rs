//! Nested squares realizing atoms, SVG rendering, periodic towers, and the
//! good-sequence convergence table.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::atoms::{self, AtomId};
use crate::error::{Error, Result};
use crate::kit::{PlanarPoint, Rect};
use crate::report::{Outcome, VerificationReport};
use crate::symbolic;

pub const LAYOUT_CAP: u32 = 4;
pub const TOWER_PERIOD_CAP: u32 = 16;
pub const GOOD_SEQUENCE_LEVEL_CAP: u32 = 12;
/// Generation of the model carried by each tower in a good sequence.
pub const GOOD_SEQUENCE_MODEL_GEN: u32 = 2;
const SVG_ARROW_CAP: usize = 64;

pub type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

fn pad() -> Q {
    q(9, 10)
}

fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Axis-aligned square with exact lower-left corner and side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayoutBox {
    pub x: Q,
    pub y: Q,
    pub side: Q,
}

impl LayoutBox {
    pub fn unit() -> Self {
        Self {
            x: Q::zero(),
            y: Q::zero(),
            side: Q::one(),
        }
    }

    /// Shrinks by `ρ = 0.9` about the centre.
    pub fn padded(&self) -> Self {
        let margin = (Q::one() - pad()) * self.side / q(2, 1);
        Self {
            x: self.x + margin,
            y: self.y + margin,
            side: self.side * pad(),
        }
    }

    /// Cell `(row, col)` of a `g × g` subdivision.
    pub fn cell(&self, g: u64, rank: u64) -> Self {
        let c = self.side / q(g as i128, 1);
        Self {
            x: self.x + c * q((rank % g) as i128, 1),
            y: self.y + c * q((rank / g) as i128, 1),
            side: c,
        }
    }

    /// Image under the affine map sending the unit square onto `frame`.
    pub fn within(&self, frame: &LayoutBox) -> Self {
        Self {
            x: frame.x + self.x * frame.side,
            y: frame.y + self.y * frame.side,
            side: self.side * frame.side,
        }
    }

    pub fn max_x(&self) -> Q {
        self.x + self.side
    }

    pub fn max_y(&self) -> Q {
        self.y + self.side
    }

    pub fn strictly_inside(&self, outer: &LayoutBox) -> bool {
        self.x > outer.x && self.y > outer.y && self.max_x() < outer.max_x() && self.max_y() < outer.max_y()
    }

    pub fn contains(&self, inner: &LayoutBox) -> bool {
        inner.x >= self.x && inner.y >= self.y && inner.max_x() <= self.max_x() && inner.max_y() <= self.max_y()
    }

    /// Closed squares meet.
    pub fn meets(&self, o: &LayoutBox) -> bool {
        self.x <= o.max_x() && o.x <= self.max_x() && self.y <= o.max_y() && o.y <= self.max_y()
    }

    pub fn center(&self) -> PlanarPoint {
        let h = self.side / q(2, 1);
        PlanarPoint::new(to_f64(&(self.x + h)), to_f64(&(self.y + h)))
    }

    pub fn side_f64(&self) -> f64 {
        to_f64(&self.side)
    }

    pub fn diam(&self) -> f64 {
        self.side_f64() * std::f64::consts::SQRT_2
    }

    pub fn rect(&self) -> Rect {
        Rect {
            min: PlanarPoint::new(to_f64(&self.x), to_f64(&self.y)),
            max: PlanarPoint::new(to_f64(&self.max_x()), to_f64(&self.max_y())),
        }
    }
}

impl Serialize for LayoutBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let c = self.center();
        json!({
            "center": [c.x, c.y],
            "side": self.side_f64(),
            "exact": { "x": self.x.to_string(), "y": self.y.to_string(), "side": self.side.to_string() },
        })
        .serialize(s)
    }
}

fn check_layout_gen(gen: u32) -> Result<()> {
    if gen > LAYOUT_CAP {
        return Err(Error::GenerationCap { gen, cap: LAYOUT_CAP });
    }
    Ok(())
}

/// Grid width used to place the children of a generation-`gen` atom.
pub fn grid_width(gen: u32) -> u64 {
    let per = atoms::children_per_parent(gen);
    let mut g = (per as f64).sqrt() as u64;
    while g * g < per {
        g += 1;
    }
    g
}

fn child_box(parent_box: &LayoutBox, parent_gen: u32, local_rank: u64) -> LayoutBox {
    parent_box.cell(grid_width(parent_gen), local_rank).padded()
}

pub fn layout(a: AtomId) -> Result<LayoutBox> {
    check_layout_gen(a.gen())?;
    let mut b = LayoutBox::unit().padded();
    for m in 1..=a.gen() {
        let here = symbolic::ancestor(a, m)?;
        let up = atoms::parent(here)?;
        let local = here.index() - up.index() * atoms::children_per_parent(m - 1);
        b = child_box(&b, m - 1, local);
    }
    Ok(b)
}

/// Boxes of every atom of generation `gen`, in index order.
pub fn layout_generation(gen: u32) -> Result<Vec<LayoutBox>> {
    check_layout_gen(gen)?;
    let mut level = vec![LayoutBox::unit().padded()];
    for m in 0..gen {
        let per = atoms::children_per_parent(m);
        level = level
            .par_iter()
            .flat_map_iter(|b| (0..per).map(move |r| child_box(b, m, r)))
            .collect();
    }
    Ok(level)
}

/// Exact side length at `gen`: `0.9^(gen+1) / Π g_k`.
pub fn side_at(gen: u32) -> Q {
    (0..gen).fold(pad(), |s, m| s * pad() / q(grid_width(m) as i128, 1))
}

/// Pairs of same-generation boxes whose closures meet, by a sweep over x.
fn first_overlap(boxes: &[LayoutBox]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&i, &j| boxes[i].x.cmp(&boxes[j].x));
    for (k, &i) in order.iter().enumerate() {
        let reach = boxes[i].max_x();
        for &j in &order[k + 1..] {
            if boxes[j].x > reach {
                break;
            }
            if boxes[i].meets(&boxes[j]) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

pub fn verify_layout(max_gen: u32) -> Result<VerificationReport> {
    check_layout_gen(max_gen)?;
    let mut report = VerificationReport::new();
    let mut parents = layout_generation(0)?;
    report.check("layout_root", json!({"gen": 0}), || {
        let ok = parents[0].strictly_inside(&LayoutBox::unit()) && parents[0].side == pad();
        Outcome::new("centred square of side 9/10", format!("side {}", parents[0].side), ok)
    });
    for gen in 1..=max_gen {
        let boxes = layout_generation(gen)?;
        let per = atoms::children_per_parent(gen - 1) as usize;
        let params = json!({ "gen": gen });
        report.check("layout_nesting", params.clone(), || {
            let bad = (0..boxes.len()).into_par_iter().find_first(|&i| !boxes[i].strictly_inside(&parents[i / per]));
            Outcome::holds("child strictly inside parent", bad.map(|i| format!("atom {i}")))
        });
        report.check("layout_disjoint", params.clone(), || {
            Outcome::holds(
                "same-generation boxes pairwise disjoint",
                first_overlap(&boxes).map(|(i, j)| format!("atoms {i} and {j}")),
            )
        });
        report.check("layout_side", params, || {
            let want = side_at(gen);
            let bad = boxes.iter().position(|b| b.side != want);
            let shrinks = want < side_at(gen - 1);
            Outcome::new(
                format!("all sides {want}, below generation {}", gen - 1),
                format!("{} boxes, first mismatch {:?}, shrinking {}", boxes.len(), bad, shrinks),
                bad.is_none() && shrinks,
            )
        });
        parents = boxes;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiameterRow {
    pub gen: u32,
    pub boxes: u64,
    pub side: f64,
    pub max_diam: f64,
}

pub fn diameter_table(max_gen: u32) -> Result<Vec<DiameterRow>> {
    check_layout_gen(max_gen)?;
    Ok((0..=max_gen)
        .map(|gen| {
            let side = to_f64(&side_at(gen));
            DiameterRow {
                gen,
                boxes: atoms::generation_size(gen),
                side,
                max_diam: side * std::f64::consts::SQRT_2,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    /// Generation whose edge relation is drawn as arrows.
    pub arrows: Option<u32>,
    /// Width and height in pixels.
    pub size: Option<u32>,
}

const PALETTE: [&str; 5] = ["#f4f1de", "#81b29a", "#f2cc8f", "#e07a5f", "#3d405b"];

/// Nested squares of generations `0..=max_gen`, optionally with arrows.
pub fn svg_generations(max_gen: u32, opts: &SvgOptions) -> Result<String> {
    check_layout_gen(max_gen)?;
    if let Some(g) = opts.arrows {
        check_layout_gen(g)?;
    }
    let px = opts.size.unwrap_or(800) as f64;
    // SVG's y axis points down.
    let tx = |p: PlanarPoint| (p.x * px, (1.0 - p.y) * px);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{px}" height="{px}" viewBox="0 0 {px} {px}">"#
    )
    .unwrap();
    writeln!(
        out,
        r##"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#222"/></marker></defs>"##
    )
    .unwrap();
    for gen in 0..=max_gen {
        writeln!(out, r#"<g class="gen-{gen}">"#).unwrap();
        for (i, b) in layout_generation(gen)?.iter().enumerate() {
            let r = b.rect();
            let (x, y) = tx(PlanarPoint::new(r.min.x, r.max.y));
            let w = b.side_f64() * px;
            writeln!(
                out,
                r##"<rect class="atom" data-gen="{gen}" data-index="{i}" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{w:.3}" fill="{}" stroke="#333" stroke-width="{:.2}"/>"##,
                PALETTE[gen as usize % PALETTE.len()],
                1.5 / (gen as f64 + 1.0)
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    if let Some(g) = opts.arrows {
        let boxes = layout_generation(g)?;
        let edges: Vec<(usize, usize)> = AtomId::all(g)
            .flat_map(|a| {
                atoms::out_neighbors(a)
                    .into_iter()
                    .map(move |b| (a.index() as usize, b.index() as usize))
            })
            .collect();
        let stride = edges.len().div_ceil(SVG_ARROW_CAP).max(1);
        writeln!(out, r#"<g class="arrows" data-gen="{g}" data-edges="{}" data-stride="{stride}">"#, edges.len()).unwrap();
        for &(i, j) in edges.iter().step_by(stride) {
            let (x1, y1) = tx(boxes[i].center());
            if i == j {
                let r = boxes[i].side_f64() * px / 6.0;
                writeln!(
                    out,
                    r##"<path class="edge loop" d="M{x1:.3},{y1:.3} a{r:.3},{r:.3} 0 1,1 {:.3},0" fill="none" stroke="#222" marker-end="url(#head)"/>"##,
                    0.01 * r
                )
                .unwrap();
            } else {
                let (x2, y2) = tx(boxes[j].center());
                writeln!(
                    out,
                    r##"<line class="edge" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#222" marker-end="url(#head)"/>"##
                )
                .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Exact mass as `"num/2^e"` when dyadic, `"num/den"` otherwise.
pub fn format_mass(m: &BigRational) -> String {
    let den = m.denom();
    if den.is_one() {
        return m.numer().to_string();
    }
    let e = den.trailing_zeros().unwrap_or(0);
    if (BigInt::one() << e) == *den {
        format!("{}/2^{e}", m.numer())
    } else {
        format!("{}/{}", m.numer(), den)
    }
}

fn ser_mass<S: Serializer>(m: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_mass(m))
}

fn ser_masses<S: Serializer>(m: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(format_mass))
}

fn rational(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p` disjoint stations visited cyclically; each carries the model.
#[derive(Debug, Clone, Serialize)]
pub struct Tower {
    pub period: u32,
    pub stations: Vec<LayoutBox>,
    pub model_gen: u32,
}

/// Stations on a `⌈√p⌉`-wide grid of the unit square, each cell padded.
pub fn tower_build(p: u32, model_gen: u32) -> Result<Tower> {
    if p == 0 || p > TOWER_PERIOD_CAP {
        return Err(Error::InvalidBoxes(format!("period {p} outside 1..={TOWER_PERIOD_CAP}")));
    }
    check_layout_gen(model_gen)?;
    let g = grid_width_for(p as u64);
    let stations = (0..p as u64).map(|j| LayoutBox::unit().cell(g, j).padded()).collect();
    Ok(Tower {
        period: p,
        stations,
        model_gen,
    })
}

fn grid_width_for(count: u64) -> u64 {
    let mut g = 1;
    while g * g < count {
        g += 1;
    }
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedBox {
    pub station: u32,
    pub atom: AtomId,
    pub rect: LayoutBox,
    #[serde(serialize_with = "ser_mass")]
    pub mass: BigRational,
}

/// Every generation-`gen` cylinder in every station, weighted `(1/p)·2^(-gen²)`.
pub fn tower_measure(t: &Tower, gen: u32) -> Result<Vec<WeightedBox>> {
    let boxes = layout_generation(gen)?;
    let mass = rational(1, t.period as u64 * atoms::generation_size(gen));
    Ok(t.stations
        .iter()
        .enumerate()
        .flat_map(|(j, s)| {
            boxes.iter().enumerate().map(move |(i, b)| (j, i, b.within(s)))
        })
        .map(|(j, i, rect)| WeightedBox {
            station: j as u32,
            atom: AtomId::new(gen, i as u64).expect("in range"),
            rect,
            mass: mass.clone(),
        })
        .collect())
}

pub fn verify_tower(t: &Tower, gen: u32) -> Result<VerificationReport> {
    let params = json!({ "p": t.period, "gen": gen });
    let weighted = tower_measure(t, gen)?;
    let mut report = VerificationReport::new();
    report.check("tower_stations_disjoint", params.clone(), || {
        Outcome::holds(
            "stations pairwise disjoint inside the unit square",
            first_overlap(&t.stations)
                .map(|(i, j)| format!("stations {i} and {j}"))
                .or_else(|| {
                    t.stations
                        .iter()
                        .position(|s| !s.strictly_inside(&LayoutBox::unit()))
                        .map(|i| format!("station {i} leaves the square"))
                }),
        )
    });
    report.check("tower_total_mass", params.clone(), || {
        let total: BigRational = weighted.iter().map(|w| w.mass.clone()).sum();
        Outcome::equal("1".to_string(), format_mass(&total))
    });
    report.check("tower_station_mass", params.clone(), || {
        let want = rational(1, t.period as u64);
        let bad = (0..t.period).find_map(|j| {
            let m: BigRational = weighted.iter().filter(|w| w.station == j).map(|w| w.mass.clone()).sum();
            (m != want).then(|| format!("station {j} has {}", format_mass(&m)))
        });
        Outcome::holds(&format!("each station carries {}", format_mass(&want)), bad)
    });
    report.check("tower_cylinders_inside", params, || {
        let bad = weighted
            .iter()
            .find(|w| !w.rect.strictly_inside(&t.stations[w.station as usize]));
        Outcome::holds(
            "every cylinder box inside its station",
            bad.map(|w| format!("{} in station {}", w.atom, w.station)),
        )
    });
    Ok(report)
}

/// One level of a good sequence, for every station of the periodic orbit.
#[derive(Debug, Clone, Serialize)]
pub struct GoodLevel {
    pub level: u32,
    /// `H_k` per station.
    pub h: Vec<LayoutBox>,
    /// `K_k` per station, disjoint from `H_k`.
    pub k: Vec<LayoutBox>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodSequence {
    pub period: u32,
    pub h0: Vec<LayoutBox>,
    pub levels: Vec<GoodLevel>,
    /// Limit points `⋂ H_k`, one per station.
    pub limit_points: Vec<PlanarPoint>,
}

/// Halving rule: `H_k` is the lower-left quadrant of `H_(k-1)` and `K_k` the
/// padded upper-right quadrant. The limit point of each chain is the
/// lower-left corner of its station.
pub fn good_sequence(levels: u32, p: u32) -> Result<GoodSequence> {
    if levels > GOOD_SEQUENCE_LEVEL_CAP {
        return Err(Error::GenerationCap {
            gen: levels,
            cap: GOOD_SEQUENCE_LEVEL_CAP,
        });
    }
    let tower = tower_build(p, 0)?;
    let h0 = tower.stations;
    let mut h = h0.clone();
    let mut out = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let k = h.iter().map(|b| b.cell(2, 3).padded()).collect();
        h = h.iter().map(|b| b.cell(2, 0)).collect();
        out.push(GoodLevel { level, h: h.clone(), k });
    }
    let limit_points = h0.iter().map(|b| PlanarPoint::new(to_f64(&b.x), to_f64(&b.y))).collect();
    Ok(GoodSequence {
        period: p,
        h0,
        levels: out,
        limit_points,
    })
}

/// Squared distance from `(x, y)` to the farthest corner of `b`.
fn far_corner_sq(x: &Q, y: &Q, b: &LayoutBox) -> Q {
    let dx = (b.x - x).abs().max((b.max_x() - x).abs());
    let dy = (b.y - y).abs().max((b.max_y() - y).abs());
    dx * dx + dy * dy
}

fn sqrt_q(x: &Q) -> f64 {
    to_f64(x).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    #[serde(serialize_with = "ser_masses")]
    pub ball_masses: Vec<BigRational>,
    /// Largest diameter of the balls `H_(k-1)` holding both `K_k` and the limit point.
    pub max_diam: f64,
    /// Transport bound on the bounded-Lipschitz distance to the limit measure.
    pub bl_bound: f64,
    #[serde(skip)]
    bl_bound_sq: Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub period: u32,
    pub rows: Vec<ConvergenceRow>,
    pub masses_exact: bool,
    pub bound_halves: bool,
    pub final_bound: f64,
    /// `(ε, first level whose bound is below ε)`.
    pub eps_levels: Vec<(f64, Option<u32>)>,
}

/// The tower measures `μ_k` carried by the `K_k` against the periodic measure
/// `μ_0` equidistributed on the limit points.
///
/// Ball masses are summed exactly from the model cylinders inside each `K_k`.
/// The bound is the farthest a unit of mass moves when each ball's mass is
/// transported to its limit point.
pub fn convergence_report(seq: &GoodSequence, eps_list: &[f64]) -> Result<ConvergenceReport> {
    let p = seq.period;
    let tower = Tower {
        period: p,
        stations: seq.h0.clone(),
        model_gen: GOOD_SEQUENCE_MODEL_GEN,
    };
    let model = layout_generation(GOOD_SEQUENCE_MODEL_GEN)?;
    let cyl_mass = rational(1, p as u64 * atoms::generation_size(GOOD_SEQUENCE_MODEL_GEN));
    let mut rows = Vec::with_capacity(seq.levels.len());
    let mut prev_h = seq.h0.clone();
    for lv in &seq.levels {
        let ball_masses = (0..p as usize)
            .map(|j| {
                model
                    .iter()
                    .map(|b| b.within(&lv.k[j]))
                    .filter(|b| tower.stations[j].contains(b))
                    .map(|_| cyl_mass.clone())
                    .sum()
            })
            .collect();
        let bl_bound_sq = (0..p as usize)
            .map(|j| far_corner_sq(&seq.h0[j].x, &seq.h0[j].y, &lv.k[j]))
            .max()
            .expect("p >= 1");
        let max_diam = prev_h.iter().map(LayoutBox::diam).fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            level: lv.level,
            ball_masses,
            max_diam,
            bl_bound: sqrt_q(&bl_bound_sq),
            bl_bound_sq,
        });
        prev_h = lv.h.clone();
    }
    let want = rational(1, p as u64);
    let masses_exact = rows.iter().all(|r| r.ball_masses.iter().all(|m| *m == want));
    let bound_halves = rows
        .windows(2)
        .all(|w| w[1].bl_bound_sq * q(4, 1) == w[0].bl_bound_sq);
    let eps_levels = eps_list
        .iter()
        .map(|&e| (e, rows.iter().find(|r| r.bl_bound < e).map(|r| r.level)))
        .collect();
    Ok(ConvergenceReport {
        period: p,
        final_bound: rows.last().map_or(f64::INFINITY, |r| r.bl_bound),
        rows,
        masses_exact,
        bound_halves,
        eps_levels,
    })
}

pub fn verify_good_sequence(seq: &GoodSequence) -> VerificationReport {
    let mut report = VerificationReport::new();
    let mut prev = seq.h0.clone();
    for lv in &seq.levels {
        let params = json!({ "level": lv.level, "p": seq.period });
        report.check("good_sequence_nesting", params.clone(), || {
            let bad = (0..prev.len()).find(|&j| {
                !prev[j].contains(&lv.h[j]) || !lv.k[j].strictly_inside(&prev[j]) || lv.k[j].meets(&lv.h[j])
            });
            Outcome::holds("K_k, H_k inside H_(k-1) and disjoint", bad.map(|j| format!("station {j}")))
        });
        report.check("good_sequence_halving", params, || {
            let bad = (0..prev.len()).find(|&j| lv.h[j].side * q(2, 1) != prev[j].side);
            Outcome::holds("diam H_k = diam H_(k-1) / 2", bad.map(|j| format!("station {j}")))
        });
        prev = lv.h.clone();
    }
    report
}
