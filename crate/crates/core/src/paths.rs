//! Counting and enumeration of edge-consistent paths of same-generation atoms,
//! and of the fibre families of finer atoms that follow a given path.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::atoms::{self, AtomId, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::symbolic;

/// Default number of paths an enumeration may emit.
pub const DEFAULT_PATH_BUDGET: u64 = 1_000_000;
/// Largest generation whose paths are enumerated.
pub const PATH_ENUMERATION_GEN_CAP: u32 = 3;

/// An `(l+1)`-path of `n`-atoms: consecutive atoms are joined by edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PathSpec {
    gen: u32,
    atoms: Vec<AtomId>,
}

impl PathSpec {
    pub fn new(gen: u32, atoms: Vec<AtomId>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        if let Some(a) = atoms.iter().find(|a| a.gen() != gen) {
            return Err(Error::InvalidPath(format!("{a} is not of generation {gen}")));
        }
        if let Some(w) = atoms
            .windows(2)
            .find(|w| !atoms::is_edge(w[0], w[1]).unwrap_or(false))
        {
            return Err(Error::InvalidPath(format!("no edge {} -> {}", w[0], w[1])));
        }
        Ok(Self { gen, atoms })
    }

    pub fn gen(&self) -> u32 {
        self.gen
    }

    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }

    /// Number of steps `l` of an `(l+1)`-path.
    pub fn steps(&self) -> u32 {
        self.atoms.len() as u32 - 1
    }
}

impl fmt::Display for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.atoms.iter().map(|a| a.index().to_string()).collect();
        write!(f, "gen {}: {}", self.gen, idx.join(" -> "))
    }
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

fn decimal_opt<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => decimal(v, s),
        None => s.serialize_none(),
    }
}

/// Closed form against counted value. `enumerated` is `None` when the
/// enumeration was skipped for budget reasons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub n: u32,
    pub l: u32,
    #[serde(serialize_with = "decimal")]
    pub formula: BigUint,
    #[serde(serialize_with = "decimal")]
    pub dp: BigUint,
    #[serde(serialize_with = "decimal_opt")]
    pub enumerated: Option<BigUint>,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// Out-adjacency of one generation, stored flat with stride `2^n`.
#[derive(Debug, Clone)]
pub struct LevelGraph {
    gen: u32,
    degree: usize,
    out: Vec<u32>,
}

impl LevelGraph {
    pub fn new(gen: u32) -> Result<Self> {
        if gen > ENUMERATION_CAP {
            return Err(Error::GenerationCap {
                gen,
                cap: ENUMERATION_CAP,
            });
        }
        let out = (0..atoms::generation_size(gen))
            .into_par_iter()
            .flat_map_iter(|i| {
                atoms::out_neighbors(AtomId::new(gen, i).expect("in range"))
                    .into_iter()
                    .map(|b| b.index() as u32)
            })
            .collect();
        Ok(Self {
            gen,
            degree: atoms::degree(gen) as usize,
            out,
        })
    }

    pub fn gen(&self) -> u32 {
        self.gen
    }

    pub fn len(&self) -> usize {
        self.out.len() / self.degree
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn out(&self, i: usize) -> &[u32] {
        &self.out[i * self.degree..(i + 1) * self.degree]
    }

    /// One DP step: pushes every count along its out-edges.
    pub fn push_forward(&self, counts: &[BigUint]) -> Vec<BigUint> {
        let mut next = vec![BigUint::zero(); counts.len()];
        for (i, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &j in self.out(i) {
                next[j as usize] += c;
            }
        }
        next
    }

    /// Number of `(l+1)`-paths from `a` to every atom.
    pub fn counts_from(&self, a: usize, l: u32) -> Vec<BigUint> {
        let mut counts = vec![BigUint::zero(); self.len()];
        counts[a] = BigUint::one();
        for _ in 0..l {
            counts = self.push_forward(&counts);
        }
        counts
    }
}

/// Closed form for the number of `(l+1)`-paths of `n`-atoms: `2^(nl + n^2)`.
pub fn paths_total_formula(n: u32, l: u32) -> BigUint {
    BigUint::one() << (n as u64 * l as u64 + n as u64 * n as u64)
}

/// Closed form for paths between a fixed pair once `l >= 2n - 1`: `2^(nl - n^2)`.
pub fn paths_between_formula(n: u32, l: u32) -> Option<BigUint> {
    let e = n as i64 * l as i64 - n as i64 * n as i64;
    (l + 1 >= 2 * n && e >= 0).then(|| BigUint::one() << e as u64)
}

/// Number of `(l+1)`-paths of `n`-atoms by dynamic programming.
pub fn count_paths_total(n: u32, l: u32) -> Result<BigUint> {
    let graph = LevelGraph::new(n)?;
    let mut counts = vec![BigUint::one(); graph.len()];
    for _ in 0..l {
        counts = graph.push_forward(&counts);
    }
    Ok(counts.into_iter().sum())
}

/// DP total, closed form, and (within `budget`) a brute-force count.
pub fn count_paths_total_report(n: u32, l: u32, budget: u64) -> Result<CountReport> {
    let dp = count_paths_total(n, l)?;
    let formula = paths_total_formula(n, l);
    let enumerated = if atoms::generation_size(n) <= 65_536 && dp <= BigUint::from(budget) {
        let graph = LevelGraph::new(n)?;
        Some(BigUint::from(brute_force_path_count(&graph, l)))
    } else {
        None
    };
    let matches = dp == formula && enumerated.as_ref().is_none_or(|e| *e == formula);
    Ok(CountReport {
        n,
        l,
        formula,
        dp,
        enumerated,
        matches,
    })
}

/// Walks every path explicitly; independent of the DP.
fn brute_force_path_count(graph: &LevelGraph, l: u32) -> u64 {
    fn walk(graph: &LevelGraph, at: usize, left: u32) -> u64 {
        if left == 0 {
            return 1;
        }
        graph
            .out(at)
            .iter()
            .map(|&j| walk(graph, j as usize, left - 1))
            .sum()
    }
    (0..graph.len())
        .into_par_iter()
        .map(|i| walk(graph, i, l))
        .sum()
}

fn check_pair(n: u32, a: AtomId, b: AtomId) -> Result<()> {
    if a.gen() != n || b.gen() != n {
        return Err(Error::GenerationMismatch(a.gen(), b.gen()));
    }
    Ok(())
}

/// Number of `(l+1)`-paths of `n`-atoms from `a` to `b`.
pub fn count_paths_between(n: u32, l: u32, a: AtomId, b: AtomId) -> Result<BigUint> {
    check_pair(n, a, b)?;
    let graph = LevelGraph::new(n)?;
    Ok(graph.counts_from(a.index() as usize, l).swap_remove(b.index() as usize))
}

/// Iterator over all `(l+1)`-paths between two fixed atoms.
///
/// Depth-first; a branch is entered only if the target is still reachable in
/// the remaining number of steps, so every leaf is a path.
pub struct PathEnumerator {
    graph: LevelGraph,
    /// `reach[k][v]`: the target can be reached from `v` in exactly `k` steps.
    reach: Vec<Vec<bool>>,
    stack: Vec<(u32, usize)>,
    l: u32,
    done: bool,
}

impl PathEnumerator {
    fn new(graph: LevelGraph, l: u32, a: usize, b: usize) -> Self {
        let len = graph.len();
        let mut reach = vec![vec![false; len]; l as usize + 1];
        reach[0][b] = true;
        for k in 1..=l as usize {
            for v in 0..len {
                reach[k][v] = graph.out(v).iter().any(|&w| reach[k - 1][w as usize]);
            }
        }
        let done = !reach[l as usize][a];
        Self {
            graph,
            reach,
            stack: vec![(a as u32, 0)],
            l,
            done,
        }
    }

    fn emit(&self) -> PathSpec {
        let gen = self.graph.gen();
        let atoms = self
            .stack
            .iter()
            .map(|(v, _)| AtomId::new(gen, *v as u64).expect("in range"))
            .collect();
        PathSpec { gen, atoms }
    }
}

impl Iterator for PathEnumerator {
    type Item = PathSpec;

    fn next(&mut self) -> Option<PathSpec> {
        if self.done {
            return None;
        }
        loop {
            let depth = self.stack.len() - 1;
            if depth == self.l as usize {
                let path = self.emit();
                self.stack.pop();
                if self.stack.is_empty() {
                    self.done = true;
                }
                return Some(path);
            }
            let (v, next_rank) = *self.stack.last()?;
            let out = self.graph.out(v as usize);
            let remaining = self.l as usize - depth - 1;
            let step = out[next_rank..]
                .iter()
                .position(|&w| self.reach[remaining][w as usize]);
            match step {
                Some(off) => {
                    let r = next_rank + off;
                    self.stack.last_mut()?.1 = r + 1;
                    self.stack.push((out[r], 0));
                }
                None => {
                    self.stack.pop();
                    if self.stack.is_empty() {
                        self.done = true;
                        return None;
                    }
                }
            }
        }
    }
}

/// Enumerates every `(l+1)`-path from `a` to `b`, refusing when the count
/// exceeds `budget` or the generation is above the enumeration cap.
pub fn enumerate_paths(
    n: u32,
    l: u32,
    a: AtomId,
    b: AtomId,
    budget: u64,
) -> Result<PathEnumerator> {
    check_pair(n, a, b)?;
    if n > PATH_ENUMERATION_GEN_CAP {
        return Err(Error::BudgetExceeded(format!(
            "path enumeration capped at generation {PATH_ENUMERATION_GEN_CAP}"
        )));
    }
    let graph = LevelGraph::new(n)?;
    let count = &graph.counts_from(a.index() as usize, l)[b.index() as usize];
    if *count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded(format!(
            "{count} paths exceed the budget of {budget}"
        )));
    }
    Ok(PathEnumerator::new(
        graph,
        l,
        a.index() as usize,
        b.index() as usize,
    ))
}

/// Fibre size closed form: `2^((n+l)^2 - n^2 - nl) = 2^(nl + l^2)`.
pub fn fiber_count_formula(n: u32, l: u32) -> BigUint {
    BigUint::one() << (n as u64 * l as u64 + l as u64 * l as u64)
}

fn fiber_candidates(path: &PathSpec, cap: u32) -> Result<(u32, u32, Vec<AtomId>)> {
    let n = path.gen();
    let l = path.steps();
    let g = n + l;
    if g > cap {
        return Err(Error::GenerationCap { gen: g, cap });
    }
    let candidates = atoms::descendants(path.atoms()[0], g)?.collect();
    Ok((n, l, candidates))
}

/// Atoms of generation `n + l` whose itinerary is `path`.
pub fn fiber_atoms(path: &PathSpec) -> Result<Vec<AtomId>> {
    fiber_atoms_capped(path, ENUMERATION_CAP)
}

pub fn fiber_atoms_capped(path: &PathSpec, cap: u32) -> Result<Vec<AtomId>> {
    let (n, l, candidates) = fiber_candidates(path, cap)?;
    Ok(candidates
        .into_par_iter()
        .filter(|g| symbolic::itinerary(*g, n, l).is_ok_and(|p| p == *path))
        .collect())
}

/// Whether `g` starts an `(l+1)`-path `g = G_0 -> G_1 -> … -> G_l` of
/// `(n+l)`-atoms with `G_j ⊂ A_j` for every atom `A_j` of `path`.
pub fn in_fiber_lifted(g: AtomId, path: &PathSpec) -> bool {
    fn lifts(at: AtomId, rest: &[AtomId], n: u32) -> bool {
        match rest.split_first() {
            None => true,
            Some((target, tail)) => atoms::out_neighbors(at).into_iter().any(|next| {
                symbolic::ancestor(next, n).ok() == Some(*target) && lifts(next, tail, n)
            }),
        }
    }
    let n = path.gen();
    g.gen() == n + path.steps()
        && symbolic::ancestor(g, n).ok() == Some(path.atoms()[0])
        && lifts(g, &path.atoms()[1..], n)
}

/// The fibre of `path` by the lifted-path characterization.
pub fn fiber_atoms_lifted(path: &PathSpec) -> Result<Vec<AtomId>> {
    let (_, _, candidates) = fiber_candidates(path, ENUMERATION_CAP)?;
    Ok(candidates
        .into_par_iter()
        .filter(|g| in_fiber_lifted(*g, path))
        .collect())
}

/// Sizes of every fibre at `(n, l)` from one pass over generation `n + l`.
pub fn fiber_partition(n: u32, l: u32) -> Result<HashMap<PathSpec, u64>> {
    let g = n + l;
    if g > ENUMERATION_CAP {
        return Err(Error::GenerationCap {
            gen: g,
            cap: ENUMERATION_CAP,
        });
    }
    let sizes = (0..atoms::generation_size(g))
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<PathSpec, u64>, i| {
            let atom = AtomId::new(g, i).expect("in range");
            let p = symbolic::itinerary(atom, n, l).expect("generation matches");
            *acc.entry(p).or_default() += 1;
            acc
        })
        .reduce(HashMap::new, |mut x, y| {
            for (k, v) in y {
                *x.entry(k).or_default() += v;
            }
            x
        });
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(gen: u32, index: u64) -> AtomId {
        AtomId::new(gen, index).unwrap()
    }

    #[test]
    fn totals() {
        assert_eq!(count_paths_total(1, 1).unwrap(), BigUint::from(4u32));
        assert_eq!(count_paths_total(2, 2).unwrap(), BigUint::from(256u32));
        let r = count_paths_total_report(1, 3, DEFAULT_PATH_BUDGET).unwrap();
        assert_eq!(r.enumerated, Some(BigUint::from(16u32)));
        assert!(r.matches);
    }

    #[test]
    fn enumeration_skipped_over_budget() {
        let r = count_paths_total_report(2, 3, 10).unwrap();
        assert!(r.enumerated.is_none());
        assert!(r.matches);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["enumerated"].is_null());
        assert_eq!(json["formula"], "1024");
    }

    #[test]
    fn pair_counts() {
        for x in AtomId::all(1) {
            for y in AtomId::all(1) {
                assert_eq!(count_paths_between(1, 1, x, y).unwrap(), BigUint::one());
            }
        }
        let g = LevelGraph::new(2).unwrap();
        for i in 0..16 {
            assert!(g.counts_from(i, 3).iter().all(|c| *c == BigUint::from(4u32)));
        }
        let zero_pair = (0..16).any(|i| g.counts_from(i, 1).iter().any(|c| c.is_zero()));
        assert!(zero_pair);
    }

    #[test]
    fn enumerate_complete_two_graph() {
        let b0 = a(1, 0);
        let paths: Vec<_> = enumerate_paths(1, 2, b0, b0, 100).unwrap().collect();
        let idx: Vec<Vec<u64>> = paths
            .iter()
            .map(|p| p.atoms().iter().map(|x| x.index()).collect())
            .collect();
        assert_eq!(idx, vec![vec![0, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn enumerate_empty_when_unreachable() {
        let g = LevelGraph::new(2).unwrap();
        let (i, j) = (0..16)
            .find_map(|i| {
                g.counts_from(i, 1)
                    .iter()
                    .position(|c| c.is_zero())
                    .map(|j| (i, j))
            })
            .unwrap();
        let it = enumerate_paths(2, 1, a(2, i as u64), a(2, j as u64), 10).unwrap();
        assert_eq!(it.count(), 0);
    }

    #[test]
    fn enumeration_budget() {
        assert!(matches!(
            enumerate_paths(2, 6, a(2, 0), a(2, 1), 10),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            enumerate_paths(4, 1, a(4, 0), a(4, 1), 10),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn fiber_formula_values() {
        assert_eq!(fiber_count_formula(1, 1), BigUint::from(4u32));
        assert_eq!(fiber_count_formula(2, 1), BigUint::from(8u32));
        assert_eq!(fiber_count_formula(1, 2), BigUint::from(64u32));
    }

    #[test]
    fn fibers_small() {
        let p = PathSpec::new(1, vec![a(1, 0), a(1, 1)]).unwrap();
        let f = fiber_atoms(&p).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f, fiber_atoms_lifted(&p).unwrap());
        for x in AtomId::all(1) {
            for y in AtomId::all(1) {
                for z in AtomId::all(1) {
                    let p = PathSpec::new(1, vec![x, y, z]).unwrap();
                    assert_eq!(fiber_atoms(&p).unwrap().len(), 64);
                }
            }
        }
    }

    #[test]
    fn path_spec_validation() {
        assert!(PathSpec::new(2, vec![a(2, 2), a(2, 0)]).is_err());
        assert!(PathSpec::new(2, vec![a(1, 0)]).is_err());
        assert!(PathSpec::new(2, vec![]).is_err());
        assert!(fiber_atoms(&PathSpec::new(3, vec![a(3, 0); 1]).unwrap()).is_ok());
        let long = PathSpec::new(1, vec![a(1, 0); 5]).unwrap();
        assert!(matches!(fiber_atoms(&long), Err(Error::GenerationCap { .. })));
    }
}
