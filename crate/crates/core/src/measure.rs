//! The measure giving every `n`-atom cylinder mass `2^(-n^2)`, with exact
//! checks of invariance, the mixing product law, and partition entropy.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::atoms::{self, AtomId, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::paths::{self, LevelGraph, PATH_ENUMERATION_GEN_CAP};
use crate::symbolic::{self, Window};

/// Exact value `numerator / 2^exponent`, kept with an odd numerator (or zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicMass {
    numerator: BigUint,
    exponent: u64,
}

impl DyadicMass {
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let shift = numerator.trailing_zeros().unwrap_or(0).min(exponent);
        Self {
            numerator: numerator >> shift,
            exponent: exponent - shift,
        }
    }

    pub fn zero() -> Self {
        Self {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }

    /// `2^(-e)`.
    pub fn inverse_power_of_two(e: u64) -> Self {
        Self {
            numerator: BigUint::one(),
            exponent: e,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let num = self.numerator.to_f64().unwrap_or(f64::INFINITY);
        num * 2f64.powi(-(self.exponent.min(i32::MAX as u64) as i32))
    }
}

impl Add for &DyadicMass {
    type Output = DyadicMass;

    fn add(self, rhs: &DyadicMass) -> DyadicMass {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        DyadicMass::new(a + b, e)
    }
}

impl Add for DyadicMass {
    type Output = DyadicMass;

    fn add(self, rhs: DyadicMass) -> DyadicMass {
        &self + &rhs
    }
}

impl Mul for &DyadicMass {
    type Output = DyadicMass;

    fn mul(self, rhs: &DyadicMass) -> DyadicMass {
        DyadicMass::new(&self.numerator * &rhs.numerator, self.exponent + rhs.exponent)
    }
}

impl Mul for DyadicMass {
    type Output = DyadicMass;

    fn mul(self, rhs: DyadicMass) -> DyadicMass {
        &self * &rhs
    }
}

impl std::iter::Sum for DyadicMass {
    fn sum<I: Iterator<Item = DyadicMass>>(iter: I) -> Self {
        iter.fold(DyadicMass::zero(), |acc, m| &acc + &m)
    }
}

impl fmt::Display for DyadicMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl Serialize for DyadicMass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Entropy in bits; exact because every cylinder of the partition has equal mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EntropyBits(pub u64);

impl EntropyBits {
    pub fn nats(self) -> f64 {
        self.0 as f64 * std::f64::consts::LN_2
    }
}

impl fmt::Display for EntropyBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

fn sq(n: u32) -> u64 {
    n as u64 * n as u64
}

pub fn cylinder_mass(a: AtomId) -> DyadicMass {
    DyadicMass::inverse_power_of_two(sq(a.gen()))
}

fn check_cap(gen: u32) -> Result<()> {
    if gen > ENUMERATION_CAP {
        return Err(Error::GenerationCap {
            gen,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Mass of the preimage of `c`'s cylinder, summed over the generation-`(n+1)`
/// atoms `(D, B, c, j)` whose image lies in `c`.
pub fn preimage_mass(c: AtomId) -> Result<DyadicMass> {
    let n = c.gen();
    check_cap(n + 1)?;
    if n == 0 {
        return Ok(DyadicMass::one());
    }
    let count: u64 = atoms::in_neighbors(c)
        .into_iter()
        .map(|b| atoms::in_neighbors(b).len() as u64 * 2)
        .sum();
    Ok(DyadicMass::new(BigUint::from(count), sq(n + 1)))
}

/// Preimage masses of every `n`-atom from one pass over generation `n + 1`.
pub fn preimage_masses_enumerated(n: u32) -> Result<Vec<DyadicMass>> {
    check_cap(n + 1)?;
    if n == 0 {
        return Ok(vec![DyadicMass::one()]);
    }
    let mut counts = vec![0u64; atoms::generation_size(n) as usize];
    for g in AtomId::all(n + 1) {
        counts[symbolic::phi_image_atom(g)?.index() as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| DyadicMass::new(BigUint::from(c), sq(n + 1)))
        .collect())
}

/// Mass of `c ∩ Φ^(-l)(d)` by the path-times-fibre factorization.
pub fn correlation(c: AtomId, d: AtomId, l: u32) -> Result<DyadicMass> {
    let n = c.gen();
    let paths = paths::count_paths_between(n, l, c, d)?;
    Ok(correlation_from_paths(n, l, paths))
}

fn correlation_from_paths(n: u32, l: u32, paths: BigUint) -> DyadicMass {
    let fiber = paths::fiber_count_formula(n, l);
    DyadicMass::new(paths * fiber, sq(n + l))
}

/// Same mass by counting generation-`(n+l)` atoms inside `c` whose `l`-th
/// image lies in `d`.
pub fn correlation_enumerated(c: AtomId, d: AtomId, l: u32) -> Result<DyadicMass> {
    let n = c.gen();
    if d.gen() != n {
        return Err(Error::GenerationMismatch(n, d.gen()));
    }
    let g = n + l;
    check_cap(g)?;
    let count = atoms::descendants(c, g)?
        .par_bridge()
        .filter(|x| {
            symbolic::itinerary(*x, n, l).is_ok_and(|p| p.atoms()[l as usize] == d)
        })
        .count();
    Ok(DyadicMass::new(BigUint::from(count), sq(g)))
}

/// Outcome of the product-law check at one `(n, l)`.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub n: u32,
    pub l: u32,
    pub pairs_checked: u64,
    pub product_law_holds: bool,
    /// Pairs whose correlation is zero.
    pub zero_pairs: u64,
    /// First failing pair and its mass.
    pub counterexample: Option<MixingFailure>,
}

/// Pair `(C, D)` and the mass found for it.
pub type MixingFailure = (AtomId, AtomId, DyadicMass);

/// Checks `correlation(C, D, l) = ν(C)·ν(D)` on every pair of `n`-atoms.
pub fn mixing_check(n: u32, l: u32) -> Result<MixingReport> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidPath(format!("need n >= 1 and l >= 1, got n={n}, l={l}")));
    }
    let graph = LevelGraph::new(n)?;
    let target = DyadicMass::inverse_power_of_two(2 * sq(n));
    let rows: Vec<(u64, Option<MixingFailure>)> = (0..graph.len())
        .into_par_iter()
        .map(|i| {
            let mut zeros = 0;
            let mut bad = None;
            for (j, count) in graph.counts_from(i, l).into_iter().enumerate() {
                if count.is_zero() {
                    zeros += 1;
                }
                let mass = correlation_from_paths(n, l, count);
                if mass != target && bad.is_none() {
                    bad = Some((
                        AtomId::new(n, i as u64).expect("in range"),
                        AtomId::new(n, j as u64).expect("in range"),
                        mass,
                    ));
                }
            }
            (zeros, bad)
        })
        .collect();
    let zero_pairs = rows.iter().map(|r| r.0).sum();
    let counterexample = rows.into_iter().find_map(|r| r.1);
    Ok(MixingReport {
        n,
        l,
        pairs_checked: (graph.len() as u64).pow(2),
        product_law_holds: counterexample.is_none(),
        zero_pairs,
        counterexample,
    })
}

pub fn partition_entropy(n: u32, l: u32) -> EntropyBits {
    EntropyBits(sq(n) + n as u64 * l as u64)
}

/// Partition entropy with every join-cylinder accounted for.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub n: u32,
    pub l: u32,
    pub entropy_bits: EntropyBits,
    #[serde(serialize_with = "decimal")]
    pub cylinders: BigUint,
    pub cylinder_mass: DyadicMass,
    pub total_mass: DyadicMass,
    /// Set when the cylinder masses were also recounted from finer atoms.
    pub atom_cross_check: Option<bool>,
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// Bits newly fixed by `b` one step after `a`, or `None` if their windows clash.
fn step_bits(a: &Window, b: &Window) -> Option<u64> {
    let mut acc = a.clone();
    symbolic::merge_window(&mut acc, b, 1).map(|added| added as u64)
}

/// Enumerated partition entropy at `(n, l)`.
///
/// Each join-cylinder `A_0 ∩ Φ^(-1)A_1 ∩ … ∩ Φ^(-l)A_l` is weighed by counting the
/// coordinates it fixes in the shift picture, independently of the path
/// formulas. The histogram of fixed-bit counts over all paths must have a
/// single entry; otherwise the construction is falsified.
pub fn partition_entropy_enumerated(n: u32, l: u32) -> Result<EntropyReport> {
    if n == 0 {
        return Ok(EntropyReport {
            n,
            l,
            entropy_bits: EntropyBits(0),
            cylinders: BigUint::one(),
            cylinder_mass: DyadicMass::one(),
            total_mass: DyadicMass::one(),
            atom_cross_check: None,
        });
    }
    if n > PATH_ENUMERATION_GEN_CAP {
        return Err(Error::GenerationCap {
            gen: n,
            cap: PATH_ENUMERATION_GEN_CAP,
        });
    }
    let graph = LevelGraph::new(n)?;
    let windows: Vec<Window> = AtomId::all(n).map(symbolic::window).collect();
    let edge_bits: Vec<Vec<u64>> = (0..graph.len())
        .into_par_iter()
        .map(|i| {
            graph
                .out(i)
                .iter()
                .map(|&j| step_bits(&windows[i], &windows[j as usize]).unwrap_or(u64::MAX))
                .collect()
        })
        .collect();
    if let Some((i, r)) = edge_bits
        .iter()
        .enumerate()
        .find_map(|(i, row)| row.iter().position(|&b| b == u64::MAX).map(|r| (i, r)))
    {
        return Err(Error::Falsified(format!(
            "edge {} -> {} has clashing coordinates",
            i,
            graph.out(i)[r]
        )));
    }

    // hist[v][bits]: number of paths ending at v that fix `bits` coordinates.
    let mut hist: Vec<HashMap<u64, BigUint>> = windows
        .iter()
        .map(|w| HashMap::from([(w.len() as u64, BigUint::one())]))
        .collect();
    for _ in 0..l {
        let mut next: Vec<HashMap<u64, BigUint>> = vec![HashMap::new(); graph.len()];
        for (i, h) in hist.iter().enumerate() {
            for (r, &j) in graph.out(i).iter().enumerate() {
                for (bits, count) in h {
                    *next[j as usize]
                        .entry(bits + edge_bits[i][r])
                        .or_insert_with(BigUint::zero) += count;
                }
            }
        }
        hist = next;
    }
    let mut merged: HashMap<u64, BigUint> = HashMap::new();
    for h in hist {
        for (bits, count) in h {
            *merged.entry(bits).or_insert_with(BigUint::zero) += count;
        }
    }
    if merged.len() != 1 {
        let mut sizes: Vec<u64> = merged.keys().copied().collect();
        sizes.sort_unstable();
        return Err(Error::Falsified(format!(
            "unequal cylinder masses at n={n}, l={l}: fixed-bit counts {sizes:?}"
        )));
    }
    let (bits, cylinders) = merged.into_iter().next().expect("one entry");
    let cylinder_mass = DyadicMass::inverse_power_of_two(bits);
    let total_mass = DyadicMass::new(cylinders.clone(), bits);
    if total_mass != DyadicMass::one() {
        return Err(Error::Falsified(format!(
            "cylinder masses sum to {total_mass} at n={n}, l={l}"
        )));
    }

    let atom_cross_check = if n + l <= ENUMERATION_CAP {
        let fibers = paths::fiber_partition(n, l)?;
        let expected = BigUint::one() << (sq(n + l) - bits);
        Some(
            BigUint::from(fibers.len()) == cylinders
                && fibers.values().all(|&c| BigUint::from(c) == expected),
        )
    } else {
        None
    };
    if atom_cross_check == Some(false) {
        return Err(Error::Falsified(format!(
            "atom recount disagrees with cylinder masses at n={n}, l={l}"
        )));
    }

    Ok(EntropyReport {
        n,
        l,
        entropy_bits: EntropyBits(bits),
        cylinders,
        cylinder_mass,
        total_mass,
        atom_cross_check,
    })
}

/// Entropy growth in `l` for fixed `n`, plus the per-generation rate table.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyRate {
    pub n: u32,
    /// `(l, H(n, l))` for `l = 0..=l_max`.
    pub table: Vec<(u32, EntropyBits)>,
    /// `H(n, l+1) - H(n, l)` in bits.
    pub increments: Vec<u64>,
    /// `(m, h(A_m))` in bits for `m = 1..=cap`.
    pub rates: Vec<(u32, u64)>,
    pub increments_constant: bool,
    pub rates_strictly_increasing: bool,
}

pub fn entropy_rate(n: u32, l_max: u32) -> EntropyRate {
    let table: Vec<(u32, EntropyBits)> = (0..=l_max).map(|l| (l, partition_entropy(n, l))).collect();
    let increments: Vec<u64> = table.windows(2).map(|w| w[1].1 .0 - w[0].1 .0).collect();
    let rates: Vec<(u32, u64)> = (1..=ENUMERATION_CAP)
        .map(|m| (m, partition_entropy(m, 1).0 - partition_entropy(m, 0).0))
        .collect();
    EntropyRate {
        n,
        increments_constant: increments.iter().all(|&d| d == n as u64),
        rates_strictly_increasing: rates.windows(2).all(|w| w[0].1 < w[1].1),
        table,
        increments,
        rates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(num: u64, e: u64) -> DyadicMass {
        DyadicMass::new(BigUint::from(num), e)
    }

    #[test]
    fn dyadic_canonical_form() {
        assert_eq!(m(4, 4), m(1, 2));
        assert_eq!(m(0, 9), DyadicMass::zero());
        assert_eq!(m(6, 0).exponent(), 0);
        assert_eq!(m(3, 3).to_string(), "3/2^3");
        assert_eq!(DyadicMass::one().to_string(), "1");
        assert_eq!(&m(1, 2) + &m(1, 2), m(1, 1));
        assert_eq!(&m(1, 2) * &m(3, 1), m(3, 3));
        assert_eq!(m(3, 2).to_f64(), 0.75);
        assert_eq!(serde_json::to_string(&m(1, 16)).unwrap(), "\"1/2^16\"");
    }

    #[test]
    fn cylinder_masses() {
        assert_eq!(cylinder_mass(AtomId::ROOT), DyadicMass::one());
        assert_eq!(cylinder_mass(AtomId::new(2, 5).unwrap()), m(1, 4));
        let total: DyadicMass = AtomId::all(3).map(cylinder_mass).sum();
        assert_eq!(total, DyadicMass::one());
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(preimage_mass(AtomId::ROOT).unwrap(), DyadicMass::one());
        for a in AtomId::all(1) {
            assert_eq!(preimage_mass(a).unwrap(), m(1, 1));
        }
        assert_eq!(preimage_mass(AtomId::new(2, 11).unwrap()).unwrap(), m(32, 9));
        assert!(preimage_mass(AtomId::new(4, 0).unwrap()).is_err());
    }

    #[test]
    fn preimage_enumeration_agrees() {
        for n in 0..=2 {
            let by_pass = preimage_masses_enumerated(n).unwrap();
            for a in AtomId::all(n) {
                assert_eq!(by_pass[a.index() as usize], preimage_mass(a).unwrap());
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let q = m(1, 2);
        for c in AtomId::all(1) {
            for d in AtomId::all(1) {
                assert_eq!(correlation(c, d, 1).unwrap(), q);
                assert_eq!(correlation_enumerated(c, d, 1).unwrap(), q);
            }
        }
        let c = AtomId::new(2, 3).unwrap();
        let d = AtomId::new(2, 12).unwrap();
        assert_eq!(correlation(c, d, 3).unwrap(), m(1, 8));
        let r = mixing_check(2, 1).unwrap();
        assert!(!r.product_law_holds);
        assert!(r.zero_pairs > 0);
        let (c, d, mass) = r.counterexample.unwrap();
        assert!(mass.is_zero() || mass != m(1, 8));
        assert_eq!(correlation_enumerated(c, d, 1).unwrap(), mass);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(partition_entropy(1, 0), EntropyBits(1));
        assert_eq!(partition_entropy(2, 3), EntropyBits(10));
        let r = partition_entropy_enumerated(3, 1).unwrap();
        assert_eq!(r.entropy_bits, EntropyBits(12));
        assert_eq!(r.cylinders, BigUint::from(4096u32));
        assert_eq!(r.atom_cross_check, Some(true));
        let r = partition_entropy_enumerated(1, 0).unwrap();
        assert_eq!(r.entropy_bits, EntropyBits(1));
    }

    #[test]
    fn entropy_rates() {
        let r = entropy_rate(3, 4);
        assert_eq!(r.increments, vec![3; 4]);
        assert!(r.increments_constant);
        assert_eq!(r.rates, vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert!(r.rates_strictly_increasing);
    }
}
