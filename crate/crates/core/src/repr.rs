//! Signed alternating representations of integers by lacunary frequencies.
//!
//! A block is an odd-size index set `j_1 < ... < j_J` read as the
//! alternating sum `m_{j_1} - m_{j_2} + ... + m_{j_J}`. A representation of
//! `n` is a pair of blocks `(P, K)` with `n = value(P) - value(K)`; it is
//! maximally shortened when no index carries the same sign in both blocks,
//! since such a term would cancel. Each representation induces a signed
//! multiplicity `c_j in {-2, ..., 2}`; shortened representations are
//! identified by that vector.
//!
//! Blocks are bitmasks over window positions: bit `i` stands for the index
//! `M + 1 + i` of the window `(M, N]`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::lacunary::LacunarySequence;
use crate::numeric::{compensated_sum, relative_residual};
use crate::product::{CoefficientSequence, TrigPolyPair};

/// Hard ceiling for single-`n` queries: `2^22` signed subsets.
pub const QUERY_WINDOW_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Block {
    mask: u32,
    /// positions with sign `+`
    pos: u32,
    /// positions with sign `-`
    neg: u32,
    value: i64,
}

impl Block {
    fn new(mask: u32, window: &[i64]) -> Self {
        let (mut pos, mut neg, mut value) = (0u32, 0u32, 0i64);
        let mut plus = true;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            if plus {
                pos |= 1 << i;
                value += window[i as usize];
            } else {
                neg |= 1 << i;
                value -= window[i as usize];
            }
            plus = !plus;
        }
        Self { mask, pos, neg, value }
    }
}

/// Signed multiplicity vector as three masks: `plus` where `c_j > 0`,
/// `minus` where `c_j < 0`, `double` where `|c_j| = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub plus: u32,
    pub minus: u32,
    pub double: u32,
}

impl Multiplicity {
    fn of(p: &Block, k: &Block) -> Self {
        Self {
            plus: p.pos | k.neg,
            minus: p.neg | k.pos,
            double: (p.pos & k.neg) | (p.neg & k.pos),
        }
    }

    /// `c_j` at window position `i`.
    pub fn coefficient(&self, i: usize) -> i8 {
        let bit = 1u32 << i;
        let size = if self.double & bit != 0 { 2 } else { 1 };
        if self.plus & bit != 0 {
            size
        } else if self.minus & bit != 0 {
            -size
        } else {
            0
        }
    }

    pub fn to_vec(&self, window_len: usize) -> Vec<i8> {
        (0..window_len).map(|i| self.coefficient(i)).collect()
    }

    /// Positions used exactly once.
    pub fn single(&self) -> u32 {
        (self.plus | self.minus) & !self.double
    }
}

fn is_shortened(p: &Block, k: &Block) -> bool {
    p.pos & k.pos == 0 && p.neg & k.neg == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedRepresentation {
    /// 1-based indices `j_1 < ... < j_J`
    #[serde(rename = "plusBlock")]
    pub plus_block: Vec<usize>,
    #[serde(rename = "minusBlock")]
    pub minus_block: Vec<usize>,
    pub value: i64,
    pub shortened: bool,
    /// `c_j` for every index of the window, in order
    pub multiplicity: Vec<i8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTriple {
    #[serde(rename = "S0")]
    pub s0: Vec<usize>,
    #[serde(rename = "S1")]
    pub s1: Vec<usize>,
    #[serde(rename = "S2")]
    pub s2: Vec<usize>,
}

impl PartitionTriple {
    fn from_masks(start: usize, len: usize, single: u32, double: u32) -> Self {
        let mut t = Self::default();
        for i in 0..len {
            let bit = 1u32 << i;
            let j = start + 1 + i;
            if double & bit != 0 {
                t.s2.push(j);
            } else if single & bit != 0 {
                t.s1.push(j);
            } else {
                t.s0.push(j);
            }
        }
        t
    }
}

/// Window `(M, N]` of a lacunary sequence with its frequencies.
#[derive(Debug, Clone)]
struct Window {
    start: usize,
    values: Vec<i64>,
}

impl Window {
    fn new(freqs: &LacunarySequence, m: usize, n: usize, limit: usize) -> Result<Self> {
        if m > n || n > freqs.len() {
            return Err(Error::IndexOutOfRange {
                start: m,
                end: n,
                len: freqs.len(),
            });
        }
        if n - m > limit {
            return Err(Error::Budget(format!(
                "window of {} indices exceeds the enumeration limit of {limit}",
                n - m
            )));
        }
        Ok(Self {
            start: m,
            values: freqs.frequencies()[m..n].to_vec(),
        })
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn indices(&self, mask: u32) -> Vec<usize> {
        (0..self.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.start + 1 + i)
            .collect()
    }

    /// Every odd-size block with at most `max_size` indices.
    fn blocks(&self, max_size: u32) -> Vec<Block> {
        let count = 1u64 << self.len();
        (1..count as u32)
            .filter(|m| m.count_ones() % 2 == 1 && m.count_ones() <= max_size)
            .map(|m| Block::new(m, &self.values))
            .collect()
    }
}

fn check_odd(name: &str, v: usize) -> Result<u32> {
    if v % 2 == 1 {
        Ok(v as u32)
    } else {
        Err(Error::InvalidInput(format!("{name} = {v} must be odd")))
    }
}

/// Values of all odd alternating blocks in the window, i.e. every frequency
/// the `b` polynomial of the window product can carry.
pub fn odd_block_values(freqs: &LacunarySequence, m: usize, n: usize) -> Result<BTreeSet<i64>> {
    let w = Window::new(freqs, m, n, QUERY_WINDOW_LIMIT)?;
    Ok(w.blocks(u32::MAX).into_iter().map(|b| b.value).collect())
}

/// All representations of `target` by blocks of at most `max_j` and
/// `max_k` indices, shortened or not, ordered by `(plus, minus)` blocks.
pub fn enumerate_representations(
    target: i64,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    max_j: usize,
    max_k: usize,
) -> Result<Vec<SignedRepresentation>> {
    let max_j = check_odd("maxJ", max_j)?;
    let max_k = check_odd("maxK", max_k)?;
    let w = Window::new(freqs, m, n, QUERY_WINDOW_LIMIT)?;
    let mut plus = w.blocks(max_j);
    plus.sort_unstable_by_key(|b| (b.value, b.mask));
    let minus = w.blocks(max_k);
    let mut found: Vec<(u32, u32, Multiplicity, bool)> = minus
        .par_iter()
        .flat_map_iter(|k| {
            let want = k.value.checked_add(target);
            let lo = want.map_or(plus.len(), |v| plus.partition_point(|b| b.value < v));
            plus[lo..]
                .iter()
                .take_while(move |b| Some(b.value) == want)
                .map(move |p| (p.mask, k.mask, Multiplicity::of(p, k), is_shortened(p, k)))
        })
        .collect();
    found.sort_unstable_by_key(|&(p, k, _, _)| (p, k));
    Ok(found
        .into_iter()
        .map(|(p, k, mult, shortened)| SignedRepresentation {
            plus_block: w.indices(p),
            minus_block: w.indices(k),
            value: target,
            shortened,
            multiplicity: mult.to_vec(w.len()),
        })
        .collect())
}

/// Shortened multiplicities of `target`, deduplicated and sorted.
fn shortened_multiplicities(target: i64, w: &Window) -> Vec<Multiplicity> {
    let mut plus = w.blocks(u32::MAX);
    plus.sort_unstable_by_key(|b| b.value);
    let set: BTreeSet<Multiplicity> = plus
        .iter()
        .flat_map(|k| {
            let want = k.value + target;
            let lo = plus.partition_point(|b| b.value < want);
            plus[lo..]
                .iter()
                .take_while(move |b| b.value == want)
                .filter(move |p| is_shortened(p, k))
                .map(move |p| Multiplicity::of(p, k))
        })
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: i64,
    pub multiplicities: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    #[serde(rename = "M")]
    pub start: usize,
    #[serde(rename = "N")]
    pub end: usize,
    pub ratio: f64,
    /// `q >= 3`; below that the report is diagnostic only.
    pub certified: bool,
    pub pairs_examined: u64,
    pub representable: usize,
    pub violations: Vec<Violation>,
}

/// `n -> smallest shortened multiplicity`, plus every `n` seen with more than one.
struct ValueMap {
    canonical: FxHashMap<i64, Multiplicity>,
    conflicts: BTreeMap<i64, BTreeSet<Multiplicity>>,
    pairs: u64,
}

impl ValueMap {
    fn empty() -> Self {
        Self {
            canonical: FxHashMap::default(),
            conflicts: BTreeMap::new(),
            pairs: 0,
        }
    }

    fn insert(&mut self, n: i64, mult: Multiplicity) {
        match self.canonical.get_mut(&n) {
            None => {
                self.canonical.insert(n, mult);
            }
            Some(prev) if *prev != mult => {
                let set = self.conflicts.entry(n).or_default();
                set.insert(*prev);
                set.insert(mult);
                *prev = (*prev).min(mult);
            }
            Some(_) => {}
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.pairs += other.pairs;
        for (n, set) in other.conflicts {
            self.conflicts.entry(n).or_default().extend(set);
        }
        for (n, mult) in other.canonical {
            self.insert(n, mult);
        }
        self
    }

    fn build(w: &Window) -> Self {
        let blocks = w.blocks(u32::MAX);
        blocks
            .par_iter()
            .fold(Self::empty, |mut acc, p| {
                for k in &blocks {
                    acc.pairs += 1;
                    if is_shortened(p, k) {
                        acc.insert(p.value - k.value, Multiplicity::of(p, k));
                    }
                }
                acc
            })
            .reduce(Self::empty, Self::merge)
    }
}

/// Exhaustively checks that every integer has at most one maximally
/// shortened representation in the window.
pub fn uniqueness_check(
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<UniquenessReport> {
    let w = Window::new(freqs, m, n, tol.max_exhaustive_window)?;
    let map = ValueMap::build(&w);
    let violations = map
        .conflicts
        .iter()
        .map(|(&value, set)| Violation {
            n: value,
            multiplicities: set.iter().map(|c| c.to_vec(w.len())).collect(),
        })
        .collect();
    Ok(UniquenessReport {
        start: m,
        end: n,
        ratio: freqs.ratio(),
        certified: freqs.ratio() >= 3.0,
        pairs_examined: map.pairs,
        representable: map.canonical.len(),
        violations,
    })
}

/// The partition induced by the shortened representation of `target`. When
/// several exist (only possible for `q < 3`) the smallest multiplicity is
/// used; without any, every index lands in `S0`.
pub fn classify_partition(
    target: i64,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
) -> Result<PartitionTriple> {
    let w = Window::new(freqs, m, n, QUERY_WINDOW_LIMIT)?;
    let (single, double) = shortened_multiplicities(target, &w)
        .first()
        .map_or((0, 0), |c| (c.single(), c.double));
    Ok(PartitionTriple::from_masks(m, w.len(), single, double))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCount {
    pub partition: PartitionTriple,
    pub count: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityBoundReport {
    #[serde(rename = "M")]
    pub start: usize,
    #[serde(rename = "N")]
    pub end: usize,
    pub partitions: usize,
    pub max_count: u64,
    /// largest `count / 2^{|S1|}` over all partitions, 0 when none occur
    pub max_ratio: f64,
    pub violations: Vec<PartitionCount>,
    pub ok: bool,
}

/// Groups every representable integer by its partition and checks that no
/// group holds more than `2^{|S1|}` integers.
pub fn multiplicity_bound_check(
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<MultiplicityBoundReport> {
    let w = Window::new(freqs, m, n, tol.max_exhaustive_window)?;
    let map = ValueMap::build(&w);
    let mut groups: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for c in map.canonical.values() {
        *groups.entry((c.single(), c.double)).or_default() += 1;
    }
    let mut report = MultiplicityBoundReport {
        start: m,
        end: n,
        partitions: groups.len(),
        max_count: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
        ok: true,
    };
    for (&(single, double), &count) in &groups {
        let bound = 1u64 << single.count_ones();
        report.max_count = report.max_count.max(count);
        report.max_ratio = report.max_ratio.max(count as f64 / bound as f64);
        if count > bound {
            report.violations.push(PartitionCount {
                partition: PartitionTriple::from_masks(m, w.len(), single, double),
                count,
                bound,
            });
        }
    }
    report.ok = report.violations.is_empty();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationCheck {
    /// `sum_n |sum_{n2 - n1 = n} D_{n1} conj(D_{n2})|^2` from coefficients
    pub lhs: f64,
    /// `exp(8 sum |B_j|^2)` over the window
    pub rhs: f64,
    pub ok: bool,
    /// `mean |b(t_k)|^4` on a grid fine enough to be exact
    pub quadrature: f64,
    pub agreement: f64,
    pub grid_points: usize,
}

/// The autocorrelation estimate for the `b` polynomial of `pair`.
pub fn autocorrelation_bound_check(
    pair: &TrigPolyPair,
    coeffs: &CoefficientSequence,
    tol: &Tolerances,
) -> Result<AutocorrelationCheck> {
    let window = coeffs.window(pair.start, pair.end)?;
    let energy = compensated_sum(window.iter().map(|c| c.b().norm_sqr()));
    let rhs = (8.0 * energy).exp();
    let lhs = pair.b.autocorrelation_energy()?;
    let span = pair.b.frequency_span();
    let grid = TorusGrid::new(2 * span as usize + 1)?;
    let values = pair.b.evaluate_on_grid(&grid);
    let fourth: Vec<f64> = values.iter().map(|v| v.norm_sqr().powi(2)).collect();
    let quadrature = grid.mean(&fourth);
    Ok(AutocorrelationCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + tol.autocorrelation_slack),
        quadrature,
        agreement: relative_residual(quadrature, lhs),
        grid_points: grid.size(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub n: i64,
    pub representations: Vec<SignedRepresentation>,
    pub partition: PartitionTriple,
}

/// Query report for one integer: all representations and the partition.
pub fn representation_report(
    target: i64,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    max_j: usize,
    max_k: usize,
) -> Result<RepresentationReport> {
    Ok(RepresentationReport {
        n: target,
        representations: enumerate_representations(target, freqs, m, n, max_j, max_k)?,
        partition: classify_partition(target, freqs, m, n)?,
    })
}
