//! Trace sets of power vertices and the swapped-power quotient isomorphism.
//!
//! For digraphs `G1`, `G2` with universal vertices `u1`, `u2`, write
//! `Gi* = Gi - ui` and let `K` be the complete digraph on `k` vertices. A
//! vertex of `G1^(comp(G2*) x K)` is a map `f: G2* x K -> G1`, stored as a
//! vector indexed by `p * k + j` where `p` is the position of `g2` in `G2*`.
//! Its trace is the set of pairs `(g1, g2)` with `g1 != u1` and
//! `f(g2, j) = g1` for some `j`.
//!
//! Whether `f -> f'` fails depends only on the two traces: it fails exactly
//! when some `(g1, g2)` in the first trace and `(g1', g2')` in the second have
//! `g1 -/-> g1'` in `G1` and `g2 -/-> g2'` in `G2`. That rule is symmetric in
//! the two digraphs, so transposing traces is an isomorphism between the
//! trace quotients of the two swapped powers once both sides can realize every
//! subset.

use std::fmt;

use crate::digraph::{complete_digraph, decode, exponential_with, is_universal, product_with, star_reduct};
use crate::error::{check_cap, sat_pow};
use crate::iso::is_isomorphism;
use crate::{Config, Digraph, Error, Result};

/// Ground sets wider than this cannot be stored as a `u64` mask.
pub const MAX_GROUND: usize = 63;

#[derive(Debug, Clone)]
pub struct PowerContext {
    g1: Digraph,
    u1: usize,
    g2: Digraph,
    u2: usize,
    k: usize,
    star1: Vec<usize>,
    star2: Vec<usize>,
    /// `conflict[b]`: pairs of the ground set clashing with pair `b`.
    conflict: Vec<u64>,
}

/// A subset of `G1* x G2*`, as a bit mask over `i1 * |G2*| + i2` plus the
/// pairs in original vertex numbering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceSet {
    pub bits: u64,
    pub pairs: Vec<(usize, usize)>,
}

impl fmt::Display for TraceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "}}")
    }
}

impl PowerContext {
    pub fn new(g1: Digraph, u1: usize, g2: Digraph, u2: usize, k: usize) -> Result<Self> {
        if !is_universal(&g1, u1) {
            return Err(Error::precondition(format!("u1 = {u1} is not universal in G1")));
        }
        if !is_universal(&g2, u2) {
            return Err(Error::precondition(format!("u2 = {u2} is not universal in G2")));
        }
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        let star1: Vec<usize> = (0..g1.len()).filter(|&v| v != u1).collect();
        let star2: Vec<usize> = (0..g2.len()).filter(|&v| v != u2).collect();
        let ground = star1.len() * star2.len();
        if ground > MAX_GROUND {
            return Err(Error::input(format!(
                "ground set G1* x G2* has {ground} pairs, at most {MAX_GROUND} supported"
            )));
        }
        let cols = star2.len();
        let conflict = (0..ground)
            .map(|b| {
                let (a, p) = (star1[b / cols], star2[b % cols]);
                let mut mask = 0u64;
                for c in 0..ground {
                    let (a2, p2) = (star1[c / cols], star2[c % cols]);
                    if !g1.has_edge(a, a2) && !g2.has_edge(p, p2) {
                        mask |= 1 << c;
                    }
                }
                mask
            })
            .collect();
        Ok(PowerContext {
            g1,
            u1,
            g2,
            u2,
            k,
            star1,
            star2,
            conflict,
        })
    }

    /// Picks the lowest-index universal vertex on each side.
    pub fn with_auto_universal(g1: Digraph, g2: Digraph, k: usize) -> Result<Self> {
        let pick = |g: &Digraph, name: &str| {
            crate::digraph::universal_vertices(g)
                .first()
                .copied()
                .ok_or_else(|| Error::precondition(format!("{name} has no universal vertex")))
        };
        let (u1, u2) = (pick(&g1, "G1")?, pick(&g2, "G2")?);
        PowerContext::new(g1, u1, g2, u2, k)
    }

    /// The context with the roles of `G1` and `G2` exchanged.
    pub fn swapped(&self) -> PowerContext {
        PowerContext::new(self.g2.clone(), self.u2, self.g1.clone(), self.u1, self.k)
            .expect("validated context stays valid when swapped")
    }

    pub fn g1(&self) -> &Digraph {
        &self.g1
    }

    pub fn g2(&self) -> &Digraph {
        &self.g2
    }

    pub fn u1(&self) -> usize {
        self.u1
    }

    pub fn u2(&self) -> usize {
        self.u2
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn star1(&self) -> &[usize] {
        &self.star1
    }

    pub fn star2(&self) -> &[usize] {
        &self.star2
    }

    /// `|G2*| * k`, the number of coordinates of a power vertex.
    pub fn domain_size(&self) -> usize {
        self.star2.len() * self.k
    }

    pub fn power_size(&self) -> u128 {
        sat_pow(self.g1.len(), self.domain_size())
    }

    pub fn ground_size(&self) -> usize {
        self.star1.len() * self.star2.len()
    }

    /// `comp(G2 - u2) x K`, with `(p, j)` at index `p * k + j`.
    pub fn exponent(&self, cfg: &Config) -> Result<Digraph> {
        let star = star_reduct(&self.g2, self.u2)?;
        product_with(&[&star, &complete_digraph(self.k)], cfg)
    }

    /// The power digraph built directly from the exponential.
    pub fn materialize(&self, cfg: &Config) -> Result<Digraph> {
        check_cap("power vertices", self.power_size(), cfg.materialization_cap)?;
        exponential_with(&self.g1, &self.exponent(cfg)?, cfg)
    }

    /// The map `G2* x K -> G1` behind a power vertex index.
    pub fn power_vertex(&self, index: usize) -> Vec<usize> {
        let mut f = vec![0; self.domain_size()];
        decode(index, &vec![self.g1.len(); f.len()], &mut f);
        f
    }

    fn trace_bits(&self, f: &[usize]) -> u64 {
        let cols = self.star2.len();
        let mut bits = 0u64;
        for (coord, &v) in f.iter().enumerate() {
            if v == self.u1 {
                continue;
            }
            let i1 = if v < self.u1 { v } else { v - 1 };
            let p = coord / self.k;
            bits |= 1 << (i1 * cols + p);
        }
        bits
    }

    pub fn trace_from_bits(&self, bits: u64) -> TraceSet {
        let cols = self.star2.len().max(1);
        let pairs = (0..self.ground_size())
            .filter(|b| bits >> b & 1 == 1)
            .map(|b| (self.star1[b / cols], self.star2[b % cols]))
            .collect();
        TraceSet { bits, pairs }
    }

    pub fn trace_from_pairs(&self, pairs: &[(usize, usize)]) -> Result<TraceSet> {
        let cols = self.star2.len();
        let mut bits = 0u64;
        for &(a, b) in pairs {
            let i1 = self.star1.iter().position(|&v| v == a);
            let i2 = self.star2.iter().position(|&v| v == b);
            match (i1, i2) {
                (Some(i1), Some(i2)) => bits |= 1 << (i1 * cols + i2),
                _ => return Err(Error::input(format!("({a},{b}) is not in G1* x G2*"))),
            }
        }
        Ok(self.trace_from_bits(bits))
    }

    /// The same pairs with coordinates exchanged, in the swapped layout.
    pub fn transpose_bits(&self, bits: u64) -> u64 {
        let (rows, cols) = (self.star1.len(), self.star2.len());
        let mut out = 0u64;
        for i1 in 0..rows {
            for i2 in 0..cols {
                if bits >> (i1 * cols + i2) & 1 == 1 {
                    out |= 1 << (i2 * rows + i1);
                }
            }
        }
        out
    }

    /// Non-edge rule on traces.
    pub fn traces_conflict(&self, u: u64, v: u64) -> bool {
        let mut rest = u;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            if self.conflict[b] & v != 0 {
                return true;
            }
            rest &= rest - 1;
        }
        false
    }

    fn check_vertex(&self, f: &[usize]) -> Result<()> {
        if f.len() != self.domain_size() {
            return Err(Error::input(format!(
                "power vertex has {} coordinates, expected {}",
                f.len(),
                self.domain_size()
            )));
        }
        if let Some(&v) = f.iter().find(|&&v| v >= self.g1.len()) {
            return Err(Error::input(format!("value {v} is not a vertex of G1")));
        }
        Ok(())
    }
}

/// `C(f)`: the pairs `(g1, g2)`, `g1 != u1`, hit by `f(g2, j)` for some `j`.
pub fn trace_set(ctx: &PowerContext, f: &[usize]) -> Result<TraceSet> {
    ctx.check_vertex(f)?;
    Ok(ctx.trace_from_bits(ctx.trace_bits(f)))
}

/// Whether `f -> f'` fails, decided from the traces alone.
pub fn nonedge_by_claim1(ctx: &PowerContext, f: &[usize], f2: &[usize]) -> Result<bool> {
    ctx.check_vertex(f)?;
    ctx.check_vertex(f2)?;
    Ok(ctx.traces_conflict(ctx.trace_bits(f), ctx.trace_bits(f2)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceBlock {
    pub trace: TraceSet,
    /// Power vertex indices, ascending.
    pub members: Vec<usize>,
}

/// Partition of all power vertices by trace, blocks ordered by trace mask.
pub fn trace_blocks(ctx: &PowerContext, cfg: &Config) -> Result<Vec<TraceBlock>> {
    check_cap("power vertices", ctx.power_size(), cfg.materialization_cap)?;
    let n = ctx.power_size() as usize;
    let traces = cfg.exec.map(n, |i| ctx.trace_bits(&ctx.power_vertex(i)));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (traces[i], i));
    let mut blocks: Vec<TraceBlock> = Vec::new();
    for i in order {
        match blocks.last_mut() {
            Some(b) if b.trace.bits == traces[i] => b.members.push(i),
            _ => blocks.push(TraceBlock {
                trace: ctx.trace_from_bits(traces[i]),
                members: vec![i],
            }),
        }
    }
    Ok(blocks)
}

/// Subsets of `G1* x G2*` that occur as traces: every `g2` column holds at
/// most `k` values. Ascending by mask.
pub fn realizable_traces(ctx: &PowerContext, cfg: &Config) -> Result<Vec<TraceSet>> {
    let ground = ctx.ground_size();
    check_cap("trace subsets", 1u128 << ground, cfg.materialization_cap)?;
    let (rows, cols) = (ctx.star1.len(), ctx.star2.len());
    let column_masks: Vec<u64> = (0..cols)
        .map(|p| (0..rows).fold(0u64, |m, i1| m | 1 << (i1 * cols + p)))
        .collect();
    Ok((0..1u64 << ground)
        .filter(|bits| {
            column_masks
                .iter()
                .all(|m| (bits & m).count_ones() as usize <= ctx.k)
        })
        .map(|bits| ctx.trace_from_bits(bits))
        .collect())
}

/// The power modulo trace equality, computed on subsets only.
#[derive(Debug, Clone)]
pub struct TraceQuotient {
    pub traces: Vec<TraceSet>,
    pub digraph: Digraph,
}

impl TraceQuotient {
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.traces.binary_search_by_key(&bits, |t| t.bits).ok()
    }
}

pub fn quotient_power(ctx: &PowerContext, cfg: &Config) -> Result<TraceQuotient> {
    let traces = realizable_traces(ctx, cfg)?;
    let digraph = Digraph::from_fn(traces.len(), cfg, |i, j| {
        !ctx.traces_conflict(traces[i].bits, traces[j].bits)
    })
    .with_labels(traces.iter().map(|t| t.to_string()).collect())?;
    Ok(TraceQuotient { traces, digraph })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim1Report {
    pub power_vertices: usize,
    pub pairs_checked: u64,
    pub disagreements: u64,
    /// Lowest disagreeing ordered pair of power vertices.
    pub first_disagreement: Option<(usize, usize)>,
}

impl Claim1Report {
    pub fn passed(&self) -> bool {
        self.disagreements == 0
    }
}

/// Compares the edge relation of the materialized power with the trace rule
/// on every ordered pair.
pub fn verify_claim1(ctx: &PowerContext, cfg: &Config) -> Result<Claim1Report> {
    let power = ctx.materialize(cfg)?;
    let n = power.len();
    let traces = cfg.exec.map(n, |i| ctx.trace_bits(&ctx.power_vertex(i)));
    let row_bad = |i: usize| -> u64 {
        (0..n)
            .filter(|&j| !power.has_edge(i, j) != ctx.traces_conflict(traces[i], traces[j]))
            .count() as u64
    };
    let disagreements = cfg.exec.sum(n, row_bad);
    let first_disagreement = cfg.exec.find_first(n, |i| {
        (0..n)
            .find(|&j| !power.has_edge(i, j) != ctx.traces_conflict(traces[i], traces[j]))
            .map(|j| (i, j))
    });
    Ok(Claim1Report {
        power_vertices: n,
        pairs_checked: (n as u64) * (n as u64),
        disagreements,
        first_disagreement,
    })
}

#[derive(Debug, Clone)]
pub struct BlockQuotient {
    pub blocks: Vec<TraceBlock>,
    pub digraph: Digraph,
    /// Every pair of blocks is either fully joined or fully disjoint.
    pub well_defined: bool,
}

/// Quotient of the materialized power by trace equality, with edges read off
/// the power itself.
pub fn block_quotient(ctx: &PowerContext, cfg: &Config) -> Result<BlockQuotient> {
    let power = ctx.materialize(cfg)?;
    let blocks = trace_blocks(ctx, cfg)?;
    let m = blocks.len();
    // (any edge, all edges) per ordered block pair
    let stats = cfg.exec.map(m * m, |ij| {
        let (a, b) = (&blocks[ij / m].members, &blocks[ij % m].members);
        let mut any = false;
        let mut all = true;
        for &i in a {
            for &j in b {
                let e = power.has_edge(i, j);
                any |= e;
                all &= e;
            }
        }
        (any, all)
    });
    let well_defined = stats.iter().all(|&(any, all)| any == all);
    let digraph = Digraph::from_fn(m, cfg, |i, j| stats[i * m + j].0);
    Ok(BlockQuotient {
        blocks,
        digraph,
        well_defined,
    })
}

/// Whether the materialized block quotient coincides with
/// [`quotient_power`] under the identity on trace sets.
pub fn block_quotient_agrees(ctx: &PowerContext, cfg: &Config) -> Result<bool> {
    let bq = block_quotient(ctx, cfg)?;
    let q = quotient_power(ctx, cfg)?;
    let same_sets = bq.blocks.len() == q.traces.len()
        && bq
            .blocks
            .iter()
            .zip(&q.traces)
            .all(|(b, t)| b.trace.bits == t.bits);
    Ok(bq.well_defined && same_sets && bq.digraph.same_edges(&q.digraph))
}

/// Smallest `k` at which transposition maps the realizable traces of the
/// context onto those of the swapped context.
pub fn transpose_threshold(g1: &Digraph, u1: usize, g2: &Digraph, u2: usize, cfg: &Config) -> Result<usize> {
    let upper = g1.len().max(g2.len()).max(2) - 1;
    for k in 1..=upper {
        let ctx = PowerContext::new(g1.clone(), u1, g2.clone(), u2, k)?;
        let swapped = ctx.swapped();
        let mut left: Vec<u64> = realizable_traces(&ctx, cfg)?
            .iter()
            .map(|t| ctx.transpose_bits(t.bits))
            .collect();
        left.sort_unstable();
        let right: Vec<u64> = realizable_traces(&swapped, cfg)?.iter().map(|t| t.bits).collect();
        if left == right {
            return Ok(k);
        }
    }
    Ok(upper)
}

#[derive(Debug, Clone)]
pub struct SwapReport {
    pub vertices1: usize,
    pub vertices2: usize,
    pub pairs_checked: u64,
    pub isomorphic: bool,
    /// `mapping[i]`: index in the swapped quotient of the transpose of trace `i`.
    pub mapping: Vec<usize>,
    /// Smallest `k` making transposition a bijection of realizable traces.
    pub transpose_threshold: usize,
    /// `max(|G1*|, |G2*|, 1)`.
    pub expected_threshold: usize,
    /// Agreement of each side's subset quotient with the block quotient of
    /// the materialized power, when both powers are small enough.
    pub block_quotients_agree: Option<bool>,
}

impl SwapReport {
    pub fn passed(&self) -> bool {
        self.isomorphic && self.block_quotients_agree != Some(false)
    }
}

/// Powers at most this large get the materialized block-quotient check.
pub const BLOCK_CHECK_LIMIT: u128 = 4096;

pub fn verify_power_swap(
    g1: &Digraph,
    u1: usize,
    g2: &Digraph,
    u2: usize,
    k: usize,
    cfg: &Config,
) -> Result<SwapReport> {
    let ctx = PowerContext::new(g1.clone(), u1, g2.clone(), u2, k)?;
    let need = ctx.star1.len().max(ctx.star2.len());
    if k < need {
        return Err(Error::input(format!(
            "k = {k} is below max(|G1*|, |G2*|) = {need}; realizable traces differ between the sides"
        )));
    }
    let swapped = ctx.swapped();
    let q1 = quotient_power(&ctx, cfg)?;
    let q2 = quotient_power(&swapped, cfg)?;

    let mapping: Option<Vec<usize>> = q1
        .traces
        .iter()
        .map(|t| q2.index_of(ctx.transpose_bits(t.bits)))
        .collect();
    let n = q1.traces.len();
    let (isomorphic, mapping) = match mapping {
        Some(m) if q2.traces.len() == n => {
            let ok = is_isomorphism(&q1.digraph, &q2.digraph, &m);
            (ok, m)
        }
        _ => (false, Vec::new()),
    };

    let block_quotients_agree = if ctx.power_size() <= BLOCK_CHECK_LIMIT
        && swapped.power_size() <= BLOCK_CHECK_LIMIT
    {
        Some(block_quotient_agrees(&ctx, cfg)? && block_quotient_agrees(&swapped, cfg)?)
    } else {
        None
    };

    Ok(SwapReport {
        vertices1: n,
        vertices2: q2.traces.len(),
        pairs_checked: (n as u64) * (n as u64),
        isomorphic,
        mapping,
        transpose_threshold: transpose_threshold(g1, u1, g2, u2, cfg)?,
        expected_threshold: need.max(1),
        block_quotients_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Digraph {
        Digraph::from_edges(
            3,
            &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)],
        )
        .unwrap()
    }

    fn ctx(k: usize) -> PowerContext {
        PowerContext::new(path3(), 1, path3(), 1, k).unwrap()
    }

    #[test]
    fn context_validation() {
        assert!(matches!(
            PowerContext::new(path3(), 0, path3(), 1, 2),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            PowerContext::new(path3(), 1, path3(), 1, 0),
            Err(Error::Input(_))
        ));
        let c = PowerContext::with_auto_universal(path3(), path3(), 2).unwrap();
        assert_eq!((c.u1(), c.u2()), (1, 1));
    }

    #[test]
    fn constant_u1_has_empty_trace() {
        let c = ctx(2);
        let t = trace_set(&c, &[1, 1, 1, 1]).unwrap();
        assert!(t.pairs.is_empty());
    }

    #[test]
    fn constant_g1_covers_its_row() {
        let c = ctx(2);
        let t = trace_set(&c, &[2, 2, 2, 2]).unwrap();
        assert_eq!(t.pairs, vec![(2, 0), (2, 2)]);
        assert!(trace_set(&c, &[2, 2, 2]).is_err());
        assert!(trace_set(&c, &[2, 2, 2, 3]).is_err());
    }

    #[test]
    fn claim1_pointwise_example() {
        // k = 1: coordinates are (g2 = 0), (g2 = 2)
        let c = ctx(1);
        let f = [0, 1]; // trace {(0,0)}
        let f2 = [1, 2]; // trace {(2,2)}
        assert_eq!(trace_set(&c, &f).unwrap().pairs, vec![(0, 0)]);
        assert_eq!(trace_set(&c, &f2).unwrap().pairs, vec![(2, 2)]);
        assert!(nonedge_by_claim1(&c, &f, &f2).unwrap());
        assert!(!nonedge_by_claim1(&c, &[1, 1], &f2).unwrap());
    }

    #[test]
    fn realizable_counts() {
        let cfg = Config::default();
        assert_eq!(realizable_traces(&ctx(2), &cfg).unwrap().len(), 16);
        assert_eq!(realizable_traces(&ctx(1), &cfg).unwrap().len(), 9);
        let one = crate::digraph::complete_digraph(1);
        let c = PowerContext::new(one, 0, path3(), 1, 2).unwrap();
        let r = realizable_traces(&c, &cfg).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pairs.is_empty());
    }

    #[test]
    fn blocks_of_path3() {
        let cfg = Config::default();
        let blocks = trace_blocks(&ctx(2), &cfg).unwrap();
        assert_eq!(blocks.len(), 16);
        assert_eq!(blocks[0].trace.bits, 0);
        assert_eq!(blocks[0].members.len(), 1);
        assert_eq!(blocks.iter().map(|b| b.members.len()).sum::<usize>(), 81);
    }

    #[test]
    fn quotient_path3() {
        let cfg = Config::default();
        let c = ctx(2);
        let q = quotient_power(&c, &cfg).unwrap();
        assert_eq!(q.digraph.len(), 16);
        let empty = q.index_of(0).unwrap();
        for i in 0..16 {
            assert!(q.digraph.has_edge(empty, i) && q.digraph.has_edge(i, empty));
        }
        let a = q.index_of(c.trace_from_pairs(&[(0, 0)]).unwrap().bits).unwrap();
        let b = q.index_of(c.trace_from_pairs(&[(2, 2)]).unwrap().bits).unwrap();
        assert!(!q.digraph.has_edge(a, b) && !q.digraph.has_edge(b, a));
        assert!(block_quotient_agrees(&c, &cfg).unwrap());
    }

    #[test]
    fn claim1_on_path3() {
        let r = verify_claim1(&ctx(2), &Config::default()).unwrap();
        assert_eq!(r.power_vertices, 81);
        assert_eq!(r.pairs_checked, 6561);
        assert!(r.passed());
    }

    #[test]
    fn swap_path3() {
        let r = verify_power_swap(&path3(), 1, &path3(), 1, 2, &Config::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.vertices1, 16);
        assert_eq!(r.pairs_checked, 256);
        assert_eq!(r.transpose_threshold, 2);
        assert_eq!(r.block_quotients_agree, Some(true));
        assert!(matches!(
            verify_power_swap(&path3(), 1, &path3(), 1, 1, &Config::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn transpose_round_trip() {
        let c = ctx(2);
        let s = c.swapped();
        for bits in 0..16u64 {
            assert_eq!(s.transpose_bits(c.transpose_bits(bits)), bits);
        }
    }
}
