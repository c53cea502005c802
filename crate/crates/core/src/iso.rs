//! Digraph isomorphism by colour refinement and individualization.
//!
//! Both digraphs are refined together on a shared colour space, so a colour
//! means the same thing on either side. A search node individualizes the
//! lowest vertex of the first smallest non-singleton cell on the left and
//! tries every right vertex of that cell in ascending order. Each node first
//! tries the order-preserving matching inside every cell, which settles
//! highly symmetric inputs (complete digraphs, identical labelings) without
//! branching. Every candidate mapping is verified edge by edge before it is
//! returned.

use crate::Digraph;

/// Vertex bijection `mapping[i]` from the first digraph to the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    pub mapping: Vec<usize>,
}

/// Exact check of the witness invariant over all ordered pairs.
pub fn is_isomorphism(d1: &Digraph, d2: &Digraph, mapping: &[usize]) -> bool {
    let n = d1.len();
    if d2.len() != n || mapping.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &m in mapping {
        if m >= n || seen[m] {
            return false;
        }
        seen[m] = true;
    }
    (0..n).all(|i| (0..n).all(|j| d1.has_edge(i, j) == d2.has_edge(mapping[i], mapping[j])))
}

pub fn are_isomorphic(d1: &Digraph, d2: &Digraph) -> Option<IsoWitness> {
    let n = d1.len();
    if d2.len() != n || d1.edge_count() != d2.edge_count() {
        return None;
    }
    if n == 0 {
        return Some(IsoWitness {
            mapping: Vec::new(),
        });
    }
    let search = Search::new(d1, d2);
    let colors = search.initial_colors();
    let colors = search.refine(colors)?;
    search.solve(colors).map(|mapping| IsoWitness { mapping })
}

struct Search<'a> {
    d1: &'a Digraph,
    d2: &'a Digraph,
    n: usize,
    /// Out and in lists over the combined vertex space `0..2n`.
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(d1: &'a Digraph, d2: &'a Digraph) -> Self {
        let n = d1.len();
        let mut out = vec![Vec::new(); 2 * n];
        let mut inc = vec![Vec::new(); 2 * n];
        for (side, d) in [d1, d2].into_iter().enumerate() {
            let off = side * n;
            for (u, v) in d.edges() {
                out[off + u].push(off + v);
                inc[off + v].push(off + u);
            }
        }
        Search {
            d1,
            d2,
            n,
            out,
            inc,
        }
    }

    fn initial_colors(&self) -> Vec<u32> {
        let sig: Vec<(bool, usize, usize)> = (0..2 * self.n)
            .map(|v| {
                let (d, u) = if v < self.n {
                    (self.d1, v)
                } else {
                    (self.d2, v - self.n)
                };
                (d.has_edge(u, u), self.out[v].len(), self.inc[v].len())
            })
            .collect();
        rank(&sig)
    }

    /// Refines to the coarsest equitable colouring. `None` when the two sides
    /// end up with different colour-class sizes.
    fn refine(&self, mut colors: Vec<u32>) -> Option<Vec<u32>> {
        let mut classes = count_classes(&colors);
        loop {
            let sig: Vec<(u32, Vec<u32>, Vec<u32>)> = (0..2 * self.n)
                .map(|v| {
                    let mut o: Vec<u32> = self.out[v].iter().map(|&w| colors[w]).collect();
                    let mut i: Vec<u32> = self.inc[v].iter().map(|&w| colors[w]).collect();
                    o.sort_unstable();
                    i.sort_unstable();
                    (colors[v], o, i)
                })
                .collect();
            let next = rank(&sig);
            let next_classes = count_classes(&next);
            colors = next;
            if !self.balanced(&colors) {
                return None;
            }
            if next_classes == classes {
                return Some(colors);
            }
            classes = next_classes;
        }
    }

    fn balanced(&self, colors: &[u32]) -> bool {
        let k = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut diff = vec![0i64; k];
        for (v, &c) in colors.iter().enumerate() {
            diff[c as usize] += if v < self.n { 1 } else { -1 };
        }
        diff.iter().all(|&x| x == 0)
    }

    /// Pairs the i-th left vertex of every cell with the i-th right vertex.
    fn cellwise_matching(&self, colors: &[u32]) -> Vec<usize> {
        let k = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut right: Vec<Vec<usize>> = vec![Vec::new(); k];
        for v in self.n..2 * self.n {
            right[colors[v] as usize].push(v - self.n);
        }
        let mut next = vec![0usize; k];
        (0..self.n)
            .map(|v| {
                let c = colors[v] as usize;
                let w = right[c][next[c]];
                next[c] += 1;
                w
            })
            .collect()
    }

    fn solve(&self, colors: Vec<u32>) -> Option<Vec<usize>> {
        let guess = self.cellwise_matching(&colors);
        if is_isomorphism(self.d1, self.d2, &guess) {
            return Some(guess);
        }
        let k = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut sizes = vec![0usize; k];
        for &c in &colors[..self.n] {
            sizes[c as usize] += 1;
        }
        // discrete partition that is not an isomorphism: dead end
        let target = (0..k)
            .filter(|&c| sizes[c] > 1)
            .min_by_key(|&c| (sizes[c], c))?;
        let v = (0..self.n).find(|&v| colors[v] as usize == target)?;
        let fresh = k as u32;
        for w in (self.n..2 * self.n).filter(|&w| colors[w] as usize == target) {
            let mut next = colors.clone();
            next[v] = fresh;
            next[w] = fresh;
            if let Some(refined) = self.refine(next) {
                if let Some(m) = self.solve(refined) {
                    return Some(m);
                }
            }
        }
        None
    }
}

/// Dense ranks of the signatures, ordered by signature value.
fn rank<T: Ord + Clone>(sig: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sig.to_vec();
    sorted.sort();
    sorted.dedup();
    sig.iter()
        .map(|s| sorted.binary_search(s).unwrap() as u32)
        .collect()
}

fn count_classes(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}
