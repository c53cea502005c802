//! Finite digraphs and the digraph calculus: complement, vertex deletion,
//! universal vertices, products, exponentials, components.
//!
//! Vertices are `0..n`. Edges live in a dense bit matrix, one row per source
//! vertex. Product vertices are tuples indexed row-major (first coordinate
//! most significant); exponential vertices are functions `H -> G` indexed
//! lexicographically, i.e. as base-`|G|` numerals whose most significant
//! digit is the value at vertex `0` of `H`.

use std::fmt;

use crate::error::{check_cap, sat_pow};
use crate::{Config, Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PropertyFlags {
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    pub complete: bool,
}

/// Weakly connected components, ordered by their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn stride_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

impl Digraph {
    /// `n` vertices, no edges.
    pub fn empty(n: usize) -> Self {
        let stride = stride_for(n);
        Digraph {
            n,
            stride,
            bits: vec![0; n * stride],
            labels: None,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut d = Digraph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            d.set_edge(u, v);
        }
        Ok(d)
    }

    /// Builds a digraph row by row: `row(i, words)` sets the out-neighbour
    /// bits of vertex `i` in a zeroed bit row.
    pub(crate) fn from_rows<F>(n: usize, cfg: &Config, row: F) -> Self
    where
        F: Fn(usize, &mut [u64]) + Sync + Send,
    {
        let mut d = Digraph::empty(n);
        let stride = d.stride;
        cfg.exec.for_each_chunk(&mut d.bits, stride, row);
        d
    }

    /// Builds a digraph from an edge predicate evaluated on all ordered pairs.
    pub fn from_fn<F>(n: usize, cfg: &Config, edge: F) -> Self
    where
        F: Fn(usize, usize) -> bool + Sync + Send,
    {
        Digraph::from_rows(n, cfg, |i, words| {
            for j in 0..n {
                if edge(i, j) {
                    words[j / WORD] |= 1 << (j % WORD);
                }
            }
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.n && v < self.n);
        self.bits[u * self.stride + v / WORD] >> (v % WORD) & 1 == 1
    }

    #[inline]
    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        self.bits[u * self.stride + v / WORD] |= 1 << (v % WORD);
    }

    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.stride..(u + 1) * self.stride]
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.out_neighbors(u).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn out_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(u))
    }

    pub fn in_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(u, v))
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label of a vertex; the decimal index when unlabeled.
    pub fn label(&self, u: usize) -> String {
        match &self.labels {
            Some(l) => l[u].clone(),
            None => u.to_string(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::input(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    /// Edge relations equal, labels ignored.
    pub fn same_edges(&self, other: &Digraph) -> bool {
        self.n == other.n && self.bits == other.bits
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            }
        })
    })
}

pub fn complete_digraph(n: usize) -> Digraph {
    let mut d = Digraph::empty(n);
    for u in 0..n {
        for v in 0..n {
            d.set_edge(u, v);
        }
    }
    d
}

/// Loops only. Finite stand-in for infinite equality digraphs.
pub fn equality_digraph(n: usize) -> Digraph {
    let mut d = Digraph::empty(n);
    for u in 0..n {
        d.set_edge(u, u);
    }
    d
}

pub fn classify(d: &Digraph) -> PropertyFlags {
    let n = d.len();
    let reflexive = (0..n).all(|u| d.has_edge(u, u));
    let symmetric = d.edges().all(|(u, v)| d.has_edge(v, u));
    // u -> v implies row(u) contains row(v)
    let transitive = d.edges().all(|(u, v)| {
        d.row(u)
            .iter()
            .zip(d.row(v))
            .all(|(&ru, &rv)| rv & !ru == 0)
    });
    let complete = d.edge_count() == n * n;
    PropertyFlags {
        reflexive,
        symmetric,
        transitive,
        complete,
    }
}

pub fn complement(d: &Digraph) -> Digraph {
    let n = d.len();
    let mut out = Digraph::empty(n);
    for u in 0..n {
        for v in 0..n {
            if !d.has_edge(u, v) {
                out.set_edge(u, v);
            }
        }
    }
    out.labels = d.labels.clone();
    out
}

pub fn delete_vertex(d: &Digraph, u: usize) -> Result<Digraph> {
    if u >= d.len() {
        return Err(Error::input(format!(
            "vertex {u} out of range for a digraph on {} vertices",
            d.len()
        )));
    }
    let keep: Vec<usize> = (0..d.len()).filter(|&v| v != u).collect();
    induced(d, &keep)
}

/// Vertices adjacent in both directions to every vertex, themselves included.
pub fn universal_vertices(d: &Digraph) -> Vec<usize> {
    (0..d.len())
        .filter(|&u| (0..d.len()).all(|g| d.has_edge(u, g) && d.has_edge(g, u)))
        .collect()
}

pub fn is_universal(d: &Digraph, u: usize) -> bool {
    u < d.len() && (0..d.len()).all(|g| d.has_edge(u, g) && d.has_edge(g, u))
}

/// The complement of `d - u` for a universal vertex `u`.
pub fn star_reduct(d: &Digraph, u: usize) -> Result<Digraph> {
    if u >= d.len() {
        return Err(Error::input(format!("vertex {u} out of range")));
    }
    if !is_universal(d, u) {
        return Err(Error::precondition(format!("vertex {u} is not universal")));
    }
    Ok(complement(&delete_vertex(d, u)?))
}

/// Subdigraph on `vertices`, reindexed in the order given.
///
/// Callers pass sorted vertex lists when an order-preserving reindexing is
/// wanted.
pub fn induced(d: &Digraph, vertices: &[usize]) -> Result<Digraph> {
    if let Some(&bad) = vertices.iter().find(|&&v| v >= d.len()) {
        return Err(Error::input(format!(
            "vertex {bad} out of range for a digraph on {} vertices",
            d.len()
        )));
    }
    let m = vertices.len();
    let mut out = Digraph::empty(m);
    for (i, &u) in vertices.iter().enumerate() {
        for (j, &v) in vertices.iter().enumerate() {
            if d.has_edge(u, v) {
                out.set_edge(i, j);
            }
        }
    }
    if let Some(l) = &d.labels {
        out.labels = Some(vertices.iter().map(|&v| l[v].clone()).collect());
    }
    Ok(out)
}

/// Mixed-radix helpers. Digit 0 is the most significant.
pub(crate) fn decode(mut index: usize, radices: &[usize], out: &mut [usize]) {
    for p in (0..radices.len()).rev() {
        out[p] = index % radices[p];
        index /= radices[p];
    }
}

pub(crate) fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Calls `visit` with every tuple in `choices[0] x choices[1] x ...`, in
/// lexicographic order of positions within each choice list.
pub(crate) fn for_each_tuple(choices: &[Vec<usize>], mut visit: impl FnMut(&[usize])) {
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    let m = choices.len();
    let mut pos = vec![0usize; m];
    let mut tuple: Vec<usize> = choices.iter().map(|c| c[0]).collect();
    loop {
        visit(&tuple);
        let mut p = m;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            pos[p] += 1;
            if pos[p] < choices[p].len() {
                tuple[p] = choices[p][pos[p]];
                break;
            }
            pos[p] = 0;
            tuple[p] = choices[p][0];
        }
    }
}

pub fn product(ds: &[&Digraph]) -> Result<Digraph> {
    product_with(ds, &Config::default())
}

/// Direct product; tuples indexed row-major.
pub fn product_with(ds: &[&Digraph], cfg: &Config) -> Result<Digraph> {
    if ds.is_empty() {
        return Err(Error::input("product of an empty list of digraphs"));
    }
    let radices: Vec<usize> = ds.iter().map(|d| d.len()).collect();
    let size = radices
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128));
    check_cap("product vertices", size, cfg.materialization_cap)?;
    let n = size as usize;
    let out_lists: Vec<Vec<Vec<usize>>> = ds
        .iter()
        .map(|d| (0..d.len()).map(|u| d.out_neighbors(u).collect()).collect())
        .collect();
    let mut out = Digraph::from_rows(n, cfg, |i, words| {
        let mut digits = vec![0; radices.len()];
        decode(i, &radices, &mut digits);
        let choices: Vec<Vec<usize>> = digits
            .iter()
            .enumerate()
            .map(|(c, &h)| out_lists[c][h].clone())
            .collect();
        for_each_tuple(&choices, |t| {
            let j = encode(t, &radices);
            words[j / WORD] |= 1 << (j % WORD);
        });
    });
    if ds.iter().all(|d| d.labels.is_some()) {
        let mut digits = vec![0; radices.len()];
        let labels = (0..n)
            .map(|i| {
                decode(i, &radices, &mut digits);
                let parts: Vec<String> = digits
                    .iter()
                    .enumerate()
                    .map(|(c, &h)| ds[c].label(h))
                    .collect();
                format!("({})", parts.join(","))
            })
            .collect();
        out.labels = Some(labels);
    }
    Ok(out)
}

pub fn exponential(g: &Digraph, h: &Digraph) -> Result<Digraph> {
    exponential_with(g, h, &Config::default())
}

/// `G^H`: all maps `H -> G`, with `f -> f'` iff `f(x) -> f'(y)` in `G` for
/// every edge `x -> y` of `H`.
///
/// Row `f` is produced output-sensitively: position `y` of an out-neighbour
/// may take any value in the intersection of the out-neighbourhoods of
/// `f(x)` over the in-neighbours `x` of `y`.
pub fn exponential_with(g: &Digraph, h: &Digraph, cfg: &Config) -> Result<Digraph> {
    let size = sat_pow(g.len(), h.len());
    check_cap("exponential vertices", size, cfg.materialization_cap)?;
    let n = size as usize;
    let m = h.len();
    let radices = vec![g.len(); m];
    let preds: Vec<Vec<usize>> = (0..m).map(|y| h.in_neighbors(y).collect()).collect();
    let all: Vec<usize> = (0..g.len()).collect();
    Ok(Digraph::from_rows(n, cfg, |i, words| {
        let mut f = vec![0; m];
        decode(i, &radices, &mut f);
        let choices: Vec<Vec<usize>> = preds
            .iter()
            .map(|xs| {
                if xs.is_empty() {
                    return all.clone();
                }
                let mut acc = g.row(f[xs[0]]).to_vec();
                for &x in &xs[1..] {
                    for (a, b) in acc.iter_mut().zip(g.row(f[x])) {
                        *a &= b;
                    }
                }
                iter_bits(&acc).collect()
            })
            .collect();
        for_each_tuple(&choices, |t| {
            let j = encode(t, &radices);
            words[j / WORD] |= 1 << (j % WORD);
        });
    }))
}

/// Decodes a vertex of `G^H` into the function it stands for.
pub fn function_of(index: usize, base: usize, exponent: usize) -> Vec<usize> {
    let mut f = vec![0; exponent];
    decode(index, &vec![base; exponent], &mut f);
    f
}

/// Index of the function `f` as a vertex of `G^H` with `|G| = base`.
pub fn index_of_function(f: &[usize], base: usize) -> usize {
    encode(f, &vec![base; f.len()])
}

pub fn components(d: &Digraph) -> ComponentPartition {
    let n = d.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v) in d.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            // keep the smaller root so roots are block minima
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_block = vec![usize::MAX; n];
    for (v, slot) in block_of.iter_mut().enumerate() {
        let r = find(&mut parent, v);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        *slot = root_block[r];
        blocks[root_block[r]].push(v);
    }
    ComponentPartition { blocks, block_of }
}

/// Disjoint union; vertices of `ds[0]` first.
pub fn disjoint_union(ds: &[&Digraph]) -> Digraph {
    let n: usize = ds.iter().map(|d| d.len()).sum();
    let mut out = Digraph::empty(n);
    let mut offset = 0;
    for d in ds {
        for (u, v) in d.edges() {
            out.set_edge(offset + u, offset + v);
        }
        offset += d.len();
    }
    if ds.iter().all(|d| d.labels.is_some()) {
        out.labels = Some(ds.iter().flat_map(|d| d.labels.clone().unwrap()).collect());
    }
    out
}

/// Relabels vertex `i` as `perm[i]`.
pub fn permute(d: &Digraph, perm: &[usize]) -> Result<Digraph> {
    let n = d.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::input("not a permutation of the vertex set"));
    }
    let mut out = Digraph::empty(n);
    for (u, v) in d.edges() {
        out.set_edge(perm[u], perm[v]);
    }
    if let Some(l) = &d.labels {
        let mut nl = vec![String::new(); n];
        for (i, &p) in perm.iter().enumerate() {
            nl[p] = l[i].clone();
        }
        out.labels = Some(nl);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2() -> Digraph {
        Digraph::from_edges(2, &[(0, 0), (1, 1), (0, 1)]).unwrap()
    }

    fn path3() -> Digraph {
        Digraph::from_edges(
            3,
            &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)],
        )
        .unwrap()
    }

    fn flags(r: bool, s: bool, t: bool, c: bool) -> PropertyFlags {
        PropertyFlags {
            reflexive: r,
            symmetric: s,
            transitive: t,
            complete: c,
        }
    }

    #[test]
    fn build_rejects_out_of_range() {
        let err = Digraph::from_edges(2, &[(0, 2)]).unwrap_err();
        assert!(err.to_string().contains("(0, 2)"));
        assert!(Digraph::from_edges(0, &[]).unwrap().is_empty());
        // duplicates are fine
        let d = Digraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(d.edge_count(), 1);
    }

    #[test]
    fn classify_fixtures() {
        assert_eq!(classify(&chain2()), flags(true, false, true, false));
        assert_eq!(classify(&path3()), flags(true, true, false, false));
        assert_eq!(classify(&complete_digraph(3)), flags(true, true, true, true));
        assert_eq!(classify(&complete_digraph(2)), flags(true, true, true, true));
        assert_eq!(classify(&equality_digraph(3)), flags(true, true, true, false));
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&complete_digraph(2)).edge_count(), 0);
        assert_eq!(complement(&complement(&path3())), path3());
        assert_eq!(complement(&chain2()).edges().collect::<Vec<_>>(), vec![(1, 0)]);
    }

    #[test]
    fn delete_vertex_examples() {
        assert_eq!(delete_vertex(&path3(), 1).unwrap(), equality_digraph(2));
        assert_eq!(delete_vertex(&chain2(), 1).unwrap(), equality_digraph(1));
        assert_eq!(
            delete_vertex(&complete_digraph(3), 0).unwrap(),
            complete_digraph(2)
        );
        assert!(matches!(delete_vertex(&chain2(), 2), Err(Error::Input(_))));
    }

    #[test]
    fn universal_examples() {
        assert_eq!(universal_vertices(&path3()), vec![1]);
        assert_eq!(universal_vertices(&complete_digraph(3)), vec![0, 1, 2]);
        assert!(universal_vertices(&chain2()).is_empty());
    }

    #[test]
    fn star_reduct_examples() {
        let s = star_reduct(&path3(), 1).unwrap();
        assert_eq!(s.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        let s = star_reduct(&complete_digraph(2), 0).unwrap();
        assert_eq!(s, Digraph::empty(1));
        assert!(matches!(star_reduct(&path3(), 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn product_examples() {
        let p = product(&[&path3(), &path3()]).unwrap();
        assert_eq!(universal_vertices(&p), vec![4]); // (1,1) row-major
        let c = product(&[&chain2(), &chain2()]).unwrap();
        assert_eq!(c.len(), 4);
        // oracle: enumerate all 16 pairs of tuples
        let ch = chain2();
        let mut expected = 0;
        for a in 0..4 {
            for b in 0..4 {
                let ok = ch.has_edge(a / 2, b / 2) && ch.has_edge(a % 2, b % 2);
                assert_eq!(c.has_edge(a, b), ok);
                expected += ok as usize;
            }
        }
        assert_eq!(expected, 9);
        assert_eq!(c.edge_count(), 9);
        assert_eq!(product(&[&path3()]).unwrap(), path3());
        assert!(product(&[]).is_err());
    }

    #[test]
    fn exponential_small_cases() {
        let g = path3();
        let loop1 = equality_digraph(1);
        let bare1 = Digraph::empty(1);
        assert_eq!(exponential(&g, &loop1).unwrap(), g);
        assert_eq!(exponential(&g, &bare1).unwrap(), complete_digraph(3));
        assert_eq!(exponential(&chain2(), &path3()).unwrap().len(), 8);
        // empty exponent: one function, vacuous edge condition
        assert_eq!(exponential(&g, &Digraph::empty(0)).unwrap(), complete_digraph(1));
    }

    #[test]
    fn exponential_matches_definition() {
        let g = chain2();
        let h = path3();
        let e = exponential(&g, &h).unwrap();
        for a in 0..e.len() {
            for b in 0..e.len() {
                let f = function_of(a, 2, 3);
                let f2 = function_of(b, 2, 3);
                let direct = h.edges().all(|(x, y)| g.has_edge(f[x], f2[y]));
                assert_eq!(e.has_edge(a, b), direct);
            }
        }
    }

    #[test]
    fn exponential_cap() {
        let cfg = Config {
            materialization_cap: 10,
            ..Config::default()
        };
        match exponential_with(&path3(), &path3(), &cfg) {
            Err(Error::Resource { required, .. }) => assert_eq!(required, 27),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn components_examples() {
        assert_eq!(components(&chain2()).blocks, vec![vec![0, 1]]);
        assert_eq!(components(&equality_digraph(4)).len(), 4);
        let p = product(&[&complete_digraph(2), &equality_digraph(2)]).unwrap();
        let parts = components(&p);
        assert_eq!(parts.blocks, vec![vec![0, 2], vec![1, 3]]);
        for b in &parts.blocks {
            assert_eq!(induced(&p, b).unwrap(), complete_digraph(2));
        }
    }

    #[test]
    fn induced_examples() {
        let d = induced(&path3(), &[0, 1]).unwrap();
        assert_eq!(d, complete_digraph(2));
        assert_eq!(induced(&path3(), &[0, 1, 2]).unwrap(), path3());
        assert!(induced(&path3(), &[]).unwrap().is_empty());
        assert!(induced(&path3(), &[3]).is_err());
    }

    #[test]
    fn labels_follow_operations() {
        let d = chain2()
            .with_labels(vec!["a".into(), "b".into()])
            .unwrap();
        assert_eq!(complement(&d).labels().unwrap(), ["a", "b"]);
        assert_eq!(delete_vertex(&d, 0).unwrap().label(0), "b");
        let p = product(&[&d, &d]).unwrap();
        assert_eq!(p.label(1), "(a,b)");
        assert!(chain2().with_labels(vec![]).is_err());
    }

    #[test]
    fn permute_relabels() {
        let d = permute(&path3(), &[2, 1, 0]).unwrap();
        assert_eq!(d, path3());
        let d = permute(&chain2(), &[1, 0]).unwrap();
        assert!(d.has_edge(1, 0) && !d.has_edge(0, 1));
        assert!(permute(&chain2(), &[0, 0]).is_err());
    }
}
