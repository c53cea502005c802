//! The `G0 -> G1 -> G2 -> G3` construction pipeline and Maltsev obstructions.
//!
//! * `G1` lives on 4-tuples `(a,b,c,d)` of a reflexive `G0` with
//!   `a -> b,c,d`, `b -> c,d`, `c -> d`; `(a,b,c,d) -> (a,b',c',d)` when
//!   `b -> c'` and `b' -> c`.
//! * `G2` lives on maps `f: {0} + R -> G1` (`R` a non-complete component of
//!   `G1`) with `f(0) <-> f(x)` for all `x`; `f -> f'` when `f(0) -> f'(0)`
//!   and `f`, `f'` agree on `R`.
//! * `G3` is the part of `G2^X` whose maps have range inside one component.
//!
//! `G2` grows as `|G1|^(|R|+1)`, so [`verify_chain`] works from a summary:
//! the component of `f` has vertex set `{g : g <-> t for all t in f(R)}`, so
//! `G2` is a disjoint union of subgraphs of `G1` induced by common
//! bi-neighbourhoods `S_T` of sets `T`, each occurring once per surjection
//! from `R` onto `T`. When `G2` is small enough it is also materialized and
//! compared against the summary.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::digraph::{
    classify, complete_digraph, components, equality_digraph, exponential_with, for_each_tuple,
    function_of, index_of_function, induced, is_universal, iter_bits, product_with,
    universal_vertices,
};
use crate::error::{check_cap, sat_pow};
use crate::iso::{are_isomorphic, is_isomorphism};
use crate::{Config, Digraph, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TupleVertex {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl fmt::Display for TupleVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

#[derive(Debug, Clone)]
pub struct G1 {
    pub digraph: Digraph,
    pub tuples: Vec<TupleVertex>,
}

impl G1 {
    pub fn index_of(&self, t: TupleVertex) -> Option<usize> {
        self.tuples.binary_search(&t).ok()
    }
}

pub fn construct_g1(g0: &Digraph) -> Result<G1> {
    if !classify(g0).reflexive {
        return Err(Error::input("G0 must be reflexive"));
    }
    let n = g0.len();
    let e = |x: usize, y: usize| g0.has_edge(x, y);
    let mut tuples = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if e(a, b) && e(a, c) && e(a, d) && e(b, c) && e(b, d) && e(c, d) {
                        tuples.push(TupleVertex { a, b, c, d });
                    }
                }
            }
        }
    }
    let mut digraph = Digraph::empty(tuples.len());
    for (i, s) in tuples.iter().enumerate() {
        for (j, t) in tuples.iter().enumerate() {
            if s.a == t.a && s.d == t.d && e(s.b, t.c) && e(t.b, s.c) {
                digraph.set_edge(i, j);
            }
        }
    }
    let digraph = digraph.with_labels(tuples.iter().map(|t| t.to_string()).collect())?;
    Ok(G1 { digraph, tuples })
}

/// A vertex of `G2`: `values[0] = f(0)`, `values[1 + i] = f(R[i])`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct G2Vertex {
    pub values: Vec<usize>,
}

impl G2Vertex {
    pub fn at_zero(&self) -> usize {
        self.values[0]
    }

    pub fn on_r(&self) -> &[usize] {
        &self.values[1..]
    }
}

impl fmt::Display for G2Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rest: Vec<String> = self.on_r().iter().map(|v| v.to_string()).collect();
        write!(f, "{}|{}", self.values[0], rest.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct G2 {
    pub digraph: Digraph,
    pub vertices: Vec<G2Vertex>,
    /// Vertices of `G1` forming `R`, ascending.
    pub r: Vec<usize>,
}

fn bi_neighbors(d: &Digraph, g: usize) -> Vec<usize> {
    (0..d.len())
        .filter(|&h| d.has_edge(g, h) && d.has_edge(h, g))
        .collect()
}

/// Exact vertex count of `G2` for the component `r`.
pub fn g2_size(g1: &Digraph, r: &[usize]) -> u128 {
    (0..g1.len())
        .map(|g| sat_pow(bi_neighbors(g1, g).len(), r.len()))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn noncomplete_component(g1: &Digraph, r: usize) -> Result<Vec<usize>> {
    let parts = components(g1);
    let block = parts.blocks.get(r).ok_or_else(|| {
        Error::precondition(format!("G1 has {} components, no index {r}", parts.len()))
    })?;
    if classify(&induced(g1, block)?).complete {
        return Err(Error::precondition(format!("component {r} of G1 is complete")));
    }
    Ok(block.clone())
}

/// Materializes `G2` for the `r`-th component of `G1`.
pub fn construct_g2(g1: &Digraph, r: usize, cfg: &Config) -> Result<G2> {
    let rset = noncomplete_component(g1, r)?;
    check_cap("G2 vertices", g2_size(g1, &rset), cfg.materialization_cap)?;
    let mut vertices = Vec::new();
    for g in 0..g1.len() {
        let nb = bi_neighbors(g1, g);
        let choices = vec![nb; rset.len()];
        for_each_tuple(&choices, |t| {
            let mut values = Vec::with_capacity(t.len() + 1);
            values.push(g);
            values.extend_from_slice(t);
            vertices.push(G2Vertex { values });
        });
    }
    let mut by_tail: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        by_tail.entry(v.on_r()).or_default().push(i);
    }
    let mut digraph = Digraph::empty(vertices.len());
    for group in by_tail.values() {
        for &i in group {
            for &j in group {
                if g1.has_edge(vertices[i].at_zero(), vertices[j].at_zero()) {
                    digraph.set_edge(i, j);
                }
            }
        }
    }
    let digraph = digraph.with_labels(vertices.iter().map(|v| v.to_string()).collect())?;
    Ok(G2 {
        digraph,
        vertices,
        r: rset,
    })
}

#[derive(Debug, Clone)]
pub struct G3 {
    pub digraph: Digraph,
    /// `functions[i]` is the map `X -> G2` behind vertex `i`.
    pub functions: Vec<Vec<usize>>,
}

/// Subdigraph of `G2^X` on the maps whose range lies in one component of `G2`.
///
/// Requires a universal vertex in every component of `G2` and at least one
/// edge in `X`.
pub fn construct_g3(g2: &Digraph, x: &Digraph, cfg: &Config) -> Result<G3> {
    if x.edge_count() == 0 {
        return Err(Error::precondition("X has no edges"));
    }
    let parts = components(g2);
    for (i, block) in parts.blocks.iter().enumerate() {
        if universal_vertices(&induced(g2, block)?).is_empty() {
            return Err(Error::precondition(format!(
                "component {i} of G2 has no universal vertex"
            )));
        }
    }
    let m = x.len();
    let size = parts
        .blocks
        .iter()
        .map(|b| sat_pow(b.len(), m))
        .fold(0u128, |a, b| a.saturating_add(b));
    check_cap("G3 vertices", size, cfg.materialization_cap)?;

    let mut functions = Vec::with_capacity(size as usize);
    for block in &parts.blocks {
        for_each_tuple(&vec![block.clone(); m], |t| functions.push(t.to_vec()));
    }
    functions.sort();
    let index: HashMap<&[usize], usize> = functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_slice(), i))
        .collect();
    let preds: Vec<Vec<usize>> = (0..m).map(|y| x.in_neighbors(y).collect()).collect();
    let n = functions.len();
    let digraph = Digraph::from_rows(n, cfg, |i, words| {
        let f = &functions[i];
        let block = &parts.blocks[parts.block_of[f[0]]];
        // every y: f'(y) lies in the block of f, and in out(f(x)) for x -> y
        let choices: Vec<Vec<usize>> = preds
            .iter()
            .map(|xs| {
                block
                    .iter()
                    .copied()
                    .filter(|&v| xs.iter().all(|&xx| g2.has_edge(f[xx], v)))
                    .collect()
            })
            .collect();
        for_each_tuple(&choices, |t| {
            if let Some(&j) = index.get(t) {
                words[j / 64] |= 1 << (j % 64);
            }
        });
    });
    let labels = functions
        .iter()
        .map(|f| {
            let parts: Vec<String> = f.iter().map(|&v| g2.label(v)).collect();
            format!("[{}]", parts.join(","))
        })
        .collect();
    Ok(G3 {
        digraph: digraph.with_labels(labels)?,
        functions,
    })
}

/// Exhaustively compares the two descriptions of the `G3` vertex set over
/// all maps `X -> G2`: "some `u` has `f(x) -> u` for every `x`" and "the
/// range of `f` lies in one component".
pub fn g3_vertex_sets_agree(g2: &Digraph, x: &Digraph, cfg: &Config) -> Result<bool> {
    let total = sat_pow(g2.len(), x.len());
    check_cap("maps X -> G2", total, cfg.materialization_cap)?;
    let parts = components(g2);
    let (n, m) = (g2.len(), x.len());
    Ok(cfg.exec.all(total as usize, |i| {
        let f = function_of(i, n, m);
        let common_out = (0..n).any(|u| f.iter().all(|&v| g2.has_edge(v, u)));
        let one_block = f.iter().all(|&v| parts.block_of[v] == parts.block_of[f[0]]);
        common_out == one_block
    }))
}

/// `v -> u`, `u -> u`, `u -> w` are edges and `v -> w` is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObstructionWitness {
    pub v: usize,
    pub u: usize,
    pub w: usize,
}

impl ObstructionWitness {
    pub fn holds_in(&self, d: &Digraph) -> bool {
        let ObstructionWitness { v, u, w } = *self;
        d.has_edge(v, u) && d.has_edge(u, u) && d.has_edge(u, w) && !d.has_edge(v, w)
    }
}

/// Lexicographically first `(v, u, w)` obstruction triple.
pub fn find_obstruction(d: &Digraph) -> Option<ObstructionWitness> {
    for v in 0..d.len() {
        for u in d.out_neighbors(v) {
            if !d.has_edge(u, u) {
                continue;
            }
            if let Some(w) = d.out_neighbors(u).find(|&w| !d.has_edge(v, w)) {
                return Some(ObstructionWitness { v, u, w });
            }
        }
    }
    None
}

/// One summarized class of `G2` components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G2Class {
    /// Vertices of `G1` forming the component, ascending.
    pub support: Vec<usize>,
    /// Number of `G2` components with this vertex set.
    pub multiplicity: u128,
    /// The lexicographically first image set `T` producing it.
    pub example_image: Vec<usize>,
}

/// Surjections from an `m`-set onto a `t`-set, saturating.
pub fn surjections(m: usize, t: usize) -> u128 {
    // s[j] = surjections from the current domain onto j points
    let mut s = vec![0u128; t + 1];
    s[0] = 1;
    for _ in 0..m {
        for j in (0..=t).rev() {
            s[j] = if j == 0 {
                0
            } else {
                (j as u128).saturating_mul(s[j].saturating_add(s[j - 1]))
            };
        }
    }
    s[t]
}

fn to_bits(vs: &[usize], words: usize) -> Vec<u64> {
    let mut b = vec![0u64; words];
    for &v in vs {
        b[v / 64] |= 1 << (v % 64);
    }
    b
}

/// Component classes of `G2` for the component `r` of `G1`, without
/// materializing `G2`.
pub fn g2_classes(g1: &Digraph, r: &[usize]) -> Vec<G2Class> {
    let n = g1.len();
    let words = n.div_ceil(64).max(1);
    let nb: Vec<Vec<u64>> = (0..n).map(|g| to_bits(&bi_neighbors(g1, g), words)).collect();
    let mut classes: BTreeMap<Vec<usize>, (u128, Vec<usize>)> = BTreeMap::new();

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        block: &[usize],
        start: usize,
        image: &mut Vec<usize>,
        support: &[u64],
        limit: usize,
        nb: &[Vec<u64>],
        r_len: usize,
        classes: &mut BTreeMap<Vec<usize>, (u128, Vec<usize>)>,
    ) {
        for p in start..block.len() {
            let g = block[p];
            let next: Vec<u64> = support.iter().zip(&nb[g]).map(|(a, b)| a & b).collect();
            if next.iter().all(|&w| w == 0) {
                continue;
            }
            image.push(g);
            let key: Vec<usize> = iter_bits(&next).collect();
            let e = classes.entry(key).or_insert_with(|| (0, image.clone()));
            e.0 = e.0.saturating_add(surjections(r_len, image.len()));
            if image.len() < limit {
                dfs(block, p + 1, image, &next, limit, nb, r_len, classes);
            }
            image.pop();
        }
    }

    let full = {
        let mut b = vec![u64::MAX; words];
        if !n.is_multiple_of(64) {
            b[words - 1] = (1u64 << (n % 64)) - 1;
        }
        if n == 0 {
            b[0] = 0;
        }
        b
    };
    for block in components(g1).blocks {
        dfs(&block, 0, &mut Vec::new(), &full, r.len(), &nb, r.len(), &mut classes);
    }
    classes
        .into_iter()
        .map(|(support, (multiplicity, example_image))| G2Class {
            support,
            multiplicity,
            example_image,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Counterexample or summary.
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ChainReport {
    pub g0_vertices: usize,
    pub g1_vertices: usize,
    pub g1_components: usize,
    pub g1_noncomplete_components: usize,
    pub r_component: usize,
    pub r_size: usize,
    pub g2_vertices: u128,
    pub g2_components: u128,
    pub g2_classes: usize,
    pub g2_class_types: usize,
    pub g2_materialized: bool,
    /// `full` when G3 was built over all of G2, `sample` otherwise.
    pub g3_route: &'static str,
    pub g3_vertices: usize,
    pub g3_components: usize,
    pub obstruction: Option<(String, String, String)>,
    pub product_n: usize,
    pub product_components: usize,
    pub checks: Vec<Check>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn check(&mut self, name: &'static str, failure: Option<String>, ok_detail: impl Into<String>) {
        let passed = failure.is_none();
        self.checks.push(Check {
            name,
            passed,
            detail: failure.unwrap_or_else(|| ok_detail.into()),
        });
    }
}

/// `G2` is materialized for the cross-check only below this many vertices.
pub const G2_MATERIALIZE_LIMIT: u128 = 20_000;
/// Whole-`G2` `G3` construction limit.
pub const G3_FULL_LIMIT: u128 = 20_000;

/// Runs the whole pipeline on `g0` with exponent `x` and verifies every
/// structural claim. `n` sizes the complete and equality factors of the final
/// product check.
pub fn verify_chain(g0: &Digraph, x: &Digraph, n: usize, cfg: &Config) -> Result<ChainReport> {
    let flags = classify(g0);
    if !flags.reflexive {
        return Err(Error::input("G0 must be reflexive"));
    }
    if flags.symmetric {
        return Err(Error::input("G0 must not be symmetric"));
    }
    if x.edge_count() == 0 {
        return Err(Error::input("X must have at least one edge"));
    }
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    let mut rep = ChainReport {
        g0_vertices: g0.len(),
        product_n: n,
        ..ChainReport::default()
    };

    // G1
    let g1 = construct_g1(g0)?;
    let d1 = &g1.digraph;
    let parts1 = components(d1);
    rep.g1_vertices = d1.len();
    rep.g1_components = parts1.len();
    let comp_graphs: Vec<Digraph> = parts1
        .blocks
        .iter()
        .map(|b| induced(d1, b))
        .collect::<Result<_>>()?;
    let universal_in = |v: usize| -> bool {
        let b = parts1.block_of[v];
        let local = parts1.blocks[b].binary_search(&v).unwrap();
        is_universal(&comp_graphs[b], local)
    };

    let mut failure = None;
    for (a, b) in g0.edges() {
        let t = TupleVertex { a, b: a, c: b, d: b };
        match g1.index_of(t) {
            Some(i) if universal_in(i) => {}
            _ => {
                failure = Some(format!("{t} is not universal in its component"));
                break;
            }
        }
    }
    rep.check("g1.aabb_universal", failure, "every (a,a,b,b) is universal");

    let designated: Vec<Option<usize>> = parts1
        .blocks
        .iter()
        .zip(&comp_graphs)
        .map(|(b, c)| universal_vertices(c).first().map(|&l| b[l]))
        .collect();
    let failure = designated
        .iter()
        .position(Option::is_none)
        .map(|i| format!("component {i} has no universal vertex"));
    rep.check(
        "g1.universal_per_component",
        failure,
        format!("{} components", parts1.len()),
    );

    let mut failure = None;
    let mut asym = 0;
    for (a, b) in g0.edges() {
        if g0.has_edge(b, a) {
            continue;
        }
        asym += 1;
        let v = g1.index_of(TupleVertex { a, b, c: b, d: b });
        let w = g1.index_of(TupleVertex { a, b: a, c: a, d: b });
        let u = g1.index_of(TupleVertex { a, b: a, c: b, d: b });
        let ok = match (v, w, u) {
            (Some(v), Some(w), Some(u)) => {
                parts1.block_of[v] == parts1.block_of[u]
                    && parts1.block_of[w] == parts1.block_of[u]
                    && !d1.has_edge(v, w)
            }
            _ => false,
        };
        if !ok {
            failure = Some(format!("(({a},{b},{b},{b}),({a},{a},{a},{b})) is not a non-edge in the component of ({a},{a},{b},{b})"));
            break;
        }
    }
    rep.check("g1.abbb_aaab_nonedge", failure, format!("{asym} asymmetric edges"));

    let noncomplete: Vec<usize> = comp_graphs
        .iter()
        .enumerate()
        .filter(|(_, c)| !classify(c).complete)
        .map(|(i, _)| i)
        .collect();
    rep.g1_noncomplete_components = noncomplete.len();
    rep.check(
        "g1.noncomplete_component",
        noncomplete.is_empty().then(|| "all components complete".to_string()),
        format!("{} non-complete", noncomplete.len()),
    );
    if !rep.passed() {
        return Ok(rep);
    }
    let designated: Vec<usize> = designated.into_iter().map(Option::unwrap).collect();

    // G2, summarized
    let r_idx = noncomplete[0];
    let r = parts1.blocks[r_idx].clone();
    let u_r = designated[r_idx];
    rep.r_component = r_idx;
    rep.r_size = r.len();
    let classes = g2_classes(d1, &r);
    rep.g2_classes = classes.len();
    rep.g2_components = classes
        .iter()
        .fold(0u128, |a, c| a.saturating_add(c.multiplicity));
    rep.g2_vertices = classes.iter().fold(0u128, |a, c| {
        a.saturating_add(c.multiplicity.saturating_mul(c.support.len() as u128))
    });
    let exact = g2_size(d1, &r);
    rep.check(
        "g2.summary_size",
        (exact != rep.g2_vertices)
            .then(|| format!("classes cover {} vertices, G2 has {exact}", rep.g2_vertices)),
        format!("{exact} vertices"),
    );

    let class_graphs: Vec<Digraph> = classes
        .iter()
        .map(|c| induced(d1, &c.support))
        .collect::<Result<_>>()?;
    let mut failure = None;
    for (c, g) in classes.iter().zip(&class_graphs) {
        let u = designated[parts1.block_of[c.support[0]]];
        match c.support.binary_search(&u) {
            Ok(local) if is_universal(g, local) => {}
            _ => {
                failure = Some(format!(
                    "component on {:?}: {} is not universal",
                    c.support,
                    d1.label(u)
                ));
                break;
            }
        }
    }
    rep.check("g2.fu_universal", failure, format!("{} classes", classes.len()));

    let r_class = classes.iter().position(|c| c.support == r);
    rep.check(
        "g2.noncomplete_component",
        match r_class {
            Some(i) if !classify(&class_graphs[i]).complete => None,
            Some(_) => Some("the copy of R is complete".to_string()),
            None => Some(format!("no component on R = {r:?}")),
        },
        "maps constant u_R on R give a copy of R",
    );
    let clique: Vec<usize> = universal_vertices(&comp_graphs[r_idx])
        .into_iter()
        .map(|l| r[l])
        .collect();
    let clique_class = classes.iter().position(|c| c.support == clique);
    rep.check(
        "g2.complete_component",
        match clique_class {
            Some(i) if classify(&class_graphs[i]).complete => None,
            Some(_) => Some("identity-on-R component is not complete".to_string()),
            None => Some(format!("no component on the universal vertices {clique:?} of R")),
        },
        format!("clique of {} universal vertices", clique.len()),
    );

    // G2, materialized cross-check
    let mut full_g2 = None;
    if exact <= G2_MATERIALIZE_LIMIT.min(cfg.materialization_cap as u128) {
        let g2 = construct_g2(d1, r_idx, cfg)?;
        let parts2 = components(&g2.digraph);
        let mut seen: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
        let mut failure = None;
        let index: HashMap<&G2Vertex, usize> =
            g2.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        for block in &parts2.blocks {
            let mut zero: Vec<usize> = block.iter().map(|&i| g2.vertices[i].at_zero()).collect();
            zero.sort_unstable();
            *seen.entry(zero).or_default() += 1;
            let local = induced(&g2.digraph, block)?;
            for &i in block {
                let mut fu = g2.vertices[i].clone();
                fu.values[0] = designated[parts1.block_of[fu.values[0]]];
                let ok = index
                    .get(&fu)
                    .and_then(|j| block.binary_search(j).ok())
                    .is_some_and(|l| is_universal(&local, l));
                if !ok && failure.is_none() {
                    failure = Some(format!("f_u of {} is not universal", g2.vertices[i]));
                }
            }
        }
        let expected: BTreeMap<Vec<usize>, u128> = classes
            .iter()
            .map(|c| (c.support.clone(), c.multiplicity))
            .collect();
        if failure.is_none() && seen != expected {
            failure = Some("component multiset differs from the class summary".to_string());
        }
        rep.check(
            "g2.materialized_matches_summary",
            failure,
            format!("{} components", parts2.len()),
        );
        rep.g2_materialized = true;
        full_g2 = Some(g2);
    }

    // G3, per class type
    let mut types: Vec<usize> = Vec::new();
    // (vertices, edges, sorted degree pairs) -> representatives
    type Invariant = (usize, usize, Vec<(usize, usize)>);
    let mut buckets: HashMap<Invariant, Vec<usize>> = HashMap::new();
    for (i, g) in class_graphs.iter().enumerate() {
        let mut degs: Vec<(usize, usize)> = (0..g.len())
            .map(|v| (g.out_degree(v), g.in_neighbors(v).count()))
            .collect();
        degs.sort_unstable();
        let bucket = buckets.entry((g.len(), g.edge_count(), degs)).or_default();
        if !bucket
            .iter()
            .any(|&t| are_isomorphic(&class_graphs[t], g).is_some())
        {
            bucket.push(i);
            types.push(i);
        }
    }
    rep.g2_class_types = types.len();
    let mut failure = None;
    for &t in &types {
        let c = &class_graphs[t];
        let power = exponential_with(c, x, cfg)?;
        let u = designated[parts1.block_of[classes[t].support[0]]];
        let local_u = classes[t].support.binary_search(&u).unwrap();
        let constant = index_of_function(&vec![local_u; x.len()], c.len());
        let complete = classify(c).complete;
        if !is_universal(&power, constant) {
            failure = Some(format!("constant {} map is not universal in C^X", d1.label(u)));
        } else if classify(&power).complete != complete {
            failure = Some(format!(
                "C^X completeness {} differs from C completeness {complete}",
                !complete
            ));
        }
        if failure.is_some() {
            break;
        }
    }
    rep.check(
        "g3.two_kinds_of_components",
        failure,
        format!("{} class types", types.len()),
    );

    // G3 over all of G2 when small, otherwise over the copies of R and the clique
    let sample: Digraph = match &full_g2 {
        Some(g2)
            if components(&g2.digraph)
                .blocks
                .iter()
                .map(|b| sat_pow(b.len(), x.len()))
                .sum::<u128>()
                <= G3_FULL_LIMIT =>
        {
            rep.g3_route = "full";
            g2.digraph.clone()
        }
        _ => {
            rep.g3_route = "sample";
            crate::digraph::disjoint_union(&[&class_graphs[r_class.unwrap()], &class_graphs[clique_class.unwrap()]])
        }
    };
    let g3 = construct_g3(&sample, x, cfg)?;
    rep.g3_vertices = g3.digraph.len();
    if sat_pow(sample.len(), x.len()) <= cfg.materialization_cap as u128 {
        let agree = g3_vertex_sets_agree(&sample, x, cfg)?;
        rep.check(
            "g3.vertex_set_characterizations",
            (!agree).then(|| "common out-neighbour and single-component ranges differ".to_string()),
            "exhaustive over maps X -> G2",
        );
    }

    let parts2 = components(&sample);
    let parts3 = components(&g3.digraph);
    rep.g3_components = parts3.len();
    let mut failure = (parts3.len() != parts2.len()).then(|| {
        format!(
            "G3 has {} components, G2 has {}",
            parts3.len(),
            parts2.len()
        )
    });
    if failure.is_none() {
        for block in &parts2.blocks {
            let members: Vec<usize> = (0..g3.functions.len())
                .filter(|&i| parts2.block_of[g3.functions[i][0]] == parts2.block_of[block[0]])
                .collect();
            let b3 = parts3.block_of[members[0]];
            if parts3.blocks[b3] != members {
                failure = Some(format!("maps into component {:?} do not form one component", block));
                break;
            }
            let comp = induced(&sample, block)?;
            let power = exponential_with(&comp, x, cfg)?;
            let mapping: Vec<usize> = members
                .iter()
                .map(|&i| {
                    let local: Vec<usize> = g3.functions[i]
                        .iter()
                        .map(|v| block.binary_search(v).unwrap())
                        .collect();
                    index_of_function(&local, block.len())
                })
                .collect();
            if !is_isomorphism(&induced(&g3.digraph, &members)?, &power, &mapping) {
                failure = Some(format!("component over {:?} is not C^X", block));
                break;
            }
        }
    }
    rep.check(
        "g3.component_power_correspondence",
        failure,
        format!("{} components", parts3.len()),
    );

    // obstruction in the power of the copy of R
    let r_fn = |l: usize| vec![l; x.len()];
    let r_copy: Vec<usize> = match &full_g2 {
        Some(g2) if rep.g3_route == "full" => {
            let target = G2Vertex {
                values: std::iter::once(u_r).chain(std::iter::repeat_n(u_r, r.len())).collect(),
            };
            vec![g2.vertices.iter().position(|v| *v == target).unwrap()]
        }
        _ => vec![r.binary_search(&u_r).unwrap()],
    };
    let start = g3
        .functions
        .binary_search(&r_fn(r_copy[0]))
        .map_err(|_| Error::Consistency("constant u_R map missing from G3".into()))?;
    let block = parts3.blocks[parts3.block_of[start]].clone();
    let comp = induced(&g3.digraph, &block)?;
    let witness = find_obstruction(&comp);
    let failure = match witness {
        Some(w) if w.holds_in(&comp) && !universal_vertices(&comp).is_empty() && !classify(&comp).complete => None,
        Some(_) => Some("invalid witness".to_string()),
        None => Some("no obstruction in the power of R".to_string()),
    };
    if let Some(w) = witness {
        rep.obstruction = Some((
            g3.digraph.label(block[w.v]),
            g3.digraph.label(block[w.u]),
            g3.digraph.label(block[w.w]),
        ));
    }
    rep.check("g3.obstruction", failure, "v -> u -> u -> w, v -/-> w");

    // product with complete and equality digraphs
    let kn = complete_digraph(n);
    let qn = equality_digraph(n);
    let p = product_with(&[&g3.digraph.clone().without_labels(), &kn, &qn], cfg)?;
    let pp = components(&p);
    rep.product_components = pp.len();
    let mut failure = (pp.len() != n * parts3.len())
        .then(|| format!("{} components, expected {}", pp.len(), n * parts3.len()));
    if failure.is_none() {
        for block in &pp.blocks {
            let g = block[0] / (n * n);
            let c = &parts3.blocks[parts3.block_of[g]];
            let expected = product_with(&[&induced(&g3.digraph, c)?.without_labels(), &kn], cfg)?;
            let mapping: Option<Vec<usize>> = block
                .iter()
                .map(|&i| {
                    let (gi, kk) = (i / (n * n), (i / n) % n);
                    c.binary_search(&gi).ok().map(|l| l * n + kk)
                })
                .collect();
            let ok = mapping.is_some_and(|m| {
                m.len() == expected.len() && is_isomorphism(&induced(&p, block).unwrap(), &expected, &m)
            });
            if !ok {
                failure = Some(format!("component at vertex {} is not C x K_{n}", block[0]));
                break;
            }
        }
    }
    rep.check(
        "product.component_inventory",
        failure,
        format!("{} components", pp.len()),
    );
    Ok(rep)
}
