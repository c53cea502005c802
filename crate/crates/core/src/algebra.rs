//! Finite algebras, compatible digraphs, subpower closure and the two
//! Maltsev-condition procedures.
//!
//! A Maltsev term is searched for in two independent ways. The first closes
//! `{(x,x), (x,y), (y,y)}` inside `F2 x F2` and asks whether the resulting
//! digraph on the two-generated free algebra is symmetric. The second closes
//! the three ternary projections over `A^(A^3)` and looks for a function with
//! `t(a,b,b) = a = t(b,b,a)`. [`is_congruence_permutable`] runs both and
//! insists that they agree.
//!
//! Operation tables are stored in lexicographic argument order: the entry for
//! `(a0, ..., a_{r-1})` sits at `sum a_i * n^(r-1-i)`.

use std::collections::HashMap;
use std::fmt;

use crate::digraph::{decode, encode};
use crate::error::{check_cap, sat_pow};
use crate::{Config, Digraph, Error, Result};

/// Candidate derivation `(operation, argument indices)` of a new element.
type Candidate = (usize, Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub symbol: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<Operation>,
}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<Operation>) -> Result<Self> {
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].iter().any(|o| o.symbol == op.symbol) {
                return Err(Error::input(format!("duplicate symbol `{}`", op.symbol)));
            }
            let expected = sat_pow(size, op.arity);
            if op.table.len() as u128 != expected {
                return Err(Error::input(format!(
                    "operation `{}` of arity {} needs {} table entries, got {}",
                    op.symbol,
                    op.arity,
                    expected,
                    op.table.len()
                )));
            }
            if let Some(&v) = op.table.iter().find(|&&v| v >= size) {
                return Err(Error::input(format!(
                    "operation `{}` has value {v} outside 0..{size}",
                    op.symbol
                )));
            }
        }
        Ok(FiniteAlgebra { size, ops })
    }

    /// Builds an operation from a function of its argument slice.
    pub fn op_from_fn(
        size: usize,
        symbol: &str,
        arity: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Operation {
        let radices = vec![size; arity];
        let mut args = vec![0; arity];
        let count = sat_pow(size, arity) as usize;
        let table = (0..count)
            .map(|i| {
                decode(i, &radices, &mut args);
                f(&args)
            })
            .collect();
        Operation {
            symbol: symbol.to_string(),
            arity,
            table,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_index(&self, symbol: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.symbol == symbol)
    }

    #[inline]
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let o = &self.ops[op];
        debug_assert_eq!(args.len(), o.arity);
        o.table[args.iter().fold(0, |acc, &a| acc * self.size + a)]
    }
}

/// How a closure element was produced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Derivation {
    Generator(usize),
    Op { op: usize, args: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubpowerElement {
    pub coords: Vec<usize>,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    App { symbol: String, args: Vec<Term> },
}

impl Term {
    pub fn eval(&self, alg: &FiniteAlgebra, assignment: &[usize]) -> Result<usize> {
        match self {
            Term::Var(i) => assignment
                .get(*i)
                .copied()
                .ok_or_else(|| Error::input(format!("no value for variable {i}"))),
            Term::App { symbol, args } => {
                let op = alg
                    .op_index(symbol)
                    .ok_or_else(|| Error::input(format!("unknown symbol `{symbol}`")))?;
                if alg.ops[op].arity != args.len() {
                    return Err(Error::input(format!("arity mismatch for `{symbol}`")));
                }
                let vals = args
                    .iter()
                    .map(|t| t.eval(alg, assignment))
                    .collect::<Result<Vec<_>>>()?;
                Ok(alg.apply(op, &vals))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => match i {
                0 => write!(f, "x"),
                1 => write!(f, "y"),
                2 => write!(f, "z"),
                _ => write!(f, "x{i}"),
            },
            Term::App { symbol, args } if args.is_empty() => write!(f, "{symbol}"),
            Term::App { symbol, args } => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Rebuilds the term behind `elements[index]` from the derivation records.
pub fn term_of(alg: &FiniteAlgebra, elements: &[SubpowerElement], index: usize) -> Term {
    match &elements[index].derivation {
        Derivation::Generator(k) => Term::Var(*k),
        Derivation::Op { op, args } => Term::App {
            symbol: alg.ops[*op].symbol.clone(),
            args: args.iter().map(|&a| term_of(alg, elements, a)).collect(),
        },
    }
}

/// Recomputes an element's coordinates from its derivation.
pub fn replay(
    alg: &FiniteAlgebra,
    generators: &[Vec<usize>],
    elements: &[SubpowerElement],
    index: usize,
) -> Vec<usize> {
    match &elements[index].derivation {
        Derivation::Generator(k) => generators[*k].clone(),
        Derivation::Op { op, args } => {
            let children: Vec<Vec<usize>> = args
                .iter()
                .map(|&a| replay(alg, generators, elements, a))
                .collect();
            let width = elements[index].coords.len();
            (0..width)
                .map(|c| {
                    let vals: Vec<usize> = children.iter().map(|ch| ch[c]).collect();
                    alg.apply(*op, &vals)
                })
                .collect()
        }
    }
}

/// Closure of `generators` in `A^index_size` under coordinatewise operations.
///
/// Elements come out breadth first: generators, then nullary constants, then
/// one level per round, where a round applies every operation to every
/// argument tuple that uses at least one element of the previous round. New
/// elements of a round are sorted by coordinates, and each records the
/// smallest `(operation, arguments)` pair producing it, so the output does not
/// depend on the execution mode.
pub fn generate_subpower(
    alg: &FiniteAlgebra,
    index_size: usize,
    generators: &[Vec<usize>],
    cfg: &Config,
) -> Result<Vec<SubpowerElement>> {
    if index_size == 0 {
        return Err(Error::input("index size must be positive"));
    }
    for (k, g) in generators.iter().enumerate() {
        if g.len() != index_size {
            return Err(Error::input(format!(
                "generator {k} has length {}, expected {index_size}",
                g.len()
            )));
        }
        if g.iter().any(|&v| v >= alg.size) {
            return Err(Error::input(format!("generator {k} leaves the universe")));
        }
    }

    let mut elements: Vec<SubpowerElement> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let push = |elements: &mut Vec<SubpowerElement>,
                    seen: &mut HashMap<Vec<usize>, usize>,
                    coords: Vec<usize>,
                    derivation: Derivation|
     -> Result<()> {
        if seen.contains_key(&coords) {
            return Ok(());
        }
        check_cap("subpower closure", elements.len() as u128 + 1, cfg.closure_cap)?;
        seen.insert(coords.clone(), elements.len());
        elements.push(SubpowerElement { coords, derivation });
        Ok(())
    };

    for (k, g) in generators.iter().enumerate() {
        push(&mut elements, &mut seen, g.clone(), Derivation::Generator(k))?;
    }
    for (i, op) in alg.ops.iter().enumerate() {
        if op.arity == 0 {
            push(
                &mut elements,
                &mut seen,
                vec![op.table[0]; index_size],
                Derivation::Op {
                    op: i,
                    args: Vec::new(),
                },
            )?;
        }
    }

    const CHUNK: usize = 4096;
    let mut old_end = 0;
    loop {
        let len = elements.len();
        if len == old_end {
            break;
        }
        // work items: (op, position of first frontier argument, start, end)
        let mut work = Vec::new();
        for (i, op) in alg.ops.iter().enumerate() {
            let r = op.arity;
            for p in 0..r {
                let count = sat_pow(old_end, p)
                    .saturating_mul((len - old_end) as u128)
                    .saturating_mul(sat_pow(len, r - 1 - p));
                check_cap("closure candidates", count, usize::MAX >> 1)?;
                let count = count as usize;
                let mut s = 0;
                while s < count {
                    work.push((i, p, s, (s + CHUNK).min(count)));
                    s += CHUNK;
                }
            }
        }

        let elems = &elements;
        let seen_ref = &seen;
        let partials: Vec<HashMap<Vec<usize>, Candidate>> =
            cfg.exec.map(work.len(), |w| {
                let (i, p, s, e) = work[w];
                let r = alg.ops[i].arity;
                let mut radices = vec![old_end; p];
                radices.push(len - old_end);
                radices.extend(std::iter::repeat_n(len, r - 1 - p));
                let mut args = vec![0; r];
                let mut vals = vec![0; r];
                let mut local: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
                for t in s..e {
                    decode(t, &radices, &mut args);
                    args[p] += old_end;
                    let coords: Vec<usize> = (0..index_size)
                        .map(|c| {
                            for (v, &a) in vals.iter_mut().zip(&args) {
                                *v = elems[a].coords[c];
                            }
                            alg.apply(i, &vals)
                        })
                        .collect();
                    if seen_ref.contains_key(&coords) {
                        continue;
                    }
                    let cand = (i, args.clone());
                    match local.get_mut(&coords) {
                        Some(best) if *best <= cand => {}
                        Some(best) => *best = cand,
                        None => {
                            local.insert(coords, cand);
                        }
                    }
                }
                local
            });

        let mut merged: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
        for part in partials {
            for (coords, cand) in part {
                match merged.get_mut(&coords) {
                    Some(best) if *best <= cand => {}
                    Some(best) => *best = cand,
                    None => {
                        merged.insert(coords, cand);
                    }
                }
            }
        }
        let mut fresh: Vec<(Vec<usize>, Candidate)> = merged.into_iter().collect();
        fresh.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        check_cap(
            "subpower closure",
            (len + fresh.len()) as u128,
            cfg.closure_cap,
        )?;
        old_end = len;
        for (coords, (op, args)) in fresh {
            push(&mut elements, &mut seen, coords, Derivation::Op { op, args })?;
        }
    }
    Ok(elements)
}

/// The subalgebra of `A^(A^2)` generated by the two binary projections.
#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    pub elements: Vec<SubpowerElement>,
    pub x: usize,
    pub y: usize,
    generators: Vec<Vec<usize>>,
}

impl FreeAlgebra {
    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, coords: &[usize]) -> Option<usize> {
        self.elements.iter().position(|e| e.coords == coords)
    }

    pub fn term(&self, alg: &FiniteAlgebra, index: usize) -> Term {
        term_of(alg, &self.elements, index)
    }

    /// `F2` as a finite algebra in the signature of `alg`.
    pub fn as_algebra(&self, alg: &FiniteAlgebra, cfg: &Config) -> Result<FiniteAlgebra> {
        let m = self.elements.len();
        let lookup: HashMap<&[usize], usize> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.coords.as_slice(), i))
            .collect();
        let width = self.elements.first().map_or(0, |e| e.coords.len());
        let mut ops = Vec::new();
        for (i, op) in alg.ops.iter().enumerate() {
            let count = sat_pow(m, op.arity);
            check_cap("free algebra table", count, cfg.materialization_cap)?;
            let radices = vec![m; op.arity];
            let mut args = vec![0; op.arity];
            let mut vals = vec![0; op.arity];
            let mut table = Vec::with_capacity(count as usize);
            for t in 0..count as usize {
                decode(t, &radices, &mut args);
                let coords: Vec<usize> = (0..width)
                    .map(|c| {
                        for (v, &a) in vals.iter_mut().zip(&args) {
                            *v = self.elements[a].coords[c];
                        }
                        alg.apply(i, &vals)
                    })
                    .collect();
                let idx = lookup.get(coords.as_slice()).copied().ok_or_else(|| {
                    Error::Consistency("free algebra is not closed".to_string())
                })?;
                table.push(idx);
            }
            ops.push(Operation {
                symbol: op.symbol.clone(),
                arity: op.arity,
                table,
            });
        }
        FiniteAlgebra::new(m, ops)
    }
}

/// `F2` realized over the coordinates `A^2`, ordered lexicographically.
pub fn free_algebra_on_two(alg: &FiniteAlgebra, cfg: &Config) -> Result<FreeAlgebra> {
    let n = alg.size;
    if n == 0 {
        return Err(Error::input("the universe must be non-empty"));
    }
    let pi1: Vec<usize> = (0..n * n).map(|i| i / n).collect();
    let pi2: Vec<usize> = (0..n * n).map(|i| i % n).collect();
    let generators = vec![pi1.clone(), pi2.clone()];
    let elements = generate_subpower(alg, n * n, &generators, cfg)?;
    let pos = |c: &[usize]| elements.iter().position(|e| e.coords == c).unwrap();
    let (x, y) = (pos(&pi1), pos(&pi2));
    Ok(FreeAlgebra {
        elements,
        x,
        y,
        generators,
    })
}

#[derive(Debug, Clone)]
pub struct MaltsevDigraph {
    pub free: FreeAlgebra,
    /// Vertices are indices into `free.elements`, labelled by their terms.
    pub digraph: Digraph,
}

/// The subalgebra of `F2 x F2` generated by `(x,x), (x,y), (y,y)`, read as a
/// digraph on `F2`.
pub fn maltsev_digraph(alg: &FiniteAlgebra, cfg: &Config) -> Result<MaltsevDigraph> {
    let free = free_algebra_on_two(alg, cfg)?;
    let width = alg.size * alg.size;
    let cat = |a: usize, b: usize| -> Vec<usize> {
        let mut v = free.elements[a].coords.clone();
        v.extend_from_slice(&free.elements[b].coords);
        v
    };
    let gens = vec![cat(free.x, free.x), cat(free.x, free.y), cat(free.y, free.y)];
    let pairs = generate_subpower(alg, 2 * width, &gens, cfg)?;
    let lookup: HashMap<&[usize], usize> = free
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.coords.as_slice(), i))
        .collect();
    let mut edges = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let (l, r) = p.coords.split_at(width);
        match (lookup.get(l), lookup.get(r)) {
            (Some(&a), Some(&b)) => edges.push((a, b)),
            _ => {
                return Err(Error::Consistency(
                    "pair closure left F2 x F2".to_string(),
                ))
            }
        }
    }
    let labels = (0..free.len())
        .map(|i| free.term(alg, i).to_string())
        .collect();
    let digraph = Digraph::from_edges(free.len(), &edges)?.with_labels(labels)?;
    Ok(MaltsevDigraph { free, digraph })
}

pub fn satisfies_maltsev_identities(n: usize, table3: &[usize]) -> bool {
    (0..n).all(|a| {
        (0..n).all(|b| table3[encode(&[a, b, b], &[n; 3])] == a && table3[encode(&[b, b, a], &[n; 3])] == a)
    })
}

/// First (breadth-first minimal) ternary term `t` with `t(x,y,y) = x` and
/// `t(y,y,x) = x` on `A`, or `None`.
pub fn find_maltsev_term(alg: &FiniteAlgebra, cfg: &Config) -> Result<Option<Term>> {
    let n = alg.size;
    if n == 0 {
        return Err(Error::input("the universe must be non-empty"));
    }
    let width = n * n * n;
    let gens: Vec<Vec<usize>> = (0..3)
        .map(|p| {
            (0..width)
                .map(|i| {
                    let mut abc = [0; 3];
                    decode(i, &[n; 3], &mut abc);
                    abc[p]
                })
                .collect()
        })
        .collect();
    let elements = generate_subpower(alg, width, &gens, cfg)?;
    Ok(elements
        .iter()
        .position(|e| satisfies_maltsev_identities(n, &e.coords))
        .map(|i| term_of(alg, &elements, i)))
}

#[derive(Debug, Clone)]
pub struct CpVerdict {
    pub permutable: bool,
    pub maltsev_term: Option<Term>,
    /// The non-symmetric free-algebra digraph when not permutable.
    pub obstruction_digraph: Option<Digraph>,
    /// Sizes reported alongside the verdict.
    pub free_size: usize,
    pub digraph_edges: usize,
}

pub fn is_congruence_permutable(alg: &FiniteAlgebra, cfg: &Config) -> Result<CpVerdict> {
    let md = maltsev_digraph(alg, cfg)?;
    let symmetric = crate::digraph::classify(&md.digraph).symmetric;
    let term = find_maltsev_term(alg, cfg)?;
    if symmetric != term.is_some() {
        return Err(Error::Consistency(format!(
            "Maltsev digraph symmetric = {symmetric} but term found = {}",
            term.is_some()
        )));
    }
    Ok(CpVerdict {
        permutable: symmetric,
        free_size: md.free.len(),
        digraph_edges: md.digraph.edge_count(),
        maltsev_term: term,
        obstruction_digraph: (!symmetric).then_some(md.digraph),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatViolation {
    pub op: String,
    /// The argument edges `(x_i, y_i)`.
    pub edges: Vec<(usize, usize)>,
    /// `(f(x), f(y))`, which is not an edge.
    pub image: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compatibility {
    Compatible,
    Violated(CompatViolation),
}

impl Compatibility {
    pub fn holds(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }
}

/// Whether every operation preserves the edge relation; otherwise the first
/// violating edge tuple (operations in order, tuples lexicographic over the
/// row-major edge list).
pub fn is_compatible(alg: &FiniteAlgebra, d: &Digraph, cfg: &Config) -> Result<Compatibility> {
    if d.len() != alg.size {
        return Err(Error::input(format!(
            "digraph has {} vertices, algebra has {} elements",
            d.len(),
            alg.size
        )));
    }
    let edges: Vec<(usize, usize)> = d.edges().collect();
    for (i, op) in alg.ops.iter().enumerate() {
        let r = op.arity;
        let count = sat_pow(edges.len(), r);
        check_cap("edge tuples", count, usize::MAX >> 1)?;
        let radices = vec![edges.len(); r];
        let hit = cfg.exec.find_first(count as usize, |t| {
            let mut pick = vec![0; r];
            decode(t, &radices, &mut pick);
            let xs: Vec<usize> = pick.iter().map(|&e| edges[e].0).collect();
            let ys: Vec<usize> = pick.iter().map(|&e| edges[e].1).collect();
            let (fx, fy) = (alg.apply(i, &xs), alg.apply(i, &ys));
            (!d.has_edge(fx, fy)).then(|| CompatViolation {
                op: op.symbol.clone(),
                edges: pick.iter().map(|&e| edges[e]).collect(),
                image: (fx, fy),
            })
        });
        if let Some(v) = hit {
            return Ok(Compatibility::Violated(v));
        }
    }
    Ok(Compatibility::Compatible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{classify, complete_digraph};

    fn s2() -> FiniteAlgebra {
        FiniteAlgebra::new(2, vec![FiniteAlgebra::op_from_fn(2, "meet", 2, |a| a[0].min(a[1]))])
            .unwrap()
    }

    fn z2() -> FiniteAlgebra {
        FiniteAlgebra::new(
            2,
            vec![
                FiniteAlgebra::op_from_fn(2, "plus", 2, |a| (a[0] + a[1]) % 2),
                FiniteAlgebra::op_from_fn(2, "neg", 1, |a| a[0]),
                FiniteAlgebra::op_from_fn(2, "zero", 0, |_| 0),
            ],
        )
        .unwrap()
    }

    fn chain2() -> Digraph {
        Digraph::from_edges(2, &[(0, 0), (1, 1), (0, 1)]).unwrap()
    }

    #[test]
    fn constructor_validates() {
        let bad = Operation {
            symbol: "f".into(),
            arity: 2,
            table: vec![0, 0, 0],
        };
        assert!(FiniteAlgebra::new(2, vec![bad]).is_err());
        let out = Operation {
            symbol: "f".into(),
            arity: 1,
            table: vec![0, 2],
        };
        assert!(FiniteAlgebra::new(2, vec![out]).is_err());
        let f = FiniteAlgebra::op_from_fn(2, "f", 1, |a| a[0]);
        assert!(FiniteAlgebra::new(2, vec![f.clone(), f]).is_err());
    }

    #[test]
    fn compatibility_examples() {
        let cfg = Config::default();
        assert!(is_compatible(&s2(), &chain2(), &cfg).unwrap().holds());
        // the only edge tuple maps (0,1),(0,1) to (0,1): preserved
        let bare = Digraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(is_compatible(&s2(), &bare, &cfg).unwrap().holds());
        assert!(is_compatible(&z2(), &complete_digraph(2), &cfg).unwrap().holds());
        // neg is the identity here, so use a genuine violation: swap on CHAIN2
        let swap = FiniteAlgebra::new(2, vec![FiniteAlgebra::op_from_fn(2, "s", 1, |a| 1 - a[0])])
            .unwrap();
        match is_compatible(&swap, &chain2(), &cfg).unwrap() {
            Compatibility::Violated(v) => {
                assert_eq!(v.op, "s");
                assert_eq!(v.edges, vec![(0, 1)]);
                assert_eq!(v.image, (1, 0));
            }
            c => panic!("{c:?}"),
        }
        assert!(is_compatible(&s2(), &complete_digraph(3), &cfg).is_err());
    }

    #[test]
    fn nullary_needs_a_loop() {
        let cfg = Config::default();
        let c = FiniteAlgebra::new(2, vec![FiniteAlgebra::op_from_fn(2, "one", 0, |_| 1)]).unwrap();
        let d = Digraph::from_edges(2, &[(0, 0)]).unwrap();
        match is_compatible(&c, &d, &cfg).unwrap() {
            Compatibility::Violated(v) => assert_eq!(v.image, (1, 1)),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn semilattice_subpower() {
        let cfg = Config::default();
        let els = generate_subpower(&s2(), 4, &[vec![0, 0, 1, 1], vec![0, 1, 0, 1]], &cfg).unwrap();
        let coords: Vec<_> = els.iter().map(|e| e.coords.clone()).collect();
        assert_eq!(coords, vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 0, 0, 1]]);
        assert_eq!(
            els[2].derivation,
            Derivation::Op {
                op: 0,
                args: vec![0, 1]
            }
        );
    }

    #[test]
    fn z2_subpower() {
        let cfg = Config::default();
        let gens = [vec![0, 0, 1, 1], vec![0, 1, 0, 1]];
        let els = generate_subpower(&z2(), 4, &gens, &cfg).unwrap();
        let mut coords: Vec<_> = els.iter().map(|e| e.coords.clone()).collect();
        coords.sort();
        assert_eq!(
            coords,
            vec![vec![0, 0, 0, 0], vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 1, 1, 0]]
        );
        for i in 0..els.len() {
            assert_eq!(replay(&z2(), &gens, &els, i), els[i].coords);
        }
    }

    #[test]
    fn empty_generators() {
        let cfg = Config::default();
        assert!(generate_subpower(&s2(), 3, &[], &cfg).unwrap().is_empty());
        // constants still appear
        assert_eq!(generate_subpower(&z2(), 3, &[], &cfg).unwrap().len(), 1);
    }

    #[test]
    fn closure_cap_is_enforced() {
        let cfg = Config {
            closure_cap: 3,
            ..Config::default()
        };
        let gens = [vec![0, 0, 1, 1], vec![0, 1, 0, 1]];
        assert!(matches!(
            generate_subpower(&z2(), 4, &gens, &cfg),
            Err(Error::Resource { .. })
        ));
        assert!(generate_subpower(&s2(), 4, &gens, &cfg).is_ok());
    }

    #[test]
    fn free_algebras() {
        let cfg = Config::default();
        let f = free_algebra_on_two(&s2(), &cfg).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!((f.x, f.y), (0, 1));
        assert_eq!(f.term(&s2(), 2).to_string(), "meet(x,y)");
        assert_eq!(free_algebra_on_two(&z2(), &cfg).unwrap().len(), 4);
        let one = FiniteAlgebra::new(1, vec![]).unwrap();
        assert_eq!(free_algebra_on_two(&one, &cfg).unwrap().len(), 1);
    }

    #[test]
    fn semilattice_maltsev_digraph() {
        let md = maltsev_digraph(&s2(), &Config::default()).unwrap();
        let d = &md.digraph;
        let expected = Digraph::from_edges(3, &[(0, 0), (0, 1), (1, 1), (0, 2), (2, 2), (2, 1)]).unwrap();
        assert!(d.same_edges(&expected));
        assert!(!classify(d).symmetric);
        assert!(d.has_edge(md.free.x, md.free.y) && !d.has_edge(md.free.y, md.free.x));
    }

    #[test]
    fn z2_maltsev() {
        let cfg = Config::default();
        assert!(classify(&maltsev_digraph(&z2(), &cfg).unwrap().digraph).symmetric);
        let t = find_maltsev_term(&z2(), &cfg).unwrap().unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(t.eval(&z2(), &[a, b, c]).unwrap(), (a + b + c) % 2);
                }
            }
        }
        assert!(find_maltsev_term(&s2(), &cfg).unwrap().is_none());
    }

    #[test]
    fn one_element_algebra() {
        let cfg = Config::default();
        let one = FiniteAlgebra::new(1, vec![]).unwrap();
        assert_eq!(find_maltsev_term(&one, &cfg).unwrap(), Some(Term::Var(0)));
        let md = maltsev_digraph(&one, &cfg).unwrap();
        assert_eq!(md.digraph.edges().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn verdicts() {
        let cfg = Config::default();
        let v = is_congruence_permutable(&z2(), &cfg).unwrap();
        assert!(v.permutable && v.maltsev_term.is_some() && v.obstruction_digraph.is_none());
        let v = is_congruence_permutable(&s2(), &cfg).unwrap();
        assert!(!v.permutable && v.maltsev_term.is_none());
        assert!(!classify(v.obstruction_digraph.as_ref().unwrap()).symmetric);
        let set2 = FiniteAlgebra::new(2, vec![]).unwrap();
        let v = is_congruence_permutable(&set2, &cfg).unwrap();
        assert!(!v.permutable);
        assert_eq!(v.free_size, 2);
    }

    #[test]
    fn term_display_and_eval_errors() {
        let t = Term::App {
            symbol: "zero".into(),
            args: vec![],
        };
        assert_eq!(t.to_string(), "zero");
        assert_eq!(t.eval(&z2(), &[]).unwrap(), 0);
        assert!(Term::Var(3).eval(&z2(), &[0]).is_err());
        let bogus = Term::App {
            symbol: "nope".into(),
            args: vec![],
        };
        assert!(bogus.eval(&z2(), &[]).is_err());
    }
}
