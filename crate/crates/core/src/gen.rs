//! Seeded random generators and small-scale exhaustive helpers used by the
//! self-test suites and the test corpus. Everything is deterministic given
//! the seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::hypergraph::{Graph, Hypergraph};
use crate::logic::{naive_eval, Assignment, Formula, Quantifier, Signature, Structure, Variable};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Knobs for the random formula generator.
#[derive(Debug, Clone)]
pub struct GenConfig {
    /// variable name pool size (`x1`, `x2`, ...)
    pub max_vars: usize,
    pub max_atoms: usize,
    /// relations are drawn from the pool of [`test_signature`]
    pub max_arity: usize,
    pub allow_negation: bool,
    /// cap on quantifier occurrences inside the body (closing blocks of
    /// `random_sentence` come on top); keeps the oracle affordable
    pub max_quant_vars: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_vars: 5,
            max_atoms: 4,
            max_arity: 2,
            allow_negation: true,
            max_quant_vars: 3,
        }
    }
}

/// Fixed one-sorted signature the generators draw from: two unary and three
/// binary symbols.
pub fn test_signature(max_arity: usize) -> Signature {
    let mut rels = vec![("P".to_owned(), 1), ("Q".to_owned(), 1)];
    if max_arity >= 2 {
        rels.extend([
            ("E".to_owned(), 2),
            ("F".to_owned(), 2),
            ("R".to_owned(), 2),
        ]);
    }
    Signature::one_sorted(rels)
}

fn var_pool(n: usize) -> Vec<Variable> {
    (1..=n).map(|i| Variable::u(format!("x{i}"))).collect()
}

/// A random formula with at most `cfg.max_atoms` atoms over the pool
/// signature; may be open and may contain degenerate quantifiers.
pub fn random_formula(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Formula {
    let sig = test_signature(cfg.max_arity);
    let pool = var_pool(cfg.max_vars);
    let atoms = rng.gen_range(1..=cfg.max_atoms);
    let mut quant_budget = cfg.max_quant_vars;
    build(cfg, &sig, &pool, atoms, 0, &mut quant_budget, rng)
}

/// A random sentence: a random formula with its free variables closed under
/// randomly chosen quantifier blocks.
pub fn random_sentence(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Formula {
    let mut f = random_formula(cfg, rng);
    let mut free: Vec<Variable> = f.free_vars().into_iter().collect();
    free.shuffle(rng);
    while !free.is_empty() {
        let take = rng.gen_range(1..=free.len());
        let block: Vec<Variable> = free.drain(..take).collect();
        let q = if rng.gen_bool(0.5) {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        };
        f = Formula::quant(q, block, f);
    }
    f
}

fn build(
    cfg: &GenConfig,
    sig: &Signature,
    pool: &[Variable],
    atoms: usize,
    depth: usize,
    quant_budget: &mut usize,
    rng: &mut ChaCha8Rng,
) -> Formula {
    debug_assert!(atoms >= 1);
    if atoms == 1 {
        let mut f = random_atom(sig, pool, rng);
        // sprinkle unary structure above a single atom
        for _ in 0..rng.gen_range(0..=2) {
            if cfg.allow_negation && rng.gen_bool(0.3) {
                f = Formula::not(f);
            } else if rng.gen_bool(0.4) && depth < 6 && *quant_budget > 0 {
                f = random_quant(pool, f, quant_budget, rng);
            }
        }
        return f;
    }
    match rng.gen_range(0..10) {
        0..=5 => {
            let left = rng.gen_range(1..atoms);
            let l = build(cfg, sig, pool, left, depth + 1, quant_budget, rng);
            let r = build(cfg, sig, pool, atoms - left, depth + 1, quant_budget, rng);
            if rng.gen_bool(0.5) {
                Formula::and(l, r)
            } else {
                Formula::or(l, r)
            }
        }
        6..=7 if cfg.allow_negation => {
            Formula::not(build(cfg, sig, pool, atoms, depth + 1, quant_budget, rng))
        }
        _ if *quant_budget > 0 => {
            let body = build(cfg, sig, pool, atoms, depth + 1, quant_budget, rng);
            if *quant_budget > 0 {
                random_quant(pool, body, quant_budget, rng)
            } else {
                body
            }
        }
        _ => build(cfg, sig, pool, atoms, depth + 1, quant_budget, rng),
    }
}

fn random_atom(sig: &Signature, pool: &[Variable], rng: &mut ChaCha8Rng) -> Formula {
    let rels: Vec<(&String, &Vec<String>)> = sig.relations().iter().collect();
    let (name, arity) = rels[rng.gen_range(0..rels.len())];
    let args = (0..arity.len())
        .map(|_| pool[rng.gen_range(0..pool.len())].clone())
        .collect();
    Formula::atom(name.clone(), args)
}

fn random_quant(
    pool: &[Variable],
    body: Formula,
    quant_budget: &mut usize,
    rng: &mut ChaCha8Rng,
) -> Formula {
    let mut vars: Vec<Variable> = pool.to_vec();
    vars.shuffle(rng);
    let take = rng.gen_range(1..=2.min(pool.len()).min(*quant_budget));
    vars.truncate(take);
    *quant_budget -= take;
    let q = if rng.gen_bool(0.5) {
        Quantifier::Exists
    } else {
        Quantifier::Forall
    };
    Formula::quant(q, vars, body)
}

/// A random one-sorted structure over `sig` with universe size in
/// `1..=max_size`; each tuple is kept with an independently drawn density.
pub fn random_structure(sig: &Signature, max_size: usize, rng: &mut ChaCha8Rng) -> Structure {
    let n = rng.gen_range(1..=max_size);
    let density: f64 = rng.gen_range(0.2..0.8);
    random_structure_exact(sig, n, density, rng)
}

/// A random one-sorted structure with exactly `n` elements and the given
/// tuple density.
pub fn random_structure_exact(
    sig: &Signature,
    n: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> Structure {
    let elems: Vec<String> = (0..n).map(|i| format!("{i}")).collect();
    let mut interp = BTreeMap::new();
    for (name, arity) in sig.relations() {
        let mut all: Vec<Vec<String>> = vec![vec![]];
        for _ in 0..arity.len() {
            let mut next = Vec::new();
            for t in &all {
                for e in &elems {
                    let mut t2 = t.clone();
                    t2.push(e.clone());
                    next.push(t2);
                }
            }
            all = next;
        }
        let tuples: BTreeSet<Vec<String>> =
            all.into_iter().filter(|_| rng.gen_bool(density)).collect();
        interp.insert(name.clone(), tuples);
    }
    Structure::one_sorted(sig.clone(), elems, interp).expect("generated structure is valid")
}

/// All assignments of `vars` into the universes of their sorts.
pub fn assignments(vars: &BTreeSet<Variable>, s: &Structure) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = vec![Assignment::new()];
    for v in vars {
        let universe = match s.universes().get(&v.sort) {
            Some(u) => u,
            None => return Vec::new(),
        };
        let mut next = Vec::with_capacity(out.len() * universe.len());
        for a in &out {
            for e in universe {
                let mut a2 = a.clone();
                a2.insert(v.clone(), e.clone());
                next.push(a2);
            }
        }
        out = next;
    }
    out
}

/// Checks that `f` and `g` agree under `naive_eval` on `s` for every
/// assignment of their combined free variables; returns the first
/// counterexample assignment, if any.
pub fn naive_disagreement(
    f: &Formula,
    g: &Formula,
    s: &Structure,
) -> Result<Option<Assignment>> {
    let mut vars = f.free_vars();
    vars.extend(g.free_vars());
    for a in assignments(&vars, s) {
        if naive_eval(s, f, &a)? != naive_eval(s, g, &a)? {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Every one-sorted structure over `sig` with universe `{0, .., n-1}`.
/// Exponential in the relation table sizes; callers keep `n` tiny.
pub fn all_structures(sig: &Signature, n: usize) -> Vec<Structure> {
    let elems: Vec<String> = (0..n).map(|i| format!("{i}")).collect();
    let mut per_relation: Vec<(String, Vec<Vec<Vec<String>>>)> = Vec::new();
    for (name, arity) in sig.relations() {
        let mut all: Vec<Vec<String>> = vec![vec![]];
        for _ in 0..arity.len() {
            let mut next = Vec::new();
            for t in &all {
                for e in &elems {
                    let mut t2 = t.clone();
                    t2.push(e.clone());
                    next.push(t2);
                }
            }
            all = next;
        }
        assert!(all.len() <= 16, "exhaustive enumeration only for tiny universes");
        let subsets: Vec<Vec<Vec<String>>> = (0..(1usize << all.len()))
            .map(|mask| {
                all.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, t)| t.clone())
                    .collect()
            })
            .collect();
        per_relation.push((name.clone(), subsets));
    }
    let mut out: Vec<BTreeMap<String, BTreeSet<Vec<String>>>> = vec![BTreeMap::new()];
    for (name, subsets) in &per_relation {
        let mut next = Vec::with_capacity(out.len() * subsets.len());
        for partial in &out {
            for subset in subsets {
                let mut p2 = partial.clone();
                p2.insert(name.clone(), subset.iter().cloned().collect());
                next.push(p2);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|interp| {
            Structure::one_sorted(sig.clone(), elems.iter().cloned(), interp)
                .expect("enumerated structure is valid")
        })
        .collect()
}

/// A random simple graph on `n` named vertices with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph<String> {
    let mut g = Graph::from_edges(Vec::<(String, String)>::new());
    for i in 0..n {
        g.add_vertex(format!("v{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(format!("v{i}"), format!("v{j}"));
            }
        }
    }
    g
}

/// A random hypergraph on at most `max_vertices` vertices.
pub fn random_hypergraph(
    max_vertices: usize,
    max_edges: usize,
    rng: &mut ChaCha8Rng,
) -> Hypergraph<String> {
    let n = rng.gen_range(1..=max_vertices);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let e = rng.gen_range(1..=max_edges);
    let mut edges = Vec::new();
    for _ in 0..e {
        let size = rng.gen_range(1..=3.min(n));
        let mut vs = vertices.clone();
        vs.shuffle(rng);
        vs.truncate(size);
        edges.push(vs);
    }
    Hypergraph::from_edges(edges)
}
