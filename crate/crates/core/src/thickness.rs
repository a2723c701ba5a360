//! Thickness measures of layered formulas, the variable-elimination step on
//! quantifier blocks, and the rewriting of arbitrary formulas into
//! equivalents that use few variables.
//!
//! For a layered block `Q U (φ1 ⊙ ... ⊙ φn)` the local thickness is one plus
//! the treewidth of the hypergraph `{free(φi)} ∪ {free(φ)}`; thickness is the
//! recursive maximum, and the thickness of an arbitrary formula is the
//! maximum over the layered leaves of its `lay` form. Thickness bounds the
//! number of variables needed: `minimize_variables` realizes the bound by
//! eliminating block variables along an elimination ordering whose first
//! vertices are the free variables, then renaming greedily.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::hypergraph::{EliminationOrdering, Hypergraph};
use crate::logic::{print_formula, Formula, Quantifier, Variable};
use crate::normalize::{is_layered, lay};
use crate::{Error, Result};

/// Computed measures for one formula, as reported by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub thickness: usize,
    pub width_before: usize,
    pub width_after: usize,
    pub variables_used_after: usize,
    pub per_node: Vec<NodeThickness>,
}

/// Local and quantified thickness of one block node of the `lay` form,
/// addressed by its path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeThickness {
    pub path: Vec<usize>,
    pub local: usize,
    pub quantified: usize,
}

/// The maximal subformulas reachable from the root through `And`/`Or` nodes
/// only, with their paths.
pub fn positively_combined_subformulas(f: &Formula) -> Vec<(Vec<usize>, &Formula)> {
    let mut out = Vec::new();
    walk_pos(f, &mut Vec::new(), &mut out);
    out
}

fn walk_pos<'a>(f: &'a Formula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
    match f {
        Formula::And(l, r) | Formula::Or(l, r) => {
            path.push(0);
            walk_pos(l, path, out);
            path.pop();
            path.push(1);
            walk_pos(r, path, out);
            path.pop();
        }
        leaf => out.push((path.clone(), leaf)),
    }
}

/// The immediate members of a layered block: conjuncts under `exists`,
/// disjuncts under `forall`.
fn block_parts(f: &Formula) -> Result<(Quantifier, &[Variable], Vec<&Formula>)> {
    match f {
        Formula::Quant { q, vars, body } => {
            let parts = match q {
                Quantifier::Exists => body.and_parts(),
                Quantifier::Forall => body.or_parts(),
            };
            Ok((*q, vars, parts))
        }
        _ => Err(Error::Precondition(format!(
            "expected a quantifier block, got `{}`",
            print_formula(f)
        ))),
    }
}

/// The hypergraph `{free(φi)} ∪ {free(φ)}` of a block formula; its vertex
/// set is the union of the members' free variables.
pub fn block_hypergraph(f: &Formula) -> Result<Hypergraph<Variable>> {
    let (_, _, parts) = block_parts(f)?;
    let mut edges: Vec<BTreeSet<Variable>> = parts.iter().map(|p| p.free_vars()).collect();
    edges.push(f.free_vars());
    Ok(Hypergraph::from_edges(edges))
}

fn require_layered(f: &Formula, what: &str) -> Result<()> {
    if !is_layered(f) {
        return Err(Error::Precondition(format!(
            "{what} requires a layered formula, got `{}`",
            print_formula(f)
        )));
    }
    Ok(())
}

/// `1 + tw({free(φi)} ∪ {free(φ)})` for a layered block node.
pub fn local_thickness(f: &Formula) -> Result<usize> {
    require_layered(f, "local_thickness")?;
    Ok(1 + block_hypergraph(f)?.treewidth()?)
}

/// `1 + tw({free(φi) ∩ U})` where `U` is the quantified block.
pub fn quantified_thickness(f: &Formula) -> Result<usize> {
    require_layered(f, "quantified_thickness")?;
    let (_, vars, parts) = block_parts(f)?;
    let block: BTreeSet<Variable> = vars.iter().cloned().collect();
    let edges: Vec<BTreeSet<Variable>> = parts
        .iter()
        .map(|p| p.free_vars().intersection(&block).cloned().collect())
        .collect();
    Ok(1 + Hypergraph::from_edges(edges).treewidth()?)
}

/// Thickness of a layered formula: `|free|` on atoms and negated atoms, and
/// the maximum of the local thickness and the members' thicknesses on
/// blocks.
pub fn thickness_layered(f: &Formula) -> Result<usize> {
    require_layered(f, "thickness_layered")?;
    thickness_layered_rec(f)
}

fn thickness_layered_rec(f: &Formula) -> Result<usize> {
    match f {
        Formula::Atom { .. } | Formula::Not(_) => Ok(f.free_vars().len()),
        Formula::Quant { .. } => {
            let (_, _, parts) = block_parts(f)?;
            let mut best = 1 + block_hypergraph(f)?.treewidth()?;
            for p in parts {
                best = best.max(thickness_layered_rec(p)?);
            }
            Ok(best)
        }
        _ => Err(Error::Precondition(
            "bare connectives are not layered".into(),
        )),
    }
}

/// Thickness of an arbitrary formula: the maximum of `thickness_layered`
/// over the layered leaves of `lay(f)`.
pub fn thickness(f: &Formula) -> Result<usize> {
    let layed = lay(f)?;
    let mut best = 0;
    for (_, leaf) in positively_combined_subformulas(&layed) {
        best = best.max(thickness_layered(leaf)?);
    }
    Ok(best)
}

/// Full analysis: thickness, widths before/after minimization, variable
/// count after, and per-block local/quantified thickness of the `lay` form.
pub fn analyze(f: &Formula) -> Result<AnalysisReport> {
    let layed = lay(f)?;
    let mut per_node = Vec::new();
    let mut best = 0;
    for (path, leaf) in positively_combined_subformulas(&layed) {
        best = best.max(thickness_layered(leaf)?);
        collect_nodes(leaf, path, &mut per_node)?;
    }
    let minimized = minimize_variables(f)?;
    Ok(AnalysisReport {
        thickness: best,
        width_before: f.width(),
        width_after: minimized.width(),
        variables_used_after: minimized.all_variables().len(),
        per_node,
    })
}

fn collect_nodes(f: &Formula, path: Vec<usize>, out: &mut Vec<NodeThickness>) -> Result<()> {
    if let Formula::Quant { .. } = f {
        out.push(NodeThickness {
            path: path.clone(),
            local: 1 + block_hypergraph(f)?.treewidth()?,
            quantified: quantified_thickness_unchecked(f)?,
        });
        let (q, _, parts) = block_parts(f)?;
        // paths descend through the body's connective run
        let body_paths = run_paths(f, q);
        for ((sub_path, _), p) in body_paths.into_iter().zip(parts) {
            let mut full = path.clone();
            full.extend(sub_path);
            collect_nodes(p, full, out)?;
        }
    }
    Ok(())
}

fn quantified_thickness_unchecked(f: &Formula) -> Result<usize> {
    let (_, vars, parts) = block_parts(f)?;
    let block: BTreeSet<Variable> = vars.iter().cloned().collect();
    let edges: Vec<BTreeSet<Variable>> = parts
        .iter()
        .map(|p| p.free_vars().intersection(&block).cloned().collect())
        .collect();
    Ok(1 + Hypergraph::from_edges(edges).treewidth()?)
}

/// Paths (relative to the block node) of the members of its body run.
fn run_paths(f: &Formula, q: Quantifier) -> Vec<(Vec<usize>, &Formula)> {
    fn rec<'a>(
        f: &'a Formula,
        q: Quantifier,
        path: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, &'a Formula)>,
    ) {
        match (f, q) {
            (Formula::And(l, r), Quantifier::Exists) | (Formula::Or(l, r), Quantifier::Forall) => {
                path.push(0);
                rec(l, q, path, out);
                path.pop();
                path.push(1);
                rec(r, q, path, out);
                path.pop();
            }
            _ => out.push((path.clone(), f)),
        }
    }
    let mut out = Vec::new();
    if let Formula::Quant { body, .. } = f {
        let mut path = vec![0];
        rec(body, q, &mut path, &mut out);
    }
    out
}

/// Checks that `e` is an elimination ordering of the block formula `f`: it
/// orders the union of the members' free variables, the free variables of
/// `f` come first, and it is an elimination ordering of the hypergraph
/// `{free(f)} ∪ {free(φi)}`.
pub fn validate_ordering_of(f: &Formula, e: &EliminationOrdering<Variable>) -> Result<()> {
    let h = block_hypergraph(f)?;
    e.validate_for(&h)?;
    let free = f.free_vars();
    let prefix: BTreeSet<Variable> = e.order().iter().take(free.len()).cloned().collect();
    if prefix != free {
        return Err(Error::Precondition(
            "free variables do not form the ordering prefix".into(),
        ));
    }
    Ok(())
}

/// One variable-elimination step on `Q V (φ1 ⊙ ... ⊙ φn)` along `e`: the
/// members containing the order-last variable `v` are grouped under a fresh
/// inner `Q v`, and `v` leaves the block and the ordering. When no block
/// variable occurs in the members the block is dropped entirely.
///
/// The grouped subformula satisfies `|free| ≤ 1 + lowerdeg(e, v)`, and the
/// restricted ordering is an elimination ordering of the result.
pub fn eliminate_last_variable(
    f: &Formula,
    e: &EliminationOrdering<Variable>,
) -> Result<(Formula, EliminationOrdering<Variable>)> {
    let (out, ord) = eliminate_step(f, e)?;
    Ok((out.into_formula(), ord))
}

enum Step {
    /// the block persists with one variable fewer
    Shrunk(Formula),
    /// the block was consumed (or dropped as degenerate)
    BlockGone(Formula),
}

impl Step {
    fn into_formula(self) -> Formula {
        match self {
            Step::Shrunk(f) | Step::BlockGone(f) => f,
        }
    }
}

fn eliminate_step(
    f: &Formula,
    e: &EliminationOrdering<Variable>,
) -> Result<(Step, EliminationOrdering<Variable>)> {
    let (q, vars, parts) = block_parts(f)?;
    if vars.is_empty() {
        return Err(Error::Precondition("empty quantifier block".into()));
    }
    validate_ordering_of(f, e)?;
    let free = f.free_vars();
    if e.order().len() == free.len() {
        // no quantified variable occurs in any member: drop the block
        let members: Vec<Formula> = parts.into_iter().cloned().collect();
        return Ok((Step::BlockGone(combine(q, members)), e.clone()));
    }
    let last = e.order().last().expect("nonempty ordering").clone();
    if !vars.contains(&last) {
        return Err(Error::Precondition(format!(
            "order-last variable `{}` is not in the quantifier block",
            last.name
        )));
    }
    let (grouped, rest): (Vec<&Formula>, Vec<&Formula>) = parts
        .into_iter()
        .partition(|p| p.free_vars().contains(&last));
    debug_assert!(!grouped.is_empty(), "order vertices occur in some member");
    let group = combine(q, grouped.into_iter().cloned().collect());
    debug_assert!(group.free_vars().len() <= 1 + e.lower_degree(&last)?);
    let inner = Formula::quant(q, vec![last.clone()], group);
    let mut members: Vec<Formula> = rest.into_iter().cloned().collect();
    members.push(inner);
    let body = combine(q, members);
    let new_vars: Vec<Variable> = vars.iter().filter(|v| **v != last).cloned().collect();
    let restricted = e.restrict_dropping_last();
    if new_vars.is_empty() {
        Ok((Step::BlockGone(body), restricted))
    } else {
        Ok((Step::Shrunk(Formula::quant(q, new_vars, body)), restricted))
    }
}

fn combine(q: Quantifier, members: Vec<Formula>) -> Formula {
    match q {
        Quantifier::Exists => Formula::big_and(members),
        Quantifier::Forall => Formula::big_or(members),
    }
}

/// Iterates `eliminate_last_variable` until the block is gone. The result is
/// logically equivalent and its width is bounded by
/// `max({1 + lowerdeg(e)} ∪ {width(φi)})`.
pub fn eliminate_block(f: &Formula, e: &EliminationOrdering<Variable>) -> Result<Formula> {
    let (_, _, parts) = block_parts(f)?;
    let bound = parts
        .iter()
        .map(|p| p.width())
        .chain([1 + e.lowerdeg()])
        .max()
        .unwrap_or(0);
    let mut cur = f.clone();
    let mut ord = e.clone();
    loop {
        let (step, next_ord) = eliminate_step(&cur, &ord)?;
        ord = next_ord;
        match step {
            Step::Shrunk(next) => cur = next,
            Step::BlockGone(done) => {
                cur = done;
                break;
            }
        }
    }
    debug_assert!(
        cur.width() <= bound,
        "width {} exceeds the elimination bound {bound} for `{}`",
        cur.width(),
        print_formula(&cur),
    );
    Ok(cur)
}

/// Rewrites `f` into a logically equivalent formula whose number of distinct
/// variables is at most `thickness(f)` (for sentences; free variables always
/// keep their names). Blocks of the `lay` form are eliminated along optimal
/// orderings whose prefix is the block's free-variable set, then bound
/// variables are renamed greedily from a shared pool.
pub fn minimize_variables(f: &Formula) -> Result<Formula> {
    let layed = lay(f)?;
    let minimized = map_leaves(&layed, &minimize_layered)?;
    Ok(rename_minimal(&minimized))
}

fn map_leaves(
    f: &Formula,
    op: &dyn Fn(&Formula) -> Result<Formula>,
) -> Result<Formula> {
    match f {
        Formula::And(l, r) => Ok(Formula::and(map_leaves(l, op)?, map_leaves(r, op)?)),
        Formula::Or(l, r) => Ok(Formula::or(map_leaves(l, op)?, map_leaves(r, op)?)),
        leaf => op(leaf),
    }
}

fn minimize_layered(f: &Formula) -> Result<Formula> {
    match f {
        Formula::Atom { .. } | Formula::Not(_) => Ok(f.clone()),
        Formula::Quant { q, vars, .. } => {
            let h = block_hypergraph(f)?;
            let e = h.elimination_ordering_with_prefix(&f.free_vars())?;
            let (_, _, parts) = block_parts(f)?;
            let members: Vec<Formula> = parts
                .into_iter()
                .map(minimize_layered)
                .collect::<Result<_>>()?;
            let rebuilt = Formula::quant(*q, vars.clone(), combine(*q, members));
            eliminate_block(&rebuilt, &e)
        }
        _ => Err(Error::Precondition(
            "positively combined leaves must be layered".into(),
        )),
    }
}

/// Greedy bound-variable renaming from a shared name pool (free names first,
/// then bound names, each sorted): each binder takes the lowest pool name
/// not live in its scope. On a sentence of width `w` the output uses at most
/// `w` distinct names.
fn rename_minimal(f: &Formula) -> Formula {
    let free_names: BTreeSet<String> = f.free_vars().into_iter().map(|v| v.name).collect();
    let mut pool: Vec<String> = free_names.iter().cloned().collect();
    for v in f.all_variables() {
        if !free_names.contains(&v.name) && !pool.contains(&v.name) {
            pool.push(v.name);
        }
    }
    // bound names after the free ones, sorted
    pool[free_names.len()..].sort();
    rename_walk(f, &pool, &mut Vec::new())
}

fn rename_walk(f: &Formula, pool: &[String], env: &mut Vec<(Variable, Variable)>) -> Formula {
    match f {
        Formula::Atom { relation, args } => {
            let args = args
                .iter()
                .map(|v| {
                    env.iter()
                        .rev()
                        .find(|(old, _)| old == v)
                        .map(|(_, new)| new.clone())
                        .unwrap_or_else(|| v.clone())
                })
                .collect();
            Formula::atom(relation.clone(), args)
        }
        Formula::Not(inner) => Formula::not(rename_walk(inner, pool, env)),
        Formula::And(l, r) => {
            Formula::and(rename_walk(l, pool, env), rename_walk(r, pool, env))
        }
        Formula::Or(l, r) => Formula::or(rename_walk(l, pool, env), rename_walk(r, pool, env)),
        Formula::Quant { q, vars, body } => {
            // names live in the body: renamed occurrences of enclosing
            // binders and untouched free variables
            let block: BTreeSet<Variable> = vars.iter().cloned().collect();
            let mut live: BTreeSet<String> = BTreeSet::new();
            for u in body.free_vars() {
                if block.contains(&u) {
                    continue;
                }
                let name = env
                    .iter()
                    .rev()
                    .find(|(old, _)| *old == u)
                    .map(|(_, new)| new.name.clone())
                    .unwrap_or(u.name);
                live.insert(name);
            }
            let depth = env.len();
            let mut new_vars = Vec::with_capacity(vars.len());
            for v in vars {
                let name = pool
                    .iter()
                    .find(|n| !live.contains(*n))
                    .cloned()
                    .unwrap_or_else(|| v.name.clone());
                live.insert(name.clone());
                let fresh = Variable::new(name, v.sort.clone());
                env.push((v.clone(), fresh.clone()));
                new_vars.push(fresh);
            }
            let body = rename_walk(body, pool, env);
            env.truncate(depth);
            Formula::quant(*q, new_vars, body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain_example, chain_signature, f_k, f_k_signature};
    use crate::gen;
    use crate::logic::parse_formula;
    use crate::normalize::lay;

    fn p(text: &str) -> Formula {
        let sig = crate::logic::Signature::one_sorted([
            ("E".to_owned(), 2),
            ("E1".to_owned(), 2),
            ("E2".to_owned(), 2),
            ("R".to_owned(), 2),
            ("S".to_owned(), 2),
            ("A".to_owned(), 2),
            ("B".to_owned(), 1),
            ("P".to_owned(), 1),
        ]);
        parse_formula(text, &sig).unwrap()
    }

    #[test]
    fn positively_combined_leaves() {
        let f = p("(P(x) & P(y)) | exists x. P(x)");
        let leaves: Vec<String> = positively_combined_subformulas(&f)
            .into_iter()
            .map(|(_, l)| l.to_string())
            .collect();
        assert_eq!(leaves, ["P(x)", "P(y)", "exists x. P(x)"]);

        let whole = p("exists x. P(x)");
        assert_eq!(positively_combined_subformulas(&whole).len(), 1);

        let three = p("P(x) & (P(y) | P(z))");
        assert_eq!(positively_combined_subformulas(&three).len(), 3);
    }

    #[test]
    fn local_thickness_examples() {
        // hypergraph {{x,x2},{x,y}} plus the free edge {y}: primal treewidth 1
        let f = p("exists x x2. (E(x,x2) & E(y,x))");
        assert_eq!(local_thickness(&f).unwrap(), 2);

        // outer block of the layered chain: edges {{y}, {}} have treewidth 0
        let outer = p("forall y. exists x x2. (E(x,x2) & E(y,x))");
        assert_eq!(local_thickness(&outer).unwrap(), 1);

        // lay(F_2) inner block: {{y1,x},{y2,x},{y1,y2}} is a triangle
        let f2 = p("exists x. (E1(y1,x) & E2(y2,x))");
        assert_eq!(local_thickness(&f2).unwrap(), 3);
    }

    #[test]
    fn quantified_thickness_examples() {
        let f = p("exists x x2. (E(x,x2) & E(y,x))");
        assert_eq!(quantified_thickness(&f).unwrap(), 2);

        let f2 = p("exists x. (E1(y1,x) & E2(y2,x))");
        assert_eq!(quantified_thickness(&f2).unwrap(), 1);

        // single-vertex hypergraph has treewidth 0
        let outer = p("forall y. E(y,y)");
        assert_eq!(quantified_thickness(&outer).unwrap(), 1);
    }

    #[test]
    fn thickness_layered_examples() {
        assert_eq!(thickness_layered(&p("E(x,y)")).unwrap(), 2);
        assert_eq!(
            thickness_layered(&p("forall y. exists x x2. (E(x,x2) & E(y,x))")).unwrap(),
            2
        );
        let layed_f2 = lay(&f_k(2)).unwrap();
        assert_eq!(thickness_layered(&layed_f2).unwrap(), 3);
    }

    #[test]
    fn thickness_requires_layered_input() {
        assert!(matches!(
            thickness_layered(&p("exists x. E(y,y)")),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn thickness_of_f_k_is_k_plus_one() {
        for k in 1..=5 {
            assert_eq!(thickness(&f_k(k)).unwrap(), k + 1, "F_{k}");
        }
    }

    #[test]
    fn thickness_of_small_formulas() {
        assert_eq!(thickness(&p("E(x,y)")).unwrap(), 2);
        assert_eq!(thickness(&chain_example()).unwrap(), 2);
    }

    #[test]
    fn thickness_is_dual_invariant() {
        let cfg = gen::GenConfig::default();
        let mut r = gen::rng(31);
        for _ in 0..60 {
            let f = gen::random_formula(&cfg, &mut r);
            assert_eq!(
                thickness(&f).unwrap(),
                thickness(&f.dual()).unwrap(),
                "duality broke on `{f}`"
            );
        }
    }

    #[test]
    fn thickness_is_replacement_invariant() {
        let cfg = gen::GenConfig::default();
        let tau = gen::test_signature(2);
        let mut r = gen::rng(37);
        for _ in 0..25 {
            let f = gen::random_formula(&cfg, &mut r);
            let t = thickness(&f).unwrap();
            for g in crate::normalize::enumerate_replacements(&f, &tau)
                .into_iter()
                .take(4)
            {
                assert_eq!(thickness(&g).unwrap(), t);
            }
        }
    }

    #[test]
    fn eliminate_last_variable_examples() {
        // eliminating z groups only the conjunct containing it
        let f = p("exists x z. (R(w,x) & S(x,z))");
        let h = block_hypergraph(&f).unwrap();
        let e = EliminationOrdering::fill_for_order(
            &h,
            vec![Variable::u("w"), Variable::u("x"), Variable::u("z")],
        );
        let (out, e2) = eliminate_last_variable(&f, &e).unwrap();
        assert_eq!(out, p("exists x. (R(w,x) & exists z. S(x,z))"));
        assert_eq!(e2.order().len(), 2);

        // the dual grouping drops the emptied block
        let g = p("forall y. (A(u,y) | B(u))");
        let hg = block_hypergraph(&g).unwrap();
        let eg =
            EliminationOrdering::fill_for_order(&hg, vec![Variable::u("u"), Variable::u("y")]);
        let (out2, _) = eliminate_last_variable(&g, &eg).unwrap();
        assert_eq!(out2, p("B(u) | forall y. A(u,y)"));

        // singleton block with a single member: the quantifier is pushed in
        let s = p("exists v. A(u,v)");
        let hs = block_hypergraph(&s).unwrap();
        let es =
            EliminationOrdering::fill_for_order(&hs, vec![Variable::u("u"), Variable::u("v")]);
        let (out3, _) = eliminate_last_variable(&s, &es).unwrap();
        assert_eq!(out3, p("exists v. A(u,v)"));
    }

    #[test]
    fn eliminate_rejects_bad_orderings() {
        let f = p("exists x z. (R(w,x) & S(x,z))");
        // ordering must start with the free variables
        let h = block_hypergraph(&f).unwrap();
        let bad = EliminationOrdering::fill_for_order(
            &h,
            vec![Variable::u("x"), Variable::u("w"), Variable::u("z")],
        );
        assert!(eliminate_last_variable(&f, &bad).is_err());
    }

    #[test]
    fn minimize_f2_uses_three_variables_and_stays_equivalent() {
        let f2 = f_k(2);
        let min = minimize_variables(&f2).unwrap();
        assert_eq!(min.all_variables().len(), 3);
        assert_eq!(thickness(&f2).unwrap(), 3);
        // exhaustive over |B| <= 2, plus random |B| = 3
        for s in gen::all_structures(&f_k_signature(2), 1) {
            assert_eq!(gen::naive_disagreement(&f2, &min, &s).unwrap(), None);
        }
        for s in gen::all_structures(&f_k_signature(2), 2) {
            assert_eq!(gen::naive_disagreement(&f2, &min, &s).unwrap(), None);
        }
        let mut r = gen::rng(41);
        for _ in 0..25 {
            let s = gen::random_structure(&f_k_signature(2), 3, &mut r);
            assert_eq!(gen::naive_disagreement(&f2, &min, &s).unwrap(), None);
        }
    }

    #[test]
    fn minimize_keeps_atoms_untouched() {
        let atom = p("E(x,y)");
        assert_eq!(minimize_variables(&atom).unwrap(), atom);
    }

    #[test]
    fn minimize_chain_to_two_variables() {
        let chain = chain_example();
        let min = minimize_variables(&chain).unwrap();
        assert_eq!(thickness(&chain).unwrap(), 2);
        assert!(min.all_variables().len() <= 2, "got `{min}`");
        for s in gen::all_structures(&chain_signature(), 2) {
            assert_eq!(gen::naive_disagreement(&chain, &min, &s).unwrap(), None);
        }
        let mut r = gen::rng(43);
        for _ in 0..25 {
            let s = gen::random_structure(&chain_signature(), 3, &mut r);
            assert_eq!(gen::naive_disagreement(&chain, &min, &s).unwrap(), None);
        }
    }

    #[test]
    fn minimize_bound_and_equivalence_on_random_sentences() {
        let cfg = gen::GenConfig::default();
        let mut r = gen::rng(47);
        for _ in 0..60 {
            let f = gen::random_sentence(&cfg, &mut r);
            let t = thickness(&f).unwrap();
            let min = minimize_variables(&f).unwrap();
            assert!(
                min.all_variables().len() <= t,
                "`{f}` minimized to `{min}` with {} > thickness {t}",
                min.all_variables().len()
            );
            let s = gen::random_structure(&gen::test_signature(2), 3, &mut r);
            assert_eq!(
                gen::naive_disagreement(&f, &min, &s).unwrap(),
                None,
                "minimize changed the meaning of `{f}`"
            );
        }
    }

    #[test]
    fn report_bounds_are_internally_consistent() {
        let cfg = gen::GenConfig::default();
        let mut r = gen::rng(103);
        for _ in 0..40 {
            let f = gen::random_formula(&cfg, &mut r);
            let rep = analyze(&f).unwrap();
            assert!(rep.thickness >= 1);
            for node in &rep.per_node {
                assert!(rep.thickness >= node.local);
            }
            // thickness never exceeds the largest leaf variable count
            let layed = lay(&f).unwrap();
            let max_leaf_vars = positively_combined_subformulas(&layed)
                .iter()
                .map(|(_, l)| l.all_variables().len())
                .max()
                .unwrap_or(0);
            assert!(rep.thickness <= max_leaf_vars.max(1));
        }
    }

    #[test]
    fn analyze_reports_the_measures() {
        let rep = analyze(&chain_example()).unwrap();
        assert_eq!(rep.thickness, 2);
        assert_eq!(rep.width_before, 3);
        assert!(rep.width_after <= 2);
        assert!(rep.variables_used_after <= 2);
        assert!(!rep.per_node.is_empty());
        let locals: Vec<usize> = rep.per_node.iter().map(|n| n.local).collect();
        assert!(locals.contains(&2));
    }
}
