//! Structure transformations for the hardness constructions: filling context
//! relations full or empty, complementing negated symbols, the fully-sorted
//! view of a friendly sentence, sort collapse through surjections, the
//! accordion step, and the clique gadget.
//!
//! Every operation here is a concrete input-to-instance map whose defining
//! equivalence is checkable with the naive oracle; the test suites do
//! exactly that. All maps assume nonempty universes.

use std::collections::{BTreeMap, BTreeSet};

use crate::hypergraph::Graph;
use crate::logic::{Formula, Quantifier, Signature, Structure, Variable};
use crate::{Error, Result};

/// Reserved prefix for the fresh binary symbols of the accordion relation.
pub const ACCORDION_PREFIX: &str = "__acc_";
/// Delimiter inside composite universe elements `E|u|a`.
pub const ELEMENT_DELIMITER: char = '|';

/// A subformula `Q X (α1 ⊙ ... ⊙ αn)` whose members are all atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleSubformula {
    pub path: Vec<usize>,
    pub quantifier: Quantifier,
    pub quantified: BTreeSet<Variable>,
    pub free: BTreeSet<Variable>,
}

/// All simple subformulas of `f`, in depth-first order.
pub fn simple_subformulas(f: &Formula) -> Vec<SimpleSubformula> {
    f.subformulas()
        .into_iter()
        .filter_map(|(path, sub)| {
            let Formula::Quant { q, vars, body } = sub else {
                return None;
            };
            let parts = match q {
                Quantifier::Exists => body.and_parts(),
                Quantifier::Forall => body.or_parts(),
            };
            if !parts.iter().all(|p| matches!(p, Formula::Atom { .. })) {
                return None;
            }
            Some(SimpleSubformula {
                path,
                quantifier: *q,
                quantified: vars.iter().cloned().collect(),
                free: sub.free_vars(),
            })
        })
        .collect()
}

/// How a formula must evaluate for the context of a distinguished subformula
/// to become transparent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Forced {
    True,
    False,
}

impl Forced {
    fn flip(self) -> Forced {
        match self {
            Forced::True => Forced::False,
            Forced::False => Forced::True,
        }
    }
}

/// Collects, for every relation symbol of `f`, whether its atoms must be
/// made full or empty so that `f` evaluates to `target` under every
/// assignment (universes nonempty).
fn force_subtree(
    f: &Formula,
    target: Forced,
    out: &mut BTreeMap<String, Forced>,
) -> Result<()> {
    match f {
        Formula::Atom { relation, args: _ } => {
            if out.insert(relation.clone(), target).is_some_and(|prev| prev != target) {
                return Err(Error::SymbolCollision(format!(
                    "symbol `{relation}` would need to be both full and empty"
                )));
            }
            Ok(())
        }
        Formula::Not(inner) => force_subtree(inner, target.flip(), out),
        Formula::And(l, r) | Formula::Or(l, r) => {
            force_subtree(l, target, out)?;
            force_subtree(r, target, out)
        }
        Formula::Quant { body, .. } => force_subtree(body, target, out),
    }
}

/// Walks from the root to `path`, forcing each passed sibling: conjunct
/// siblings true, disjunct siblings false. Quantifier and connective nodes
/// may appear on the path, negations may not.
fn force_context(
    f: &Formula,
    path: &[usize],
    out: &mut BTreeMap<String, Forced>,
) -> Result<()> {
    if path.is_empty() {
        return Ok(());
    }
    let (i, rest) = (path[0], &path[1..]);
    match (f, i) {
        (Formula::And(l, r), 0) => {
            force_subtree(r, Forced::True, out)?;
            force_context(l, rest, out)
        }
        (Formula::And(l, r), 1) => {
            force_subtree(l, Forced::True, out)?;
            force_context(r, rest, out)
        }
        (Formula::Or(l, r), 0) => {
            force_subtree(r, Forced::False, out)?;
            force_context(l, rest, out)
        }
        (Formula::Or(l, r), 1) => {
            force_subtree(l, Forced::False, out)?;
            force_context(r, rest, out)
        }
        (Formula::Quant { body, .. }, 0) => force_context(body, rest, out),
        (Formula::Not(_), _) => Err(Error::Precondition(
            "negation above the distinguished subformula".into(),
        )),
        _ => Err(Error::BadPath(path.to_vec())),
    }
}

fn apply_forced(
    base: &Structure,
    sig: &Signature,
    forced: &BTreeMap<String, Forced>,
) -> Result<Structure> {
    let mut interpretations = base.interpretations().clone();
    for (symbol, f) in forced {
        let arity = sig.arity(symbol)?.to_vec();
        let tuples = match f {
            Forced::True => base.full_relation(&arity),
            Forced::False => BTreeSet::new(),
        };
        interpretations.insert(symbol.clone(), tuples);
    }
    for name in sig.relations().keys() {
        interpretations.entry(name.clone()).or_default();
    }
    Structure::new(sig.clone(), base.universes().clone(), interpretations)
}

/// Extends `base` (which interprets the symbols of the subformula at
/// `sub_path`) with full or empty interpretations for every other symbol of
/// `f`, chosen by the polarity of the connectives on the path, so that
/// `base ⊨ f[sub_path] iff result ⊨ f` (all universes nonempty).
///
/// `f` must be symbol-loose and the subformula positively combined (only
/// conjunctions and disjunctions above it).
pub fn fill_trivial_relations(
    f: &Formula,
    sub_path: &[usize],
    base: &Structure,
) -> Result<Structure> {
    if !f.is_symbol_loose() {
        return Err(Error::SymbolCollision(
            "fill_trivial_relations requires a symbol-loose formula".into(),
        ));
    }
    // positively combined: only connectives on the path
    let mut cur = f;
    for &i in sub_path {
        match cur {
            Formula::And(..) | Formula::Or(..) => {}
            _ => {
                return Err(Error::Precondition(
                    "subformula is not positively combined".into(),
                ))
            }
        }
        cur = cur.at_path(&[i])?;
    }
    for sort in f_sorts(f) {
        if base.universe(&sort)?.is_empty() {
            return Err(Error::EmptyUniverse(sort));
        }
    }
    let mut forced = BTreeMap::new();
    force_context(f, sub_path, &mut forced)?;
    let sig = signature_of(f, base)?;
    apply_forced(base, &sig, &forced)
}

fn f_sorts(f: &Formula) -> BTreeSet<String> {
    f.all_variables().into_iter().map(|v| v.sort).collect()
}

/// Signature covering every atom of `f`, reusing `base`'s declarations and
/// deriving arities of new symbols from the sorts of their arguments.
fn signature_of(f: &Formula, base: &Structure) -> Result<Signature> {
    let mut sig = base.signature().clone();
    for (rel, args) in f.atoms() {
        let word: Vec<String> = args.iter().map(|v| v.sort.clone()).collect();
        match sig.arity(rel) {
            Ok(existing) => {
                if existing != word.as_slice() {
                    return Err(Error::SortMismatch(format!(
                        "atom `{rel}` disagrees with the declared arity"
                    )));
                }
            }
            Err(_) => sig.add_relation(rel, word)?,
        }
    }
    Ok(sig)
}

/// Drops the negations of a loose layered formula and complements exactly
/// the negated symbols: `B ⊨ f iff B' ⊨ result` assignment-wise.
pub fn complement_structure(f: &Formula, b: &Structure) -> Result<(Formula, Structure)> {
    if !f.is_symbol_loose() {
        return Err(Error::SymbolCollision(
            "complement_structure requires a symbol-loose formula".into(),
        ));
    }
    let mut negated = BTreeSet::new();
    collect_negated(f, &mut negated)?;
    let positive = drop_negations(f);
    let mut interpretations = b.interpretations().clone();
    for symbol in &negated {
        let arity = b.signature().arity(symbol)?.to_vec();
        let full = b.full_relation(&arity);
        let old = b.tuples(symbol)?;
        let complement: BTreeSet<Vec<String>> = full.difference(old).cloned().collect();
        interpretations.insert(symbol.clone(), complement);
    }
    let out = Structure::new(b.signature().clone(), b.universes().clone(), interpretations)?;
    Ok((positive, out))
}

fn collect_negated(f: &Formula, out: &mut BTreeSet<String>) -> Result<()> {
    match f {
        Formula::Atom { .. } => Ok(()),
        Formula::Not(inner) => match &**inner {
            Formula::Atom { relation, .. } => {
                out.insert(relation.clone());
                Ok(())
            }
            _ => Err(Error::Precondition(
                "negations must sit directly on atoms".into(),
            )),
        },
        Formula::And(l, r) | Formula::Or(l, r) => {
            collect_negated(l, out)?;
            collect_negated(r, out)
        }
        Formula::Quant { body, .. } => collect_negated(body, out),
    }
}

fn drop_negations(f: &Formula) -> Formula {
    match f {
        Formula::Atom { .. } => f.clone(),
        Formula::Not(inner) => (**inner).clone(),
        Formula::And(l, r) => Formula::and(drop_negations(l), drop_negations(r)),
        Formula::Or(l, r) => Formula::or(drop_negations(l), drop_negations(r)),
        Formula::Quant { q, vars, body } => {
            Formula::quant(*q, vars.clone(), drop_negations(body))
        }
    }
}

/// The natural fully-sorted form of a one-sorted friendly formula: each
/// variable becomes its own sort and `ar(R)` is the variable word of the
/// unique `R`-atom. Atoms repeating a variable are rejected.
pub fn full_sort(f: &Formula) -> Result<(Formula, Signature)> {
    if !f.is_symbol_loose() {
        return Err(Error::SymbolCollision(
            "full_sort requires a symbol-loose formula".into(),
        ));
    }
    let mut relations = BTreeMap::new();
    for (rel, args) in f.atoms() {
        let distinct: BTreeSet<&Variable> = args.iter().collect();
        if distinct.len() != args.len() {
            return Err(Error::Precondition(format!(
                "atom `{rel}` repeats a variable; fully-sorted atoms need distinct variables"
            )));
        }
        relations.insert(
            rel.to_owned(),
            args.iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
        );
    }
    let sorts: BTreeSet<String> = f.all_variables().into_iter().map(|v| v.name).collect();
    let sig = Signature::new(sorts, relations)?;
    Ok((resort(f), sig))
}

fn resort(f: &Formula) -> Formula {
    let own_sort = |v: &Variable| Variable::new(v.name.clone(), v.name.clone());
    match f {
        Formula::Atom { relation, args } => {
            Formula::atom(relation.clone(), args.iter().map(own_sort).collect())
        }
        Formula::Not(inner) => Formula::not(resort(inner)),
        Formula::And(l, r) => Formula::and(resort(l), resort(r)),
        Formula::Or(l, r) => Formula::or(resort(l), resort(r)),
        Formula::Quant { q, vars, body } => {
            Formula::quant(*q, vars.iter().map(own_sort).collect(), resort(body))
        }
    }
}

/// Collapses a multi-sorted structure over the signature of `full_sort(f)`
/// into a one-sorted structure over `f`'s signature: the new universe has
/// the cardinality of the largest sort, and each relation becomes the
/// preimage under componentwise surjections.
pub fn collapse_sorts(f: &Formula, b: &Structure) -> Result<Structure> {
    let (_, fsig) = full_sort(f)?;
    for (name, arity) in fsig.relations() {
        if b.signature().arity(name)? != arity.as_slice() {
            return Err(Error::SortMismatch(format!(
                "structure arity of `{name}` does not match the fully-sorted signature"
            )));
        }
    }
    for (sort, universe) in b.universes() {
        if universe.is_empty() {
            return Err(Error::EmptyUniverse(sort.clone()));
        }
    }

    // collapsed universe: the largest sort's universe (ties to the
    // lexicographically least sort); identity when all universes coincide
    let max = b.max_universe_size();
    let host = b
        .universes()
        .iter()
        .find(|(_, u)| u.len() == max)
        .map(|(s, _)| s.clone())
        .ok_or_else(|| Error::InvalidStructure("structure has no sorts".into()))?;
    let collapsed: Vec<String> = b.universe(&host)?.iter().cloned().collect();

    // surjection per sort: position-wise over the sorted universes, elements
    // beyond the target size map to the last element
    let mut surjections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for (sort, universe) in b.universes() {
        let target: Vec<&String> = universe.iter().collect();
        let map = collapsed
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), target[i.min(target.len() - 1)].clone()))
            .collect();
        surjections.insert(sort.clone(), map);
    }

    let one_sig = one_sorted_signature(f)?;
    let mut interpretations: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();
    for (name, sorted_arity) in fsig.relations() {
        let source = b.tuples(name)?;
        let k = sorted_arity.len();
        let mut tuples = BTreeSet::new();
        let mut stack: Vec<Vec<String>> = vec![vec![]];
        for _ in 0..k {
            let mut next = Vec::new();
            for t in &stack {
                for e in &collapsed {
                    let mut t2 = t.clone();
                    t2.push(e.clone());
                    next.push(t2);
                }
            }
            stack = next;
        }
        for t in stack {
            let image: Vec<String> = t
                .iter()
                .zip(sorted_arity)
                .map(|(e, sort)| surjections[sort][e].clone())
                .collect();
            if source.contains(&image) {
                tuples.insert(t);
            }
        }
        interpretations.insert(name.clone(), tuples);
    }
    Structure::one_sorted(one_sig, collapsed, interpretations)
}

fn one_sorted_signature(f: &Formula) -> Result<Signature> {
    let mut rels: BTreeMap<String, usize> = BTreeMap::new();
    for (rel, args) in f.atoms() {
        if let Some(prev) = rels.insert(rel.to_owned(), args.len()) {
            if prev != args.len() {
                return Err(Error::ArityMismatch {
                    relation: rel.to_owned(),
                    expected: prev,
                    got: args.len(),
                });
            }
        }
    }
    Ok(Signature::one_sorted(rels))
}

/// Which case of the closure relation links a pair of sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccordionCase {
    /// `psi` is the sentence based on the simple subformula at `path`
    Based { path: Vec<usize> },
    /// the simple subformula at `path` was replaced by a combination of
    /// fresh binary atoms over all pairs of its free variables
    PairAtoms { path: Vec<usize>, symbols: Vec<String> },
}

/// Locates the relation between `psi` and `phi`: either `psi` is a sentence
/// based on a simple subformula of `phi`, or `psi` is `phi` with a simple
/// subformula replaced by the pair-atom combination over its free variables.
pub fn match_accordion_case(psi: &Formula, phi: &Formula) -> Result<AccordionCase> {
    if !phi.is_symbol_loose() {
        return Err(Error::SymbolCollision(
            "accordion sentences must be symbol-loose".into(),
        ));
    }
    for simple in simple_subformulas(phi) {
        let sub = phi.at_path(&simple.path).expect("path from enumeration");
        // cases 2 and 3: in-place replacement by pair atoms. The pair
        // construction is sound only for layered subformulas: the block
        // variables must be tied together by the atom hypergraph, otherwise
        // different atoms could pick different composite witnesses.
        if crate::normalize::is_layered(sub) {
            if let Ok(candidate) = psi.at_path(&simple.path) {
                if let Some(symbols) = pair_atom_match(candidate, &simple) {
                    let rest = phi
                        .replace_at_path(&simple.path, candidate.clone())
                        .expect("path valid");
                    if &rest == psi && symbols_fresh(&symbols, psi, &simple.path) {
                        return Ok(AccordionCase::PairAtoms {
                            path: simple.path,
                            symbols,
                        });
                    }
                }
            }
        }
        // case 1: a standalone based sentence
        if let Some(based) = based_sentence(sub) {
            if &based == psi {
                return Ok(AccordionCase::Based { path: simple.path });
            }
        }
    }
    Err(Error::Precondition(
        "the sentences are not related by the accordion closure".into(),
    ))
}

/// Checks that `candidate` is the `Q`-dual combination of binary atoms over
/// exactly the pairs of the simple subformula's free variables, returning
/// the symbols in pair order.
fn pair_atom_match(candidate: &Formula, simple: &SimpleSubformula) -> Option<Vec<String>> {
    let free: Vec<&Variable> = simple.free.iter().collect();
    if free.len() < 2 {
        return None;
    }
    let parts = match simple.quantifier {
        Quantifier::Exists => candidate.or_parts(),
        Quantifier::Forall => candidate.and_parts(),
    };
    let mut expected: BTreeSet<(Variable, Variable)> = BTreeSet::new();
    for i in 0..free.len() {
        for j in i + 1..free.len() {
            expected.insert((free[i].clone(), free[j].clone()));
        }
    }
    if parts.len() != expected.len() {
        return None;
    }
    let mut symbols = Vec::new();
    let mut seen = BTreeSet::new();
    for p in parts {
        let Formula::Atom { relation, args } = p else {
            return None;
        };
        if args.len() != 2 || args[0] == args[1] {
            return None;
        }
        let pair = if args[0] < args[1] {
            (args[0].clone(), args[1].clone())
        } else {
            (args[1].clone(), args[0].clone())
        };
        if !expected.remove(&pair) || !seen.insert(relation.clone()) {
            return None;
        }
        symbols.push(relation.clone());
    }
    expected.is_empty().then_some(symbols)
}

fn symbols_fresh(symbols: &[String], psi: &Formula, path: &[usize]) -> bool {
    // fresh: the symbols occur nowhere in psi outside the replaced position
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (rel, _) in psi.atoms() {
        *counts.entry(rel).or_insert(0) += 1;
    }
    let inside = psi.at_path(path).expect("path valid");
    let mut inside_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (rel, _) in inside.atoms() {
        *inside_counts.entry(rel).or_insert(0) += 1;
    }
    symbols
        .iter()
        .all(|s| counts.get(s.as_str()) == inside_counts.get(s.as_str()))
}

/// Builds the closure partner of `phi` for cases 2 and 3: the simple
/// subformula at `path` is replaced by the disjunction (existential case) or
/// conjunction (universal case) of fresh binary atoms `__acc_E1, ...` over
/// all pairs of its free variables. Returns the rewritten sentence and the
/// fresh symbols in pair order.
pub fn replace_with_pair_atoms(phi: &Formula, path: &[usize]) -> Result<(Formula, Vec<String>)> {
    for (rel, _) in phi.atoms() {
        if rel.starts_with(ACCORDION_PREFIX) {
            return Err(Error::SymbolCollision(format!(
                "input already uses the reserved prefix `{ACCORDION_PREFIX}` in `{rel}`"
            )));
        }
    }
    let sub = phi.at_path(path)?;
    let Formula::Quant { q, .. } = sub else {
        return Err(Error::Precondition("path must address a quantifier block".into()));
    };
    let free: Vec<Variable> = sub.free_vars().into_iter().collect();
    if free.len() < 2 {
        return Err(Error::Precondition(
            "the subformula needs at least two free variables".into(),
        ));
    }
    let mut atoms = Vec::new();
    let mut symbols = Vec::new();
    let mut counter = 1usize;
    for i in 0..free.len() {
        for j in i + 1..free.len() {
            let symbol = format!("{ACCORDION_PREFIX}E{counter}");
            counter += 1;
            atoms.push(Formula::atom(
                symbol.clone(),
                vec![free[i].clone(), free[j].clone()],
            ));
            symbols.push(symbol);
        }
    }
    let combo = match q {
        Quantifier::Exists => Formula::big_or(atoms),
        Quantifier::Forall => Formula::big_and(atoms),
    };
    let psi = phi.replace_at_path(path, combo)?;
    Ok((psi, symbols))
}

/// The sentence based on a simple subformula: every atom keeps its symbol
/// but drops the argument positions outside the quantified set.
pub fn based_sentence(simple: &Formula) -> Option<Formula> {
    let Formula::Quant { q, vars, body } = simple else {
        return None;
    };
    let block: BTreeSet<&Variable> = vars.iter().collect();
    let parts = match q {
        Quantifier::Exists => body.and_parts(),
        Quantifier::Forall => body.or_parts(),
    };
    let mut atoms = Vec::new();
    for p in parts {
        let Formula::Atom { relation, args } = p else {
            return None;
        };
        let mut kept: Vec<Variable> = Vec::new();
        for a in args {
            if block.contains(a) && !kept.contains(a) {
                kept.push(a.clone());
            }
        }
        if kept.is_empty() {
            return None; // based atom would be nullary
        }
        atoms.push(Formula::atom(relation.clone(), kept));
    }
    let body = match q {
        Quantifier::Exists => Formula::big_and(atoms),
        Quantifier::Forall => Formula::big_or(atoms),
    };
    Some(Formula::quant(*q, vars.clone(), body))
}

/// One accordion step: given `(psi, phi)` in the closure relation and a
/// structure `a` over `psi`'s signature, builds a structure `b` over `phi`'s
/// signature with `a ⊨ psi iff b ⊨ phi`. The output's largest universe is
/// checked against the measure-linearity bound
/// `|V|^2 * |free(phi')| * max|A_u|`.
pub fn accordion_step(psi: &Formula, phi: &Formula, a: &Structure) -> Result<Structure> {
    let case = match_accordion_case(psi, phi)?;
    let measure_in = a.max_universe_size().max(1);
    let out = match &case {
        AccordionCase::Based { path } => accordion_based(phi, path, a)?,
        AccordionCase::PairAtoms { path, symbols } => {
            let sub = phi.at_path(path)?;
            let Formula::Quant { q, .. } = sub else {
                unreachable!("simple subformulas are blocks");
            };
            match q {
                Quantifier::Exists => accordion_pairs(phi, path, symbols, a, false)?,
                Quantifier::Forall => accordion_pairs(phi, path, symbols, a, true)?,
            }
        }
    };
    let bound = match &case {
        AccordionCase::Based { .. } => measure_in,
        AccordionCase::PairAtoms { path, .. } => {
            let sub = phi.at_path(path)?;
            let Formula::Quant { vars, .. } = sub else {
                unreachable!()
            };
            let v = vars.len();
            let free = sub.free_vars().len();
            v * v * free * measure_in
        }
    };
    if out.max_universe_size() > bound {
        return Err(Error::MeasureBound(format!(
            "output universe {} exceeds {}",
            out.max_universe_size(),
            bound
        )));
    }
    Ok(out)
}

/// Case 1: sorts quantified in the based sentence keep their universes, all
/// other sorts of `phi` collapse to a single point, atoms of the simple
/// subformula become cylinders over the based relations, and the context is
/// filled by polarity.
fn accordion_based(phi: &Formula, path: &[usize], a: &Structure) -> Result<Structure> {
    let sub = phi.at_path(path)?;
    let Formula::Quant { q, vars, body } = sub else {
        unreachable!("simple subformulas are blocks");
    };
    let block: BTreeSet<&Variable> = vars.iter().collect();
    let point = "_".to_owned();

    let mut universes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for sort in f_sorts(phi) {
        universes.insert(sort, BTreeSet::from([point.clone()]));
    }
    for v in vars {
        let u = a.universe(&v.sort)?;
        if u.is_empty() {
            return Err(Error::EmptyUniverse(v.sort.clone()));
        }
        universes.insert(v.sort.clone(), u.clone());
    }

    let sig = full_signature_of(phi)?;
    let mut interpretations: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();

    // cylinders over the based relations for the atoms of the subformula
    let parts = match q {
        Quantifier::Exists => body.and_parts(),
        Quantifier::Forall => body.or_parts(),
    };
    for p in parts {
        let Formula::Atom { relation, args } = p else {
            unreachable!("simple subformulas contain only atoms");
        };
        let based_args: Vec<&Variable> = {
            let mut kept = Vec::new();
            for arg in args {
                if block.contains(arg) && !kept.contains(&arg) {
                    kept.push(arg);
                }
            }
            kept
        };
        let source = a.tuples(relation)?;
        let mut tuples = BTreeSet::new();
        for t in product(&universes, args)? {
            let restricted: Vec<String> = based_args
                .iter()
                .map(|v| {
                    let i = args.iter().position(|u| u == *v).expect("arg present");
                    t[i].clone()
                })
                .collect();
            if source.contains(&restricted) {
                tuples.insert(t);
            }
        }
        interpretations.insert(relation.clone(), tuples);
    }

    let mut forced = BTreeMap::new();
    force_context(phi, path, &mut forced)?;
    let base = Structure::new(sig.clone(), universes, prefill(&sig, interpretations))?;
    apply_forced(&base, &sig, &forced)
}

fn prefill(
    sig: &Signature,
    mut interpretations: BTreeMap<String, BTreeSet<Vec<String>>>,
) -> BTreeMap<String, BTreeSet<Vec<String>>> {
    for name in sig.relations().keys() {
        interpretations.entry(name.clone()).or_default();
    }
    interpretations
}

/// Cases 2 and 3. For the existential case (`dual = false`), the quantified
/// sorts receive the composite universe `(E, u, a)` and each inside atom
/// holds exactly when all its quantified coordinates agree on a composite
/// element `(E, u, a)` whose context constraints are met. The universal case
/// is the formal dual: pair relations are complemented, the existential
/// construction is applied, and the inside relations are complemented back.
fn accordion_pairs(
    phi: &Formula,
    path: &[usize],
    symbols: &[String],
    a: &Structure,
    dual: bool,
) -> Result<Structure> {
    for universe in a.universes().values() {
        for e in universe {
            if e.contains(ELEMENT_DELIMITER) {
                return Err(Error::InvalidStructure(format!(
                    "element `{e}` contains the reserved delimiter"
                )));
            }
        }
    }
    let sub = phi.at_path(path)?;
    let Formula::Quant { q, vars, body } = sub else {
        unreachable!()
    };
    let block: BTreeSet<&Variable> = vars.iter().collect();
    for v in vars {
        if a.universes().contains_key(&v.sort) {
            return Err(Error::SymbolCollision(format!(
                "quantified sort `{}` already interpreted by the input structure",
                v.sort
            )));
        }
    }
    let free: Vec<Variable> = sub.free_vars().into_iter().collect();
    let pairs: Vec<(Variable, Variable)> = {
        let mut out = Vec::new();
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                out.push((free[i].clone(), free[j].clone()));
            }
        }
        out
    };
    debug_assert_eq!(pairs.len(), symbols.len());

    // pair relation per symbol, in the coordinate order of the psi-atom;
    // complemented in the dual case
    let mut pair_rel: BTreeMap<usize, BTreeSet<Vec<String>>> = BTreeMap::new();
    for (idx, symbol) in symbols.iter().enumerate() {
        let arity = a.signature().arity(symbol)?.to_vec();
        let tuples = a.tuples(symbol)?.clone();
        let rel = if dual {
            a.full_relation(&arity).difference(&tuples).cloned().collect()
        } else {
            tuples
        };
        pair_rel.insert(idx, rel);
    }
    // which (pair index, endpoint) a composite element carries
    #[derive(Clone)]
    struct CompositeElem {
        pair: usize,
        endpoint: Variable,
        value: String,
    }
    let mut composites: Vec<(String, CompositeElem)> = Vec::new();
    for (idx, symbol) in symbols.iter().enumerate() {
        let (w1, w2) = &pairs[idx];
        for endpoint in [w1, w2] {
            for value in a.universe(&endpoint.sort)? {
                let encoded = format!(
                    "{symbol}{ELEMENT_DELIMITER}{}{ELEMENT_DELIMITER}{value}",
                    endpoint.name
                );
                composites.push((
                    encoded,
                    CompositeElem {
                        pair: idx,
                        endpoint: endpoint.clone(),
                        value: value.clone(),
                    },
                ));
            }
        }
    }
    let composite_universe: BTreeSet<String> =
        composites.iter().map(|(e, _)| e.clone()).collect();
    let decode: BTreeMap<&String, &CompositeElem> =
        composites.iter().map(|(e, c)| (e, c)).collect();

    let mut universes: BTreeMap<String, BTreeSet<String>> = a.universes().clone();
    for v in vars {
        universes.insert(v.sort.clone(), composite_universe.clone());
    }
    // context sorts of phi that psi did not mention keep a singleton
    for sort in f_sorts(phi) {
        universes
            .entry(sort)
            .or_insert_with(|| BTreeSet::from(["_".to_owned()]));
    }

    let sig = full_signature_of(phi)?;
    let mut interpretations: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();

    // atoms outside the subformula keep their interpretation
    let outside = phi.replace_at_path(path, Formula::atom("__hole", vec![]))?;
    for (rel, _) in outside.atoms() {
        if rel == "__hole" {
            continue;
        }
        interpretations.insert(rel.to_owned(), a.tuples(rel)?.clone());
    }

    // atoms inside: the two membership conditions
    let parts = match q {
        Quantifier::Exists => body.and_parts(),
        Quantifier::Forall => body.or_parts(),
    };
    for p in parts {
        let Formula::Atom { relation, args } = p else {
            unreachable!()
        };
        let arity: Vec<String> = args.iter().map(|v| v.sort.clone()).collect();
        let mut tuples = BTreeSet::new();
        'tuple: for t in product_over(&universes, &arity) {
            // all quantified coordinates must carry the same composite
            let mut composite: Option<&CompositeElem> = None;
            for (i, arg) in args.iter().enumerate() {
                if block.contains(arg) {
                    let c = decode[&t[i]];
                    match composite {
                        None => composite = Some(c),
                        Some(prev) => {
                            if prev.pair != c.pair
                                || prev.endpoint != c.endpoint
                                || prev.value != c.value
                            {
                                continue 'tuple;
                            }
                        }
                    }
                }
            }
            if let Some(c) = composite {
                let (w1, w2) = &pairs[c.pair];
                for (j, arg) in args.iter().enumerate() {
                    if block.contains(arg) {
                        continue;
                    }
                    // context coordinate against the carried endpoint
                    if *arg == c.endpoint && t[j] != c.value {
                        continue 'tuple;
                    }
                    let is_pair = (arg == w1 && c.endpoint == *w2)
                        || (arg == w2 && c.endpoint == *w1);
                    if is_pair {
                        // coordinate order of the psi-atom: (w1, w2)
                        let tuple = if c.endpoint == *w1 {
                            vec![c.value.clone(), t[j].clone()]
                        } else {
                            vec![t[j].clone(), c.value.clone()]
                        };
                        if !pair_rel[&c.pair].contains(&tuple) {
                            continue 'tuple;
                        }
                    }
                }
            }
            tuples.insert(t);
        }
        if dual {
            let full = product_over(&universes, &arity).into_iter().collect::<BTreeSet<_>>();
            tuples = full.difference(&tuples).cloned().collect();
        }
        interpretations.insert(relation.clone(), tuples);
    }

    Structure::new(sig.clone(), universes, prefill(&sig, interpretations))
}

fn product(
    universes: &BTreeMap<String, BTreeSet<String>>,
    args: &[Variable],
) -> Result<Vec<Vec<String>>> {
    let arity: Vec<String> = args.iter().map(|v| v.sort.clone()).collect();
    Ok(product_over(universes, &arity))
}

fn product_over(universes: &BTreeMap<String, BTreeSet<String>>, arity: &[String]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![vec![]];
    for sort in arity {
        let universe = match universes.get(sort) {
            Some(u) => u,
            None => return Vec::new(),
        };
        let mut next = Vec::with_capacity(out.len() * universe.len());
        for t in &out {
            for e in universe {
                let mut t2 = t.clone();
                t2.push(e.clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Signature of `phi` derived from its atoms (multi-sorted as written).
fn full_signature_of(phi: &Formula) -> Result<Signature> {
    let mut relations: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (rel, args) in phi.atoms() {
        let word: Vec<String> = args.iter().map(|v| v.sort.clone()).collect();
        if let Some(prev) = relations.insert(rel.to_owned(), word.clone()) {
            if prev != word {
                return Err(Error::SortMismatch(format!(
                    "symbol `{rel}` used with two different sort words"
                )));
            }
        }
    }
    let sorts: BTreeSet<String> = phi.all_variables().into_iter().map(|v| v.sort).collect();
    let mut all_sorts = sorts;
    for word in relations.values() {
        all_sorts.extend(word.iter().cloned());
    }
    Signature::new(all_sorts, relations)
}

/// A witness that a sentence contains an existential `k`-clique: a set of
/// existentially quantified variables every pair of which is covered by an
/// atom of one simple subformula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueWitness {
    pub vars: Vec<Variable>,
    /// indices of covering atoms within the simple subformula's member run
    pub atom_indices: Vec<usize>,
    pub path: Vec<usize>,
}

/// Searches the simple existential subformulas of `theta` for a set of at
/// least `k` existentially quantified variables whose pairs are all covered
/// by atoms; returns the first witness in depth-first order.
pub fn find_existential_clique(theta: &Formula, k: usize) -> Option<CliqueWitness> {
    let existential = existential_vars(theta);
    for simple in simple_subformulas(theta) {
        if simple.quantifier != Quantifier::Exists {
            continue;
        }
        let sub = theta.at_path(&simple.path).expect("enumerated path");
        let Formula::Quant { body, .. } = sub else {
            continue;
        };
        let atoms: Vec<&Formula> = body.and_parts();
        let mut coverage: Graph<Variable> = Graph::from_edges(Vec::new());
        for a in &atoms {
            let vars: Vec<Variable> = a
                .free_vars()
                .into_iter()
                .filter(|v| existential.contains(v))
                .collect();
            for i in 0..vars.len() {
                coverage.add_vertex(vars[i].clone());
                for j in i + 1..vars.len() {
                    coverage.add_edge(vars[i].clone(), vars[j].clone());
                }
            }
        }
        if let Some(clique) = coverage.find_k_clique(k) {
            let mut atom_indices = Vec::new();
            for i in 0..clique.len() {
                for j in i + 1..clique.len() {
                    let idx = atoms
                        .iter()
                        .position(|a| {
                            let fv = a.free_vars();
                            fv.contains(&clique[i]) && fv.contains(&clique[j])
                        })
                        .expect("coverage edge has a witnessing atom");
                    if !atom_indices.contains(&idx) {
                        atom_indices.push(idx);
                    }
                }
            }
            return Some(CliqueWitness {
                vars: clique,
                atom_indices,
                path: simple.path,
            });
        }
    }
    None
}

fn existential_vars(f: &Formula) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    collect_existential(f, &mut out);
    out
}

fn collect_existential(f: &Formula, out: &mut BTreeSet<Variable>) {
    match f {
        Formula::Atom { .. } => {}
        Formula::Not(inner) => collect_existential(inner, out),
        Formula::And(l, r) | Formula::Or(l, r) => {
            collect_existential(l, out);
            collect_existential(r, out);
        }
        Formula::Quant { q, vars, body } => {
            if matches!(q, Quantifier::Exists) {
                out.extend(vars.iter().cloned());
            }
            collect_existential(body, out);
        }
    }
}

/// Builds the clique-detection instance: a structure over `theta`'s
/// signature whose universes are the vertex set of `g`, interpreting the
/// witnessing pair atoms as the symmetrized edge relation and every other
/// symbol full or empty by polarity. Then `g` has a `k`-clique iff the
/// structure satisfies `theta`.
///
/// Requires a symbol-loose sentence whose witness pairs are covered by
/// binary atoms on exactly those pairs, and a nonempty graph.
pub fn clique_gadget(k: usize, theta: &Formula, g: &Graph<String>) -> Result<Structure> {
    if k < 2 {
        return Err(Error::Precondition("clique size must be at least 2".into()));
    }
    if !theta.free_vars().is_empty() {
        return Err(Error::Precondition("the query must be a sentence".into()));
    }
    if !theta.is_symbol_loose() {
        return Err(Error::SymbolCollision(
            "clique_gadget requires a symbol-loose sentence".into(),
        ));
    }
    if g.vertices().is_empty() {
        return Err(Error::Precondition("the graph must be nonempty".into()));
    }
    let existential = existential_vars(theta);
    let mut witness: Option<(Vec<usize>, Vec<Variable>, Vec<usize>)> = None;
    for simple in simple_subformulas(theta) {
        if simple.quantifier != Quantifier::Exists {
            continue;
        }
        let sub = theta.at_path(&simple.path).expect("enumerated path");
        let Formula::Quant { body, .. } = sub else {
            continue;
        };
        let atoms: Vec<&Formula> = body.and_parts();
        // coverage restricted to binary atoms on exactly the pair
        let mut coverage: Graph<Variable> = Graph::from_edges(Vec::new());
        for a in &atoms {
            if let Formula::Atom { args, .. } = a {
                if args.len() == 2
                    && args[0] != args[1]
                    && existential.contains(&args[0])
                    && existential.contains(&args[1])
                {
                    coverage.add_edge(args[0].clone(), args[1].clone());
                }
            }
        }
        if let Some(mut clique) = coverage.find_k_clique(k) {
            clique.truncate(k);
            let mut indices = Vec::new();
            for i in 0..clique.len() {
                for j in i + 1..clique.len() {
                    let idx = atoms
                        .iter()
                        .position(|a| match a {
                            Formula::Atom { args, .. } => {
                                args.len() == 2
                                    && ((args[0] == clique[i] && args[1] == clique[j])
                                        || (args[0] == clique[j] && args[1] == clique[i]))
                            }
                            _ => false,
                        })
                        .expect("clique edge has a binary atom");
                    indices.push(idx);
                }
            }
            witness = Some((simple.path.clone(), clique, indices));
            break;
        }
    }
    let Some((path, _clique, indices)) = witness else {
        return Err(Error::NoCliqueWitness { k });
    };

    // universes: every sort gets the vertex set
    let sig = full_signature_of(theta)?;
    let universes: BTreeMap<String, BTreeSet<String>> = sig
        .sorts()
        .iter()
        .map(|s| (s.clone(), g.vertices().clone()))
        .collect();

    // symmetrized edge relation for the witnessing symbols
    let sym_edges: BTreeSet<Vec<String>> = g
        .edges()
        .iter()
        .flat_map(|(a, b)| {
            [vec![a.clone(), b.clone()], vec![b.clone(), a.clone()]]
        })
        .collect();
    let sub = theta.at_path(&path)?;
    let Formula::Quant { q, body, .. } = sub else {
        unreachable!()
    };
    debug_assert!(matches!(q, Quantifier::Exists));
    let atoms: Vec<&Formula> = body.and_parts();
    let mut interpretations: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();
    let mut forced: BTreeMap<String, Forced> = BTreeMap::new();
    for (i, a) in atoms.iter().enumerate() {
        let Formula::Atom { relation, .. } = a else {
            unreachable!()
        };
        if indices.contains(&i) {
            interpretations.insert(relation.clone(), sym_edges.clone());
        } else {
            // non-witness conjunct inside the subformula: forced true
            forced.insert(relation.clone(), Forced::True);
        }
    }
    force_context(theta, &path, &mut forced)?;
    let base = Structure::new(sig.clone(), universes, prefill(&sig, interpretations))?;
    apply_forced(&base, &sig, &forced)
}
