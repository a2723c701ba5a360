//! Negation normal form, the equivalence-preserving syntactic
//! transformations, relation-symbol replacement, and the `organize` /
//! `layer` / `lay` normalization pipeline.
//!
//! `organize` rewrites any formula into a positive combination of organized
//! formulas (every quantifier sits directly over subformulas in which its
//! variable is free). `layer` merges adjacent same-quantifier blocks of an
//! organized formula into set quantifiers, producing a layered formula.
//! `lay` is their composition, applied at every positively combined leaf.
//! Outputs can be exponentially larger than inputs; callers cap input size.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::hypergraph::Hypergraph;
use crate::logic::{print_formula, Formula, Quantifier, Signature, Variable};
use crate::{Error, Result};

/// One rewrite of the transformation catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleTag {
    /// associativity/commutativity of a connective run (canonical reorder)
    Alpha,
    /// quantifier distribution over its dual connective
    Beta,
    /// splitting a quantifier off subformulas without the variable
    Gamma,
    /// distributivity of `&` over `|` and vice versa
    Delta,
    /// DeMorgan / quantifier negation push
    Epsilon,
    /// relation-symbol replacement
    Replacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

/// A single-step rewrite at a subformula path. Applying a step yields a
/// logically equivalent formula (for replacement: equivalent under the
/// induced symbol renaming).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: RuleTag,
    pub path: Vec<usize>,
    pub direction: Direction,
}

impl RewriteStep {
    pub fn forward(rule: RuleTag, path: Vec<usize>) -> Self {
        RewriteStep {
            rule,
            path,
            direction: Direction::Forward,
        }
    }
}

/// Negation normal form: negations appear only immediately above atoms.
pub fn nnf(f: &Formula) -> Formula {
    match f {
        Formula::Atom { .. } => f.clone(),
        Formula::Not(inner) => nnf_neg(inner),
        Formula::And(l, r) => Formula::and(nnf(l), nnf(r)),
        Formula::Or(l, r) => Formula::or(nnf(l), nnf(r)),
        Formula::Quant { q, vars, body } => Formula::quant(*q, vars.clone(), nnf(body)),
    }
}

fn nnf_neg(f: &Formula) -> Formula {
    match f {
        Formula::Atom { .. } => Formula::not(f.clone()),
        Formula::Not(inner) => nnf(inner),
        Formula::And(l, r) => Formula::or(nnf_neg(l), nnf_neg(r)),
        Formula::Or(l, r) => Formula::and(nnf_neg(l), nnf_neg(r)),
        Formula::Quant { q, vars, body } => Formula::quant(q.dual(), vars.clone(), nnf_neg(body)),
    }
}

/// True for atoms, negated atoms, and `Qv`-formulas in which the quantified
/// variable is free in every immediate subformula, recursively. A block
/// `Q v1..vn` is read as the nesting `Qv1 ... Qvn`.
pub fn is_organized(f: &Formula) -> bool {
    match f {
        Formula::Atom { .. } => true,
        Formula::Not(inner) => matches!(**inner, Formula::Atom { .. }),
        Formula::Quant { q, vars, body } => {
            let body_free = body.free_vars();
            if !vars.iter().all(|v| body_free.contains(v)) {
                return false;
            }
            let parts = match q {
                Quantifier::Exists => body.and_parts(),
                Quantifier::Forall => body.or_parts(),
            };
            let innermost = vars.last().expect("blocks are nonempty");
            parts
                .iter()
                .all(|p| p.free_vars().contains(innermost) && is_organized(p))
        }
        _ => false,
    }
}

/// True iff `f` is variable-loose and generated by the layered grammar: an
/// atom or negated atom, or `∃X(⋀ φi)` over ∀-layered subformulas (dually
/// `∀Y(⋁ φi)`) with `X ⊆ ⋃ free(φi)` and the free-variable hypergraph of the
/// subformulas X-connected.
pub fn is_layered(f: &Formula) -> bool {
    f.is_variable_loose() && (layered_rec(f, Quantifier::Exists) || layered_rec(f, Quantifier::Forall))
}

fn layered_rec(f: &Formula, mode: Quantifier) -> bool {
    match f {
        Formula::Atom { .. } => true,
        Formula::Not(inner) => matches!(**inner, Formula::Atom { .. }),
        Formula::Quant { q, vars, body } if *q == mode => {
            let parts = match mode {
                Quantifier::Exists => body.and_parts(),
                Quantifier::Forall => body.or_parts(),
            };
            if !parts.iter().all(|p| layered_rec(p, mode.dual())) {
                return false;
            }
            let union: BTreeSet<Variable> = parts.iter().flat_map(|p| p.free_vars()).collect();
            let block: BTreeSet<Variable> = vars.iter().cloned().collect();
            if !block.is_subset(&union) {
                return false;
            }
            let h = Hypergraph::from_edges(parts.iter().map(|p| p.free_vars()));
            h.is_s_connected(&block)
        }
        _ => false,
    }
}

/// Canonical order for the immediate members of a connective run: stable
/// sort on the printed form.
fn canonical_sort(parts: &mut [Formula]) {
    parts.sort_by_key(print_formula);
}

/// Positive combinations built by `organize`: conjunctions/disjunctions of
/// organized formulas, kept as lists of lists. Groups and members are held
/// in canonical (printed-form) order with exact duplicates collapsed, which
/// keeps the repeated distributivity conversions from compounding.
type Combo = Vec<Vec<Formula>>;

/// Cap on the total number of members across a combination. Repeated
/// CNF/DNF conversion under alternating quantifiers grows like a tower, so
/// organize fails with a size error rather than exhaust memory.
pub const MAX_COMBO_MEMBERS: usize = 5_000;

fn size_error() -> Error {
    Error::SizeLimit(format!(
        "normal form exceeds {MAX_COMBO_MEMBERS} members; \
         the formula alternates quantifiers too deeply"
    ))
}

fn guard(c: Combo) -> Result<Combo> {
    if c.iter().map(Vec::len).sum::<usize>() > MAX_COMBO_MEMBERS {
        return Err(size_error());
    }
    Ok(c)
}

fn canon_group(mut g: Vec<Formula>) -> Vec<Formula> {
    g.sort_by_cached_key(print_formula);
    g.dedup();
    g
}

fn canon_combo(c: Combo) -> Combo {
    let mut c: Combo = c.into_iter().map(canon_group).collect();
    c.sort_by_cached_key(|g| {
        let mut key = String::new();
        for m in g {
            key.push_str(&print_formula(m));
            key.push('\u{1}');
        }
        key
    });
    c.dedup();
    c
}

/// Raw picks a single distribution step may enumerate before giving up;
/// bounds the work of one conversion level even when deduplication keeps
/// the stored size under the member cap.
const MAX_DISTRIBUTION_PICKS: usize = 50_000;

fn cross(a: &Combo, b: &Combo) -> Result<Combo> {
    if a.len().saturating_mul(b.len()) > MAX_DISTRIBUTION_PICKS {
        return Err(size_error());
    }
    let mut out = Vec::new();
    let mut count = 0usize;
    for x in a {
        for y in b {
            let mut t = x.clone();
            t.extend(y.iter().cloned());
            count += t.len();
            out.push(t);
            if count > MAX_COMBO_MEMBERS {
                out = canon_combo(out);
                count = out.iter().map(Vec::len).sum();
                if count > MAX_COMBO_MEMBERS / 2 {
                    return Err(size_error());
                }
            }
        }
    }
    guard(canon_combo(out))
}

/// Converts between a CNF and a DNF of organized formulas by
/// distributivity: pick one member from every group, deduplicating as the
/// picks accumulate.
fn convert(groups: &Combo) -> Result<Combo> {
    let mut out: Combo = vec![vec![]];
    for group in groups {
        if out.len().saturating_mul(group.len()) > MAX_DISTRIBUTION_PICKS {
            return Err(size_error());
        }
        let mut next = Vec::new();
        let mut count = 0usize;
        for partial in &out {
            for member in group {
                let mut t = partial.clone();
                t.push(member.clone());
                count += t.len();
                next.push(t);
                if count > MAX_COMBO_MEMBERS {
                    next = canon_combo(next);
                    count = next.iter().map(Vec::len).sum();
                    if count > MAX_COMBO_MEMBERS / 2 {
                        return Err(size_error());
                    }
                }
            }
        }
        out = guard(canon_combo(next))?;
    }
    Ok(out)
}

/// Which normal form a context demands.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Cnf,
    Dnf,
}

struct Organizer<'a> {
    trace: Option<&'a mut Vec<RewriteStep>>,
}

impl<'a> Organizer<'a> {
    fn emit(&mut self, rule: RuleTag, path: &[usize]) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.push(RewriteStep::forward(rule, path.to_vec()));
        }
    }

    /// Returns an equivalent CNF or DNF (as demanded) of organized formulas
    /// for an NNF input. Conversions happen only where the demanded form
    /// differs from the naturally produced one.
    fn run(&mut self, f: &Formula, want: Mode, path: &mut Vec<usize>) -> Result<Combo> {
        match f {
            Formula::Atom { .. } | Formula::Not(_) => Ok(vec![vec![f.clone()]]),
            Formula::And(l, r) => {
                path.push(0);
                let lc = self.run(l, want, path)?;
                path.pop();
                path.push(1);
                let rc = self.run(r, want, path)?;
                path.pop();
                match want {
                    Mode::Cnf => {
                        let mut cnf = lc;
                        cnf.extend(rc);
                        guard(canon_combo(cnf))
                    }
                    Mode::Dnf => {
                        if lc.len() > 1 || rc.len() > 1 {
                            self.emit(RuleTag::Delta, path);
                        }
                        cross(&lc, &rc)
                    }
                }
            }
            Formula::Or(l, r) => {
                path.push(0);
                let lc = self.run(l, want, path)?;
                path.pop();
                path.push(1);
                let rc = self.run(r, want, path)?;
                path.pop();
                match want {
                    Mode::Dnf => {
                        let mut dnf = lc;
                        dnf.extend(rc);
                        guard(canon_combo(dnf))
                    }
                    Mode::Cnf => {
                        if lc.len() > 1 || rc.len() > 1 {
                            self.emit(RuleTag::Delta, path);
                        }
                        cross(&lc, &rc)
                    }
                }
            }
            Formula::Quant { q, vars, body } => {
                // an existential block works on the body's DNF and yields a
                // DNF; the universal case is dual
                let natural = match q {
                    Quantifier::Exists => Mode::Dnf,
                    Quantifier::Forall => Mode::Cnf,
                };
                path.push(0);
                let mut combo = self.run(body, natural, path)?;
                path.pop();
                if combo.len() > 1 {
                    self.emit(RuleTag::Beta, path);
                }
                for v in vars.iter().rev() {
                    combo = guard(canon_combo(
                        combo
                            .into_iter()
                            .map(|group| self.quantify_term(*q, v, group, path))
                            .collect(),
                    ))?;
                }
                if want == natural {
                    Ok(combo)
                } else {
                    if combo.len() > 1 {
                        self.emit(RuleTag::Delta, path);
                    }
                    convert(&combo)
                }
            }
        }
    }

    /// One quantifier over one conjunction (dually disjunction) of organized
    /// formulas: group the members containing `v` under the quantifier and
    /// leave the rest outside; a quantifier over no occurrence is dropped.
    fn quantify_term(
        &mut self,
        q: Quantifier,
        v: &Variable,
        term: Vec<Formula>,
        path: &[usize],
    ) -> Vec<Formula> {
        let (with, mut without): (Vec<Formula>, Vec<Formula>) =
            term.into_iter().partition(|p| p.free_vars().contains(v));
        self.emit(RuleTag::Gamma, path);
        if with.is_empty() {
            return without;
        }
        let mut with = with;
        canonical_sort(&mut with);
        let inner = match q {
            Quantifier::Exists => Formula::exists(vec![v.clone()], Formula::big_and(with)),
            Quantifier::Forall => Formula::forall(vec![v.clone()], Formula::big_or(with)),
        };
        without.push(inner);
        without
    }
}

fn materialize(dnf: Combo, outer_or: bool) -> Formula {
    let mut terms: Vec<Formula> = dnf
        .into_iter()
        .map(|mut t| {
            canonical_sort(&mut t);
            if outer_or {
                Formula::big_and(t)
            } else {
                Formula::big_or(t)
            }
        })
        .collect();
    canonical_sort(&mut terms);
    if outer_or {
        Formula::big_or(terms)
    } else {
        Formula::big_and(terms)
    }
}

/// Rewrites `f` into a logically equivalent positive combination of
/// organized formulas inside the syntactic closure of `f`. The top-level
/// result is the DNF computed by the recursive procedure.
pub fn organize(f: &Formula) -> Result<Formula> {
    organize_traced(f, None)
}

pub fn organize_traced(
    f: &Formula,
    trace: Option<&mut Vec<RewriteStep>>,
) -> Result<Formula> {
    let mut org = Organizer { trace };
    let mut path = Vec::new();
    let normalized = nnf(f);
    if let Some(t) = org.trace.as_deref_mut() {
        if &normalized != f {
            t.push(RewriteStep::forward(RuleTag::Epsilon, vec![]));
        }
    }
    let dnf = org.run(&normalized, Mode::Dnf, &mut path)?;
    Ok(materialize(dnf, true))
}

/// Renames quantified variables (depth-first, left to right, counter
/// suffixes `x_1`, `x_2`, ...) so that no variable is quantified twice and
/// no variable is both free and quantified.
pub fn make_variable_loose(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = f.all_variables().into_iter().map(|v| v.name).collect();
    let mut taken: BTreeSet<Variable> = f.free_vars();
    rename_rec(f, &mut Vec::new(), &mut taken, &mut used)
}

fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut k = 1usize;
    loop {
        let candidate = format!("{base}_{k}");
        if used.insert(candidate.clone()) {
            return candidate;
        }
        k += 1;
    }
}

fn rename_rec(
    f: &Formula,
    env: &mut Vec<(Variable, Variable)>,
    taken: &mut BTreeSet<Variable>,
    used: &mut BTreeSet<String>,
) -> Formula {
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
        Formula::Not(inner) => Formula::not(rename_rec(inner, env, taken, used)),
        Formula::And(l, r) => Formula::and(
            rename_rec(l, env, taken, used),
            rename_rec(r, env, taken, used),
        ),
        Formula::Or(l, r) => Formula::or(
            rename_rec(l, env, taken, used),
            rename_rec(r, env, taken, used),
        ),
        Formula::Quant { q, vars, body } => {
            let depth = env.len();
            let mut new_vars = Vec::with_capacity(vars.len());
            for v in vars {
                let fresh = if taken.contains(v) {
                    Variable::new(fresh_name(&v.name, used), v.sort.clone())
                } else {
                    v.clone()
                };
                taken.insert(fresh.clone());
                taken.insert(v.clone());
                env.push((v.clone(), fresh.clone()));
                new_vars.push(fresh);
            }
            let body = rename_rec(body, env, taken, used);
            env.truncate(depth);
            Formula::quant(*q, new_vars, body)
        }
    }
}

/// Turns an organized formula into a logically equivalent layered formula by
/// renaming it variable-loose and then merging adjacent same-quantifier
/// blocks into set quantifiers.
pub fn layer(f: &Formula) -> Result<Formula> {
    if !is_organized(f) {
        return Err(Error::Precondition(format!(
            "layer requires an organized formula, got `{}`",
            print_formula(f)
        )));
    }
    let loose = make_variable_loose(f);
    let out = layer_rec(&loose);
    debug_assert!(is_layered(&out));
    Ok(out)
}

fn layer_rec(f: &Formula) -> Formula {
    match f {
        Formula::Atom { .. } | Formula::Not(_) => f.clone(),
        Formula::Quant { q, vars, body } => {
            // Nested single quantifiers of a block merge one variable at a
            // time, innermost first.
            if vars.len() > 1 {
                let inner = Formula::quant(*q, vars[1..].to_vec(), (**body).clone());
                let merged = layer_rec(&inner);
                return merge_block(*q, vars[0].clone(), vec![merged]);
            }
            let parts = match q {
                Quantifier::Exists => body.and_parts(),
                Quantifier::Forall => body.or_parts(),
            };
            let layered: Vec<Formula> = parts.into_iter().map(layer_rec).collect();
            merge_block(*q, vars[0].clone(), layered)
        }
        Formula::And(..) | Formula::Or(..) => unreachable!("organized formulas have no bare runs"),
    }
}

/// Builds `Q ({v} ∪ merged blocks) (combination)` from the layered immediate
/// subformulas of `Q v (...)`: subformulas starting with the same quantifier
/// contribute their block variables and their members, the rest stay whole.
fn merge_block(q: Quantifier, v: Variable, layered: Vec<Formula>) -> Formula {
    let mut block: BTreeSet<Variable> = BTreeSet::from([v]);
    let mut members: Vec<Formula> = Vec::new();
    for p in layered {
        match p {
            Formula::Quant {
                q: q2,
                vars,
                body,
            } if q2 == q => {
                block.extend(vars);
                let parts = match q {
                    Quantifier::Exists => body.and_parts(),
                    Quantifier::Forall => body.or_parts(),
                };
                members.extend(parts.into_iter().cloned());
            }
            other => members.push(other),
        }
    }
    canonical_sort(&mut members);
    let body = match q {
        Quantifier::Exists => Formula::big_and(members),
        Quantifier::Forall => Formula::big_or(members),
    };
    Formula::quant(q, block.into_iter().collect(), body)
}

/// `lay = layer ∘ organize`, with `layer` applied at every positively
/// combined leaf of the organized form. The output is a positive combination
/// of layered formulas logically equivalent to the input.
pub fn lay(f: &Formula) -> Result<Formula> {
    lay_traced(f, None)
}

pub fn lay_traced(f: &Formula, trace: Option<&mut Vec<RewriteStep>>) -> Result<Formula> {
    let org = organize_traced(f, trace)?;
    Ok(map_pos_leaves(&org, &|leaf| {
        layer(leaf).expect("organize produces organized leaves")
    }))
}

fn map_pos_leaves(f: &Formula, op: &dyn Fn(&Formula) -> Formula) -> Formula {
    match f {
        Formula::And(l, r) => Formula::and(map_pos_leaves(l, op), map_pos_leaves(r, op)),
        Formula::Or(l, r) => Formula::or(map_pos_leaves(l, op), map_pos_leaves(r, op)),
        leaf => op(leaf),
    }
}

/// Replaces relation symbols occurrence-wise. `subst` maps the index of an
/// atom occurrence (depth-first order) to the replacement symbol, whose
/// arity in `target` must be the same sort word.
pub fn replace_symbols(
    f: &Formula,
    subst: &BTreeMap<usize, String>,
    target: &Signature,
) -> Result<Formula> {
    let mut counter = 0usize;
    replace_rec(f, subst, target, &mut counter)
}

fn replace_rec(
    f: &Formula,
    subst: &BTreeMap<usize, String>,
    target: &Signature,
    counter: &mut usize,
) -> Result<Formula> {
    match f {
        Formula::Atom { relation: _, args } => {
            let idx = *counter;
            *counter += 1;
            match subst.get(&idx) {
                None => Ok(f.clone()),
                Some(new_symbol) => {
                    let new_arity = target.arity(new_symbol)?;
                    let old_word: Vec<&str> = args.iter().map(|v| v.sort.as_str()).collect();
                    if new_arity.len() != old_word.len()
                        || new_arity.iter().zip(&old_word).any(|(a, b)| a != b)
                    {
                        return Err(Error::ArityMismatch {
                            relation: new_symbol.clone(),
                            expected: new_arity.len(),
                            got: old_word.len(),
                        });
                    }
                    Ok(Formula::atom(new_symbol.clone(), args.clone()))
                }
            }
        }
        Formula::Not(inner) => Ok(Formula::not(replace_rec(inner, subst, target, counter)?)),
        Formula::And(l, r) => Ok(Formula::and(
            replace_rec(l, subst, target, counter)?,
            replace_rec(r, subst, target, counter)?,
        )),
        Formula::Or(l, r) => Ok(Formula::or(
            replace_rec(l, subst, target, counter)?,
            replace_rec(r, subst, target, counter)?,
        )),
        Formula::Quant { q, vars, body } => Ok(Formula::quant(
            *q,
            vars.clone(),
            replace_rec(body, subst, target, counter)?,
        )),
    }
}

/// Every formula over `target` obtainable from `f` by replacement: each atom
/// occurrence may take any symbol of `target` with the same sort word.
pub fn enumerate_replacements(f: &Formula, target: &Signature) -> Vec<Formula> {
    let atoms = f.atoms();
    let mut choices: Vec<Vec<String>> = Vec::new();
    for (_, args) in &atoms {
        let word: Vec<&str> = args.iter().map(|v| v.sort.as_str()).collect();
        let mut fits: Vec<String> = target
            .relations()
            .iter()
            .filter(|(_, arity)| {
                arity.len() == word.len() && arity.iter().zip(&word).all(|(a, b)| a == b)
            })
            .map(|(name, _)| name.clone())
            .collect();
        fits.sort();
        choices.push(fits);
    }
    if choices.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut out: Vec<Formula> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut pick = vec![0usize; choices.len()];
    'outer: loop {
        let subst: BTreeMap<usize, String> = pick
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, choices[i][c].clone()))
            .collect();
        if let Ok(candidate) = replace_symbols(f, &subst, target) {
            let key = print_formula(&candidate);
            if seen.insert(key) {
                out.push(candidate);
            }
        }
        // next assignment
        for i in (0..pick.len()).rev() {
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        break;
    }
    out
}

/// Applies a single transformation step at its path.
pub fn apply_transformation(f: &Formula, step: &RewriteStep) -> Result<Formula> {
    let node = f.at_path(&step.path)?;
    let mismatch = |msg: &str| Error::PatternMismatch {
        path: step.path.clone(),
        msg: msg.to_owned(),
    };
    let rewritten = match (step.rule, step.direction) {
        (RuleTag::Alpha, Direction::Forward) => match node {
            Formula::And(..) => {
                let mut parts: Vec<Formula> = node.and_parts().into_iter().cloned().collect();
                canonical_sort(&mut parts);
                Formula::big_and(parts)
            }
            Formula::Or(..) => {
                let mut parts: Vec<Formula> = node.or_parts().into_iter().cloned().collect();
                canonical_sort(&mut parts);
                Formula::big_or(parts)
            }
            _ => return Err(mismatch("alpha expects a connective")),
        },
        (RuleTag::Beta, Direction::Forward) => match node {
            Formula::Quant { q, vars, body } => {
                let parts = match q {
                    Quantifier::Exists => body.or_parts(),
                    Quantifier::Forall => body.and_parts(),
                };
                if parts.len() < 2 {
                    return Err(mismatch("beta expects the dual connective under the quantifier"));
                }
                let pushed: Vec<Formula> = parts
                    .into_iter()
                    .map(|p| Formula::quant(*q, vars.clone(), p.clone()))
                    .collect();
                match q {
                    Quantifier::Exists => Formula::big_or(pushed),
                    Quantifier::Forall => Formula::big_and(pushed),
                }
            }
            _ => return Err(mismatch("beta expects a quantifier")),
        },
        (RuleTag::Beta, Direction::Reverse) => {
            let (parts, q) = match node {
                Formula::Or(..) => (node.or_parts(), Quantifier::Exists),
                Formula::And(..) => (node.and_parts(), Quantifier::Forall),
                _ => return Err(mismatch("reverse beta expects a connective")),
            };
            let mut vars: Option<Vec<Variable>> = None;
            let mut bodies = Vec::new();
            for p in parts {
                match p {
                    Formula::Quant { q: q2, vars: vs, body } if *q2 == q => {
                        match &vars {
                            None => vars = Some(vs.clone()),
                            Some(prev) if prev == vs => {}
                            _ => return Err(mismatch("members bind different blocks")),
                        }
                        bodies.push((**body).clone());
                    }
                    _ => return Err(mismatch("members must all be quantified alike")),
                }
            }
            let vars = vars.ok_or_else(|| mismatch("empty connective"))?;
            let body = match q {
                Quantifier::Exists => Formula::big_or(bodies),
                Quantifier::Forall => Formula::big_and(bodies),
            };
            Formula::quant(q, vars, body)
        }
        (RuleTag::Gamma, Direction::Forward) => match node {
            Formula::Quant { q, vars, body } if vars.len() == 1 => {
                let v = &vars[0];
                match (q, &**body) {
                    (Quantifier::Exists, Formula::And(a, b))
                        if !b.free_vars().contains(v) =>
                    {
                        Formula::and(Formula::exists(vars.clone(), (**a).clone()), (**b).clone())
                    }
                    (Quantifier::Forall, Formula::Or(a, b)) if !b.free_vars().contains(v) => {
                        Formula::or(Formula::forall(vars.clone(), (**a).clone()), (**b).clone())
                    }
                    _ if !body.free_vars().contains(v) => (**body).clone(),
                    _ => return Err(mismatch("gamma requires the variable absent on one side")),
                }
            }
            _ => return Err(mismatch("gamma expects a single-variable quantifier")),
        },
        (RuleTag::Gamma, Direction::Reverse) => match node {
            Formula::And(l, r) => match &**l {
                Formula::Quant { q: Quantifier::Exists, vars, body }
                    if vars.len() == 1 && !r.free_vars().contains(&vars[0]) =>
                {
                    Formula::exists(vars.clone(), Formula::and((**body).clone(), (**r).clone()))
                }
                _ => return Err(mismatch("reverse gamma expects (exists x. a) & b")),
            },
            Formula::Or(l, r) => match &**l {
                Formula::Quant { q: Quantifier::Forall, vars, body }
                    if vars.len() == 1 && !r.free_vars().contains(&vars[0]) =>
                {
                    Formula::forall(vars.clone(), Formula::or((**body).clone(), (**r).clone()))
                }
                _ => return Err(mismatch("reverse gamma expects (forall y. a) | b")),
            },
            _ => return Err(mismatch("reverse gamma expects a connective")),
        },
        (RuleTag::Delta, Direction::Forward) => match node {
            Formula::And(a, bc) => match &**bc {
                Formula::Or(b, c) => Formula::or(
                    Formula::and((**a).clone(), (**b).clone()),
                    Formula::and((**a).clone(), (**c).clone()),
                ),
                _ => return Err(mismatch("delta expects a & (b | c)")),
            },
            Formula::Or(a, bc) => match &**bc {
                Formula::And(b, c) => Formula::and(
                    Formula::or((**a).clone(), (**b).clone()),
                    Formula::or((**a).clone(), (**c).clone()),
                ),
                _ => return Err(mismatch("delta expects a | (b & c)")),
            },
            _ => return Err(mismatch("delta expects a connective")),
        },
        (RuleTag::Delta, Direction::Reverse) => match node {
            Formula::Or(l, r) => match (&**l, &**r) {
                (Formula::And(a1, b), Formula::And(a2, c)) if a1 == a2 => {
                    Formula::and((**a1).clone(), Formula::or((**b).clone(), (**c).clone()))
                }
                _ => return Err(mismatch("reverse delta expects (a & b) | (a & c)")),
            },
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Or(a1, b), Formula::Or(a2, c)) if a1 == a2 => {
                    Formula::or((**a1).clone(), Formula::and((**b).clone(), (**c).clone()))
                }
                _ => return Err(mismatch("reverse delta expects (a | b) & (a | c)")),
            },
            _ => return Err(mismatch("reverse delta expects a connective")),
        },
        (RuleTag::Epsilon, Direction::Forward) => match node {
            Formula::Not(inner) => match &**inner {
                Formula::Not(f2) => (**f2).clone(),
                Formula::And(a, b) => Formula::or(
                    Formula::not((**a).clone()),
                    Formula::not((**b).clone()),
                ),
                Formula::Or(a, b) => Formula::and(
                    Formula::not((**a).clone()),
                    Formula::not((**b).clone()),
                ),
                Formula::Quant { q, vars, body } => Formula::quant(
                    q.dual(),
                    vars.clone(),
                    Formula::not((**body).clone()),
                ),
                Formula::Atom { .. } => {
                    return Err(mismatch("negated atom is already in normal form"))
                }
            },
            _ => return Err(mismatch("epsilon expects a negation")),
        },
        (RuleTag::Epsilon, Direction::Reverse) => match node {
            Formula::Quant { q, vars, body } => match &**body {
                Formula::Not(inner) => Formula::not(Formula::quant(
                    q.dual(),
                    vars.clone(),
                    (**inner).clone(),
                )),
                _ => return Err(mismatch("reverse epsilon expects Q V (!a)")),
            },
            Formula::Or(l, r) => match (&**l, &**r) {
                (Formula::Not(a), Formula::Not(b)) => {
                    Formula::not(Formula::and((**a).clone(), (**b).clone()))
                }
                _ => return Err(mismatch("reverse epsilon expects !a | !b")),
            },
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Not(a), Formula::Not(b)) => {
                    Formula::not(Formula::or((**a).clone(), (**b).clone()))
                }
                _ => return Err(mismatch("reverse epsilon expects !a & !b")),
            },
            _ => return Err(mismatch("reverse epsilon expects a connective or quantifier")),
        },
        (RuleTag::Alpha, Direction::Reverse) => {
            return Err(mismatch("alpha reordering has no reverse form"))
        }
        (RuleTag::Replacement, _) => {
            return Err(mismatch(
                "replacement carries a substitution; use replace_symbols",
            ))
        }
    };
    f.replace_at_path(&step.path, rewritten)
}
