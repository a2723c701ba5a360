use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::{print_formula, Signature};
use crate::{Error, Result};

/// A sorted variable. In one-sorted formulas the sort is `"U"`; in a
/// fully-sorted formula the sort of a variable is its own name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub name: String,
    pub sort: String,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            sort: sort.into(),
        }
    }

    /// Variable over the default one-sorted universe.
    pub fn u(name: impl Into<String>) -> Self {
        Variable::new(name, crate::logic::DEFAULT_SORT)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// Formulas of relational first-order logic. Quantifiers bind an ordered,
/// duplicate-free block of variables; `Quant(Q, [v1..vn], body)` abbreviates
/// the nesting `Q v1 ... Q vn body`, and every operation on formulas is
/// independent of the order within a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom { relation: String, args: Vec<Variable> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Quant { q: Quantifier, vars: Vec<Variable>, body: Box<Formula> },
}

impl Formula {
    pub fn atom(relation: impl Into<String>, args: Vec<Variable>) -> Self {
        Formula::Atom {
            relation: relation.into(),
            args,
        }
    }

    #[allow(clippy::should_implement_trait)] // DSL constructor, not an operator impl
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn quant(q: Quantifier, vars: Vec<Variable>, body: Formula) -> Self {
        debug_assert!(!vars.is_empty(), "quantifier blocks are nonempty");
        Formula::Quant {
            q,
            vars,
            body: Box::new(body),
        }
    }

    pub fn exists(vars: Vec<Variable>, body: Formula) -> Self {
        Formula::quant(Quantifier::Exists, vars, body)
    }

    pub fn forall(vars: Vec<Variable>, body: Formula) -> Self {
        Formula::quant(Quantifier::Forall, vars, body)
    }

    /// Left-associated conjunction of a nonempty list.
    pub fn big_and(mut parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty());
        let first = parts.remove(0);
        parts.into_iter().fold(first, Formula::and)
    }

    /// Left-associated disjunction of a nonempty list.
    pub fn big_or(mut parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty());
        let first = parts.remove(0);
        parts.into_iter().fold(first, Formula::or)
    }

    /// The set of free variables.
    pub fn free_vars(&self) -> BTreeSet<Variable> {
        match self {
            Formula::Atom { args, .. } => args.iter().cloned().collect(),
            Formula::Not(f) => f.free_vars(),
            Formula::And(l, r) | Formula::Or(l, r) => {
                let mut s = l.free_vars();
                s.extend(r.free_vars());
                s
            }
            Formula::Quant { vars, body, .. } => {
                let mut s = body.free_vars();
                for v in vars {
                    s.remove(v);
                }
                s
            }
        }
    }

    /// Width: the maximum of `|free(psi)|` over all subformulas `psi`.
    pub fn width(&self) -> usize {
        let mut w = self.free_vars().len();
        for child in self.children() {
            w = w.max(child.width());
        }
        w
    }

    fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom { .. } => vec![],
            Formula::Not(f) => vec![f],
            Formula::And(l, r) | Formula::Or(l, r) => vec![l, r],
            Formula::Quant { body, .. } => vec![body],
        }
    }

    /// True when no variable is quantified twice and no variable is both
    /// quantified and free. Each variable of a block counts as one
    /// quantification.
    pub fn is_variable_loose(&self) -> bool {
        let mut quantified: BTreeMap<Variable, usize> = BTreeMap::new();
        self.count_quantified(&mut quantified);
        if quantified.values().any(|&n| n > 1) {
            return false;
        }
        let free = self.free_vars();
        quantified.keys().all(|v| !free.contains(v))
    }

    fn count_quantified(&self, acc: &mut BTreeMap<Variable, usize>) {
        match self {
            Formula::Atom { .. } => {}
            Formula::Not(f) => f.count_quantified(acc),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.count_quantified(acc);
                r.count_quantified(acc);
            }
            Formula::Quant { vars, body, .. } => {
                for v in vars {
                    *acc.entry(v.clone()).or_insert(0) += 1;
                }
                body.count_quantified(acc);
            }
        }
    }

    /// True when no relation symbol appears more than once.
    pub fn is_symbol_loose(&self) -> bool {
        let mut seen = BTreeMap::new();
        for (rel, _) in self.atoms() {
            *seen.entry(rel.to_owned()).or_insert(0usize) += 1;
        }
        seen.values().all(|&n| n <= 1)
    }

    pub fn is_loose(&self) -> bool {
        self.is_variable_loose() && self.is_symbol_loose()
    }

    /// True iff the formula contains no negation.
    pub fn is_positive(&self) -> bool {
        match self {
            Formula::Atom { .. } => true,
            Formula::Not(_) => false,
            Formula::And(l, r) | Formula::Or(l, r) => l.is_positive() && r.is_positive(),
            Formula::Quant { body, .. } => body.is_positive(),
        }
    }

    /// All atom occurrences, in depth-first order.
    pub fn atoms(&self) -> Vec<(&str, &[Variable])> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a [Variable])>) {
        match self {
            Formula::Atom { relation, args } => out.push((relation, args)),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            Formula::Quant { body, .. } => body.collect_atoms(out),
        }
    }

    /// Every variable occurring anywhere (free, bound, or in a binder).
    pub fn all_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
            Formula::Not(f) => f.collect_variables(out),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
            Formula::Quant { vars, body, .. } => {
                out.extend(vars.iter().cloned());
                body.collect_variables(out);
            }
        }
    }

    /// The subformula at a path of child indices (`Not`/`Quant` have one
    /// child 0; `And`/`Or` have children 0 and 1).
    pub fn at_path(&self, path: &[usize]) -> Result<&Formula> {
        let mut cur = self;
        for (depth, &i) in path.iter().enumerate() {
            cur = match (cur, i) {
                (Formula::Not(f), 0) => f,
                (Formula::Quant { body, .. }, 0) => body,
                (Formula::And(l, _), 0) | (Formula::Or(l, _), 0) => l,
                (Formula::And(_, r), 1) | (Formula::Or(_, r), 1) => r,
                _ => return Err(Error::BadPath(path[..=depth].to_vec())),
            };
        }
        Ok(cur)
    }

    /// Replaces the subformula at `path` with `new`, returning the rewritten
    /// formula.
    pub fn replace_at_path(&self, path: &[usize], new: Formula) -> Result<Formula> {
        if path.is_empty() {
            return Ok(new);
        }
        let (i, rest) = (path[0], &path[1..]);
        let out = match (self, i) {
            (Formula::Not(f), 0) => Formula::not(f.replace_at_path(rest, new)?),
            (Formula::Quant { q, vars, body }, 0) => {
                Formula::quant(*q, vars.clone(), body.replace_at_path(rest, new)?)
            }
            (Formula::And(l, r), 0) => Formula::and(l.replace_at_path(rest, new)?, (**r).clone()),
            (Formula::And(l, r), 1) => Formula::and((**l).clone(), r.replace_at_path(rest, new)?),
            (Formula::Or(l, r), 0) => Formula::or(l.replace_at_path(rest, new)?, (**r).clone()),
            (Formula::Or(l, r), 1) => Formula::or((**l).clone(), r.replace_at_path(rest, new)?),
            _ => return Err(Error::BadPath(path.to_vec())),
        };
        Ok(out)
    }

    /// All subformulas paired with their paths, in depth-first preorder.
    pub fn subformulas(&self) -> Vec<(Vec<usize>, &Formula)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut out);
        out
    }

    fn walk<'a>(&'a self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
        out.push((path.clone(), self));
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            c.walk(path, out);
            path.pop();
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// The formal dual: swaps `And`/`Or` and `Exists`/`Forall`.
    pub fn dual(&self) -> Formula {
        match self {
            Formula::Atom { .. } => self.clone(),
            Formula::Not(f) => Formula::not(f.dual()),
            Formula::And(l, r) => Formula::or(l.dual(), r.dual()),
            Formula::Or(l, r) => Formula::and(l.dual(), r.dual()),
            Formula::Quant { q, vars, body } => Formula::quant(q.dual(), vars.clone(), body.dual()),
        }
    }

    /// The maximal run of conjuncts reachable through `And` nodes only.
    pub fn and_parts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(l, r) => {
                let mut out = l.and_parts();
                out.extend(r.and_parts());
                out
            }
            _ => vec![self],
        }
    }

    /// The maximal run of disjuncts reachable through `Or` nodes only.
    pub fn or_parts(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(l, r) => {
                let mut out = l.or_parts();
                out.extend(r.or_parts());
                out
            }
            _ => vec![self],
        }
    }

    /// Checks arities and componentwise sorts of every atom against `sig`,
    /// and that quantifier blocks are duplicate-free over known sorts.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::Atom { relation, args } => {
                let arity = sig.arity(relation)?;
                if arity.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        relation: relation.clone(),
                        expected: arity.len(),
                        got: args.len(),
                    });
                }
                for (v, sort) in args.iter().zip(arity) {
                    if &v.sort != sort {
                        return Err(Error::SortMismatch(format!(
                            "variable `{}` has sort `{}`, position requires `{}` in `{}`",
                            v.name, v.sort, sort, relation
                        )));
                    }
                }
                Ok(())
            }
            Formula::Not(f) => f.validate(sig),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.validate(sig)?;
                r.validate(sig)
            }
            Formula::Quant { vars, body, .. } => {
                let mut seen = BTreeSet::new();
                for v in vars {
                    if !sig.has_sort(&v.sort) {
                        return Err(Error::UnknownSort(v.sort.clone()));
                    }
                    if !seen.insert(v.clone()) {
                        return Err(Error::Precondition(format!(
                            "duplicate variable `{}` in quantifier block",
                            v.name
                        )));
                    }
                }
                body.validate(sig)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_formula(self))
    }
}
