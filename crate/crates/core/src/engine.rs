//! Bottom-up relational evaluation with width-bounded intermediates, and the
//! end-to-end model-checking pipeline that first rewrites the sentence to
//! use few variables.
//!
//! Every subformula evaluates to the table of its satisfying assignments
//! over its free variables, so each intermediate holds at most
//! `|B|^width-at-that-node` rows: atoms filter the stored relation, `And`
//! joins, `Or` unions after schema alignment, `exists` projects, and
//! `forall` divides via complement-project-complement. Negation complements
//! against the full product of the child schema, which is sound because
//! universes are finite and sorts explicit.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Quantifier, Structure, Variable};
use crate::thickness::{analyze, minimize_variables, AnalysisReport};
use crate::{Error, Result};

/// A set of rows over an ordered, duplicate-free variable schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTable {
    schema: Vec<Variable>,
    rows: BTreeSet<Vec<String>>,
}

/// Counters from one evaluation run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvalStats {
    pub max_table_rows: usize,
    pub node_count: usize,
    pub wall_ms: u128,
}

impl RelationTable {
    pub fn new(schema: Vec<Variable>, rows: BTreeSet<Vec<String>>) -> Result<Self> {
        let distinct: BTreeSet<&Variable> = schema.iter().collect();
        if distinct.len() != schema.len() {
            return Err(Error::Precondition("table schema repeats a variable".into()));
        }
        for r in &rows {
            if r.len() != schema.len() {
                return Err(Error::Precondition("row length differs from schema".into()));
            }
        }
        Ok(RelationTable { schema, rows })
    }

    pub fn schema(&self) -> &[Variable] {
        &self.schema
    }

    pub fn rows(&self) -> &BTreeSet<Vec<String>> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// For a table over the empty schema: nonempty means true.
    pub fn as_bool(&self) -> bool {
        !self.rows.is_empty()
    }

    fn col(&self, v: &Variable) -> Option<usize> {
        self.schema.iter().position(|u| u == v)
    }
}

/// All tuples of the sort product of `schema` over the universes of `s`.
pub fn full_product_table(s: &Structure, schema: &[Variable]) -> Result<RelationTable> {
    let mut rows: Vec<Vec<String>> = vec![vec![]];
    for v in schema {
        let universe = s.universe(&v.sort)?;
        let mut next = Vec::with_capacity(rows.len() * universe.len());
        for r in &rows {
            for e in universe {
                let mut r2 = r.clone();
                r2.push(e.clone());
                next.push(r2);
            }
        }
        rows = next;
    }
    RelationTable::new(schema.to_vec(), rows.into_iter().collect())
}

struct EvalCtx<'a> {
    structure: &'a Structure,
    stats: EvalStats,
}

impl<'a> EvalCtx<'a> {
    fn track(&mut self, t: RelationTable) -> RelationTable {
        self.stats.max_table_rows = self.stats.max_table_rows.max(t.len());
        t
    }

    fn full(&mut self, schema: &[Variable]) -> Result<RelationTable> {
        let t = full_product_table(self.structure, schema)?;
        Ok(self.track(t))
    }

    fn eval(&mut self, f: &Formula) -> Result<RelationTable> {
        self.stats.node_count += 1;
        let out = match f {
            Formula::Atom { relation, args } => self.atom(relation, args)?,
            Formula::Not(inner) => {
                let t = self.eval(inner)?;
                let full = self.full(&t.schema)?;
                let rows = full.rows.difference(&t.rows).cloned().collect();
                RelationTable::new(t.schema, rows)?
            }
            Formula::And(l, r) => {
                let lt = self.eval(l)?;
                let rt = self.eval(r)?;
                join(&lt, &rt)?
            }
            Formula::Or(l, r) => {
                let lt = self.eval(l)?;
                let rt = self.eval(r)?;
                let schema = merged_schema(&lt, &rt);
                let le = self.extend(&lt, &schema)?;
                let re = self.extend(&rt, &schema)?;
                let rows = le.rows.union(&re.rows).cloned().collect();
                RelationTable::new(schema, rows)?
            }
            Formula::Quant { q, vars, body } => {
                let t = self.eval(body)?;
                let keep: Vec<Variable> = t
                    .schema
                    .iter()
                    .filter(|v| !vars.contains(v))
                    .cloned()
                    .collect();
                match q {
                    Quantifier::Exists => project(&t, &keep)?,
                    Quantifier::Forall => {
                        // division as complement - project - complement
                        let full_inner = self.full(&t.schema)?;
                        let missing: BTreeSet<Vec<String>> =
                            full_inner.rows.difference(&t.rows).cloned().collect();
                        let miss_t =
                            self.track(RelationTable::new(t.schema.clone(), missing)?);
                        let projected = self.track(project(&miss_t, &keep)?);
                        let full_outer = self.full(&keep)?;
                        let rows = full_outer
                            .rows
                            .difference(&projected.rows)
                            .cloned()
                            .collect();
                        RelationTable::new(keep, rows)?
                    }
                }
            }
        };
        Ok(self.track(out))
    }

    /// Table of an atom: rows of the stored relation consistent with
    /// repeated variables, projected onto the distinct variables in order of
    /// first occurrence.
    fn atom(&mut self, relation: &str, args: &[Variable]) -> Result<RelationTable> {
        let tuples = self.structure.tuples(relation)?;
        let mut schema: Vec<Variable> = Vec::new();
        for v in args {
            if !schema.contains(v) {
                schema.push(v.clone());
            }
        }
        let mut rows = BTreeSet::new();
        'tuple: for t in tuples {
            let mut row = vec![String::new(); schema.len()];
            let mut seen = vec![false; schema.len()];
            for (elem, v) in t.iter().zip(args) {
                let i = schema.iter().position(|u| u == v).expect("schema covers args");
                if seen[i] && row[i] != *elem {
                    continue 'tuple; // repeated variable with differing values
                }
                row[i] = elem.clone();
                seen[i] = true;
            }
            rows.insert(row);
        }
        RelationTable::new(schema, rows)
    }

    /// Extends `t` to `schema` by crossing with the full product over the
    /// missing variables.
    fn extend(&mut self, t: &RelationTable, schema: &[Variable]) -> Result<RelationTable> {
        let missing: Vec<Variable> = schema
            .iter()
            .filter(|v| t.col(v).is_none())
            .cloned()
            .collect();
        if missing.is_empty() {
            return reorder(t, schema);
        }
        let pad = self.full(&missing)?;
        let mut rows = BTreeSet::new();
        for r in &t.rows {
            for p in &pad.rows {
                let mut combined: Vec<String> = Vec::with_capacity(schema.len());
                for v in schema {
                    match t.col(v) {
                        Some(i) => combined.push(r[i].clone()),
                        None => {
                            let j = missing.iter().position(|u| u == v).expect("missing");
                            combined.push(p[j].clone());
                        }
                    }
                }
                rows.insert(combined);
            }
        }
        let out = RelationTable::new(schema.to_vec(), rows)?;
        Ok(self.track(out))
    }
}

fn merged_schema(a: &RelationTable, b: &RelationTable) -> Vec<Variable> {
    let mut schema = a.schema.clone();
    for v in &b.schema {
        if !schema.contains(v) {
            schema.push(v.clone());
        }
    }
    schema
}

/// Natural join on the shared variables.
fn join(a: &RelationTable, b: &RelationTable) -> Result<RelationTable> {
    let shared: Vec<Variable> = a
        .schema
        .iter()
        .filter(|v| b.col(v).is_some())
        .cloned()
        .collect();
    let b_extra: Vec<usize> = (0..b.schema.len())
        .filter(|&i| !shared.contains(&b.schema[i]))
        .collect();
    let mut schema = a.schema.clone();
    schema.extend(b_extra.iter().map(|&i| b.schema[i].clone()));

    let a_key: Vec<usize> = shared.iter().map(|v| a.col(v).unwrap()).collect();
    let b_key: Vec<usize> = shared.iter().map(|v| b.col(v).unwrap()).collect();
    let mut index: BTreeMap<Vec<&str>, Vec<&Vec<String>>> = BTreeMap::new();
    for r in &b.rows {
        let key: Vec<&str> = b_key.iter().map(|&i| r[i].as_str()).collect();
        index.entry(key).or_default().push(r);
    }
    let mut rows = BTreeSet::new();
    for r in &a.rows {
        let key: Vec<&str> = a_key.iter().map(|&i| r[i].as_str()).collect();
        if let Some(matches) = index.get(&key) {
            for m in matches {
                let mut row = r.clone();
                row.extend(b_extra.iter().map(|&i| m[i].clone()));
                rows.insert(row);
            }
        }
    }
    RelationTable::new(schema, rows)
}

fn project(t: &RelationTable, keep: &[Variable]) -> Result<RelationTable> {
    let cols: Vec<usize> = keep
        .iter()
        .map(|v| {
            t.col(v)
                .ok_or_else(|| Error::Precondition(format!("projection variable `{}` absent", v.name)))
        })
        .collect::<Result<_>>()?;
    let rows = t
        .rows
        .iter()
        .map(|r| cols.iter().map(|&i| r[i].clone()).collect())
        .collect();
    RelationTable::new(keep.to_vec(), rows)
}

fn reorder(t: &RelationTable, schema: &[Variable]) -> Result<RelationTable> {
    project(t, schema)
}

/// Evaluates `f` bottom-up on `s`, returning the table of satisfying
/// assignments over `free(f)`; for a sentence the table is nullary and
/// nonempty iff the sentence holds.
pub fn bounded_var_eval(s: &Structure, f: &Formula) -> Result<RelationTable> {
    Ok(bounded_var_eval_with_stats(s, f)?.0)
}

pub fn bounded_var_eval_with_stats(
    s: &Structure,
    f: &Formula,
) -> Result<(RelationTable, EvalStats)> {
    f.validate(s.signature())?;
    let start = Instant::now();
    let mut ctx = EvalCtx {
        structure: s,
        stats: EvalStats::default(),
    };
    let t = ctx.eval(f)?;
    let mut stats = ctx.stats;
    stats.wall_ms = start.elapsed().as_millis();
    Ok((t, stats))
}

/// Outcome of the end-to-end pipeline.
#[derive(Debug, Clone)]
pub struct FptOutcome {
    pub result: bool,
    pub minimized: Formula,
    pub report: AnalysisReport,
    pub stats: EvalStats,
}

/// Model checking via the tractable pipeline: measure thickness, rewrite to
/// an equivalent sentence using that many variables, then evaluate bottom-up
/// with width-bounded tables.
pub fn fpt_model_check(s: &Structure, f: &Formula) -> Result<FptOutcome> {
    if !f.free_vars().is_empty() {
        return Err(Error::Precondition(
            "fpt_model_check expects a sentence".into(),
        ));
    }
    let report = analyze(f)?;
    let minimized = minimize_variables(f)?;
    let (table, stats) = bounded_var_eval_with_stats(s, &minimized)?;
    Ok(FptOutcome {
        result: table.as_bool(),
        minimized,
        report,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{naive_eval, parse_formula, Assignment, Signature};

    fn structure(elems: &[&str], edges: &[(&str, &str)]) -> Structure {
        let sig = Signature::one_sorted([("E".to_owned(), 2)]);
        Structure::one_sorted(
            sig,
            elems.iter().map(|s| s.to_string()),
            [(
                "E".to_owned(),
                edges
                    .iter()
                    .map(|(a, b)| vec![a.to_string(), b.to_string()])
                    .collect::<BTreeSet<_>>(),
            )],
        )
        .unwrap()
    }

    #[test]
    fn atom_table_is_the_relation() {
        let s = structure(&["1", "2"], &[("1", "2")]);
        let f = parse_formula("E(x,y)", s.signature()).unwrap();
        let t = bounded_var_eval(&s, &f).unwrap();
        assert_eq!(t.schema().len(), 2);
        assert_eq!(t.rows().len(), 1);
        assert!(t.rows().contains(&vec!["1".to_owned(), "2".to_owned()]));
    }

    #[test]
    fn repeated_variable_filters_diagonal() {
        let s = structure(&["1", "2"], &[("1", "2"), ("2", "2")]);
        let f = parse_formula("E(x,x)", s.signature()).unwrap();
        let t = bounded_var_eval(&s, &f).unwrap();
        assert_eq!(t.rows().len(), 1);
        assert!(t.rows().contains(&vec!["2".to_owned()]));
    }

    #[test]
    fn forall_exists_on_full_relation() {
        let s = structure(
            &["1", "2", "3"],
            &[
                ("1", "1"),
                ("1", "2"),
                ("1", "3"),
                ("2", "1"),
                ("2", "2"),
                ("2", "3"),
                ("3", "1"),
                ("3", "2"),
                ("3", "3"),
            ],
        );
        let f = parse_formula("forall y. exists x. E(y,x)", s.signature()).unwrap();
        let t = bounded_var_eval(&s, &f).unwrap();
        assert!(t.schema().is_empty());
        assert!(t.as_bool());
    }

    #[test]
    fn two_walk_on_two_cycle_bounded() {
        let s = structure(&["1", "2"], &[("1", "2"), ("2", "1")]);
        let f = parse_formula(
            "forall y. exists x. exists x2. (E(y,x) & E(x,x2))",
            s.signature(),
        )
        .unwrap();
        assert!(bounded_var_eval(&s, &f).unwrap().as_bool());
        assert!(naive_eval(&s, &f, &Assignment::new()).unwrap());
    }

    #[test]
    fn full_product_examples() {
        let s = structure(&["1", "2"], &[]);
        let x = Variable::u("x");
        let y = Variable::u("y");
        assert_eq!(
            full_product_table(&s, std::slice::from_ref(&x)).unwrap().len(),
            2
        );
        assert_eq!(full_product_table(&s, &[]).unwrap().len(), 1);
        assert_eq!(
            full_product_table(&s, &[x.clone(), y.clone()]).unwrap().len(),
            4
        );
    }

    #[test]
    fn negation_and_division_agree_with_oracle() {
        let s = structure(&["1", "2", "3"], &[("1", "2"), ("2", "3"), ("3", "1")]);
        for text in [
            "forall x. exists y. E(x,y)",
            "forall x. forall y. (!E(x,y) | E(y,x))",
            "exists x. !(exists y. E(x,y))",
            "forall x. E(x,x)",
        ] {
            let f = parse_formula(text, s.signature()).unwrap();
            let expect = naive_eval(&s, &f, &Assignment::new()).unwrap();
            assert_eq!(
                bounded_var_eval(&s, &f).unwrap().as_bool(),
                expect,
                "disagreement on `{text}`"
            );
        }
    }

    #[test]
    fn fpt_pipeline_on_the_f2_fixture() {
        use crate::fixtures::{f_k, f_k_signature};
        let f2 = f_k(2);
        let sig = f_k_signature(2);
        let full: BTreeSet<Vec<String>> = ["1", "2"]
            .iter()
            .flat_map(|a| ["1", "2"].iter().map(move |b| vec![a.to_string(), b.to_string()]))
            .collect();
        let all_pairs = Structure::one_sorted(
            sig.clone(),
            ["1".to_owned(), "2".to_owned()],
            [
                ("E1".to_owned(), full.clone()),
                ("E2".to_owned(), full.clone()),
            ],
        )
        .unwrap();
        assert!(fpt_model_check(&all_pairs, &f2).unwrap().result);

        // y1 = 2 has no E1 partner
        let sparse = Structure::one_sorted(
            sig.clone(),
            ["1".to_owned(), "2".to_owned()],
            [
                (
                    "E1".to_owned(),
                    BTreeSet::from([vec!["1".to_owned(), "1".to_owned()]]),
                ),
                (
                    "E2".to_owned(),
                    BTreeSet::from([vec!["2".to_owned(), "2".to_owned()]]),
                ),
            ],
        )
        .unwrap();
        let out = fpt_model_check(&sparse, &f2).unwrap();
        assert!(!out.result);
        assert_eq!(out.report.thickness, 3);

        let esig = crate::logic::Signature::one_sorted([("E".to_owned(), 2)]);
        let empty = Structure::one_sorted(esig.clone(), ["1".to_owned()], []).unwrap();
        let witness = crate::logic::parse_formula("exists x. E(x,x)", &esig).unwrap();
        assert!(!fpt_model_check(&empty, &witness).unwrap().result);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let s = structure(&["1", "2", "3"], &[("1", "2"), ("2", "3")]);
        let f = parse_formula("forall x. exists y. (E(x,y) | E(y,x))", s.signature()).unwrap();
        let a = bounded_var_eval(&s, &f).unwrap();
        let b = bounded_var_eval(&s, &f).unwrap();
        assert_eq!(a, b);
        let (_, s1) = bounded_var_eval_with_stats(&s, &f).unwrap();
        let (_, s2) = bounded_var_eval_with_stats(&s, &f).unwrap();
        assert_eq!(s1.max_table_rows, s2.max_table_rows);
        assert_eq!(s1.node_count, s2.node_count);
    }

    #[test]
    fn empty_universe_division() {
        let sig = Signature::one_sorted([("E".to_owned(), 2)]);
        let s = Structure::one_sorted(sig, [], []).unwrap();
        let f = parse_formula("forall x. E(x,x)", s.signature()).unwrap();
        assert!(bounded_var_eval(&s, &f).unwrap().as_bool());
        let g = parse_formula("exists x. E(x,x)", s.signature()).unwrap();
        assert!(!bounded_var_eval(&s, &g).unwrap().as_bool());
    }
}
