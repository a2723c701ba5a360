//! Randomized invariant suites behind `folio selftest`. Every suite is
//! seeded; a violation prints the counterexample (formula and structure
//! JSON) and the command exits with code 4.

use anyhow::Result;
use folio_core::engine::{bounded_var_eval, fpt_model_check};
use folio_core::gen;
use folio_core::hypergraph::EliminationOrdering;
use folio_core::logic::{naive_eval, parse_formula, print_formula, Assignment, Structure};
use folio_core::normalize::{is_layered, lay, organize};
use folio_core::thickness::{minimize_variables, thickness};

pub struct SelftestOutcome {
    pub suites: Vec<(String, usize, usize)>, // name, cases, violations
}

impl SelftestOutcome {
    pub fn violations(&self) -> usize {
        self.suites.iter().map(|(_, _, v)| v).sum()
    }
}

fn report_counterexample(what: &str, formula_text: &str, s: Option<&Structure>) {
    eprintln!("counterexample ({what}):");
    eprintln!("  formula: {formula_text}");
    if let Some(s) = s {
        eprintln!(
            "  structure: {}",
            serde_json::to_string(&s.to_json()).unwrap_or_default()
        );
    }
}

/// Runs all suites with `cases` iterations each. `inject_mutant` flips the
/// organize output to its dual in the equivalence suite, so a healthy
/// harness must report violations; it exists to test the harness itself.
pub fn run(seed: u64, cases: usize, inject_mutant: bool) -> Result<SelftestOutcome> {
    let cfg = gen::GenConfig::default();
    let sig = gen::test_signature(2);
    let mut suites = Vec::new();

    // round-trip through the grammar
    {
        let mut r = gen::rng(seed);
        let mut violations = 0usize;
        for _ in 0..cases {
            let f = gen::random_formula(&cfg, &mut r);
            let printed = print_formula(&f);
            match parse_formula(&printed, &sig) {
                Ok(back) if back == f => {}
                _ => {
                    violations += 1;
                    report_counterexample("parse/print round-trip", &printed, None);
                }
            }
        }
        suites.push(("roundtrip".to_owned(), cases, violations));
    }

    // organize / lay equivalence against the oracle
    {
        let mut r = gen::rng(seed ^ 1);
        let mut violations = 0usize;
        for _ in 0..cases {
            let f = gen::random_formula(&cfg, &mut r);
            let (Ok(mut org), Ok(layed)) = (organize(&f), lay(&f)) else {
                violations += 1;
                report_counterexample("normalize size limit", &print_formula(&f), None);
                continue;
            };
            if inject_mutant {
                org = org.dual();
            }
            let s = gen::random_structure(&sig, 3, &mut r);
            for (what, g) in [("organize", &org), ("lay", &layed)] {
                match gen::naive_disagreement(&f, g, &s) {
                    Ok(None) => {}
                    _ => {
                        violations += 1;
                        report_counterexample(what, &print_formula(&f), Some(&s));
                    }
                }
            }
        }
        suites.push(("normalize-equivalence".to_owned(), cases * 2, violations));
    }

    // lay leaves are layered
    {
        let mut r = gen::rng(seed ^ 2);
        let mut violations = 0usize;
        for _ in 0..cases {
            let f = gen::random_formula(&cfg, &mut r);
            let Ok(layed) = lay(&f) else {
                violations += 1;
                continue;
            };
            for (_, leaf) in folio_core::thickness::positively_combined_subformulas(&layed) {
                if !is_layered(leaf) {
                    violations += 1;
                    report_counterexample("lay leaf layered", &print_formula(&f), None);
                }
            }
        }
        suites.push(("lay-leaves".to_owned(), cases, violations));
    }

    // minimize: variable bound and equivalence
    {
        let mut r = gen::rng(seed ^ 3);
        let mut violations = 0usize;
        for _ in 0..cases {
            let f = gen::random_sentence(&cfg, &mut r);
            let t = match thickness(&f) {
                Ok(t) => t,
                Err(_) => {
                    violations += 1;
                    continue;
                }
            };
            let min = match minimize_variables(&f) {
                Ok(m) => m,
                Err(_) => {
                    violations += 1;
                    continue;
                }
            };
            if min.all_variables().len() > t {
                violations += 1;
                report_counterexample("minimize variable bound", &print_formula(&f), None);
            }
            let s = gen::random_structure(&sig, 3, &mut r);
            if gen::naive_disagreement(&f, &min, &s).ok().flatten().is_some() {
                violations += 1;
                report_counterexample("minimize equivalence", &print_formula(&f), Some(&s));
            }
        }
        suites.push(("minimize".to_owned(), cases, violations));
    }

    // engines agree with the oracle
    {
        let mut r = gen::rng(seed ^ 4);
        let mut violations = 0usize;
        for _ in 0..cases {
            let f = gen::random_sentence(&cfg, &mut r);
            let s = gen::random_structure(&sig, 3, &mut r);
            let empty = Assignment::new();
            let expect = naive_eval(&s, &f, &empty);
            let bounded = bounded_var_eval(&s, &f).map(|t| t.as_bool());
            let fpt = fpt_model_check(&s, &f).map(|o| o.result);
            match (expect, bounded, fpt) {
                (Ok(e), Ok(b), Ok(p)) if e == b && e == p => {}
                _ => {
                    violations += 1;
                    report_counterexample("engine agreement", &print_formula(&f), Some(&s));
                }
            }
        }
        suites.push(("engines".to_owned(), cases, violations));
    }

    // treewidth against factorial brute force on small hypergraphs
    {
        let mut r = gen::rng(seed ^ 5);
        let n = cases.div_ceil(5);
        let mut violations = 0usize;
        for _ in 0..n {
            let h = gen::random_hypergraph(5, 4, &mut r);
            let verts: Vec<String> = h.vertices().iter().cloned().collect();
            let brute = all_orders(&verts)
                .into_iter()
                .map(|o| EliminationOrdering::fill_for_order(&h, o).lowerdeg())
                .min()
                .unwrap_or(0);
            if h.treewidth().ok() != Some(brute) {
                violations += 1;
                eprintln!("counterexample (treewidth): {h:?}");
            }
        }
        suites.push(("treewidth".to_owned(), n, violations));
    }

    Ok(SelftestOutcome { suites })
}

fn all_orders(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in all_orders(&rest) {
            tail.insert(0, x.clone());
            out.push(tail);
        }
    }
    out
}
