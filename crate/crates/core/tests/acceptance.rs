//! End-to-end acceptance suite. Each test checks one release criterion at
//! its stated tolerance and prints one pass line; run with `--nocapture` to
//! see them. All randomness is seeded, so the suite is reproducible.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use folio_core::engine::{bounded_var_eval, fpt_model_check};
use folio_core::fixtures::{chain_depth, chain_signature, f_k};
use folio_core::gadgets::{
    accordion_step, based_sentence, clique_gadget, collapse_sorts, complement_structure,
    full_sort, replace_with_pair_atoms,
};
use folio_core::gen;
use folio_core::hypergraph::{EliminationOrdering, Graph, Hypergraph};
use folio_core::logic::{
    naive_eval, parse_formula, Assignment, Formula, Quantifier, Signature, Structure, Variable,
};
use folio_core::normalize::{lay, organize};
use folio_core::thickness::{
    block_hypergraph, eliminate_block, eliminate_last_variable, minimize_variables, thickness,
};

const SEED: u64 = 0xF0110;

fn sentences_for_criteria_2_and_3() -> Vec<Formula> {
    let cfg = gen::GenConfig::default(); // <= 5 variables, <= 4 atoms, arity <= 2
    let mut r = gen::rng(SEED);
    (0..1000).map(|_| gen::random_sentence(&cfg, &mut r)).collect()
}

#[test]
fn criterion_01_thickness_of_the_chain_family() {
    let start = Instant::now();
    for k in 1..=5 {
        assert_eq!(
            thickness(&f_k(k)).unwrap(),
            k + 1,
            "thickness of F_{k} must be {}",
            k + 1
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "took {elapsed:?}, budget 10s"
    );
    println!("criterion 01 PASS: thickness(F_k) = k+1 for k=1..5 in {elapsed:?}");
}

#[test]
fn criterion_02_variable_minimization_bound() {
    let start = Instant::now();
    let sentences = sentences_for_criteria_2_and_3();
    let mut violations = 0usize;
    for f in &sentences {
        let t = thickness(f).unwrap();
        let min = minimize_variables(f).unwrap();
        if min.all_variables().len() > t {
            violations += 1;
            eprintln!("violation: `{f}` -> `{min}` uses more than {t} variables");
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(violations, 0);
    assert!(
        elapsed < Duration::from_secs(300),
        "took {elapsed:?}, budget 5min"
    );
    println!(
        "criterion 02 PASS: 1000 sentences minimized within their thickness in {elapsed:?}"
    );
}

#[test]
fn criterion_03_oracle_equivalence_across_the_pipeline() {
    let start = Instant::now();
    let sentences = sentences_for_criteria_2_and_3();
    let sig = gen::test_signature(2);
    let mut r = gen::rng(SEED ^ 0x5eed);
    let empty = Assignment::new();
    let mut disagreements = 0usize;
    for f in &sentences {
        let org = organize(f).unwrap();
        let layed = lay(f).unwrap();
        let min = minimize_variables(f).unwrap();
        for _ in 0..3 {
            let s = gen::random_structure(&sig, 3, &mut r);
            let expect = naive_eval(&s, f, &empty).unwrap();
            let checks = [
                ("org", naive_eval(&s, &org, &empty).unwrap()),
                ("lay", naive_eval(&s, &layed, &empty).unwrap()),
                ("minimize", naive_eval(&s, &min, &empty).unwrap()),
                ("bounded", bounded_var_eval(&s, f).unwrap().as_bool()),
                ("fpt", fpt_model_check(&s, f).unwrap().result),
            ];
            for (what, got) in checks {
                if got != expect {
                    disagreements += 1;
                    eprintln!("{what} disagreed with the oracle on `{f}`");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(disagreements, 0);
    assert!(
        elapsed < Duration::from_secs(600),
        "took {elapsed:?}, budget 10min"
    );
    println!(
        "criterion 03 PASS: 1000 sentences x 3 structures, all routes agree, in {elapsed:?}"
    );
}

/// Random block formula `Q V (a1 ⊙ ... ⊙ an)` over atoms, with `V` a
/// nonempty subset of the occurring variables.
fn random_block(r: &mut rand_chacha::ChaCha8Rng) -> Formula {
    use rand::prelude::*;
    let pool: Vec<Variable> = (1..=5).map(|i| Variable::u(format!("x{i}"))).collect();
    let rels = ["E", "F", "R", "S"];
    let n_atoms = r.gen_range(1..=4);
    let atoms: Vec<Formula> = (0..n_atoms)
        .map(|i| {
            let a = pool[r.gen_range(0..pool.len())].clone();
            let b = pool[r.gen_range(0..pool.len())].clone();
            Formula::atom(rels[i % rels.len()], vec![a, b])
        })
        .collect();
    let occurring: Vec<Variable> = atoms
        .iter()
        .flat_map(|a| a.free_vars())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut vars = occurring.clone();
    vars.shuffle(r);
    vars.truncate(r.gen_range(1..=vars.len()));
    let q = if r.gen_bool(0.5) {
        Quantifier::Exists
    } else {
        Quantifier::Forall
    };
    let body = match q {
        Quantifier::Exists => Formula::big_and(atoms),
        Quantifier::Forall => Formula::big_or(atoms),
    };
    Formula::quant(q, vars, body)
}

#[test]
fn criterion_04_elimination_width_bound() {
    let mut r = gen::rng(SEED ^ 0xe11a);
    let mut violations = 0usize;
    for _ in 0..500 {
        let f = random_block(&mut r);
        let h = block_hypergraph(&f).unwrap();
        let e = h.elimination_ordering_with_prefix(&f.free_vars()).unwrap();
        let parts_bound = match &f {
            Formula::Quant { q, body, .. } => {
                let parts = match q {
                    Quantifier::Exists => body.and_parts(),
                    Quantifier::Forall => body.or_parts(),
                };
                parts.iter().map(|p| p.width()).max().unwrap_or(0)
            }
            _ => unreachable!(),
        };
        let bound = parts_bound.max(1 + e.lowerdeg());
        // stepwise: each grouped subformula stays within 1 + lowerdeg
        let mut cur = f.clone();
        let mut ord = e.clone();
        loop {
            match eliminate_last_variable(&cur, &ord) {
                Ok((next, next_ord)) => {
                    if let Formula::Quant { vars, .. } = &next {
                        if !vars.is_empty() && next_ord.order().len() > next.free_vars().len() {
                            cur = next;
                            ord = next_ord;
                            continue;
                        }
                    }
                    cur = next;
                    break;
                }
                Err(err) => panic!("elimination failed: {err}"),
            }
        }
        let result = eliminate_block(&f, &e).unwrap();
        if result.width() > bound {
            violations += 1;
            eprintln!(
                "width {} > bound {bound} after eliminating `{f}`",
                result.width()
            );
        }
        let _ = cur;
    }
    assert_eq!(violations, 0);
    println!("criterion 04 PASS: elimination width bound held on 500 block formulas");
}

#[test]
fn criterion_05_treewidth_exactness() {
    fn brute(h: &Hypergraph<String>) -> usize {
        fn perms(items: &[String]) -> Vec<Vec<String>> {
            if items.is_empty() {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.to_vec();
                let x = rest.remove(i);
                for mut tail in perms(&rest) {
                    tail.insert(0, x.clone());
                    out.push(tail);
                }
            }
            out
        }
        let verts: Vec<String> = h.vertices().iter().cloned().collect();
        if verts.is_empty() {
            return 0;
        }
        perms(&verts)
            .into_iter()
            .map(|o| EliminationOrdering::fill_for_order(h, o).lowerdeg())
            .min()
            .unwrap()
    }

    let start = Instant::now();
    let mut r = gen::rng(SEED ^ 0x7ee);
    for i in 0..200 {
        let h = gen::random_hypergraph(7, 6, &mut r);
        assert_eq!(h.treewidth().unwrap(), brute(&h), "sample {i}: {h:?}");
    }
    // known families
    for k in 2..=6usize {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                edges.push(vec![format!("v{i}"), format!("v{j}")]);
            }
        }
        assert_eq!(Hypergraph::from_edges(edges).treewidth().unwrap(), k - 1);
    }
    let path = Hypergraph::from_edges((0..5).map(|i| vec![format!("v{i}"), format!("v{}", i + 1)]));
    assert_eq!(path.treewidth().unwrap(), 1);
    let cycle =
        Hypergraph::from_edges((0..6).map(|i| vec![format!("v{i}"), format!("v{}", (i + 1) % 6)]));
    assert_eq!(cycle.treewidth().unwrap(), 2);
    let mut grid = Vec::new();
    for row in 0..3 {
        for col in 0..3 {
            if col + 1 < 3 {
                grid.push(vec![format!("{row}{col}"), format!("{row}{}", col + 1)]);
            }
            if row + 1 < 3 {
                grid.push(vec![format!("{row}{col}"), format!("{}{col}", row + 1)]);
            }
        }
    }
    assert_eq!(Hypergraph::from_edges(grid).treewidth().unwrap(), 3);
    println!(
        "criterion 05 PASS: treewidth exact on 200 samples and the known families in {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_06_ordering_prefix_property() {
    let mut r = gen::rng(SEED ^ 0x0bde);
    let mut checked = 0usize;
    while checked < 200 {
        let h = gen::random_hypergraph(7, 5, &mut r);
        let Some(f) = h.edges().iter().find(|e| !e.is_empty()).cloned() else {
            continue;
        };
        let e = h.elimination_ordering_with_prefix(&f).unwrap();
        let prefix: BTreeSet<String> = e.order().iter().take(f.len()).cloned().collect();
        assert_eq!(prefix, f, "prefix mismatch on {h:?}");
        assert_eq!(e.lowerdeg(), h.treewidth().unwrap(), "lowerdeg on {h:?}");
        e.validate_for(&h).unwrap();
        checked += 1;
    }
    println!("criterion 06 PASS: 200 orderings start with f and reach the treewidth");
}

#[test]
fn criterion_07_clique_gadget_agrees_with_brute_force() {
    let sig = Signature::one_sorted([
        ("F1".to_owned(), 2),
        ("F2".to_owned(), 2),
        ("F3".to_owned(), 2),
        ("F4".to_owned(), 2),
        ("F5".to_owned(), 2),
        ("F6".to_owned(), 2),
        ("P".to_owned(), 1),
    ]);
    // one detection sentence per clique size; k = 3 carries extra context
    let theta2 = parse_formula("exists x1 x2. F1(x1,x2)", &sig).unwrap();
    let theta3 = parse_formula(
        "(exists x1 x2 x3. (F1(x1,x2) & F2(x1,x3) & F3(x2,x3))) & forall z. P(z)",
        &sig,
    )
    .unwrap();
    let theta4 = parse_formula(
        "exists x1 x2 x3 x4. (F1(x1,x2) & F2(x1,x3) & F3(x1,x4) & F4(x2,x3) & F5(x2,x4) & F6(x3,x4))",
        &sig,
    )
    .unwrap();

    let mut r = gen::rng(SEED ^ 0xc11e);
    use rand::prelude::*;
    let densities = [0.0, 0.05, 0.15, 0.3, 0.5, 0.7, 0.85];
    let mut with_clique = 0usize;
    let mut without = 0usize;
    for i in 0..200 {
        let n = r.gen_range(2..=7);
        let p = densities[i % densities.len()];
        let g = gen::random_graph(n, p, &mut r);
        let (k, theta) = match i % 3 {
            0 => (2, &theta2),
            1 => (3, &theta3),
            _ => (4, &theta4),
        };
        if n < k {
            continue;
        }
        let b = clique_gadget(k, theta, &g).unwrap();
        let expect = g.has_k_clique(k);
        let got = naive_eval(&b, theta, &Assignment::new()).unwrap();
        assert_eq!(got, expect, "sample {i}: k={k}, graph {g:?}");
        if expect {
            with_clique += 1;
        } else {
            without += 1;
        }
    }
    assert!(with_clique >= 30, "only {with_clique} positive instances");
    assert!(without >= 30, "only {without} negative instances");
    println!(
        "criterion 07 PASS: clique gadget exact on 200 graphs ({with_clique} with, {without} without)"
    );
}

#[test]
fn criterion_08_accordion_equivalence_and_measure() {
    use rand::prelude::*;
    let mut r = gen::rng(SEED ^ 0xacc0);
    let mut done = 0usize;
    let mut truths = 0usize;
    let mut falses = 0usize;
    let mut case_counts = [0usize; 3];
    while done < 50 {
        // fully sorted skeleton: context variables w1..wf, block v1..vb
        let f_count = r.gen_range(2..=3);
        let v_count = if f_count == 2 { r.gen_range(1..=2) } else { 2 };
        let ws: Vec<Variable> = (1..=f_count)
            .map(|i| Variable::new(format!("w{i}"), format!("w{i}")))
            .collect();
        let vs: Vec<Variable> = (1..=v_count)
            .map(|i| Variable::new(format!("v{i}"), format!("v{i}")))
            .collect();
        // atoms connect each w to a block variable, plus a chain inside
        let mut atoms = Vec::new();
        for (i, w) in ws.iter().enumerate() {
            let v = &vs[i % vs.len()];
            atoms.push(Formula::atom(
                format!("R{}", i + 1),
                vec![w.clone(), v.clone()],
            ));
        }
        if vs.len() == 2 {
            atoms.push(Formula::atom("T", vec![vs[0].clone(), vs[1].clone()]));
        }
        let case = done % 3;
        let (inner_q, outer_q) = match (case, done % 2) {
            (2, _) => (Quantifier::Forall, Quantifier::Forall),
            (1, 0) => (Quantifier::Forall, Quantifier::Forall), // universal based sentence
            _ => (Quantifier::Exists, Quantifier::Forall),
        };
        let body = match inner_q {
            Quantifier::Exists => Formula::big_and(atoms.clone()),
            Quantifier::Forall => Formula::big_or(atoms.clone()),
        };
        let simple = Formula::quant(inner_q, vs.clone(), body);
        let mut phi = simple.clone();
        for w in ws.iter().rev() {
            phi = Formula::quant(outer_q, vec![w.clone()], phi);
        }
        let path: Vec<usize> = vec![0; ws.len()];

        // psi and its signature per case
        let (psi, psi_sig) = match case {
            0 | 2 => {
                let Ok((psi, symbols)) = replace_with_pair_atoms(&phi, &path) else {
                    done += 1;
                    continue;
                };
                let mut rels: Vec<(String, Vec<String>)> = Vec::new();
                let free: Vec<Variable> = simple.free_vars().into_iter().collect();
                let mut idx = 0;
                for i in 0..free.len() {
                    for j in i + 1..free.len() {
                        rels.push((
                            symbols[idx].clone(),
                            vec![free[i].sort.clone(), free[j].sort.clone()],
                        ));
                        idx += 1;
                    }
                }
                let sorts: BTreeSet<String> = ws.iter().map(|w| w.sort.clone()).collect();
                (psi, Signature::new(sorts, rels).unwrap())
            }
            _ => {
                let psi = based_sentence(&simple).unwrap();
                let mut rels: Vec<(String, Vec<String>)> = Vec::new();
                for (rel, args) in psi.atoms() {
                    rels.push((
                        rel.to_owned(),
                        args.iter().map(|v| v.sort.clone()).collect(),
                    ));
                }
                let sorts: BTreeSet<String> = vs.iter().map(|v| v.sort.clone()).collect();
                (psi, Signature::new(sorts, rels).unwrap())
            }
        };
        // random structure over psi's signature, universes of size 1..=3
        let mut universes = std::collections::BTreeMap::new();
        for sort in psi_sig.sorts() {
            let size = r.gen_range(1..=3);
            universes.insert(
                sort.clone(),
                (0..size).map(|e| format!("{e}")).collect::<BTreeSet<String>>(),
            );
        }
        let mut interp = std::collections::BTreeMap::new();
        for (name, arity) in psi_sig.relations() {
            let density: f64 = r.gen_range(0.2..0.9);
            let mut all: Vec<Vec<String>> = vec![vec![]];
            for sort in arity {
                let mut next = Vec::new();
                for t in &all {
                    for e in &universes[sort] {
                        let mut t2 = t.clone();
                        t2.push(e.clone());
                        next.push(t2);
                    }
                }
                all = next;
            }
            let tuples: BTreeSet<Vec<String>> =
                all.into_iter().filter(|_| r.gen_bool(density)).collect();
            interp.insert(name.clone(), tuples);
        }
        let a = Structure::new(psi_sig, universes, interp).unwrap();

        let b = accordion_step(&psi, &phi, &a).unwrap();
        let lhs = naive_eval(&a, &psi, &Assignment::new()).unwrap();
        let rhs = naive_eval(&b, &phi, &Assignment::new()).unwrap();
        assert_eq!(lhs, rhs, "case {case}: psi `{psi}` phi `{phi}`");
        if lhs {
            truths += 1;
        } else {
            falses += 1;
        }
        case_counts[case] += 1;
        done += 1;
    }
    assert!(case_counts.iter().all(|&c| c > 0), "all cases covered");
    assert!(truths > 0 && falses > 0, "both truth values exercised");
    println!(
        "criterion 08 PASS: 50 accordion triples exact (cases {case_counts:?}, {truths} true / {falses} false), measure bound never fired"
    );
}

#[test]
fn criterion_09_scaling_contrast() {
    let f = chain_depth(6);
    let sig = chain_signature();
    let mut r = gen::rng(SEED ^ 0x5ca1e);

    let s200 = gen::random_structure_exact(&sig, 200, 0.05, &mut r);
    let t0 = Instant::now();
    let out200 = fpt_model_check(&s200, &f).unwrap();
    let fpt200 = t0.elapsed();
    assert!(
        fpt200 < Duration::from_secs(2),
        "fpt on |B|=200 took {fpt200:?}"
    );

    let s30 = gen::random_structure_exact(&sig, 30, 0.2, &mut r);
    let t1 = Instant::now();
    let out30 = fpt_model_check(&s30, &f).unwrap();
    let fpt30 = t1.elapsed();
    let t2 = Instant::now();
    let naive30 = naive_eval(&s30, &f, &Assignment::new()).unwrap();
    let naive_time = t2.elapsed();
    assert_eq!(out30.result, naive30);
    let ratio = naive_time.as_secs_f64() / fpt30.as_secs_f64().max(1e-9);
    assert!(
        ratio > 60.0,
        "naive/fpt ratio {ratio:.1} did not demonstrate the advantage"
    );
    println!(
        "criterion 09 PASS: fpt |B|=200 in {fpt200:?} (result {}), naive/fpt ratio at |B|=30 is {ratio:.0}x",
        out200.result
    );
}

#[test]
fn criterion_10_sort_collapse_and_complementation() {
    use rand::prelude::*;
    let mut r = gen::rng(SEED ^ 0x50c0);

    // sort collapse: 100 seeded multi-sorted instances
    for i in 0..100 {
        let n_atoms = r.gen_range(1..=3);
        let pool: Vec<Variable> = (1..=4).map(|j| Variable::u(format!("x{j}"))).collect();
        let mut atoms = Vec::new();
        for j in 0..n_atoms {
            let mut vars = pool.clone();
            vars.shuffle(&mut r);
            vars.truncate(r.gen_range(1..=2));
            atoms.push(Formula::atom(format!("R{j}"), vars));
        }
        let used: Vec<Variable> = atoms
            .iter()
            .flat_map(|a| a.free_vars())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let q = if r.gen_bool(0.5) {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        };
        let body = match q {
            Quantifier::Exists => Formula::big_and(atoms),
            Quantifier::Forall => Formula::big_or(atoms),
        };
        let psi = Formula::quant(q, used, body);
        let Ok((fpsi, fsig)) = full_sort(&psi) else {
            continue; // repeated variable in an atom; skip the draw
        };
        // random multi-sorted structure over fsig
        let mut universes = std::collections::BTreeMap::new();
        for sort in fsig.sorts() {
            let size = r.gen_range(1..=3);
            universes.insert(
                sort.clone(),
                (0..size).map(|e| format!("{e}")).collect::<BTreeSet<String>>(),
            );
        }
        let mut interp = std::collections::BTreeMap::new();
        for (name, arity) in fsig.relations() {
            let density: f64 = r.gen_range(0.2..0.9);
            let mut all: Vec<Vec<String>> = vec![vec![]];
            for sort in arity {
                let mut next = Vec::new();
                for t in &all {
                    for e in &universes[sort] {
                        let mut t2 = t.clone();
                        t2.push(e.clone());
                        next.push(t2);
                    }
                }
                all = next;
            }
            interp.insert(
                name.clone(),
                all.into_iter()
                    .filter(|_| r.gen_bool(density))
                    .collect::<BTreeSet<_>>(),
            );
        }
        let b = Structure::new(fsig, universes, interp).unwrap();
        let collapsed = collapse_sorts(&psi, &b).unwrap();
        let lhs = naive_eval(&b, &fpsi, &Assignment::new()).unwrap();
        let rhs = naive_eval(&collapsed, &psi, &Assignment::new()).unwrap();
        assert_eq!(lhs, rhs, "collapse sample {i} on `{psi}`");
    }

    // complementation: 100 seeded instances with negations on atoms
    let sig = Signature::one_sorted([
        ("R0".to_owned(), 2),
        ("R1".to_owned(), 2),
        ("R2".to_owned(), 1),
    ]);
    for i in 0..100 {
        let pool: Vec<Variable> = (1..=3).map(|j| Variable::u(format!("x{j}"))).collect();
        let mut members = Vec::new();
        for j in 0..r.gen_range(2..=3usize) {
            let arity = sig.arity(&format!("R{j}")).unwrap().len();
            let mut vars = Vec::new();
            for _ in 0..arity {
                vars.push(pool[r.gen_range(0..pool.len())].clone());
            }
            let atom = Formula::atom(format!("R{j}"), vars);
            members.push(if r.gen_bool(0.5) {
                Formula::not(atom)
            } else {
                atom
            });
        }
        let used: Vec<Variable> = members
            .iter()
            .flat_map(|a| a.free_vars())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let q = if r.gen_bool(0.5) {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        };
        let body = match q {
            Quantifier::Exists => Formula::big_and(members),
            Quantifier::Forall => Formula::big_or(members),
        };
        let phi = Formula::quant(q, used, body);
        let b = gen::random_structure(&sig, 3, &mut r);
        let (psi, b2) = complement_structure(&phi, &b).unwrap();
        let lhs = naive_eval(&b, &phi, &Assignment::new()).unwrap();
        let rhs = naive_eval(&b2, &psi, &Assignment::new()).unwrap();
        assert_eq!(lhs, rhs, "complement sample {i} on `{phi}`");
    }
    println!("criterion 10 PASS: 100 sort collapses and 100 complementations oracle-exact");
}

#[test]
fn acceptance_gadget_graph_dual_route() {
    // sanity tying the graph oracle to the formula oracle on the K4 family
    let sig = Signature::one_sorted([
        ("F1".to_owned(), 2),
        ("F2".to_owned(), 2),
        ("F3".to_owned(), 2),
    ]);
    let theta = parse_formula(
        "exists x1 x2 x3. (F1(x1,x2) & F2(x1,x3) & F3(x2,x3))",
        &sig,
    )
    .unwrap();
    let g: Graph<String> = Graph::from_edges([
        ("a".to_owned(), "b".to_owned()),
        ("b".to_owned(), "c".to_owned()),
        ("c".to_owned(), "d".to_owned()),
        ("d".to_owned(), "a".to_owned()),
    ]);
    let b = clique_gadget(3, &theta, &g).unwrap();
    assert!(!naive_eval(&b, &theta, &Assignment::new()).unwrap());
    assert!(!g.has_k_clique(3));
}
