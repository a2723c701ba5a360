use std::collections::BTreeMap;

use crate::logic::{Assignment, Formula, Quantifier, Structure, Variable};
use crate::{Error, Result};

/// Brute-force Tarskian evaluation of `formula` on `structure` under a
/// partial `assignment` that must cover the free variables.
///
/// This is the semantic oracle every other evaluator is validated against:
/// it memoizes nothing and quantifiers iterate over all universe tuples, so
/// its running time is `Theta(|B|^q)` in the number of quantified variables
/// regardless of where witnesses sit.
pub fn naive_eval(structure: &Structure, formula: &Formula, assignment: &Assignment) -> Result<bool> {
    formula.validate(structure.signature())?;
    let mut ev = Evaluator::compile(structure, formula, assignment)?;
    let node = ev.nodes.len() - 1;
    let nodes = std::mem::take(&mut ev.nodes);
    Ok(eval(&nodes, &mut ev, node))
}

/// Formula compiled to slot-indexed form. Elements are interned per sort;
/// a slot holds the element index of one variable.
struct Evaluator {
    nodes: Vec<Node>,
    slots: Vec<Option<u32>>,
    relations: Vec<Relation>,
}

enum Node {
    /// relation index + slots of the argument variables
    Atom(usize, Vec<usize>),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    /// exists?, (slot, universe size) per block variable, body node
    Quant(bool, Vec<(usize, u32)>, usize),
}

enum Relation {
    /// tuples packed 8 bits per coordinate, sorted for binary search
    Packed(Vec<u64>),
    Wide(std::collections::HashSet<Vec<u32>>),
}

impl Evaluator {
    fn compile(structure: &Structure, formula: &Formula, assignment: &Assignment) -> Result<Self> {
        // Element indices per sort, in universe iteration order.
        let mut elem_index: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for (sort, universe) in structure.universes() {
            for (i, e) in universe.iter().enumerate() {
                elem_index.insert((sort, e), i as u32);
            }
        }

        let packable = structure.max_universe_size() <= 255;
        let mut relations = Vec::new();
        let mut rel_index = BTreeMap::new();
        for (name, arity) in structure.signature().relations() {
            let tuples = structure.tuples(name)?;
            let rel = if packable && arity.len() <= 8 {
                let mut packed: Vec<u64> = tuples
                    .iter()
                    .map(|t| {
                        t.iter().zip(arity).fold(0u64, |acc, (e, sort)| {
                            (acc << 8) | u64::from(elem_index[&(sort.as_str(), e.as_str())])
                        })
                    })
                    .collect();
                packed.sort_unstable();
                Relation::Packed(packed)
            } else {
                Relation::Wide(
                    tuples
                        .iter()
                        .map(|t| {
                            t.iter()
                                .zip(arity)
                                .map(|(e, sort)| elem_index[&(sort.as_str(), e.as_str())])
                                .collect()
                        })
                        .collect(),
                )
            };
            rel_index.insert(name.clone(), relations.len());
            relations.push(rel);
        }

        let mut var_slot: BTreeMap<Variable, usize> = BTreeMap::new();
        let mut slots: Vec<Option<u32>> = Vec::new();
        for v in formula.all_variables() {
            var_slot.insert(v, slots.len());
            slots.push(None);
        }

        // Free variables must be assigned, with matching sorts.
        for v in formula.free_vars() {
            let value = assignment
                .get(&v)
                .ok_or_else(|| Error::UnassignedVariable(v.name.clone()))?;
            let idx = elem_index
                .get(&(v.sort.as_str(), value.as_str()))
                .ok_or_else(|| {
                    Error::SortMismatch(format!(
                        "assignment maps `{}` to `{}`, not an element of sort `{}`",
                        v.name, value, v.sort
                    ))
                })?;
            slots[var_slot[&v]] = Some(*idx);
        }

        let mut ev = Evaluator {
            nodes: Vec::new(),
            slots,
            relations,
        };
        ev.lower(structure, formula, &var_slot, &rel_index);
        Ok(ev)
    }

    fn lower(
        &mut self,
        structure: &Structure,
        f: &Formula,
        var_slot: &BTreeMap<Variable, usize>,
        rel_index: &BTreeMap<String, usize>,
    ) -> usize {
        let node = match f {
            Formula::Atom { relation, args } => Node::Atom(
                rel_index[relation],
                args.iter().map(|v| var_slot[v]).collect(),
            ),
            Formula::Not(inner) => {
                let c = self.lower(structure, inner, var_slot, rel_index);
                Node::Not(c)
            }
            Formula::And(l, r) => {
                let l = self.lower(structure, l, var_slot, rel_index);
                let r = self.lower(structure, r, var_slot, rel_index);
                Node::And(l, r)
            }
            Formula::Or(l, r) => {
                let l = self.lower(structure, l, var_slot, rel_index);
                let r = self.lower(structure, r, var_slot, rel_index);
                Node::Or(l, r)
            }
            Formula::Quant { q, vars, body } => {
                let body = self.lower(structure, body, var_slot, rel_index);
                let block = vars
                    .iter()
                    .map(|v| {
                        let n = structure
                            .universes()
                            .get(&v.sort)
                            .map(|u| u.len() as u32)
                            .unwrap_or(0);
                        (var_slot[v], n)
                    })
                    .collect();
                Node::Quant(matches!(q, Quantifier::Exists), block, body)
            }
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

}

fn eval(nodes: &[Node], rt: &mut Evaluator, node: usize) -> bool {
    match &nodes[node] {
        Node::Atom(rel, arg_slots) => match &rt.relations[*rel] {
            Relation::Packed(packed) => {
                let mut key = 0u64;
                for &s in arg_slots {
                    key = (key << 8) | u64::from(rt.slots[s].expect("bound variable"));
                }
                packed.binary_search(&key).is_ok()
            }
            Relation::Wide(set) => {
                let tuple: Vec<u32> = arg_slots
                    .iter()
                    .map(|&s| rt.slots[s].expect("bound variable"))
                    .collect();
                set.contains(&tuple)
            }
        },
        Node::Not(c) => !eval(nodes, rt, *c),
        Node::And(l, r) => {
            let a = eval(nodes, rt, *l);
            let b = eval(nodes, rt, *r);
            a && b
        }
        Node::Or(l, r) => {
            let a = eval(nodes, rt, *l);
            let b = eval(nodes, rt, *r);
            a || b
        }
        Node::Quant(exists, block, body) => eval_block(nodes, rt, *exists, block, *body),
    }
}

fn eval_block(
    nodes: &[Node],
    rt: &mut Evaluator,
    exists: bool,
    block: &[(usize, u32)],
    body: usize,
) -> bool {
    let Some(&(slot, n)) = block.first() else {
        return eval(nodes, rt, body);
    };
    let saved = rt.slots[slot];
    let mut acc = !exists;
    for e in 0..n {
        rt.slots[slot] = Some(e);
        let v = eval_block(nodes, rt, exists, &block[1..], body);
        acc = if exists { acc || v } else { acc && v };
    }
    rt.slots[slot] = saved;
    acc
}
