//! Named fixture sentences used across tests, golden files, and the CLI
//! self-test: the chain family `F_k` and a small set of mixed-connective
//! sentences.

use crate::logic::{Formula, Signature, Variable};

/// Signature of [`f_k`]: binary symbols `E1..Ek`.
pub fn f_k_signature(k: usize) -> Signature {
    Signature::one_sorted((1..=k).map(|i| (format!("E{i}"), 2)))
}

/// The sentence `forall y1 ... forall yk exists x (E1(y1,x) & ... & Ek(yk,x))`.
pub fn f_k(k: usize) -> Formula {
    assert!(k >= 1);
    let x = Variable::u("x");
    let conj = Formula::big_and(
        (1..=k)
            .map(|i| Formula::atom(format!("E{i}"), vec![Variable::u(format!("y{i}")), x.clone()]))
            .collect(),
    );
    let mut f = Formula::exists(vec![x], conj);
    for i in (1..=k).rev() {
        f = Formula::forall(vec![Variable::u(format!("y{i}"))], f);
    }
    f
}

/// `forall y exists x exists x2 (E(y,x) & E(x,x2))`: every element starts a
/// directed 2-walk.
pub fn chain_example() -> Formula {
    let (y, x, x2) = (Variable::u("y"), Variable::u("x"), Variable::u("x2"));
    Formula::forall(
        vec![y.clone()],
        Formula::exists(
            vec![x.clone()],
            Formula::exists(
                vec![x2.clone()],
                Formula::and(
                    Formula::atom("E", vec![y, x.clone()]),
                    Formula::atom("E", vec![x, x2]),
                ),
            ),
        ),
    )
}

pub fn chain_signature() -> Signature {
    Signature::one_sorted([("E".to_owned(), 2)])
}

/// The chain sentence extended to `depth` quantifiers: a directed walk of
/// length `depth - 1` exists from every element.
pub fn chain_depth(depth: usize) -> Formula {
    assert!(depth >= 3);
    let y = Variable::u("y");
    let xs: Vec<Variable> = (1..depth).map(|i| Variable::u(format!("x{i}"))).collect();
    let mut f = Formula::atom("E", vec![xs[depth - 3].clone(), xs[depth - 2].clone()]);
    f = Formula::exists(vec![xs[depth - 2].clone()], f);
    for i in (1..depth - 1).rev() {
        let prev = if i == 1 { y.clone() } else { xs[i - 2].clone() };
        f = Formula::exists(
            vec![xs[i - 1].clone()],
            Formula::and(Formula::atom("E", vec![prev, xs[i - 1].clone()]), f),
        );
    }
    Formula::forall(vec![y], f)
}

/// Mixed-connective fixture sentences (text form, over [`mixed_signature`]).
pub fn mixed_sentences() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "mix1",
            "forall x1. (P(x1) | exists x2. (E(x1,x2) & !Q(x2)))",
        ),
        (
            "mix2",
            "!(exists x1. exists x2. (E(x1,x2) & E(x2,x1)))",
        ),
        (
            "mix3",
            "forall x1. exists x2. (E(x1,x2) | F(x2,x1)) & P(x1)",
        ),
        (
            "mix4",
            "exists x1. (P(x1) & forall x2. (E(x1,x2) | Q(x2)))",
        ),
        (
            "mix5",
            "forall x1. forall x2. (!E(x1,x2) | exists x3. (E(x2,x3) & F(x1,x3)))",
        ),
    ]
}

pub fn mixed_signature() -> Signature {
    Signature::one_sorted([
        ("P".to_owned(), 1),
        ("Q".to_owned(), 1),
        ("E".to_owned(), 2),
        ("F".to_owned(), 2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn f_k_matches_its_text_form() {
        let sig = f_k_signature(2);
        let parsed = parse_formula(
            "forall y1. forall y2. exists x. (E1(y1,x) & E2(y2,x))",
            &sig,
        )
        .unwrap();
        assert_eq!(f_k(2), parsed);
    }

    #[test]
    fn chain_depth_three_matches_the_base_chain() {
        let sig = chain_signature();
        let expect = parse_formula(
            "forall y. exists x1. (E(y,x1) & exists x2. E(x1,x2))",
            &sig,
        )
        .unwrap();
        assert_eq!(chain_depth(3), expect);
    }

    #[test]
    fn mixed_sentences_parse() {
        let sig = mixed_signature();
        for (name, text) in mixed_sentences() {
            let f = parse_formula(text, &sig).unwrap();
            assert!(f.free_vars().is_empty(), "{name} must be a sentence");
        }
    }
}
