use std::fmt::Write;

use crate::logic::{Formula, Quantifier, DEFAULT_SORT};

/// Prints a formula in the concrete grammar. Round-trips: parsing the output
/// against the same signature yields a structurally equal formula.
///
/// Conventions: `&` binds tighter than `|`; a quantifier's scope runs to the
/// end of its group, so quantified subformulas are parenthesized whenever
/// they occur under a connective; quantifier bodies that are conjunctions or
/// disjunctions are parenthesized for readability; binders carry a `:sort`
/// annotation unless the sort is the one-sorted default.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    go(f, Prec::Top, &mut out);
    out
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Prec {
    Top,
    Or,
    And,
    Unary,
}

fn go(f: &Formula, ctx: Prec, out: &mut String) {
    match f {
        Formula::Atom { relation, args } => {
            out.push_str(relation);
            out.push('(');
            for (i, v) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&v.name);
            }
            out.push(')');
        }
        Formula::Not(inner) => {
            out.push('!');
            match **inner {
                Formula::Atom { .. } | Formula::Not(_) => go(inner, Prec::Unary, out),
                _ => {
                    out.push('(');
                    go(inner, Prec::Top, out);
                    out.push(')');
                }
            }
        }
        Formula::And(l, r) => {
            let wrap = ctx > Prec::And;
            if wrap {
                out.push('(');
            }
            go(l, Prec::And, out);
            out.push_str(" & ");
            // right child at unary level keeps the tree left-associated
            go(r, Prec::Unary, out);
            if wrap {
                out.push(')');
            }
        }
        Formula::Or(l, r) => {
            let wrap = ctx > Prec::Or;
            if wrap {
                out.push('(');
            }
            go(l, Prec::Or, out);
            out.push_str(" | ");
            go(r, Prec::And, out);
            if wrap {
                out.push(')');
            }
        }
        Formula::Quant { q, vars, body } => {
            let wrap = ctx > Prec::Top;
            if wrap {
                out.push('(');
            }
            out.push_str(match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            });
            for v in vars {
                out.push(' ');
                out.push_str(&v.name);
                if v.sort != DEFAULT_SORT {
                    let _ = write!(out, ":{}", v.sort);
                }
            }
            out.push_str(". ");
            match **body {
                Formula::And(..) | Formula::Or(..) => {
                    out.push('(');
                    go(body, Prec::Top, out);
                    out.push(')');
                }
                _ => go(body, Prec::Top, out),
            }
            if wrap {
                out.push(')');
            }
        }
    }
}
