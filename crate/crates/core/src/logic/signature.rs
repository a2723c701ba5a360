use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::DEFAULT_SORT;
use crate::{Error, Result};

/// A relational signature: a set of sorts and a map from relation symbol to
/// its arity, which is a nonempty word over the sorts. One-sorted signatures
/// use the single sort [`DEFAULT_SORT`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    sorts: BTreeSet<String>,
    relations: BTreeMap<String, Vec<String>>,
}

impl Signature {
    pub fn new<S, R>(sorts: S, relations: R) -> Result<Self>
    where
        S: IntoIterator<Item = String>,
        R: IntoIterator<Item = (String, Vec<String>)>,
    {
        let sig = Signature {
            sorts: sorts.into_iter().collect(),
            relations: relations.into_iter().collect(),
        };
        sig.validate()?;
        Ok(sig)
    }

    /// One-sorted signature over [`DEFAULT_SORT`]; arities given as lengths.
    pub fn one_sorted<R>(relations: R) -> Self
    where
        R: IntoIterator<Item = (String, usize)>,
    {
        Signature {
            sorts: [DEFAULT_SORT.to_owned()].into_iter().collect(),
            relations: relations
                .into_iter()
                .map(|(name, k)| (name, vec![DEFAULT_SORT.to_owned(); k]))
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, arity) in &self.relations {
            if arity.is_empty() {
                return Err(Error::InvalidSignature(format!(
                    "relation `{name}` has empty arity"
                )));
            }
            for sort in arity {
                if !self.sorts.contains(sort) {
                    return Err(Error::InvalidSignature(format!(
                        "relation `{name}` uses sort `{sort}` not in the sort set"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sorts(&self) -> &BTreeSet<String> {
        &self.sorts
    }

    pub fn relations(&self) -> &BTreeMap<String, Vec<String>> {
        &self.relations
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.contains(sort)
    }

    pub fn arity(&self, relation: &str) -> Result<&[String]> {
        self.relations
            .get(relation)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownRelation(relation.to_owned()))
    }

    /// Adds a relation symbol; errors if the name is already taken.
    pub fn add_relation(&mut self, name: &str, arity: Vec<String>) -> Result<()> {
        if self.relations.contains_key(name) {
            return Err(Error::SymbolCollision(format!(
                "relation `{name}` already declared"
            )));
        }
        for sort in &arity {
            self.sorts.insert(sort.clone());
        }
        if arity.is_empty() {
            return Err(Error::InvalidSignature(format!(
                "relation `{name}` has empty arity"
            )));
        }
        self.relations.insert(name.to_owned(), arity);
        Ok(())
    }

    pub fn is_one_sorted(&self) -> bool {
        self.sorts.len() == 1 && self.sorts.contains(DEFAULT_SORT)
    }
}
