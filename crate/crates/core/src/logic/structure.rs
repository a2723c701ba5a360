use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{Signature, Variable};
use crate::{Error, Result};

/// A finite structure: per-sort universes plus an interpretation (a set of
/// element tuples) for every relation symbol of the signature. Elements are
/// opaque strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    sig: Signature,
    universes: BTreeMap<String, BTreeSet<String>>,
    interpretations: BTreeMap<String, BTreeSet<Vec<String>>>,
}

/// A partial map from variables to universe elements.
pub type Assignment = BTreeMap<Variable, String>;

impl Structure {
    pub fn new(
        sig: Signature,
        universes: BTreeMap<String, BTreeSet<String>>,
        interpretations: BTreeMap<String, BTreeSet<Vec<String>>>,
    ) -> Result<Self> {
        let s = Structure {
            sig,
            universes,
            interpretations,
        };
        s.validate()?;
        Ok(s)
    }

    /// One-sorted structure over universe `elems`; every relation of `sig`
    /// must be interpreted in `interpretations` (possibly empty).
    pub fn one_sorted<I, T>(sig: Signature, elems: I, interpretations: T) -> Result<Self>
    where
        I: IntoIterator<Item = String>,
        T: IntoIterator<Item = (String, BTreeSet<Vec<String>>)>,
    {
        let mut universes = BTreeMap::new();
        universes.insert(
            crate::logic::DEFAULT_SORT.to_owned(),
            elems.into_iter().collect(),
        );
        let mut interp: BTreeMap<String, BTreeSet<Vec<String>>> =
            interpretations.into_iter().collect();
        for name in sig.relations().keys() {
            interp.entry(name.clone()).or_default();
        }
        Structure::new(sig, universes, interp)
    }

    fn validate(&self) -> Result<()> {
        for sort in self.sig.sorts() {
            if !self.universes.contains_key(sort) {
                return Err(Error::InvalidStructure(format!(
                    "sort `{sort}` has no universe"
                )));
            }
        }
        for (name, arity) in self.sig.relations() {
            let tuples = self.interpretations.get(name).ok_or_else(|| {
                Error::InvalidStructure(format!("relation `{name}` is not interpreted"))
            })?;
            for t in tuples {
                if t.len() != arity.len() {
                    return Err(Error::InvalidStructure(format!(
                        "tuple of length {} in `{name}` (arity {})",
                        t.len(),
                        arity.len()
                    )));
                }
                for (elem, sort) in t.iter().zip(arity) {
                    if !self.universes[sort].contains(elem) {
                        return Err(Error::InvalidStructure(format!(
                            "element `{elem}` of a `{name}` tuple is not in the universe of `{sort}`"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn universe(&self, sort: &str) -> Result<&BTreeSet<String>> {
        self.universes
            .get(sort)
            .ok_or_else(|| Error::UnknownSort(sort.to_owned()))
    }

    pub fn universes(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.universes
    }

    pub fn tuples(&self, relation: &str) -> Result<&BTreeSet<Vec<String>>> {
        self.interpretations
            .get(relation)
            .ok_or_else(|| Error::UnknownRelation(relation.to_owned()))
    }

    pub fn interpretations(&self) -> &BTreeMap<String, BTreeSet<Vec<String>>> {
        &self.interpretations
    }

    /// Size of the largest sort universe.
    pub fn max_universe_size(&self) -> usize {
        self.universes.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Replaces the interpretation of `relation` (which must exist in the
    /// signature) with `tuples`.
    pub fn set_tuples(&mut self, relation: &str, tuples: BTreeSet<Vec<String>>) -> Result<()> {
        self.sig.arity(relation)?;
        self.interpretations.insert(relation.to_owned(), tuples);
        self.validate()
    }

    /// All tuples of the product of the universes of `arity`.
    pub fn full_relation(&self, arity: &[String]) -> BTreeSet<Vec<String>> {
        let mut acc: Vec<Vec<String>> = vec![vec![]];
        for sort in arity {
            let universe = match self.universes.get(sort) {
                Some(u) => u,
                None => return BTreeSet::new(),
            };
            let mut next = Vec::with_capacity(acc.len() * universe.len());
            for partial in &acc {
                for elem in universe {
                    let mut t = partial.clone();
                    t.push(elem.clone());
                    next.push(t);
                }
            }
            acc = next;
        }
        acc.into_iter().collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StructureFile::from(self)).expect("structure serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let file: StructureFile = serde_json::from_value(value.clone())?;
        file.into_structure()
    }
}

/// On-disk JSON form of a structure:
/// `{ "sorts": [...], "universes": { sort: [elem,...] },
///    "relations": { name: { "arity": [sort,...], "tuples": [[elem,...],...] } } }`
#[derive(Debug, Serialize, Deserialize)]
pub struct StructureFile {
    pub sorts: Vec<String>,
    pub universes: BTreeMap<String, Vec<String>>,
    pub relations: BTreeMap<String, RelationFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RelationFile {
    pub arity: Vec<String>,
    pub tuples: Vec<Vec<String>>,
}

impl From<&Structure> for StructureFile {
    fn from(s: &Structure) -> Self {
        StructureFile {
            sorts: s.sig.sorts().iter().cloned().collect(),
            universes: s
                .universes
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            relations: s
                .sig
                .relations()
                .iter()
                .map(|(name, arity)| {
                    (
                        name.clone(),
                        RelationFile {
                            arity: arity.clone(),
                            tuples: s.interpretations[name].iter().cloned().collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}

impl StructureFile {
    pub fn into_structure(self) -> Result<Structure> {
        let sig = Signature::new(
            self.sorts,
            self.relations
                .iter()
                .map(|(name, r)| (name.clone(), r.arity.clone())),
        )?;
        let universes = self
            .universes
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect();
        let interpretations = self
            .relations
            .into_iter()
            .map(|(name, r)| (name, r.tuples.into_iter().collect()))
            .collect();
        Structure::new(sig, universes, interpretations)
    }
}
