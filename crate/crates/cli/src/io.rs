//! File loading: queries, structures (JSON or a directory of CSVs), plain
//! signatures, and edge-list graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use folio_core::hypergraph::Graph;
use folio_core::logic::{parse_formula, Formula, Signature, Structure};

/// Reads a query file: comments (`#`) and blank lines are allowed, the rest
/// is one formula.
pub fn load_query_text(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read query file {}", path.display()))?;
    Ok(text)
}

/// Parses the query against an explicit signature, the signature of a loaded
/// structure, or a one-sorted signature inferred from the text.
pub fn parse_query(text: &str, sig: Option<&Signature>) -> Result<(Formula, Signature)> {
    let sig = match sig {
        Some(s) => s.clone(),
        None => infer_signature(text)?,
    };
    let formula = parse_formula(text, &sig)?;
    Ok((formula, sig))
}

/// One-sorted signature inferred from the query text: every identifier
/// applied to parentheses becomes a relation with the arity of its first
/// occurrence.
pub fn infer_signature(text: &str) -> Result<Signature> {
    let mut relations: BTreeMap<String, usize> = BTreeMap::new();
    let mut chars = text.chars().peekable();
    let mut current = String::new();
    while let Some(c) = chars.next() {
        if c == '#' {
            for c in chars.by_ref() {
                if c == '\n' {
                    break;
                }
            }
            current.clear();
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            current.push(c);
            continue;
        }
        if c == '(' && !current.is_empty() && current != "exists" && current != "forall" {
            // count comma-separated arguments until the matching paren
            let mut arity = 1usize;
            let mut depth = 1usize;
            for c in chars.by_ref() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    ',' if depth == 1 => arity += 1,
                    _ => {}
                }
            }
            let name = std::mem::take(&mut current);
            if let Some(prev) = relations.insert(name.clone(), arity) {
                if prev != arity {
                    bail!("relation `{name}` used with arities {prev} and {arity}");
                }
            }
            continue;
        }
        current.clear();
    }
    if relations.is_empty() {
        bail!("no atoms found in the query");
    }
    Ok(Signature::one_sorted(relations))
}

/// Loads a structure from a JSON file or from a directory of CSV files (one
/// file per relation, header row of sort names, one tuple per row; universes
/// are the unions of the observed column values).
pub fn load_structure(path: &Path) -> Result<Structure> {
    if path.is_dir() {
        return load_structure_csv_dir(path);
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read structure file {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Ok(Structure::from_json(&value)?)
}

fn load_structure_csv_dir(dir: &Path) -> Result<Structure> {
    let mut relations: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut tuples: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();
    let mut universes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort_by_key(|e| e.path());
    if entries.is_empty() {
        bail!("no .csv files in {}", dir.display());
    }
    for entry in entries {
        let path = entry.path();
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .context("relation file name")?
            .to_owned();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&path)?;
        let sorts: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        if sorts.is_empty() || sorts.iter().any(|s| s.is_empty()) {
            bail!("{}: header must list the sort of every column", path.display());
        }
        let mut rel_tuples = BTreeSet::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != sorts.len() {
                bail!("{}: row width differs from header", path.display());
            }
            let tuple: Vec<String> = record.iter().map(|f| f.to_owned()).collect();
            for (elem, sort) in tuple.iter().zip(&sorts) {
                universes.entry(sort.clone()).or_default().insert(elem.clone());
            }
            rel_tuples.insert(tuple);
        }
        for sort in &sorts {
            universes.entry(sort.clone()).or_default();
        }
        relations.insert(name.clone(), sorts);
        tuples.insert(name, rel_tuples);
    }
    let sig = Signature::new(universes.keys().cloned(), relations)?;
    Ok(Structure::new(sig, universes, tuples)?)
}

/// Loads a signature from JSON: `{ "sorts": [...], "relations": { name: [sort, ...] } }`.
pub fn load_signature(path: &Path) -> Result<Signature> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read signature file {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let sorts: Vec<String> = serde_json::from_value(
        value
            .get("sorts")
            .cloned()
            .context("signature needs a `sorts` array")?,
    )?;
    let relations: BTreeMap<String, Vec<String>> = serde_json::from_value(
        value
            .get("relations")
            .cloned()
            .context("signature needs a `relations` object")?,
    )?;
    Ok(Signature::new(sorts, relations)?)
}

/// Loads a graph from edge-list text: one `u v` pair per line; a line with a
/// single token declares an isolated vertex.
pub fn load_graph(path: &Path) -> Result<Graph<String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read graph file {}", path.display()))?;
    let mut g: Graph<String> = Graph::from_edges(Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(u), None, _) => g.add_vertex(u.to_owned()),
            (Some(u), Some(v), None) => g.add_edge(u.to_owned(), v.to_owned()),
            _ => bail!("line {}: expected `u v`", lineno + 1),
        }
    }
    Ok(g)
}
