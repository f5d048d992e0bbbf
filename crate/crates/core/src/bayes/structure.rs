//! Directed acyclic structure over attributes, plus the line-oriented
//! structure file format.

use std::io::{BufRead, BufReader, Read, Write};

use crate::dataset::AttributeSchema;
use crate::error::{Error, Result};

/// Parent lists of a directed acyclic graph over attribute indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStructure {
    parents: Vec<Vec<usize>>,
}

impl NetworkStructure {
    /// Builds a structure from per-node parent lists, rejecting self-parents,
    /// duplicate parents, out-of-range indices, and cycles. Parent lists are
    /// kept sorted.
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = parents.len();
        let mut sorted = parents;
        for (child, list) in sorted.iter_mut().enumerate() {
            list.sort_unstable();
            for pair in list.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::InvalidStructure {
                        message: format!("node {child} has duplicate parent {}", pair[0]),
                    });
                }
            }
            for &p in list.iter() {
                if p == child {
                    return Err(Error::InvalidStructure {
                        message: format!("node {child} is its own parent"),
                    });
                }
                if p >= n {
                    return Err(Error::InvalidStructure {
                        message: format!("node {child} has out-of-range parent {p}"),
                    });
                }
            }
        }
        if topological_order(&sorted).is_none() {
            return Err(Error::CyclicStructure);
        }
        Ok(NetworkStructure { parents: sorted })
    }

    /// The edgeless structure over `n` nodes.
    pub fn empty(n: usize) -> Self {
        NetworkStructure {
            parents: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Node indices in a dependency-respecting order; deterministic
    /// (lowest-index node first among the ready set).
    pub fn topological_order(&self) -> Vec<usize> {
        topological_order(&self.parents).expect("structure is acyclic by construction")
    }
}

/// Kahn's algorithm picking the smallest ready index each step; `None` if the
/// graph has a cycle.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&i| !placed[i] && parents[i].iter().all(|&p| placed[p]))?;
        placed[next] = true;
        order.push(next);
    }
    Some(order)
}

/// The Naive Bayes structure: the target node is parentless and is the sole
/// parent of every context node.
pub fn naive_bayes_structure(schema: &AttributeSchema) -> NetworkStructure {
    let target = schema.target_index();
    let parents = (0..schema.arity())
        .map(|i| if i == target { Vec::new() } else { vec![target] })
        .collect();
    NetworkStructure { parents }
}

/// Writes one line per node in schema order: `child <- parent, parent`.
///
/// Parents are comma-separated because attribute names may contain spaces.
pub fn write_structure<W: Write>(
    structure: &NetworkStructure,
    schema: &AttributeSchema,
    mut writer: W,
) -> Result<()> {
    for name in schema.names() {
        if name.contains(',') || name.contains("<-") {
            return Err(Error::InvalidParameter {
                message: format!("attribute name `{name}` cannot appear in a structure file"),
            });
        }
    }
    for (node, name) in schema.names().iter().enumerate() {
        let parents: Vec<&str> = structure
            .parents(node)
            .iter()
            .map(|&p| schema.name(p))
            .collect();
        if parents.is_empty() {
            writeln!(writer, "{name} <-")?;
        } else {
            writeln!(writer, "{name} <- {}", parents.join(", "))?;
        }
    }
    Ok(())
}

/// Parses a structure file against a schema. Every schema attribute must
/// appear exactly once as a child; blank lines are ignored.
pub fn parse_structure<R: Read>(reader: R, schema: &AttributeSchema) -> Result<NetworkStructure> {
    let reader = BufReader::new(reader);
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; schema.arity()];
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (child_part, parent_part) =
            trimmed
                .split_once("<-")
                .ok_or_else(|| Error::StructureParse {
                    line: lineno,
                    message: "missing `<-`".into(),
                })?;
        let child_name = child_part.trim();
        let child = schema
            .index_of(child_name)
            .ok_or_else(|| Error::StructureParse {
                line: lineno,
                message: format!("unknown attribute `{child_name}`"),
            })?;
        if parents[child].is_some() {
            return Err(Error::StructureParse {
                line: lineno,
                message: format!("duplicate line for `{child_name}`"),
            });
        }
        let mut list = Vec::new();
        for token in parent_part.split(',') {
            let name = token.trim();
            if name.is_empty() {
                continue;
            }
            let p = schema.index_of(name).ok_or_else(|| Error::StructureParse {
                line: lineno,
                message: format!("unknown attribute `{name}`"),
            })?;
            list.push(p);
        }
        parents[child] = Some(list);
    }
    let parents: Vec<Vec<usize>> = parents
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| Error::StructureParse {
                line: 0,
                message: format!("no line for attribute `{}`", schema.name(i)),
            })
        })
        .collect::<Result<_>>()?;
    NetworkStructure::new(parents)
}
