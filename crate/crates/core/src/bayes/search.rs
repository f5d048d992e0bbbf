//! Greedy structure search under the marginal-likelihood score.

use std::collections::HashMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::model::{family_log_score, tally_family};
use super::structure::{topological_order, NetworkStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Add,
    Delete,
    Reverse,
}

/// True if the graph already contains a directed path `from ~> to`.
fn reaches(parents: &[Vec<usize>], from: usize, to: usize) -> bool {
    let n = parents.len();
    let mut visited = vec![false; n];
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            return true;
        }
        if visited[node] {
            continue;
        }
        visited[node] = true;
        for child in 0..n {
            if parents[child].contains(&node) && !visited[child] {
                stack.push(child);
            }
        }
    }
    false
}

fn with_parent(list: &[usize], parent: usize) -> Vec<usize> {
    let mut out = list.to_vec();
    out.push(parent);
    out.sort_unstable();
    out
}

fn without_parent(list: &[usize], parent: usize) -> Vec<usize> {
    list.iter().copied().filter(|&p| p != parent).collect()
}

struct ScoreCache<'a> {
    data: &'a Dataset,
    alpha: f64,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl<'a> ScoreCache<'a> {
    fn family(&mut self, node: usize, parents: &[usize]) -> f64 {
        let key = (node, parents.to_vec());
        if let Some(&score) = self.cache.get(&key) {
            return score;
        }
        let counts = tally_family(self.data, node, parents);
        let score = family_log_score(&counts, self.alpha);
        self.cache.insert(key, score);
        score
    }
}

/// Hill-climbing from the empty graph over add/delete/reverse edge moves.
///
/// Each step applies the single move with the greatest strictly positive
/// score gain; ties break lexicographically by (child, parent, add < delete
/// < reverse), so the search is deterministic. Stops at a local optimum. The
/// result is acyclic with in-degree at most `max_parents`.
pub fn learn_structure(
    data: &Dataset,
    max_parents: usize,
    prior_strength: f64,
) -> Result<NetworkStructure> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if prior_strength.is_nan() || prior_strength <= 0.0 {
        return Err(Error::InvalidParameter {
            message: format!("prior strength must be positive, got {prior_strength}"),
        });
    }
    let n = data.schema().arity();
    let mut scores = ScoreCache {
        data,
        alpha: prior_strength,
        cache: HashMap::new(),
    };
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut family: Vec<f64> = (0..n).map(|node| scores.family(node, &[])).collect();

    loop {
        let mut best: Option<(f64, Move, usize, usize)> = None;
        // Iteration order matches the tie-break key, so keeping the first
        // strictly-greater candidate realizes the lexicographic rule.
        for child in 0..n {
            for parent in 0..n {
                if parent == child {
                    continue;
                }
                let is_parent = parents[child].contains(&parent);
                if !is_parent {
                    if parents[child].len() < max_parents
                        && !reaches(&parents, child, parent)
                    {
                        let gain =
                            scores.family(child, &with_parent(&parents[child], parent))
                                - family[child];
                        if best.map_or(gain > 0.0, |(g, ..)| gain > g) {
                            best = Some((gain, Move::Add, child, parent));
                        }
                    }
                    continue;
                }
                let reduced = without_parent(&parents[child], parent);
                let delete_gain = scores.family(child, &reduced) - family[child];
                if best.map_or(delete_gain > 0.0, |(g, ..)| delete_gain > g) {
                    best = Some((delete_gain, Move::Delete, child, parent));
                }
                if parents[parent].len() < max_parents {
                    let mut trial = parents.clone();
                    trial[child] = reduced.clone();
                    if !reaches(&trial, parent, child) {
                        let gain = delete_gain
                            + scores.family(parent, &with_parent(&parents[parent], child))
                            - family[parent];
                        if best.map_or(gain > 0.0, |(g, ..)| gain > g) {
                            best = Some((gain, Move::Reverse, child, parent));
                        }
                    }
                }
            }
        }
        let Some((gain, kind, child, parent)) = best else {
            break;
        };
        debug_assert!(gain > 0.0);
        match kind {
            Move::Add => parents[child] = with_parent(&parents[child], parent),
            Move::Delete => parents[child] = without_parent(&parents[child], parent),
            Move::Reverse => {
                parents[child] = without_parent(&parents[child], parent);
                parents[parent] = with_parent(&parents[parent], child);
                family[parent] = scores.family(parent, &parents[parent]);
            }
        }
        family[child] = scores.family(child, &parents[child]);
        debug_assert!(topological_order(&parents).is_some());
    }
    NetworkStructure::new(parents)
}
