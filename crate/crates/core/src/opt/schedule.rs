//! Straight-line evaluation schedules derived from a spanning tree.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::mst::SpanningTree;
use super::reduce::{sample_inputs, ContractionVectors};
use super::relation::{is_unit, relation, Relation};
use crate::tensor::layout::unflatten;
use crate::tensor::CompiledForm;
use crate::{Error, Result};

/// Largest deviation from direct contraction tolerated by
/// [`verify_schedule`].
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    /// Element tensor entry written.
    pub target: usize,
    /// Entry it is derived from.
    pub source: usize,
    pub relation: Relation,
}

/// Multiply-add pair counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapCertificate {
    /// `|I_K| |A|` without any reduction.
    pub direct: usize,
    /// Inner products over the retained, folded vectors.
    pub reduced: usize,
    /// Spanning-tree weight.
    pub tree_weight: usize,
    /// `|A| + tree weight`.
    pub schedule: usize,
    /// Schedule count with multiplications by 0 and +-1 left out.
    pub discounted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSchedule {
    pub rows: usize,
    pub primary_dims: Vec<usize>,
    pub geometry_len: usize,
    pub geometry_map: Vec<usize>,
    pub root: usize,
    pub root_vector: Vec<f64>,
    pub operations: Vec<Operation>,
    pub mirror: Vec<(usize, usize)>,
    pub certificate: MapCertificate,
}

/// Breadth-first traversal of `tree` from the vertex with the cheapest inner
/// product (fewest nonzero entries, then lowest index).
pub fn emit_schedule(vectors: &ContractionVectors, tree: &SpanningTree) -> EvaluationSchedule {
    let n = vectors.len();
    let mut adj = vec![Vec::new(); n];
    for e in &tree.edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    adj.iter_mut().for_each(|a| a.sort_unstable());
    let nnz = |v: &[f64]| v.iter().filter(|x| **x != 0.0).count();
    let root = (0..n).min_by_key(|&k| (nnz(&vectors.vectors[k]), k)).unwrap_or(0);
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([root]);
    visited[root] = true;
    let mut operations = Vec::with_capacity(n.saturating_sub(1));
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            let rel = match &vectors.exact {
                Some(q) => relation(&q[u], &q[v]).1,
                None => relation(&vectors.vectors[u], &vectors.vectors[v]).1,
            };
            operations.push(Operation {
                target: vectors.entries[v],
                source: vectors.entries[u],
                relation: rel,
            });
            queue.push_back(v);
        }
    }
    let root_vector = vectors.vectors[root].clone();
    let width = vectors.width();
    let tree_weight: usize = operations.iter().map(|o| o.relation.cost()).sum();
    let discounted = root_vector.iter().filter(|x| !is_unit(**x)).count()
        + operations.iter().map(|o| o.relation.discounted_cost()).sum::<usize>();
    EvaluationSchedule {
        rows: vectors.rows,
        primary_dims: vectors.primary_dims.clone(),
        geometry_len: vectors.geometry_len,
        geometry_map: vectors.geometry_map.clone(),
        root: vectors.entries[root],
        root_vector,
        operations,
        mirror: vectors.mirror.clone(),
        certificate: MapCertificate {
            direct: vectors.rows * vectors.geometry_len,
            reduced: vectors.direct_maps(),
            tree_weight,
            schedule: width + tree_weight,
            discounted,
        },
    }
}

impl EvaluationSchedule {
    /// Element tensor from the full geometry vector `g`.
    pub fn evaluate(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.evaluate_into(g, &mut out);
        out
    }

    pub fn evaluate_into(&self, g: &[f64], out: &mut [f64]) {
        let gb: Vec<f64> = self.geometry_map.iter().map(|&k| g[k]).collect();
        out[self.root] = self.root_vector.iter().zip(&gb).map(|(a, b)| a * b).sum();
        for op in &self.operations {
            out[op.target] = op.relation.apply(out[op.source], &gb);
        }
        for &(t, s) in &self.mirror {
            out[t] = out[s];
        }
    }

    fn label(&self, entry: usize) -> String {
        let mut idx = vec![0usize; self.primary_dims.len()];
        unflatten(entry, &self.primary_dims, &mut idx);
        let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
        format!("A[{}]", parts.join(","))
    }

    /// Assignment list, one statement per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let terms: Vec<String> = self
            .root_vector
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| format!("{} g[{k}]", fmt_num(*v)))
            .collect();
        let rhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        let _ = writeln!(s, "{} = {rhs}", self.label(self.root));
        for op in &self.operations {
            let src = self.label(op.source);
            let rhs = match &op.relation {
                Relation::Equal => src,
                Relation::Negation => format!("-{src}"),
                Relation::Collinear { factor } => format!("{} {src}", fmt_num(*factor)),
                Relation::Hamming { sign, positions, deltas } => {
                    let mut r = if *sign < 0.0 { format!("-{src}") } else { src };
                    for (p, dl) in positions.iter().zip(deltas) {
                        let _ = write!(r, " + {} g[{p}]", fmt_num(*dl));
                    }
                    r
                }
            };
            let _ = writeln!(s, "{} = {rhs}", self.label(op.target));
        }
        for &(t, src) in &self.mirror {
            let _ = writeln!(s, "{} = {}", self.label(t), self.label(src));
        }
        let gm: Vec<String> = self.geometry_map.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(s, "# g = G[{}]", gm.join(", "));
        let c = &self.certificate;
        let _ = writeln!(
            s,
            "# MAPs: direct {}, reduced {}, schedule {} (tree {}), discounted {}",
            c.direct, c.reduced, c.schedule, c.tree_weight, c.discounted
        );
        s
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub certificate: MapCertificate,
}

/// Compare the schedule with direct contraction on `trials` random cells.
pub fn verify_schedule(schedule: &EvaluationSchedule, compiled: &CompiledForm, trials: usize) -> Result<VerificationReport> {
    let mut max_deviation: f64 = 0.0;
    let mut done = 0;
    let mut seed = 1;
    while done < trials {
        for (geom, coef) in sample_inputs(compiled, seed) {
            if done == trials {
                break;
            }
            let g = compiled.geometry_vector(&geom, &coef)?;
            let want = compiled.contract_direct(&g);
            let got = schedule.evaluate(&g);
            let scale = want.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (a, b) in want.iter().zip(&got) {
                max_deviation = max_deviation.max((a - b).abs() / scale);
            }
            done += 1;
        }
        seed += 1;
    }
    if max_deviation > VERIFY_TOL || max_deviation.is_nan() {
        return Err(Error::ScheduleVerification(max_deviation));
    }
    Ok(VerificationReport {
        trials,
        max_deviation,
        certificate: schedule.certificate,
    })
}
