//! Flattening of the reference tensor into contraction vectors, with optional
//! reduction by output symmetry and by symmetry of the geometry tensor.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::layout::unflatten;
use crate::tensor::{CellGeometry, CompiledForm};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const SAMPLE_CELLS: usize = 3;

/// Vectors `a0_i` (one per retained entry `i`) such that
/// `A_i = a0_i . gbar`, where `gbar[k] = g[geometry_map[k]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionVectors {
    /// Number of entries of the full element tensor.
    pub rows: usize,
    /// Primary dimensions, for labels.
    pub primary_dims: Vec<usize>,
    /// Full geometry vector length.
    pub geometry_len: usize,
    /// Retained entries (flat primary indices).
    pub entries: Vec<usize>,
    pub vectors: Vec<Vec<f64>>,
    #[serde(skip)]
    pub exact: Option<Vec<Vec<Rational64>>>,
    /// Reduced geometry entry `k` is `g[geometry_map[k]]`.
    pub geometry_map: Vec<usize>,
    /// `(target, source)`: entries filled by symmetry after evaluation.
    pub mirror: Vec<(usize, usize)>,
}

impl ContractionVectors {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Length of each vector `|A|` after reduction.
    pub fn width(&self) -> usize {
        self.geometry_map.len()
    }

    /// `|I_retained| |A|`.
    pub fn direct_maps(&self) -> usize {
        self.len() * self.width()
    }

    pub fn reduce_geometry(&self, g: &[f64]) -> Vec<f64> {
        self.geometry_map.iter().map(|&k| g[k]).collect()
    }

    /// Evaluate all entries by inner products, then mirror.
    pub fn contract(&self, g: &[f64]) -> Vec<f64> {
        let gb = self.reduce_geometry(g);
        let mut out = vec![0.0; self.rows];
        for (&e, v) in self.entries.iter().zip(&self.vectors) {
            out[e] = v.iter().zip(&gb).map(|(a, b)| a * b).sum();
        }
        for &(t, s) in &self.mirror {
            out[t] = out[s];
        }
        out
    }
}

/// Cells and coefficients used to check symmetry claims numerically.
pub(crate) fn sample_inputs(compiled: &CompiledForm, seed: u64) -> Vec<(CellGeometry, Vec<Vec<f64>>)> {
    let d = compiled.form.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(SAMPLE_CELLS);
    while out.len() < SAMPLE_CELLS {
        let verts: Vec<Vec<f64>> = (0..=d)
            .map(|k| (0..d).map(|c| f64::from(u8::from(k == c + 1)) + rng.random_range(-0.3..0.3)).collect())
            .collect();
        let Ok(geom) = CellGeometry::new(&verts) else { continue };
        if geom.det.abs() < 0.1 {
            continue;
        }
        let coefficients = compiled
            .form
            .coefficients
            .iter()
            .map(|c| (0..c.element.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        out.push((geom, coefficients));
    }
    out
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= SYMMETRY_TOL * scale.max(1.0)
}

/// Pairs of secondary axes of term `k` under whose swap `G` is invariant on
/// all sample cells; greedy and disjoint.
fn symmetric_axis_pairs(compiled: &CompiledForm, k: usize, samples: &[(CellGeometry, Vec<Vec<f64>>)]) -> Result<Vec<(usize, usize)>> {
    let geo = &compiled.terms[k].geometry;
    let dims = geo.secondary_dims();
    let values: Vec<Vec<f64>> = samples
        .iter()
        .map(|(geom, coef)| geo.evaluate(geom, coef))
        .collect::<Result<_>>()?;
    let mut used = vec![false; dims.len()];
    let mut pairs = Vec::new();
    for a in 0..dims.len() {
        for b in a + 1..dims.len() {
            if used[a] || used[b] || dims[a] != dims[b] || geo.secondary[a].is_coefficient() || geo.secondary[b].is_coefficient() {
                continue;
            }
            let mut idx = vec![0usize; dims.len()];
            let ok = values.iter().all(|g| {
                let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                (0..g.len()).all(|flat| {
                    unflatten(flat, &dims, &mut idx);
                    idx.swap(a, b);
                    let swapped = idx.iter().zip(&dims).fold(0, |acc, (&i, &n)| acc * n + i);
                    close(g[flat], g[swapped], scale)
                })
            });
            if ok {
                used[a] = true;
                used[b] = true;
                pairs.push((a, b));
            }
        }
    }
    Ok(pairs)
}

/// Whether `A^K` is symmetric (rank 2, equal dimensions) on the sample cells.
pub fn detect_output_symmetry(compiled: &CompiledForm) -> Result<bool> {
    let dims = compiled.primary_dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Ok(false);
    }
    let n = dims[0];
    for (geom, coef) in sample_inputs(compiled, 0x5eed) {
        let g = compiled.geometry_vector(&geom, &coef)?;
        let a = compiled.kernel.matvec(&g);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in i + 1..n {
                if !close(a[i * n + j], a[j * n + i], scale) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Contraction vectors for the whole flattened kernel.
///
/// With `symmetric_output` only entries `i1 <= i2` are kept and the rest are
/// mirrored; the claim is checked on sample cells and a violation is an
/// error. With `symmetric_geometry` every pair of geometry axes found
/// symmetric on the sample cells is folded, e.g. `(A11, A12 + A21, A22)`
/// against `(G11, G12, G22)`.
pub fn flatten_and_reduce(compiled: &CompiledForm, symmetric_output: bool, symmetric_geometry: bool) -> Result<ContractionVectors> {
    let kernel = &compiled.kernel;
    let rows = kernel.rows;
    let primary_dims = compiled.primary_dims();

    // geometry folding: column groups of the flattened kernel
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let samples = if symmetric_geometry { sample_inputs(compiled, 0x9e0) } else { Vec::new() };
    for (k, t) in compiled.terms.iter().enumerate() {
        let off = kernel.term_offsets[k];
        let dims = t.geometry.secondary_dims();
        let size = t.geometry.size();
        let pairs = if symmetric_geometry { symmetric_axis_pairs(compiled, k, &samples)? } else { Vec::new() };
        let mut seen = vec![false; size];
        let mut idx = vec![0usize; dims.len()];
        for flat in 0..size {
            if seen[flat] {
                continue;
            }
            // orbit under the group generated by the disjoint swaps
            let mut orbit = Vec::new();
            for mask in 0..1usize << pairs.len() {
                unflatten(flat, &dims, &mut idx);
                for (p, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> p & 1 == 1 {
                        idx.swap(a, b);
                    }
                }
                let img = idx.iter().zip(&dims).fold(0, |acc, (&i, &n)| acc * n + i);
                if !orbit.contains(&img) {
                    orbit.push(img);
                }
            }
            orbit.sort_unstable();
            for &o in &orbit {
                seen[o] = true;
            }
            groups.push(orbit.iter().map(|o| off + o).collect());
        }
    }
    let geometry_map: Vec<usize> = groups.iter().map(|g| g[0]).collect();

    // retained entries and mirror map
    let (entries, mirror) = if symmetric_output {
        if primary_dims.len() != 2 || primary_dims[0] != primary_dims[1] {
            return Err(Error::SymmetryAssertion(format!(
                "output symmetry needs a square rank-2 tensor, got dims {primary_dims:?}"
            )));
        }
        if !detect_output_symmetry(compiled)? {
            return Err(Error::SymmetryAssertion("element tensor is not symmetric".into()));
        }
        let n = primary_dims[0];
        let mut entries = Vec::new();
        let mut mirror = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i <= j {
                    entries.push(i * n + j);
                } else {
                    mirror.push((i * n + j, j * n + i));
                }
            }
        }
        (entries, mirror)
    } else {
        ((0..rows).collect(), Vec::new())
    };

    let vectors: Vec<Vec<f64>> = entries
        .iter()
        .map(|&e| {
            let row = kernel.row(e);
            groups.iter().map(|g| g.iter().map(|&c| row[c]).sum()).collect()
        })
        .collect();
    let exact = exact_rows(compiled).map(|rows_q| {
        entries
            .iter()
            .map(|&e| {
                groups
                    .iter()
                    .map(|g| g.iter().fold(Rational64::from(0), |acc, &c| acc + rows_q[e][c]))
                    .collect()
            })
            .collect()
    });
    Ok(ContractionVectors {
        rows,
        primary_dims,
        geometry_len: kernel.cols,
        entries,
        vectors,
        exact,
        geometry_map,
        mirror,
    })
}

/// Rows of the flattened kernel in exact arithmetic, when every term snapped.
fn exact_rows(compiled: &CompiledForm) -> Option<Vec<Vec<Rational64>>> {
    let kernel = &compiled.kernel;
    let mut rows = vec![vec![Rational64::from(0); kernel.cols]; kernel.rows];
    for (t, &off) in compiled.terms.iter().zip(&kernel.term_offsets) {
        let q = t.reference.rational.as_ref()?;
        let s = t.reference.secondary_size();
        for (i, row) in rows.iter_mut().enumerate() {
            row[off..off + s].copy_from_slice(&q[i * s..(i + 1) * s]);
        }
    }
    Some(rows)
}
