//! Reference tensors: integrals over the reference cell of products of basis
//! functions and their reference derivatives.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::layout::{next_multi, unflatten, Role, SecondaryAxis, TermLayout};
use crate::fiat::{element, QuadratureRule};
use crate::form::{BasisIndex, CanonicalForm, IndexValue, Monomial};
use crate::par::{self, ExecPolicy};
use crate::{Error, Result};

/// Largest denominator accepted when snapping entries to rationals.
pub const MAX_DENOMINATOR: i64 = 10080;
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// One term `A0_{i alpha}` of the reference tensor, stored row-major with
/// primary axes first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTerm {
    pub primary_dims: Vec<usize>,
    pub secondary: Vec<SecondaryAxis>,
    pub values: Vec<f64>,
    /// Exact entries, present when every entry snapped to a small rational.
    #[serde(skip)]
    pub rational: Option<Vec<Rational64>>,
    pub quadrature_degree: usize,
}

impl ReferenceTerm {
    pub fn secondary_dims(&self) -> Vec<usize> {
        self.secondary.iter().map(|a| a.range()).collect()
    }

    pub fn primary_size(&self) -> usize {
        self.primary_dims.iter().product()
    }

    pub fn secondary_size(&self) -> usize {
        self.secondary.iter().map(|a| a.range()).product()
    }

    /// Rank `r + |alpha|`.
    pub fn rank(&self) -> usize {
        self.primary_dims.len() + self.secondary.len()
    }

    pub fn entry(&self, primary: usize, secondary: usize) -> f64 {
        self.values[primary * self.secondary_size() + secondary]
    }

    /// Recompute `rational` from `values`.
    pub fn snap(&mut self) {
        self.rational = self
            .values
            .iter()
            .map(|&x| snap_rational(x, MAX_DENOMINATOR, SNAP_TOLERANCE))
            .collect();
        if let Some(r) = &self.rational {
            for (v, q) in self.values.iter_mut().zip(r) {
                *v = *q.numer() as f64 / *q.denom() as f64;
            }
        }
    }
}

/// Best rational with denominator `<= max_den` within `tol * max(1, |x|)`.
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let target = x.abs();
    let sign = if x < 0.0 { -1 } else { 1 };
    let tol = tol * target.max(1.0);
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = target;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - target).abs() <= tol {
            return Some(Rational64::new(sign * h1, k1));
        }
        let frac = r - a;
        if frac < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Total polynomial degree of a monomial's integrand on the reference cell.
pub fn integrand_degree(form: &CanonicalForm, m: &Monomial) -> usize {
    m.factors
        .iter()
        .map(|f| form.element_of(f.function).degree.saturating_sub(f.derivatives.len()))
        .sum()
}

#[derive(Clone, Copy)]
enum Sel {
    Var(usize),
    Const(usize),
}

impl Sel {
    #[inline]
    fn get(self, vars: &[usize]) -> usize {
        match self {
            Sel::Var(k) => vars[k],
            Sel::Const(c) => c,
        }
    }
}

struct FactorTable {
    /// `[((basis * nc + comp) * ndir + dir) * nq + q]`
    data: Vec<f64>,
    zero: Vec<bool>,
    nc: usize,
    ndir: usize,
    basis: Sel,
    comp: Sel,
    dir: Sel,
}

impl FactorTable {
    #[inline]
    fn row(&self, vars: &[usize]) -> usize {
        (self.basis.get(vars) * self.nc + self.comp.get(vars)) * self.ndir + self.dir.get(vars)
    }
}

fn factor_tables(
    form: &CanonicalForm,
    m: &Monomial,
    layout: &TermLayout,
    rule: &QuadratureRule,
) -> Result<Vec<FactorTable>> {
    let r = layout.primary_dims.len();
    let s = layout.secondary.len();
    let nq = rule.len();
    let d = form.dim();
    let var_of = |role: Role| match role {
        Role::Secondary(ax) => Sel::Var(r + ax),
        Role::AuxReference(k) => Sel::Var(r + s + k),
        Role::AuxGeometry(_) => unreachable!("geometry-only index used in a component"),
    };
    let mut tables = Vec::with_capacity(m.factors.len());
    for (fi, f) in m.factors.iter().enumerate() {
        let spec = form.element_of(f.function);
        let basis = element(spec)?;
        let deriv = !f.derivatives.is_empty();
        let tab = basis.tabulate(&rule.points, usize::from(deriv))?;
        let (n, nc) = (tab.num_basis, tab.num_components);
        let ndir = if deriv { d } else { 1 };
        let mut data = vec![0.0; n * nc * ndir * nq];
        let mut zero = vec![true; n * nc * ndir];
        for b in 0..n {
            for c in 0..nc {
                for dir in 0..ndir {
                    let row = (b * nc + c) * ndir + dir;
                    for q in 0..nq {
                        let v = if deriv { tab.deriv(b, q, c, dir) } else { tab.value(b, q, c) };
                        data[row * nq + q] = v;
                        if v != 0.0 {
                            zero[row] = false;
                        }
                    }
                }
            }
        }
        let basis_sel = match f.basis {
            BasisIndex::Primary(j) => Sel::Var(j),
            BasisIndex::Bound(b) => var_of(layout.roles[b]),
        };
        let comp = match f.component {
            None => Sel::Const(0),
            Some(IndexValue::Fixed(c)) => {
                if c >= nc {
                    return Err(Error::IncompatibleShapes(format!("component {c} of a {nc}-component element")));
                }
                Sel::Const(c)
            }
            Some(IndexValue::Bound(b)) => var_of(layout.roles[b]),
        };
        let dir = if deriv { Sel::Var(r + layout.deriv_axes[fi][0]) } else { Sel::Const(0) };
        tables.push(FactorTable {
            data,
            zero,
            nc,
            ndir,
            basis: basis_sel,
            comp,
            dir,
        });
    }
    Ok(tables)
}

/// Evaluate `sum_beta prod_f (D Phi)(X_q) w_q` for every primary and
/// secondary multi-index. With `integrate` the quadrature axis is summed;
/// otherwise it is kept as the fastest-varying axis.
pub(crate) fn tabulate_term(
    form: &CanonicalForm,
    m: &Monomial,
    layout: &TermLayout,
    rule: &QuadratureRule,
    integrate: bool,
    policy: ExecPolicy,
) -> Result<Vec<f64>> {
    let tables = factor_tables(form, m, layout, rule)?;
    let r = layout.primary_dims.len();
    let s = layout.secondary.len();
    let sec_dims = layout.secondary_dims();
    let sec_size = layout.secondary_size();
    let aux = &layout.aux_reference;
    let nq = rule.len();
    let per_row = if integrate { sec_size } else { sec_size * nq };
    let rows = par::map_range(policy, layout.primary_size(), |row| {
        let mut vars = vec![0usize; r + s + aux.len()];
        unflatten(row, &layout.primary_dims, &mut vars[..r]);
        let mut out = vec![0.0; per_row];
        let mut tmp = vec![0.0; nq];
        for sec in 0..sec_size {
            unflatten(sec, &sec_dims, &mut vars[r..r + s]);
            vars[r + s..].iter_mut().for_each(|v| *v = 0);
            loop {
                let mut skip = false;
                tmp.copy_from_slice(&rule.weights);
                for t in &tables {
                    let row = t.row(&vars);
                    if t.zero[row] {
                        skip = true;
                        break;
                    }
                    let vals = &t.data[row * nq..(row + 1) * nq];
                    tmp.iter_mut().zip(vals).for_each(|(a, b)| *a *= b);
                }
                if !skip {
                    if integrate {
                        out[sec] += tmp.iter().sum::<f64>();
                    } else {
                        out[sec * nq..(sec + 1) * nq]
                            .iter_mut()
                            .zip(&tmp)
                            .for_each(|(a, b)| *a += b);
                    }
                }
                if !next_multi(&mut vars[r + s..], aux) {
                    break;
                }
            }
        }
        out
    });
    Ok(rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_small_rationals() {
        assert_eq!(snap_rational(0.5, MAX_DENOMINATOR, 1e-12), Some(Rational64::new(1, 2)));
        assert_eq!(snap_rational(-4.0 / 6.0, MAX_DENOMINATOR, 1e-12), Some(Rational64::new(-2, 3)));
        assert_eq!(snap_rational(1.0 / 10080.0, MAX_DENOMINATOR, 1e-12), Some(Rational64::new(1, 10080)));
        assert_eq!(snap_rational(0.0, MAX_DENOMINATOR, 1e-12), Some(Rational64::new(0, 1)));
        assert_eq!(snap_rational(std::f64::consts::PI, MAX_DENOMINATOR, 1e-12), None);
        assert_eq!(snap_rational(7.0, MAX_DENOMINATOR, 1e-12), Some(Rational64::new(7, 1)));
    }
}
