//! Embedded expression language for multilinear forms.
//!
//! An [`Expr`] is a tensor-valued sum of products. Each product carries a
//! scalar constant, a list of function factors (with optional component and a
//! list of spatial derivative directions) and a list of Kronecker deltas.
//! Tensor axes are represented by placeholder index ids ("slots"); indexing an
//! axis substitutes its slot by a fixed or free index. Repeated free indices
//! within a product are summed (Einstein convention).
//!
//! Errors such as shape mismatches poison the expression and are reported
//! when the form is lowered.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::fiat::ElementSpec;
use crate::Error;

pub type IndexId = u64;

static NEXT_INDEX: AtomicU64 = AtomicU64::new(1);

fn fresh() -> IndexId {
    NEXT_INDEX.fetch_add(1, Ordering::Relaxed)
}

/// A fixed integer index or a free (summation) index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexTerm {
    Fixed(usize),
    Free(IndexId),
}

/// User-declared free index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Index(IndexId);

impl Index {
    pub fn new() -> Self {
        Index(fresh())
    }

    pub fn id(self) -> IndexId {
        self.0
    }
}

impl Default for Index {
    fn default() -> Self {
        Self::new()
    }
}

impl From<Index> for IndexTerm {
    fn from(i: Index) -> Self {
        IndexTerm::Free(i.0)
    }
}

impl From<usize> for IndexTerm {
    fn from(i: usize) -> Self {
        IndexTerm::Fixed(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    /// Argument slot `0..r` (test function is slot 0).
    Argument(usize),
    /// Coefficient number, by declaration order.
    Coefficient(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionRef {
    pub kind: FunctionKind,
    pub element: ElementSpec,
    pub name: Arc<str>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub function: FunctionRef,
    pub component: Option<IndexTerm>,
    pub derivatives: Vec<IndexTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub constant: f64,
    pub factors: Vec<Factor>,
    pub deltas: Vec<(IndexTerm, IndexTerm)>,
}

impl Product {
    fn terms_mut(&mut self) -> impl Iterator<Item = &mut IndexTerm> {
        let deltas = self.deltas.iter_mut().flat_map(|(a, b)| [a, b]);
        let factors = self
            .factors
            .iter_mut()
            .flat_map(|f| f.component.iter_mut().chain(f.derivatives.iter_mut()));
        factors.chain(deltas)
    }

    pub fn terms(&self) -> impl Iterator<Item = IndexTerm> + '_ {
        let deltas = self.deltas.iter().flat_map(|&(a, b)| [a, b]);
        let factors = self
            .factors
            .iter()
            .flat_map(|f| f.component.iter().copied().chain(f.derivatives.iter().copied()));
        factors.chain(deltas)
    }

    pub fn counts(&self) -> HashMap<IndexId, usize> {
        let mut counts = HashMap::new();
        for t in self.terms() {
            if let IndexTerm::Free(id) = t {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        counts
    }

    fn substitute(&mut self, id: IndexId, by: IndexTerm) {
        for t in self.terms_mut() {
            if *t == IndexTerm::Free(id) {
                *t = by;
            }
        }
    }

    fn rename(&mut self, map: &HashMap<IndexId, IndexId>) {
        for t in self.terms_mut() {
            if let IndexTerm::Free(id) = t {
                if let Some(&n) = map.get(id) {
                    *id = n;
                }
            }
        }
    }

    /// Eliminate Kronecker deltas where possible; returns `false` if the
    /// product vanishes.
    fn simplify(&mut self, slots: &[IndexId], dim: Option<usize>) -> bool {
        loop {
            let counts = self.counts();
            let eliminable = |t: IndexTerm| match t {
                IndexTerm::Free(id) => !slots.contains(&id) && counts.get(&id).copied().unwrap_or(0) > 1,
                IndexTerm::Fixed(_) => false,
            };
            let mut changed = false;
            for k in 0..self.deltas.len() {
                let (a, b) = self.deltas[k];
                match (a, b) {
                    (IndexTerm::Fixed(x), IndexTerm::Fixed(y)) => {
                        if x != y {
                            return false;
                        }
                        self.deltas.remove(k);
                    }
                    _ if a == b => {
                        // closed trace of the identity
                        let Some(d) = dim else { continue };
                        if matches!(a, IndexTerm::Free(id) if slots.contains(&id)) {
                            continue;
                        }
                        self.constant *= d as f64;
                        self.deltas.remove(k);
                    }
                    _ if eliminable(a) => {
                        let IndexTerm::Free(id) = a else { unreachable!() };
                        self.deltas.remove(k);
                        self.substitute(id, b);
                    }
                    _ if eliminable(b) => {
                        let IndexTerm::Free(id) = b else { unreachable!() };
                        self.deltas.remove(k);
                        self.substitute(id, a);
                    }
                    _ => continue,
                }
                changed = true;
                break;
            }
            if !changed {
                return self.constant != 0.0;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorExpr {
    pub shape: Vec<usize>,
    pub slots: Vec<IndexId>,
    pub products: Vec<Product>,
    /// Spatial dimension, known once a function factor is involved.
    pub dim: Option<usize>,
}

impl TensorExpr {
    fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Give every slot and every internally contracted index a fresh id, so
    /// the expression can be combined with others (including itself).
    fn renamed(&self) -> TensorExpr {
        let slot_map: HashMap<IndexId, IndexId> = self.slots.iter().map(|&s| (s, fresh())).collect();
        let products = self
            .products
            .iter()
            .map(|p| {
                let mut map = slot_map.clone();
                for (id, c) in p.counts() {
                    if c >= 2 && !self.slots.contains(&id) {
                        map.insert(id, fresh());
                    }
                }
                let mut p = p.clone();
                p.rename(&map);
                p
            })
            .collect();
        TensorExpr {
            shape: self.shape.clone(),
            slots: self.slots.iter().map(|s| slot_map[s]).collect(),
            products,
            dim: self.dim,
        }
    }

    fn finish(mut self) -> Result<TensorExpr, Poison> {
        let slots = self.slots.clone();
        let dim = self.dim;
        self.products.retain_mut(|p| p.simplify(&slots, dim));
        for p in &self.products {
            if let Some((_, c)) = p.counts().into_iter().find(|&(_, c)| c > 2) {
                return Err(Poison::IndexAppearsOnce(format!("index repeated {c} times in one product")));
            }
        }
        Ok(self)
    }
}

fn merge_dim(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>, Poison> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Poison::IncompatibleShapes(format!(
            "functions on cells of dimension {x} and {y}"
        ))),
        _ => Ok(a.or(b)),
    }
}

/// Deferred construction error.
#[derive(Clone, Debug, PartialEq)]
pub enum Poison {
    IncompatibleShapes(String),
    IndexAppearsOnce(String),
    NotLowerable(String),
}

impl From<Poison> for Error {
    fn from(p: Poison) -> Self {
        match p {
            Poison::IncompatibleShapes(m) => Error::IncompatibleShapes(m),
            Poison::IndexAppearsOnce(m) => Error::IndexAppearsOnce(m),
            Poison::NotLowerable(m) => Error::NotLowerable(m),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Expr(Result<Arc<TensorExpr>, Poison>);

impl Expr {
    fn ok(t: TensorExpr) -> Expr {
        Expr(Ok(Arc::new(t)))
    }

    fn from_result(r: Result<TensorExpr, Poison>) -> Expr {
        Expr(r.map(Arc::new))
    }

    pub fn tensor(&self) -> Result<&TensorExpr, Error> {
        self.0.as_deref().map_err(|p| p.clone().into())
    }

    pub fn error(&self) -> Option<Error> {
        self.0.as_ref().err().map(|p| p.clone().into())
    }

    pub fn shape(&self) -> Option<&[usize]> {
        self.0.as_ref().ok().map(|t| t.shape.as_slice())
    }

    fn function(kind: FunctionKind, element: ElementSpec, name: &str) -> Expr {
        let nc = element.value_size();
        let vector = element.family == crate::fiat::ElementFamily::VectorLagrange;
        let (shape, slots, component) = if vector {
            let s = fresh();
            (vec![nc], vec![s], Some(IndexTerm::Free(s)))
        } else {
            (vec![], vec![], None)
        };
        Expr::ok(TensorExpr {
            shape,
            slots,
            products: vec![Product {
                constant: 1.0,
                factors: vec![Factor {
                    function: FunctionRef {
                        kind,
                        element,
                        name: name.into(),
                    },
                    component,
                    derivatives: vec![],
                }],
                deltas: vec![],
            }],
            dim: Some(element.cell.dim()),
        })
    }

    /// Basis function of argument slot `slot` (0 = test, 1 = trial, ...).
    pub fn argument(slot: usize, element: ElementSpec, name: &str) -> Expr {
        Self::function(FunctionKind::Argument(slot), element, name)
    }

    pub fn test(element: ElementSpec) -> Expr {
        Self::argument(0, element, "v")
    }

    pub fn trial(element: ElementSpec) -> Expr {
        Self::argument(1, element, "U")
    }

    /// Fixed function expanded in the nodal basis of `element`.
    pub fn coefficient(number: usize, element: ElementSpec, name: &str) -> Expr {
        Self::function(FunctionKind::Coefficient(number), element, name)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::ok(TensorExpr {
            shape: vec![],
            slots: vec![],
            products: if c == 0.0 {
                vec![]
            } else {
                vec![Product {
                    constant: c,
                    factors: vec![],
                    deltas: vec![],
                }]
            },
            dim: None,
        })
    }

    /// The `n x n` identity matrix.
    pub fn identity(n: usize) -> Expr {
        let (a, b) = (fresh(), fresh());
        Expr::ok(TensorExpr {
            shape: vec![n, n],
            slots: vec![a, b],
            products: vec![Product {
                constant: 1.0,
                factors: vec![],
                deltas: vec![(IndexTerm::Free(a), IndexTerm::Free(b))],
            }],
            dim: None,
        })
    }

    pub fn not_lowerable(what: &str) -> Expr {
        Expr(Err(Poison::NotLowerable(what.to_string())))
    }

    fn map(&self, f: impl FnOnce(&TensorExpr) -> Result<TensorExpr, Poison>) -> Expr {
        match &self.0 {
            Ok(t) => Expr::from_result(f(t)),
            Err(p) => Expr(Err(p.clone())),
        }
    }

    fn zip(&self, other: &Expr, f: impl FnOnce(&TensorExpr, &TensorExpr) -> Result<TensorExpr, Poison>) -> Expr {
        match (&self.0, &other.0) {
            (Ok(a), Ok(b)) => Expr::from_result(f(a, b)),
            (Err(p), _) | (_, Err(p)) => Expr(Err(p.clone())),
        }
    }

    /// Component selection along the first axis.
    pub fn comp(&self, i: impl Into<IndexTerm>) -> Expr {
        let i = i.into();
        self.map(|t| index_axis(t, 0, i))
    }

    pub fn comp2(&self, i: impl Into<IndexTerm>, j: impl Into<IndexTerm>) -> Expr {
        self.comp(i).comp(j)
    }
}

fn index_axis(t: &TensorExpr, axis: usize, i: IndexTerm) -> Result<TensorExpr, Poison> {
    if axis >= t.rank() {
        return Err(Poison::IncompatibleShapes(format!(
            "cannot index axis {axis} of a rank-{} value",
            t.rank()
        )));
    }
    if let IndexTerm::Fixed(c) = i {
        if c >= t.shape[axis] {
            return Err(Poison::IncompatibleShapes(format!(
                "component {c} out of range for extent {}",
                t.shape[axis]
            )));
        }
    }
    let mut out = t.clone();
    let slot = out.slots.remove(axis);
    out.shape.remove(axis);
    for p in &mut out.products {
        p.substitute(slot, i);
    }
    out.finish()
}

/// Apply `d/dx_i` to every product by the Leibniz rule.
fn differentiate(t: &TensorExpr, i: IndexTerm) -> TensorExpr {
    let mut products = Vec::new();
    for p in &t.products {
        for k in 0..p.factors.len() {
            let mut q = p.clone();
            q.factors[k].derivatives.push(i);
            products.push(q);
        }
    }
    TensorExpr {
        shape: t.shape.clone(),
        slots: t.slots.clone(),
        products,
        dim: t.dim,
    }
}

fn product(a: &TensorExpr, b: &TensorExpr) -> Result<TensorExpr, Poison> {
    if a.rank() > 0 && b.rank() > 0 {
        return Err(Poison::IncompatibleShapes(format!(
            "product of rank-{} and rank-{} values; use dot or mult",
            a.rank(),
            b.rank()
        )));
    }
    let (a, b) = (a.renamed(), b.renamed());
    let dim = merge_dim(a.dim, b.dim)?;
    let (shape, slots) = if a.rank() > 0 {
        (a.shape.clone(), a.slots.clone())
    } else {
        (b.shape.clone(), b.slots.clone())
    };
    let mut products = Vec::with_capacity(a.products.len() * b.products.len());
    for p in &a.products {
        for q in &b.products {
            let mut r = p.clone();
            r.constant *= q.constant;
            r.factors.extend(q.factors.iter().cloned());
            r.deltas.extend(q.deltas.iter().copied());
            products.push(r);
        }
    }
    TensorExpr {
        shape,
        slots,
        products,
        dim,
    }
    .finish()
}

fn sum(a: &TensorExpr, b: &TensorExpr) -> Result<TensorExpr, Poison> {
    if a.shape != b.shape {
        return Err(Poison::IncompatibleShapes(format!(
            "sum of values with shapes {:?} and {:?}",
            a.shape, b.shape
        )));
    }
    let dim = merge_dim(a.dim, b.dim)?;
    let b = b.renamed();
    let map: HashMap<IndexId, IndexId> = b.slots.iter().copied().zip(a.slots.iter().copied()).collect();
    let mut products = a.products.clone();
    for q in &b.products {
        let mut q = q.clone();
        q.rename(&map);
        products.push(q);
    }
    TensorExpr {
        shape: a.shape.clone(),
        slots: a.slots.clone(),
        products,
        dim,
    }
    .finish()
}

fn scaled(t: &TensorExpr, c: f64) -> TensorExpr {
    let mut out = t.clone();
    for p in &mut out.products {
        p.constant *= c;
    }
    out.products.retain(|p| p.constant != 0.0);
    out
}

/// Gradient; appends a spatial axis of extent `d`.
pub fn grad(e: &Expr) -> Expr {
    e.map(|t| {
        let d = t
            .dim
            .ok_or_else(|| Poison::IncompatibleShapes("gradient of a constant".into()))?;
        let s = fresh();
        let mut out = differentiate(t, IndexTerm::Free(s));
        out.shape.push(d);
        out.slots.push(s);
        out.finish()
    })
}

/// Partial derivative `d e / d x_i`.
pub fn deriv(e: &Expr, i: impl Into<IndexTerm>) -> Expr {
    let i = i.into();
    e.map(|t| {
        if let (IndexTerm::Fixed(c), Some(d)) = (i, t.dim) {
            if c >= d {
                return Err(Poison::IncompatibleShapes(format!("derivative direction {c} >= {d}")));
            }
        }
        differentiate(t, i).finish()
    })
}

/// Divergence of a vector.
pub fn div(e: &Expr) -> Expr {
    match e.shape() {
        Some(s) if s.len() != 1 => Expr(Err(Poison::IncompatibleShapes(format!(
            "div of a rank-{} value",
            s.len()
        )))),
        _ => {
            let k = Index::new();
            deriv(&e.comp(k), k)
        }
    }
}

/// Full contraction of two values of equal shape.
pub fn dot(a: &Expr, b: &Expr) -> Expr {
    match (a.shape(), b.shape()) {
        (Some(sa), Some(sb)) if sa != sb => {
            return Expr(Err(Poison::IncompatibleShapes(format!("dot of shapes {sa:?} and {sb:?}"))))
        }
        (Some(sa), _) if sa.len() > 2 => {
            return Expr(Err(Poison::IncompatibleShapes("dot of rank > 2 values".into())))
        }
        _ => {}
    }
    let rank = a.shape().or(b.shape()).map_or(0, |s| s.len());
    let (mut a, mut b) = (a.clone(), b.clone());
    for _ in 0..rank {
        let k = Index::new();
        a = a.comp(k);
        b = b.comp(k);
    }
    a * b
}

/// Same as [`dot`].
pub fn inner(a: &Expr, b: &Expr) -> Expr {
    dot(a, b)
}

pub fn transp(e: &Expr) -> Expr {
    e.map(|t| {
        if t.rank() != 2 {
            return Err(Poison::IncompatibleShapes(format!("transpose of a rank-{} value", t.rank())));
        }
        let mut out = t.clone();
        out.shape.swap(0, 1);
        out.slots.swap(0, 1);
        Ok(out)
    })
}

pub fn trace(e: &Expr) -> Expr {
    match e.shape() {
        Some(s) if s.len() != 2 || s[0] != s[1] => Expr(Err(Poison::IncompatibleShapes(format!(
            "trace of shape {s:?}"
        )))),
        _ => {
            let k = Index::new();
            e.comp2(k, k)
        }
    }
}

/// Matrix product: scalar scaling, matrix-vector or matrix-matrix.
pub fn mult(a: &Expr, b: &Expr) -> Expr {
    a.zip(b, |ta, tb| {
        if ta.rank() == 0 || tb.rank() == 0 {
            return product(ta, tb);
        }
        if ta.rank() != 2 || tb.rank() > 2 || ta.shape[1] != tb.shape[0] {
            return Err(Poison::IncompatibleShapes(format!(
                "mult of shapes {:?} and {:?}",
                ta.shape, tb.shape
            )));
        }
        let (ta, tb) = (ta.renamed(), tb.renamed());
        let k = IndexTerm::Free(fresh());
        let mut a1 = ta.clone();
        let mut b1 = tb.clone();
        let sa = a1.slots.remove(1);
        a1.shape.remove(1);
        let sb = b1.slots.remove(0);
        b1.shape.remove(0);
        for p in &mut a1.products {
            p.substitute(sa, k);
        }
        for p in &mut b1.products {
            p.substitute(sb, k);
        }
        let dim = merge_dim(a1.dim, b1.dim)?;
        let mut products = Vec::new();
        for p in &a1.products {
            for q in &b1.products {
                let mut r = p.clone();
                r.constant *= q.constant;
                r.factors.extend(q.factors.iter().cloned());
                r.deltas.extend(q.deltas.iter().copied());
                products.push(r);
            }
        }
        let mut shape = a1.shape.clone();
        shape.extend(&b1.shape);
        let mut slots = a1.slots.clone();
        slots.extend(&b1.slots);
        TensorExpr {
            shape,
            slots,
            products,
            dim,
        }
        .finish()
    })
}

/// Absolute values are not polynomial and cannot be lowered.
pub fn abs(_e: &Expr) -> Expr {
    Expr::not_lowerable("absolute value")
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        self.zip(&o, sum)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        self + (-o)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self * -1.0
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        self.zip(&o, product)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, c: f64) -> Expr {
        self.map(|t| Ok(scaled(t, c)))
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, e: Expr) -> Expr {
        e * self
    }
}

impl Div<f64> for Expr {
    type Output = Expr;
    fn div(self, c: f64) -> Expr {
        self * (1.0 / c)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        match o.tensor() {
            Ok(t) if t.products.iter().all(|p| p.factors.is_empty() && p.deltas.is_empty()) && t.rank() == 0 => {
                let c: f64 = t.products.iter().map(|p| p.constant).sum();
                self * (1.0 / c)
            }
            _ => Expr::not_lowerable("division by a function"),
        }
    }
}

/// The cell-integral measure.
#[derive(Clone, Copy, Debug)]
pub struct Measure;

pub const DX: Measure = Measure;

/// An integrand wrapped in the cell measure.
#[derive(Clone, Debug)]
pub struct Form {
    pub(crate) integrand: Expr,
}

impl Form {
    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }
}

impl Mul<Measure> for Expr {
    type Output = Form;
    fn mul(self, _: Measure) -> Form {
        Form { integrand: self }
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, o: Form) -> Form {
        Form {
            integrand: self.integrand + o.integrand,
        }
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, o: Form) -> Form {
        Form {
            integrand: self.integrand - o.integrand,
        }
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, f: Form) -> Form {
        Form {
            integrand: f.integrand * self,
        }
    }
}
