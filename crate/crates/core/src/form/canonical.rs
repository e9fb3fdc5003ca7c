//! Canonical monomial form of a multilinear form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::expr::{Factor, Form, FunctionKind, IndexId, IndexTerm, Product};
use crate::fiat::{CellShape, ElementSpec};
use crate::{Error, Result};

/// Which function a factor refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FunctionSlot {
    Argument(usize),
    Coefficient(usize),
}

/// An index position in a canonical factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndexValue {
    Fixed(usize),
    Bound(usize),
}

/// Which basis function of the factor's element is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisIndex {
    /// Primary index of argument slot `j`.
    Primary(usize),
    /// Bound index enumerating the local expansion of a coefficient.
    Bound(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    /// Spatial direction or vector component, range `d`.
    Spatial,
    /// Local basis index of coefficient `c`.
    CoefficientBasis(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundIndex {
    pub kind: BoundKind,
    pub range: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFactor {
    pub function: FunctionSlot,
    pub basis: BasisIndex,
    pub component: Option<IndexValue>,
    pub derivatives: Vec<IndexValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub constant: f64,
    pub factors: Vec<CanonicalFactor>,
    pub indices: Vec<BoundIndex>,
}

impl Monomial {
    /// Number of factors `m`.
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionInfo {
    pub name: String,
    pub element: ElementSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub cell: CellShape,
    pub arguments: Vec<FunctionInfo>,
    pub coefficients: Vec<FunctionInfo>,
    pub monomials: Vec<Monomial>,
}

impl CanonicalForm {
    pub fn arity(&self) -> usize {
        self.arguments.len()
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    /// Element of a factor's function.
    pub fn element_of(&self, f: FunctionSlot) -> ElementSpec {
        match f {
            FunctionSlot::Argument(j) => self.arguments[j].element,
            FunctionSlot::Coefficient(c) => self.coefficients[c].element,
        }
    }

    /// Text that determines the signature; function names are excluded.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "cell={};arguments=[", self.cell.name());
        for a in &self.arguments {
            let _ = write!(s, "{};", a.element.tag());
        }
        s.push_str("];coefficients=[");
        for c in &self.coefficients {
            let _ = write!(s, "{};", c.element.tag());
        }
        s.push_str("];monomials=[");
        for m in &self.monomials {
            s.push_str(&encode_monomial(m));
            s.push(';');
        }
        s.push(']');
        s
    }

    /// Hex SHA-256 digest of [`canonical_text`](Self::canonical_text).
    pub fn signature(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Replace the last argument by a coefficient, giving the form whose
    /// assembled tensor is the action of this one on a fixed function.
    pub fn action(&self) -> Result<CanonicalForm> {
        let r = self.arity();
        if r == 0 {
            return Err(Error::NotLowerable("action of a functional".into()));
        }
        let last = r - 1;
        let new_coef = self.coefficients.len();
        let mut out = self.clone();
        let info = out.arguments.pop().expect("r >= 1");
        out.coefficients.push(info.clone());
        for m in &mut out.monomials {
            let b = m.indices.len();
            m.indices.push(BoundIndex {
                kind: BoundKind::CoefficientBasis(new_coef),
                range: info.element.dimension(),
            });
            for f in &mut m.factors {
                if f.function == FunctionSlot::Argument(last) {
                    f.function = FunctionSlot::Coefficient(new_coef);
                    f.basis = BasisIndex::Bound(b);
                }
            }
            *m = canonicalize_monomial(m.clone());
        }
        out.monomials.sort_by_cached_key(encode_monomial);
        Ok(out)
    }

    /// Form-file text that parses back to this canonical form.
    pub fn to_form_file(&self) -> String {
        let mut out = String::new();
        let mut elements: Vec<ElementSpec> = Vec::new();
        let all: Vec<&FunctionInfo> = self.arguments.iter().chain(&self.coefficients).collect();
        for f in &all {
            if !elements.contains(&f.element) {
                elements.push(f.element);
            }
        }
        for (k, e) in elements.iter().enumerate() {
            let _ = writeln!(
                out,
                "element{k} = FiniteElement(\"{}\", \"{}\", {})",
                e.family.name(),
                e.cell.name(),
                e.degree
            );
        }
        out.push('\n');
        let el = |e: &ElementSpec| elements.iter().position(|x| x == e).expect("collected");
        let arg_names: Vec<String> = (0..self.arity()).map(|j| format!("arg{j}")).collect();
        let coef_names: Vec<String> = (0..self.coefficients.len()).map(|c| format!("coef{c}")).collect();
        for (j, a) in self.arguments.iter().enumerate() {
            let _ = writeln!(out, "{} = BasisFunction(element{})", arg_names[j], el(&a.element));
        }
        for (c, f) in self.coefficients.iter().enumerate() {
            let _ = writeln!(out, "{} = Function(element{})", coef_names[c], el(&f.element));
        }
        let max_bound = self.monomials.iter().map(|m| m.indices.len()).max().unwrap_or(0);
        if max_bound > 0 {
            out.push('\n');
            for b in 0..max_bound {
                let _ = writeln!(out, "b{b} = Index()");
            }
        }
        out.push('\n');
        let idx = |v: &IndexValue| match v {
            IndexValue::Fixed(c) => c.to_string(),
            IndexValue::Bound(b) => format!("b{b}"),
        };
        let mut terms = Vec::new();
        for m in &self.monomials {
            let mut parts = vec![format!("{:?}", m.constant)];
            for f in &m.factors {
                let mut s = match f.function {
                    FunctionSlot::Argument(j) => arg_names[j].clone(),
                    FunctionSlot::Coefficient(c) => coef_names[c].clone(),
                };
                if let Some(c) = &f.component {
                    s = format!("{s}[{}]", idx(c));
                }
                for d in &f.derivatives {
                    s = format!("D({s}, {})", idx(d));
                }
                parts.push(s);
            }
            terms.push(format!("({})", parts.join("*")));
        }
        let body = if terms.is_empty() {
            "0.0".to_string()
        } else {
            terms.join(" + ")
        };
        let lhs = if self.arity() == 2 { "a" } else { "L" };
        let _ = writeln!(out, "{lhs} = ({body})*dx");
        out
    }
}

fn encode_index(v: &IndexValue) -> String {
    match v {
        IndexValue::Fixed(c) => format!("{c}"),
        IndexValue::Bound(b) => format!("b{b}"),
    }
}

fn encode_factor(f: &CanonicalFactor, bound: Option<&[BoundIndex]>) -> String {
    let mut s = match f.function {
        FunctionSlot::Argument(j) => format!("A{j}"),
        FunctionSlot::Coefficient(c) => format!("C{c}"),
    };
    match (f.basis, bound) {
        (BasisIndex::Primary(j), _) => {
            let _ = write!(s, "<i{j}>");
        }
        (BasisIndex::Bound(b), Some(_)) => {
            let _ = write!(s, "<b{b}>");
        }
        (BasisIndex::Bound(_), None) => s.push_str("<b>"),
    }
    let show = |v: &IndexValue| match (v, bound) {
        (IndexValue::Bound(_), None) => "b".to_string(),
        _ => encode_index(v),
    };
    if let Some(c) = &f.component {
        let _ = write!(s, "[{}]", show(c));
    }
    s.push('(');
    for d in &f.derivatives {
        let _ = write!(s, "{},", show(d));
    }
    s.push(')');
    s
}

fn encode_monomial(m: &Monomial) -> String {
    let mut s = String::new();
    for f in &m.factors {
        s.push_str(&encode_factor(f, Some(&m.indices)));
        s.push('*');
    }
    s.push('{');
    for b in &m.indices {
        match b.kind {
            BoundKind::Spatial => {
                let _ = write!(s, "s{},", b.range);
            }
            BoundKind::CoefficientBasis(c) => {
                let _ = write!(s, "c{c}:{},", b.range);
            }
        }
    }
    let _ = write!(s, "}}x{:?}", m.constant);
    s
}

/// Sort factors structurally and renumber bound indices by first appearance.
fn canonicalize_monomial(mut m: Monomial) -> Monomial {
    m.factors
        .sort_by_cached_key(|f| (f.function, encode_factor(f, None)));
    let mut order: Vec<usize> = Vec::new();
    let visit = |v: usize, order: &mut Vec<usize>| {
        if !order.contains(&v) {
            order.push(v);
        }
    };
    for f in &m.factors {
        if let BasisIndex::Bound(b) = f.basis {
            visit(b, &mut order);
        }
        for v in f.component.iter().chain(&f.derivatives) {
            if let IndexValue::Bound(b) = v {
                visit(*b, &mut order);
            }
        }
    }
    let new_of: HashMap<usize, usize> = order.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let remap = |v: &mut IndexValue| {
        if let IndexValue::Bound(b) = v {
            *b = new_of[b];
        }
    };
    for f in &mut m.factors {
        if let BasisIndex::Bound(b) = &mut f.basis {
            *b = new_of[b];
        }
        if let Some(c) = &mut f.component {
            remap(c);
        }
        f.derivatives.iter_mut().for_each(remap);
    }
    m.indices = order.iter().map(|&o| m.indices[o]).collect();
    m
}

/// Lower a form to canonical monomials.
pub fn lower(form: &Form) -> Result<CanonicalForm> {
    let t = form.integrand().tensor()?;
    if !t.shape.is_empty() {
        return Err(Error::IncompatibleShapes(format!(
            "integrand must be scalar, has shape {:?}",
            t.shape
        )));
    }
    let mut arguments: BTreeMap<usize, (String, ElementSpec)> = BTreeMap::new();
    let mut coefficients: BTreeMap<usize, (String, ElementSpec)> = BTreeMap::new();
    let mut cell: Option<CellShape> = None;
    for p in &t.products {
        for f in &p.factors {
            let fr = &f.function;
            let (map, key) = match fr.kind {
                FunctionKind::Argument(j) => (&mut arguments, j),
                FunctionKind::Coefficient(c) => (&mut coefficients, c),
            };
            if let Some((_, e)) = map.get(&key) {
                if *e != fr.element {
                    return Err(Error::IncompatibleShapes(format!(
                        "function '{}' used with two different elements",
                        fr.name
                    )));
                }
            }
            map.insert(key, (fr.name.to_string(), fr.element));
            match cell {
                Some(c) if c != fr.element.cell => {
                    return Err(Error::IncompatibleShapes(format!(
                        "functions on both {} and {}",
                        c, fr.element.cell
                    )))
                }
                _ => cell = Some(fr.element.cell),
            }
        }
    }
    let cell = cell.ok_or_else(|| Error::NotLowerable("integrand contains no functions".into()))?;
    let d = cell.dim();
    let r = arguments.len();
    if arguments.keys().copied().ne(0..r) {
        return Err(Error::NotLowerable(format!(
            "argument slots {:?} are not numbered 0..{r}",
            arguments.keys().collect::<Vec<_>>()
        )));
    }
    let coef_pos: HashMap<usize, usize> = coefficients.keys().enumerate().map(|(n, &c)| (c, n)).collect();
    let mut monomials = Vec::new();
    for p in &t.products {
        if p.constant == 0.0 {
            continue;
        }
        monomials.push(lower_product(p, d, r, &coefficients, &coef_pos)?);
    }
    monomials.sort_by_cached_key(encode_monomial);
    let info = |(name, element): &(String, ElementSpec)| FunctionInfo {
        name: name.clone(),
        element: *element,
    };
    Ok(CanonicalForm {
        cell,
        arguments: arguments.values().map(info).collect(),
        coefficients: coefficients.values().map(info).collect(),
        monomials,
    })
}

fn lower_product(
    p: &Product,
    d: usize,
    r: usize,
    coefficients: &BTreeMap<usize, (String, ElementSpec)>,
    coef_pos: &HashMap<usize, usize>,
) -> Result<Monomial> {
    let mut constant = p.constant;
    for &(a, b) in &p.deltas {
        match (a, b) {
            (IndexTerm::Free(x), IndexTerm::Free(y)) if x == y => constant *= d as f64,
            _ => {
                return Err(Error::IndexAppearsOnce(
                    "identity entry with an unsummed index".into(),
                ))
            }
        }
    }
    let counts = p.counts();
    let closed_in_deltas: BTreeSet<IndexId> = p
        .deltas
        .iter()
        .filter_map(|(a, _)| match a {
            IndexTerm::Free(x) => Some(*x),
            _ => None,
        })
        .collect();
    for (&id, &c) in &counts {
        if closed_in_deltas.contains(&id) {
            continue;
        }
        if c == 1 {
            return Err(Error::IndexAppearsOnce(format!(
                "free index appears once in a product with {} factors",
                p.factors.len()
            )));
        }
        if c > 2 {
            return Err(Error::IndexAppearsOnce(format!("index repeated {c} times")));
        }
    }
    let mut slots_seen = vec![0usize; r];
    let mut bound_of: HashMap<IndexId, usize> = HashMap::new();
    let mut indices: Vec<BoundIndex> = Vec::new();
    let mut value = |t: IndexTerm, indices: &mut Vec<BoundIndex>| -> Result<IndexValue> {
        Ok(match t {
            IndexTerm::Fixed(c) => {
                if c >= d {
                    return Err(Error::IncompatibleShapes(format!("index value {c} >= {d}")));
                }
                IndexValue::Fixed(c)
            }
            IndexTerm::Free(id) => {
                let b = *bound_of.entry(id).or_insert_with(|| {
                    indices.push(BoundIndex {
                        kind: BoundKind::Spatial,
                        range: d,
                    });
                    indices.len() - 1
                });
                IndexValue::Bound(b)
            }
        })
    };
    let mut factors = Vec::with_capacity(p.factors.len());
    for f in &p.factors {
        let Factor {
            function,
            component,
            derivatives,
        } = f;
        let (slot, basis) = match function.kind {
            FunctionKind::Argument(j) => {
                slots_seen[j] += 1;
                (FunctionSlot::Argument(j), BasisIndex::Primary(j))
            }
            FunctionKind::Coefficient(c) => {
                let n = coef_pos[&c];
                indices.push(BoundIndex {
                    kind: BoundKind::CoefficientBasis(n),
                    range: coefficients[&c].1.dimension(),
                });
                (FunctionSlot::Coefficient(n), BasisIndex::Bound(indices.len() - 1))
            }
        };
        let component = component.map(|c| value(c, &mut indices)).transpose()?;
        let derivatives = derivatives
            .iter()
            .map(|&t| value(t, &mut indices))
            .collect::<Result<Vec<_>>>()?;
        factors.push(CanonicalFactor {
            function: slot,
            basis,
            component,
            derivatives,
        });
    }
    if let Some(j) = slots_seen.iter().position(|&n| n != 1) {
        return Err(Error::NotLowerable(format!(
            "argument {j} appears {} times in a product; the form is not multilinear",
            slots_seen[j]
        )));
    }
    Ok(canonicalize_monomial(Monomial {
        constant,
        factors,
        indices,
    }))
}
