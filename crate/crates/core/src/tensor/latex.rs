//! LaTeX rendering of tensor representations.

use std::fmt::Write as _;

use super::kernel::CompiledForm;
use super::layout::SecondaryAxis;
use super::plan::SpatialIndex;

fn fmt_entry(v: f64, exact: Option<&num_rational::Rational64>) -> String {
    match exact {
        Some(q) if *q.denom() == 1 => format!("{}", q.numer()),
        Some(q) => {
            let sign = if *q.numer() < 0 { "-" } else { "" };
            format!("{sign}\\frac{{{}}}{{{}}}", q.numer().abs(), q.denom())
        }
        None => format!("{v:.6}"),
    }
}

/// One table per term listing `A0` row by row together with the formula for
/// `G_K`.
pub fn render(compiled: &CompiledForm) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "% signature {}", compiled.signature);
    for (k, t) in compiled.terms.iter().enumerate() {
        let r = &t.reference;
        let names: Vec<String> = (0..r.secondary.len()).map(|n| format!("\\alpha_{{{}}}", n + 1)).collect();
        let _ = writeln!(s, "\\begin{{table}}[htbp]\n\\begin{{center}}\n\\small");
        let _ = writeln!(s, "\\begin{{tabular}}{{|l|l|}}\n\\hline");
        let legend: Vec<String> = r
            .secondary
            .iter()
            .zip(&names)
            .map(|(a, n)| match a {
                SecondaryAxis::Reference { factor, .. } => format!("${n}$: reference direction of factor {}", factor + 1),
                SecondaryAxis::Spatial { .. } => format!("${n}$: spatial direction"),
                SecondaryAxis::Coefficient { coefficient, .. } => {
                    format!("${n}$: basis of coefficient $w_{{{}}}$", coefficient + 1)
                }
            })
            .collect();
        let _ = writeln!(s, "\\multicolumn{{2}}{{|l|}}{{term {}: rank {} = {} + {}}} \\\\", k + 1, r.rank(), r.primary_dims.len(), r.secondary.len());
        for l in legend {
            let _ = writeln!(s, "\\multicolumn{{2}}{{|l|}}{{{l}}} \\\\");
        }
        let _ = writeln!(s, "\\hline");
        let _ = writeln!(s, "$G_K$ & ${}$ \\\\", geometry_latex(compiled, k, &names));
        let _ = writeln!(s, "\\hline");
        let sec = r.secondary_size();
        let mut idx = vec![0usize; r.primary_dims.len()];
        for i in 0..r.primary_size() {
            super::layout::unflatten(i, &r.primary_dims, &mut idx);
            let label: Vec<String> = idx.iter().map(|x| (x + 1).to_string()).collect();
            let entries: Vec<String> = (0..sec)
                .map(|a| {
                    let p = i * sec + a;
                    fmt_entry(r.values[p], r.rational.as_ref().map(|q| &q[p]))
                })
                .collect();
            let _ = writeln!(s, "$a^0_{{{}}}$ & $({})$ \\\\", label.join(","), entries.join(", "));
        }
        let _ = writeln!(s, "\\hline\n\\end{{tabular}}\n\\end{{center}}\n\\end{{table}}\n");
    }
    s
}

fn geometry_latex(compiled: &CompiledForm, k: usize, names: &[String]) -> String {
    let g = &compiled.terms[k].geometry;
    let mut s = String::new();
    if names.is_empty() {
        s.push_str("G_K = ");
    } else {
        let _ = write!(s, "G_K^{{{}}} = ", names.join(""));
    }
    if g.constant != 1.0 {
        let _ = write!(s, "{} ", g.constant);
    }
    for (n, ax) in g.secondary.iter().enumerate() {
        if let SecondaryAxis::Coefficient { coefficient, .. } = ax {
            let _ = write!(s, "w^{{K,{}}}_{{{}}} ", coefficient + 1, names[n]);
        }
    }
    s.push_str("\\det F_K'");
    if !g.aux_ranges.is_empty() {
        let b: Vec<String> = (0..g.aux_ranges.len()).map(|n| format!("\\beta_{{{}}}", n + 1)).collect();
        let _ = write!(s, " \\sum_{{{}}}", b.join(","));
    }
    for jf in &g.jacobian_factors {
        let sp = match jf.spatial {
            SpatialIndex::Fixed(c) => (c + 1).to_string(),
            SpatialIndex::Secondary(ax) => names[ax].clone(),
            SpatialIndex::Aux(n) => format!("\\beta_{{{}}}", n + 1),
        };
        let _ = write!(s, " \\frac{{\\partial X_{{{}}}}}{{\\partial x_{{{}}}}}", names[jf.reference_axis], sp);
    }
    s
}
