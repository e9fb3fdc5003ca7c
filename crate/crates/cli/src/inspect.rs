use std::path::Path;

use formc::artifact::ArtifactBundle;
use formc::tensor::flops;

use crate::CliResult;

pub fn run(path: &Path) -> CliResult<()> {
    let b = ArtifactBundle::load(path)?;
    print!("{}", render(&b));
    Ok(())
}

pub fn render(b: &ArtifactBundle) -> String {
    let c = &b.compiled;
    let form = &c.form;
    let mut s = String::new();
    s += &format!("signature: {}\n", b.signature);
    s += &format!("tool version: {} (format {})\n", b.tool_version, b.format_version);
    s += &format!("cell: {}, arity {}\n", form.cell, form.arity());
    for a in &form.arguments {
        s += &format!("argument {}: {} (dimension {})\n", a.name, a.element.tag(), a.element.dimension());
    }
    for w in &form.coefficients {
        s += &format!("coefficient {}: {} (dimension {})\n", w.name, w.element.tag(), w.element.dimension());
    }
    s += &format!("|I_K| = {}, terms {}, geometry size {}\n", c.num_entries(), c.terms.len(), c.geometry_size());
    for (k, t) in c.terms.iter().enumerate() {
        let r = &t.reference;
        s += &format!(
            "term {k}: |iα| = {}, |α| = {}, |A| = {}, quadrature degree {}\n",
            r.rank(),
            r.secondary.len(),
            r.secondary_size(),
            r.quadrature_degree
        );
        s += &format!("term {k}: {}\n", t.geometry.formula());
    }
    s += &format!("MAPs direct: {}\n", flops::direct_maps(c));
    s += &format!("MAPs geometry: {}\n", flops::geometry_maps(c));
    match &b.certificate {
        Some(m) => {
            s += &format!(
                "MAPs schedule: reduced {}, tree {}, schedule {}, discounted {}\n",
                m.reduced, m.tree_weight, m.schedule, m.discounted
            )
        }
        None => s += "schedule: none\n",
    }
    s
}
