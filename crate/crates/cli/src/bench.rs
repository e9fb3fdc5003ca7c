use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use formc::artifact::ArtifactBundle;
use formc::assembly::io::read_mesh;
use formc::assembly::{unit_cube, unit_interval, unit_square, SimplicialMesh};
use formc::fiat::CellShape;
use formc::par::{self, ExecPolicy};
use formc::tensor::{build_quadrature_kernel, flops, CellGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Direct,
    Matvec,
    Schedule,
    Quadrature,
}

#[derive(Debug, Serialize)]
pub struct ModeReport {
    pub mode: BenchMode,
    /// Multiply-add pairs per cell predicted by the count model.
    pub maps_per_cell: usize,
    pub cells_per_second: f64,
    /// Largest entry difference against the direct contraction.
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub signature: String,
    pub cells: usize,
    pub quadrature_points: usize,
    pub modes: Vec<ModeReport>,
}

fn synthetic_mesh(spec: Option<&str>, cell: CellShape) -> CliResult<SimplicialMesh> {
    let default = match cell {
        CellShape::Interval => "interval:256",
        CellShape::Triangle => "square:16",
        CellShape::Tetrahedron => "cube:6",
    };
    let spec = spec.unwrap_or(default);
    if let Some((kind, n)) = spec.split_once(':') {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::User(format!("bad mesh size in '{spec}'")))?;
        return Ok(match kind {
            "interval" => unit_interval(n)?,
            "square" => unit_square(n)?,
            "cube" => unit_cube(n)?,
            _ => return Err(CliError::User(format!("unknown mesh kind '{kind}'"))),
        });
    }
    Ok(read_mesh(spec)?)
}

pub fn run(path: &Path, mesh: Option<&str>, modes: &[BenchMode], repeat: usize, json: bool, policy: ExecPolicy) -> CliResult<()> {
    let bundle = ArtifactBundle::load(path)?;
    let report = bench(&bundle, mesh, modes, repeat, policy)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?);
    } else {
        println!("signature {}", report.signature);
        println!("{} cells, {} quadrature points", report.cells, report.quadrature_points);
        println!("{:<11} {:>12} {:>14} {:>12}", "mode", "MAPs/cell", "cells/s", "residual");
        for m in &report.modes {
            let name = format!("{:?}", m.mode).to_lowercase();
            println!("{name:<11} {:>12} {:>14.0} {:>12.3e}", m.maps_per_cell, m.cells_per_second, m.residual);
        }
    }
    if report.modes.iter().any(|m| m.residual > 1e-10) {
        return Err(CliError::Verification("modes disagree by more than 1e-10".into()));
    }
    Ok(())
}

pub fn bench(
    bundle: &ArtifactBundle,
    mesh: Option<&str>,
    modes: &[BenchMode],
    repeat: usize,
    policy: ExecPolicy,
) -> CliResult<BenchReport> {
    let c = &bundle.compiled;
    if c.arity() != 2 {
        return Err(CliError::User(format!("bench needs a bilinear form, artifact has arity {}", c.arity())));
    }
    let mut modes = modes.to_vec();
    if modes.is_empty() {
        modes = vec![BenchMode::Direct, BenchMode::Matvec, BenchMode::Quadrature];
        if bundle.schedule.is_some() {
            modes.insert(2, BenchMode::Schedule);
        }
    }
    if modes.contains(&BenchMode::Schedule) && bundle.schedule.is_none() {
        return Err(CliError::User("mode 'schedule' unavailable: no schedule in artifact".into()));
    }
    let mesh = synthetic_mesh(mesh, c.form.cell)?;
    if mesh.shape() != c.form.cell {
        return Err(formc::Error::CellMismatch {
            element: c.form.cell.to_string(),
            mesh: mesh.shape().to_string(),
        }
        .into());
    }
    let geoms: Vec<CellGeometry> = (0..mesh.num_cells())
        .map(|k| mesh.cell_geometry(k))
        .collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let coefs: Vec<Vec<Vec<f64>>> = geoms
        .iter()
        .map(|_| {
            c.form
                .coefficients
                .iter()
                .map(|w| (0..w.element.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    let quad = build_quadrature_kernel(&c.form, None, policy)?;
    let gs: Vec<Vec<f64>> = geoms
        .iter()
        .zip(&coefs)
        .map(|(g, w)| c.geometry_vector(g, w))
        .collect::<Result<_, _>>()?;
    let reference: Vec<Vec<f64>> = gs.iter().map(|g| c.contract_direct(g)).collect();
    let n = geoms.len();
    let mut reports = Vec::new();
    for mode in modes {
        let evaluate = || -> Vec<Vec<f64>> {
            match mode {
                BenchMode::Direct => par::map_range(policy, n, |k| c.contract_direct(&gs[k])),
                BenchMode::Matvec => par::map_range(policy, n, |k| c.kernel.matvec(&gs[k])),
                BenchMode::Schedule => {
                    let s = bundle.schedule.as_ref().expect("checked above");
                    par::map_range(policy, n, |k| s.evaluate(&gs[k]))
                }
                BenchMode::Quadrature => par::map_range(policy, n, |k| {
                    quad.element_tensor(&geoms[k], &coefs[k]).expect("inputs validated by the tensor path")
                }),
            }
        };
        let mut best = f64::INFINITY;
        let mut out = Vec::new();
        for _ in 0..repeat.max(1) {
            let t = Instant::now();
            out = evaluate();
            best = best.min(t.elapsed().as_secs_f64());
        }
        let residual = out
            .iter()
            .zip(&reference)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        let maps_per_cell = match mode {
            BenchMode::Direct | BenchMode::Matvec => flops::direct_maps(c),
            BenchMode::Schedule => bundle.certificate.map_or(0, |m| m.schedule),
            BenchMode::Quadrature => flops::quadrature_model(&c.form, quad.num_points()).leading,
        };
        reports.push(ModeReport {
            mode,
            maps_per_cell,
            cells_per_second: n as f64 / best.max(1e-12),
            residual,
        });
    }
    Ok(BenchReport {
        signature: bundle.signature.clone(),
        cells: n,
        quadrature_points: quad.num_points(),
        modes: reports,
    })
}
