use std::path::Path;

use clap::ValueEnum;
use formc::assembly::io::write_vector;
use formc::assembly::problems::{solve_elasticity, solve_poisson};
use formc::assembly::{AssemblyMode, AssemblyOptions};
use formc::ExecPolicy;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Poisson2d,
    Poisson3d,
    Elasticity3d,
}

pub fn run(
    problem: Problem,
    resolution: usize,
    degree: usize,
    refinements: usize,
    mode: &str,
    output: Option<&Path>,
    policy: ExecPolicy,
) -> CliResult<()> {
    if resolution == 0 {
        return Err(CliError::User("resolution must be positive".into()));
    }
    let mode: AssemblyMode = mode.parse()?;
    let options = AssemblyOptions {
        mode,
        policy,
        ..Default::default()
    };
    match problem {
        Problem::Poisson2d | Problem::Poisson3d => {
            let dim = if problem == Problem::Poisson2d { 2 } else { 3 };
            println!("{:>5} {:>10} {:>8} {:>14} {:>7} {:>6}", "n", "h", "dofs", "L2 error", "rate", "CG");
            let mut previous: Option<f64> = None;
            let mut last = None;
            for k in 0..refinements.max(1) {
                let n = resolution << k;
                let sol = solve_poisson(dim, n, degree, &options, 1e-10)?;
                let rate = previous.map_or(String::from("-"), |p| format!("{:.3}", (p / sol.l2_error).log2()));
                println!(
                    "{n:>5} {:>10.5} {:>8} {:>14.6e} {rate:>7} {:>6}",
                    1.0 / n as f64,
                    sol.u.values.len(),
                    sol.l2_error,
                    sol.cg_iterations
                );
                previous = Some(sol.l2_error);
                last = Some(sol);
            }
            if let (Some(path), Some(sol)) = (output, last) {
                write_vector(path, &sol.u.values)?;
                println!("wrote {}", path.display());
            }
        }
        Problem::Elasticity3d => {
            let n = resolution;
            let sol = solve_elasticity(4.0, [4 * n, n, n], degree, &options)?;
            let k = &sol.stiffness;
            let translation = (0..3)
                .map(|dir| {
                    let t: Vec<f64> = (0..k.nrows).map(|g| if g % 3 == dir { 1.0 } else { 0.0 }).collect();
                    k.matvec(&t).iter().fold(0.0f64, |m, x| m.max(x.abs()))
                })
                .fold(0.0f64, f64::max);
            println!("cells {}, dofs {}", sol.mesh.num_cells(), k.nrows);
            println!("max |A - A^T| = {:.3e}", k.asymmetry());
            println!("max |A t| over rigid translations = {translation:.3e}");
            println!("CG iterations {}", sol.cg_iterations);
            println!("max displacement {:.6e}", sol.max_displacement);
            if let Some(path) = output {
                write_vector(path, &sol.displacement.values)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
