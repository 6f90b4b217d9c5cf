//! `cutmg` — studies of an elliptic interface problem on unfitted meshes:
//! convergence tables, multigrid robustness sweeps, interface-solver
//! diagnostics, and single-level solves with optional data dumps.
//!
//! Exit codes: 0 on success, 2 when any reported solve diverged (the tables
//! mark those cells "div"), 1 for configuration or I/O errors.

mod options;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use cutfem::experiments::{
    format_scientific, run_convergence, run_diagnostics, run_mg_table, ExperimentConfig,
};
use cutfem::multigrid::mg_solve;
use cutfem::{Error, Result};

use options::{
    parse_sweep, parse_values, Cli, Command, CommonArgs, ConvergenceArgs, DiagnosticsArgs,
    MgTableArgs, Resolver, SolveArgs,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Convergence(args) => cmd_convergence(args),
        Command::MgTable(args) => cmd_mg_table(args),
        Command::Diagnostics(args) => cmd_diagnostics(args),
        Command::Solve(args) => cmd_solve(args),
    };
    match outcome {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

enum Outcome {
    Clean,
    /// At least one solve left the stable regime; tables carry "div" cells.
    Diverged,
}

fn resolve(common: &CommonArgs) -> Result<ExperimentConfig> {
    let cfg = Resolver::new(common)?.experiment_config(common)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_csv(path: &Option<PathBuf>, csv: &str) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn describe(cfg: &ExperimentConfig) -> String {
    let method = match cfg.method {
        cutfem::assembly::Method::Nitsche => "nitsche",
        cutfem::assembly::Method::PNitsche => "p-nitsche",
        cutfem::assembly::Method::MuNitsche => "mu-nitsche",
    };
    format!(
        "{}D, {} levels from {}^{}, method {method}, mu = ({}, {})",
        cfg.dim,
        cfg.n_levels,
        cfg.n0,
        cfg.dim,
        format_scientific(cfg.mu[0]),
        format_scientific(cfg.mu[1]),
    )
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<Outcome> {
    let cfg = resolve(&args.common)?;
    let table = run_convergence(&cfg)?;
    println!("{}", describe(&cfg));
    print!("{}", table.to_text());
    write_csv(&args.common.csv, &table.to_csv())?;
    Ok(if table.has_divergence() {
        Outcome::Diverged
    } else {
        Outcome::Clean
    })
}

fn cmd_mg_table(args: MgTableArgs) -> Result<Outcome> {
    let cfg = resolve(&args.common)?;
    let sweep = parse_sweep(&args.sweep)?;
    let values = parse_values(&args.values)?;
    let table = run_mg_table(&cfg, sweep, &values)?;
    println!("{}", describe(&cfg));
    println!("V-cycles to reduce the residual by {}:", format_scientific(cfg.mg.rel_tol));
    print!("{}", table.to_text());
    write_csv(&args.common.csv, &table.to_csv())?;
    Ok(if table.has_divergence() {
        Outcome::Diverged
    } else {
        Outcome::Clean
    })
}

fn cmd_diagnostics(args: DiagnosticsArgs) -> Result<Outcome> {
    let cfg = resolve(&args.common)?;
    let table = run_diagnostics(&cfg, args.max_cond_dofs)?;
    println!("{}", describe(&cfg));
    print!("{}", table.to_text());
    write_csv(&args.common.csv, &table.to_csv())?;
    Ok(Outcome::Clean)
}

fn dump<F>(path: &Option<PathBuf>, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(path) = path {
        let mut w = BufWriter::new(File::create(path)?);
        write(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn dump_solution(path: &Path, x: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "dof,value")?;
    for (i, v) in x.iter().enumerate() {
        writeln!(w, "{i},{v:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<Outcome> {
    let cfg = resolve(&args.common)?;
    let h = cfg.build()?;
    let level = args.level.unwrap_or(h.finest());
    if level >= h.n_levels() {
        return Err(Error::Config(format!(
            "level {level} outside the hierarchy (0..{})",
            h.finest()
        )));
    }
    let lvl = &h.levels[level];
    println!("{}", describe(&cfg));
    println!(
        "level {level}: {} unknowns, {} interface unknowns, h = {}",
        lvl.a.n_rows(),
        lvl.interface_idx.len(),
        format_scientific(lvl.mesh.h),
    );
    dump(&args.dump_mesh, |w| lvl.mesh.write_plaintext(w))?;
    dump(&args.dump_matrix, |w| lvl.a.write_matrix_market(w))?;
    match mg_solve(&h, level, &lvl.b) {
        Ok(out) => {
            println!(
                "converged in {} iterations, relative residual {}",
                out.iterations,
                format_scientific(out.rel_residual),
            );
            if let Some(path) = &args.dump_solution {
                dump_solution(path, &out.x)?;
            }
            Ok(Outcome::Clean)
        }
        Err(Error::Diverged {
            iterations,
            residual,
        }) => {
            println!(
                "div (residual {} after {iterations} iterations)",
                format_scientific(residual)
            );
            Ok(Outcome::Diverged)
        }
        Err(Error::NotConverged { max_iter, residual }) => {
            println!(
                "div (residual {} after the {max_iter}-iteration limit)",
                format_scientific(residual)
            );
            Ok(Outcome::Diverged)
        }
        Err(Error::NotSpd(detail)) => {
            println!("div (lost positive definiteness: {detail})");
            Ok(Outcome::Diverged)
        }
        Err(e) => Err(e),
    }
}
