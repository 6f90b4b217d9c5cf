//! Command-line surface and config-file handling.
//!
//! Every study option can come from a `key = value` config file (keys
//! mirror the long option names with underscores; `[section]` headers and
//! `#`/`;` comments are ignored) or from the command line, with flags
//! taking precedence over the file and the file over built-in defaults.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use cutfem::assembly::Method;
use cutfem::experiments::{ExperimentConfig, InterfaceKind, SweepParameter};
use cutfem::multigrid::{CoarseMatrixMode, GammaSolverKind, Smoother};
use cutfem::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cutmg",
    version,
    about = "Unfitted finite-element interface studies with geometric multigrid",
    after_help = "Config files hold key = value lines using the long option \
                  names (underscores allowed); command-line flags override them."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// L2 errors and convergence orders over a mesh hierarchy
    Convergence(ConvergenceArgs),
    /// Multigrid iteration counts across a parameter sweep
    MgTable(MgTableArgs),
    /// Conditioning and interface-factorization statistics per level
    Diagnostics(DiagnosticsArgs),
    /// Solve one level and optionally dump mesh, matrix, and solution
    Solve(SolveArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Config file with key = value lines (flags override it)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Spatial dimension (2 or 3)
    #[arg(long)]
    pub dim: Option<usize>,

    /// Elements per box edge on the coarsest level
    #[arg(long)]
    pub n0: Option<usize>,

    /// Number of mesh levels in the hierarchy
    #[arg(long)]
    pub levels: Option<usize>,

    /// Lower box corner coordinate
    #[arg(long)]
    pub lo: Option<f64>,

    /// Upper box corner coordinate
    #[arg(long)]
    pub hi: Option<f64>,

    /// Interface shape: sphere | plane
    #[arg(long)]
    pub interface: Option<String>,

    /// Sphere center as "x,y" or "x,y,z"
    #[arg(long)]
    pub center: Option<String>,

    /// Sphere radius
    #[arg(long)]
    pub radius: Option<f64>,

    /// Shift added to every sphere-center component
    #[arg(long)]
    pub delta: Option<f64>,

    /// Plane position (interface x0 = x_gamma)
    #[arg(long)]
    pub x_gamma: Option<f64>,

    /// Discretization: nitsche | p-nitsche | mu-nitsche
    #[arg(long)]
    pub method: Option<String>,

    /// Diffusion coefficient inside the interface
    #[arg(long)]
    pub mu1: Option<f64>,

    /// Diffusion coefficient outside the interface
    #[arg(long)]
    pub mu2: Option<f64>,

    /// Interface penalty scaling
    #[arg(long)]
    pub lambda_n: Option<f64>,

    /// Ghost-penalty weight (mu-nitsche only)
    #[arg(long)]
    pub eps_g: Option<f64>,

    /// Penalize with per-element diameters instead of the mesh width
    #[arg(long, value_name = "BOOL")]
    pub local_penalty_h: Option<bool>,

    /// Smoother: gs | gs-ic
    #[arg(long)]
    pub smoother: Option<String>,

    /// Interface-block solver: auto | pcg | cholesky
    #[arg(long)]
    pub gamma_solver: Option<String>,

    /// Coarse matrices: direct | galerkin
    #[arg(long)]
    pub coarse_mode: Option<String>,

    /// Smoothing steps before coarsening
    #[arg(long)]
    pub pre_smooth: Option<usize>,

    /// Smoothing steps after coarse correction
    #[arg(long)]
    pub post_smooth: Option<usize>,

    /// Relative residual tolerance of the V-cycle iteration
    #[arg(long)]
    pub rel_tol: Option<f64>,

    /// V-cycle limit before reporting non-convergence
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Classify cuts on the once-refined level set: auto | on | off
    #[arg(long)]
    pub iso_p2: Option<String>,

    /// Also write the table as CSV to this path
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct MgTableArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Swept parameter: mu1 | delta | lambda-n
    #[arg(long)]
    pub sweep: String,

    /// Comma-separated sweep values, e.g. "0.9,0.5,1e-3"
    #[arg(long)]
    pub values: String,
}

#[derive(Args)]
pub struct DiagnosticsArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Skip full-matrix eigenvalue estimates above this many unknowns
    #[arg(long, default_value_t = 20_000)]
    pub max_cond_dofs: usize,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Level to solve (default: the finest)
    #[arg(long)]
    pub level: Option<usize>,

    /// Write the level mesh as plain text
    #[arg(long, value_name = "FILE")]
    pub dump_mesh: Option<PathBuf>,

    /// Write the level matrix in Matrix Market format
    #[arg(long, value_name = "FILE")]
    pub dump_matrix: Option<PathBuf>,

    /// Write the solution coefficients as CSV
    #[arg(long, value_name = "FILE")]
    pub dump_solution: Option<PathBuf>,
}

/// Key = value pairs from a config file; sections are cosmetic.
fn parse_config_file(text: &str, path: &std::path::Path) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find(['#', ';']) {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{}:{}: expected key = value, got {line:?}",
                path.display(),
                idx + 1
            )));
        };
        let key = key.trim().replace('-', "_");
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Merges command-line values, config-file values, and defaults.
#[derive(Debug)]
pub struct Resolver {
    file: HashMap<String, String>,
}

impl Resolver {
    pub fn new(common: &CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                parse_config_file(&text, path)?
            }
            None => HashMap::new(),
        };
        Ok(Resolver { file })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("config key {key} = {raw:?}: {e}"))),
            None => Ok(None),
        }
    }

    /// Flag takes precedence, then the config file, then the default.
    fn pick<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        Ok(self.lookup(key)?.unwrap_or(default))
    }

    fn pick_opt<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        self.lookup(key)
    }

    pub fn experiment_config(&self, c: &CommonArgs) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let dim = self.pick(&c.dim, "dim", d.dim)?;

        let (d_center, d_radius, d_delta) = match d.interface {
            InterfaceKind::Spherical {
                center,
                radius,
                delta,
            } => (center, radius, delta),
            InterfaceKind::Planar { .. } => unreachable!("default interface is spherical"),
        };
        let shape = self.pick(&c.interface, "interface", "sphere".to_string())?;
        let interface = match shape.as_str() {
            "sphere" | "spherical" => InterfaceKind::Spherical {
                center: match self.pick_opt(&c.center, "center")? {
                    Some(ref s) => parse_center(s, dim)?,
                    None => d_center,
                },
                radius: self.pick(&c.radius, "radius", d_radius)?,
                delta: self.pick(&c.delta, "delta", d_delta)?,
            },
            "plane" | "planar" => InterfaceKind::Planar {
                x_gamma: self.pick(&c.x_gamma, "x_gamma", 1.321)?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown interface {other:?} (expected sphere or plane)"
                )))
            }
        };

        let mut mg = d.mg;
        mg.pre_smooth = self.pick(&c.pre_smooth, "pre_smooth", mg.pre_smooth)?;
        mg.post_smooth = self.pick(&c.post_smooth, "post_smooth", mg.post_smooth)?;
        mg.rel_tol = self.pick(&c.rel_tol, "rel_tol", mg.rel_tol)?;
        mg.max_iter = self.pick(&c.max_iter, "max_iter", mg.max_iter)?;
        if let Some(s) = self.pick_opt(&c.smoother, "smoother")? {
            mg.smoother = parse_smoother(&s)?;
        }
        if let Some(s) = self.pick_opt(&c.gamma_solver, "gamma_solver")? {
            mg.gamma_solver = parse_gamma_solver(&s)?;
        }
        if let Some(s) = self.pick_opt(&c.coarse_mode, "coarse_mode")? {
            mg.coarse_mode = parse_coarse_mode(&s)?;
        }

        let iso_p2 = match self.pick_opt(&c.iso_p2, "iso_p2")? {
            None => None,
            Some(s) => match s.as_str() {
                "auto" => None,
                "on" | "true" | "1" => Some(true),
                "off" | "false" | "0" => Some(false),
                other => {
                    return Err(Error::Config(format!(
                        "iso_p2 must be auto, on, or off, got {other:?}"
                    )))
                }
            },
        };

        Ok(ExperimentConfig {
            dim,
            n0: self.pick(&c.n0, "n0", d.n0)?,
            n_levels: self.pick(&c.levels, "levels", d.n_levels)?,
            lo: self.pick(&c.lo, "lo", d.lo)?,
            hi: self.pick(&c.hi, "hi", d.hi)?,
            interface,
            iso_p2,
            method: match self.pick_opt(&c.method, "method")? {
                Some(s) => parse_method(&s)?,
                None => d.method,
            },
            mu: [
                self.pick(&c.mu1, "mu1", d.mu[0])?,
                self.pick(&c.mu2, "mu2", d.mu[1])?,
            ],
            lambda_n: self.pick(&c.lambda_n, "lambda_n", d.lambda_n)?,
            eps_g: self.pick(&c.eps_g, "eps_g", d.eps_g)?,
            local_penalty_h: self.pick(&c.local_penalty_h, "local_penalty_h", d.local_penalty_h)?,
            mg,
        })
    }
}

fn parse_center(s: &str, dim: usize) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != dim {
        return Err(Error::Config(format!(
            "center needs {dim} components, got {}",
            parts.len()
        )));
    }
    let mut m = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        m[i] = p
            .parse()
            .map_err(|e| Error::Config(format!("center component {p:?}: {e}")))?;
    }
    Ok(m)
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s {
        "nitsche" => Ok(Method::Nitsche),
        "p-nitsche" | "p_nitsche" => Ok(Method::PNitsche),
        "mu-nitsche" | "mu_nitsche" => Ok(Method::MuNitsche),
        other => Err(Error::Config(format!(
            "unknown method {other:?} (expected nitsche, p-nitsche, or mu-nitsche)"
        ))),
    }
}

pub fn parse_smoother(s: &str) -> Result<Smoother> {
    match s {
        "gs" => Ok(Smoother::Gs),
        "gs-ic" | "gs_ic" => Ok(Smoother::GsIc),
        other => Err(Error::Config(format!(
            "unknown smoother {other:?} (expected gs or gs-ic)"
        ))),
    }
}

pub fn parse_gamma_solver(s: &str) -> Result<GammaSolverKind> {
    match s {
        "auto" => Ok(GammaSolverKind::Auto),
        "pcg" => Ok(GammaSolverKind::Pcg),
        "cholesky" => Ok(GammaSolverKind::Cholesky),
        other => Err(Error::Config(format!(
            "unknown interface solver {other:?} (expected auto, pcg, or cholesky)"
        ))),
    }
}

pub fn parse_coarse_mode(s: &str) -> Result<CoarseMatrixMode> {
    match s {
        "direct" => Ok(CoarseMatrixMode::DirectDiscretization),
        "galerkin" => Ok(CoarseMatrixMode::Galerkin),
        other => Err(Error::Config(format!(
            "unknown coarse mode {other:?} (expected direct or galerkin)"
        ))),
    }
}

pub fn parse_sweep(s: &str) -> Result<SweepParameter> {
    match s {
        "mu1" => Ok(SweepParameter::Mu1),
        "delta" => Ok(SweepParameter::Delta),
        "lambda-n" | "lambda_n" => Ok(SweepParameter::LambdaN),
        other => Err(Error::Config(format!(
            "unknown sweep parameter {other:?} (expected mu1, delta, or lambda-n)"
        ))),
    }
}

pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|e| Error::Config(format!("sweep value {p:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn common(args: &[&str]) -> CommonArgs {
        let mut argv = vec!["cutmg", "convergence"];
        argv.extend_from_slice(args);
        match Cli::parse_from(argv).command {
            Command::Convergence(c) => c.common,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_config_file_which_overrides_defaults() {
        let dir = std::env::temp_dir().join("cutmg-options-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("study.cfg");
        std::fs::write(
            &path,
            "# study setup\n[discretization]\nmethod = mu-nitsche\nmu1 = 1e-3\nlevels = 3\n; trailing comment\nsmoother = gs\n",
        )
        .unwrap();
        let args = common(&["--config", path.to_str().unwrap(), "--mu1", "0.25"]);
        let cfg = Resolver::new(&args)
            .unwrap()
            .experiment_config(&args)
            .unwrap();
        assert_eq!(cfg.method, Method::MuNitsche); // from file
        assert_eq!(cfg.mu[0], 0.25); // flag wins
        assert_eq!(cfg.mu[1], 1.0); // default
        assert_eq!(cfg.n_levels, 3); // from file
        assert_eq!(cfg.mg.smoother, Smoother::Gs); // from file
    }

    #[test]
    fn malformed_config_lines_are_rejected_with_location() {
        let dir = std::env::temp_dir().join("cutmg-options-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.cfg");
        std::fs::write(&path, "mu1 = 0.5\nnot a pair\n").unwrap();
        let args = common(&["--config", path.to_str().unwrap()]);
        let err = Resolver::new(&args).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("broken.cfg:2"), "{msg}");
    }

    #[test]
    fn center_parses_per_dimension() {
        assert_eq!(parse_center("1.0, 2.0", 2).unwrap(), [1.0, 2.0, 0.0]);
        assert_eq!(
            parse_center("1.0,2.0,3.0", 3).unwrap(),
            [1.0, 2.0, 3.0]
        );
        assert!(parse_center("1.0", 2).is_err());
        assert!(parse_center("1.0,oops", 2).is_err());
    }

    #[test]
    fn enumerations_reject_unknown_spellings() {
        assert!(parse_method("nitsche").is_ok());
        assert!(parse_method("ritz").is_err());
        assert!(parse_smoother("gs-ic").is_ok());
        assert!(parse_smoother("jacobi").is_err());
        assert!(parse_sweep("lambda-n").is_ok());
        assert!(parse_sweep("nu").is_err());
        assert!(parse_gamma_solver("cholesky").is_ok());
        assert!(parse_coarse_mode("galerkin").is_ok());
        assert!(parse_coarse_mode("smoothed").is_err());
    }

    #[test]
    fn sweep_values_parse_as_a_list() {
        assert_eq!(parse_values("0.9, 0.5,1e-3").unwrap(), vec![0.9, 0.5, 1e-3]);
        assert!(parse_values("0.9,x").is_err());
    }

    #[test]
    fn planar_interface_via_flags() {
        let args = common(&["--interface", "plane", "--x-gamma", "1.5"]);
        let cfg = Resolver::new(&args)
            .unwrap()
            .experiment_config(&args)
            .unwrap();
        assert_eq!(cfg.interface, InterfaceKind::Planar { x_gamma: 1.5 });
        assert!(!cfg.iso_p2(), "planes classify exactly on the mesh");
    }
}
