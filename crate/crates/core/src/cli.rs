//! Command-line driver: single solves with DMP diagnostics and convergence
//! sweeps for the manufactured-solution example.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{check_global_dmp, check_local_dmp, convergence_orders, DmpReport, ErrorNorms, ErrorTableRow, DMP_TOL};
use crate::error::{Error, Result};
use crate::experiments::{run_case, Example};
use crate::mesh::MeshFamily;
use crate::solver::{residual, inf_norm, SolverOptions};
use crate::stab::StabScheme;
use crate::vtk::emit_vtk;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Default sweep; 512 and 1024 are added by `--fine`.
pub const DEFAULT_NE_LIST: [usize; 5] = [16, 32, 64, 128, 256];
pub const FINE_NE_LIST: [usize; 2] = [512, 1024];

#[derive(Debug, Parser)]
#[command(name = "algstab", version, about = "Algebraically stabilized P1 finite elements on the unit square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and report extrema, DMP checks and solver diagnostics.
    Solve(SolveArgs),
    /// Run a mesh refinement study for the smooth example and print an error table.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    Reaction,
    Convection,
    Smooth,
}

impl From<ExampleArg> for Example {
    fn from(e: ExampleArg) -> Self {
        match e {
            ExampleArg::Reaction => Example::Reaction,
            ExampleArg::Convection => Example::Convection,
            ExampleArg::Smooth => Example::Smooth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshArg {
    Left,
    Right,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Galerkin,
    Upwind,
    AfcKuzmin,
    Muas,
    MuasDq,
}

impl From<SchemeArg> for StabScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Galerkin => StabScheme::Galerkin,
            SchemeArg::Upwind => StabScheme::UpwindD,
            SchemeArg::AfcKuzmin => StabScheme::AfcKuzmin,
            SchemeArg::Muas => StabScheme::Muas,
            SchemeArg::MuasDq => StabScheme::MuasDq,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub example: ExampleArg,
    #[arg(long, value_enum, default_value = "shifted")]
    pub mesh: MeshArg,
    /// Node shift as a fraction of the horizontal mesh width (shifted meshes only).
    #[arg(long, default_value_t = 0.5)]
    pub shift: f64,
    /// Shift the grid lines y = 2k/ne instead of y = (2k+1)/ne.
    #[arg(long)]
    pub even_grid_lines: bool,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Lump the reaction term onto the diagonal.
    #[arg(long)]
    pub lump_reaction: bool,
    /// Nonlinear residual tolerance, relative to max(1, |g|_inf).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of cells along each side.
    #[arg(long)]
    pub ne: usize,
    /// Write the nodal solution as a legacy VTK file.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
    /// Write extrema, DMP reports and solver diagnostics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated, doubling list of ne values.
    #[arg(long, value_delimiter = ',')]
    pub ne_list: Option<Vec<usize>>,
    /// Allow (and by default include) the memory-hungry levels 512 and 1024.
    #[arg(long)]
    pub fine: bool,
    /// Write the table to this file instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl CommonArgs {
    fn family(&self) -> Result<MeshFamily> {
        let family = match self.mesh {
            MeshArg::Left => MeshFamily::left(),
            MeshArg::Right => MeshFamily::right(),
            MeshArg::Shifted => MeshFamily::shifted(self.shift)?,
        };
        Ok(if self.even_grid_lines { family.with_even_grid_lines() } else { family })
    }

    fn solver_options(&self) -> Result<SolverOptions<f64>> {
        let mut opts = SolverOptions::<f64>::default();
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            if max_iter == 0 {
                return Err(Error::InvalidArgument("max-iter must be positive".into()));
            }
            opts.max_iter = max_iter;
        }
        Ok(opts)
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    example: Example,
    mesh: MeshFamily,
    ne: usize,
    scheme: &'static str,
    lump_reaction: bool,
    n_total: usize,
    n_interior: usize,
    min: f64,
    max: f64,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    tolerance: f64,
    dmp: Vec<DmpReport>,
    errors: Option<ErrorNorms>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args, stdout),
        Command::Converge(args) => run_convergence(args, stdout),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "error: the nonlinear iteration did not converge");
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Solves one configuration; returns whether the solver converged.
pub fn run_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let example: Example = c.example.into();
    let scheme: StabScheme = c.scheme.into();
    let opts = c.solver_options()?;
    let family = c.family()?;
    let run = run_case::<f64>(example, family, args.ne, scheme, c.lump_reaction, &opts)?;
    let u = &run.result.u;
    let (min, max) = run.min_max();
    let s = run.mesh.neighborhoods();
    let sys = &run.system;
    let dmp = vec![
        check_local_dmp(sys, u, s, false, DMP_TOL),
        check_local_dmp(sys, u, s, true, DMP_TOL),
        check_global_dmp(sys, u, false, DMP_TOL),
        check_global_dmp(sys, u, true, DMP_TOL),
    ];
    let final_residual = inf_norm(&residual(sys, &run.b, u));
    let report = SolveReport {
        example,
        mesh: family,
        ne: args.ne,
        scheme: scheme.name(),
        lump_reaction: c.lump_reaction,
        n_total: run.mesh.n_total(),
        n_interior: run.mesh.n_interior(),
        min,
        max,
        iterations: run.result.iterations,
        converged: run.result.converged,
        final_residual,
        tolerance: opts.tol * sys.g_inf_norm().max(1.0),
        dmp,
        errors: run.norms,
    };

    writeln!(out, "example {} scheme {} ne {} (N = {}, M = {})", example.name(), scheme.name(), args.ne, report.n_total, report.n_interior)?;
    writeln!(out, "min {:e} max {:e}", min, max)?;
    writeln!(
        out,
        "iterations {} converged {} residual {:e}",
        report.iterations, report.converged, report.final_residual
    )?;
    for r in &report.dmp {
        let verdict = match (r.applicable, r.satisfied) {
            (false, _) => "not applicable".to_string(),
            (true, true) => "satisfied".to_string(),
            (true, false) => format!("{} violations, largest {:e}", r.violations.len(), r.max_violation()),
        };
        writeln!(out, "dmp {:?}: {verdict}", r.kind)?;
    }
    if let Some(e) = report.errors {
        writeln!(out, "errors l2 {:e} h1 {:e} h {:e}", e.l2, e.h1_semi, e.h)?;
    }
    if let Some(path) = &args.vtk {
        emit_vtk(&run.mesh, u, path)?;
    }
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(report.converged)
}

/// Resolves the list of mesh levels for a sweep.
pub fn resolve_ne_list(ne_list: Option<&[usize]>, fine: bool) -> Result<Vec<usize>> {
    let list: Vec<usize> = match ne_list {
        Some(l) => l.to_vec(),
        None if fine => DEFAULT_NE_LIST.iter().chain(&FINE_NE_LIST).copied().collect(),
        None => DEFAULT_NE_LIST.to_vec(),
    };
    if list.is_empty() {
        return Err(Error::InvalidArgument("ne-list is empty".into()));
    }
    let coarse_max = DEFAULT_NE_LIST[DEFAULT_NE_LIST.len() - 1];
    if !fine {
        if let Some(ne) = list.iter().find(|&&ne| ne > coarse_max) {
            return Err(Error::InvalidArgument(format!("ne = {ne} needs --fine")));
        }
    }
    for w in list.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidArgument(format!("ne must double between levels, got {} then {}", w[0], w[1])));
        }
    }
    Ok(list)
}

pub const CSV_HEADER: &str = "ne,err_l2,ord_l2,err_h1,ord_h1,err_h,ord_h,iters,converged";

pub fn csv_row(row: &ErrorTableRow) -> String {
    let ord = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.ne,
        row.err_l2,
        ord(row.ord_l2),
        row.err_h1,
        ord(row.ord_h1),
        row.err_h,
        ord(row.ord_h),
        row.iterations,
        row.converged
    )
}

/// Runs the sweep; returns whether every level converged. A non-converged
/// level ends the sweep after its row has been written.
pub fn run_convergence(args: &ConvergeArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let example: Example = c.example.into();
    if example.exact::<f64>().is_none() {
        return Err(Error::InvalidArgument(format!(
            "example '{}' has no exact solution; convergence studies need --example smooth",
            example.name()
        )));
    }
    let list = resolve_ne_list(args.ne_list.as_deref(), args.fine)?;
    let family = c.family()?;
    let opts = c.solver_options()?;
    let scheme: StabScheme = c.scheme.into();

    let mut rows: Vec<ErrorTableRow> = Vec::new();
    let mut all_converged = true;
    for &ne in &list {
        let run = run_case::<f64>(example, family, ne, scheme, c.lump_reaction, &opts)?;
        let norms = run.norms.expect("smooth example has an exact solution");
        rows.push(ErrorTableRow::new(ne, norms, run.result.iterations, run.result.converged));
        if !run.result.converged {
            all_converged = false;
            break;
        }
    }
    convergence_orders(&mut rows)?;
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&csv_row(row));
        text.push('\n');
    }
    match &args.csv {
        Some(path) => std::fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(all_converged)
}
