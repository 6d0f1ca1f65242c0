//! Command-line runner for the verification laboratory.
//!
//! Subcommands: `eigs`, `solve`, `extend`, `verify` (full suite), `report`.
//! Exit codes: 0 all checks pass, 1 check failure, 2 configuration error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use fraclab::domain::GridFunction;
use fraclab::error::Error;
use fraclab::extension::{conormal_flux, extend_neumann};
use fraclab::fractional::frac_solve;
use fraclab::report::{RunConfig, RunReport};
use fraclab::runner::{build_context, print_summary, run};

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Spectral fractional Laplacian laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and tables.
    #[arg(long, global = true, default_value = "fraclab-out")]
    out: PathBuf,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config worker count (0 = automatic).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigendecomposition: residuals, Gram deviation, leading eigenvalues.
    Eigs,
    /// Solves the fractional problem for the configured sources.
    Solve,
    /// Solves the extension problem and dumps field slices.
    Extend,
    /// Runs the configured verification checks (all, when none are listed).
    Verify,
    /// Prints the summary of a previously written report.json in --out.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(failures) => {
            if failures {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(cli: &Cli) -> fraclab::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    Ok(config)
}

fn dispatch(cli: &Cli) -> fraclab::Result<bool> {
    match cli.command {
        Command::Eigs => {
            let mut config = load_config(cli)?;
            config.checks = vec!["eigs".into(), "constants".into()];
            let report = run(&config)?;
            emit_and_print(&report, cli)?;
            write_eigenvalue_table(&config, cli)?;
            Ok(report.any_failure())
        }
        Command::Solve => {
            let mut config = load_config(cli)?;
            config.checks = vec!["max_principle".into(), "s1_consistency".into()];
            let report = run(&config)?;
            emit_and_print(&report, cli)?;
            write_solutions(&config, cli)?;
            Ok(report.any_failure())
        }
        Command::Extend => {
            let mut config = load_config(cli)?;
            config.checks = vec!["extension_oracle".into(), "isometry".into(), "flux".into()];
            let report = run(&config)?;
            emit_and_print(&report, cli)?;
            write_extension_slices(&config, cli)?;
            Ok(report.any_failure())
        }
        Command::Verify => {
            let config = load_config(cli)?;
            let report = run(&config)?;
            emit_and_print(&report, cli)?;
            Ok(report.any_failure())
        }
        Command::Report => {
            let path = cli.out.join("report.json");
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let summary = value
                .get("summary")
                .ok_or_else(|| Error::Config("report.json has no summary".into()))?;
            println!("{}", serde_json::to_string_pretty(summary)?);
            let failed = summary.get("failed").and_then(|v| v.as_u64()).unwrap_or(0);
            if failed > 0 {
                for rec in value
                    .get("checks")
                    .and_then(|c| c.as_array())
                    .into_iter()
                    .flatten()
                {
                    if rec.get("passed") == Some(&serde_json::Value::Bool(false)) {
                        println!(
                            "FAILED {} / {}",
                            rec.get("check").and_then(|v| v.as_str()).unwrap_or("?"),
                            rec.get("case").and_then(|v| v.as_str()).unwrap_or("?")
                        );
                    }
                }
            }
            Ok(failed > 0)
        }
    }
}

fn emit_and_print(report: &RunReport, cli: &Cli) -> fraclab::Result<()> {
    report.emit(&cli.out)?;
    print_summary(report);
    println!("report written to {}", cli.out.join("report.json").display());
    Ok(())
}

fn write_eigenvalue_table(config: &RunConfig, cli: &Cli) -> fraclab::Result<()> {
    let ctx = build_context(config)?;
    let fin = ctx.finest();
    let mut out = std::io::BufWriter::new(std::fs::File::create(
        cli.out.join("eigenvalues.csv"),
    )?);
    writeln!(out, "index,eigenvalue")?;
    for (j, lam) in fin.basis.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{}", j + 1, lam)?;
    }
    Ok(())
}

fn write_solutions(config: &RunConfig, cli: &Cli) -> fraclab::Result<()> {
    let ctx = build_context(config)?;
    let fin = ctx.finest();
    let grid = &fin.grid;
    let f = match config.rhs.bumps.first() {
        Some(b) => fraclab::domain::make_bump(grid, &b.center, b.radius)?,
        None => GridFunction::constant(grid, config.rhs.constant),
    };
    for &s in &config.s_values {
        let u = frac_solve(&fin.basis, &f, s)?;
        let path = cli.out.join(format!("solution_s{s}.csv"));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        if grid.dim() == 1 {
            writeln!(out, "x,u")?;
            for idx in 0..grid.len() {
                writeln!(out, "{},{}", grid.point(idx)[0], u.values[idx])?;
            }
        } else {
            writeln!(out, "x,y,u")?;
            for idx in 0..grid.len() {
                let p = grid.point(idx);
                writeln!(out, "{},{},{}", p[0], p[1], u.values[idx])?;
            }
        }
    }
    Ok(())
}

fn write_extension_slices(config: &RunConfig, cli: &Cli) -> fraclab::Result<()> {
    let ctx = build_context(config)?;
    let fin = ctx.finest();
    let grid = &fin.grid;
    let f = match config.rhs.bumps.first() {
        Some(b) => fraclab::domain::make_bump(grid, &b.center, b.radius)?,
        None => GridFunction::constant(grid, config.rhs.constant),
    };
    for &s in &config.s_values {
        let y_max = config.ladder.y_max.unwrap_or_else(|| {
            fraclab::extension::default_height(fin.basis.eigenvalues[0])
        });
        let beta = config
            .ladder
            .beta
            .unwrap_or_else(|| fraclab::extension::default_grading(s));
        let mesh = Arc::new(fraclab::extension::build_cylinder(
            &fin.lap,
            s,
            y_max,
            *config.ladder.cylinder_levels.last().unwrap(),
            beta,
        )?);
        let field = extend_neumann(&mesh, &f)?;
        field.write_slice_csv(&cli.out.join(format!("extension_s{s}.csv")))?;
        let flux = conormal_flux(&field);
        let path = cli.out.join(format!("flux_s{s}.csv"));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,flux,f")?;
        for idx in 0..grid.len() {
            writeln!(
                out,
                "{},{},{}",
                grid.point(idx)[0],
                flux.values[idx],
                f.values[idx]
            )?;
        }
    }
    Ok(())
}
