use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conifold::linalg::DenseMatrix;
use conifold::mesh::{eigensolve, load_off, AssemblyOptions, EigensolveOptions};
use conifold::{sphere_spectrum, torus_spectrum, Spectrum};
use conifold_cli::config::{load_config, EigenvalueEntry};
use conifold_cli::report::{sig12, SpectrumReport};
use conifold_cli::{pipeline, render, verify, CliError, Format};

#[derive(Parser)]
#[command(name = "conifold", version, about = "Deformation theory of special Lagrangian conifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a scenario file.
    Compute {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Reject unknown keys and spectra not known to be complete.
        #[arg(long)]
        strict: bool,
    },
    /// Validate a scenario file and its topology without computing.
    Check {
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Print the spectrum of a link.
    Spectrum {
        #[command(subcommand)]
        link: LinkArgs,
        #[arg(long, value_enum, default_value = "text", global = true)]
        format: Format,
    },
    /// Stability verdicts for the CS ends of a scenario.
    Stability {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        strict: bool,
    },
    /// Recompute a machine report and compare it with itself.
    Verify { report: PathBuf },
}

#[derive(Subcommand)]
enum LinkArgs {
    /// Round unit sphere S^dim.
    Sphere {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        cutoff: f64,
    },
    /// Flat torus; rows separated by ';', entries by ','.
    Torus {
        #[arg(long)]
        basis: String,
        #[arg(long)]
        cutoff: f64,
    },
    /// Cotangent Laplacian of an OFF triangle mesh.
    Mesh {
        path: PathBuf,
        #[arg(long)]
        cutoff: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        #[arg(long)]
        reject_thin_triangles: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Compute { config, format, strict } => {
            let (scenario, warnings) = load_config(&config, strict)?;
            let report = pipeline::run(&scenario, &base_dir(&config), strict, warnings)?;
            if format == Format::Machine {
                warn_all(&report.warnings);
            }
            emit(&render::render(&report, format));
            Ok(0)
        }
        Command::Check { config, strict } => {
            let (scenario, warnings) = load_config(&config, strict)?;
            warn_all(&warnings);
            let t = scenario.topology()?;
            t.check()?;
            for (_, end) in scenario.ordered_ends() {
                conifold_cli::config::descriptor(end, scenario.m, &base_dir(&config))?;
            }
            emit(&format!(
                "ok: case {}, m = {}, s = {}, l = {}\n",
                scenario.case.case().as_str(),
                scenario.m,
                t.s(),
                t.l()
            ));
            Ok(0)
        }
        Command::Stability { config, format, strict } => {
            let (scenario, mut warnings) = load_config(&config, strict)?;
            let (verdicts, more) = pipeline::stability_only(&scenario, &base_dir(&config), strict)?;
            warnings.extend(more);
            warn_all(&warnings);
            match format {
                Format::Text => emit(&render::stability_lines(&verdicts)),
                Format::Machine => emit(&(serde_json::to_string_pretty(&verdicts).expect("serializes") + "\n")),
            }
            let unstable = verdicts.iter().any(|v| !v.stable);
            if scenario.options.require_stable && unstable {
                return Err(CliError::Core(conifold::Error::StabilityViolation(
                    "at least one cone is unstable".into(),
                )));
            }
            Ok(0)
        }
        Command::Spectrum { link, format } => {
            let spectrum = link_spectrum(link)?;
            let report = SpectrumReport {
                source: spectrum.source().as_str().to_string(),
                cutoff: sig12(spectrum.cutoff()),
                assumed_cutoff: None,
                entries: spectrum
                    .entries()
                    .iter()
                    .map(|e| EigenvalueEntry {
                        eigenvalue: sig12(e.eigenvalue),
                        multiplicity: e.multiplicity,
                    })
                    .collect(),
            };
            match format {
                Format::Text => {
                    let mut s = format!("# {} spectrum up to {}\n", report.source, report.cutoff);
                    for e in &report.entries {
                        s.push_str(&format!("{:>20}  {}\n", e.eigenvalue, e.multiplicity));
                    }
                    emit(&s);
                }
                Format::Machine => emit(&(serde_json::to_string_pretty(&report).expect("serializes") + "\n")),
            }
            Ok(0)
        }
        Command::Verify { report } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", report.display())))?;
            let diffs = verify(&text)?;
            if diffs.is_empty() {
                emit("verified: every section reproduced\n");
                Ok(0)
            } else {
                Err(CliError::Mismatch(format!("sections differ: {}", diffs.join(", "))))
            }
        }
    }
}

fn parse_basis(text: &str) -> Result<DenseMatrix<f64>, CliError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Config(format!("bad basis entry {x:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    DenseMatrix::from_rows(&rows).ok_or_else(|| CliError::Config("basis rows must have equal length".into()))
}

fn link_spectrum(link: LinkArgs) -> Result<Spectrum, CliError> {
    Ok(match link {
        LinkArgs::Sphere { dim, cutoff } => sphere_spectrum(dim, cutoff)?,
        LinkArgs::Torus { basis, cutoff } => torus_spectrum(&parse_basis(&basis)?, cutoff)?,
        LinkArgs::Mesh {
            path,
            cutoff,
            tol,
            margin,
            reject_thin_triangles,
        } => {
            let mesh = load_off::<f64>(&path).map_err(conifold::Error::from)?;
            let opts = EigensolveOptions {
                tol,
                margin,
                assembly: AssemblyOptions {
                    strict: reject_thin_triangles,
                    ..AssemblyOptions::default()
                },
                ..EigensolveOptions::default()
            };
            eigensolve(&mesh, cutoff, &opts)?.spectrum
        }
    })
}
