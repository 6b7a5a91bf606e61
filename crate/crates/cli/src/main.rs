mod commands;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rigidity_core::ToleranceContext;

use report::{CliError, Format};

#[derive(Parser)]
#[command(name = "rigidity", version, about = "Rigidity, tensegrity and prestress analysis of frameworks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalOpts {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Residual threshold for certificate re-verification.
    #[arg(long, global = true)]
    tol_cert: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Force exact rational arithmetic where the input allows it.
    #[arg(long, global = true)]
    exact: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl GlobalOpts {
    fn tolerances(&self) -> Result<ToleranceContext, CliError> {
        let d = ToleranceContext::default();
        Ok(ToleranceContext::new(
            self.tol_rank.unwrap_or(d.rank_tol),
            self.tol_cert.unwrap_or(d.cert_tol),
            d.fd_step,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Bar,
    Tensegrity,
}

#[derive(Subcommand)]
enum Command {
    /// Rank, flexes, stresses and both tensegrity rigidity verdicts.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Bar)]
        mode: Mode,
    },
    /// Prestress stability of a bar framework.
    Prestress {
        file: PathBuf,
        /// Random restarts of the eigenvalue ascent.
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 300)]
        iterations: usize,
    },
    /// Truncation diagnostics for an infinite family, one JSON line per level.
    Infinite {
        /// triangle, strip, dyadic, lacunary or square-in-square.
        family: String,
        /// Highest truncation level; levels 1..=N are reported.
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Residual space: l<q>, c0 or linf.
        #[arg(long, default_value = "l1")]
        space: String,
        #[arg(long)]
        one_sided: bool,
        /// Level used by the bounded-prestress probe (default min(levels, 6)).
        #[arg(long)]
        bps_level: Option<usize>,
        /// Strip only: column whose top x-velocity is fixed to -1.
        #[arg(long)]
        bay: Option<i64>,
    },
    /// Writes an SVG drawing of a planar framework.
    ExportSvg {
        /// Framework file; omit when drawing a generated family.
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        family: Option<String>,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long)]
        one_sided: bool,
        /// none, flex:<k> or stress.
        #[arg(long, default_value = "none")]
        overlay: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Randomized property suites for the cone and tensegrity layers.
    Oracle {
        /// dichotomy, projection, doubledual or roth-whiteley.
        kind: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Rigidity matrix of a framework.
    Matrix {
        file: PathBuf,
        /// Signed tensegrity matrix instead of the bar matrix.
        #[arg(long)]
        signed: bool,
    },
    /// Framework file of a family truncation.
    Generate {
        family: String,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long)]
        one_sided: bool,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Analyze { file, mode } => commands::analyze(g, &file, mode),
        Command::Prestress {
            file,
            restarts,
            iterations,
        } => commands::prestress(g, &file, restarts, iterations),
        Command::Infinite {
            family,
            levels,
            space,
            one_sided,
            bps_level,
            bay,
        } => commands::infinite(g, &family, levels, &space, one_sided, bps_level, bay),
        Command::ExportSvg {
            file,
            family,
            level,
            one_sided,
            overlay,
            output,
        } => {
            let svg = commands::export_svg(g, file.as_deref(), family.as_deref(), level, one_sided, &overlay)?;
            match output {
                Some(path) => {
                    std::fs::write(&path, svg).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(svg),
            }
        }
        Command::Oracle { kind, trials } => commands::oracle(g, &kind, trials),
        Command::Matrix { file, signed } => commands::matrix(g, &file, signed),
        Command::Generate {
            family,
            level,
            one_sided,
        } => commands::generate(&family, level, one_sided),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::SuiteFailure(report)) => {
            print!("{report}");
            eprintln!("error: property suite recorded failures");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
