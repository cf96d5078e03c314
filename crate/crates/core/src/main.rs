use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use ultranorm::commands::{self, checks_table, CommandKind, Output};
use ultranorm::config::{Experiment, ExperimentConfig};
use ultranorm::report::VerificationReport;
use ultranorm::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ultranorm", version, about = "Weight sequences, weighted seminorms and STFT checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for report.json, CSV tables and SVG plots.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Format written to stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Also produce SVG plots (written with --out).
    #[arg(long, global = true)]
    plot: bool,

    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,

    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for sampled comparisons.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Associated functions M(t) and M_r(t) on a log grid.
    Assoc,
    /// Log-convexity, (M.2)' fit and growth checks for each sequence.
    CheckSeq,
    /// Regularize r-sequences and certify the result.
    Regularize,
    /// Weight-system conditions and the v-bar construction.
    Weights,
    /// Weighted seminorms of the test functions.
    Seminorm,
    /// STFT samples, isometry and reconstruction.
    Stft,
    /// Run the configured verification suite.
    Verify,
    /// Re-render a stored report.
    Report {
        /// Report JSON; `--config` is accepted as well.
        path: Option<PathBuf>,
    },
}

fn kind(cmd: &Cmd) -> Option<CommandKind> {
    Some(match cmd {
        Cmd::Assoc => CommandKind::Assoc,
        Cmd::CheckSeq => CommandKind::CheckSeq,
        Cmd::Regularize => CommandKind::Regularize,
        Cmd::Weights => CommandKind::Weights,
        Cmd::Seminorm => CommandKind::Seminorm,
        Cmd::Stft => CommandKind::Stft,
        Cmd::Verify => CommandKind::Verify,
        Cmd::Report { .. } => return None,
    })
}

fn load_experiment(cli: &Cli) -> Result<Experiment> {
    let (mut config, base) = match &cli.config {
        Some(p) => (
            ExperimentConfig::from_path(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    for t in &cli.tol {
        config.tolerances.set(t)?;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    Experiment::build(config, &base)
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn write_outputs(dir: &Path, out: &Output) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), out.report.to_json()? + "\n")?;
    for (stem, table) in &out.tables {
        table.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
    }
    for (stem, svg) in &out.plots {
        std::fs::write(dir.join(format!("{stem}.svg")), svg)?;
    }
    Ok(())
}

fn emit(format: Format, report: &VerificationReport, primary: Option<&ultranorm::export::Table>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match (format, primary) {
        (Format::Csv, Some(t)) => t.write_csv(&mut stdout)?,
        (Format::Csv, None) => checks_table(&report.checks).write_csv(&mut stdout)?,
        (Format::Json, _) => writeln!(stdout, "{}", report.to_json()?)?,
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Cmd::Report { path } = &cli.command {
        let path = path
            .as_ref()
            .or(cli.config.as_ref())
            .ok_or_else(|| Error::Config("report needs a path to a stored report".into()))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let report: VerificationReport =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if !report.is_consistent() {
            return Err(Error::Config("stored summary does not match its checks".into()));
        }
        emit(cli.format.unwrap_or(Format::Json), &report, None)?;
        return Ok(report.exit_code());
    }
    let kind = kind(&cli.command).expect("report handled above");
    let exp = load_experiment(cli)?;
    let mut out = commands::run(kind, &exp, cli.plot)?;
    out.report.generated_at = Some(timestamp());
    if let Some(dir) = &cli.out {
        write_outputs(dir, &out)?;
        let s = out.report.summary;
        eprintln!(
            "{}: {} pass, {} fail, {} inconclusive -> {}",
            kind.name(),
            s.pass,
            s.fail,
            s.inconclusive,
            dir.display()
        );
    } else {
        let default = if kind == CommandKind::Assoc { Format::Csv } else { Format::Json };
        emit(
            cli.format.unwrap_or(default),
            &out.report,
            out.tables.first().map(|(_, t)| t),
        )?;
    }
    Ok(out.report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || execute(&cli);
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
