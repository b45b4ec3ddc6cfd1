use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chirogrid::chirotope::{chirotope_diff, compute_chirotope, Chirotope};
use chirogrid::experiments::{
    estimate_per_event, lemma1_falsify, lemma2_property_run, per_event_bound,
    run_theorem_experiment, success_lower_bound_for_grid, write_jsonl, ExperimentParams,
    ExperimentSummary,
};
use chirogrid::grid::{decode_bytes, encode, grid_from_params, round_config, GridSpec};
use chirogrid::sampling::{
    sample_config, Domain, PointConfig, SamplerConfig, DEFAULT_PRECISION_BITS,
};
use chirogrid::Rational;
use clap::{Args, Parser, Subcommand};
use num_bigint::{BigInt, BigUint};

#[derive(Parser)]
#[command(
    name = "chirogrid",
    version,
    about = "Exact chirotopes, grid rounding and rounding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point set with dyadic rational coordinates.
    Sample(SampleArgs),
    /// Round a point set to the grid of step 1/M.
    Round(RoundArgs),
    /// Compute the chirotope of a point set.
    Chirotope(ChirotopeArgs),
    /// List the subsets on which two chirotopes or point sets differ.
    Compare(CompareArgs),
    /// Encode a grid point set in the binary fixed-width format.
    Encode(RoundArgs),
    /// Decode a binary grid point set back to text.
    Decode(DecodeArgs),
    /// Evaluate the closed-form success and per-event bounds.
    Bound(BoundArgs),
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Sample, round and compare chirotopes over many trials.
    Theorem(TheoremArgs),
    /// Estimate the probability that a point falls in the 2√d/M slab of a facet.
    PerEvent(PerEventArgs),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Search for hyperplanes meeting a whole R or S cell family.
    Lemma1(Lemma1Args),
    /// Search for certified pairs whose orientation differs.
    Lemma2(Lemma2Args),
}

#[derive(Args)]
struct OutArg {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Either an explicit grid size or the parameters that determine one.
#[derive(Args)]
struct GridArgs {
    /// Grid size M (step 1/M).
    #[arg(long, conflicts_with = "eps")]
    m: Option<String>,
    /// Exponent slack: M = ceil(n^(d+1+eps)).
    #[arg(long)]
    eps: Option<String>,
}

impl GridArgs {
    fn resolve(&self, n: usize, d: usize) -> Result<GridSpec> {
        match (&self.m, &self.eps) {
            (Some(m), _) => Ok(GridSpec::new(parse_biguint(m)?)?),
            (None, Some(eps)) => Ok(grid_from_params(n as u64, d as u64, &parse_rational(eps)?)?),
            (None, None) => bail!("one of --m or --eps is required"),
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "ball")]
    domain: Domain,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coordinates are odd multiples of 2^-bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    bits: u32,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct RoundArgs {
    /// Point set in text format.
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ChirotopeArgs {
    /// Point set in text format.
    input: PathBuf,
    /// Emit 2-bit packed signs instead of text.
    #[arg(long)]
    packed: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct CompareArgs {
    /// Chirotope or point set file.
    first: PathBuf,
    /// Chirotope or point set file.
    second: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct TheoremArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "1/2")]
    eps: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ball")]
    domain: Domain,
    /// Write per-trial records as JSON lines to this file.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Write the summary as a one-row CSV table to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct PerEventArgs {
    #[arg(long)]
    d: usize,
    /// Only used with --eps to derive M.
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Lemma1Args {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Lemma2Args {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "1000")]
    m: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

/// Accepts `p/q`, integers and plain decimals such as `0.5`.
fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            bail!("malformed number {s:?}");
        }
        let digits: BigInt = format!("{int}{frac}")
            .parse()
            .with_context(|| format!("malformed number {s:?}"))?;
        return Ok(Rational::new(
            digits,
            BigInt::from(10u32).pow(frac.len() as u32),
        ));
    }
    s.parse()
        .map_err(|_| anyhow::anyhow!("malformed rational {s:?}"))
}

fn parse_biguint(s: &str) -> Result<BigUint> {
    s.trim()
        .parse()
        .with_context(|| format!("malformed grid size {s:?}"))
}

fn emit(out: &OutArg, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: serde::Serialize>(out: &OutArg, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn load_points(path: &Path) -> Result<PointConfig> {
    PointConfig::load(path).with_context(|| format!("reading point set {}", path.display()))
}

/// Loads a chirotope file, or computes the chirotope of a point set file.
fn load_chirotope(path: &Path) -> Result<Chirotope> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if header.starts_with("chirotope") {
        Ok(Chirotope::from_text(&text).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        let points =
            PointConfig::from_text(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(compute_chirotope(&points)?)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample(a) => {
            let cfg = SamplerConfig {
                domain: a.domain,
                d: a.d,
                n: a.n,
                precision_bits: a.bits,
                seed: a.seed,
            };
            emit(&a.out, sample_config(&cfg)?.to_text().as_bytes())?;
        }
        Command::Round(a) => {
            let points = load_points(&a.input)?;
            let grid = a.grid.resolve(points.len(), points.dim())?;
            emit(&a.out, round_config(&points, &grid).to_text().as_bytes())?;
        }
        Command::Chirotope(a) => {
            let chi = compute_chirotope(&load_points(&a.input)?)?;
            if a.packed {
                emit(&a.out, &chi.to_packed())?;
            } else {
                emit(&a.out, chi.to_text().as_bytes())?;
            }
        }
        Command::Compare(a) => {
            let diff = chirotope_diff(&load_chirotope(&a.first)?, &load_chirotope(&a.second)?)?;
            let mut bytes = Vec::new();
            write_jsonl(&diff, &mut bytes)?;
            emit(&a.out, &bytes)?;
        }
        Command::Encode(a) => {
            let points = load_points(&a.input)?;
            let grid = a.grid.resolve(points.len(), points.dim())?;
            emit(&a.out, &encode(&points, &grid)?.to_bytes())?;
        }
        Command::Decode(a) => {
            let bytes =
                fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            emit(&a.out, decode_bytes(&bytes)?.to_text().as_bytes())?;
        }
        Command::Bound(a) => {
            let grid = a.grid.resolve(a.n, a.d)?;
            let value = serde_json::json!({
                "n": a.n,
                "d": a.d,
                "success": success_lower_bound_for_grid(a.n, a.d, &grid)?,
                "per_event": per_event_bound(a.d, &grid)?,
            });
            emit_json(&a.out, &value)?;
        }
        Command::Experiment(ExperimentCommand::Theorem(a)) => {
            let params = ExperimentParams::new(
                a.n,
                a.d,
                parse_rational(&a.eps)?,
                a.trials,
                a.seed,
                a.domain,
            );
            let run = run_theorem_experiment(&params)?;
            if let Some(path) = &a.records {
                let file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                write_jsonl(&run.records, io::BufWriter::new(file))?;
            }
            if let Some(path) = &a.csv {
                let table = format!(
                    "{}\n{}\n",
                    ExperimentSummary::CSV_HEADER,
                    run.summary.csv_row()
                );
                fs::write(path, table).with_context(|| format!("writing {}", path.display()))?;
            }
            emit_json(&a.out, &run.summary)?;
        }
        Command::Experiment(ExperimentCommand::PerEvent(a)) => {
            let grid = a.grid.resolve(a.n, a.d)?;
            emit_json(&a.out, &estimate_per_event(a.d, &grid, a.trials, a.seed)?)?;
        }
        Command::Verify(VerifyCommand::Lemma1(a)) => {
            let report = lemma1_falsify(a.d, a.trials, a.seed)?;
            emit_json(&a.out, &report)?;
            if report.counterexamples > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify(VerifyCommand::Lemma2(a)) => {
            let grid = GridSpec::new(parse_biguint(&a.m)?)?;
            let report = lemma2_property_run(a.d, a.trials, &grid, a.seed)?;
            emit_json(&a.out, &report)?;
            if report.violations > 0 || report.margin_without_certificate > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse() {
        assert_eq!(
            parse_rational("1/2").unwrap(),
            Rational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_rational("0.25").unwrap(),
            Rational::new(1.into(), 4.into())
        );
        assert_eq!(
            parse_rational("3").unwrap(),
            Rational::from_integer(3.into())
        );
        assert_eq!(
            parse_rational("-1.5").unwrap(),
            Rational::new((-3).into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.2e3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
