//! `saxl`: verify, survey and tabulate Saxl-graph properties of PSL(2,q)
//! socle groups.
//!
//! Exit codes: 0 when everything matches, 2 on a prediction mismatch or a
//! violated check, 1 on usage or build errors.

#![allow(clippy::manual_is_multiple_of)]

mod cache;
mod feng;
mod report;
mod survey;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use psl_saxl::make_field;
use psl_saxl::projgroup::{Family, LevelTag};

use cache::{analyze_cached, Cache};
use report::{Job, VerificationReport};

#[derive(Parser)]
#[command(name = "saxl", version, about = "Saxl graph verification for groups with socle PSL(2,q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one action and print a JSON report.
    Verify(VerifyArgs),
    /// Sweep a grid of q, families and levels; print CSV.
    Survey(SurveyArgs),
    /// Tabulate the square/nonsquare count for every t in GF(q) \ {0,1}.
    Feng(FengArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Field order (a prime power). Alternative to --p/--n.
    #[arg(long, conflicts_with_all = ["p", "n"])]
    q: Option<u64>,
    #[arg(long, requires = "n")]
    p: Option<u32>,
    #[arg(long, requires = "p")]
    n: Option<u32>,
}

impl FieldArgs {
    fn resolve(&self) -> Result<(u32, u32)> {
        match (self.q, self.p, self.n) {
            (Some(q), _, _) => {
                survey::prime_powers(q, q).pop().ok_or_else(|| anyhow!("q = {q} is not a prime power"))
            }
            (None, Some(p), Some(n)) => {
                if !psl_saxl::gf::is_prime(p as u64) || n == 0 {
                    bail!("p = {p} must be prime and n positive");
                }
                Ok((p, n))
            }
            _ => bail!("give --q, or both --p and --n"),
        }
    }
}

#[derive(Args)]
struct CacheArgs {
    /// Report cache directory; falls back to $SAXL_CACHE.
    #[arg(long, env = "SAXL_CACHE")]
    cache_dir: Option<PathBuf>,
}

impl CacheArgs {
    fn cache(&self) -> Option<Cache> {
        self.cache_dir.as_ref().filter(|d| !d.as_os_str().is_empty()).map(Cache::new)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// d-plus, d-minus, borel, subfield:m, pgl-subfield:m, a4, s4, a5
    #[arg(long)]
    family: String,
    /// T, PGL, PSigmaL, PGammaL, T:f^i or T:df^i
    #[arg(long, default_value = "T")]
    level: String,
    /// Conjugacy class index for families with more than one class.
    #[arg(long, default_value_t = 0)]
    class: usize,
    /// Write the Saxl graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Run slow cross-checks as well (all-vertex BFS, exhaustive bounds).
    #[arg(long)]
    oracle: bool,
    /// Leave wall time out of the report so output is byte-stable.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args)]
struct SurveyArgs {
    #[arg(long, default_value_t = 5)]
    q_min: u64,
    #[arg(long)]
    q_max: u64,
    /// Comma-separated family names.
    #[arg(long)]
    families: String,
    /// Comma-separated levels; all distinct levels when omitted.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args)]
struct FengArgs {
    #[command(flatten)]
    field: FieldArgs,
}

enum Failure {
    Usage(anyhow::Error),
    Mismatch,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn parse_family(s: &str) -> Result<Family> {
    Family::parse(s.trim()).ok_or_else(|| anyhow!("unknown family {s:?}"))
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let (p, n) = args.field.resolve()?;
    let job = Job {
        p,
        n,
        family: parse_family(&args.family)?,
        level: LevelTag::parse(&args.level).map_err(anyhow::Error::from)?,
        class: args.class,
        oracle: args.oracle,
    };
    let start = Instant::now();
    let (analysis, dot) = analyze_cached(&job, args.cache.cache().as_ref(), args.dot.is_some())?;
    let elapsed = (!args.no_timing).then(|| start.elapsed().as_millis() as u64);
    let report = VerificationReport::new(&job, analysis, elapsed);
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n";
    io::stdout().write_all(json.as_bytes())?;
    if let Some(path) = &args.json {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.dot {
        match dot {
            Some(d) => fs::write(path, d).with_context(|| format!("writing {}", path.display()))?,
            None => eprintln!("warning: base size is not 2, no Saxl graph to write"),
        }
    }
    if report.is_match() {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn survey(args: SurveyArgs) -> Result<(), Failure> {
    let families: Vec<Family> = args
        .families
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_family)
        .collect::<Result<_>>()?;
    if families.is_empty() {
        return Err(anyhow!("--families must name at least one family").into());
    }
    let levels: Option<Vec<LevelTag>> = args
        .levels
        .as_deref()
        .map(|s| s.split(',').filter(|t| !t.trim().is_empty()).map(LevelTag::parse).collect::<Result<_, _>>())
        .transpose()
        .map_err(anyhow::Error::from)?;
    if args.q_min > args.q_max {
        return Err(anyhow!("--q-min exceeds --q-max").into());
    }
    let mut cells = Vec::new();
    for (p, n) in survey::prime_powers(args.q_min, args.q_max) {
        let tags = match &levels {
            Some(l) => l.clone(),
            None => survey::default_levels(p, n)?,
        };
        for family in &families {
            for level in &tags {
                cells.push(survey::Cell { p, n, family: family.clone(), level: level.clone() });
            }
        }
    }
    let rows = survey::run(&cells, args.jobs, args.cache.cache().as_ref());
    match &args.out {
        Some(path) => survey::write(&rows, fs::File::create(path)?)?,
        None => survey::write(&rows, io::stdout().lock())?,
    }
    if rows.iter().any(|r| r.status == survey::Status::Mismatch) {
        Err(Failure::Mismatch)
    } else {
        Ok(())
    }
}

fn feng(args: FengArgs) -> Result<(), Failure> {
    let (p, n) = args.field.resolve()?;
    let f = make_field(p, n, None).map_err(anyhow::Error::from)?;
    let rows = feng::rows(&f)?;
    if feng::write(&rows, io::stdout().lock())? {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Survey(a) => survey(a),
        Command::Feng(a) => feng(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(2),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
