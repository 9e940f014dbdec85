use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use octant_vp::geometry::{FaceSet, ProblemData, ProblemJson, RsParams, Vec3};

mod commands;
mod sweep;

type CliResult<T> = Result<T, Box<dyn Error>>;

/// Exit statuses other than plain failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
    ValidationFailed,
}

#[derive(Parser)]
#[command(name = "octant-vp", version, about = "Optimal large-deviation paths for reflected Brownian motion in the octant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stability and optimal path classification.
    Classify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate one path cost.
    Cost(CostArgs),
    /// Classify every cell of an (r1, r2) grid into a CSV file.
    Sweep(SweepArgs),
    /// Recompute the reference example and compare with its expected values.
    Reproduce {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run the seeded property suite.
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Also sample outside one check's hypotheses; its violations are expected.
        #[arg(long)]
        adversarial: bool,
        #[arg(long)]
        json: bool,
        /// Write the JSON report here as well.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Problem data as JSON, either RS parameters or theta, Gamma and R.
    #[arg(long, conflicts_with_all = ["theta0", "r1", "r2", "sigma2", "rho"])]
    input: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn given(&self) -> bool {
        self.input.is_some() || self.theta0.is_some() || self.r1.is_some() || self.r2.is_some() || self.sigma2.is_some() || self.rho.is_some()
    }

    pub fn load(&self) -> CliResult<ProblemJson> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            return Ok(serde_json::from_str(&text).map_err(|e| format!("malformed problem JSON in {}: {e}", path.display()))?);
        }
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("--{name} is required without --input"));
        Ok(ProblemJson::Rs(RsParams {
            theta0: need(self.theta0, "theta0")?,
            r1: need(self.r1, "r1")?,
            r2: need(self.r2, "r2")?,
            sigma2: self.sigma2.unwrap_or(1.0),
            rho: self.rho.unwrap_or(0.0),
        }))
    }

    pub fn rs(&self) -> CliResult<RsParams> {
        Ok(self.load()?.rs()?)
    }

    pub fn data(&self) -> CliResult<ProblemData> {
        Ok(self.load()?.data()?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Straight segment through the interior.
    Direct,
    /// Closed-form reflected cost with pushing on every face of the set.
    Reflected,
    /// Best one-piece path on the face set.
    OnePiece,
    /// Face set, then a straight segment.
    ViaFace,
    /// Axis, then a face.
    ViaAxis,
    /// Axis, face, then a straight segment.
    Gradual,
    /// Least cost over every family the solver searches.
    Best,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    family: Family,
    /// Face labels from 1..=3, comma separated.
    #[arg(long, value_parser = parse_faces, default_value = "")]
    faces: FaceSet,
    /// Face label the path continues on after the axis.
    #[arg(long)]
    axis_face: Option<usize>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0,0")]
    from: Vec3,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    to: Vec3,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn value(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// `min,max,steps`
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    r1_range: GridRange,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    r2_range: GridRange,
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    theta0: f64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_faces(s: &str) -> Result<FaceSet, String> {
    let labels = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<usize>().map_err(|e| format!("bad face label {x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    FaceSet::of(&labels).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad coordinate {x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v.as_slice() {
        [a, b, c] => Ok(Vec3::new(*a, *b, *c)),
        _ => Err(format!("expected three comma-separated coordinates, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<GridRange, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [min, max, steps] = parts.as_slice() else {
        return Err(format!("expected min,max,steps, got {s:?}"));
    };
    let min: f64 = min.parse().map_err(|e| format!("bad min: {e}"))?;
    let max: f64 = max.parse().map_err(|e| format!("bad max: {e}"))?;
    let steps: usize = steps.parse().map_err(|e| format!("bad steps: {e}"))?;
    if !min.is_finite() || !max.is_finite() {
        return Err("range bounds must be finite".into());
    }
    if steps < 2 {
        return Err("steps must be at least 2".into());
    }
    Ok(GridRange { min, max, steps })
}

/// Six significant digits, trailing zeros dropped.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let trim = |s: String| if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if !(-4..6).contains(&mag) {
        let s = format!("{x:.5e}");
        let (m, e) = s.split_once('e').unwrap();
        return format!("{}e{e}", trim(m.to_string()));
    }
    trim(format!("{:.*}", (5 - mag).max(0) as usize, x))
}

fn run(cli: Cli) -> CliResult<Status> {
    match cli.command {
        Command::Classify { problem, json } => commands::classify(&problem, json),
        Command::Cost(args) => commands::cost(&args),
        Command::Sweep(args) => sweep::run(&args),
        Command::Reproduce { problem, json } => commands::reproduce(&problem, json),
        Command::Validate { seed, samples, adversarial, json, output } => {
            commands::validate(seed, samples as usize, adversarial, json, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other input errors; clap's own 2
    // would read as an inconclusive verdict.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Ok(Status::ValidationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
