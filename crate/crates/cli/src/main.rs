use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uniton::cxlinalg::DEFAULT_RANK_TOL;
use uniton::ratfun::C64;
use uniton::reports::{build_report, lemma_report, to_json, verify_report, RunConfig, Suite};
use uniton::spectral_flow::{flow_family, limit_array, write_flow_csv};
use uniton::uniton_array::{from_f0, ArrayFile, ConstantLeftFactor, UnitonArray};
use uniton::verifier::DEFAULT_STEP;

const DEFAULT_SUITES: [Suite; 3] = [Suite::Harmonic, Suite::Extended, Suite::LambdaPlus];

#[derive(Parser)]
#[command(
    name = "uniton",
    version,
    about = "Harmonic maps of finite uniton number from meromorphic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for sample points, random families and negative controls.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rank tolerance for orthonormalization.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// Number of generic sample points.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    /// Flow parameters in (0, 1], comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
    t_grid: Vec<f64>,
    /// Output directory; reports go to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, corrupt: bool) -> RunConfig {
        RunConfig {
            seed: self.seed,
            tol: self.tol,
            samples: self.samples,
            t_grid: self.t_grid.clone(),
            corrupt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Chains, projectors, the map and its extended solution at sample points.
    Build {
        file: PathBuf,
        /// Evaluation point `re,im`; repeatable. Generic points are drawn when absent.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Vec<C64>,
        #[command(flatten)]
        common: Common,
    },
    /// The deformed family as a CSV table, plus the limit array.
    Flow {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Runs verification suites; exits 1 if any check fails.
    Verify {
        file: PathBuf,
        /// Suites to run, comma separated: harmonic, extended, lambda_plus, grassmann, s1.
        /// Defaults to the three that hold for every array.
        #[arg(long, value_delimiter = ',', value_parser = parse_suite)]
        suite: Vec<Suite>,
        /// Replace each check's data by a deliberately wrong counterpart.
        #[arg(long)]
        corrupt: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the identity suite over the t grid; exits 1 if any identity fails.
    Lemmas {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Converts an F0-array file into an array file with its left factor.
    ConvertF0 {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [re] if re.is_finite() => Ok(C64::new(re, 0.0)),
        [re, im] if re.is_finite() && im.is_finite() => Ok(C64::new(re, im)),
        _ => Err(format!("expected `re,im`, got `{s}`")),
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).map_err(|e| e.to_string())
}

/// Exit 2: unreadable input, invalid data or numerical failure.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<bool, InputError>;

fn read_file(path: &Path) -> Result<ArrayFile, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    ArrayFile::from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// The array and its left factor, after validation.
fn load(path: &Path) -> Result<(UnitonArray, ConstantLeftFactor), InputError> {
    let file = read_file(path)?;
    let arr = file.to_array()?;
    let violations = arr.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(InputError(format!(
            "{}: invalid array\n{}",
            path.display(),
            list.join("\n")
        )));
    }
    Ok((arr, file.left_factor()?))
}

fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<(), InputError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Build { file, z, common } => {
            let (arr, q) = load(&file)?;
            let zs = if z.is_empty() {
                common.config(false).points(&arr)?
            } else {
                z
            };
            let report = build_report(&arr, &q, &zs, common.tol)?;
            emit(common.out.as_deref(), "build.json", &to_json(&report))?;
            Ok(true)
        }
        Command::Flow { file, common } => {
            let (arr, q) = load(&file)?;
            let cfg = common.config(false);
            let zs = cfg.points(&arr)?;
            let rows = flow_family(&arr, &q, &cfg.flow_params()?, &zs, cfg.tol, DEFAULT_STEP)?;
            let mut csv = Vec::new();
            write_flow_csv(&rows, arr.n(), &mut csv)?;
            let limit = ArrayFile::from_array(&limit_array(&arr)?, Some(&q), None);
            let dir = common.out.unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("flow.csv"), csv)?;
            fs::write(dir.join("limit.json"), limit.to_json() + "\n")?;
            Ok(true)
        }
        Command::Verify {
            file,
            suite,
            corrupt,
            common,
        } => {
            let (arr, q) = load(&file)?;
            let suites = if suite.is_empty() {
                DEFAULT_SUITES.to_vec()
            } else {
                suite
            };
            let report = verify_report(&arr, &q, &suites, &common.config(corrupt))?;
            emit(common.out.as_deref(), "verify.json", &to_json(&report))?;
            Ok(report.pass)
        }
        Command::Lemmas { file, common } => {
            let (arr, _) = load(&file)?;
            let report = lemma_report(&arr, &common.config(false))?;
            emit(common.out.as_deref(), "lemmas.json", &to_json(&report))?;
            Ok(report.pass)
        }
        Command::ConvertF0 { file, out } => {
            let karr = read_file(&file)?.to_f0_array()?;
            let (q, arr) = from_f0(&karr)?;
            let converted = ArrayFile::from_array(&arr, Some(&q), Some(karr.f0()));
            emit(out.as_deref(), "array.json", &converted.to_json())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
