//! `mei`: simulate benchmark series, estimate the multivariate extremal index
//! on CSV data, and run Monte Carlo studies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mei_core::estimators::{theta1, theta2, theta3, EstimatorReport, HomogeneousNorm};
use mei_core::experiments::{angle_grid, run_with_threads, RunConfig};
use mei_core::io::{fmt_real, read_series_csv, write_result_table, write_series_csv, Metadata};
use mei_core::series::{BlockScheme, Direction, MultivariateSeries};
use mei_core::simulators::{
    simulate_ar1, simulate_arch, simulate_iid_exp, Ar1Params, ArchParams, Seed, RNG_IDENTITY,
};
use mei_core::Error;

#[derive(Parser)]
#[command(
    name = "mei",
    version,
    about = "Multivariate extremal index estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one of the benchmark processes and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the extremal index function on a CSV series.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study described by a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessKind {
    Iid,
    Arch,
    Ar1,
}

#[derive(Args)]
struct SimulateArgs {
    process: ProcessKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// ARCH: shared eta of both components.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// ARCH or AR(1): number of discarded initial steps.
    #[arg(long)]
    burnin: Option<usize>,
    /// AR(1): common coefficient of both components.
    #[arg(long, conflicts_with_all = ["rho1", "rho2"])]
    rho: Option<f64>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    /// AR(1): logistic dependence parameter of the innovations.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("directions").required(true).args(["tau", "angles"])))]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ["1", "2", "3"])]
    est: String,
    /// Norm for estimator 1: `c,a` for c (sum |t_i|^a)^(1/a), or `const1`.
    #[arg(long = "L", value_parser = parse_norm)]
    norm: Option<HomogeneousNorm>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Number of blocks.
    #[arg(long)]
    kn: usize,
    /// Direction as comma-separated components; repeat for several.
    #[arg(long, value_parser = parse_tau)]
    tau: Vec<Direction>,
    /// Use the first K angles of the (cos, sin)(k pi / 22) grid.
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Overrides the config's `output`; standard output when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "MEI_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Data(String),
    EmptyCells(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::EmptyCells(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Data(m) | Self::EmptyCells(m) => m,
        }
    }
}

fn data_or_usage(e: Error) -> Failure {
    match e {
        Error::Parse { .. } | Error::NonFinite { .. } | Error::InvalidSeries(_) => {
            Failure::Data(e.to_string())
        }
        Error::CellEmpty(..) => Failure::EmptyCells(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn parse_norm(s: &str) -> Result<HomogeneousNorm, String> {
    if s == "const1" {
        return Ok(HomogeneousNorm::ConstantOneDiagnostic);
    }
    let (c, a) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `c,a` or `const1`, got `{s}`"))?;
    let c: f64 = c.trim().parse().map_err(|_| format!("bad c in `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad a in `{s}`"))?;
    HomogeneousNorm::power(c, a).map_err(|e| e.to_string())
}

fn parse_tau(s: &str) -> Result<Direction, String> {
    let coords = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad component `{t}` in `{s}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Direction::new(coords).map_err(|e| e.to_string())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reject_flags(context: &str, flags: &[(&str, bool)]) -> Result<(), Failure> {
    let given: Vec<&str> = flags.iter().filter(|f| f.1).map(|f| f.0).collect();
    if given.is_empty() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "{} not applicable to {context}",
            given.join(", ")
        )))
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let seed = Seed(args.seed);
    let rho_given = args.rho.is_some() || args.rho1.is_some() || args.rho2.is_some();
    let arch_given = args.eta.is_some() || args.lambda1.is_some() || args.lambda2.is_some();
    let mut extra = Vec::new();
    let series = match args.process {
        ProcessKind::Iid => {
            reject_flags(
                "iid",
                &[
                    ("--eta/--lambda1/--lambda2", arch_given),
                    ("--rho/--rho1/--rho2", rho_given),
                    ("--alpha", args.alpha.is_some()),
                    ("--burnin", args.burnin.is_some()),
                ],
            )?;
            extra.push(("process".to_string(), "iid".to_string()));
            simulate_iid_exp(args.n, seed)
        }
        ProcessKind::Arch => {
            reject_flags(
                "arch",
                &[
                    ("--rho/--rho1/--rho2", rho_given),
                    ("--alpha", args.alpha.is_some()),
                ],
            )?;
            let base = ArchParams::benchmark();
            let eta = args.eta.unwrap_or(base.eta1);
            let params = ArchParams {
                eta1: eta,
                eta2: eta,
                lambda1: args.lambda1.unwrap_or(base.lambda1),
                lambda2: args.lambda2.unwrap_or(base.lambda2),
                burnin: args.burnin.unwrap_or(base.burnin),
            };
            params.validate().map_err(data_or_usage)?;
            extra.push(("process".into(), "arch".into()));
            extra.push(("params".into(), format!("{params:?}")));
            simulate_arch(args.n, &params, seed)
        }
        ProcessKind::Ar1 => {
            reject_flags("ar1", &[("--eta/--lambda1/--lambda2", arch_given)])?;
            let base = Ar1Params::benchmark();
            let params = Ar1Params {
                rho1: args.rho.or(args.rho1).unwrap_or(base.rho1),
                rho2: args.rho.or(args.rho2).unwrap_or(base.rho2),
                alpha: args.alpha.unwrap_or(base.alpha),
                burnin: args.burnin,
            };
            params.validate().map_err(data_or_usage)?;
            extra.push(("process".into(), "ar1".into()));
            extra.push(("params".into(), format!("{params:?}")));
            extra.push(("burnin".into(), params.effective_burnin().to_string()));
            simulate_ar1(args.n, &params, seed)
        }
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;

    eprintln!("rng: {RNG_IDENTITY}");
    eprintln!("seed: {}", args.seed);
    let meta = Metadata {
        seed: Some(args.seed),
        rng: Some(RNG_IDENTITY.into()),
        config_hash: None,
        extra,
    };
    let names = vec!["x1".to_string(), "x2".to_string()];
    write_output(
        args.out.as_deref(),
        &write_series_csv(&series, &names, &meta),
    )
}

enum Estimator {
    First(HomogeneousNorm),
    Second(f64),
    Averaged {
        sigma: f64,
        phi: f64,
        quad_points: usize,
    },
}

impl Estimator {
    fn from_args(args: &EstimateArgs) -> Result<Self, Failure> {
        let averaging = [
            ("--sigma", args.sigma.is_some()),
            ("--phi", args.phi.is_some()),
            ("--quad-points", args.quad_points.is_some()),
        ];
        match args.est.as_str() {
            "1" => {
                reject_flags("--est 1", &[("--kappa", args.kappa.is_some())])?;
                reject_flags("--est 1", &averaging)?;
                Ok(Self::First(args.norm.unwrap_or_default()))
            }
            "2" => {
                reject_flags("--est 2", &[("--L", args.norm.is_some())])?;
                reject_flags("--est 2", &averaging)?;
                Ok(Self::Second(args.kappa.unwrap_or(1.0)))
            }
            _ => {
                reject_flags(
                    "--est 3",
                    &[
                        ("--L", args.norm.is_some()),
                        ("--kappa", args.kappa.is_some()),
                    ],
                )?;
                let (Some(sigma), Some(phi)) = (args.sigma, args.phi) else {
                    return Err(Failure::Usage("--est 3 needs --sigma and --phi".into()));
                };
                Ok(Self::Averaged {
                    sigma,
                    phi,
                    quad_points: args.quad_points.unwrap_or(64),
                })
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::First(HomogeneousNorm::PowerNorm { c, a }) => format!("theta1 L={c},{a}"),
            Self::First(HomogeneousNorm::ConstantOneDiagnostic) => "theta1 L=const1".into(),
            Self::Second(kappa) => format!("theta2 kappa={kappa}"),
            Self::Averaged {
                sigma,
                phi,
                quad_points,
            } => format!("theta3 sigma={sigma} phi={phi} quad_points={quad_points}"),
        }
    }

    /// `theta_hat` and, where defined, the block statistics.
    fn run(
        &self,
        series: &MultivariateSeries,
        tau: &Direction,
        scheme: BlockScheme,
    ) -> mei_core::Result<(f64, Option<EstimatorReport>)> {
        match *self {
            Self::First(norm) => theta1(series, tau, scheme, norm).map(|r| (r.theta_hat, Some(r))),
            Self::Second(kappa) => {
                theta2(series, tau, kappa, scheme).map(|r| (r.theta_hat, Some(r)))
            }
            Self::Averaged {
                sigma,
                phi,
                quad_points,
            } => theta3(series, tau, sigma, phi, scheme, quad_points).map(|t| (t, None)),
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let estimator = Estimator::from_args(&args)?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", args.input.display())))?;
    let (_, series) = read_series_csv(&text).map_err(|e| Failure::Data(e.to_string()))?;
    let n = series.len();
    if args.kn == 0 || args.kn >= n {
        return Err(Failure::Usage(format!(
            "--kn must satisfy 1 <= k_n < n = {n}, got {}",
            args.kn
        )));
    }
    let scheme = BlockScheme::with_block_count(n, args.kn).map_err(data_or_usage)?;
    let dropped = n - scheme.n_used();
    if dropped > 0 {
        eprintln!(
            "note: using the first {} of {n} observations, {dropped} dropped",
            scheme.n_used()
        );
    }

    let directions: Vec<Direction> = match args.angles {
        Some(k) => {
            if series.dim() != 2 {
                return Err(Failure::Usage(format!(
                    "--angles needs a bivariate series, input has {} columns",
                    series.dim()
                )));
            }
            if k == 0 {
                return Err(Failure::Usage("--angles must be at least 1".into()));
            }
            angle_grid(k).into_iter().map(|(_, tau)| tau).collect()
        }
        None => args.tau.clone(),
    };

    let d = series.dim();
    let mut out = Metadata {
        seed: None,
        rng: None,
        config_hash: None,
        extra: vec![
            ("input".into(), args.input.display().to_string()),
            ("estimator".into(), estimator.describe()),
            ("dropped".into(), dropped.to_string()),
        ],
    }
    .render();
    let tau_cols: Vec<String> = (1..=d).map(|i| format!("tau_{i}")).collect();
    out.push_str(&format!(
        "index,{},theta_hat,H_hat,neg_log_Htilde_hat,k_n,r_n,error\n",
        tau_cols.join(",")
    ));
    for (idx, tau) in directions.iter().enumerate() {
        let mut coords: Vec<String> = tau.as_slice().iter().map(|&t| fmt_real(t)).collect();
        coords.resize(d, String::new());
        let (theta, h, nlh, error) = match estimator.run(&series, tau, scheme) {
            Ok((t, report)) => (
                fmt_real(t),
                report
                    .as_ref()
                    .map(|r| fmt_real(r.h_hat))
                    .unwrap_or_default(),
                report
                    .as_ref()
                    .map(|r| fmt_real(r.neg_log_htilde_hat))
                    .unwrap_or_default(),
                String::new(),
            ),
            Err(e) => (
                String::new(),
                String::new(),
                String::new(),
                csv_field(&e.to_string()),
            ),
        };
        out.push_str(&format!(
            "{},{},{theta},{h},{nlh},{},{},{error}\n",
            idx + 1,
            coords.join(","),
            scheme.k_n(),
            scheme.r_n()
        ));
    }
    write_output(args.out.as_deref(), &out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let run = RunConfig::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    if args.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let config = &run.experiment;
    eprintln!("rng: {RNG_IDENTITY}");
    eprintln!("base seed: {}", config.base_seed.0);
    let study = run_with_threads(config, args.threads).map_err(data_or_usage)?;
    let meta = Metadata {
        seed: Some(config.base_seed.0),
        rng: Some(RNG_IDENTITY.into()),
        config_hash: Some(config.hash()),
        extra: vec![
            ("experiment".into(), config.name.clone()),
            ("replications".into(), config.replications.to_string()),
        ],
    };
    let out = args.out.or(run.output.map(PathBuf::from));
    write_output(out.as_deref(), &write_result_table(&study.rows, &meta))?;
    study
        .ensure_complete()
        .map_err(|e| Failure::EmptyCells(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
