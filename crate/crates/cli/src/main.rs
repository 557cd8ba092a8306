use std::fmt::Display;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparsesep::csvio::{load_csv, save_csv, write_table, CsvError};
use sparsesep::datagen::{add_noise, DataError, Scenario, NOISE_RNG_ID};
use sparsesep::deflate::DeflateError;
use sparsesep::detect::Global1Threshold;
use sparsesep::evalkit::{monte_carlo, unit_normalize, write_rms_csv, Method, RmsReport};
use sparsesep::fastica::{fastica_separate, FastIcaConfig, Nonlinearity};
use sparsesep::model::{SeparationResult, SignalRole};
use sparsesep::{separate, DetectorConfig, SeparateConfig};

const DEFAULTS_TABLE: &str = "\
Default velocity thresholds (vth) per profile:

  profile          global1  global2  mhc
  sparse-pure      0.1      0.9      0.8
  sparse-partial   0.4      0.7      0.7
  non-sparse       0.5      0.8      0.7

Global 1 uses alpha = 1 unless --alpha or --epsilon is given.
FastICA defaults: gauss nonlinearity, max-iter 200, tol 1e-6.

Exit codes: 0 success, 2 usage or configuration error, 3 algorithm
failure, 4 I/O error.";

#[derive(Parser)]
#[command(name = "sparsesep", version, about = "Blind separation of sparse mixtures by phase-space headings", after_help = DEFAULTS_TABLE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a preset scenario's sources, mixtures and mixing matrix.
    Generate(GenerateArgs),
    /// Separate the mixtures in a CSV file.
    Separate(SeparateArgs),
    /// Monte Carlo RMS error curves for several methods.
    Montecarlo(MonteCarloArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "SPARSESEP_OUT", default_value = ".")]
    out: PathBuf,
    /// Also write a gnuplot script for the CSV output.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Preset name: sparse-pure or sparse-partial.
    #[arg(long)]
    scenario: String,
    /// Seed of the noise added to the mixtures.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise standard deviation; defaults to the scenario's.
    #[arg(long)]
    sd: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodName {
    Mhc,
    Global1,
    Global2,
    Fastica,
}

impl MethodName {
    fn as_str(self) -> &'static str {
        match self {
            MethodName::Mhc => "mhc",
            MethodName::Global1 => "global1",
            MethodName::Global2 => "global2",
            MethodName::Fastica => "fastica",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    SparsePure,
    SparsePartial,
    NonSparse,
}

impl Profile {
    fn as_str(self) -> &'static str {
        match self {
            Profile::SparsePure => "sparse-pure",
            Profile::SparsePartial => "sparse-partial",
            Profile::NonSparse => "non-sparse",
        }
    }

    fn for_scenario(name: &str) -> Self {
        match name {
            "sparse-partial" => Profile::SparsePartial,
            "sparse-pure" => Profile::SparsePure,
            _ => Profile::NonSparse,
        }
    }

    fn vth(self, method: MethodName) -> f64 {
        use MethodName::*;
        match (self, method) {
            (Profile::SparsePure, Global1) => 0.1,
            (Profile::SparsePure, Global2) => 0.9,
            (Profile::SparsePure, _) => 0.8,
            (Profile::SparsePartial, Global1) => 0.4,
            (Profile::SparsePartial, _) => 0.7,
            (Profile::NonSparse, Global1) => 0.5,
            (Profile::NonSparse, Global2) => 0.8,
            (Profile::NonSparse, _) => 0.7,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NonlinearityArg {
    Gauss,
    Tanh,
    Pow3,
}

impl From<NonlinearityArg> for Nonlinearity {
    fn from(n: NonlinearityArg) -> Self {
        match n {
            NonlinearityArg::Gauss => Nonlinearity::Gauss,
            NonlinearityArg::Tanh => Nonlinearity::Tanh,
            NonlinearityArg::Pow3 => Nonlinearity::Pow3,
        }
    }
}

#[derive(Args)]
struct TuningArgs {
    /// Profile selecting default thresholds.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// Global 1 cluster threshold numerator; epsilon = alpha / samples.
    #[arg(long, conflicts_with = "epsilon")]
    alpha: Option<f64>,
    /// Global 1 fixed cluster threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "gauss")]
    nonlinearity: NonlinearityArg,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct SeparateArgs {
    /// Mixture CSV: a header line, then one sample per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodName,
    /// Velocity threshold; defaults from the profile table.
    #[arg(long)]
    vth: Option<f64>,
    /// FastICA initial-weight seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mhc,global1,global2,fastica")]
    methods: Vec<MethodName>,
    /// Number of runs.
    #[arg(long = "Q", visible_alias = "q", default_value_t = 200)]
    q: usize,
    /// Noise standard deviation; defaults to the scenario's.
    #[arg(long)]
    sd: Option<f64>,
    /// Master seed; run q draws from stream q.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    vth_mhc: Option<f64>,
    #[arg(long)]
    vth_global1: Option<f64>,
    #[arg(long)]
    vth_global2: Option<f64>,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    out: OutArgs,
}

enum CliError {
    Usage(String),
    Algorithm(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Algorithm(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Algorithm(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Separate(args) => cmd_separate(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn show(key: &str, value: impl Display) {
    println!("{key:<14} = {value}");
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))
}

fn scenario(name: &str, sd: Option<f64>) -> Result<Scenario, CliError> {
    let scenario = Scenario::by_name(name).map_err(|_| {
        CliError::Usage(format!(
            "unknown scenario `{name}`; expected one of {}",
            Scenario::PRESETS.join(", ")
        ))
    })?;
    match sd {
        Some(sd) => Ok(scenario.with_noise_sd(sd)?),
        None => Ok(scenario),
    }
}

fn check_vth(vth: f64) -> Result<f64, CliError> {
    if (0.0..1.0).contains(&vth) {
        Ok(vth)
    } else {
        Err(CliError::Usage(format!("--vth must lie in [0, 1), got {vth}")))
    }
}

fn global1_threshold(tuning: &TuningArgs) -> Global1Threshold {
    match (tuning.epsilon, tuning.alpha) {
        (Some(eps), _) => Global1Threshold::Epsilon(eps),
        (None, Some(alpha)) => Global1Threshold::Alpha(alpha),
        (None, None) => Global1Threshold::default(),
    }
}

fn describe_threshold(t: Global1Threshold) -> String {
    match t {
        Global1Threshold::Alpha(a) => format!("alpha {a}"),
        Global1Threshold::Epsilon(e) => format!("epsilon {e}"),
    }
}

fn detector_config(method: MethodName, tuning: &TuningArgs) -> DetectorConfig {
    match method {
        MethodName::Mhc => DetectorConfig::Mhc,
        MethodName::Global1 => DetectorConfig::Global1(global1_threshold(tuning)),
        _ => DetectorConfig::Global2,
    }
}

fn show_fastica(tuning: &TuningArgs) {
    show("nonlinearity", Nonlinearity::from(tuning.nonlinearity).name());
    show("max_iter", tuning.max_iter);
    show("tol", tuning.tol);
}

fn write_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> Result<(), CsvError>) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    f(BufWriter::new(file))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let scenario = scenario(&args.scenario, args.sd)?;
    show("command", "generate");
    show("scenario", &scenario.name);
    show("samples", scenario.sources.samples());
    show("sources", scenario.sources.channels());
    show("mixing", format!("{:?}", scenario.mixing.entries().outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>()));
    show("sd", scenario.noise_sd);
    show("seed", args.seed);
    show("noise_rng", NOISE_RNG_ID);
    show("out", args.out.out.display());

    let mixtures = add_noise(&scenario.clean_mixtures()?, scenario.noise_sd, args.seed)?;
    let out = &args.out.out;
    prepare_out(out)?;
    let sources_path = out.join("sources.csv");
    save_csv(&scenario.sources, &sources_path)?;
    println!("wrote {}", sources_path.display());
    let mixtures_path = out.join("mixtures.csv");
    save_csv(&mixtures, &mixtures_path)?;
    println!("wrote {}", mixtures_path.display());
    let n = scenario.mixing.dim();
    write_file(&out.join("mixing.csv"), |w| {
        let header: Vec<String> = (0..n).map(|j| format!("col{j}")).collect();
        let rows = scenario
            .mixing
            .entries()
            .outer_iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect());
        write_table(w, &header, rows)
    })?;
    if args.out.gnuplot {
        let channels = scenario.sources.channels();
        let script = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset multiplot layout 2,1\n\
             plot for [i=1:{channels}] 'sources.csv' using 0:i with lines\n\
             plot for [i=1:{channels}] 'mixtures.csv' using 0:i with lines\nunset multiplot\n"
        );
        write_script(out, "generate.gp", &script)?;
    }
    Ok(())
}

fn write_script(out: &Path, name: &str, script: &str) -> Result<(), CliError> {
    let path = out.join(name);
    std::fs::write(&path, script)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_separate(args: SeparateArgs) -> Result<(), CliError> {
    let profile = args.tuning.profile.unwrap_or(Profile::SparsePure);
    let vth = check_vth(args.vth.unwrap_or_else(|| profile.vth(args.method)))?;
    show("command", "separate");
    show("input", args.input.display());
    show("method", args.method.as_str());
    show("profile", profile.as_str());
    if args.method == MethodName::Fastica {
        show("seed", args.seed);
        show_fastica(&args.tuning);
    } else {
        show("vth", vth);
        if args.method == MethodName::Global1 {
            show("global1", describe_threshold(global1_threshold(&args.tuning)));
        }
    }
    show("out", args.out.out.display());

    let mixtures = load_csv(&args.input, SignalRole::Mixtures)
        .map_err(|e| CliError::Io(format!("cannot load {}: {e}", args.input.display())))?;
    show("channels", mixtures.channels());
    show("samples", mixtures.samples());

    let (result, failure) = if args.method == MethodName::Fastica {
        let cfg = FastIcaConfig {
            nonlinearity: args.tuning.nonlinearity.into(),
            seed: args.seed,
            max_iter: args.tuning.max_iter,
            tol: args.tuning.tol,
        };
        match fastica_separate(&mixtures, &cfg) {
            Ok(r) => (Some(r), None),
            Err(e) => (
                None,
                Some(CliError::Algorithm(format!("{e}; retry with another --seed"))),
            ),
        }
    } else {
        let cfg = SeparateConfig {
            vth,
            detector: detector_config(args.method, &args.tuning),
        };
        match separate(&mixtures, &cfg) {
            Ok(r) => (Some(r), None),
            Err(DeflateError::HaltedEarly {
                iteration,
                cause,
                partial,
            }) => {
                let msg = format!("halted at iteration {iteration}: {cause}");
                (Some(*partial), Some(CliError::Algorithm(msg)))
            }
            Err(e) => (None, Some(CliError::Algorithm(e.to_string()))),
        }
    };

    if let Some(result) = &result {
        prepare_out(&args.out.out)?;
        write_separation(&args.out.out, result, mixtures.channels())?;
        if args.out.gnuplot {
            let script = format!(
                "set datafile separator ','\nset key autotitle columnhead\n\
                 plot for [i=1:{}] 'estimates.csv' using 0:i with lines\n",
                mixtures.channels()
            );
            write_script(&args.out.out, "separate.gp", &script)?;
        }
        println!("extracted {} of {} sources", result.extracted, mixtures.channels());
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_separation(out: &Path, result: &SeparationResult, channels: usize) -> Result<(), CliError> {
    let est_path = out.join("estimates.csv");
    save_csv(&result.estimates, &est_path)?;
    println!("wrote {}", est_path.display());

    write_file(&out.join("headings.csv"), |w| {
        let mut header: Vec<String> = ["iteration", "detector", "support", "weight"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..channels).map(|i| format!("r{i}")));
        let rows = result.headings.iter().enumerate().map(|(k, h)| {
            let support: Vec<String> = h.support.iter().map(|i| i.to_string()).collect();
            let mut row = vec![
                k.to_string(),
                h.detector.name().to_string(),
                support.join(" "),
                h.weight.to_string(),
            ];
            row.extend(h.direction().iter().map(|v| v.to_string()));
            row
        });
        write_table(w, &header, rows)
    })?;

    write_file(&out.join("residuals.csv"), |w| {
        let header = vec!["iteration".to_string(), "residual_norm".to_string()];
        let rows = result
            .residual_energy
            .iter()
            .enumerate()
            .map(|(k, r)| vec![k.to_string(), r.to_string()]);
        write_table(w, &header, rows)
    })
}

fn cmd_montecarlo(args: MonteCarloArgs) -> Result<(), CliError> {
    let scenario = scenario(&args.scenario, args.sd)?;
    if args.q == 0 {
        return Err(CliError::Usage("--Q must be at least 1".into()));
    }
    if args.methods.is_empty() {
        return Err(CliError::Usage("--methods must name at least one method".into()));
    }
    let profile = args
        .tuning
        .profile
        .unwrap_or_else(|| Profile::for_scenario(&scenario.name));
    let overrides = |m: MethodName| match m {
        MethodName::Mhc => args.vth_mhc,
        MethodName::Global1 => args.vth_global1,
        MethodName::Global2 => args.vth_global2,
        MethodName::Fastica => None,
    };

    show("command", "montecarlo");
    show("scenario", &scenario.name);
    show("profile", profile.as_str());
    show("samples", scenario.sources.samples());
    show("sd", scenario.noise_sd);
    show("Q", args.q);
    show("seed", args.seed);
    show("noise_rng", NOISE_RNG_ID);

    let mut methods = Vec::with_capacity(args.methods.len());
    for &name in &args.methods {
        if name == MethodName::Fastica {
            show("fastica", "seed drawn per run");
            show_fastica(&args.tuning);
            methods.push(Method::FastIca {
                nonlinearity: args.tuning.nonlinearity.into(),
                max_iter: args.tuning.max_iter,
                tol: args.tuning.tol,
            });
            continue;
        }
        let vth = check_vth(overrides(name).unwrap_or_else(|| profile.vth(name)))?;
        let detector = detector_config(name, &args.tuning);
        match detector {
            DetectorConfig::Global1(t) => show(name.as_str(), format!("vth {vth}, {}", describe_threshold(t))),
            _ => show(name.as_str(), format!("vth {vth}")),
        }
        methods.push(Method::Phase {
            label: name.as_str().to_string(),
            config: SeparateConfig { vth, detector },
        });
    }
    show("out", args.out.out.display());

    let reports = monte_carlo(&scenario, &methods, args.q, args.seed)
        .map_err(|e| CliError::Algorithm(e.to_string()))?;
    let out = &args.out.out;
    prepare_out(out)?;
    write_reports(out, &scenario, &reports)?;
    for r in &reports {
        println!("{}: {} of {} runs succeeded", r.method, r.successes(), r.q);
    }
    if args.out.gnuplot {
        let mut script = String::from("set datafile separator ','\nset key autotitle columnhead\n");
        for s in 0..scenario.sources.channels() {
            let cols = reports.iter().filter(|r| !r.curves.is_empty()).count() + 2;
            script.push_str(&format!(
                "set title 'source {s}'\nplot for [i=2:{cols}] 'rms_source{s}.csv' using 1:i with lines\npause -1\n"
            ));
        }
        write_script(out, "montecarlo.gp", &script)?;
    }
    Ok(())
}

fn write_reports(out: &Path, scenario: &Scenario, reports: &[RmsReport]) -> Result<(), CliError> {
    for s in 0..scenario.sources.channels() {
        let clean = unit_normalize(scenario.sources.row(s))
            .map_err(|e| CliError::Algorithm(format!("source {s}: {e}")))?;
        write_file(&out.join(format!("rms_source{s}.csv")), |w| {
            write_rms_csv(w, reports, &[s], &[(format!("clean_s{s}"), clean.view())])
        })?;
    }
    write_file(&out.join("failures.csv"), |w| {
        let header: Vec<String> = ["method", "run", "message"].iter().map(|s| s.to_string()).collect();
        let rows = reports.iter().flat_map(|r| {
            r.failures
                .iter()
                .map(move |f| vec![r.method.clone(), f.run.to_string(), f.message.clone()])
        });
        write_table(w, &header, rows)
    })
}
