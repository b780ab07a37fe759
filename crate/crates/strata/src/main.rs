//! Thin command-line front end over the library: parse a config, run
//! the requested operation, print or write the result. All numerical
//! work lives in the library; this file only dispatches and maps errors
//! to exit codes (2 config, 3 numeric, 4 failed bound, 5 io).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use strata::config::{default_experiment, load_config, Config, ExperimentSettings};
use strata::disintegration::{stratified_chain_rule_check, ResidualMode};
use strata::error::{Error, Result};
use strata::experiments::{run_aep, run_theorem, Report, ReportFormat};
use strata::gmt::{closed_form_measure, gallery};
use strata::measures::StratifiedMeasure;
use strata::quad::QuadratureScheme;

#[derive(Parser)]
#[command(
    name = "strata",
    version,
    about = "Entropy and typicality experiments for mixed-dimension measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the entropy decomposition of the configured measure
    Entropy {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Draw seeded samples and write them with their component labels
    Sample {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Typical-set mass and volume against the entropy sandwich
    Aep {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Dimension concentration and volume growth of doubly typical words
    Theorem {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Compare the decomposed entropy against an independent evaluation
    ChainRule {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// List the built-in chart family
    Charts,
}

/// Run parameters; any of these override the config's experiment block.
#[derive(Args, Clone)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    /// output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// json-lines, csv, or human-text
    #[arg(long)]
    format: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let (code, class, msg) = classify(&e);
            eprintln!("error[{class}]: {}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn classify(e: &Error) -> (u8, &'static str, String) {
    match e {
        Error::Config(m) => (2, "config", m.clone()),
        Error::Io { path, source } => (5, "io", format!("{}: {source}", path.display())),
        Error::Contract(m) => (3, "contract", m.clone()),
        Error::Numeric(m) => (3, "numeric", m.clone()),
        Error::Unsupported(m) => (3, "unsupported", m.clone()),
        Error::Singular(m) => (3, "singular", m.clone()),
        Error::Sampling(m) => (3, "sampling", m.clone()),
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Entropy { config, flags } => {
            let (config, measure) = load(&config)?;
            cmd_entropy(&config, &measure, &flags)
        }
        Command::Sample { config, flags } => {
            let (_, measure) = load(&config)?;
            cmd_sample(&measure, &flags)
        }
        Command::Aep { config, flags } => {
            let (config, measure) = load(&config)?;
            let settings = settings_with_overrides(&config, &flags);
            let report = run_aep(&measure, &config.label(), &settings.params)?;
            finish_report(&report, &settings, &flags)
        }
        Command::Theorem { config, flags } => {
            let (config, measure) = load(&config)?;
            let settings = settings_with_overrides(&config, &flags);
            let report = run_theorem(&measure, &config.label(), &settings.params)?;
            finish_report(&report, &settings, &flags)
        }
        Command::ChainRule { config, flags } => {
            let (config, measure) = load(&config)?;
            cmd_chain_rule(&config, &measure, &flags)
        }
        Command::Charts => {
            cmd_charts();
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path) -> Result<(Config, StratifiedMeasure)> {
    let config = load_config(path)?;
    let measure = config.build_measure(&QuadratureScheme::default())?;
    Ok((config, measure))
}

fn settings_with_overrides(config: &Config, flags: &Flags) -> ExperimentSettings {
    let mut settings = config.experiment.clone().unwrap_or_else(default_experiment);
    if let Some(seed) = flags.seed {
        settings.params.seed = seed;
    }
    if let Some(trials) = flags.trials {
        settings.params.trials = trials;
    }
    if let Some(delta) = flags.delta {
        settings.params.delta = delta;
    }
    if let Some(xi) = flags.xi {
        settings.params.xi = xi;
    }
    settings
}

fn finish_report(
    report: &Report,
    settings: &ExperimentSettings,
    flags: &Flags,
) -> Result<ExitCode> {
    let format = match &flags.format {
        Some(name) => ReportFormat::parse(name)?,
        None => settings.format,
    };
    let out = flags.out.as_ref().or(settings.out.as_ref());
    match out {
        Some(path) => report.write(path, format)?,
        None => print!("{}", report.render(format)?),
    }
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn cmd_entropy(config: &Config, measure: &StratifiedMeasure, flags: &Flags) -> Result<ExitCode> {
    let entropy = measure.entropy();
    let mut out = String::new();
    out.push_str(&format!("measure: {}\n", config.label()));
    for w in measure.warnings() {
        out.push_str(&format!("warning: {w}\n"));
    }
    out.push_str(&format!("total        {}\n", entropy.total));
    out.push_str(&format!("mixture      {}\n", entropy.mixture_term));
    out.push_str(&format!("conditional  {}\n", entropy.conditional_term));
    out.push_str(&format!("E(D)         {}\n", measure.expected_dimension()));
    out.push_str(&format!("H(Y)         {}\n", measure.marginal_law().1));
    emit(flags.out.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(measure: &StratifiedMeasure, flags: &Flags) -> Result<ExitCode> {
    let count = flags.trials.unwrap_or(1000);
    let seed = flags.seed.unwrap_or(0);
    let samples = measure.sample(count, seed)?;
    let format = match &flags.format {
        Some(name) => ReportFormat::parse(name)?,
        None => ReportFormat::JsonLines,
    };
    let mut out = String::new();
    if format == ReportFormat::Csv {
        let width = measure.ambient_dim();
        let coords: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
        out.push_str(&format!("index,stratum,piece,label,{}\n", coords.join(",")));
    }
    for (index, s) in samples.iter().enumerate() {
        let label = measure.strata()[s.stratum].pieces()[s.piece].label();
        let line = match format {
            ReportFormat::JsonLines => format!(
                "{{\"index\":{index},\"stratum\":{},\"piece\":{},\"label\":{},\"point\":{:?}}}",
                s.stratum,
                s.piece,
                json_string(label),
                s.point.coords(),
            ),
            ReportFormat::Csv => format!(
                "{index},{},{},{},{}",
                s.stratum,
                s.piece,
                label,
                s.point.coords()
                    .iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ReportFormat::HumanText => format!(
                "{index:>6}  {label}  (stratum {}, piece {})  {:?}",
                s.stratum, s.piece, s.point.coords()
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    emit(flags.out.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_chain_rule(config: &Config, measure: &StratifiedMeasure, flags: &Flags) -> Result<ExitCode> {
    let scheme = QuadratureScheme::default();
    let mode = match flags.trials {
        Some(trials) => ResidualMode::MonteCarlo { trials, seed: flags.seed.unwrap_or(0) },
        None => ResidualMode::Quadrature,
    };
    let check = stratified_chain_rule_check(measure, mode, &scheme)?;
    let tolerance = match check.stderr {
        Some(se) => 4.0 * se,
        None => 1e-6,
    };
    let pass = check.residual <= tolerance;
    let mut out = String::new();
    out.push_str(&format!("measure: {}\n", config.label()));
    out.push_str(&format!("decomposed   {}\n", check.decomposed));
    out.push_str(&format!("independent  {}\n", check.independent));
    out.push_str(&format!("residual     {:e}\n", check.residual));
    if let Some(se) = check.stderr {
        out.push_str(&format!("stderr       {se:e}\n"));
    }
    out.push_str(&format!(
        "[{}] chain-rule - residual vs tolerance {tolerance:e}\n",
        if pass { "pass" } else { "FAIL" }
    ));
    emit(flags.out.as_ref(), &out)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn cmd_charts() {
    println!("{:<52} {:>3} {:>7}  {}", "chart", "dim", "ambient", "measure");
    for chart in gallery() {
        let measure = closed_form_measure(chart.label())
            .map(|v| format!("{v}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<52} {:>3} {:>7}  {}",
            chart.label(),
            chart.dim(),
            chart.ambient_dim(),
            measure
        );
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("plain string serializes")
}
