//! Command-line front end: `run`, `compare` and `sweep`.
//!
//! Configuration precedence is built-in defaults, then a flat `key=value`
//! config file, then flags. Every invocation writes `series.csv`,
//! `summary.csv` and `manifest.txt` into the output directory; passing the
//! manifest back through `--config` replays the run byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, ExperimentPlan, SweepAxis};
use crate::metrics::MetricSeries;
use crate::model::{Mechanism, ScenarioConfig, CONFIG_KEYS};

pub const SERIES_HEADER: &str = "round,mechanism,sweep_value,active_mean,active_std,auction_cost_mean,auction_cost_std,mpi_mean,bar_mean,bai_mean,roi_mean,recruited_mean,dropped_mean";
pub const SUMMARY_HEADER: &str = "mechanism,sweep_value,runs,final_active_mean,final_active_std,mean_active,mean_auction_cost,mean_mpi,mean_bar,mean_bai,mean_roi,total_recruited_mean";

#[derive(Debug, Parser)]
#[command(name = "crowdsense", version, about = "Reverse-auction incentive simulator for mobile crowd sensing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One mechanism, one configuration.
    Run(CommonArgs),
    /// All mechanisms side by side.
    Compare(CommonArgs),
    /// Vary one parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to vary, e.g. `threshold`.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Mechanism(s): ra-abc, ra-abcdr, tullock. Comma-separated for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub mechanism: Option<Vec<String>>,
    #[arg(long)]
    pub participants: Option<usize>,
    #[arg(long)]
    pub winners: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "recruitment-rate")]
    pub recruitment_rate: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Flat `key=value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Any other parameter as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads (0 = one per core). Does not affect results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

/// Experiment-level settings that live alongside the scenario parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileSettings {
    pub mechanisms: Option<Vec<Mechanism>>,
    pub sweep_param: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
}

/// Parses flat `key=value` text into `config`. Blank lines and `#` comments
/// are skipped; `derived_seed.*` and `command` lines from manifests are
/// accepted and ignored.
pub fn apply_config_text(text: &str, config: &mut ScenarioConfig) -> Result<FileSettings> {
    let mut settings = FileSettings::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected key=value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "command" => {}
            k if k.starts_with("derived_seed.") => {}
            "mechanisms" => settings.mechanisms = Some(parse_mechanisms(value.split(','))?),
            "sweep_param" | "param" => settings.sweep_param = Some(value.to_string()),
            "sweep_values" | "values" => settings.sweep_values = Some(parse_values(value)?),
            _ => config.set(key, value)?,
        }
    }
    Ok(settings)
}

fn parse_mechanisms<'a>(names: impl Iterator<Item = &'a str>) -> Result<Vec<Mechanism>> {
    names
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::config(format!("invalid sweep value `{s}`")))
        })
        .collect()
}

/// Renders a number with 6 significant digits, trailing zeros trimmed.
/// Non-finite values render as an empty field.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn sweep_field(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

fn sorted(series: &[MetricSeries]) -> Vec<&MetricSeries> {
    let mut sorted: Vec<&MetricSeries> = series.iter().collect();
    sorted.sort_by(|a, b| {
        a.mechanism.name().cmp(b.mechanism.name()).then_with(|| {
            a.sweep_value
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.sweep_value.unwrap_or(f64::NEG_INFINITY))
        })
    });
    sorted
}

pub fn series_csv(series: &[MetricSeries]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for s in sorted(series) {
        for r in &s.rounds {
            let fields = [
                r.round.to_string(),
                s.mechanism.name().to_string(),
                sweep_field(s.sweep_value),
                format_sig6(r.active.mean),
                format_sig6(r.active.std),
                format_sig6(r.auction_cost.mean),
                format_sig6(r.auction_cost.std),
                format_sig6(r.mpi.mean),
                format_sig6(r.bar.mean),
                format_sig6(r.bai.mean),
                format_sig6(r.roi.mean),
                format_sig6(r.recruited.mean),
                format_sig6(r.dropped.mean),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn write_csv(series: &[MetricSeries], path: &Path) -> Result<()> {
    fs::write(path, series_csv(series))?;
    Ok(())
}

pub fn summary_csv(series: &[MetricSeries]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in sorted(series) {
        let total_recruited: f64 = s.rounds.iter().map(|r| r.recruited.mean).sum();
        let last_std = s.rounds.last().map_or(f64::NAN, |r| r.active.std);
        let fields = [
            s.mechanism.name().to_string(),
            sweep_field(s.sweep_value),
            s.runs.to_string(),
            format_sig6(s.final_active()),
            format_sig6(last_std),
            format_sig6(s.mean_active()),
            format_sig6(s.mean_auction_cost()),
            format_sig6(s.time_mean(|r| r.mpi)),
            format_sig6(s.time_mean(|r| r.bar)),
            format_sig6(s.time_mean(|r| r.bai)),
            format_sig6(s.time_mean(|r| r.roi)),
            format_sig6(total_recruited),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// One parsed row of `series.csv`; absent numbers are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub round: usize,
    pub mechanism: Mechanism,
    pub sweep_value: Option<f64>,
    pub values: Vec<Option<f64>>,
}

pub fn parse_series_csv(text: &str) -> Result<Vec<SeriesRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(Error::config("unexpected series header"));
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| Error::config(format!("bad number `{s}`")))
        }
    };
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 13 {
                return Err(Error::config(format!("expected 13 columns in `{line}`")));
            }
            Ok(SeriesRow {
                round: cols[0]
                    .parse()
                    .map_err(|_| Error::config("bad round index"))?,
                mechanism: cols[1].parse()?,
                sweep_value: num(cols[2])?,
                values: cols[3..].iter().map(|c| num(c)).collect::<Result<_>>()?,
            })
        })
        .collect()
}

pub fn manifest(command: &str, plan: &ExperimentPlan) -> Result<String> {
    let mut out = String::from("# crowdsense run manifest\n");
    let _ = writeln!(out, "command={command}");
    let names: Vec<&str> = plan.mechanisms.iter().map(|m| m.name()).collect();
    let _ = writeln!(out, "mechanisms={}", names.join(","));
    if let Some(axis) = &plan.sweep {
        let _ = writeln!(out, "sweep_param={}", axis.canonical()?);
        let values: Vec<String> = axis.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "sweep_values={}", values.join(","));
    }
    let mut base = plan.base.clone();
    base.seed = plan.master_seed;
    base.num_runs = plan.num_runs;
    for key in CONFIG_KEYS {
        let _ = writeln!(out, "{key}={}", base.get(key).expect("canonical key"));
    }
    let sweep: Vec<Option<f64>> = match &plan.sweep {
        Some(axis) => axis.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    for &m in &plan.mechanisms {
        for &v in &sweep {
            let label = v.map_or_else(|| "-".to_string(), |v| v.to_string());
            for k in 0..plan.num_runs {
                let cfg = plan.run_config(m, v, k)?;
                let _ = writeln!(out, "derived_seed.{m}.{label}.{k}={}", cfg.seed);
            }
        }
    }
    Ok(out)
}

/// Resolved invocation: subcommand name, plan and output directory.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: &'static str,
    pub plan: ExperimentPlan,
    pub out: PathBuf,
}

pub fn resolve(cli: Cli) -> Result<Invocation> {
    let (command, common, param, values) = match cli.command {
        Command::Run(c) => ("run", c, None, None),
        Command::Compare(c) => ("compare", c, None, None),
        Command::Sweep {
            common,
            param,
            values,
        } => ("sweep", common, param, values),
    };

    let mut config = ScenarioConfig::default();
    let mut file = FileSettings::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        file = apply_config_text(&text, &mut config)?;
    }
    let flag_mechanisms = common
        .mechanism
        .as_ref()
        .map(|names| parse_mechanisms(names.iter().map(String::as_str)))
        .transpose()?;
    let overrides: [(&str, Option<String>); 7] = [
        ("initial_population", common.participants.map(|v| v.to_string())),
        ("winners_per_round", common.winners.map(|v| v.to_string())),
        ("num_rounds", common.rounds.map(|v| v.to_string())),
        ("satisfaction_threshold", common.threshold.map(|v| v.to_string())),
        ("num_runs", common.runs.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
        ("recruitment_rate", common.recruitment_rate.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config(format!("--set expects key=value, got `{kv}`")))?;
        config.set(k, v)?;
    }

    let mechanisms = match command {
        "run" => {
            let m = flag_mechanisms.map_or(Ok(config.mechanism), |ms| match ms.as_slice() {
                [one] => Ok(*one),
                _ => Err(Error::config("`run` takes exactly one mechanism")),
            })?;
            config.mechanism = m;
            vec![m]
        }
        "compare" => flag_mechanisms
            .or(file.mechanisms)
            .unwrap_or_else(|| Mechanism::ALL.to_vec()),
        _ => flag_mechanisms
            .or(file.mechanisms)
            .unwrap_or_else(|| vec![Mechanism::RaAbc, Mechanism::RaAbcDr]),
    };
    config.validate()?;

    let mut plan = ExperimentPlan::compare(config);
    plan.mechanisms = mechanisms;
    plan.workers = common.workers;
    if command == "sweep" {
        let param = param
            .or(file.sweep_param)
            .ok_or_else(|| Error::config("sweep requires --param"))?;
        let values = values
            .or(file.sweep_values)
            .ok_or_else(|| Error::config("sweep requires --values"))?;
        plan.sweep = Some(SweepAxis::new(param, values));
    }
    plan.validate()?;
    Ok(Invocation {
        command,
        plan,
        out: common.out,
    })
}

/// Runs a resolved invocation and writes its output bundle.
pub fn execute(inv: &Invocation) -> Result<Vec<MetricSeries>> {
    let series = harness::run_experiment(&inv.plan)?;
    fs::create_dir_all(&inv.out)?;
    write_csv(&series, &inv.out.join("series.csv"))?;
    fs::write(inv.out.join("summary.csv"), summary_csv(&series))?;
    fs::write(inv.out.join("manifest.txt"), manifest(inv.command, &inv.plan)?)?;
    Ok(series)
}

fn print_table(series: &[MetricSeries]) {
    println!(
        "{:<10} {:>8} {:>12} {:>12} {:>12} {:>8} {:>8}",
        "mechanism", "sweep", "final_active", "mean_active", "mean_cost", "mpi", "roi"
    );
    for s in sorted(series) {
        println!(
            "{:<10} {:>8} {:>12.2} {:>12.2} {:>12.2} {:>8.3} {:>8.3}",
            s.mechanism.name(),
            s.sweep_value.map_or_else(|| "-".to_string(), |v| v.to_string()),
            s.final_active(),
            s.mean_active(),
            s.mean_auction_cost(),
            s.time_mean(|r| r.mpi),
            s.time_mean(|r| r.roi),
        );
    }
}

/// Entry point; returns the process exit code (0 ok, 1 config, 2 runtime).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let inv = match resolve(cli) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&inv) {
        Ok(series) => {
            print_table(&series);
            println!("wrote {}", inv.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}
