//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::gof;
use crate::io::{self, AnalysisReport, Settings, SignalFormat};
use crate::sim::{self, StudyConfig};
use crate::tfr::spectrogram;
use crate::verdict::{analyze_signal, calibrate};

#[derive(Debug, Parser)]
#[command(name = "tailprobe", version, about = "Finite or infinite variance of heavy-tailed noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the noise of a recorded signal and write a JSON report.
    Analyze(AnalyzeArgs),
    /// Run the seeded simulation study.
    Simulate(SimulateArgs),
    /// Kolmogorov-Smirnov test of a sample against a fitted law.
    Gof(GofArgs),
    /// Write the spectrogram of a signal as CSV.
    Spectrogram(SpectrogramArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Wav,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Sample rate of CSV input in Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub kaiser_beta: Option<f64>,
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub nfft: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Analysed band in Hz, `lo:hi`.
    #[arg(long)]
    pub band: Option<String>,
    #[arg(long)]
    pub jump_factor: Option<f64>,
    #[arg(long)]
    pub null_replicates: Option<usize>,
    /// Frequency of the sub-signal written to the tail-plot CSV.
    #[arg(long)]
    pub tail_freq: Option<f64>,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Noise law as family:shape:scale; repeatable. Defaults to the nine
    /// reference scenarios.
    #[arg(long)]
    pub scenario: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long)]
    pub null_replicates: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// One value per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "genchi2")]
    pub family: String,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the tail-plot CSV here.
    #[arg(long)]
    pub tail_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrogramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn overrides(common: &CommonArgs, extra: Vec<(&'static str, Option<String>)>) -> Vec<(&'static str, String)> {
    let base = vec![
        ("window", common.window.map(|v| v.to_string())),
        ("kaiser_beta", common.kaiser_beta.map(|v| v.to_string())),
        ("overlap", common.overlap.map(|v| v.to_string())),
        ("nfft", common.nfft.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
    ];
    base.into_iter().chain(extra).filter_map(|(k, v)| v.map(|v| (k, v))).collect()
}

fn load(input: &InputArgs, settings: &mut Settings) -> Result<io::Signal> {
    let format = match input.format {
        FormatArg::Auto => SignalFormat::from_path(&input.input),
        FormatArg::Csv => SignalFormat::CsvColumn,
        FormatArg::Wav => SignalFormat::Wav,
    };
    let signal = io::load_signal(&input.input, format, settings.analysis.spectrogram.sample_rate_hz)?;
    settings.analysis.spectrogram.sample_rate_hz = signal.sample_rate_hz;
    settings.analysis.validate()?;
    Ok(signal)
}

fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    let extra = vec![
        ("sample_rate", args.input.sample_rate.map(|v| v.to_string())),
        ("band", args.band.clone()),
        ("jump_factor", args.jump_factor.map(|v| v.to_string())),
        ("null_replicates", args.null_replicates.map(|v| v.to_string())),
    ];
    let mut settings = Settings::resolve(args.common.config.as_deref(), &overrides(&args.common, extra))?;
    let signal = load(&args.input, &mut settings)?;
    let cfg = &settings.analysis;

    let null =
        calibrate(signal.samples.len(), cfg, settings.seed).map_err(|e| e.in_stage("null calibration"))?;
    let (verdict, spec) = analyze_signal(&signal.samples, cfg, &null)?;

    let bins = &verdict.evidence.ks.bins;
    let tail_bin = match args.tail_freq {
        Some(f) => {
            let sub = spec.sub_signal(f)?;
            bins.iter()
                .find(|b| b.freq_hz == sub.freq_hz)
                .ok_or_else(|| Error::config(format!("{f} Hz is not a fitted bin of the analysed band")))?
        }
        None => &bins[bins.len() / 2],
    };
    let tail = io::tail_csv(&spec.sub_signal(tail_bin.freq_hz)?.values, &tail_bin.fitted)?;

    let mut report = AnalysisReport::new(&signal, &settings, &verdict, tail_bin.freq_hz);
    let slopes_path = side_path(&args.out, "slopes");
    let tail_path = side_path(&args.out, "tail");
    report.side_files = vec![slopes_path.display().to_string(), tail_path.display().to_string()];
    let json = report.to_json()?;
    io::write_text(&slopes_path, &io::slopes_csv(&verdict))?;
    io::write_text(&tail_path, &tail)?;
    io::write_text(&args.out, &json)?;
    let _ = writeln!(stdout, "category {} ({})", report.category, args.out.display());
    Ok(())
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let extra = vec![
        ("sample_rate", args.sample_rate.map(|v| v.to_string())),
        ("null_replicates", args.null_replicates.map(|v| v.to_string())),
    ];
    let settings = Settings::resolve(args.common.config.as_deref(), &overrides(&args.common, extra))?;
    let scenarios = if args.scenario.is_empty() {
        sim::default_scenarios()
    } else {
        args.scenario.iter().map(|s| s.parse()).collect::<Result<Vec<DistributionSpec>>>()?
    };
    let cfg = StudyConfig {
        scenarios,
        n: args.n,
        replicates: args.replicates,
        analysis: settings.analysis,
        seed: settings.seed,
    };
    let report = sim::run_study(&cfg)?;
    let (csv, json) = sim::write_outputs(&report, &args.out_dir)?;
    for s in &report.scenarios {
        let acc = s.accuracy.map_or("-".to_string(), |a| format!("{:.2}", a));
        let _ = writeln!(
            stdout,
            "{:<14} log10 median {:>8.3}  log10 IQR {:>8.3}  accuracy {acc}",
            s.scenario, s.log10_median, s.log10_iqr
        );
    }
    if report.low_confidence {
        let _ = writeln!(stdout, "warning: fewer than {} replicates", sim::LOW_CONFIDENCE_REPLICATES);
    }
    let _ = writeln!(stdout, "wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn gof_cmd(args: &GofArgs, stdout: &mut dyn Write) -> Result<()> {
    let extra = vec![
        ("bootstrap", args.bootstrap.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
    ];
    let settings = Settings::resolve(
        args.config.as_deref(),
        &extra.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect::<Vec<_>>(),
    )?;
    let family: Family = args.family.parse()?;
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::Io { path: args.input.display().to_string(), msg: e.to_string() })?;
    let sample = io::parse_column(&text, &args.input.display().to_string())?;
    let r = gof::ks_pvalue_mc(&sample, family, settings.bootstrap, settings.seed)?;
    if let Some(p) = &args.tail_out {
        io::write_text(p, &io::tail_csv(&sample, &r.fitted)?)?;
    }
    let json = serde_json::to_string_pretty(&r).map_err(|e| Error::Report(e.to_string()))?;
    let _ = writeln!(stdout, "{json}");
    Ok(())
}

fn spectrogram_cmd(args: &SpectrogramArgs, stdout: &mut dyn Write) -> Result<()> {
    let extra = vec![("sample_rate", args.input.sample_rate.map(|v| v.to_string()))];
    let mut settings = Settings::resolve(args.common.config.as_deref(), &overrides(&args.common, extra))?;
    let signal = load(&args.input, &mut settings)?;
    let s = spectrogram(&signal.samples, &settings.analysis.spectrogram)?;
    io::write_text(&args.out, &io::spectrogram_csv(&s))?;
    let _ = writeln!(stdout, "{} frames x {} bins ({})", s.n_frames(), s.n_bins(), args.out.display());
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Gof(a) => gof_cmd(a, stdout),
        Command::Spectrogram(a) => spectrogram_cmd(a, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
