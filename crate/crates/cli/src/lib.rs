//! Command-line front end: `analyze`, `stats`, `synth` and `inspect`.

// Negated float comparisons below are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod config;
pub mod format;
pub mod inspect;
pub mod report;
pub mod synth_cmd;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use tcatt_core::normalize::ReferenceMethod;

pub use analyze::cmd_analyze;
pub use config::RunConfig;
pub use inspect::cmd_inspect;
pub use report::cmd_stats;
pub use synth_cmd::cmd_synth;

#[derive(Debug, Parser)]
#[command(name = "tcatt", version, about = "Tonal contour turning-point and curvature analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure every token of a corpus manifest.
    Analyze(AnalyzeArgs),
    /// ANOVA, group means, correlation and rank test over results.csv.
    Stats(StatsArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
    /// Report the analysis of one track.
    Inspect(InspectArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML file with RunConfig fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct AnalysisArgs {
    /// arithmetic_mean or geometric_mean.
    #[arg(long)]
    pub reference_method: Option<ReferenceMethod>,
    #[arg(long)]
    pub coverage_threshold: Option<f64>,
    #[arg(long)]
    pub eps_slope: Option<f64>,
    #[arg(long)]
    pub semitone_scale: Option<f64>,
    /// Fill the paper_sine_1/paper_sine_2 columns.
    #[arg(long)]
    pub emit_paper_sine: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Defaults to <output-dir>/results.csv.
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub include_interactions: bool,
    /// Per-factor one-way ANOVA when the design is unbalanced.
    #[arg(long)]
    pub unbalanced_fallback: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub speakers_per_gender: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<u32>,
    /// Token-level noise sd on dip depth (semitones).
    #[arg(long)]
    pub noise_sd_st: Option<f64>,
    /// Per-point contour noise sd (semitones).
    #[arg(long)]
    pub point_noise_sd_st: Option<f64>,
    #[arg(long)]
    pub duration_coupling_ms_per_st: Option<f64>,
    /// Start from zero effects and zero duration offsets.
    #[arg(long)]
    pub null_effects: bool,
    /// Added dip depth as factor:level=semitones; repeatable.
    #[arg(long = "effect")]
    pub effects: Vec<String>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// F0 CSV track or PitchTier.
    pub file: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, requires = "xmax")]
    pub xmin: Option<f64>,
    #[arg(long, requires = "xmin")]
    pub xmax: Option<f64>,
    /// Reference pitch; defaults to the mean voiced f0 of the file.
    #[arg(long)]
    pub ref_hz: Option<f64>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

impl AnalysisArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.reference_method {
            cfg.reference_method = m;
        }
        if let Some(v) = self.coverage_threshold {
            cfg.coverage_threshold = v;
        }
        if let Some(v) = self.eps_slope {
            cfg.eps_slope = v;
        }
        if let Some(v) = self.semitone_scale {
            cfg.semitone_scale = v;
        }
        cfg.emit_paper_sine |= self.emit_paper_sine;
    }
}

impl AnalyzeArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.resolve()?;
        if let Some(m) = &self.manifest {
            cfg.manifest = Some(m.clone());
        }
        self.analysis.apply(&mut cfg);
        Ok(cfg)
    }
}

impl StatsArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.resolve()?;
        cfg.include_interactions |= self.include_interactions;
        cfg.unbalanced_fallback |= self.unbalanced_fallback;
        Ok(cfg)
    }

    pub fn results_path(&self, cfg: &RunConfig) -> PathBuf {
        self.results.clone().unwrap_or_else(|| cfg.output_dir.join(analyze::RESULTS_CSV))
    }
}

impl SynthArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.resolve()?;
        if self.null_effects {
            let base = tcatt_core::synth::SynthCorpusConfig::null_effects();
            cfg.synth.effects = base.effects;
            cfg.synth.position_duration_ms = base.position_duration_ms;
            cfg.synth.duration_coupling_ms_per_st = base.duration_coupling_ms_per_st;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(v) = self.speakers_per_gender {
            cfg.synth.speakers_per_gender = v;
        }
        if let Some(v) = self.repetitions {
            cfg.synth.repetitions = v;
        }
        if let Some(v) = self.noise_sd_st {
            cfg.synth.noise_sd_st = v;
        }
        if let Some(v) = self.point_noise_sd_st {
            cfg.synth.point_noise_sd_st = v;
        }
        if let Some(v) = self.duration_coupling_ms_per_st {
            cfg.synth.duration_coupling_ms_per_st = v;
        }
        synth_cmd::apply_effects(&mut cfg.synth, &self.effects)?;
        Ok(cfg)
    }
}

impl InspectArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        self.analysis.apply(&mut cfg);
        Ok(cfg)
    }
}

/// Execute one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => {
            let out = cmd_analyze(&args.run_config()?)?;
            println!(
                "analyzed {} tokens ({} failed); results in {}",
                out.rows.len(),
                out.errors.len(),
                out.output_dir.display()
            );
        }
        Command::Stats(args) => {
            let cfg = args.run_config()?;
            let out = cmd_stats(&args.results_path(&cfg), &cfg)?;
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Synth(args) => {
            let cfg = args.run_config()?;
            let corpus = cmd_synth(&cfg)?;
            println!("wrote {} tokens to {}", corpus.tokens.len(), cfg.output_dir.display());
        }
        Command::Inspect(args) => {
            let cfg = args.run_config()?;
            let interval = args.xmin.zip(args.xmax);
            print!("{}", cmd_inspect(&args.file, interval, args.ref_hz, &cfg)?);
        }
    }
    Ok(())
}
