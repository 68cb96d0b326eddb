use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tcatt_core::normalize::{ReferenceMethod, SamplingConfig};
use tcatt_core::synth::SynthCorpusConfig;
use tcatt_core::tcatt::TcattConfig;

/// Settings shared by every subcommand. Loaded from an optional TOML file;
/// command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub reference_method: ReferenceMethod,
    pub coverage_threshold: f64,
    pub eps_slope: f64,
    pub semitone_scale: f64,
    pub emit_paper_sine: bool,
    pub include_interactions: bool,
    pub unbalanced_fallback: bool,
    /// Seed for `synth`; replaces `synth.seed`.
    pub seed: u64,
    /// Worker threads; 0 uses every core. Never affects output.
    pub threads: usize,
    pub synth: SynthCorpusConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SynthCorpusConfig::default();
        Self {
            manifest: None,
            output_dir: PathBuf::from("out"),
            reference_method: ReferenceMethod::default(),
            coverage_threshold: SamplingConfig::default().coverage_threshold,
            eps_slope: TcattConfig::default().eps_slope,
            semitone_scale: TcattConfig::default().semitone_scale,
            emit_paper_sine: false,
            include_interactions: false,
            unbalanced_fallback: false,
            seed: synth.seed,
            threads: 0,
            synth,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Defaults, or the given file.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::from_toml_file)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold <= 1.0) {
            bail!("coverage-threshold must lie in (0, 1], got {}", self.coverage_threshold);
        }
        if !(self.eps_slope > 0.0 && self.eps_slope.is_finite()) {
            bail!("eps-slope must be positive, got {}", self.eps_slope);
        }
        if !(self.semitone_scale > 0.0 && self.semitone_scale.is_finite()) {
            bail!("semitone-scale must be positive, got {}", self.semitone_scale);
        }
        if self.output_dir.as_os_str().is_empty() {
            bail!("output-dir must not be empty");
        }
        if self.manifest.as_ref().is_some_and(|m| m.as_os_str().is_empty()) {
            bail!("manifest path must not be empty");
        }
        Ok(())
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig { coverage_threshold: self.coverage_threshold }
    }

    pub fn tcatt(&self) -> TcattConfig {
        TcattConfig { eps_slope: self.eps_slope, semitone_scale: self.semitone_scale }
    }

    pub fn synth_config(&self) -> SynthCorpusConfig {
        SynthCorpusConfig { seed: self.seed, ..self.synth.clone() }
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .context("building thread pool")
    }
}
