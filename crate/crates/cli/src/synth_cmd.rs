use anyhow::{anyhow, bail, Context, Result};
use tcatt_core::synth::{gen_corpus, SynthCorpus, SynthCorpusConfig};

use crate::config::RunConfig;

/// Parse `factor:level=value`, e.g. `position:initial=1.0`.
pub fn parse_effect(spec: &str) -> Result<(String, String, f64)> {
    let (key, value) = spec.split_once('=').ok_or_else(|| anyhow!("effect {spec:?}: expected factor:level=value"))?;
    let (factor, level) = key.split_once(':').ok_or_else(|| anyhow!("effect {spec:?}: expected factor:level=value"))?;
    let value: f64 = value.trim().parse().with_context(|| format!("effect {spec:?}: bad value"))?;
    if !value.is_finite() {
        bail!("effect {spec:?}: value must be finite");
    }
    Ok((factor.trim().to_string(), level.trim().to_string(), value))
}

pub fn apply_effects(config: &mut SynthCorpusConfig, effects: &[String]) -> Result<()> {
    for e in effects {
        let (factor, level, value) = parse_effect(e)?;
        config.effects.entry(factor).or_default().insert(level, value);
    }
    Ok(())
}

/// Generate the configured corpus and write it under `output_dir`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let config = cfg.synth_config();
    let corpus = cfg.thread_pool()?.install(|| gen_corpus(&config))?;
    corpus
        .write_to_dir(&cfg.output_dir)
        .with_context(|| format!("writing corpus to {}", cfg.output_dir.display()))?;
    log::info!("{} tokens written to {}", corpus.tokens.len(), cfg.output_dir.display());
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effect_syntax() {
        assert_eq!(parse_effect("position:initial=1.5").unwrap(), ("position".into(), "initial".into(), 1.5));
        assert!(parse_effect("position=1").is_err());
        assert!(parse_effect("position:initial").is_err());
        assert!(parse_effect("position:initial=x").is_err());
    }
}
