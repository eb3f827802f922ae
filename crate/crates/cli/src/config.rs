//! Pipeline configuration file (TOML) and its validation.
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use ptdial::labeling::{SplitSpec, TrainingConfig};
use ptdial::pt::{Pairing, PtConfig, PtMode};
use ptdial::responder::{GenerationConfig, LmConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub emoji_table: Option<PathBuf>,
    pub reviews: Option<PathBuf>,
    /// JSONL of `{"id", "context", "reference"}`: contexts for `respond`,
    /// references for `evaluate`.
    pub held_out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub sp_model: Option<PathBuf>,
    pub forward_lm: Option<PathBuf>,
    pub reverse_lm: Option<PathBuf>,
    /// Corpus the language models are trained on; defaults to the PT corpus.
    pub lm_corpus: Option<PathBuf>,
    pub responses: Option<PathBuf>,
    /// IDF and fluency background; defaults to `corpus`.
    pub background: Option<PathBuf>,
    /// Combined `{"query", "response", "reference"}` JSONL; bypasses the
    /// responses/held-out join when set.
    pub eval_pairs: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionOptions {
    pub pairing: Pairing,
    pub threshold: f64,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        TransitionOptions {
            pairing: Pairing::default(),
            threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    /// Order of the reference model used for fluency.
    pub lm_order: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions { lm_order: 2 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub sp: TrainingConfig,
    pub split: SplitSpec,
    pub pt: PtConfig,
    pub generation: GenerationConfig,
    pub lm: LmConfig,
    pub transitions: TransitionOptions,
    pub metrics: MetricOptions,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub top_k: Option<usize>,
    pub mode: Option<PtMode>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let mut cfg: PipelineConfig =
                    toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                let base = p.parent().unwrap_or(Path::new("."));
                cfg.paths.resolve(base);
                cfg
            }
            None => PipelineConfig::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.sp.seed = seed;
            self.split.seed = seed;
            self.generation.seed = seed;
        }
        if let Some(out) = &o.out {
            self.paths.out_dir = Some(out.clone());
        }
        if let Some(t) = o.threshold {
            self.transitions.threshold = t;
        }
        if let Some(k) = o.top_k {
            self.generation.top_k = k;
        }
        if let Some(m) = o.mode {
            self.pt.mode = m;
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    pub fn sp_model_path(&self) -> PathBuf {
        self.paths.sp_model.clone().unwrap_or_else(|| self.out(crate::commands::SP_MODEL))
    }

    pub fn forward_lm_path(&self) -> PathBuf {
        self.paths.forward_lm.clone().unwrap_or_else(|| self.out(crate::commands::FORWARD_LM))
    }

    pub fn reverse_lm_path(&self) -> PathBuf {
        self.paths.reverse_lm.clone().unwrap_or_else(|| self.out(crate::commands::REVERSE_LM))
    }

    pub fn lm_corpus_path(&self) -> PathBuf {
        self.paths.lm_corpus.clone().unwrap_or_else(|| self.out(crate::commands::PT_CORPUS))
    }

    pub fn responses_path(&self) -> PathBuf {
        self.paths.responses.clone().unwrap_or_else(|| self.out(crate::commands::RESPONSES))
    }

    pub fn background_path(&self) -> Option<PathBuf> {
        self.paths.background.clone().or_else(|| self.paths.corpus.clone())
    }

    /// Checks everything that can be checked before any stage runs.
    pub fn validate_common(&self) -> Result<()> {
        let t = self.transitions.threshold;
        if !(0.0..=1.0).contains(&t) {
            bail!("transition threshold {t} outside [0,1]");
        }
        self.split.validate()?;
        self.sp.validate()?;
        if self.generation.top_k == 0 || self.generation.n_candidates == 0 || self.generation.max_length == 0 {
            bail!("generation top_k, n_candidates and max_length must be >= 1");
        }
        if self.lm.order == 0 || self.metrics.lm_order == 0 {
            bail!("n-gram orders must be >= 1");
        }
        check_creatable(&self.out_dir())
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.emoji_table,
            &mut self.reviews,
            &mut self.held_out,
            &mut self.out_dir,
            &mut self.sp_model,
            &mut self.forward_lm,
            &mut self.reverse_lm,
            &mut self.lm_corpus,
            &mut self.responses,
            &mut self.background,
            &mut self.eval_pairs,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// The named input must be configured and exist.
pub fn require(path: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    let p = path.with_context(|| format!("config is missing paths.{what}"))?;
    if !p.is_file() {
        bail!("{what} file not found: {}", p.display());
    }
    Ok(p.clone())
}

pub fn require_file(p: &Path, what: &str) -> Result<()> {
    if !p.is_file() {
        bail!("{what} file not found: {}", p.display());
    }
    Ok(())
}

fn check_creatable(dir: &Path) -> Result<()> {
    let mut cur = Some(dir);
    while let Some(p) = cur {
        if p.exists() {
            if p.is_dir() {
                return Ok(());
            }
            bail!("output path {} is blocked by a non-directory {}", dir.display(), p.display());
        }
        cur = p.parent().filter(|q| !q.as_os_str().is_empty());
    }
    Ok(())
}
