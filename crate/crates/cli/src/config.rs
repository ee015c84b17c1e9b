use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use scanb::corpus::{CorpusConfig, SplitFilter, StructuralContext, TokenizeConfig, REUTERS_COMPONENTS, REUTERS_TEN};
use scanb::model::{ContextMapping, ModelConfig, Orientation, WeightingStrategy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MappingChoice {
    Flat,
    Full,
    Whitelist,
}

/// One model in a comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub mapping: MappingChoice,
    pub strategy: String,
}

/// Everything an experiment depends on. Loaded from TOML, overridden by
/// flags, and embedded in every output so a run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory of `.sgm` files, or an `.ndjson` corpus dump.
    pub corpus_dir: Option<PathBuf>,
    pub categories: Vec<String>,
    /// Elements whose text is kept; also the model whitelist.
    pub whitelist: Vec<String>,
    pub tokenizer: TokenizeConfig,
    pub split: SplitFilter,
    pub mapping: MappingChoice,
    /// `unity`, `vocab-coverage`, `vocab-coverage-inv` or `fixed:FILE`.
    pub strategy: String,
    pub alpha: f64,
    pub folds: usize,
    pub seed: u64,
    /// Worker threads; 0 picks one per core.
    pub jobs: usize,
    /// One-vs-rest decision margin.
    pub margin: f64,
    pub compare: Vec<ModelSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spec = |name: &str, mapping, strategy: &str| ModelSpec {
            name: name.to_owned(),
            mapping,
            strategy: strategy.to_owned(),
        };
        ExperimentConfig {
            corpus_dir: None,
            categories: REUTERS_TEN.iter().map(|s| s.to_string()).collect(),
            whitelist: REUTERS_COMPONENTS.iter().map(|s| s.to_string()).collect(),
            tokenizer: TokenizeConfig::default(),
            split: SplitFilter::All,
            mapping: MappingChoice::Whitelist,
            strategy: "vocab-coverage".to_owned(),
            alpha: 1.0,
            folds: 10,
            seed: 0,
            jobs: 0,
            margin: 0.0,
            compare: vec![
                spec("NB", MappingChoice::Flat, "unity"),
                spec("NBS'", MappingChoice::Whitelist, "unity"),
                spec("SCANB", MappingChoice::Whitelist, "vocab-coverage"),
            ],
        }
    }
}

/// Values given on the command line; each one replaces the config value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML experiment config, or a JSON report whose embedded config is replayed.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus_dir: Option<PathBuf>,
    /// Comma-separated category names.
    #[arg(long, global = true, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// Comma-separated element names.
    #[arg(long, global = true, value_delimiter = ',')]
    pub whitelist: Option<Vec<String>>,
    #[arg(long, global = true, value_enum)]
    pub mapping: Option<MappingChoice>,
    /// unity | vocab-coverage | vocab-coverage-inv | fixed:FILE
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let config = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(config).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        }
    }

    pub fn resolve(overrides: &Overrides) -> Result<Self, CliError> {
        let mut c = match &overrides.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        let o = overrides.clone();
        if let Some(v) = o.corpus_dir {
            c.corpus_dir = Some(v);
        }
        if let Some(v) = o.categories {
            c.categories = v;
        }
        if let Some(v) = o.whitelist {
            c.whitelist = v;
        }
        if let Some(v) = o.mapping {
            c.mapping = v;
        }
        if let Some(v) = o.strategy {
            c.strategy = v;
        }
        if let Some(v) = o.alpha {
            c.alpha = v;
        }
        if let Some(v) = o.folds {
            c.folds = v;
        }
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = o.jobs {
            c.jobs = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.categories.is_empty() || self.categories.iter().any(String::is_empty) {
            return bad("categories must be a non-empty list of names".into());
        }
        if self.whitelist.iter().any(|e| e.is_empty() || e.contains('/')) {
            return bad("whitelist entries must be element names".into());
        }
        if self.margin.is_nan() {
            return bad("margin must be a number".into());
        }
        let mut names = BTreeSet::new();
        for spec in &self.compare {
            if !names.insert(&spec.name) {
                return bad(format!("duplicate model name {:?} in compare", spec.name));
            }
            self.model_config(spec.mapping, &spec.strategy)?;
        }
        self.model_config(self.mapping, &self.strategy)?;
        Ok(())
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            categories: Some(self.categories.iter().cloned().collect()),
            context_whitelist: (!self.whitelist.is_empty()).then(|| self.whitelist.iter().cloned().collect()),
            tokenizer: self.tokenizer.clone(),
            split: self.split,
            ..CorpusConfig::default()
        }
    }

    pub fn model_config(&self, mapping: MappingChoice, strategy: &str) -> Result<ModelConfig, CliError> {
        let mapping = match mapping {
            MappingChoice::Flat => ContextMapping::FlattenAll,
            MappingChoice::Full => ContextMapping::FullPath,
            MappingChoice::Whitelist if self.whitelist.is_empty() => {
                return Err(CliError::Validation("whitelist mapping needs a non-empty whitelist".into()))
            }
            MappingChoice::Whitelist => ContextMapping::whitelist(self.whitelist.iter().cloned()),
        };
        let config = ModelConfig {
            mapping,
            strategy: parse_strategy(strategy)?,
            alpha: self.alpha,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn primary_model(&self) -> Result<ModelConfig, CliError> {
        self.model_config(self.mapping, &self.strategy)
    }

    pub fn corpus_path(&self) -> Result<&Path, CliError> {
        self.corpus_dir
            .as_deref()
            .ok_or_else(|| CliError::Validation("no corpus given (use --corpus-dir or corpus_dir)".into()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub fn tokenizer_digest(t: &TokenizeConfig) -> String {
    hex_digest(&serde_json::to_vec(t).expect("tokenizer config serializes"))
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_strategy(s: &str) -> Result<WeightingStrategy, CliError> {
    match s {
        "unity" => Ok(WeightingStrategy::Unity),
        "vocab-coverage" => Ok(WeightingStrategy::coverage(Orientation::AsPrinted)),
        "vocab-coverage-inv" => Ok(WeightingStrategy::coverage(Orientation::Inverted)),
        _ => match s.strip_prefix("fixed:") {
            Some(file) => {
                let strategy = WeightingStrategy::Fixed {
                    weights: load_weights(Path::new(file))?,
                };
                strategy.validate()?;
                Ok(strategy)
            }
            None => Err(CliError::Validation(format!(
                "unknown strategy {s:?} (expected unity, vocab-coverage, vocab-coverage-inv or fixed:FILE)"
            ))),
        },
    }
}

/// Context-to-weight table from a TOML or JSON file.
fn load_weights(path: &Path) -> Result<BTreeMap<StructuralContext, f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let parsed: Result<BTreeMap<StructuralContext, f64>, String> = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
