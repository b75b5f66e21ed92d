//! Run configuration: one TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use polykit::ingest::DEFAULT_EXPANDING_PER_DATASET;
use polykit::ingest::DEFAULT_TARGET_PER_LANGUAGE;
use polykit::xeval::{Feature, FeatureContext};
use polykit::{DatasetDescriptor, Regime, Role, SamplingPolicy, Split, TaskKind, TemplateRegistry};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory. Not part of the config hash, so the same run can be
    /// written to different places and compared.
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    #[serde(default = "default_regime")]
    pub regime: String,
    /// Template files added to the shipped English registry.
    #[serde(default)]
    pub templates: Vec<PathBuf>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub datasets: Vec<DatasetConfig>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default = "default_target_n")]
    pub target_per_language: usize,
    #[serde(default = "default_expanding_n")]
    pub expanding_per_dataset: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { target_per_language: default_target_n(), expanding_per_dataset: default_expanding_n() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Features to bucket by; empty means every applicable feature.
    #[serde(default)]
    pub features: Vec<String>,
    #[serde(default)]
    pub entity_heuristic: bool,
    /// Replacement for the shipped basic-word list.
    #[serde(default)]
    pub basic_words: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    /// Defaults to the task of a known dataset name.
    #[serde(default)]
    pub task: Option<String>,
    pub role: Role,
    #[serde(default)]
    pub languages: Vec<String>,
    #[serde(default)]
    pub train: Option<PathBuf>,
    #[serde(default)]
    pub dev: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_regime() -> String {
    "unified-cross".to_string()
}

fn default_target_n() -> usize {
    DEFAULT_TARGET_PER_LANGUAGE
}

fn default_expanding_n() -> usize {
    DEFAULT_EXPANDING_PER_DATASET
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub regime: Option<Regime>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// A config with no datasets, for commands that only need a seed and an
    /// output directory.
    pub fn empty() -> Self {
        toml::from_str("").expect("empty config parses")
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            // Command-line paths are relative to the working directory.
            self.out = std::env::current_dir().map(|d| d.join(out)).unwrap_or_else(|_| out.clone());
        }
        if let Some(regime) = overrides.regime {
            self.regime = regime.to_string();
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    pub fn regime(&self) -> Result<Regime, CliError> {
        self.regime.parse().map_err(CliError::invalid)
    }

    /// SHA-256 over the effective configuration, output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.regime()?;
        self.features()?;
        for p in &self.templates {
            self.require_file(p)?;
        }
        if let Some(p) = &self.evaluation.basic_words {
            self.require_file(p)?;
        }
        for d in self.descriptors()? {
            d.validate()?;
            for path in d.splits.values() {
                if !path.is_file() {
                    return Err(CliError::input(format!("dataset `{}`: {} does not exist", d.name, path.display())));
                }
            }
        }
        Ok(())
    }

    fn require_file(&self, p: &Path) -> Result<(), CliError> {
        let full = self.resolve(p);
        if full.is_file() {
            Ok(())
        } else {
            Err(CliError::input(format!("{} does not exist", full.display())))
        }
    }

    pub fn descriptors(&self) -> Result<Vec<DatasetDescriptor>, CliError> {
        self.datasets
            .iter()
            .map(|d| {
                let task = match &d.task {
                    Some(t) => TaskKind::parse(t)
                        .ok_or_else(|| CliError::invalid(format!("dataset `{}`: unknown task `{t}`", d.name)))?,
                    None => TaskKind::for_dataset(&d.name).ok_or_else(|| {
                        CliError::invalid(format!("dataset `{}`: unknown dataset name, set `task`", d.name))
                    })?,
                };
                let splits = [(Split::Train, &d.train), (Split::Dev, &d.dev), (Split::Test, &d.test)]
                    .into_iter()
                    .filter_map(|(s, p)| p.as_ref().map(|p| (s, self.resolve(p))))
                    .collect();
                Ok(DatasetDescriptor {
                    name: d.name.clone(),
                    task,
                    role: d.role,
                    languages: d.languages.clone(),
                    splits,
                })
            })
            .collect()
    }

    pub fn sampling_policy(&self, role: Role) -> Result<SamplingPolicy, CliError> {
        let n = match role {
            Role::Target => self.sampling.target_per_language,
            Role::Expanding => self.sampling.expanding_per_dataset,
        };
        Ok(SamplingPolicy::new(n, self.seed)?)
    }

    pub fn registry(&self) -> Result<TemplateRegistry, CliError> {
        let mut registry = TemplateRegistry::builtin_english();
        for p in &self.templates {
            let path = self.resolve(p);
            let text =
                std::fs::read_to_string(&path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            registry.extend_from_jsonl(&text)?;
        }
        Ok(registry)
    }

    /// Configured features; empty means "all applicable".
    pub fn features(&self) -> Result<Vec<Feature>, CliError> {
        self.evaluation.features.iter().map(|f| f.parse().map_err(CliError::invalid)).collect()
    }

    pub fn feature_context(&self) -> Result<FeatureContext, CliError> {
        let mut ctx = match &self.evaluation.basic_words {
            Some(p) => FeatureContext::load_basic_words(&self.resolve(p))?,
            None => FeatureContext::default(),
        };
        ctx.entity_heuristic = self.evaluation.entity_heuristic;
        Ok(ctx)
    }
}
