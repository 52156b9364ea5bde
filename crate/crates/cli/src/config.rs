//! TOML configuration and asset resolution.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use mwp_core::inference::{bundled_rules, parse_rules};
use mwp_core::lexicon::Lexicon;
use mwp_core::linear::TrainConfig;
use mwp_core::pipeline::Pipeline;
use mwp_core::sti::StiConfig;

/// Overrides the directory searched for asset files.
pub const ASSETS_ENV: &str = "MWP_ASSETS";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory holding verb_classes.txt, hypernyms.txt, words.txt and
    /// rules.txt. Individual paths below win over it.
    pub assets: Option<PathBuf>,
    pub verb_classes: Option<PathBuf>,
    pub hypernyms: Option<PathBuf>,
    pub words: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub train: TrainConfig,
    pub sti: StiConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let mut cfg: Config = toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                // Relative paths are relative to the config file.
                let base = p.parent().unwrap_or(Path::new("."));
                for f in [
                    &mut cfg.assets,
                    &mut cfg.verb_classes,
                    &mut cfg.hypernyms,
                    &mut cfg.words,
                    &mut cfg.rules,
                    &mut cfg.models,
                ] {
                    if let Some(x) = f.as_mut() {
                        if x.is_relative() {
                            *x = base.join(&*x);
                        }
                    }
                }
                cfg
            }
            None => Config::default(),
        };
        if let Some(dir) = std::env::var_os(ASSETS_ENV) {
            cfg.assets = Some(PathBuf::from(dir));
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn asset(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.assets.as_ref().map(|d| d.join(name)))
    }

    fn check(&self) -> Result<()> {
        if let Some(d) = &self.assets {
            if !d.is_dir() {
                bail!("asset directory {} does not exist", d.display());
            }
        }
        for (p, name) in [
            (&self.verb_classes, "verb_classes.txt"),
            (&self.hypernyms, "hypernyms.txt"),
            (&self.words, "words.txt"),
            (&self.rules, "rules.txt"),
        ] {
            if let Some(p) = self.asset(p, name) {
                if !p.is_file() {
                    bail!("asset file {} does not exist", p.display());
                }
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> Result<Pipeline> {
        let files = [
            self.asset(&self.verb_classes, "verb_classes.txt"),
            self.asset(&self.hypernyms, "hypernyms.txt"),
            self.asset(&self.words, "words.txt"),
        ];
        let lexicon = match files {
            [None, None, None] => Lexicon::bundled(),
            [v, h, w] => {
                let read = |p: Option<PathBuf>, bundled: &str| -> Result<String> {
                    match p {
                        Some(p) => std::fs::read_to_string(&p)
                            .with_context(|| format!("reading {}", p.display())),
                        None => Ok(bundled.to_string()),
                    }
                };
                use mwp_core::lexicon::{BUNDLED_HYPERNYMS, BUNDLED_VERB_CLASSES, BUNDLED_WORDS};
                Lexicon::from_texts(
                    &read(v, BUNDLED_VERB_CLASSES)?,
                    &read(h, BUNDLED_HYPERNYMS)?,
                    &read(w, BUNDLED_WORDS)?,
                )?
            }
        };
        let rules = match self.asset(&self.rules, "rules.txt") {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading {}", p.display()))?;
                parse_rules(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => bundled_rules(),
        };
        let mut pipeline = Pipeline::new(lexicon, rules);
        pipeline.sti = self.sti;
        if let Some(b) = self.budget {
            pipeline.budget = b;
        }
        Ok(pipeline)
    }
}
