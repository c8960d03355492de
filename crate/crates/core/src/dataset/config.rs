use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::RelationMix;
use crate::verbalizer::{PositionPolicy, TemplateChoice, TemplateKind};

pub const DEFAULT_SCENARIOS: u64 = 40_000;
pub const DEFAULT_TRAIN: u64 = 36_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub train: u64,
    pub validation: u64,
}

/// Position policy per relation group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Positions {
    pub temporal: PositionPolicy,
    /// Both spatial polarities.
    pub spatial: PositionPolicy,
    /// Both counterfactual polarities.
    pub counterfactual: PositionPolicy,
    /// Injected explicit causal and non-causal statements.
    pub explicit: PositionPolicy,
}

impl Positions {
    pub fn policies(&self) -> Vec<(TemplateKind, PositionPolicy)> {
        vec![
            (TemplateKind::Temporal, self.temporal),
            (TemplateKind::SpatialPos, self.spatial),
            (TemplateKind::SpatialNeg, self.spatial),
            (TemplateKind::CfPos, self.counterfactual),
            (TemplateKind::CfNeg, self.counterfactual),
            (TemplateKind::Causal, self.explicit),
            (TemplateKind::NotCausal, self.explicit),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Augmentation {
    /// Fraction of causal edges that receive explicit statements.
    pub seen_fraction: f64,
    pub statements_per_edge: u32,
    /// Unrelated pairs that receive an explicit non-causal statement;
    /// defaults to the number of causal edges.
    pub unrelated_pairs: Option<usize>,
}

impl Default for Augmentation {
    fn default() -> Self {
        Augmentation {
            seen_fraction: 0.5,
            statements_per_edge: 1,
            unrelated_pairs: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: Option<String>,
    pub seed: u64,
    pub num_scenarios: u64,
    /// Defaults to a 90/10 split of `num_scenarios`.
    pub split: Option<Split>,
    pub relations: RelationMix,
    pub positions: Positions,
    pub augmentation: Option<Augmentation>,
    pub templates: TemplateChoice,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            name: None,
            seed: 0,
            num_scenarios: DEFAULT_SCENARIOS,
            split: None,
            relations: RelationMix::default(),
            positions: Positions::default(),
            augmentation: None,
            templates: TemplateChoice::default(),
        }
    }
}

/// Named dataset variants accepted by [`DatasetConfig::preset`].
pub const PRESETS: &[&str] = &[
    "temporal-xy",
    "temporal-yx",
    "temporal",
    "spatial",
    "counterfactual",
    "all",
    "all-explicit",
    "sweep-P",
];

impl DatasetConfig {
    /// `temporal-xy`, `temporal-yx`, `temporal`, `spatial`, `counterfactual`,
    /// `all`, `all-explicit`, or `sweep-P` (temporal facts, Y-first with
    /// probability P).
    pub fn preset(name: &str) -> Result<Self> {
        let mut cfg = DatasetConfig {
            name: Some(name.to_string()),
            ..Default::default()
        };
        match name {
            "temporal-xy" | "temporal-yx" | "temporal" => {
                cfg.relations = RelationMix::only(true, false, false);
                cfg.positions.temporal = match name {
                    "temporal-xy" => PositionPolicy::Xy,
                    "temporal-yx" => PositionPolicy::Yx,
                    _ => PositionPolicy::Mixed(0.5),
                };
            }
            "spatial" => cfg.relations = RelationMix::only(false, true, false),
            "counterfactual" => cfg.relations = RelationMix::only(false, false, true),
            "all" => {}
            "all-explicit" => cfg.augmentation = Some(Augmentation::default()),
            _ => {
                let p: f64 = name
                    .strip_prefix("sweep-")
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| {
                        Error::Config(format!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")))
                    })?;
                cfg.relations = RelationMix::only(true, false, false);
                cfg.positions.temporal = PositionPolicy::Mixed(p).validate()?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let cfg: DatasetConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scenarios(mut self, n: u64) -> Self {
        self.num_scenarios = n;
        self.split = None;
        self
    }

    pub fn split(&self) -> Split {
        self.split.unwrap_or_else(|| {
            let train = if self.num_scenarios == DEFAULT_SCENARIOS {
                DEFAULT_TRAIN
            } else {
                self.num_scenarios - self.num_scenarios / 10
            };
            Split {
                train,
                validation: self.num_scenarios - train,
            }
        })
    }

    /// Hard errors; see [`DatasetConfig::warnings`] for soft ones.
    pub fn validate(&self) -> Result<()> {
        let split = self.split();
        if split.train.checked_add(split.validation) != Some(self.num_scenarios) {
            return Err(Error::Config(format!(
                "split {}+{} does not sum to {} scenarios",
                split.train, split.validation, self.num_scenarios
            )));
        }
        for (_, p) in self.positions.policies() {
            p.validate()?;
        }
        if let Some(a) = &self.augmentation {
            if !(0.0..=1.0).contains(&a.seen_fraction) {
                return Err(Error::Config(format!("seen_fraction {} outside [0, 1]", a.seen_fraction)));
            }
        }
        Ok(())
    }

    /// Settings that are legal but probably not what was intended.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let d = PositionPolicy::default();
        let unused = [
            ("temporal", self.relations.temporal, self.positions.temporal),
            ("spatial", self.relations.spatial, self.positions.spatial),
            ("counterfactual", self.relations.counterfactual, self.positions.counterfactual),
            ("explicit", self.augmentation.is_some(), self.positions.explicit),
        ];
        for (group, enabled, policy) in unused {
            if !enabled && policy != d {
                out.push(format!("{group} position policy {policy} is ignored: {group} statements are disabled"));
            }
        }
        let only_temporal = self.relations.temporal && !self.relations.spatial && !self.relations.counterfactual;
        let name = self.name.as_deref().unwrap_or("");
        if only_temporal && (name.ends_with("-xy") || name.ends_with("-yx")) {
            if let PositionPolicy::Mixed(_) = self.positions.temporal {
                out.push(format!(
                    "`{name}` studies a fixed mention order but temporal statements use {}",
                    self.positions.temporal
                ));
            }
        }
        if self.augmentation.is_some() && self.split().train == 0 && self.num_scenarios > 0 {
            out.push("explicit statements go to training scenarios, but the train split is empty".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let cfg = DatasetConfig::default();
        assert_eq!(cfg.split(), Split { train: 36_000, validation: 4_000 });
        cfg.validate().unwrap();
        assert_eq!(
            DatasetConfig::default().with_scenarios(1000).split(),
            Split { train: 900, validation: 100 }
        );
    }

    #[test]
    fn presets() {
        let xy = DatasetConfig::preset("temporal-xy").unwrap();
        assert_eq!(xy.positions.temporal, PositionPolicy::Xy);
        assert!(!xy.relations.spatial);
        let sweep = DatasetConfig::preset("sweep-0.3").unwrap();
        assert_eq!(sweep.positions.temporal, PositionPolicy::Mixed(0.3));
        assert!(DatasetConfig::preset("sweep-2").is_err());
        assert!(DatasetConfig::preset("nope").is_err());
    }

    #[test]
    fn validation_and_warnings() {
        let mut cfg = DatasetConfig::default();
        cfg.split = Some(Split { train: 10, validation: 10 });
        assert!(cfg.validate().is_err());

        let mut cfg = DatasetConfig::default();
        cfg.augmentation = Some(Augmentation {
            seen_fraction: 1.5,
            ..Default::default()
        });
        assert!(cfg.validate().is_err());

        let mut cfg = DatasetConfig::preset("temporal-xy").unwrap();
        cfg.positions.temporal = PositionPolicy::Mixed(0.2);
        cfg.positions.spatial = PositionPolicy::Xy;
        assert_eq!(cfg.warnings().len(), 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_json_accepts_partial_input() {
        let cfg: DatasetConfig = serde_json::from_str(
            r#"{"seed": 3, "num_scenarios": 10, "positions": {"temporal": "xy"}, "augmentation": {}}"#,
        )
        .unwrap();
        assert_eq!(cfg.split(), Split { train: 9, validation: 1 });
        assert_eq!(cfg.positions.temporal, PositionPolicy::Xy);
        assert_eq!(cfg.augmentation.unwrap().seen_fraction, 0.5);
        assert!(serde_json::from_str::<DatasetConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
