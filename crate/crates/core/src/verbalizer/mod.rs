//! Template-based verbalization of relation facts, and the inverse parser.

mod parse;
mod template;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use parse::{canonical_relation, ParsedStatement, StatementParser};
pub use template::{Position, Slot, Template, TemplateChoice, TemplateKind, TemplateLibrary};

use crate::error::{Error, Result};
use crate::scenario::RelationInstance;

/// How a family picks between X-first and Y-first templates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionPolicy {
    Xy,
    Yx,
    /// Y-first with probability `p`.
    Mixed(f64),
}

impl Default for PositionPolicy {
    fn default() -> Self {
        PositionPolicy::Mixed(0.5)
    }
}

impl PositionPolicy {
    pub fn validate(self) -> Result<Self> {
        match self {
            PositionPolicy::Mixed(p) if !(0.0..=1.0).contains(&p) => {
                Err(Error::Config(format!("mixed position probability {p} outside [0, 1]")))
            }
            _ => Ok(self),
        }
    }

    /// Probability of a Y-first rendering.
    pub fn yx_probability(self) -> f64 {
        match self {
            PositionPolicy::Xy => 0.0,
            PositionPolicy::Yx => 1.0,
            PositionPolicy::Mixed(p) => p,
        }
    }

    // Mixed always consumes one uniform draw so that datasets built with
    // different p from the same seed stay coupled.
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Position {
        match self {
            PositionPolicy::Xy => Position::Xy,
            PositionPolicy::Yx => Position::Yx,
            PositionPolicy::Mixed(p) => {
                if rng.random::<f64>() < p {
                    Position::Yx
                } else {
                    Position::Xy
                }
            }
        }
    }
}

impl fmt::Display for PositionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionPolicy::Xy => f.write_str("xy"),
            PositionPolicy::Yx => f.write_str("yx"),
            PositionPolicy::Mixed(p) => write!(f, "mixed:{p}"),
        }
    }
}

impl FromStr for PositionPolicy {
    type Err = Error;

    /// `xy`, `yx`, `mixed` (p = 0.5) or `mixed:P`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(PositionPolicy::Xy),
            "yx" => Ok(PositionPolicy::Yx),
            "mixed" => Ok(PositionPolicy::default()),
            _ => {
                let p = s
                    .strip_prefix("mixed:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad position policy `{s}`")))?;
                PositionPolicy::Mixed(p).validate()
            }
        }
    }
}

/// Templates of one family together with a position policy.
#[derive(Clone, Debug)]
pub struct TemplateSet {
    kind: TemplateKind,
    policy: PositionPolicy,
    xy: Vec<Template>,
    yx: Vec<Template>,
    single: Vec<Template>,
}

/// One verbalized fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedStatement {
    pub relation: RelationInstance,
    pub template_id: String,
    pub position: Position,
    pub text: String,
}

impl TemplateSet {
    pub fn new(library: &TemplateLibrary, kind: TemplateKind, policy: PositionPolicy) -> Result<Self> {
        let policy = policy.validate()?;
        let pick = |p| library.of_kind(kind).filter(|t| t.position == p).cloned().collect::<Vec<_>>();
        let set = TemplateSet {
            kind,
            policy,
            xy: pick(Position::Xy),
            yx: pick(Position::Yx),
            single: pick(Position::X),
        };
        let missing = if kind.is_binary() {
            let p = policy.yx_probability();
            (p < 1.0 && set.xy.is_empty()) || (p > 0.0 && set.yx.is_empty())
        } else {
            set.single.is_empty()
        };
        if missing {
            return Err(Error::Template(format!(
                "library `{}` lacks {kind} templates for policy {policy}",
                library.name()
            )));
        }
        Ok(set)
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    pub fn policy(&self) -> PositionPolicy {
        self.policy
    }

    /// Draws the position, then a template uniformly within it.
    pub fn render<R: Rng + ?Sized>(&self, relation: &RelationInstance, rng: &mut R) -> Result<RenderedStatement> {
        if relation.kind.template_kind() != self.kind {
            return Err(Error::Template(format!(
                "{} relation given to {} templates",
                relation.kind, self.kind
            )));
        }
        let pool = if self.kind.is_binary() {
            match self.policy.draw(rng) {
                Position::Yx => &self.yx,
                _ => &self.xy,
            }
        } else {
            &self.single
        };
        let template = &pool[rng.random_range(0..pool.len())];
        Ok(RenderedStatement {
            relation: *relation,
            template_id: template.id.clone(),
            position: template.position,
            text: template.fill(relation.x, relation.y),
        })
    }
}

/// Renders whole scenarios with one template set per family.
#[derive(Clone, Debug)]
pub struct Verbalizer {
    sets: BTreeMap<TemplateKind, TemplateSet>,
}

impl Verbalizer {
    /// `policies` overrides the default `Mixed(0.5)` per family; families
    /// missing from the library are simply unavailable.
    pub fn new(
        library: &TemplateLibrary,
        policies: impl IntoIterator<Item = (TemplateKind, PositionPolicy)>,
    ) -> Result<Self> {
        let overrides: BTreeMap<_, _> = policies.into_iter().collect();
        let mut sets = BTreeMap::new();
        for kind in TemplateKind::ALL {
            if library.of_kind(kind).next().is_none() {
                if overrides.contains_key(&kind) {
                    return Err(Error::Template(format!("library `{}` has no {kind} templates", library.name())));
                }
                continue;
            }
            let policy = overrides.get(&kind).copied().unwrap_or_default();
            sets.insert(kind, TemplateSet::new(library, kind, policy)?);
        }
        Ok(Verbalizer { sets })
    }

    pub fn set(&self, kind: TemplateKind) -> Option<&TemplateSet> {
        self.sets.get(&kind)
    }

    pub fn render<R: Rng + ?Sized>(&self, relation: &RelationInstance, rng: &mut R) -> Result<RenderedStatement> {
        let kind = relation.kind.template_kind();
        self.sets
            .get(&kind)
            .ok_or_else(|| Error::Template(format!("no {kind} templates loaded")))?
            .render(relation, rng)
    }

    pub fn render_all<R: Rng + ?Sized>(
        &self,
        relations: &[RelationInstance],
        rng: &mut R,
    ) -> Result<Vec<RenderedStatement>> {
        relations.iter().map(|r| self.render(r, rng)).collect()
    }
}

/// Joins statements into one passage: `"a. b."`; empty input gives `""`.
pub fn join_statements<'a>(statements: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for s in statements {
        if !out.is_empty() {
            out.push_str(". ");
        }
        out.push_str(s);
    }
    if !out.is_empty() {
        out.push('.');
    }
    out
}

/// Splits a passage produced by [`join_statements`].
pub fn split_statements(text: &str) -> Vec<&str> {
    let text = text.trim();
    let text = text.strip_suffix('.').unwrap_or(text);
    if text.is_empty() {
        return Vec::new();
    }
    text.split(". ").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EventId;
    use crate::rng;
    use crate::scenario::RelationKind;

    fn ev(i: u32) -> EventId {
        EventId::new(i).unwrap()
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("xy".parse::<PositionPolicy>().unwrap(), PositionPolicy::Xy);
        assert_eq!("mixed".parse::<PositionPolicy>().unwrap(), PositionPolicy::Mixed(0.5));
        assert_eq!("mixed:0.25".parse::<PositionPolicy>().unwrap(), PositionPolicy::Mixed(0.25));
        assert!("mixed:1.5".parse::<PositionPolicy>().is_err());
        assert!("zx".parse::<PositionPolicy>().is_err());
        let json = serde_json::to_string(&PositionPolicy::Mixed(0.3)).unwrap();
        assert_eq!(json, r#"{"mixed":0.3}"#);
    }

    #[test]
    fn fixed_policies_pin_the_position() {
        let lib = TemplateLibrary::canonical();
        let rel = RelationInstance::binary(RelationKind::Temporal, ev(3), ev(7)).unwrap();
        let mut r = rng::stream(1, 0);
        for (policy, want) in [(PositionPolicy::Xy, Position::Xy), (PositionPolicy::Yx, Position::Yx)] {
            let set = TemplateSet::new(&lib, TemplateKind::Temporal, policy).unwrap();
            for _ in 0..50 {
                let s = set.render(&rel, &mut r).unwrap();
                assert_eq!(s.position, want);
                let first = if want == Position::Xy { "event3" } else { "event7" };
                assert!(s.text.starts_with(first), "{}", s.text);
            }
        }
    }

    #[test]
    fn mixed_policy_hits_its_rate() {
        let lib = TemplateLibrary::canonical();
        let rel = RelationInstance::binary(RelationKind::SpatialPos, ev(1), ev(2)).unwrap();
        let mut r = rng::stream(9, 0);
        for p in [0.1, 0.5, 0.8] {
            let set = TemplateSet::new(&lib, TemplateKind::SpatialPos, PositionPolicy::Mixed(p)).unwrap();
            let n = 10_000;
            let yx = (0..n)
                .filter(|_| set.render(&rel, &mut r).unwrap().position == Position::Yx)
                .count();
            assert!((yx as f64 / n as f64 - p).abs() <= 0.02, "p={p} got {yx}");
        }
    }

    #[test]
    fn mismatched_family_is_an_error() {
        let lib = TemplateLibrary::canonical();
        let set = TemplateSet::new(&lib, TemplateKind::Temporal, PositionPolicy::Xy).unwrap();
        let rel = RelationInstance::binary(RelationKind::CfPos, ev(1), ev(2)).unwrap();
        assert!(set.render(&rel, &mut rng::stream(0, 0)).is_err());
    }

    #[test]
    fn occurrence_ignores_policy() {
        let lib = TemplateLibrary::canonical();
        let v = Verbalizer::new(&lib, [(TemplateKind::Occurrence, PositionPolicy::Yx)]).unwrap();
        let s = v.render(&RelationInstance::occurrence(ev(5)), &mut rng::stream(0, 0)).unwrap();
        assert_eq!(s.text, "event5 happened");
    }

    #[test]
    fn joining_and_splitting() {
        assert_eq!(join_statements([]), "");
        assert_eq!(join_statements(["a b", "c"]), "a b. c.");
        assert_eq!(split_statements("a b. c."), vec!["a b", "c"]);
        assert!(split_statements("").is_empty());
    }
}
