use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::scenario::RelationKind;

const CANONICAL: &str = include_str!("../../resources/templates.tsv");
const VERBATIM: &str = include_str!("../../resources/templates_verbatim.tsv");

/// Template families. Training relations map onto the first six; the
/// remaining four verbalize evaluation options.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Temporal,
    SpatialPos,
    SpatialNeg,
    CfPos,
    CfNeg,
    Occurrence,
    /// X → Y
    Causal,
    /// X ↛ Y
    NotCausal,
    /// X ↮ Y
    NoRelation,
    /// Neutral "X is related to Y" probe.
    Unrelated,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 10] = [
        TemplateKind::Temporal,
        TemplateKind::SpatialPos,
        TemplateKind::SpatialNeg,
        TemplateKind::CfPos,
        TemplateKind::CfNeg,
        TemplateKind::Occurrence,
        TemplateKind::Causal,
        TemplateKind::NotCausal,
        TemplateKind::NoRelation,
        TemplateKind::Unrelated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::Temporal => "temporal",
            TemplateKind::SpatialPos => "spatial_pos",
            TemplateKind::SpatialNeg => "spatial_neg",
            TemplateKind::CfPos => "cf_pos",
            TemplateKind::CfNeg => "cf_neg",
            TemplateKind::Occurrence => "occurrence",
            TemplateKind::Causal => "causal",
            TemplateKind::NotCausal => "not_causal",
            TemplateKind::NoRelation => "no_relation",
            TemplateKind::Unrelated => "unrelated",
        }
    }

    /// Families scored by the harness; their templates must end in an
    /// event mention.
    pub fn is_evaluation(self) -> bool {
        matches!(
            self,
            TemplateKind::Causal | TemplateKind::NotCausal | TemplateKind::NoRelation | TemplateKind::Unrelated
        )
    }

    /// Families whose meaning does not change when the arguments swap.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            TemplateKind::SpatialPos | TemplateKind::SpatialNeg | TemplateKind::NoRelation | TemplateKind::Unrelated
        )
    }

    pub fn is_binary(self) -> bool {
        self != TemplateKind::Occurrence
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TemplateKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Template(format!("unknown template kind `{s}`")))
    }
}

impl RelationKind {
    /// Family used to verbalize this relation.
    pub fn template_kind(self) -> TemplateKind {
        match self {
            RelationKind::Temporal => TemplateKind::Temporal,
            RelationKind::SpatialPos => TemplateKind::SpatialPos,
            RelationKind::SpatialNeg => TemplateKind::SpatialNeg,
            RelationKind::CfPos => TemplateKind::CfPos,
            RelationKind::CfNeg => TemplateKind::CfNeg,
            RelationKind::Occurrence => TemplateKind::Occurrence,
            RelationKind::ExplicitCausal => TemplateKind::Causal,
            RelationKind::ExplicitNotCausal => TemplateKind::NotCausal,
        }
    }
}

/// Which argument a sentence mentions first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Xy,
    Yx,
    /// One-event templates.
    X,
}

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::Xy => "xy",
            Position::Yx => "yx",
            Position::X => "x",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Position::Xy),
            "yx" => Ok(Position::Yx),
            "x" => Ok(Position::X),
            _ => Err(Error::Template(format!("unknown position `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Segment {
    Text(String),
    Slot(Slot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub kind: TemplateKind,
    pub position: Position,
    pub pattern: String,
    pub(crate) segments: Vec<Segment>,
}

impl Template {
    pub fn new(kind: TemplateKind, id: &str, position: Position, pattern: &str) -> Result<Self> {
        let ctx = |msg: String| Error::Template(format!("template `{id}`: {msg}"));
        if id.is_empty() {
            return Err(Error::Template("empty template id".into()));
        }
        let segments = split_pattern(pattern).map_err(ctx)?;
        let slots: Vec<Slot> = segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(slot) => Some(*slot),
                Segment::Text(_) => None,
            })
            .collect();
        let has_y = slots.contains(&Slot::Y);
        let first = slots.first().copied();

        if !kind.is_binary() {
            if has_y || first.is_none() || position != Position::X {
                return Err(ctx("one-event templates use only {X} and position `x`".into()));
            }
        } else {
            if !has_y || !slots.contains(&Slot::X) {
                return Err(ctx("needs both {X} and {Y}".into()));
            }
            let expected = if first == Some(Slot::X) { Position::Xy } else { Position::Yx };
            if position != expected {
                return Err(ctx(format!("declared position {position} but mentions {expected}")));
            }
        }
        if kind.is_evaluation() {
            if slots.len() != 2 {
                return Err(ctx("evaluation templates mention each event once".into()));
            }
            if !matches!(segments.last(), Some(Segment::Slot(_))) {
                return Err(ctx("evaluation templates must end with an event mention".into()));
            }
        }
        Ok(Template {
            id: id.to_string(),
            kind,
            position,
            pattern: pattern.to_string(),
            segments,
        })
    }

    /// Substitutes event labels for the slots.
    pub fn fill(&self, x: EventId, y: Option<EventId>) -> String {
        let mut out = String::with_capacity(self.pattern.len() + 8);
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(Slot::X) => out.push_str(&x.label()),
                Segment::Slot(Slot::Y) => match y {
                    Some(y) => out.push_str(&y.label()),
                    None => out.push_str("{Y}"),
                },
            }
        }
        out
    }

    /// True when the rendered text ends with an event label.
    pub fn ends_with_mention(&self) -> bool {
        matches!(self.segments.last(), Some(Segment::Slot(_)))
    }

    /// Renders `(x, y)` and splits off the final event mention:
    /// `("event1 causally affects ", "event2")`.
    pub fn split_last_mention(&self, x: EventId, y: EventId) -> Result<(String, String)> {
        let last = match self.segments.last() {
            Some(Segment::Slot(Slot::X)) => x,
            Some(Segment::Slot(Slot::Y)) => y,
            _ => {
                return Err(Error::Template(format!(
                    "template `{}` does not end with an event mention",
                    self.id
                )))
            }
        };
        let mut text = self.fill(x, Some(y));
        let completion = last.label();
        text.truncate(text.len() - completion.len());
        Ok((text, completion))
    }
}

fn split_pattern(pattern: &str) -> std::result::Result<Vec<Segment>, String> {
    let mut segments = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            segments.push(Segment::Text(rest[..open].to_string()));
        }
        let slot = match rest[open..].get(..3) {
            Some("{X}") => Slot::X,
            Some("{Y}") => Slot::Y,
            _ => return Err(format!("bad placeholder in `{pattern}`")),
        };
        segments.push(Segment::Slot(slot));
        rest = &rest[open + 3..];
    }
    if rest.contains('}') {
        return Err(format!("stray `}}` in `{pattern}`"));
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest.to_string()));
    }
    Ok(segments)
}

/// Built-in template inventories.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateChoice {
    /// Counterfactual wording matching the generated examples.
    #[default]
    Canonical,
    /// Counterfactual wording exactly as listed in the original inventory.
    Verbatim,
}

/// Parsed template resource: tab-separated `kind, id, position, pattern`,
/// `#` comments and blank lines ignored.
#[derive(Clone, Debug)]
pub struct TemplateLibrary {
    name: String,
    sha256: String,
    templates: Vec<Template>,
    by_kind: BTreeMap<TemplateKind, Vec<usize>>,
}

impl TemplateLibrary {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut templates = Vec::new();
        let mut ids = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = |msg: &str| Error::Template(format!("{name}:{}: {msg}", lineno + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(ctx("expected 4 tab-separated columns"));
            }
            let kind: TemplateKind = cols[0].parse()?;
            let position: Position = cols[2].parse()?;
            let template = Template::new(kind, cols[1], position, cols[3])?;
            if !ids.insert(template.id.clone()) {
                return Err(ctx(&format!("duplicate template id `{}`", template.id)));
            }
            templates.push(template);
        }
        let mut by_kind: BTreeMap<TemplateKind, Vec<usize>> = BTreeMap::new();
        for (i, t) in templates.iter().enumerate() {
            by_kind.entry(t.kind).or_default().push(i);
        }
        Ok(TemplateLibrary {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            templates,
            by_kind,
        })
    }

    pub fn builtin(choice: TemplateChoice) -> Self {
        match choice {
            TemplateChoice::Canonical => Self::parse("canonical", CANONICAL),
            TemplateChoice::Verbatim => Self::parse("verbatim", VERBATIM),
        }
        .expect("built-in templates are valid")
    }

    pub fn canonical() -> Self {
        Self::builtin(TemplateChoice::Canonical)
    }

    pub fn verbatim() -> Self {
        Self::builtin(TemplateChoice::Verbatim)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Hex SHA-256 of the resource text.
    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn of_kind(&self, kind: TemplateKind) -> impl Iterator<Item = &Template> + '_ {
        self.by_kind
            .get(&kind)
            .into_iter()
            .flatten()
            .map(|&i| &self.templates[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(i: u32) -> EventId {
        EventId::new(i).unwrap()
    }

    #[test]
    fn builtin_inventory_sizes() {
        let lib = TemplateLibrary::canonical();
        let count = |k| lib.of_kind(k).count();
        let pos = |k, p| lib.of_kind(k).filter(|t| t.position == p).count();
        assert_eq!(pos(TemplateKind::Temporal, Position::Xy), 5);
        assert_eq!(pos(TemplateKind::Temporal, Position::Yx), 5);
        for k in [TemplateKind::SpatialPos, TemplateKind::SpatialNeg, TemplateKind::CfPos, TemplateKind::CfNeg] {
            assert_eq!(count(k), 6, "{k}");
        }
        assert_eq!(count(TemplateKind::Causal), 6);
        assert_eq!(count(TemplateKind::NotCausal), 6);
        assert_eq!(count(TemplateKind::NoRelation), 12);
        assert_eq!(count(TemplateKind::Unrelated), 6);
        assert_eq!(count(TemplateKind::Occurrence), 1);
        assert_ne!(lib.sha256(), TemplateLibrary::verbatim().sha256());
    }

    #[test]
    fn inventory_examples() {
        let lib = TemplateLibrary::canonical();
        let fill = |id: &str, x, y| lib.get(id).unwrap().fill(ev(x), Some(ev(y)));
        assert_eq!(fill("temporal.xy.1", 1, 2), "event1 preceded event2");
        assert_eq!(fill("temporal.yx.1", 1, 2), "event2 followed event1");
        assert_eq!(
            fill("spatial_neg.yx.2", 4, 96),
            "the location of event96 is not identical to that of event4"
        );
        assert_eq!(
            fill("cf_neg.xy.1", 76, 84),
            "if event76 did not happen, and event84 has no other causes, would event84 happen? yes"
        );
        assert_eq!(
            fill("cf_pos.yx.3", 84, 58),
            "if event58 has only one cause, and hypothetically event84 did not happen, would event58 still occur? no"
        );
        assert_eq!(lib.get("occurrence.x.1").unwrap().fill(ev(84), None), "event84 happened");
    }

    #[test]
    fn verbatim_keeps_original_counterfactual_wording() {
        let lib = TemplateLibrary::verbatim();
        assert_eq!(
            lib.get("cf_pos.xy.1").unwrap().pattern,
            "if {X} did not happen, and {Y} has no other causes, would {X} happen? no"
        );
    }

    #[test]
    fn evaluation_templates_end_with_a_mention() {
        let lib = TemplateLibrary::canonical();
        for t in lib.templates().iter().filter(|t| t.kind.is_evaluation()) {
            assert!(t.ends_with_mention(), "{}", t.id);
        }
        let t = lib.get("causal.xy.2").unwrap();
        assert_eq!(
            t.split_last_mention(ev(1), ev(2)).unwrap(),
            ("event1 causally affects ".to_string(), "event2".to_string())
        );
        let t = lib.get("causal.yx.3").unwrap();
        assert_eq!(
            t.split_last_mention(ev(1), ev(2)).unwrap(),
            ("event2 is caused by ".to_string(), "event1".to_string())
        );
    }

    #[test]
    fn malformed_resources_are_rejected() {
        let bad = [
            "causal\tc1\txy\t{X} can cause {Y} maybe",
            "causal\tc1\tyx\t{X} can cause {Y}",
            "causal\tc1\txy\t{X} can cause {Z}",
            "temporal\tt1\txy\t{X} preceded",
            "occurrence\to1\tx\t{X} and {Y}",
            "causal\tc1\txy",
            "nonsense\tc1\txy\t{X} {Y}",
            "causal\tc1\txy\t{X} can cause {Y}\ncausal\tc1\txy\t{X} causes {Y}",
        ];
        for text in bad {
            assert!(TemplateLibrary::parse("t", text).is_err(), "{text}");
        }
        assert!(TemplateLibrary::parse("t", "# c\n\ncausal\tc1\txy\t{X} can cause {Y}\n").is_ok());
    }
}
