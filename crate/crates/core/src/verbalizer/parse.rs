use regex::{Regex, RegexSet};
use serde::{Deserialize, Serialize};

use super::template::{Segment, Slot, Template, TemplateKind, TemplateLibrary};
use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::scenario::{RelationInstance, RelationKind};

const EVENT: &str = r"event([1-9][0-9]*)";

/// A statement mapped back to its family and arguments. Symmetric families
/// report their arguments in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedStatement {
    pub kind: TemplateKind,
    pub template_id: String,
    pub x: EventId,
    pub y: Option<EventId>,
    /// Event mentioned first in the text.
    pub first: EventId,
}

impl ParsedStatement {
    /// The training relation this statement expresses, if any.
    pub fn relation(&self) -> Option<RelationInstance> {
        let kind = match self.kind {
            TemplateKind::Temporal => RelationKind::Temporal,
            TemplateKind::SpatialPos => RelationKind::SpatialPos,
            TemplateKind::SpatialNeg => RelationKind::SpatialNeg,
            TemplateKind::CfPos => RelationKind::CfPos,
            TemplateKind::CfNeg => RelationKind::CfNeg,
            TemplateKind::Occurrence => return Some(RelationInstance::occurrence(self.x)),
            TemplateKind::Causal => RelationKind::ExplicitCausal,
            TemplateKind::NotCausal => RelationKind::ExplicitNotCausal,
            TemplateKind::NoRelation | TemplateKind::Unrelated => return None,
        };
        Some(RelationInstance {
            kind,
            x: self.x,
            y: self.y,
        })
    }
}

/// Puts a relation into the form the parser reports.
pub fn canonical_relation(mut rel: RelationInstance) -> RelationInstance {
    if rel.kind.template_kind().is_symmetric() {
        if let Some(y) = rel.y {
            if y < rel.x {
                rel.y = Some(rel.x);
                rel.x = y;
            }
        }
    }
    rel
}

struct Compiled {
    template: Template,
    regex: Regex,
    slots: Vec<Slot>,
}

/// Recovers `(family, X, Y)` from rendered statements.
pub struct StatementParser {
    set: RegexSet,
    compiled: Vec<Compiled>,
}

impl StatementParser {
    pub fn new(library: &TemplateLibrary) -> Result<Self> {
        let mut compiled = Vec::new();
        for t in library.templates() {
            let mut pattern = String::from("^");
            let mut slots = Vec::new();
            for seg in &t.segments {
                match seg {
                    Segment::Text(text) => pattern.push_str(&regex::escape(text)),
                    Segment::Slot(s) => {
                        pattern.push_str(EVENT);
                        slots.push(*s);
                    }
                }
            }
            pattern.push('$');
            let regex = Regex::new(&pattern).map_err(|e| Error::Template(e.to_string()))?;
            compiled.push(Compiled {
                template: t.clone(),
                regex,
                slots,
            });
        }
        let set = RegexSet::new(compiled.iter().map(|c| c.regex.as_str()))
            .map_err(|e| Error::Template(e.to_string()))?;
        Ok(StatementParser { set, compiled })
    }

    /// Parses one statement (no trailing period). Errors when nothing
    /// matches or when matching templates disagree on the meaning.
    pub fn parse(&self, statement: &str) -> Result<ParsedStatement> {
        let mut found: Option<ParsedStatement> = None;
        for i in self.set.matches(statement).iter() {
            let Some(p) = self.extract(&self.compiled[i], statement) else {
                continue;
            };
            match &found {
                None => found = Some(p),
                Some(prev) if prev.kind == p.kind && prev.x == p.x && prev.y == p.y => {}
                Some(prev) => {
                    return Err(Error::Template(format!(
                        "`{statement}` is ambiguous between `{}` and `{}`",
                        prev.template_id, p.template_id
                    )))
                }
            }
        }
        found.ok_or_else(|| Error::Template(format!("no template matches `{statement}`")))
    }

    fn extract(&self, c: &Compiled, statement: &str) -> Option<ParsedStatement> {
        let caps = c.regex.captures(statement)?;
        let (mut x, mut y) = (None, None);
        let mut first = None;
        for (slot, m) in c.slots.iter().zip(caps.iter().skip(1)) {
            let id = EventId::new(m?.as_str().parse().ok()?).ok()?;
            first.get_or_insert(id);
            let target = match slot {
                Slot::X => &mut x,
                Slot::Y => &mut y,
            };
            match target {
                Some(prev) if *prev != id => return None,
                _ => *target = Some(id),
            }
        }
        let mut x = x?;
        if let Some(yy) = y {
            if yy == x {
                return None;
            }
            if c.template.kind.is_symmetric() && yy < x {
                y = Some(x);
                x = yy;
            }
        }
        Some(ParsedStatement {
            kind: c.template.kind,
            template_id: c.template.id.clone(),
            x,
            y,
            first: first?,
        })
    }
}
