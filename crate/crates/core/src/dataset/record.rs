use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::scenario::{EventChain, RelationInstance, RelationKind};
use crate::verbalizer::{join_statements, Position, RenderedStatement, TemplateLibrary};

/// A statement as stored in dataset JSONL.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementRecord {
    pub kind: RelationKind,
    pub x: EventId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<EventId>,
    pub template: String,
    pub position: Position,
}

impl StatementRecord {
    pub fn relation(&self) -> RelationInstance {
        RelationInstance {
            kind: self.kind,
            x: self.x,
            y: self.y,
        }
    }

    /// `(first, second)` in text order for two-event statements.
    pub fn mention_order(&self) -> Option<(EventId, EventId)> {
        let y = self.y?;
        Some(if self.position == Position::Yx { (y, self.x) } else { (self.x, y) })
    }
}

impl From<&RenderedStatement> for StatementRecord {
    fn from(s: &RenderedStatement) -> Self {
        StatementRecord {
            kind: s.relation.kind,
            x: s.relation.x,
            y: s.relation.y,
            template: s.template_id.clone(),
            position: s.position,
        }
    }
}

/// One scenario: a JSONL line of the dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: u64,
    pub text: String,
    pub statements: Vec<StatementRecord>,
    pub chains: Vec<EventChain>,
    #[serde(default)]
    pub resamples: u32,
}

impl DatasetRecord {
    pub fn new(id: u64, chains: Vec<EventChain>, resamples: u32, rendered: &[RenderedStatement]) -> Self {
        DatasetRecord {
            id,
            text: join_statements(rendered.iter().map(|s| s.text.as_str())),
            statements: rendered.iter().map(StatementRecord::from).collect(),
            chains,
            resamples,
        }
    }

    pub fn push(&mut self, s: &RenderedStatement) {
        if let Some(stripped) = self.text.strip_suffix('.') {
            self.text.truncate(stripped.len());
            self.text.push_str(". ");
        }
        self.text.push_str(&s.text);
        self.text.push('.');
        self.statements.push(s.into());
    }

    pub fn mentions(&self, event: EventId) -> bool {
        self.statements
            .iter()
            .any(|s| s.x == event || s.y == Some(event))
    }

    /// Rebuilds the text from the structured statements.
    pub fn rerender(&self, library: &TemplateLibrary) -> Result<String> {
        let parts = self
            .statements
            .iter()
            .map(|s| {
                let t = library
                    .get(&s.template)
                    .ok_or_else(|| Error::Template(format!("unknown template `{}`", s.template)))?;
                if t.kind != s.kind.template_kind() || t.position != s.position {
                    return Err(Error::Template(format!("template `{}` does not fit {:?}", s.template, s)));
                }
                Ok(t.fill(s.x, s.y))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(join_statements(parts.iter().map(String::as_str)))
    }
}
