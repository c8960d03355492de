use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::verbalizer::TemplateKind;

/// The five relations scored for an ordered pair `(X, Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalRelation {
    /// X → Y
    Causes,
    /// Y → X
    CausedBy,
    /// X ↛ Y
    NotCauses,
    /// Y ↛ X
    NotCausedBy,
    /// X ↮ Y
    NoRelation,
}

impl EvalRelation {
    pub const ALL: [EvalRelation; 5] = [
        EvalRelation::Causes,
        EvalRelation::CausedBy,
        EvalRelation::NotCauses,
        EvalRelation::NotCausedBy,
        EvalRelation::NoRelation,
    ];

    pub const THREE_WAY: [EvalRelation; 3] = [EvalRelation::Causes, EvalRelation::CausedBy, EvalRelation::NoRelation];
    pub const TWO_WAY: [EvalRelation; 2] = [EvalRelation::Causes, EvalRelation::NotCauses];

    pub fn family(self) -> TemplateKind {
        match self {
            EvalRelation::Causes | EvalRelation::CausedBy => TemplateKind::Causal,
            EvalRelation::NotCauses | EvalRelation::NotCausedBy => TemplateKind::NotCausal,
            EvalRelation::NoRelation => TemplateKind::NoRelation,
        }
    }

    /// Template slot arguments for the pair `(x, y)`.
    pub fn args(self, x: EventId, y: EventId) -> (EventId, EventId) {
        match self {
            EvalRelation::CausedBy | EvalRelation::NotCausedBy => (y, x),
            _ => (x, y),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            EvalRelation::Causes => "X→Y",
            EvalRelation::CausedBy => "Y→X",
            EvalRelation::NotCauses => "X↛Y",
            EvalRelation::NotCausedBy => "Y↛X",
            EvalRelation::NoRelation => "X↮Y",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EvalRelation::Causes => "causes",
            EvalRelation::CausedBy => "caused_by",
            EvalRelation::NotCauses => "not_causes",
            EvalRelation::NotCausedBy => "not_caused_by",
            EvalRelation::NoRelation => "no_relation",
        }
    }
}

impl fmt::Display for EvalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Which template positions an option is marginalized over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// Templates that mention the relation's first argument first.
    Xy,
    /// Templates that mention it second.
    Yx,
    /// Both, i.e. randomized event order.
    #[default]
    Both,
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Order::Xy),
            "yx" => Ok(Order::Yx),
            "both" | "random" => Ok(Order::Both),
            _ => Err(Error::InvalidArgument(format!("unknown order `{s}`"))),
        }
    }
}

/// One multiple-choice option: a relation, the template family that
/// verbalizes it, and the positions averaged over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OptionSpec {
    pub relation: EvalRelation,
    pub family: TemplateKind,
    pub order: Order,
}

impl OptionSpec {
    pub fn new(relation: EvalRelation, order: Order) -> Self {
        OptionSpec {
            relation,
            family: relation.family(),
            order,
        }
    }

    pub fn with_family(mut self, family: TemplateKind) -> Self {
        self.family = family;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    InferCausal,
    InferNocausal,
    InferNotcause,
    AltTwoWay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSetKind {
    Causal,
    Unrelated,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::InferCausal, Task::InferNocausal, Task::InferNotcause, Task::AltTwoWay];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::InferCausal => "infer_causal",
            Task::InferNocausal => "infer_nocausal",
            Task::InferNotcause => "infer_notcause",
            Task::AltTwoWay => "alt_two_way",
        }
    }

    /// Test sets a task may run on.
    pub fn sets(self) -> &'static [TestSetKind] {
        match self {
            Task::InferCausal | Task::AltTwoWay => &[TestSetKind::Causal],
            Task::InferNocausal => &[TestSetKind::Unrelated],
            Task::InferNotcause => &[TestSetKind::Causal, TestSetKind::Unrelated],
        }
    }

    /// `(options, target)`. For causal pairs, the non-causal deduction is
    /// that the effect does not cause its cause; for unrelated pairs, that
    /// X does not cause Y.
    pub fn spec(self, set: TestSetKind) -> Result<(Vec<EvalRelation>, EvalRelation)> {
        use EvalRelation::*;
        Ok(match (self, set) {
            (Task::InferCausal, TestSetKind::Causal) => (EvalRelation::THREE_WAY.to_vec(), Causes),
            (Task::InferNocausal, TestSetKind::Unrelated) => (EvalRelation::THREE_WAY.to_vec(), NoRelation),
            (Task::InferNotcause, TestSetKind::Causal) => (vec![CausedBy, NotCausedBy], NotCausedBy),
            (Task::InferNotcause, TestSetKind::Unrelated) => (EvalRelation::TWO_WAY.to_vec(), NotCauses),
            (Task::AltTwoWay, TestSetKind::Causal) => (EvalRelation::TWO_WAY.to_vec(), Causes),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "task {} does not run on the {set:?} test set",
                    self.as_str()
                )))
            }
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task `{s}`")))
    }
}

impl fmt::Display for TestSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestSetKind::Causal => "causal",
            TestSetKind::Unrelated => "unrelated",
        })
    }
}

impl FromStr for TestSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "causal" => Ok(TestSetKind::Causal),
            "unrelated" => Ok(TestSetKind::Unrelated),
            _ => Err(Error::InvalidArgument(format!("unknown test set `{s}`"))),
        }
    }
}
