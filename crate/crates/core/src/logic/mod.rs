//! First-order formulas over Doors, Keys & Gems states, plus the one-level
//! `believes` wrapper used for statements about the agent.
//!
//! The concrete syntax is PDDL-style s-expressions:
//!
//! ```text
//! (believes player (exists (?k - key) (and (iscolor ?k red) (inside ?k box1))))
//! ```
//!
//! Symbols are case-insensitive and printed in lower case. `and`/`or` accept
//! two or more arguments and are folded right-associatively into binary nodes.

mod eval;
mod parse;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::world::{BoxId, ColorId, GemId, GridMap, KeyId};

pub use eval::{
    evaluate, evaluate_closed, tautology_check_smallmodel, Binding, Classification,
    DEFAULT_ENUMERATION_CAP,
};
pub use parse::{parse, parse_formula, parse_statement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown {kind} '{name}'")]
    Name { kind: &'static str, name: String },
    #[error("variable '{0}' is not bound by any enclosing quantifier")]
    Scope(String),
    #[error("variable '{0}' has no value in the binding")]
    UnboundVariable(String),
    #[error("hypothesis space has {size} states, above the enumeration cap of {cap}")]
    HypothesisSpaceTooLarge { size: String, cap: usize },
    #[error("expected a believes-statement, found a bare formula")]
    NotAStatement,
}

pub type Result<T> = std::result::Result<T, LogicError>;

/// Object types that quantifiers may range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectType {
    Key,
    Box,
    Color,
    Gem,
}

impl ObjectType {
    pub const ALL: [ObjectType; 4] = [
        ObjectType::Key,
        ObjectType::Box,
        ObjectType::Color,
        ObjectType::Gem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectType::Key => "key",
            ObjectType::Box => "box",
            ObjectType::Color => "color",
            ObjectType::Gem => "gem",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Predicate registry. Adding a predicate means adding a variant here plus
/// its semantics in the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `(iscolor ?k ?c)`: key `?k` has color `?c`.
    IsColor,
    /// `(inside ?k ?b)`: key `?k` is in box `?b`.
    Inside,
    /// `(empty ?b)`: box `?b` holds nothing.
    Empty,
}

impl Predicate {
    pub const ALL: [Predicate; 3] = [Predicate::IsColor, Predicate::Inside, Predicate::Empty];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::IsColor => "iscolor",
            Predicate::Inside => "inside",
            Predicate::Empty => "empty",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Predicate::IsColor | Predicate::Inside => 2,
            Predicate::Empty => 1,
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(String),
    /// Variable name including the leading `?`.
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Predicate, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, ObjectType, Box<Formula>),
    Forall(String, ObjectType, Box<Formula>),
}

impl Formula {
    pub fn atom(p: Predicate, args: &[&str]) -> Formula {
        let terms = args
            .iter()
            .map(|a| {
                if a.starts_with('?') {
                    Term::Var(a.to_string())
                } else {
                    Term::Const(a.to_string())
                }
            })
            .collect();
        Formula::Atom(p, terms)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, ty: ObjectType, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), ty, Box::new(body))
    }

    pub fn forall(var: &str, ty: ObjectType, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), ty, Box::new(body))
    }

    /// Variables occurring free in the formula, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Atom(_, args) => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) && !out.contains(v) {
                                out.push(v.clone());
                            }
                        }
                    }
                }
                Formula::Not(a) => walk(a, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
                    bound.push(v.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p, args) => {
                write!(f, "({}", p.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Exists(v, t, body) => write!(f, "(exists ({v} - {}) {body})", t.name()),
            Formula::Forall(v, t, body) => write!(f, "(forall ({v} - {}) {body})", t.name()),
        }
    }
}

/// `(believes <agent> <formula>)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpistemicStatement {
    pub agent: String,
    pub body: Formula,
}

impl EpistemicStatement {
    /// The same attribution with its body negated.
    pub fn negated(&self) -> EpistemicStatement {
        EpistemicStatement {
            agent: self.agent.clone(),
            body: Formula::not(self.body.clone()),
        }
    }
}

impl fmt::Display for EpistemicStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(believes {} {})", self.agent, self.body)
    }
}

/// Result of parsing text that may or may not carry a `believes` wrapper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Statement(EpistemicStatement),
    Formula(Formula),
}

impl fmt::Display for Parsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parsed::Statement(s) => s.fmt(f),
            Parsed::Formula(x) => x.fmt(f),
        }
    }
}

/// Canonical printed form.
pub fn print(p: &Parsed) -> String {
    p.to_string()
}

/// A resolved object of the model universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Object {
    Key(KeyId),
    Box(BoxId),
    Color(ColorId),
    Gem(GemId),
}

impl Object {
    pub fn object_type(self) -> ObjectType {
        match self {
            Object::Key(_) => ObjectType::Key,
            Object::Box(_) => ObjectType::Box,
            Object::Color(_) => ObjectType::Color,
            Object::Gem(_) => ObjectType::Gem,
        }
    }
}

/// Typed object universe of one scenario.
#[derive(Debug, Clone)]
pub struct ModelSignature {
    agents: Vec<String>,
    names: HashMap<String, Object>,
    by_type: HashMap<ObjectType, Vec<(String, Object)>>,
    key_colors: Vec<ColorId>,
}

impl ModelSignature {
    /// Extracts every key (including potential box keys), box, color and gem
    /// from `map`. Names are lower-cased.
    pub fn from_map(map: &GridMap, agents: &[&str]) -> Self {
        let mut sig = ModelSignature {
            agents: agents.iter().map(|a| a.to_ascii_lowercase()).collect(),
            names: HashMap::new(),
            by_type: ObjectType::ALL.iter().map(|t| (*t, Vec::new())).collect(),
            key_colors: map.keys().iter().map(|k| k.color).collect(),
        };
        for (i, k) in map.keys().iter().enumerate() {
            sig.insert(&k.id, Object::Key(KeyId(i)));
        }
        for (i, b) in map.boxes().iter().enumerate() {
            sig.insert(&b.id, Object::Box(BoxId(i)));
        }
        for (i, c) in map.colors().iter().enumerate() {
            sig.insert(c, Object::Color(ColorId(i)));
        }
        for (i, g) in map.gems().iter().enumerate() {
            sig.insert(&g.id, Object::Gem(GemId(i)));
        }
        sig
    }

    fn insert(&mut self, name: &str, obj: Object) {
        let name = name.to_ascii_lowercase();
        self.names.insert(name.clone(), obj);
        self.by_type
            .get_mut(&obj.object_type())
            .expect("all types present")
            .push((name, obj));
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn has_agent(&self, name: &str) -> bool {
        self.agents.iter().any(|a| a == name)
    }

    pub fn lookup(&self, name: &str) -> Option<Object> {
        self.names.get(name).copied()
    }

    pub fn objects_of(&self, ty: ObjectType) -> &[(String, Object)] {
        &self.by_type[&ty]
    }

    pub fn key_color(&self, k: KeyId) -> ColorId {
        self.key_colors[k.0]
    }
}
