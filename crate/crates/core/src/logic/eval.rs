use super::{Formula, LogicError, ModelSignature, Object, ObjectType, Predicate, Result, Term};
use crate::world::{ContentSpace, GridMap, KeyLoc, WorldState};

/// Default cap on exhaustive enumeration of content assignments.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Variable assignment. Later bindings shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Binding {
    slots: Vec<(String, Object)>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `var` (with its `?`) to the object called `object`.
    pub fn bind(&mut self, var: &str, object: &str, sig: &ModelSignature) -> Result<()> {
        let obj = sig.lookup(object).ok_or_else(|| LogicError::Name {
            kind: "object",
            name: object.to_string(),
        })?;
        self.slots.push((var.to_string(), obj));
        Ok(())
    }

    fn get(&self, var: &str) -> Option<Object> {
        self.slots
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, o)| *o)
    }
}

/// Truth of `f` in `state`. Quantifiers range over the signature's objects of
/// the bound type; for keys only those present in this world instance count.
pub fn evaluate(
    f: &Formula,
    state: &WorldState,
    sig: &ModelSignature,
    binding: &Binding,
) -> Result<bool> {
    let mut scratch = binding.clone();
    eval(f, state, sig, &mut scratch)
}

/// Evaluates a closed formula.
pub fn evaluate_closed(f: &Formula, state: &WorldState, sig: &ModelSignature) -> Result<bool> {
    eval(f, state, sig, &mut Binding::new())
}

fn resolve(t: &Term, sig: &ModelSignature, b: &Binding) -> Result<Object> {
    match t {
        Term::Const(name) => sig.lookup(name).ok_or_else(|| LogicError::Name {
            kind: "object",
            name: name.clone(),
        }),
        Term::Var(v) => b
            .get(v)
            .ok_or_else(|| LogicError::UnboundVariable(v.clone())),
    }
}

fn eval(f: &Formula, state: &WorldState, sig: &ModelSignature, b: &mut Binding) -> Result<bool> {
    match f {
        Formula::Atom(p, args) => {
            let objs = args
                .iter()
                .map(|t| resolve(t, sig, b))
                .collect::<Result<Vec<_>>>()?;
            Ok(atom(*p, &objs, state, sig))
        }
        Formula::Not(a) => Ok(!eval(a, state, sig, b)?),
        Formula::And(x, y) => Ok(eval(x, state, sig, b)? && eval(y, state, sig, b)?),
        Formula::Or(x, y) => Ok(eval(x, state, sig, b)? || eval(y, state, sig, b)?),
        Formula::Exists(v, ty, body) => quantify(v, *ty, body, state, sig, b, true),
        Formula::Forall(v, ty, body) => quantify(v, *ty, body, state, sig, b, false),
    }
}

fn quantify(
    var: &str,
    ty: ObjectType,
    body: &Formula,
    state: &WorldState,
    sig: &ModelSignature,
    b: &mut Binding,
    existential: bool,
) -> Result<bool> {
    for (_, obj) in sig.objects_of(ty) {
        if let Object::Key(k) = obj {
            if !state.key_present(*k) {
                continue;
            }
        }
        b.slots.push((var.to_string(), *obj));
        let r = eval(body, state, sig, b);
        b.slots.pop();
        if r? == existential {
            return Ok(existential);
        }
    }
    Ok(!existential)
}

/// Ill-typed arguments make an atom false rather than an error.
fn atom(p: Predicate, args: &[Object], state: &WorldState, sig: &ModelSignature) -> bool {
    match (p, args) {
        (Predicate::IsColor, [Object::Key(k), Object::Color(c)]) => {
            state.key_present(*k) && sig.key_color(*k) == *c
        }
        (Predicate::Inside, [Object::Key(k), Object::Box(bx)]) => {
            state.key_loc(*k) == KeyLoc::InBox(*bx)
        }
        (Predicate::Empty, [Object::Box(bx)]) => state.box_contents(*bx).is_none(),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    AlwaysTrue,
    AlwaysFalse,
    Contingent,
}

/// Classifies a closed formula by evaluating it in every initial state of
/// `space`.
pub fn tautology_check_smallmodel(
    f: &Formula,
    sig: &ModelSignature,
    map: &GridMap,
    space: &ContentSpace,
    cap: usize,
) -> Result<Classification> {
    match space.len() {
        Some(n) if n <= cap => {}
        Some(n) => {
            return Err(LogicError::HypothesisSpaceTooLarge {
                size: n.to_string(),
                cap,
            })
        }
        None => {
            return Err(LogicError::HypothesisSpaceTooLarge {
                size: "overflow".into(),
                cap,
            })
        }
    }
    let (mut seen_true, mut seen_false) = (false, false);
    for state in space.states(map) {
        let state = state.map_err(|e| LogicError::Name {
            kind: "box content",
            name: e.to_string(),
        })?;
        if evaluate_closed(f, &state, sig)? {
            seen_true = true;
        } else {
            seen_false = true;
        }
        if seen_true && seen_false {
            return Ok(Classification::Contingent);
        }
    }
    Ok(match (seen_true, seen_false) {
        (true, false) => Classification::AlwaysTrue,
        (false, true) => Classification::AlwaysFalse,
        // An empty space satisfies every formula vacuously.
        _ => Classification::AlwaysTrue,
    })
}
