use super::{
    EpistemicStatement, Formula, LogicError, ModelSignature, ObjectType, Parsed, Predicate,
    Result, Term,
};

#[derive(Debug)]
enum Sexp {
    Sym(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Sym(_, o) | Sexp::List(_, o) => *o,
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> LogicError {
    LogicError::Syntax {
        offset,
        message: message.into(),
    }
}

fn read(text: &str) -> Result<Sexp> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let mut chars = text.char_indices().peekable();

    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if done.is_some() {
            return Err(syntax(i, "trailing input after expression"));
        }
        match c {
            '(' => {
                chars.next();
                stack.push((Vec::new(), i));
            }
            ')' => {
                chars.next();
                let (items, start) = stack.pop().ok_or_else(|| syntax(i, "unbalanced ')'"))?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            _ => {
                let mut sym = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    sym.extend(c.to_lowercase());
                    chars.next();
                }
                let atom = Sexp::Sym(sym, i);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => done = Some(atom),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed '('"));
    }
    done.ok_or_else(|| syntax(text.len(), "empty input"))
}

struct Builder<'a> {
    sig: &'a ModelSignature,
    scope: Vec<String>,
}

impl Builder<'_> {
    fn formula(&mut self, e: &Sexp) -> Result<Formula> {
        let (items, at) = match e {
            Sexp::List(items, at) => (items, *at),
            Sexp::Sym(s, at) => return Err(syntax(*at, format!("expected '(', found '{s}'"))),
        };
        let (head, args) = match items.split_first() {
            Some((Sexp::Sym(h, _), rest)) => (h.as_str(), rest),
            Some((other, _)) => return Err(syntax(other.offset(), "operator must be a symbol")),
            None => return Err(syntax(at, "empty list")),
        };
        match head {
            "not" => {
                let [inner] = args else {
                    return Err(syntax(at, "'not' takes exactly one argument"));
                };
                Ok(Formula::not(self.formula(inner)?))
            }
            "and" | "or" => {
                if args.len() < 2 {
                    return Err(syntax(at, format!("'{head}' takes at least two arguments")));
                }
                let mut parts = args
                    .iter()
                    .map(|a| self.formula(a))
                    .collect::<Result<Vec<_>>>()?;
                let mut acc = parts.pop().expect("len >= 2");
                while let Some(next) = parts.pop() {
                    acc = if head == "and" {
                        Formula::and(next, acc)
                    } else {
                        Formula::or(next, acc)
                    };
                }
                Ok(acc)
            }
            "exists" | "forall" => {
                let [binder, body] = args else {
                    return Err(syntax(at, format!("'{head}' takes a binder and a body")));
                };
                let vars = self.binder(binder)?;
                let depth = self.scope.len();
                self.scope.extend(vars.iter().map(|(v, _)| v.clone()));
                let body = self.formula(body);
                self.scope.truncate(depth);
                let mut f = body?;
                for (v, ty) in vars.into_iter().rev() {
                    f = if head == "exists" {
                        Formula::Exists(v, ty, Box::new(f))
                    } else {
                        Formula::Forall(v, ty, Box::new(f))
                    };
                }
                Ok(f)
            }
            "believes" => Err(syntax(at, "nested 'believes' is not supported")),
            name => {
                let pred = Predicate::from_name(name).ok_or_else(|| LogicError::Name {
                    kind: "predicate",
                    name: name.to_string(),
                })?;
                if args.len() != pred.arity() {
                    return Err(syntax(
                        at,
                        format!("'{name}' expects {} argument(s), got {}", pred.arity(), args.len()),
                    ));
                }
                let terms = args.iter().map(|a| self.term(a)).collect::<Result<_>>()?;
                Ok(Formula::Atom(pred, terms))
            }
        }
    }

    /// `(?v - type)` or `(?a ?b - type)`.
    fn binder(&self, e: &Sexp) -> Result<Vec<(String, ObjectType)>> {
        let Sexp::List(items, at) = e else {
            return Err(syntax(e.offset(), "expected a binder list like (?v - type)"));
        };
        let syms: Vec<&str> = items
            .iter()
            .map(|i| match i {
                Sexp::Sym(s, _) => Ok(s.as_str()),
                Sexp::List(_, o) => Err(syntax(*o, "unexpected list in binder")),
            })
            .collect::<Result<_>>()?;
        let n = syms.len();
        if n < 3 || syms[n - 2] != "-" {
            return Err(syntax(*at, "binder must have the form (?v - type)"));
        }
        let ty = ObjectType::from_name(syms[n - 1]).ok_or_else(|| LogicError::Name {
            kind: "type",
            name: syms[n - 1].to_string(),
        })?;
        syms[..n - 2]
            .iter()
            .map(|v| {
                if v.len() > 1 && v.starts_with('?') {
                    Ok((v.to_string(), ty))
                } else {
                    Err(syntax(*at, format!("'{v}' is not a variable")))
                }
            })
            .collect()
    }

    fn term(&self, e: &Sexp) -> Result<Term> {
        let Sexp::Sym(s, at) = e else {
            return Err(syntax(e.offset(), "predicate arguments must be symbols"));
        };
        if s.starts_with('?') {
            if s.len() == 1 {
                return Err(syntax(*at, "empty variable name"));
            }
            if !self.scope.iter().any(|v| v == s) {
                return Err(LogicError::Scope(s.clone()));
            }
            Ok(Term::Var(s.clone()))
        } else if self.sig.lookup(s).is_some() {
            Ok(Term::Const(s.clone()))
        } else {
            Err(LogicError::Name {
                kind: "object",
                name: s.clone(),
            })
        }
    }
}

/// Parses either a bare formula or a `believes` statement.
pub fn parse(text: &str, sig: &ModelSignature) -> Result<Parsed> {
    let sexp = read(text)?;
    let mut b = Builder {
        sig,
        scope: Vec::new(),
    };
    if let Sexp::List(items, at) = &sexp {
        if let Some(Sexp::Sym(head, _)) = items.first() {
            if head == "believes" {
                let [_, agent, body] = items.as_slice() else {
                    return Err(syntax(*at, "'believes' takes an agent and a formula"));
                };
                let Sexp::Sym(agent, _) = agent else {
                    return Err(syntax(agent.offset(), "agent must be a symbol"));
                };
                if !sig.has_agent(agent) {
                    return Err(LogicError::Name {
                        kind: "agent",
                        name: agent.clone(),
                    });
                }
                let body = b.formula(body)?;
                return Ok(Parsed::Statement(EpistemicStatement {
                    agent: agent.clone(),
                    body,
                }));
            }
        }
    }
    Ok(Parsed::Formula(b.formula(&sexp)?))
}

pub fn parse_statement(text: &str, sig: &ModelSignature) -> Result<EpistemicStatement> {
    match parse(text, sig)? {
        Parsed::Statement(s) => Ok(s),
        Parsed::Formula(_) => Err(LogicError::NotAStatement),
    }
}

/// Parses a bare formula; a `believes` wrapper is rejected.
pub fn parse_formula(text: &str, sig: &ModelSignature) -> Result<Formula> {
    match parse(text, sig)? {
        Parsed::Formula(f) => Ok(f),
        Parsed::Statement(_) => Err(syntax(0, "expected a bare formula, found 'believes'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::print;
    use crate::world::{GridMap, Pos};

    fn sig() -> ModelSignature {
        let (mut map, _) = GridMap::from_ascii(
            &["#######", "#.....#", "#######"],
            vec!["red".into(), "blue".into()],
        );
        let b1 = map.add_box("box1", Pos::new(1, 1)).unwrap();
        let b2 = map.add_box("box2", Pos::new(2, 1)).unwrap();
        for b in [b1, b2] {
            map.add_box_key(b, "red").unwrap();
            map.add_box_key(b, "blue").unwrap();
        }
        map.add_gem("circle", "circle", Pos::new(5, 1)).unwrap();
        ModelSignature::from_map(&map, &["player"])
    }

    const RED_IN_BOX1: &str =
        "(believes player (exists (?k - key) (and (iscolor ?k red) (inside ?k box1))))";

    #[test]
    fn parses_believes_statement() {
        let s = parse_statement(RED_IN_BOX1, &sig()).unwrap();
        assert_eq!(s.agent, "player");
        let expected = Formula::exists(
            "?k",
            ObjectType::Key,
            Formula::and(
                Formula::atom(Predicate::IsColor, &["?k", "red"]),
                Formula::atom(Predicate::Inside, &["?k", "box1"]),
            ),
        );
        assert_eq!(s.body, expected);
        assert_eq!(s.to_string(), RED_IN_BOX1);
    }

    #[test]
    fn parses_single_atom() {
        let f = parse_formula("(empty box1)", &sig()).unwrap();
        assert_eq!(f, Formula::atom(Predicate::Empty, &["box1"]));
    }

    #[test]
    fn printing_atoms_and_negation() {
        let f = Formula::atom(Predicate::Empty, &["box2"]);
        assert_eq!(f.to_string(), "(empty box2)");
        assert_eq!(Formula::not(f).to_string(), "(not (empty box2))");
    }

    #[test]
    fn nary_connectives_fold_right() {
        let f = parse_formula("(or (empty box1) (empty box2) (not (empty box1)))", &sig()).unwrap();
        assert_eq!(
            f.to_string(),
            "(or (empty box1) (or (empty box2) (not (empty box1))))"
        );
    }

    #[test]
    fn case_and_whitespace_are_canonicalized() {
        let p = parse("  (BELIEVES Player\n (Empty BOX1) )", &sig()).unwrap();
        assert_eq!(print(&p), "(believes player (empty box1))");
    }

    #[test]
    fn multi_variable_binder_desugars() {
        let f = parse_formula(
            "(exists (?a ?b - box) (and (empty ?a) (not (empty ?b))))",
            &sig(),
        )
        .unwrap();
        assert_eq!(
            f.to_string(),
            "(exists (?a - box) (exists (?b - box) (and (empty ?a) (not (empty ?b)))))"
        );
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "",
            "(empty box1",
            "empty box1)",
            "(empty box1) (empty box2)",
            "(not)",
            "(and (empty box1))",
            "(exists ?k (empty box1))",
            "(exists (?k key) (empty box1))",
            "(empty box1 box2)",
            "(not (believes player (empty box1)))",
            "()",
        ] {
            assert!(
                matches!(parse(bad, &sig()), Err(LogicError::Syntax { .. })),
                "{bad:?} should be a syntax error, got {:?}",
                parse(bad, &sig())
            );
        }
    }

    #[test]
    fn name_errors() {
        let s = sig();
        assert!(matches!(parse("(full box1)", &s), Err(LogicError::Name { kind: "predicate", .. })));
        assert!(matches!(parse("(empty box9)", &s), Err(LogicError::Name { kind: "object", .. })));
        assert!(matches!(
            parse("(exists (?x - door) (empty box1))", &s),
            Err(LogicError::Name { kind: "type", .. })
        ));
        assert!(matches!(
            parse("(believes teacher (empty box1))", &s),
            Err(LogicError::Name { kind: "agent", .. })
        ));
    }

    #[test]
    fn scope_errors() {
        let s = sig();
        assert_eq!(parse("(empty ?b)", &s), Err(LogicError::Scope("?b".into())));
        assert_eq!(
            parse("(and (exists (?b - box) (empty ?b)) (empty ?b))", &s),
            Err(LogicError::Scope("?b".into()))
        );
    }

    #[test]
    fn statement_vs_formula_entry_points() {
        let s = sig();
        assert_eq!(parse_statement("(empty box1)", &s), Err(LogicError::NotAStatement));
        assert!(parse_formula("(believes player (empty box1))", &s).is_err());
    }
}
