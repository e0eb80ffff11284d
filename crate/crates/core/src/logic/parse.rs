use super::ast::{Atom, Formula, Sort, Term};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("sort error at byte {pos}: products are not part of the integer language")]
    Sort { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

fn read_sexp(text: &str) -> Result<Sexp, ParseError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() {
            if bytes[*i].is_ascii_whitespace() {
                *i += 1;
            } else if bytes[*i] == b';' {
                while *i < bytes.len() && bytes[*i] != b'\n' {
                    *i += 1;
                }
            } else {
                break;
            }
        }
    };
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![];
    let mut done: Option<Sexp> = None;
    loop {
        skip_ws(&mut i);
        if i >= bytes.len() {
            break;
        }
        if done.is_some() {
            return Err(syntax(i, "trailing input after formula"));
        }
        match bytes[i] {
            b'(' => {
                stack.push((vec![], i));
                i += 1;
            }
            b')' => {
                let (items, start) = stack.pop().ok_or_else(|| syntax(i, "unbalanced ')'"))?;
                i += 1;
                let node = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => done = Some(node),
                }
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                let node = Sexp::Atom(text[start..i].to_string(), start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => done = Some(node),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return Err(syntax(start, "unclosed '('"));
    }
    done.ok_or_else(|| syntax(0, "empty input"))
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn parse_term(s: &Sexp, sort: Sort) -> Result<Term, ParseError> {
    match s {
        Sexp::Atom(a, p) => {
            if let Ok(k) = a.parse::<i64>() {
                Ok(Term::num(k))
            } else if is_ident(a) {
                Ok(Term::Var(a.clone()))
            } else {
                Err(syntax(*p, format!("bad term {a:?}")))
            }
        }
        Sexp::List(items, p) => {
            let head = match items.first() {
                Some(Sexp::Atom(h, _)) => h.as_str(),
                _ => return Err(syntax(*p, "term list must start with an operator")),
            };
            let arity = |n: usize| {
                if items.len() == n + 1 {
                    Ok(())
                } else {
                    Err(syntax(*p, format!("'{head}' takes {n} arguments")))
                }
            };
            match head {
                "+" | "-" | "**" => {
                    arity(2)?;
                    if head == "**" && sort == Sort::Integer {
                        return Err(ParseError::Sort { pos: *p });
                    }
                    let a = parse_term(&items[1], sort)?;
                    let b = parse_term(&items[2], sort)?;
                    Ok(match head {
                        "+" => Term::add(a, b),
                        "-" => Term::sub(a, b),
                        _ => Term::mul(a, b),
                    })
                }
                "*" => {
                    arity(2)?;
                    let k = match &items[1] {
                        Sexp::Atom(k, kp) => k.parse::<i64>().map_err(|_| syntax(*kp, "scalar must be an integer literal"))?,
                        other => return Err(syntax(other.pos(), "scalar must be an integer literal")),
                    };
                    Ok(Term::scale(k, parse_term(&items[2], sort)?))
                }
                _ => Err(syntax(*p, format!("unknown term operator {head:?}"))),
            }
        }
    }
}

fn parse_vars(s: &Sexp) -> Result<Vec<String>, ParseError> {
    match s {
        Sexp::List(items, p) => {
            if items.is_empty() {
                return Err(syntax(*p, "empty variable list"));
            }
            items
                .iter()
                .map(|v| match v {
                    Sexp::Atom(a, _) if is_ident(a) => Ok(a.clone()),
                    other => Err(syntax(other.pos(), "expected a variable name")),
                })
                .collect()
        }
        Sexp::Atom(_, p) => Err(syntax(*p, "expected a parenthesised variable list")),
    }
}

fn parse_formula(s: &Sexp, sort: Sort) -> Result<Formula, ParseError> {
    let (items, p) = match s {
        Sexp::List(items, p) => (items, *p),
        Sexp::Atom(a, p) => return Err(syntax(*p, format!("expected a formula, found {a:?}"))),
    };
    let head = match items.first() {
        Some(Sexp::Atom(h, _)) => h.as_str(),
        _ => return Err(syntax(p, "formula must start with a keyword")),
    };
    let args = &items[1..];
    let two_terms = || -> Result<(Term, Term), ParseError> {
        if args.len() != 2 {
            return Err(syntax(p, format!("'{head}' takes two terms")));
        }
        Ok((parse_term(&args[0], sort)?, parse_term(&args[1], sort)?))
    };
    match head {
        "=" => two_terms().map(|(a, b)| Formula::eq(a, b)),
        "div" => two_terms().map(|(a, b)| Formula::divides(a, b)),
        "!=" => two_terms().map(|(a, b)| Formula::neq(a, b)),
        "pred" => {
            let name = match args.first() {
                Some(Sexp::Atom(n, _)) if is_ident(n) => n.clone(),
                _ => return Err(syntax(p, "pred needs a name")),
            };
            let ts = args[1..].iter().map(|t| parse_term(t, sort)).collect::<Result<_, _>>()?;
            Ok(Formula::Atom(Atom::Pred(name, ts)))
        }
        "and" | "or" => {
            let fs = args.iter().map(|f| parse_formula(f, sort)).collect::<Result<Vec<_>, _>>()?;
            Ok(if head == "and" { Formula::And(fs) } else { Formula::Or(fs) })
        }
        "not" => {
            if args.len() != 1 {
                return Err(syntax(p, "'not' takes one formula"));
            }
            Ok(Formula::not(parse_formula(&args[0], sort)?))
        }
        "E" | "A" => {
            if args.len() != 2 {
                return Err(syntax(p, format!("'{head}' takes a variable list and a formula")));
            }
            let vs = parse_vars(&args[0])?;
            let body = Box::new(parse_formula(&args[1], sort)?);
            Ok(if head == "E" { Formula::Exists(vs, body) } else { Formula::Forall(vs, body) })
        }
        _ => Err(syntax(p, format!("unknown formula keyword {head:?}"))),
    }
}

/// Parses the prefix syntax and alpha-normalises bound variables.
pub fn parse(text: &str, sort: Sort) -> Result<Formula, ParseError> {
    let s = read_sexp(text)?;
    Ok(parse_formula(&s, sort)?.alpha_normalize())
}

pub fn parse_term_text(text: &str, sort: Sort) -> Result<Term, ParseError> {
    parse_term(&read_sexp(text)?, sort)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Zero => write!(f, "0"),
            Term::One => write!(f, "1"),
            Term::Scale(k, t) if **t == Term::One && *k != 0 && *k != 1 => write!(f, "{k}"),
            Term::Scale(k, t) => write!(f, "(* {k} {t})"),
            Term::Add(a, b) => write!(f, "(+ {a} {b})"),
            Term::Sub(a, b) => write!(f, "(- {a} {b})"),
            Term::Mul(a, b) => write!(f, "(** {a} {b})"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, items: &[Formula]) -> fmt::Result {
    write!(f, "({head}")?;
    for i in items {
        write!(f, " {i}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(Atom::Eq(a, b)) => write!(f, "(= {a} {b})"),
            Formula::Atom(Atom::Divides(a, b)) => write!(f, "(div {a} {b})"),
            Formula::Atom(Atom::NotEq(a, b)) => write!(f, "(!= {a} {b})"),
            Formula::Atom(Atom::Pred(n, ts)) => {
                write!(f, "(pred {n}")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Formula::And(fs) => write_list(f, "and", fs),
            Formula::Or(fs) => write_list(f, "or", fs),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::Exists(vs, g) => write!(f, "(E ({}) {g})", vs.join(" ")),
            Formula::Forall(vs, g) => write!(f, "(A ({}) {g})", vs.join(" ")),
        }
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text, Sort::Ring).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(parse("(div x y)", Sort::Integer).unwrap(), Formula::divides(Term::var("x"), Term::var("y")));
        let lcm = "(A (d) (or (not (and (div x d) (div (+ x 1) d))) (div L d)))";
        let f = parse(lcm, Sort::Integer).unwrap();
        assert!(matches!(f, Formula::Forall(ref vs, _) if vs == &vec!["d".to_string()]));
        assert_eq!(f.to_string(), lcm);
        assert!(matches!(parse("(= (** x y) 1)", Sort::Integer), Err(ParseError::Sort { .. })));
        assert!(parse("(= (** x y) 1)", Sort::Ring).is_ok());
    }

    #[test]
    fn errors_carry_positions() {
        match parse("(and (= x 1) (foo y))", Sort::Integer) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 13),
            other => panic!("{other:?}"),
        }
        assert!(parse("(= x 1", Sort::Integer).is_err());
        assert!(parse("(= x 1))", Sort::Integer).is_err());
        assert!(parse("(E () (= x 1))", Sort::Integer).is_err());
    }

    #[test]
    fn numerals_and_renaming() {
        let f = parse("(= x (* -3 (+ y 7)))", Sort::Integer).unwrap();
        assert_eq!(f.to_string(), "(= x (* -3 (+ y 7)))");
        let g = parse("(and (= x 1) (E (x) (= x 2)))", Sort::Integer).unwrap();
        assert_eq!(g.to_string(), "(and (= x 1) (E (x_1) (= x_1 2)))");
        assert_eq!(parse(&g.to_string(), Sort::Integer).unwrap(), g);
    }
}
