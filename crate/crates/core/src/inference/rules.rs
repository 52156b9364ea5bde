//! Rule DSL.
//!
//! One rule per line, optionally named:
//!
//! ```text
//! pay: quan(?q,?u,?o) & verb(?q,buy) & nsubj(?q,?a) & price(?o,?p) => quan($q,dollar,#)=quan(?q,?u,?o)*?p & verb($q,pay) & nsubj($q,?a)
//! ```
//!
//! Lines starting with `#` are comments. Value expressions use `+ - * /`
//! (or `×`, `÷`), parentheses, numbers, bound `?vars` and references to
//! the value of an antecedent fact.

use std::collections::BTreeSet;
use std::fmt;

use crate::logicform::{parse_atom, split_top, Fact, ParseError, Term};
use crate::number::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Value),
    Var(String),
    /// Value of the fact matching this (substituted) atom.
    FactValue(Fact),
    Bin(char, Box<Expr>, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "?{v}"),
            Expr::FactValue(a) => write!(f, "{}", a.head_string()),
            Expr::Bin(op, a, b) => {
                let wrap = |e: &Expr, f: &mut fmt::Formatter<'_>| match e {
                    Expr::Bin(..) => write!(f, "({e})"),
                    _ => write!(f, "{e}"),
                };
                wrap(a, f)?;
                write!(f, "{op}")?;
                wrap(b, f)
            }
        }
    }
}

impl Expr {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::FactValue(a) => out.extend(pattern_vars(a)),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

struct ExprParser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn peek(&mut self) -> Option<char> {
        self.s[self.pos..].trim_start().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let rest = &self.s[self.pos..];
        let ws = rest.len() - rest.trim_start().len();
        self.pos += ws;
        let c = self.s[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn op(c: char) -> Option<char> {
        match c {
            '+' | '-' => Some(c),
            '*' | '×' => Some('*'),
            '/' | '÷' => Some('/'),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self
            .peek()
            .and_then(Self::op)
            .filter(|o| matches!(o, '+' | '-'))
        {
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        while let Some(op) = self
            .peek()
            .and_then(Self::op)
            .filter(|o| matches!(o, '*' | '/'))
        {
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.atom()?));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let src = self.s;
        let err = |m: &str| ParseError(format!("{m} in expression `{src}`"));
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(err("missing `)`"));
                }
                Ok(e)
            }
            Some('?') => {
                self.bump();
                let name = self.word();
                if name.is_empty() {
                    return Err(err("empty variable"));
                }
                Ok(Expr::Var(name))
            }
            Some(c) if c.is_ascii_digit() => {
                let w = self.word();
                w.parse::<Value>()
                    .map(Expr::Num)
                    .map_err(|_| err("bad number"))
            }
            Some(c) if c.is_alphabetic() => {
                let start =
                    self.pos + (self.s[self.pos..].len() - self.s[self.pos..].trim_start().len());
                let name = self.word();
                if self.peek() != Some('(') {
                    return Err(err(&format!("expected `(` after `{name}`")));
                }
                let mut depth = 0;
                loop {
                    match self.bump() {
                        Some('(') => depth += 1,
                        Some(')') => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        Some(_) => {}
                        None => return Err(err("unbalanced parentheses")),
                    }
                }
                let (pred, args, _) = parse_atom(&self.s[start..self.pos])?;
                Ok(Expr::FactValue(Fact::pattern(&pred, args)))
            }
            _ => Err(err("expected a value")),
        }
    }

    fn word(&mut self) -> String {
        let rest = &self.s[self.pos..];
        let rest_trim = rest.trim_start();
        self.pos += rest.len() - rest_trim.len();
        let len = rest_trim
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '.'))
            .unwrap_or(rest_trim.len());
        self.pos += len;
        rest_trim[..len].to_string()
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, ParseError> {
    let mut p = ExprParser { s, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(ParseError(format!("trailing input in expression `{s}`")));
    }
    Ok(e)
}

/// A consequent fact template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub pred: String,
    pub args: Vec<Term>,
    pub value: Option<Expr>,
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            Fact::pattern(&self.pred, self.args.clone()).head_string()
        )?;
        if let Some(v) = &self.value {
            write!(f, "={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRule {
    pub name: String,
    pub antecedent: Vec<Fact>,
    pub consequent: Vec<Template>,
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.antecedent.iter().map(Fact::to_string).collect();
        let c: Vec<String> = self.consequent.iter().map(Template::to_string).collect();
        write!(f, "{}: {} => {}", self.name, a.join(" & "), c.join(" & "))
    }
}

pub(crate) fn pattern_vars(f: &Fact) -> impl Iterator<Item = String> + '_ {
    f.args.iter().filter_map(|t| match t {
        Term::Var(v) => Some(v.clone()),
        _ => None,
    })
}

impl InferenceRule {
    pub fn parse(line: &str, default_name: &str) -> Result<InferenceRule, ParseError> {
        let (lhs, rhs) = line
            .split_once("=>")
            .ok_or_else(|| ParseError(format!("rule without `=>`: `{line}`")))?;
        let (name, lhs) = match lhs.split_once(':') {
            Some((n, rest)) if !n.contains('(') => (n.trim().to_string(), rest),
            _ => (default_name.to_string(), lhs),
        };
        let antecedent: Vec<Fact> = split_top(lhs, '&')
            .into_iter()
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        if antecedent
            .iter()
            .any(|f| f.args.iter().any(|t| matches!(t, Term::Fresh(_))))
        {
            return Err(ParseError(format!(
                "rule `{name}`: fresh variable in antecedent"
            )));
        }
        let mut consequent = Vec::new();
        for part in split_top(rhs, '&') {
            let (pred, args, value) = parse_atom(part)?;
            let value = value.map(parse_expr).transpose()?;
            consequent.push(Template { pred, args, value });
        }
        let rule = InferenceRule {
            name,
            antecedent,
            consequent,
        };
        rule.check()?;
        Ok(rule)
    }

    /// Every consequent variable is bound by the antecedent or fresh.
    fn check(&self) -> Result<(), ParseError> {
        let bound: BTreeSet<String> = self.antecedent.iter().flat_map(pattern_vars).collect();
        for t in &self.consequent {
            let mut used: BTreeSet<String> = t
                .args
                .iter()
                .filter_map(|a| match a {
                    Term::Var(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            if let Some(v) = &t.value {
                v.vars(&mut used);
            }
            if let Some(v) = used.difference(&bound).next() {
                return Err(ParseError(format!(
                    "rule `{}`: unbound variable ?{v}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_rules(text: &str) -> Result<Vec<InferenceRule>, ParseError> {
    let mut rules = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rule = InferenceRule::parse(line, &format!("rule{}", rules.len() + 1))
            .map_err(|e| ParseError(format!("line {}: {}", n + 1, e.0)))?;
        rules.push(rule);
    }
    Ok(rules)
}

pub const BUNDLED_RULES: &str = include_str!("../../assets/rules.txt");

pub fn bundled_rules() -> Vec<InferenceRule> {
    parse_rules(BUNDLED_RULES).expect("bundled rules parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_precedence() {
        let e = parse_expr("1 + 2 * 3").unwrap();
        assert_eq!(e.to_string(), "1+(2*3)");
        let e = parse_expr("quan(?q,?u,?o)×?p").unwrap();
        assert!(matches!(e, Expr::Bin('*', _, _)));
        assert!(parse_expr("1 +").is_err());
    }

    #[test]
    fn unbound_consequent_variable_rejected() {
        let err = InferenceRule::parse("verb(?q,buy) => verb(?x,pay)", "r").unwrap_err();
        assert!(err.0.contains("?x"), "{err}");
    }

    #[test]
    fn bundled_rules_parse() {
        let rules = bundled_rules();
        assert!(rules.iter().any(|r| r.name == "pay"));
        assert!(rules.iter().any(|r| r.name == "receive"));
    }
}
