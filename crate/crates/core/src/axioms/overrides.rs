//! Rule override files:
//!
//! ```text
//! rule WeakWill default (> (weak bush) (not (veto bush hb1711)))
//! rule PracticalSyllogism default abducible(0,1) (> (and (W A ?phi) ...) ...)
//! ```
//!
//! An antecedent conjunct `(unless f)` becomes an `unless` clause.

use crate::engine::DefaultRule;
use crate::logic::{formula_from_sexp, sexpr::read_all, Sexp};

use super::AxiomError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Override {
    pub rule: DefaultRule,
    pub line: usize,
}

fn err(s: &Sexp, message: impl Into<String>) -> AxiomError {
    AxiomError::Override { line: s.pos().line, message: message.into() }
}

pub fn parse_overrides(text: &str) -> Result<Vec<Override>, AxiomError> {
    let items = read_all(text)?;
    let mut at = 0;
    let mut out = Vec::new();
    while at < items.len() {
        if items[at].as_sym() != Some("rule") {
            return Err(err(&items[at], "expected `rule`"));
        }
        let keyword = &items[at];
        at += 1;
        out.push(parse_rule_clause(&items, &mut at, keyword)?);
    }
    Ok(out)
}

/// Reads `<name> hard|default [abducible(i,...)] <formula>` from `items[*at..]`.
pub(crate) fn parse_rule_clause(items: &[Sexp], at: &mut usize, keyword: &Sexp) -> Result<Override, AxiomError> {
    let mut next = |what: &str| -> Result<&Sexp, AxiomError> {
        let s = items.get(*at).ok_or_else(|| err(keyword, format!("missing {what}")))?;
        *at += 1;
        Ok(s)
    };
    let name_sexp = next("rule name")?;
    let name = name_sexp.as_sym().ok_or_else(|| err(name_sexp, "rule name must be a symbol"))?.to_string();
    let kind = next("hard or default")?;
    let hard = match kind.as_sym() {
        Some("hard") => true,
        Some("default") => false,
        _ => return Err(err(kind, "expected `hard` or `default`")),
    };
    let mut abducible = Vec::new();
    let mut body = next("rule formula")?;
    if body.as_sym() == Some("abducible") {
        let list = next("abducible indices")?;
        let parts = list.as_list().ok_or_else(|| err(list, "expected abducible(<indices>)"))?;
        for p in parts {
            let text = p.as_sym().ok_or_else(|| err(p, "abducible index must be a number"))?;
            for piece in text.split(',').filter(|s| !s.is_empty()) {
                abducible.push(piece.parse::<usize>().map_err(|_| err(p, format!("bad abducible index {piece}")))?);
            }
        }
        body = next("rule formula")?;
    }
    let rule = rule_from_sexp(&name, body, hard)?.with_abducible(abducible)?;
    Ok(Override { rule, line: keyword.pos().line })
}

/// Builds a rule from `(> A B)`, `(-> A B)` or a generic, pulling
/// `(unless f)` conjuncts out of `A`.
pub fn rule_from_sexp(name: &str, sexp: &Sexp, hard: bool) -> Result<DefaultRule, AxiomError> {
    if let (Some(head @ (">" | "->")), Some([_, ante, cons])) = (sexp.head(), sexp.as_list()) {
        let conjuncts: Vec<&Sexp> = match (ante.head(), ante.as_list()) {
            (Some("and"), Some(items)) => items[1..].iter().collect(),
            _ => vec![ante],
        };
        let mut antecedent = Vec::new();
        let mut unless = Vec::new();
        for c in conjuncts {
            match (c.head(), c.as_list()) {
                (Some("unless"), Some([_, f])) => unless.push(formula_from_sexp(f)?),
                (Some("unless"), _) => return Err(err(c, "unless takes one formula")),
                _ => antecedent.push(formula_from_sexp(c)?),
            }
        }
        if head == "->" && !hard || head == ">" && hard {
            return Err(err(sexp, format!("rule {name}: use `>` for default rules and `->` for hard ones")));
        }
        let consequent = formula_from_sexp(cons)?;
        let rule = if hard {
            DefaultRule::hard(name, antecedent, consequent)?
        } else {
            DefaultRule::new(name, antecedent, consequent)?
        };
        return Ok(rule.with_unless(unless)?);
    }
    Ok(DefaultRule::from_formula(name, &formula_from_sexp(sexp)?, hard)?)
}
