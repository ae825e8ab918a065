use std::fmt::Write;

use crate::logic::Formula;

use super::pipeline::{Entry, RunReport};

/// The human-readable trace: one block per utterance, then the attitude
/// stores of every context.
pub fn explain(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", r.scenario);
    for u in &r.utterances {
        match &u.site {
            Some(site) => {
                let _ = writeln!(out, "utterance {} at {site}", u.label);
            }
            None => {
                let _ = writeln!(out, "{}", if u.label.starts_with("done ") { u.label.clone() } else { format!("utterance {}", u.label) });
            }
        }
        let mut n = 0;
        for e in &u.log {
            match e {
                Entry::Step(s) => {
                    n += 1;
                    let _ = writeln!(out, "  {}", s.line(n));
                }
                Entry::Note(text) => {
                    let _ = writeln!(out, "  {text}");
                }
            }
        }
        if !u.relations.is_empty() {
            let rels: Vec<String> = u.relations.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "  attached {}", rels.join(", "));
        }
    }
    if !r.utterances.is_empty() {
        let _ = writeln!(out, "attitudes");
        for path in r.kb.paths() {
            let attitudes: Vec<&Formula> =
                r.kb.store(path).facts.iter().filter(|f| is_attitude(f)).collect();
            if attitudes.is_empty() {
                continue;
            }
            let _ = writeln!(out, "  {path}");
            for f in attitudes {
                let _ = writeln!(out, "    {f}");
            }
        }
        let _ = writeln!(out, "verdict {}", r.verdict);
    }
    out
}

fn is_attitude(f: &Formula) -> bool {
    match f {
        Formula::Att { .. } => true,
        Formula::Not(inner) => matches!(**inner, Formula::Att { .. }),
        _ => false,
    }
}

/// A structured block for `--report`: verdict, structure, root facts and
/// expectation results.
pub fn report_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", r.scenario);
    let _ = writeln!(out, "verdict {}", r.verdict);
    out.push_str(&r.sdrs.to_string());
    for path in r.kb.paths() {
        let store = r.kb.store(path);
        for f in &store.facts {
            let _ = writeln!(out, "fact {path} {f}");
        }
    }
    for e in &r.expectations {
        let _ = writeln!(out, "expect {} line {}: {}", if e.met { "met" } else { "FAILED" }, e.line, e.text);
    }
    let _ = writeln!(out, "exit {}", r.exit_code());
    out
}
