//! Observation traces.
//!
//! ```text
//! obs 0
//!   tmp: 40
//!   pos: humanPos(kitchen)
//! end
//! obs 1
//! end
//! ```
//!
//! Sensors left out of a block read nothing at that step.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::ConfigError;
use crate::engine::{Observation, Sensor};
use crate::syntax::{end_position, tokenize, Cursor, Tok};
use crate::term::{term, Term};

fn is_word(cur: &Cursor<'_>, word: &str) -> bool {
    matches!(cur.peek(), Some(Tok::Ident(s)) if s == word)
}

pub fn parse_trace(text: &str, sensors: &[Sensor]) -> Result<Vec<Observation>, ConfigError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let mut trace = Vec::new();
    while !cur.at_end() {
        if !is_word(&cur, "obs") {
            return Err(cur.unexpected("`obs`").into());
        }
        cur.bump();
        let k = cur.int()?;
        if k != trace.len() as i64 {
            return Err(ConfigError::NonContiguous {
                expected: trace.len(),
                found: k.max(0) as usize,
            });
        }
        let step = trace.len();
        let mut readings = vec![BTreeSet::new(); sensors.len()];
        loop {
            if is_word(&cur, "end") && cur.peek_at(1) != Some(&Tok::Colon) {
                cur.bump();
                break;
            }
            if cur.eat(&Tok::Semi) {
                continue;
            }
            let name = cur.ident()?;
            let Some(s) = sensors.iter().position(|s| s.name == name) else {
                return Err(ConfigError::TraceSensor { step, sensor: name });
            };
            cur.expect(&Tok::Colon)?;
            let empty = match (cur.peek(), cur.peek_at(1)) {
                (Some(Tok::Ident(_)), Some(Tok::Colon)) | (Some(Tok::Semi), _) | (None, _) => true,
                (Some(Tok::Ident(w)), next) => w == "end" && next != Some(&Tok::LParen),
                _ => false,
            };
            if empty {
                continue;
            }
            loop {
                let t = term(&mut cur)?;
                if !sensors[s].accepts(&t) {
                    return Err(ConfigError::OutOfLanguage {
                        step,
                        sensor: name,
                        term: t.to_string(),
                    });
                }
                readings[s].insert(t);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        trace.push(Observation::new(readings));
    }
    Ok(trace)
}

/// Prints a trace so that [`parse_trace`] reads it back unchanged.
pub fn format_trace(trace: &[Observation], sensors: &[Sensor]) -> String {
    let mut out = String::new();
    for (k, obs) in trace.iter().enumerate() {
        let _ = writeln!(out, "obs {k}");
        for (s, r) in obs.readings().iter().enumerate() {
            if r.is_empty() {
                continue;
            }
            let items: Vec<String> = r.iter().map(Term::to_string).collect();
            let _ = writeln!(out, "  {}: {}", sensors[s].name, items.join(", "));
        }
        out.push_str("end\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{SensorLanguage, Signature};

    fn sensors() -> Vec<Sensor> {
        vec![
            Sensor::new("tmp", SensorLanguage::Integers),
            Sensor::new(
                "pos",
                SensorLanguage::Signatures(vec![Signature {
                    negated: false,
                    name: "humanPos".into(),
                    arity: 1,
                }]),
            ),
            Sensor::time("t"),
        ]
    }

    #[test]
    fn parse_and_print() {
        let text = "obs 0\n  tmp: 40, 41\n  pos: humanPos(kitchen)\nend\nobs 1\n  pos:\nend\nobs 2 tmp: -3 end\n";
        let trace = parse_trace(text, &sensors()).unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace[0].reading(0).unwrap().len(), 2);
        assert!(trace[1].readings().iter().all(BTreeSet::is_empty));
        assert_eq!(trace[2].reading(0).unwrap().iter().next(), Some(&Term::Int(-3)));
        let printed = format_trace(&trace, &sensors());
        assert_eq!(parse_trace(&printed, &sensors()).unwrap(), trace);
    }

    #[test]
    fn rejects_bad_traces() {
        let s = sensors();
        assert!(matches!(parse_trace("obs 1 end", &s), Err(ConfigError::NonContiguous { .. })));
        assert!(matches!(parse_trace("obs 0 tmp: hot end", &s), Err(ConfigError::OutOfLanguage { .. })));
        assert!(matches!(parse_trace("obs 0 pos: humanPos(a,b) end", &s), Err(ConfigError::OutOfLanguage { .. })));
        assert!(matches!(parse_trace("obs 0 zz: 1 end", &s), Err(ConfigError::TraceSensor { .. })));
        assert!(matches!(parse_trace("obs 0 tmp: 1", &s), Err(ConfigError::Parse(_))));
        assert_eq!(parse_trace("", &s).unwrap(), vec![]);
    }
}
