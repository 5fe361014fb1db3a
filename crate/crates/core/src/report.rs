//! Line-oriented step reports.
//!
//! ```text
//! step 0
//!   belief kt: pw(on), tm(cold)
//!   kb kt: pw(on); tm(cold)
//! ```

use std::fmt::Write;

use crate::engine::{FullEquilibrium, Run};

pub fn format_step(step: usize, eq: &FullEquilibrium, contexts: &[String]) -> String {
    let mut out = format!("step {step}\n");
    for (i, name) in contexts.iter().enumerate() {
        let _ = writeln!(out, "{}", line("belief", name, &eq.state.sets()[i].to_string()));
    }
    for (i, name) in contexts.iter().enumerate() {
        let _ = writeln!(out, "{}", line("kb", name, &eq.kbs[i].to_string()));
    }
    out
}

fn line(kind: &str, name: &str, body: &str) -> String {
    if body.is_empty() {
        format!("  {kind} {name}:")
    } else {
        format!("  {kind} {name}: {body}")
    }
}

pub fn format_run(run: &Run, contexts: &[String]) -> String {
    run.steps
        .iter()
        .enumerate()
        .map(|(k, eq)| format_step(k, eq, contexts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BeliefState;
    use crate::kb::{parse_kb, BeliefSet};

    #[test]
    fn empty_components_have_no_trailing_space() {
        let eq = FullEquilibrium {
            state: BeliefState::new(vec![BeliefSet::new(), ["b".parse().unwrap(), "a".parse().unwrap()].into_iter().collect()]),
            kbs: vec![parse_kb("").unwrap(), parse_kb("a; b").unwrap()],
        };
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(
            format_step(3, &eq, &names),
            "step 3\n  belief x:\n  belief y: a, b\n  kb x:\n  kb y: a; b\n"
        );
    }
}
