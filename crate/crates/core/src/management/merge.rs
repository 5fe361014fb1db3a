use std::collections::{BTreeMap, BTreeSet};

use super::{ManagementConfig, ManagementError};
use crate::kb::KnowledgeBase;
use crate::term::{Belief, Term};

/// A reading `b` observed at `time` by `source`, i.e. `add(b,time,source)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcedItem {
    pub belief: Belief,
    pub time: i64,
    pub source: String,
}

/// Adds sourced items source by source in ranking order. An item is kept
/// iff it conflicts with no item accepted from a higher-ranked source at the
/// same time point; the result is `kb` plus the kept items, time-tagged.
pub fn merge_prioritized_adds(
    items: &[SourcedItem],
    kb: &KnowledgeBase,
    cfg: &ManagementConfig,
) -> Result<KnowledgeBase, ManagementError> {
    let mut by_rank: BTreeMap<usize, BTreeSet<&SourcedItem>> = BTreeMap::new();
    for item in items {
        let rank = cfg
            .rank(&item.source)
            .ok_or_else(|| ManagementError::UnrankedSource(item.source.clone()))?;
        by_rank.entry(rank).or_default().insert(item);
    }
    let mut accepted: Vec<&SourcedItem> = Vec::new();
    for group in by_rank.values() {
        let group: Vec<&SourcedItem> = group.iter().copied().collect();
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if a.time == b.time && cfg.policy.conflicts(&a.belief, &b.belief) {
                    return Err(ManagementError::SourceConflict {
                        sensor: a.source.clone(),
                        a: a.belief.to_string(),
                        b: b.belief.to_string(),
                        time: a.time,
                    });
                }
            }
        }
        let fresh: Vec<&SourcedItem> = group
            .into_iter()
            .filter(|it| {
                !accepted
                    .iter()
                    .any(|acc| acc.time == it.time && cfg.policy.conflicts(&acc.belief, &it.belief))
            })
            .collect();
        accepted.extend(fresh);
    }
    let mut out = kb.clone();
    for item in accepted {
        out.insert_fact(item.belief.tagged(item.time));
    }
    Ok(out)
}

/// Reads `bf(b,t,s)` back into an item; `None` for facts of other shapes.
pub(super) fn buffer_item(f: &Belief, cfg: &ManagementConfig) -> Option<SourcedItem> {
    if f.is_negated() || f.predicate() != cfg.buffer || f.arity() != 3 {
        return None;
    }
    let [b, t, s] = f.args() else { return None };
    Some(SourcedItem {
        belief: Belief::from_term(b)?,
        time: t.as_int()?,
        source: match s {
            Term::Sym(s) => s.clone(),
            _ => return None,
        },
    })
}

/// Smallest declared window `win(p,x)` for predicate `p`.
fn window_of(kb: &KnowledgeBase, cfg: &ManagementConfig, predicate: &str) -> Option<i64> {
    kb.facts()
        .filter(|f| !f.is_negated() && f.predicate() == cfg.window && f.arity() == 2)
        .filter(|f| matches!(&f.args()[0], Term::Sym(p) if p == predicate))
        .filter_map(|f| f.args()[1].as_int())
        .min()
}

/// Empties the buffer and re-admits the entries still inside their window
/// (`t >= now - win(p)`) through the ranked merge. Entries whose predicate
/// has no window are kept.
pub fn restore_buffer(
    kb: &KnowledgeBase,
    cfg: &ManagementConfig,
    now: i64,
) -> Result<KnowledgeBase, ManagementError> {
    let mut items = Vec::new();
    for f in kb.facts().filter(|f| f.predicate() == cfg.buffer) {
        let item = buffer_item(f, cfg).ok_or_else(|| ManagementError::MalformedBuffer(f.to_string()))?;
        let fresh = match window_of(kb, cfg, item.belief.predicate()) {
            Some(w) => item.time >= now.saturating_sub(w),
            None => true,
        };
        if fresh {
            items.push(item);
        }
    }
    let mut rest = kb.clone();
    rest.retain_facts(|f| f.predicate() != cfg.buffer);
    merge_prioritized_adds(&items, &rest, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{ConsistencyPolicy, FunctionalDecl};
    use crate::kb::parse_kb;

    fn item(b: &str, time: i64, source: &str) -> SourcedItem {
        SourcedItem {
            belief: b.parse().unwrap(),
            time,
            source: source.to_string(),
        }
    }

    fn cfg() -> ManagementConfig {
        ManagementConfig {
            ranking: vec!["s1".into(), "s2".into(), "s3".into()],
            ..Default::default()
        }
    }

    #[test]
    fn higher_priority_wins() {
        let out = merge_prioritized_adds(&[item("p", 1, "s1"), item("-p", 1, "s2")], &KnowledgeBase::new(), &cfg()).unwrap();
        assert_eq!(out.to_string(), "p(1)");
        let out = merge_prioritized_adds(&[item("p", 1, "s2"), item("-p", 1, "s1")], &KnowledgeBase::new(), &cfg()).unwrap();
        assert_eq!(out.to_string(), "-p(1)");
    }

    #[test]
    fn empty_and_conflict_free_batches() {
        let kb = parse_kb("a").unwrap();
        assert_eq!(merge_prioritized_adds(&[], &kb, &cfg()).unwrap(), kb);
        let out = merge_prioritized_adds(&[item("p", 1, "s1"), item("q", 1, "s2")], &kb, &cfg()).unwrap();
        assert_eq!(out.to_string(), "a; p(1); q(1)");
    }

    #[test]
    fn different_times_do_not_conflict() {
        let out = merge_prioritized_adds(&[item("p", 1, "s1"), item("-p", 2, "s2")], &KnowledgeBase::new(), &cfg()).unwrap();
        assert_eq!(out.to_string(), "p(1); -p(2)");
    }

    #[test]
    fn chain_uses_accumulated_set() {
        let mut c = cfg();
        c.policy = ConsistencyPolicy::new(vec![FunctionalDecl::new("tm", 1, [0]).unwrap()]);
        // s2's cold is rejected by s1's hot; s3's warm is rejected by hot too
        let out = merge_prioritized_adds(
            &[item("tm(hot)", 0, "s1"), item("tm(cold)", 0, "s2"), item("tm(warm)", 0, "s3"), item("q", 0, "s3")],
            &KnowledgeBase::new(),
            &c,
        )
        .unwrap();
        assert_eq!(out.to_string(), "q(0); tm(hot,0)");
    }

    #[test]
    fn same_source_conflict_is_an_error() {
        assert!(matches!(
            merge_prioritized_adds(&[item("p", 1, "s1"), item("-p", 1, "s1")], &KnowledgeBase::new(), &cfg()),
            Err(ManagementError::SourceConflict { .. })
        ));
        assert_eq!(
            merge_prioritized_adds(&[item("p", 1, "s9")], &KnowledgeBase::new(), &cfg()),
            Err(ManagementError::UnrankedSource("s9".into()))
        );
    }

    #[test]
    fn restore_within_window() {
        let kb = parse_kb("bf(p,3,s1); win(p,5)").unwrap();
        assert_eq!(restore_buffer(&kb, &cfg(), 4).unwrap().to_string(), "p(3); win(p,5)");
    }

    #[test]
    fn stale_entries_are_dropped() {
        let kb = parse_kb("bf(p,0,s1); win(p,1)").unwrap();
        assert_eq!(restore_buffer(&kb, &cfg(), 4).unwrap().to_string(), "win(p,1)");
    }

    #[test]
    fn restore_without_buffer_or_window() {
        let kb = parse_kb("win(p,1); q").unwrap();
        assert_eq!(restore_buffer(&kb, &cfg(), 4).unwrap(), kb);
        let kb = parse_kb("bf(r,0,s2)").unwrap();
        assert_eq!(restore_buffer(&kb, &cfg(), 40).unwrap().to_string(), "r(0)");
        let kb = parse_kb("bf(r,x,s2)").unwrap();
        assert!(matches!(restore_buffer(&kb, &cfg(), 0), Err(ManagementError::MalformedBuffer(_))));
    }

    #[test]
    fn restore_merges_by_rank() {
        let kb = parse_kb("bf(p,3,s2); bf(-p,3,s1)").unwrap();
        assert_eq!(restore_buffer(&kb, &cfg(), 3).unwrap().to_string(), "-p(3)");
    }
}
