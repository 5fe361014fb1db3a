mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmcs::config::{format_trace, parse_system, parse_trace, ConfigError};
use rmcs::engine::Observation;
use rmcs::scenarios::{build_scenario, NAMES};
use rmcs::term::Term;

fn terms(items: &[&str]) -> BTreeSet<Term> {
    items.iter().map(|s| rmcs::term::parse_term(s).unwrap()).collect()
}

#[test]
fn assisted_living_trace() {
    let (cfg, trace) = build_scenario("assisted-living").unwrap();
    assert_eq!(
        trace[0],
        Observation::new(vec![terms(&["switch(on)"]), terms(&["16"]), terms(&["enters(kitchen)"])])
    );
    let only_tmp = parse_trace("obs 0\n  tmp: 81\nend\n", &cfg.sensors).unwrap();
    assert_eq!(only_tmp[0], Observation::new(vec![terms(&[]), terms(&["81"]), terms(&[])]));
    assert!(parse_trace("", &cfg.sensors).unwrap().is_empty());
    assert!(matches!(
        parse_trace("obs 0\n  pos: leaves(kitchen)\nend\n", &cfg.sensors),
        Err(ConfigError::OutOfLanguage { .. })
    ));
    assert!(matches!(
        parse_trace("obs 0\nend\nobs 2\nend\n", &cfg.sensors),
        Err(ConfigError::NonContiguous { expected: 1, found: 2 })
    ));
}

#[test]
fn comments_and_errors() {
    let cfg = parse_system("# a clock\ncontext c { # inline\n kb: now(0) # trailing\n ops: incr\n bridge: incr <- }").unwrap();
    assert_eq!(cfg.contexts[0].kb.len(), 1);
    assert!(matches!(
        parse_system("context c { ops: add; bridge: add(a) <- s@x }"),
        Err(ConfigError::UnknownSensor { .. })
    ));
    let err = parse_system("context c {\n  ops: add\n  bridge:\n    add(a) <- c:b,\n}").unwrap_err();
    let ConfigError::Parse(p) = err else { panic!("{err}") };
    assert_eq!(p.line, 5);
}

#[test]
fn scenarios_validate_and_run() {
    use rmcs::engine::{run, EngineError, Policy};
    for name in NAMES {
        let (cfg, trace) = build_scenario(name).unwrap();
        let result = run(&cfg.build(), &trace, Policy::First);
        if *name == "broken-clock" {
            assert_eq!(result, Err(EngineError::NoEquilibrium { step: 0 }));
        } else {
            assert_eq!(result.unwrap().steps.len(), trace.len(), "{name}");
        }
    }
}

proptest! {
    #[test]
    fn random_systems_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = common::random_system(&mut rng);
        let cfg = parse_system(&sys.text()).unwrap();
        prop_assert_eq!(parse_system(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn traces_round_trip(
        steps in prop::collection::vec(
            (prop::collection::btree_set(0i64..100, 0..3), prop::collection::btree_set(0usize..3, 0..3)),
            0..6,
        )
    ) {
        let (cfg, _) = build_scenario("assisted-living").unwrap();
        let rooms = ["kitchen", "bathroom", "bedroom"];
        let trace: Vec<Observation> = steps
            .iter()
            .map(|(temps, pos)| {
                Observation::new(vec![
                    BTreeSet::new(),
                    temps.iter().map(|t| Term::Int(*t)).collect(),
                    pos.iter().map(|r| Term::compound("enters", vec![Term::sym(rooms[*r])])).collect(),
                ])
            })
            .collect();
        let text = format_trace(&trace, &cfg.sensors);
        prop_assert_eq!(parse_trace(&text, &cfg.sensors).unwrap(), trace);
    }
}
