use momentkit::stability::{cross_validate, kempf_ness_flow, torus_polystability, FlowOptions, StabilityClass};
use momentkit::{ops_limit, stabilizer, GroupAction, StatePoint, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng) -> (GroupAction, StatePoint) {
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=6);
    let weights: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
    let coords: Vec<C64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            }
        })
        .collect();
    (GroupAction::torus(weights).unwrap(), StatePoint::from_vec(coords))
}

#[test]
fn flow_matches_exact_verdict_on_random_tori() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = FlowOptions::default();
    let mut counts = std::collections::HashMap::new();
    let mut failures = Vec::new();
    for i in 0..400 {
        let (act, v) = random_instance(&mut rng);
        match cross_validate(&act, &v, &opts) {
            Ok(cv) => *counts.entry(cv.oracle.class).or_insert(0) += 1,
            Err(e) => failures.push(format!("{i}: {e} weights={:?} v={:?}", act.torus_weights().unwrap().weights(), v.coords().as_slice())),
        }
    }
    println!("{counts:?}");
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn flow_witnesses_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = FlowOptions::default();
    let mut missing = 0;
    for _ in 0..200 {
        let (act, v) = random_instance(&mut rng);
        let verdict = kempf_ness_flow(&act, &v, &opts).unwrap();
        let Some(w) = verdict.witness else {
            if !verdict.class.is_polystable() {
                missing += 1;
            }
            continue;
        };
        let limit = ops_limit(&act, &w, &v).unwrap().expect("witness has a limit");
        match verdict.class {
            StabilityClass::Unstable => assert!(limit.is_zero()),
            StabilityClass::SemistableNotPolystable => {
                assert!(!limit.is_zero());
                assert!(stabilizer(&act, &limit, 1e-8).unwrap().dim > stabilizer(&act, &v, 1e-8).unwrap().dim);
            }
            _ => panic!("polystable verdict with witness"),
        }
    }
    println!("missing witnesses: {missing}");
}

#[test]
fn oracle_witnesses_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let (act, v) = random_instance(&mut rng);
        let weights = act.torus_weights().unwrap().weights().to_vec();
        let verdict = torus_polystability(&weights, &v.support());
        if let Some(w) = &verdict.witness {
            assert!(w.is_primitive());
            let limit = ops_limit(&act, w, &v).unwrap().expect("oracle witness has a limit");
            if verdict.class == StabilityClass::Unstable {
                assert!(limit.is_zero());
            } else {
                assert!(stabilizer(&act, &limit, 1e-8).unwrap().dim > stabilizer(&act, &v, 1e-8).unwrap().dim);
            }
        }
    }
}
