mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use patternbench::analysis::{dead_end, distance, DistanceOptions};
use patternbench::model::{canonical_key, ProcessModel};
use patternbench::patterns::{apply_all, build_steps, Alphabet};

// The pruned oracles lean on the relation argument in `simple_bound`; the
// plain versions below make no such assumption.
#[test]
fn pruned_distance_oracle_matches_counting_only() {
    let mut rng = StdRng::seed_from_u64(21);
    let empty = ProcessModel::new_empty();
    for _ in 0..25 {
        let target = random_target(&mut rng, 3, 2);
        let alphabet = Alphabet::of_model(&target);
        let pruned = oracle_distance(&empty, &target, &alphabet, true);
        let plain = oracle_distance(&empty, &target, &alphabet, false);
        assert_eq!(pruned, plain, "{target}");
    }
}

#[test]
fn pruned_reachability_matches_plain() {
    let mut rng = StdRng::seed_from_u64(22);
    let empty = ProcessModel::new_empty();
    let mut dead = 0;
    for _ in 0..40 {
        let target = random_target(&mut rng, 3, 2);
        let alphabet = Alphabet::of_model(&target);
        let steps = build_steps(&empty, &target).unwrap();
        let k = rng.gen_range(0..=steps.len());
        let start = apply_all(&empty, &steps[..k]).unwrap();
        let n = rng.gen_range(0..=2);
        let (states, _) = random_walk(&mut rng, &start, &alphabet, n);
        let state = states.last().unwrap();
        let pruned = oracle_reachable_without_delete(state, &target, &alphabet, true);
        let plain = oracle_reachable_without_delete(state, &target, &alphabet, false);
        assert_eq!(pruned, plain, "{state} -> {target}");
        dead += usize::from(!plain);
    }
    assert!(dead > 0, "sample has no dead ends");
}

#[test]
fn distance_between_arbitrary_models_matches_oracle() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..40 {
        let target = random_target(&mut rng, 3, 1);
        let labels = alphabet(&["A", "B", "C"], &["x", "y"]);
        let n = rng.gen_range(1..=3);
        let (states, _) = random_walk(&mut rng, &ProcessModel::new_empty(), &labels, n);
        let source = states.last().unwrap();
        let alphabet = Alphabet::of_model(&target).union(&Alphabet::of_model(source));
        let result = distance(source, &target, &alphabet, &DistanceOptions::default()).unwrap();
        assert_eq!(result.d, oracle_distance(source, &target, &alphabet, true), "{source} -> {target}");
        for path in result.paths() {
            let end = apply_all(source, path).unwrap();
            assert_eq!(canonical_key(&end), canonical_key(&target));
        }
    }
}

#[test]
fn dead_end_witnesses_avoid_deletes_and_reach_target() {
    let mut rng = StdRng::seed_from_u64(24);
    let empty = ProcessModel::new_empty();
    for _ in 0..30 {
        let target = random_target(&mut rng, 4, 2);
        let alphabet = Alphabet::of_model(&target);
        let steps = build_steps(&empty, &target).unwrap();
        let k = rng.gen_range(0..=steps.len());
        let state = apply_all(&empty, &steps[..k]).unwrap();
        // Every prefix of a constructive path can still be completed.
        let verdict = dead_end(&state, &target, &alphabet).unwrap();
        let witness = verdict.witness.expect("prefix of a build path is no dead end");
        let end = apply_all(&state, &witness).unwrap();
        assert_eq!(canonical_key(&end), canonical_key(&target));
    }
}

#[test]
fn duplicate_activity_is_a_dead_end() {
    let target = model("SEQ(XOR([c] X, Y))");
    let alphabet = Alphabet::of_model(&target);
    let state = model("SEQ(XOR(X, SEQ(Y, Y)))");
    assert!(dead_end(&state, &target, &alphabet).unwrap().is_dead_end);
    assert!(!oracle_reachable_without_delete(&state, &target, &alphabet, false));
}

// No single move lowers the estimate here; the search still has to look
// past the bound instead of giving up.
#[test]
fn misplaced_duplicate_needs_a_delete_and_an_insert() {
    let target = model("SEQ(AND(B, A), AND(B, A))");
    let state = model("SEQ(AND(A, B, A), B)");
    let alphabet = Alphabet::of_model(&target);
    let result = distance(&state, &target, &alphabet, &DistanceOptions::default()).unwrap();
    assert_eq!(result.d, 2);
    assert_eq!(result.d, oracle_distance(&state, &target, &alphabet, false));
}
