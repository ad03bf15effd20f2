mod common;

use std::collections::BTreeMap;

use icl_gap::corpus::{DatasetDescriptor, Example, Split};
use icl_gap::primitives::{build_inventory, Origin, Primitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn inventory_matches_brute_force_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let words = ["walk", "run", "jump", "twice", "left", "and", "Walk.", "thrice?"];
    let toks = ["WALK", "RUN", "JUMP", "TURN_LEFT", "I_LOOK"];
    let pool: Vec<Example> = (0..50)
        .map(|i| {
            let n = rng.random_range(1..6);
            let input: Vec<&str> = (0..n).map(|_| words[rng.random_range(0..words.len())]).collect();
            let m = rng.random_range(1..6);
            let output: Vec<&str> = (0..m).map(|_| toks[rng.random_range(0..toks.len())]).collect();
            Example::new(i, input.join(" "), output.join(" "), Split::Train).unwrap()
        })
        .collect();

    let inv = build_inventory(&pool, &DatasetDescriptor::scan()).unwrap();

    let mut expect: BTreeMap<(u8, String), usize> = BTreeMap::new();
    for ex in &pool {
        for p in common::prims(ex) {
            *expect.entry(p).or_default() += 1;
        }
    }
    let got: BTreeMap<(u8, String), usize> = inv
        .counts()
        .iter()
        .map(|(p, c)| {
            let side = if p.origin == Origin::InputWord { 0 } else { 1 };
            ((side, p.text.clone()), *c)
        })
        .collect();
    assert_eq!(got, expect);
    assert_eq!(inv.pool_size(), 50);
    assert!(inv.count(&Primitive::input("walk")) >= 1);
}
