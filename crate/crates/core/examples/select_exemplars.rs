// Coverage-first exemplar selection on a small pool.

use icl_gap::corpus::{DatasetDescriptor, Example, Split};
use icl_gap::sampler::CandidatePool;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> icl_gap::Result<()> {
    let pool = [
        ("walk", "WALK"),
        ("walk twice", "WALK WALK"),
        ("jump left", "TURN_LEFT JUMP"),
        ("look around right", "TURN_RIGHT LOOK TURN_RIGHT LOOK TURN_RIGHT LOOK TURN_RIGHT LOOK"),
        ("run thrice", "RUN RUN RUN"),
        ("jump", "JUMP"),
    ];
    let pool: Vec<Example> = pool
        .iter()
        .enumerate()
        .map(|(i, (a, b))| Example::new(i, *a, *b, Split::Train))
        .collect::<Result<_, _>>()?;
    let query = Example::new(
        100,
        "jump around left thrice",
        "TURN_LEFT JUMP TURN_LEFT JUMP TURN_LEFT JUMP TURN_LEFT JUMP",
        Split::Test,
    )?;

    let cp = CandidatePool::new(pool, &DatasetDescriptor::scan())?;
    for k in 1..=4 {
        let sel = cp.select(&query, k, None, &mut ChaCha8Rng::seed_from_u64(0))?;
        println!(
            "k={k}: ids {:?}, greedy {}, coverage {:.2}, uncoverable {:?}",
            sel.exemplar_ids(),
            sel.greedy_count,
            sel.coverage_fraction,
            sel.uncoverable.iter().map(|p| p.text.as_str()).collect::<Vec<_>>()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
