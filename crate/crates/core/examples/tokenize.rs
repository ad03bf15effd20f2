// Primitives of one example per built-in dataset.

use icl_gap::corpus::{DatasetDescriptor, Example, Split};
use icl_gap::primitives::{primitives_of, tokenize_formal, tokenize_natural};

pub fn run_example() -> icl_gap::Result<()> {
    let cases = [
        (
            DatasetDescriptor::cfq(),
            "Was a employer of M1 a film distributor?",
            "SELECT count(*) WHERE { ?x0 a film.film_distributor . ?x0 employment_tenure.person M1 }",
        ),
        (
            DatasetDescriptor::scan(),
            "jump around right twice",
            "TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP",
        ),
        (
            DatasetDescriptor::geoquery(),
            "how high is the highest point in m0?",
            "answer(elevation_1(highest(intersection(place,loc_2(m0)))))",
        ),
    ];
    for (dataset, input, output) in cases {
        let ex = Example::new(0, input, output, Split::Train)?;
        println!("{}", dataset.dataset_id);
        println!("  words:  {:?}", tokenize_natural(input));
        let formal = tokenize_formal(&dataset, output);
        println!("  tokens: {:?}", formal.tokens);
        if let Some(w) = formal.warning {
            println!("  warning: {w}");
        }
        println!("  {} distinct primitives", primitives_of(&ex, &dataset).len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
