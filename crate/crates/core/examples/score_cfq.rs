// Exact match after SPARQL conjunct normalization.

use icl_gap::corpus::DatasetDescriptor;
use icl_gap::scorer::{exact_match, normalize};

pub fn run_example() -> icl_gap::Result<()> {
    let d = DatasetDescriptor::cfq();
    let gold = "SELECT count(*) WHERE { ?x0 a ns:film.film_distributor . ?x0 ns:employment_tenure.person M1 }";
    let predictions = [
        "SELECT count(*) WHERE { ?x0 ns:employment_tenure.person M1 . ?x0 a ns:film.film_distributor }",
        "SELECT count(*) WHERE {\n  ?x0 a ns:film.film_distributor .\n  ?x0 a ns:film.film_distributor .\n  ?x0 ns:employment_tenure.person M1 } .",
        "SELECT count(*) WHERE { ?x0 a ns:film.film_distributor }",
    ];
    println!("gold: {}", normalize(&d, gold));
    for (i, p) in predictions.iter().enumerate() {
        let m = exact_match(&d, i, p, gold);
        println!("{} {}", if m.matched { "match" } else { "miss " }, m.prediction_normalized);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
