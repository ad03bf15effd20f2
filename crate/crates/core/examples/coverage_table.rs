// Mean primitive coverage per setting and shot count, as CSV.
//
// `cargo run --example coverage_table -- <train> <test> <dataset>` reads real
// splits (TSV or JSONL); with no arguments a small synthetic corpus is used.

use std::collections::BTreeMap;
use std::path::PathBuf;

use icl_gap::corpus::{load_split, DatasetDescriptor, Example, Split, SplitFormat};
use icl_gap::sampler::{coverage_stats, CandidatePool, CoverageRow};
use icl_gap::{DatasetId, EvalSetting};

fn synthetic() -> icl_gap::Result<(Vec<Example>, Vec<Example>)> {
    let verbs = ["walk", "run", "jump", "look"];
    let mods = ["", " left", " right", " twice", " left twice", " right thrice"];
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, v) in verbs.iter().enumerate() {
        for (j, m) in mods.iter().enumerate() {
            let input = format!("{v}{m}");
            let output = input.to_uppercase();
            if (i + j) % 3 == 0 {
                test.push(Example::new(test.len(), input, output, Split::Test)?);
            } else {
                train.push(Example::new(train.len(), input, output, Split::Train)?);
            }
        }
    }
    Ok((train, test))
}

pub fn run_example(args: &[String]) -> icl_gap::Result<()> {
    let (dataset, train, test) = match args {
        [train, test, dataset] => {
            let d = DatasetDescriptor::builtin(dataset.parse::<DatasetId>()?);
            let load = |p: &String, s| {
                let p = PathBuf::from(p);
                load_split(&p, SplitFormat::from_path(&p), s)
            };
            (d, load(train, Split::Train)?, load(test, Split::Test)?)
        }
        _ => {
            let (train, test) = synthetic()?;
            (DatasetDescriptor::scan(), train, test)
        }
    };
    let pools = BTreeMap::from([
        (Split::Train, CandidatePool::new(train.clone(), &dataset)?),
        (Split::Test, CandidatePool::new(test.clone(), &dataset)?),
    ]);
    let seeds = [0, 1, 2, 3, 4];

    println!("{}", CoverageRow::CSV_HEADER);
    for setting in EvalSetting::ALL {
        let queries = if setting.target == Split::Train { &train } else { &test };
        for shots in [1, 5, 10] {
            let pct = coverage_stats(setting, queries, &pools[&setting.source], shots, &seeds, 1045)?;
            let row = CoverageRow {
                dataset: dataset.dataset_id.to_string(),
                setting,
                shots,
                seed_count: seeds.len(),
                mean_coverage_percent: pct,
            };
            println!("{}", row.to_csv());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    run_example(&args)
}
