// End-to-end run with a mock model, then the gap report, in a temp dir.
//
// `cargo run --example oracle_run -- noise:0.3` swaps in the noisy mock.

use std::fs;
use std::path::Path;

use icl_gap::corpus::{write_split, Example, Split, SplitFormat};
use icl_gap::runner::{self, RunConfig};
use icl_gap::{DatasetId, ModelEndpoint};

fn grammar() -> Vec<(String, String)> {
    let verbs = [("walk", "WALK"), ("run", "RUN"), ("jump", "JUMP"), ("look", "LOOK")];
    let dirs = [("", ""), (" left", "TURN_LEFT "), (" right", "TURN_RIGHT ")];
    let reps = [("", 1), (" twice", 2), (" thrice", 3)];
    let mut out = Vec::new();
    for (word, action) in verbs {
        for (d, turn) in dirs {
            for (r, n) in reps {
                out.push((format!("{word}{d}{r}"), vec![format!("{turn}{action}"); n].join(" ")));
            }
        }
    }
    let simple = out.clone();
    for (a, x) in simple.iter().step_by(5) {
        for (b, y) in simple.iter().step_by(7) {
            out.push((format!("{a} and {b}"), format!("{x} {y}")));
        }
    }
    out
}

fn write_corpus(dir: &Path) -> icl_gap::Result<()> {
    let pairs = grammar();
    let split_at = pairs.len() / 2;
    for (name, split, rows) in [("train.tsv", Split::Train, &pairs[..split_at]), ("test.tsv", Split::Test, &pairs[split_at..])] {
        let examples: Vec<Example> = rows
            .iter()
            .enumerate()
            .map(|(i, (a, b))| Example::new(i, a, b, split))
            .collect::<Result<_, _>>()?;
        write_split(dir.join(name), SplitFormat::Tsv, &examples)?;
    }
    Ok(())
}

pub fn run_example(mock: &str) -> icl_gap::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| icl_gap::Error::Argument(e.to_string()))?;
    let dir = tmp.path();
    write_corpus(dir)?;

    let mut config = RunConfig::new(
        DatasetId::Scan,
        dir.join("train.tsv"),
        dir.join("test.tsv"),
        3,
        ModelEndpoint::parse_mock(mock)?,
        dir.join("runs/scan-3"),
    );
    config.model_label = format!("mock-{}", mock.replace(':', "-"));
    config.seeds = vec![0, 1];
    config.resamples = 1000;
    let record = runner::run(config)?;
    for a in &record.aggregates {
        println!("{:<12} seed {}  {}/{}  acc {:.3}", a.setting.to_string(), a.seed, a.matched, a.n, a.accuracy);
    }

    let written = runner::report(&[dir.join("runs/scan-3")], &dir.join("reports"))?;
    for path in &written {
        println!("wrote {}", path.file_name().unwrap_or_default().to_string_lossy());
    }
    let gap_json = written.iter().find(|p| p.extension().is_some_and(|e| e == "json"));
    if let Some(p) = gap_json {
        println!("{}", fs::read_to_string(p).map_err(|e| icl_gap::Error::Report(e.to_string()))?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    let mock = std::env::args().nth(1).unwrap_or_else(|| "oracle".into());
    run_example(&mock)
}
