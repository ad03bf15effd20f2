#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use icl_gap::corpus::{Example, Split};
use icl_gap::prompt::PromptTemplate;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Synthetic SCAN-style corpus

const ACTIONS: [(&str, &str); 4] = [("walk", "WALK"), ("run", "RUN"), ("jump", "JUMP"), ("look", "LOOK")];
const DIRECTIONS: [(&str, &str); 3] = [("", ""), ("left", "TURN_LEFT"), ("right", "TURN_RIGHT")];
const REPEATS: [(&str, usize); 3] = [("", 1), ("twice", 2), ("thrice", 3)];

fn clauses() -> Vec<(String, Vec<&'static str>)> {
    let mut out = Vec::new();
    for (a, act) in ACTIONS {
        for (d, turn) in DIRECTIONS {
            for (r, times) in REPEATS {
                let words: Vec<&str> = [a, d, r].into_iter().filter(|w| !w.is_empty()).collect();
                let mut unit = Vec::new();
                if !turn.is_empty() {
                    unit.push(turn);
                }
                unit.push(act);
                let actions: Vec<&str> = unit.iter().copied().cycle().take(unit.len() * times).collect();
                out.push((words.join(" "), actions));
            }
        }
    }
    out
}

/// Every distinct command of a tiny SCAN grammar (2628 of them), shuffled.
pub fn scan_like_pairs(seed: u64) -> Vec<(String, String)> {
    let cl = clauses();
    let mut pairs: Vec<(String, String)> = cl.iter().map(|(i, o)| (i.clone(), o.join(" "))).collect();
    for (i1, o1) in &cl {
        for (i2, o2) in &cl {
            pairs.push((format!("{i1} and {i2}"), [o1.join(" "), o2.join(" ")].join(" ")));
            pairs.push((format!("{i1} after {i2}"), [o2.join(" "), o1.join(" ")].join(" ")));
        }
    }
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pairs
}

/// Writes `train.tsv` / `test.tsv` with `n_train` / `n_test` rows into `dir`.
pub fn write_scan_like(dir: &Path, n_train: usize, n_test: usize, seed: u64) -> (PathBuf, PathBuf) {
    let pairs = scan_like_pairs(seed);
    assert!(n_train + n_test <= pairs.len());
    let render = |rows: &[(String, String)]| -> String {
        rows.iter().map(|(i, o)| format!("{i}\t{o}\n")).collect()
    };
    let train = dir.join("train.tsv");
    let test = dir.join("test.tsv");
    fs::write(&train, render(&pairs[..n_train])).unwrap();
    fs::write(&test, render(&pairs[n_train..n_train + n_test])).unwrap();
    (train, test)
}

// ---------------------------------------------------------------------------
// Brute-force reference for exemplar selection on whitespace-tokenized data.
// Primitive keys are (side, text) with side 0 = input word, 1 = output token.

pub type Prim = (u8, String);

pub fn prims(ex: &Example) -> BTreeSet<Prim> {
    let mut s = BTreeSet::new();
    for w in ex.input_text.split_whitespace() {
        let w = w.trim_matches(|c| c == '.' || c == ',' || c == '?').to_lowercase();
        if !w.is_empty() {
            s.insert((0, w));
        }
    }
    for t in ex.output_text.split_whitespace() {
        s.insert((1, t.to_string()));
    }
    s
}

#[derive(Debug, PartialEq)]
pub struct RefSelection {
    pub ids: Vec<usize>,
    pub covered: BTreeSet<Prim>,
    pub uncoverable: BTreeSet<Prim>,
    pub greedy_count: usize,
}

pub fn reference_select(
    query: &Example,
    pool: &[Example],
    k: usize,
    exclude: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> RefSelection {
    let q = prims(query);
    let count = |p: &Prim| pool.iter().filter(|e| prims(e).contains(p)).count();
    let usable: Vec<&Example> = pool.iter().filter(|e| Some(e.id) != exclude).collect();
    let uncoverable: BTreeSet<Prim> = q
        .iter()
        .filter(|p| !usable.iter().any(|e| prims(e).contains(*p)))
        .cloned()
        .collect();
    let mut covered = BTreeSet::new();
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < k {
        let mut remaining: Vec<Prim> = q
            .iter()
            .filter(|p| !covered.contains(*p) && !uncoverable.contains(*p))
            .cloned()
            .collect();
        if remaining.is_empty() {
            break;
        }
        remaining.sort_by(|a, b| (count(a), a).cmp(&(count(b), b)));
        let rarest = &remaining[0];
        let mut cands: Vec<(usize, usize)> = usable
            .iter()
            .filter(|e| !picked.contains(&e.id) && prims(e).contains(rarest))
            .map(|e| {
                let gain = prims(e).iter().filter(|p| remaining.contains(p)).count();
                (gain, e.id)
            })
            .collect();
        cands.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let id = cands[0].1;
        picked.push(id);
        let chosen = usable.iter().find(|e| e.id == id).unwrap();
        for p in prims(chosen) {
            if remaining.contains(&p) {
                covered.insert(p);
            }
        }
    }
    let greedy_count = picked.len();
    let rest: Vec<usize> = usable.iter().map(|e| e.id).filter(|id| !picked.contains(id)).collect();
    let need = (k - picked.len().min(k)).min(rest.len());
    for i in index::sample(rng, rest.len(), need) {
        picked.push(rest[i]);
    }
    RefSelection {
        ids: picked,
        covered,
        uncoverable,
        greedy_count,
    }
}

/// Random instance: pool of up to 20 examples with shuffled distinct ids over
/// a small vocabulary, a query, and k in 1..=5.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Example, Vec<Example>, usize) {
    let words = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let toks = ["X", "Y", "Z", "U", "V", "W"];
    let sample = |rng: &mut ChaCha8Rng, vocab: &[&str], max: usize| -> String {
        let n = rng.random_range(1..=max);
        (0..n).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
    };
    let pool_len = rng.random_range(1..=20);
    let mut ids: Vec<usize> = (0..100).collect();
    ids.shuffle(rng);
    let pool: Vec<Example> = (0..pool_len)
        .map(|i| {
            let input = sample(rng, &words[..6], 3);
            let output = sample(rng, &toks[..5], 3);
            Example::new(ids[i], input, output, Split::Train).unwrap()
        })
        .collect();
    // The query may use words/tokens the pool never saw.
    let query = Example::new(1000, sample(rng, &words, 5), sample(rng, &toks, 4), Split::Test).unwrap();
    let k = rng.random_range(1..=5);
    (query, pool, k)
}

// ---------------------------------------------------------------------------
// Exact bootstrap limit for Bernoulli data: a resample mean is Binomial(n, p̂)/n.

pub fn binomial_quantile(n: usize, p: f64, q: f64) -> f64 {
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut cdf = 0.0;
    for k in 0..=n {
        let ln_pmf = ln_fact[n] - ln_fact[k] - ln_fact[n - k]
            + if k > 0 { k as f64 * p.ln() } else { 0.0 }
            + if k < n { (n - k) as f64 * (1.0 - p).ln() } else { 0.0 };
        cdf += ln_pmf.exp();
        if cdf >= q {
            return k as f64 / n as f64;
        }
    }
    1.0
}

pub fn bernoulli_data(n: usize, p: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() < p).collect()
}

// ---------------------------------------------------------------------------
// Minimal HTTP completion stub.

#[derive(Debug, Clone)]
pub struct SeenRequest {
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

/// Serves `responses` in order (status, body), repeating the last one.
/// Returns the base URL and a log of received requests.
pub fn stub_server(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<SeenRequest>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    std::thread::spawn(move || {
        let mut served = 0usize;
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = BTreeMap::new();
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                line.clear();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                if let Some((k, v)) = line.trim_end().split_once(':') {
                    headers.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
                }
            }
            let len: usize = headers.get("content-length").and_then(|v| v.parse().ok()).unwrap_or(0);
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(SeenRequest {
                headers,
                body: String::from_utf8(body).unwrap(),
            });
            let (status, text) = responses[served.min(responses.len() - 1)].clone();
            served += 1;
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    (format!("http://{addr}/v1/completions"), seen)
}

pub fn choice(text: &str) -> String {
    serde_json::json!({ "choices": [{ "text": text }] }).to_string()
}

// ---------------------------------------------------------------------------
// Prompt goldens transcribed from the published templates.

fn table_exemplars(input: &str, output: &str) -> Vec<Example> {
    vec![
        Example::new(0, input, output, Split::Train).unwrap(),
        Example::new(1, "<example 2 input>", "<example 2 output>", Split::Train).unwrap(),
    ]
}

pub fn golden_cases() -> Vec<(&'static str, PromptTemplate, Vec<Example>, &'static str)> {
    vec![
        (
            "cfq",
            PromptTemplate::cfq(),
            table_exemplars(
                "Was a employer of M1 a film distributor?",
                "SELECT count(*) WHERE { ?x0 a film.film_distributor . ?x0 employment_tenure.person M1 }",
            ),
            include_str!("../golden/cfq.txt"),
        ),
        (
            "scan",
            PromptTemplate::scan(),
            table_exemplars(
                "run opposite right thrice and jump around right thrice.",
                "TURN_RIGHT TURN_RIGHT RUN TURN_RIGHT TURN_RIGHT RUN TURN_RIGHT TURN_RIGHT RUN \
                 TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP \
                 TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP TURN_RIGHT JUMP \
                 TURN_RIGHT JUMP TURN_RIGHT JUMP.",
            ),
            include_str!("../golden/scan.txt"),
        ),
        (
            "geoquery",
            PromptTemplate::geoquery(),
            table_exemplars(
                "how high is the highest point in m0.",
                "answer ( elevation_1 ( highest ( intersection ( place , loc_2 ( m0 ) ) ) ) ).",
            ),
            include_str!("../golden/geoquery.txt"),
        ),
    ]
}

