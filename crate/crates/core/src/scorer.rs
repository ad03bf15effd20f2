//! Output normalization and exact-match scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::DatasetDescriptor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Normalizer {
    /// Generic pass plus sorting and deduplication of WHERE-block conjuncts.
    #[serde(rename = "cfq-sparql")]
    CfqSparql,
    /// Whitespace collapse and trailing-period removal.
    #[serde(rename = "strip-period")]
    StripPeriod,
    #[serde(rename = "whitespace-only")]
    WhitespaceOnly,
}

impl Normalizer {
    pub fn id(self) -> &'static str {
        match self {
            Normalizer::CfqSparql => "cfq-sparql",
            Normalizer::StripPeriod => "strip-period",
            Normalizer::WhitespaceOnly => "whitespace-only",
        }
    }
}

impl fmt::Display for Normalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Normalizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cfq-sparql" => Ok(Normalizer::CfqSparql),
            "strip-period" => Ok(Normalizer::StripPeriod),
            "whitespace-only" => Ok(Normalizer::WhitespaceOnly),
            other => Err(Error::Config(format!("unknown normalizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub example_id: usize,
    pub matched: bool,
    pub prediction_normalized: String,
    pub gold_normalized: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub text: String,
    pub warning: Option<String>,
}

pub fn normalize(dataset: &DatasetDescriptor, output: &str) -> String {
    normalize_with(dataset.normalizer, output).text
}

pub fn normalize_with(normalizer: Normalizer, output: &str) -> Normalized {
    let mut text = output.split_whitespace().collect::<Vec<_>>().join(" ");
    if normalizer != Normalizer::WhitespaceOnly {
        // Repeated so that normalization is a fixed point ("x . ." -> "x").
        while let Some(stripped) = text.strip_suffix('.') {
            text = stripped.trim_end().to_owned();
        }
    }
    if normalizer != Normalizer::CfqSparql {
        return Normalized { text, warning: None };
    }
    match sort_conjuncts(&text) {
        Some(sorted) => Normalized {
            text: sorted,
            warning: None,
        },
        None => Normalized {
            text,
            warning: Some("no balanced { ... } block; conjuncts left unsorted".into()),
        },
    }
}

/// Rewrites the first top-level `{ ... }` block with its ` . `-separated
/// conjuncts deduplicated and sorted in byte order. Input is whitespace-collapsed.
fn sort_conjuncts(text: &str) -> Option<String> {
    let open = text.find('{')?;
    let mut depth = 0usize;
    let mut close = None;
    for (i, ch) in text[open..].char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(open + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close?;
    let prefix = text[..open].trim();
    let body = &text[open + 1..close];
    let suffix = text[close + 1..].trim();

    let mut conjuncts: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut depth = 0i64;
    for tok in body.split_whitespace() {
        if tok == "." && depth == 0 {
            if !current.is_empty() {
                conjuncts.push(current.join(" "));
                current.clear();
            }
            continue;
        }
        depth += tok.matches('{').count() as i64 - tok.matches('}').count() as i64;
        current.push(tok);
    }
    if !current.is_empty() {
        conjuncts.push(current.join(" "));
    }
    conjuncts.sort_unstable();
    conjuncts.dedup();
    let body = conjuncts.join(" . ");

    let parts = [prefix, "{", body.as_str(), "}", suffix];
    Some(
        parts
            .iter()
            .filter(|p| !p.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(" "),
    )
}

pub fn exact_match(dataset: &DatasetDescriptor, example_id: usize, prediction: &str, gold: &str) -> MatchOutcome {
    let prediction_normalized = normalize(dataset, prediction);
    let gold_normalized = normalize(dataset, gold);
    MatchOutcome {
        example_id,
        matched: prediction_normalized == gold_normalized,
        prediction_normalized,
        gold_normalized,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfq(s: &str) -> String {
        normalize(&DatasetDescriptor::cfq(), s)
    }

    #[test]
    fn cfq_sort_and_dedup() {
        assert_eq!(cfq("SELECT count(*) WHERE { B . A . A }"), "SELECT count(*) WHERE { A . B }");
    }

    #[test]
    fn cfq_namespaced_periods_are_not_separators() {
        assert_eq!(
            cfq("SELECT count(*) WHERE { ?x0 employment_tenure.person M1 . ?x0 a film.film_distributor }"),
            "SELECT count(*) WHERE { ?x0 a film.film_distributor . ?x0 employment_tenure.person M1 }"
        );
    }

    #[test]
    fn cfq_without_braces_warns() {
        let n = normalize_with(Normalizer::CfqSparql, "SELECT  x .");
        assert_eq!(n.text, "SELECT x");
        assert!(n.warning.is_some());
    }

    #[test]
    fn scan_trailing_period() {
        assert_eq!(normalize(&DatasetDescriptor::scan(), "JUMP JUMP."), "JUMP JUMP");
        assert_eq!(normalize(&DatasetDescriptor::scan(), "  JUMP \n JUMP  "), "JUMP JUMP");
    }

    #[test]
    fn whitespace_only_keeps_period() {
        assert_eq!(normalize_with(Normalizer::WhitespaceOnly, " a  b. ").text, "a b.");
    }

    #[test]
    fn canonical_is_fixed() {
        let s = "SELECT DISTINCT ?x0 WHERE { ?x0 a ns:film.actor . ?x0 ns:film.actor.film/ns:film.performance.film M1 }";
        assert_eq!(cfq(s), s);
        assert_eq!(normalize(&DatasetDescriptor::geoquery(), "answer ( state ( all ) )"), "answer ( state ( all ) )");
    }

    #[test]
    fn match_outcomes() {
        let d = DatasetDescriptor::cfq();
        let gold = "SELECT count(*) WHERE { ?x0 a film.film_distributor . ?x0 employment_tenure.person M1 }";
        assert!(exact_match(&d, 0, gold, gold).matched);
        let permuted = "SELECT count(*) WHERE { ?x0 employment_tenure.person M1 . ?x0 a film.film_distributor }";
        assert!(exact_match(&d, 0, permuted, gold).matched);
        let off = "SELECT count(*) WHERE { ?x0 a film.film_distributor . ?x0 employment_tenure.person M2 }";
        let o = exact_match(&d, 4, off, gold);
        assert!(!o.matched);
        assert_eq!(o.example_id, 4);
        assert!(!exact_match(&DatasetDescriptor::scan(), 0, "WALK", "walk").matched);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "[ a-cA-C{}().?:_\n\t]{0,40}") {
            for n in [Normalizer::CfqSparql, Normalizer::StripPeriod, Normalizer::WhitespaceOnly] {
                let once = normalize_with(n, &s).text;
                prop_assert_eq!(normalize_with(n, &once).text, once.clone());
            }
        }

        #[test]
        fn exact_match_is_symmetric(a in "[ A-C.{}]{0,20}", b in "[ A-C.{}]{0,20}") {
            let d = DatasetDescriptor::cfq();
            prop_assert_eq!(exact_match(&d, 0, &a, &b).matched, exact_match(&d, 0, &b, &a).matched);
            prop_assert!(exact_match(&d, 0, &a, &a).matched);
        }
    }
}
