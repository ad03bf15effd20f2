//! Primitive vocabulary of examples.
//!
//! Input primitives are the lowercased words of the natural-language side;
//! output primitives are the lexical tokens of the formal side, produced by a
//! per-language tokenizer. The same surface string on the two sides yields two
//! distinct primitives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetDescriptor, Example};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    InputWord,
    OutputToken,
}

/// Ordered by `(origin, text)`, which is also the rarity tie-break order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Primitive {
    pub origin: Origin,
    pub text: String,
}

impl Primitive {
    pub fn input(text: impl Into<String>) -> Self {
        Primitive {
            origin: Origin::InputWord,
            text: text.into(),
        }
    }

    pub fn output(text: impl Into<String>) -> Self {
        Primitive {
            origin: Origin::OutputToken,
            text: text.into(),
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::InputWord => write!(f, "in:{}", self.text),
            Origin::OutputToken => write!(f, "out:{}", self.text),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveSet(BTreeSet<Primitive>);

impl PrimitiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Primitive) -> bool {
        self.0.insert(p)
    }

    pub fn contains(&self, p: &Primitive) -> bool {
        self.0.contains(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Primitive> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &PrimitiveSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &PrimitiveSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl FromIterator<Primitive> for PrimitiveSet {
    fn from_iter<I: IntoIterator<Item = Primitive>>(iter: I) -> Self {
        PrimitiveSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PrimitiveSet {
    type Item = &'a Primitive;
    type IntoIter = std::collections::btree_set::Iter<'a, Primitive>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Pool-wide document frequency of each primitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimitiveInventory {
    counts: BTreeMap<Primitive, usize>,
    pool_size: usize,
}

impl PrimitiveInventory {
    /// Number of pool examples whose primitive set contains `p` (0 if none).
    pub fn count(&self, p: &Primitive) -> usize {
        self.counts.get(p).copied().unwrap_or(0)
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn counts(&self) -> &BTreeMap<Primitive, usize> {
        &self.counts
    }

    pub fn add(&mut self, set: &PrimitiveSet) {
        for p in set {
            *self.counts.entry(p.clone()).or_insert(0) += 1;
        }
        self.pool_size += 1;
    }

    pub fn from_sets<'a>(sets: impl IntoIterator<Item = &'a PrimitiveSet>) -> Self {
        let mut inv = PrimitiveInventory::default();
        for s in sets {
            inv.add(s);
        }
        inv
    }
}

/// Lexical tokenizer for the formal (output) side of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormalTokenizer {
    /// SCAN action sequences.
    #[serde(rename = "scan-actions")]
    ScanActions,
    /// CFQ SPARQL.
    #[serde(rename = "sparql")]
    Sparql,
    /// GeoQuery functional query language.
    #[serde(rename = "funql")]
    FunQl,
    #[serde(rename = "whitespace")]
    Whitespace,
}

impl FormalTokenizer {
    pub fn id(self) -> &'static str {
        match self {
            FormalTokenizer::ScanActions => "scan-actions",
            FormalTokenizer::Sparql => "sparql",
            FormalTokenizer::FunQl => "funql",
            FormalTokenizer::Whitespace => "whitespace",
        }
    }
}

impl FromStr for FormalTokenizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scan-actions" => Ok(FormalTokenizer::ScanActions),
            "sparql" => Ok(FormalTokenizer::Sparql),
            "funql" => Ok(FormalTokenizer::FunQl),
            "whitespace" => Ok(FormalTokenizer::Whitespace),
            other => Err(Error::Config(format!("unknown formal tokenizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalTokens {
    pub tokens: Vec<String>,
    /// Set when brackets do not balance. Tokenization still completes.
    pub warning: Option<String>,
}

const SENTENCE_PUNCT: &[char] = &['.', ',', '?'];

/// Lowercased words with surrounding sentence punctuation removed.
pub fn tokenize_natural(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(SENTENCE_PUNCT).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn tokenize_formal(dataset: &DatasetDescriptor, text: &str) -> FormalTokens {
    tokenize_with(dataset.formal_tokenizer, text)
}

pub fn tokenize_with(tokenizer: FormalTokenizer, text: &str) -> FormalTokens {
    let tokens = match tokenizer {
        FormalTokenizer::Whitespace => text.split_whitespace().map(str::to_owned).collect(),
        FormalTokenizer::ScanActions => text
            .split_whitespace()
            .map(|t| t.trim_end_matches('.'))
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
        FormalTokenizer::Sparql => split_structural(text, &['{', '}', '(', ')', ',', '*']),
        FormalTokenizer::FunQl => {
            let text = text.trim_end();
            split_structural(text.strip_suffix('.').unwrap_or(text), &['(', ')', ','])
        }
    };
    let warning = bracket_warning(&tokens);
    FormalTokens { tokens, warning }
}

/// Whitespace split, then every structural char becomes its own token. A
/// period only survives as a token when it stands alone between whitespace,
/// so namespaced identifiers like `film.film_distributor` stay whole.
fn split_structural(text: &str, structural: &[char]) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut rest = word;
        while let Some(pos) = rest.find(structural) {
            if pos > 0 {
                out.push(rest[..pos].to_owned());
            }
            let ch_len = rest[pos..].chars().next().map_or(1, char::len_utf8);
            out.push(rest[pos..pos + ch_len].to_owned());
            rest = &rest[pos + ch_len..];
        }
        if !rest.is_empty() {
            out.push(rest.to_owned());
        }
    }
    out
}

fn bracket_warning(tokens: &[String]) -> Option<String> {
    let mut stack = Vec::new();
    for t in tokens {
        match t.as_str() {
            "(" | "{" => stack.push(t.as_str()),
            ")" | "}" => {
                let open = if t == ")" { "(" } else { "{" };
                if stack.pop() != Some(open) {
                    return Some(format!("unbalanced '{t}'"));
                }
            }
            _ => {}
        }
    }
    stack
        .last()
        .map(|open| format!("unclosed '{open}'"))
}

pub fn primitives_of(example: &Example, dataset: &DatasetDescriptor) -> PrimitiveSet {
    tokenize_natural(&example.input_text)
        .into_iter()
        .map(Primitive::input)
        .chain(
            tokenize_formal(dataset, &example.output_text)
                .tokens
                .into_iter()
                .map(Primitive::output),
        )
        .collect()
}

pub fn build_inventory(pool: &[Example], dataset: &DatasetDescriptor) -> Result<PrimitiveInventory> {
    if pool.is_empty() {
        return Err(Error::Argument("cannot build an inventory over an empty pool".into()));
    }
    let sets: Vec<PrimitiveSet> = pool.iter().map(|e| primitives_of(e, dataset)).collect();
    Ok(PrimitiveInventory::from_sets(&sets))
}
