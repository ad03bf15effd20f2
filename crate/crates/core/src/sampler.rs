//! Coverage-first exemplar selection.
//!
//! Greedy phase: repeatedly take the rarest query primitive that is still
//! uncovered, and pick the unselected pool example containing it that covers
//! the most still-uncovered query primitives. Once every coverable primitive
//! is covered, the remaining slots are filled uniformly at random.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::index;
use rand::Rng;

use crate::corpus::{DatasetDescriptor, Example};
use crate::error::{Error, Result};
use crate::metrics::EvalSetting;
use crate::primitives::{primitives_of, Primitive, PrimitiveInventory, PrimitiveSet};
use crate::seed::derive_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ShotSelection {
    /// Selection order: greedy picks first, then random fill.
    pub exemplars: Vec<Example>,
    pub covered: PrimitiveSet,
    /// Query primitives that no available pool example contains.
    pub uncoverable: PrimitiveSet,
    pub coverage_fraction: f64,
    pub greedy_count: usize,
}

impl ShotSelection {
    pub fn exemplar_ids(&self) -> Vec<usize> {
        self.exemplars.iter().map(|e| e.id).collect()
    }
}

/// An exemplar source split with its primitive sets and a postings index.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    dataset: DatasetDescriptor,
    examples: Vec<Example>,
    sets: Vec<PrimitiveSet>,
    postings: BTreeMap<Primitive, Vec<usize>>,
    inventory: PrimitiveInventory,
}

impl CandidatePool {
    pub fn new(examples: Vec<Example>, dataset: &DatasetDescriptor) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::Argument("exemplar pool is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = examples.iter().find(|e| !seen.insert(e.id)) {
            return Err(Error::Argument(format!("duplicate example id {} in pool", dup.id)));
        }
        let sets: Vec<PrimitiveSet> = examples.iter().map(|e| primitives_of(e, dataset)).collect();
        let mut postings: BTreeMap<Primitive, Vec<usize>> = BTreeMap::new();
        for (idx, set) in sets.iter().enumerate() {
            for p in set {
                postings.entry(p.clone()).or_default().push(idx);
            }
        }
        let inventory = PrimitiveInventory::from_sets(&sets);
        Ok(CandidatePool {
            dataset: dataset.clone(),
            examples,
            sets,
            postings,
            inventory,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Frequencies over the whole pool.
    pub fn inventory(&self) -> &PrimitiveInventory {
        &self.inventory
    }

    pub fn dataset(&self) -> &DatasetDescriptor {
        &self.dataset
    }

    /// Select `k` exemplars for `query`, ranking rarity with the pool's own inventory.
    /// `exclude_id` removes one pool example (the query itself in same-split settings).
    pub fn select<R: Rng + ?Sized>(
        &self,
        query: &Example,
        k: usize,
        exclude_id: Option<usize>,
        rng: &mut R,
    ) -> Result<ShotSelection> {
        let query_set = primitives_of(query, &self.dataset);
        self.select_for(&query_set, &self.inventory, k, exclude_id, rng)
    }

    pub fn select_for<R: Rng + ?Sized>(
        &self,
        query_set: &PrimitiveSet,
        inventory: &PrimitiveInventory,
        k: usize,
        exclude_id: Option<usize>,
        rng: &mut R,
    ) -> Result<ShotSelection> {
        if k < 1 {
            return Err(Error::Argument("shot count must be at least 1".into()));
        }
        let available = |idx: usize| Some(self.examples[idx].id) != exclude_id;
        if !(0..self.examples.len()).any(available) {
            return Err(Error::Argument("exemplar pool is empty".into()));
        }

        let has_candidate = |p: &Primitive| {
            self.postings
                .get(p)
                .is_some_and(|idxs| idxs.iter().any(|&i| available(i)))
        };
        let (mut uncovered, uncoverable): (BTreeSet<&Primitive>, BTreeSet<&Primitive>) =
            query_set.iter().partition(|p| has_candidate(p));

        let mut selected: Vec<usize> = Vec::new();
        let mut chosen = vec![false; self.examples.len()];
        let mut covered = PrimitiveSet::new();

        while selected.len() < k {
            // BTreeSet iterates in (origin, text) order, so min_by_key keeps the
            // lexicographically first primitive among equal counts.
            let Some(&rarest) = uncovered.iter().min_by_key(|p| inventory.count(p)) else {
                break;
            };
            let best = self.postings[rarest]
                .iter()
                .copied()
                .filter(|&i| available(i) && !chosen[i])
                .map(|i| {
                    let gain = self.sets[i].iter().filter(|p| uncovered.contains(p)).count();
                    (i, gain)
                })
                .max_by(|(a, ga), (b, gb)| {
                    ga.cmp(gb).then(self.examples[*b].id.cmp(&self.examples[*a].id))
                })
                .map(|(i, _)| i)
                .expect("uncovered primitives always have an unselected candidate");
            chosen[best] = true;
            selected.push(best);
            for p in &self.sets[best] {
                if uncovered.remove(p) {
                    covered.insert(p.clone());
                }
            }
        }
        let greedy_count = selected.len();

        if selected.len() < k {
            let rest: Vec<usize> = (0..self.examples.len())
                .filter(|&i| available(i) && !chosen[i])
                .collect();
            let need = (k - selected.len()).min(rest.len());
            for pick in index::sample(rng, rest.len(), need) {
                selected.push(rest[pick]);
            }
        }

        let coverage_fraction = if query_set.is_empty() {
            1.0
        } else {
            covered.len() as f64 / query_set.len() as f64
        };
        Ok(ShotSelection {
            exemplars: selected.iter().map(|&i| self.examples[i].clone()).collect(),
            covered,
            uncoverable: uncoverable.into_iter().cloned().collect(),
            coverage_fraction,
            greedy_count,
        })
    }
}

/// One-shot form: builds a pool from `pool` and selects with the given inventory.
/// The caller removes the query from `pool` when both come from the same split.
pub fn select_exemplars<R: Rng + ?Sized>(
    query: &Example,
    pool: &[Example],
    inventory: &PrimitiveInventory,
    k: usize,
    dataset: &DatasetDescriptor,
    rng: &mut R,
) -> Result<ShotSelection> {
    if k < 1 {
        return Err(Error::Argument("shot count must be at least 1".into()));
    }
    let pool = CandidatePool::new(pool.to_vec(), dataset)?;
    let query_set = primitives_of(query, dataset);
    pool.select_for(&query_set, inventory, k, None, rng)
}

/// Sorted uniform subsample of `min(max, len)` indices in `0..len`.
pub fn subsample<R: Rng + ?Sized>(len: usize, max: usize, rng: &mut R) -> Vec<usize> {
    if max >= len {
        return (0..len).collect();
    }
    let mut picked = index::sample(rng, len, max).into_vec();
    picked.sort_unstable();
    picked
}

/// Queries used for one `(seed, setting)` cell.
pub fn query_indices(len: usize, max_queries: usize, seed: u64, setting: EvalSetting) -> Vec<usize> {
    let mut rng = derive_rng(&[&"queries", &seed, &setting.code()]);
    subsample(len, max_queries, &mut rng)
}

/// Exemplar-fill stream for one query.
pub fn exemplar_rng(seed: u64, setting: EvalSetting, query_id: usize) -> rand_chacha::ChaCha8Rng {
    derive_rng(&[&"exemplars", &seed, &setting.code(), &query_id])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub dataset: String,
    pub setting: EvalSetting,
    pub shots: usize,
    pub seed_count: usize,
    pub mean_coverage_percent: f64,
}

impl CoverageRow {
    pub const CSV_HEADER: &'static str = "dataset,setting,shots,seed_count,mean_coverage_percent";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.4}",
            self.dataset,
            self.setting,
            self.shots,
            self.seed_count,
            self.mean_coverage_percent
        )
    }
}

/// Mean coverage percentage over queries and seeds.
///
/// Each seed draws `min(max_queries, |queries|)` queries the same way the
/// runner does. In same-split settings the query is excluded from the pool.
pub fn coverage_stats(
    setting: EvalSetting,
    queries: &[Example],
    pool: &CandidatePool,
    k: usize,
    seeds: &[u64],
    max_queries: usize,
) -> Result<f64> {
    if queries.is_empty() || seeds.is_empty() || max_queries == 0 {
        return Err(Error::Argument("coverage needs queries, seeds and max_queries ≥ 1".into()));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for &seed in seeds {
        for qi in query_indices(queries.len(), max_queries, seed, setting) {
            let q = &queries[qi];
            let exclude = setting.is_id().then_some(q.id);
            let mut rng = exemplar_rng(seed, setting, q.id);
            total += pool.select(q, k, exclude, &mut rng)?.coverage_fraction;
            n += 1;
        }
    }
    Ok(100.0 * total / n as f64)
}
