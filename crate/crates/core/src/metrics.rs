//! Accuracy, relative generalization gap, and percentile-bootstrap intervals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::scorer::MatchOutcome;

/// Exemplars come from `source`, queries from `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EvalSetting {
    pub source: Split,
    pub target: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "ID")]
    InDistribution,
    #[serde(rename = "OOD")]
    OutOfDistribution,
}

impl EvalSetting {
    pub const TEST_TEST: EvalSetting = EvalSetting { source: Split::Test, target: Split::Test };
    pub const TRAIN_TRAIN: EvalSetting = EvalSetting { source: Split::Train, target: Split::Train };
    pub const TEST_TRAIN: EvalSetting = EvalSetting { source: Split::Test, target: Split::Train };
    pub const TRAIN_TEST: EvalSetting = EvalSetting { source: Split::Train, target: Split::Test };

    /// ID settings first, then OOD.
    pub const ALL: [EvalSetting; 4] = [
        Self::TEST_TEST,
        Self::TRAIN_TRAIN,
        Self::TEST_TRAIN,
        Self::TRAIN_TEST,
    ];

    pub fn regime(self) -> Regime {
        if self.source == self.target {
            Regime::InDistribution
        } else {
            Regime::OutOfDistribution
        }
    }

    pub fn is_id(self) -> bool {
        self.regime() == Regime::InDistribution
    }

    /// Short form used on the command line and in records: `tt`, `rr`, `tr`, `rt`.
    pub fn code(self) -> &'static str {
        match (self.source, self.target) {
            (Split::Test, Split::Test) => "tt",
            (Split::Train, Split::Train) => "rr",
            (Split::Test, Split::Train) => "tr",
            (Split::Train, Split::Test) => "rt",
        }
    }

    /// Field-name form: `test_test`, `train_train`, `test_train`, `train_test`.
    pub fn snake(self) -> &'static str {
        match self.code() {
            "tt" => "test_test",
            "rr" => "train_train",
            "tr" => "test_train",
            _ => "train_test",
        }
    }
}

impl fmt::Display for EvalSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}→{}", self.source, self.target)
    }
}

impl FromStr for EvalSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let found = EvalSetting::ALL.into_iter().find(|st| {
            s == st.code() || s == st.snake() || s == st.to_string() || s.eq_ignore_ascii_case(&st.to_string().replace('→', "->"))
        });
        found.ok_or_else(|| Error::Config(format!("unknown setting '{s}' (expected tt, rr, tr or rt)")))
    }
}

impl TryFrom<String> for EvalSetting {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EvalSetting> for String {
    fn from(s: EvalSetting) -> String {
        s.code().to_owned()
    }
}

pub fn accuracy(outcomes: &[MatchOutcome]) -> Result<f64> {
    let flags: Vec<bool> = outcomes.iter().map(|o| o.matched).collect();
    mean_of(&flags)
}

pub fn mean_of(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::Argument("accuracy of an empty outcome list".into()));
    }
    Ok(flags.iter().filter(|&&m| m).count() as f64 / flags.len() as f64)
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for the mean of `outcomes`.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    outcomes: &[bool],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if outcomes.is_empty() {
        return Err(Error::Argument("bootstrap of an empty outcome list".into()));
    }
    if resamples < 1 {
        return Err(Error::Argument("bootstrap needs at least one resample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!("confidence level {level} not in (0, 1)")));
    }
    let n = outcomes.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let hits = (0..n).filter(|_| outcomes[rng.random_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&means, tail), quantile_sorted(&means, 1.0 - tail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RelativeGap {
    Defined(f64),
    /// Mean ID accuracy is zero, so the ratio does not exist.
    Undefined,
}

impl RelativeGap {
    pub fn value(self) -> Option<f64> {
        match self {
            RelativeGap::Defined(v) => Some(v),
            RelativeGap::Undefined => None,
        }
    }
}

impl fmt::Display for RelativeGap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelativeGap::Defined(v) => write!(f, "{v:.4}"),
            RelativeGap::Undefined => f.write_str("undefined"),
        }
    }
}

pub const UNDEFINED_GAP_NOTE: &str = "mean ID accuracy is 0; relative gap undefined";

/// `(mean_id, mean_ood, relative_gap)` from the four setting accuracies.
pub fn gap_from_accuracies(acc: &BTreeMap<EvalSetting, f64>) -> Result<(f64, f64, RelativeGap)> {
    let missing: Vec<String> = EvalSetting::ALL
        .iter()
        .filter(|s| !acc.contains_key(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Argument(format!("missing settings: {}", missing.join(", "))));
    }
    let mean_id = (acc[&EvalSetting::TEST_TEST] + acc[&EvalSetting::TRAIN_TRAIN]) / 2.0;
    let mean_ood = (acc[&EvalSetting::TEST_TRAIN] + acc[&EvalSetting::TRAIN_TEST]) / 2.0;
    let gap = if mean_id > 0.0 {
        RelativeGap::Defined((mean_id - mean_ood) / mean_id)
    } else {
        RelativeGap::Undefined
    };
    Ok((mean_id, mean_ood, gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub acc: BTreeMap<EvalSetting, f64>,
    pub mean_id: f64,
    pub mean_ood: f64,
    pub relative_gap: RelativeGap,
    pub ci: BTreeMap<EvalSetting, (f64, f64)>,
    /// Outcomes behind each setting (all seeds pooled).
    pub n: BTreeMap<EvalSetting, usize>,
    /// Gap of each seed that has all four settings.
    pub per_seed_gap: BTreeMap<u64, RelativeGap>,
}

impl GapReport {
    pub fn note(&self) -> Option<&'static str> {
        matches!(self.relative_gap, RelativeGap::Undefined).then_some(UNDEFINED_GAP_NOTE)
    }
}

/// Single-seed report straight from per-setting outcome lists.
pub fn gap_report<R: Rng + ?Sized>(
    per_setting: &BTreeMap<EvalSetting, Vec<bool>>,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<GapReport> {
    let seeded: BTreeMap<EvalSetting, BTreeMap<u64, Vec<bool>>> = per_setting
        .iter()
        .map(|(s, v)| (*s, BTreeMap::from([(0u64, v.clone())])))
        .collect();
    let mut report = gap_report_seeded(&seeded, resamples, level, rng)?;
    report.per_seed_gap.clear();
    Ok(report)
}

/// Multi-seed report: per-setting accuracy is the mean of per-seed
/// accuracies, intervals are bootstrapped over the pooled outcomes.
pub fn gap_report_seeded<R: Rng + ?Sized>(
    per_setting: &BTreeMap<EvalSetting, BTreeMap<u64, Vec<bool>>>,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<GapReport> {
    let missing: Vec<String> = EvalSetting::ALL
        .iter()
        .filter(|s| per_setting.get(s).is_none_or(|seeds| seeds.values().all(Vec::is_empty)))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Argument(format!("missing settings: {}", missing.join(", "))));
    }

    let mut acc = BTreeMap::new();
    let mut ci = BTreeMap::new();
    let mut n = BTreeMap::new();
    for setting in EvalSetting::ALL {
        let seeds = &per_setting[&setting];
        let per_seed: Vec<f64> = seeds
            .values()
            .filter(|v| !v.is_empty())
            .map(|v| mean_of(v))
            .collect::<Result<_>>()?;
        acc.insert(setting, per_seed.iter().sum::<f64>() / per_seed.len() as f64);
        let pooled: Vec<bool> = seeds.values().flatten().copied().collect();
        ci.insert(setting, bootstrap_ci(&pooled, resamples, level, rng)?);
        n.insert(setting, pooled.len());
    }
    let (mean_id, mean_ood, relative_gap) = gap_from_accuracies(&acc)?;

    let mut per_seed_gap = BTreeMap::new();
    let first = &per_setting[&EvalSetting::TEST_TEST];
    for seed in first.keys() {
        let seed_acc: Option<BTreeMap<EvalSetting, f64>> = EvalSetting::ALL
            .iter()
            .map(|s| {
                per_setting[s]
                    .get(seed)
                    .and_then(|v| mean_of(v).ok())
                    .map(|a| (*s, a))
            })
            .collect();
        if let Some(seed_acc) = seed_acc {
            per_seed_gap.insert(*seed, gap_from_accuracies(&seed_acc)?.2);
        }
    }

    Ok(GapReport {
        acc,
        mean_id,
        mean_ood,
        relative_gap,
        ci,
        n,
        per_seed_gap,
    })
}

/// Flat JSON form of a [`GapReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReportJson {
    pub acc_test_test: f64,
    pub acc_train_train: f64,
    pub acc_test_train: f64,
    pub acc_train_test: f64,
    pub mean_id: f64,
    pub mean_ood: f64,
    /// `null` when undefined.
    pub relative_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relative_gap_note: Option<String>,
    pub ci_test_test: [f64; 2],
    pub ci_train_train: [f64; 2],
    pub ci_test_train: [f64; 2],
    pub ci_train_test: [f64; 2],
    pub n_test_test: usize,
    pub n_train_train: usize,
    pub n_test_train: usize,
    pub n_train_test: usize,
    pub per_seed_relative_gap: BTreeMap<String, Option<f64>>,
}

impl From<&GapReport> for GapReportJson {
    fn from(r: &GapReport) -> Self {
        let ci = |s: EvalSetting| [r.ci[&s].0, r.ci[&s].1];
        GapReportJson {
            acc_test_test: r.acc[&EvalSetting::TEST_TEST],
            acc_train_train: r.acc[&EvalSetting::TRAIN_TRAIN],
            acc_test_train: r.acc[&EvalSetting::TEST_TRAIN],
            acc_train_test: r.acc[&EvalSetting::TRAIN_TEST],
            mean_id: r.mean_id,
            mean_ood: r.mean_ood,
            relative_gap: r.relative_gap.value(),
            relative_gap_note: r.note().map(str::to_owned),
            ci_test_test: ci(EvalSetting::TEST_TEST),
            ci_train_train: ci(EvalSetting::TRAIN_TRAIN),
            ci_test_train: ci(EvalSetting::TEST_TRAIN),
            ci_train_test: ci(EvalSetting::TRAIN_TEST),
            n_test_test: r.n[&EvalSetting::TEST_TEST],
            n_train_train: r.n[&EvalSetting::TRAIN_TRAIN],
            n_test_train: r.n[&EvalSetting::TEST_TRAIN],
            n_train_test: r.n[&EvalSetting::TRAIN_TEST],
            per_seed_relative_gap: r
                .per_seed_gap
                .iter()
                .map(|(s, g)| (s.to_string(), g.value()))
                .collect(),
        }
    }
}
