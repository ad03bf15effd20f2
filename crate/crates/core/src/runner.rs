//! End-to-end evaluation runs and reporting.
//!
//! A run writes three files into its output directory:
//!
//! * `config.json` – the resolved configuration, written before any model call;
//! * `entries.jsonl` – one [`RunEntry`] per line, append-only;
//! * `run_record.json` – configuration plus per-(setting, seed) aggregates.
//!
//! Re-running with the same configuration skips every `(setting, seed,
//! example)` key already present in `entries.jsonl`, so an interrupted run
//! can be resumed and ends byte-identical to an uninterrupted one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::client::{extract_prediction, CompletionModel, CompletionParams, ModelEndpoint};
use crate::corpus::{load_split, DatasetDescriptor, DatasetId, Example, Split, SplitFormat};
use crate::error::{Error, Result};
use crate::metrics::{gap_report_seeded, EvalSetting, GapReport, GapReportJson};
use crate::primitives::FormalTokenizer;
use crate::prompt::{render_prompt, PromptTemplate, TemplateRegistry};
use crate::sampler::{exemplar_rng, query_indices, CandidatePool};
use crate::scorer::{exact_match, Normalizer};
use crate::seed::{derive_rng, sha256_hex};

pub const CONFIG_FILE: &str = "config.json";
pub const ENTRIES_FILE: &str = "entries.jsonl";
pub const RECORD_FILE: &str = "run_record.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Groups records in reports (e.g. the model name).
    #[serde(default = "default_label")]
    pub model_label: String,
    pub dataset: DatasetId,
    /// Overrides for the dataset's built-in bindings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal_tokenizer: Option<FormalTokenizer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<Normalizer>,
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default = "default_settings")]
    pub settings: Vec<EvalSetting>,
    pub shots: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_queries")]
    pub max_queries: usize,
    pub endpoint: ModelEndpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<CompletionParams>,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub out: PathBuf,
    /// Cap on in-flight model calls.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub store_prompts: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub templates: BTreeMap<String, PromptTemplate>,
}

fn default_label() -> String {
    "model".into()
}

fn default_settings() -> Vec<EvalSetting> {
    EvalSetting::ALL.to_vec()
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_max_queries() -> usize {
    1045
}

fn default_resamples() -> usize {
    5000
}

fn default_level() -> f64 {
    0.95
}

fn default_concurrency() -> usize {
    4
}

impl RunConfig {
    /// Minimal config with every default applied.
    pub fn new(
        dataset: DatasetId,
        train: impl Into<PathBuf>,
        test: impl Into<PathBuf>,
        shots: usize,
        endpoint: ModelEndpoint,
        out: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            model_label: default_label(),
            dataset,
            formal_tokenizer: None,
            template_id: None,
            normalizer: None,
            train: train.into(),
            test: test.into(),
            settings: default_settings(),
            shots,
            seeds: default_seeds(),
            max_queries: default_max_queries(),
            endpoint,
            params: None,
            resamples: default_resamples(),
            level: default_level(),
            out: out.into(),
            concurrency: default_concurrency(),
            store_prompts: false,
            templates_file: None,
            templates: BTreeMap::new(),
        }
    }

    /// Parse a TOML config. Relative paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        Self::from_table(resolve_paths(table, base_dir))
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    /// Read a config file as a TOML table with paths made absolute relative
    /// to the file, ready for command-line overrides.
    pub fn load_table(path: impl AsRef<Path>) -> Result<toml::Table> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(resolve_paths(table, base))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(Self::load_table(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots < 1 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.max_queries < 1 {
            return Err(Error::Config("max_queries must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.settings.is_empty() {
            return Err(Error::Config("at least one setting is required".into()));
        }
        if self.concurrency < 1 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        if self.resamples < 1 || !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("resamples must be ≥ 1 and level in (0, 1)".into()));
        }
        let unique: BTreeSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        let unique: BTreeSet<_> = self.settings.iter().collect();
        if unique.len() != self.settings.len() {
            return Err(Error::Config("settings must be distinct".into()));
        }
        if let Some(p) = &self.params {
            p.validate()?;
        }
        self.endpoint.validate()
    }

    pub fn descriptor(&self) -> DatasetDescriptor {
        let mut d = DatasetDescriptor::builtin(self.dataset);
        if let Some(t) = self.formal_tokenizer {
            d.formal_tokenizer = t;
        }
        if let Some(t) = &self.template_id {
            d.template_id = t.clone();
        }
        if let Some(n) = self.normalizer {
            d.normalizer = n;
        }
        d
    }

    pub fn completion_params(&self) -> CompletionParams {
        self.params
            .clone()
            .unwrap_or_else(|| CompletionParams::for_dataset(self.dataset))
    }

    pub fn template(&self) -> Result<PromptTemplate> {
        let mut registry = match &self.templates_file {
            Some(path) => TemplateRegistry::load(path)?,
            None => TemplateRegistry::default(),
        };
        for (id, t) in &self.templates {
            registry.insert(id.clone(), t.clone())?;
        }
        registry.get(&self.descriptor().template_id)
    }
}

fn resolve_paths(mut table: toml::Table, base: &Path) -> toml::Table {
    for key in ["train", "test", "out", "templates_file"] {
        if let Some(toml::Value::String(s)) = table.get(key) {
            let p = Path::new(s);
            if p.is_relative() {
                let joined = base.join(p).to_string_lossy().into_owned();
                table.insert(key.into(), toml::Value::String(joined));
            }
        }
    }
    table
}

/// One scored query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub setting: EvalSetting,
    pub seed: u64,
    pub example_id: usize,
    pub exemplar_ids: Vec<usize>,
    pub coverage_fraction: f64,
    pub prompt_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub raw_completion: String,
    pub prediction: String,
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunEntry {
    pub fn key(&self) -> (EvalSetting, u64, usize) {
        (self.setting, self.seed, self.example_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub setting: EvalSetting,
    pub seed: u64,
    pub n: usize,
    pub matched: usize,
    pub failures: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    pub entries: Vec<RunEntry>,
    pub aggregates: Vec<Aggregate>,
}

impl RunRecord {
    /// Load from a `run_record.json` path or the directory containing it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path.push(RECORD_FILE);
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let summary: RunSummary = serde_json::from_str(&text)?;
        let entries_path = path.with_file_name(ENTRIES_FILE);
        let entries = read_entries(&entries_path, false)?;
        Ok(RunRecord {
            config: summary.config,
            entries,
            aggregates: summary.aggregates,
        })
    }

    /// Aggregates recomputed from the entries, in (settings, seeds) config order.
    pub fn recompute_aggregates(&self) -> Vec<Aggregate> {
        aggregate(&self.config, &self.entries)
    }
}

fn aggregate(config: &RunConfig, entries: &[RunEntry]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &setting in &config.settings {
        for &seed in &config.seeds {
            let cell: Vec<&RunEntry> = entries
                .iter()
                .filter(|e| e.setting == setting && e.seed == seed)
                .collect();
            let n = cell.len();
            let matched = cell.iter().filter(|e| e.matched).count();
            let failures = cell.iter().filter(|e| e.error.is_some()).count();
            out.push(Aggregate {
                setting,
                seed,
                n,
                matched,
                failures,
                accuracy: if n == 0 { 0.0 } else { matched as f64 / n as f64 },
            });
        }
    }
    out
}

/// Read entries; with `repair`, a trailing partial line (from an interrupted
/// write) is cut from the file.
fn read_entries(path: &Path, repair: bool) -> Result<Vec<RunEntry>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() != text.len() {
        if !repair {
            return Err(Error::Report(format!("{}: truncated final line", path.display())));
        }
        let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        f.set_len(complete.len() as u64).map_err(|e| Error::io(path, e))?;
    }
    complete
        .lines()
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Everything a run needs, checked before the first model call.
pub struct PreparedRun {
    config: RunConfig,
    descriptor: DatasetDescriptor,
    template: PromptTemplate,
    params: CompletionParams,
    train: Vec<Example>,
    test: Vec<Example>,
    model: Arc<dyn CompletionModel>,
}

impl PreparedRun {
    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn split(&self, split: Split) -> &[Example] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

/// Validate the config, load both splits, resolve the template and connect
/// the model. Any error here is a configuration error.
pub fn prepare(config: RunConfig) -> Result<PreparedRun> {
    let as_config = |e: Error| match e {
        Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
        other => other,
    };
    config.validate()?;
    let descriptor = config.descriptor();
    let template = config.template()?;
    let train = load_split(&config.train, SplitFormat::from_path(&config.train), Split::Train)
        .map_err(as_config)?;
    let test = load_split(&config.test, SplitFormat::from_path(&config.test), Split::Test)
        .map_err(as_config)?;
    let model = {
        let gold: Vec<&Example> = train.iter().chain(test.iter()).collect();
        config.endpoint.connect(&template, &gold)?
    };
    Ok(PreparedRun {
        params: config.completion_params(),
        config,
        descriptor,
        template,
        train,
        test,
        model,
    })
}

/// Prepare and execute in one call.
pub fn run(config: RunConfig) -> Result<RunRecord> {
    execute(prepare(config)?)
}

/// Use a caller-supplied model instead of connecting the configured endpoint.
pub fn prepare_with_model(config: RunConfig, model: Arc<dyn CompletionModel>) -> Result<PreparedRun> {
    let mut prepared = prepare(RunConfig {
        endpoint: ModelEndpoint::OracleMock,
        ..config.clone()
    })?;
    prepared.config = config;
    prepared.model = model;
    Ok(prepared)
}

pub fn execute(prepared: PreparedRun) -> Result<RunRecord> {
    let config = &prepared.config;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;

    let config_path = config.out.join(CONFIG_FILE);
    let config_json = serde_json::to_string_pretty(config)? + "\n";
    let entries_path = config.out.join(ENTRIES_FILE);
    match fs::read_to_string(&config_path) {
        Ok(existing) if existing != config_json && entries_path.exists() => {
            return Err(Error::Config(format!(
                "{} holds a different configuration; use a fresh output directory",
                config.out.display()
            )));
        }
        _ => fs::write(&config_path, &config_json).map_err(|e| Error::io(&config_path, e))?,
    }

    let mut entries = read_entries(&entries_path, true)?;
    let done: HashSet<(EvalSetting, u64, usize)> = entries.iter().map(RunEntry::key).collect();
    let mut sink = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&entries_path)
        .map_err(|e| Error::io(&entries_path, e))?;

    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunk_size = config.concurrency * 8;

    let mut planned: HashSet<(EvalSetting, u64, usize)> = HashSet::new();
    for &setting in &config.settings {
        let pool = CandidatePool::new(prepared.split(setting.source).to_vec(), &prepared.descriptor)?;
        let queries = prepared.split(setting.target);
        for &seed in &config.seeds {
            let todo: Vec<&Example> = query_indices(queries.len(), config.max_queries, seed, setting)
                .into_iter()
                .map(|i| &queries[i])
                .inspect(|q| {
                    planned.insert((setting, seed, q.id));
                })
                .filter(|q| !done.contains(&(setting, seed, q.id)))
                .collect();
            for chunk in todo.chunks(chunk_size) {
                let fresh: Vec<RunEntry> = threads.install(|| {
                    chunk
                        .par_iter()
                        .map(|q| evaluate_query(&prepared, &pool, setting, seed, q))
                        .collect::<Result<_>>()
                })?;
                let mut buf = Vec::new();
                for e in &fresh {
                    serde_json::to_writer(&mut buf, e)?;
                    buf.push(b'\n');
                }
                sink.write_all(&buf).map_err(|e| Error::io(&entries_path, e))?;
                sink.flush().map_err(|e| Error::io(&entries_path, e))?;
                entries.extend(fresh);
            }
        }
    }

    if let Some(stray) = entries.iter().find(|e| !planned.contains(&e.key())) {
        return Err(Error::Config(format!(
            "{} contains entry ({}, seed {}, example {}) outside this run's plan",
            entries_path.display(),
            stray.setting,
            stray.seed,
            stray.example_id
        )));
    }

    let aggregates = aggregate(config, &entries);
    let summary = RunSummary {
        config: config.clone(),
        aggregates,
    };
    let record_path = config.out.join(RECORD_FILE);
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(&record_path, json).map_err(|e| Error::io(&record_path, e))?;
    Ok(RunRecord {
        config: summary.config,
        entries,
        aggregates: summary.aggregates,
    })
}

fn evaluate_query(
    prepared: &PreparedRun,
    pool: &CandidatePool,
    setting: EvalSetting,
    seed: u64,
    query: &Example,
) -> Result<RunEntry> {
    let config = &prepared.config;
    let exclude = setting.is_id().then_some(query.id);
    let mut rng = exemplar_rng(seed, setting, query.id);
    let selection = pool.select(query, config.shots, exclude, &mut rng)?;
    let prompt = render_prompt(&prepared.template, &selection.exemplars, &query.input_text)?;
    let (raw_completion, error) = match prepared.model.complete(&prompt, &prepared.params) {
        Ok(raw) => (raw, None),
        Err(e) => (String::new(), Some(e.to_string())),
    };
    let prediction = extract_prediction(&raw_completion, &prepared.template);
    let matched = error.is_none()
        && exact_match(&prepared.descriptor, query.id, &prediction, &query.output_text).matched;
    Ok(RunEntry {
        setting,
        seed,
        example_id: query.id,
        exemplar_ids: selection.exemplar_ids(),
        coverage_fraction: selection.coverage_fraction,
        prompt_hash: sha256_hex(&prompt),
        prompt: config.store_prompts.then_some(prompt),
        raw_completion,
        prediction,
        matched,
        error,
    })
}

/// Identifies one gap report.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReportKey {
    pub model: String,
    pub dataset: String,
    pub shots: usize,
}

impl std::fmt::Display for ReportKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}-shot", self.model, self.dataset, self.shots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReportFile {
    pub model: String,
    pub dataset: String,
    pub shots: usize,
    pub seeds: Vec<u64>,
    pub resamples: usize,
    pub level: f64,
    #[serde(flatten)]
    pub report: GapReportJson,
}

/// Expand a glob to `run_record.json` files; a matched directory stands for
/// the record inside it, other files are ignored.
pub fn find_records(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| Error::Config(format!("bad glob '{pattern}': {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        let p = p.map_err(|e| Error::Report(e.to_string()))?;
        let p = if p.is_dir() { p.join(RECORD_FILE) } else { p };
        if p.is_file() && p.file_name().is_some_and(|n| n == RECORD_FILE) {
            out.push(p);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Group records by (model, dataset, shots) and build one gap report per group.
pub fn build_reports(records: &[RunRecord]) -> Result<BTreeMap<ReportKey, (GapReport, GapReportFile)>> {
    type Cells = BTreeMap<EvalSetting, BTreeMap<u64, Vec<(usize, bool)>>>;
    let mut groups: BTreeMap<ReportKey, (Cells, usize, f64)> = BTreeMap::new();
    for rec in records {
        let key = ReportKey {
            model: rec.config.model_label.clone(),
            dataset: rec.config.descriptor().dataset_id.to_string(),
            shots: rec.config.shots,
        };
        let (cells, _, _) = groups
            .entry(key.clone())
            .or_insert_with(|| (Cells::new(), rec.config.resamples, rec.config.level));
        let mut seen_here: BTreeSet<(EvalSetting, u64)> = BTreeSet::new();
        for e in &rec.entries {
            let cell = cells.entry(e.setting).or_default().entry(e.seed).or_default();
            if seen_here.insert((e.setting, e.seed)) && !cell.is_empty() {
                return Err(Error::Report(format!(
                    "{key}: {} seed {} appears in more than one record",
                    e.setting, e.seed
                )));
            }
            cell.push((e.example_id, e.matched));
        }
    }

    let mut missing = Vec::new();
    for (key, (cells, _, _)) in &groups {
        let absent: Vec<String> = EvalSetting::ALL
            .iter()
            .filter(|s| cells.get(s).is_none_or(BTreeMap::is_empty))
            .map(|s| s.to_string())
            .collect();
        if !absent.is_empty() {
            missing.push(format!("{key}: missing {}", absent.join(", ")));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Report(format!("incomplete setting coverage: {}", missing.join("; "))));
    }

    let mut out = BTreeMap::new();
    for (key, (cells, resamples, level)) in groups {
        let outcomes: BTreeMap<EvalSetting, BTreeMap<u64, Vec<bool>>> = cells
            .into_iter()
            .map(|(s, seeds)| {
                let seeds = seeds
                    .into_iter()
                    .map(|(seed, mut v)| {
                        v.sort_by_key(|(id, _)| *id);
                        (seed, v.into_iter().map(|(_, m)| m).collect())
                    })
                    .collect();
                (s, seeds)
            })
            .collect();
        let seeds: Vec<u64> = outcomes
            .values()
            .flat_map(|s| s.keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut rng = derive_rng(&[&"report", &key.model, &key.dataset, &key.shots]);
        let report = gap_report_seeded(&outcomes, resamples, level, &mut rng)?;
        let file = GapReportFile {
            model: key.model.clone(),
            dataset: key.dataset.clone(),
            shots: key.shots,
            seeds,
            resamples,
            level,
            report: GapReportJson::from(&report),
        };
        out.insert(key, (report, file));
    }
    Ok(out)
}

fn file_stem(key: &ReportKey) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
            .collect()
    };
    format!("gap_{}_{}_{}shot", clean(&key.model), clean(&key.dataset), key.shots)
}

fn gap_cell(report: &GapReport) -> String {
    report
        .relative_gap
        .value()
        .map(|g| format!("{g:.6}"))
        .unwrap_or_default()
}

/// Write one JSON report per group plus plot-data CSVs. Returns written paths.
pub fn report(record_paths: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if record_paths.is_empty() {
        return Err(Error::Report("no run records given".into()));
    }
    let records: Vec<RunRecord> = record_paths.iter().map(RunRecord::load).collect::<Result<_>>()?;
    let reports = build_reports(&records)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut written = Vec::new();
    let mut shots_csv = String::from("model,dataset,shots,mean_id,mean_ood,relative_gap\n");
    let mut ood_csv = String::from("model,dataset,shots,mean_ood,relative_gap\n");
    let mut id_csv = String::from("model,dataset,shots,mean_id,mean_ood\n");
    let mut full_csv = String::from("model,dataset,shots");
    for s in EvalSetting::ALL {
        full_csv.push_str(&format!(",acc_{0},ci_lo_{0},ci_hi_{0}", s.snake()));
    }
    full_csv.push_str(",mean_id,mean_ood,relative_gap\n");

    for (key, (report, file)) in &reports {
        let path = out_dir.join(format!("{}.json", file_stem(key)));
        let json = serde_json::to_string_pretty(file)? + "\n";
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        written.push(path);

        let head = format!("{},{},{}", key.model, key.dataset, key.shots);
        let gap = gap_cell(report);
        shots_csv.push_str(&format!("{head},{:.6},{:.6},{gap}\n", report.mean_id, report.mean_ood));
        ood_csv.push_str(&format!("{head},{:.6},{gap}\n", report.mean_ood));
        id_csv.push_str(&format!("{head},{:.6},{:.6}\n", report.mean_id, report.mean_ood));
        full_csv.push_str(&head);
        for s in EvalSetting::ALL {
            let (lo, hi) = report.ci[&s];
            full_csv.push_str(&format!(",{:.6},{lo:.6},{hi:.6}", report.acc[&s]));
        }
        full_csv.push_str(&format!(",{:.6},{:.6},{gap}\n", report.mean_id, report.mean_ood));
    }

    for (name, body) in [
        ("gap_vs_shots.csv", shots_csv),
        ("gap_vs_ood.csv", ood_csv),
        ("ood_vs_id.csv", id_csv),
        ("gap_reports.csv", full_csv),
    ] {
        let path = out_dir.join(name);
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
