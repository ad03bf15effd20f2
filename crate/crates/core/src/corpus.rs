//! Semantic-parsing datasets: examples, splits, and on-disk formats.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::FormalTokenizer;
use crate::scorer::Normalizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "Train",
            Split::Test => "Test",
        })
    }
}

/// One natural-language / formal-language pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: usize,
    pub input_text: String,
    pub output_text: String,
    pub split: Split,
}

impl Example {
    /// Builds an example, trimming both fields. Fails if either is blank.
    pub fn new(
        id: usize,
        input_text: impl AsRef<str>,
        output_text: impl AsRef<str>,
        split: Split,
    ) -> Result<Self> {
        let input_text = input_text.as_ref().trim();
        let output_text = output_text.as_ref().trim();
        if input_text.is_empty() || output_text.is_empty() {
            return Err(Error::Argument(format!(
                "example {id} has an empty input or output"
            )));
        }
        Ok(Example {
            id,
            input_text: input_text.to_owned(),
            output_text: output_text.to_owned(),
            split,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    #[serde(rename = "cfq")]
    Cfq,
    #[serde(rename = "scan")]
    Scan,
    #[serde(rename = "geoquery")]
    GeoQuery,
    #[serde(rename = "custom")]
    Custom,
}

impl DatasetId {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::Cfq => "cfq",
            DatasetId::Scan => "scan",
            DatasetId::GeoQuery => "geoquery",
            DatasetId::Custom => "custom",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cfq" => Ok(DatasetId::Cfq),
            "scan" => Ok(DatasetId::Scan),
            "geoquery" | "geo" | "gq" => Ok(DatasetId::GeoQuery),
            "custom" => Ok(DatasetId::Custom),
            other => Err(Error::Config(format!("unknown dataset '{other}'"))),
        }
    }
}

/// Binds a dataset to its formal tokenizer, prompt template and normalizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub dataset_id: DatasetId,
    pub formal_tokenizer: FormalTokenizer,
    pub template_id: String,
    pub normalizer: Normalizer,
}

impl DatasetDescriptor {
    pub fn builtin(dataset_id: DatasetId) -> Self {
        let (formal_tokenizer, template_id, normalizer) = match dataset_id {
            DatasetId::Cfq => (FormalTokenizer::Sparql, "cfq", Normalizer::CfqSparql),
            DatasetId::Scan => (FormalTokenizer::ScanActions, "scan", Normalizer::StripPeriod),
            DatasetId::GeoQuery => (FormalTokenizer::FunQl, "geoquery", Normalizer::StripPeriod),
            DatasetId::Custom => (
                FormalTokenizer::Whitespace,
                "custom",
                Normalizer::WhitespaceOnly,
            ),
        };
        DatasetDescriptor {
            dataset_id,
            formal_tokenizer,
            template_id: template_id.to_owned(),
            normalizer,
        }
    }

    pub fn cfq() -> Self {
        Self::builtin(DatasetId::Cfq)
    }

    pub fn scan() -> Self {
        Self::builtin(DatasetId::Scan)
    }

    pub fn geoquery() -> Self {
        Self::builtin(DatasetId::GeoQuery)
    }

    pub fn custom(
        formal_tokenizer: FormalTokenizer,
        template_id: impl Into<String>,
        normalizer: Normalizer,
    ) -> Self {
        DatasetDescriptor {
            dataset_id: DatasetId::Custom,
            formal_tokenizer,
            template_id: template_id.into(),
            normalizer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitFormat {
    Tsv,
    Jsonl,
}

impl SplitFormat {
    /// `.jsonl` / `.json` select JSONL; everything else is TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => SplitFormat::Jsonl,
            _ => SplitFormat::Tsv,
        }
    }
}

#[derive(Deserialize)]
struct JsonRow {
    input: String,
    output: String,
}

#[derive(Serialize)]
struct JsonRowRef<'a> {
    input: &'a str,
    output: &'a str,
}

/// Load one split. Ids are assigned densely in file order; blank lines are skipped.
pub fn load_split(path: impl AsRef<Path>, format: SplitFormat, split: Split) -> Result<Vec<Example>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let examples = parse_split(&text, format, split).map_err(|(line, message)| Error::Load {
        path: path.to_owned(),
        line,
        message,
    })?;
    if examples.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_owned(),
        });
    }
    Ok(examples)
}

/// Parse split contents; errors carry a 1-based line number.
pub fn parse_split(
    text: &str,
    format: SplitFormat,
    split: Split,
) -> std::result::Result<Vec<Example>, (usize, String)> {
    let mut examples = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (input, output) = match format {
            SplitFormat::Tsv => {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 2 {
                    return Err((
                        line_no,
                        format!("expected 2 tab-separated fields, found {}", fields.len()),
                    ));
                }
                (fields[0].to_owned(), fields[1].to_owned())
            }
            SplitFormat::Jsonl => {
                let row: JsonRow = serde_json::from_str(line).map_err(|e| {
                    (
                        line_no,
                        format!("expected an object with string fields \"input\" and \"output\": {e}"),
                    )
                })?;
                (row.input, row.output)
            }
        };
        let id = examples.len();
        let example = Example::new(id, &input, &output, split)
            .map_err(|_| (line_no, "input or output is empty".to_owned()))?;
        examples.push(example);
    }
    Ok(examples)
}

/// Write examples in the given format. Fields containing a tab or newline
/// cannot be represented in TSV and are rejected.
pub fn write_split(path: impl AsRef<Path>, format: SplitFormat, examples: &[Example]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for ex in examples {
        match format {
            SplitFormat::Tsv => {
                let bad = |s: &str| s.contains('\t') || s.contains('\n');
                if bad(&ex.input_text) || bad(&ex.output_text) {
                    return Err(Error::Argument(format!(
                        "example {} contains a tab or newline and cannot be written as TSV",
                        ex.id
                    )));
                }
                writeln!(out, "{}\t{}", ex.input_text, ex.output_text)
                    .map_err(|e| Error::io(path, e))?;
            }
            SplitFormat::Jsonl => {
                let row = JsonRowRef {
                    input: &ex.input_text,
                    output: &ex.output_text,
                };
                serde_json::to_writer(&mut out, &row)?;
                out.push(b'\n');
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_row() {
        let got = parse_split("jump\tJUMP\n", SplitFormat::Tsv, Split::Train).unwrap();
        assert_eq!(
            got,
            vec![Example {
                id: 0,
                input_text: "jump".into(),
                output_text: "JUMP".into(),
                split: Split::Train
            }]
        );
    }

    #[test]
    fn jsonl_row() {
        let got = parse_split(
            r#"{"input":"walk twice","output":"WALK WALK"}"#,
            SplitFormat::Jsonl,
            Split::Test,
        )
        .unwrap();
        assert_eq!(got[0].input_text, "walk twice");
        assert_eq!(got[0].output_text, "WALK WALK");
        assert_eq!(got[0].split, Split::Test);
    }

    #[test]
    fn three_field_row_reports_its_line() {
        let mut text = String::new();
        for i in 0..6 {
            text.push_str(&format!("walk {i}\tWALK\n"));
        }
        text.push_str("a\tb\tc\n");
        let err = parse_split(&text, SplitFormat::Tsv, Split::Train).unwrap_err();
        assert_eq!(err.0, 7);
    }

    #[test]
    fn jsonl_missing_key_is_an_error() {
        let err = parse_split("{\"input\":\"x\"}\n", SplitFormat::Jsonl, Split::Train).unwrap_err();
        assert_eq!(err.0, 1);
        let err = parse_split("{\"input\":\"x\",\"output\":3}", SplitFormat::Jsonl, Split::Train)
            .unwrap_err();
        assert_eq!(err.0, 1);
    }

    #[test]
    fn trims_outer_whitespace_keeps_interior() {
        let got = parse_split(" walk  twice \t WALK  WALK \r\n", SplitFormat::Tsv, Split::Train)
            .unwrap();
        assert_eq!(got[0].input_text, "walk  twice");
        assert_eq!(got[0].output_text, "WALK  WALK");
    }

    #[test]
    fn blank_field_is_an_error() {
        let err = parse_split("ok\tOK\n  \tX\n", SplitFormat::Tsv, Split::Train).unwrap_err();
        assert_eq!(err.0, 2);
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.tsv");
        fs::write(&path, "\n\n").unwrap();
        assert!(matches!(
            load_split(&path, SplitFormat::Tsv, Split::Train),
            Err(Error::EmptyFile { .. })
        ));
    }

    #[test]
    fn duplicates_are_kept_and_ids_dense() {
        let got = parse_split("a\tA\na\tA\n\nb\tB\n", SplitFormat::Tsv, Split::Test).unwrap();
        let ids: Vec<usize> = got.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(got[0].input_text, got[1].input_text);
    }

    #[test]
    fn descriptor_bindings() {
        let cfq = DatasetDescriptor::cfq();
        assert_eq!(cfq.formal_tokenizer, FormalTokenizer::Sparql);
        assert_eq!(cfq.normalizer, Normalizer::CfqSparql);
        assert_eq!(DatasetDescriptor::scan().template_id, "scan");
        assert_eq!(
            DatasetDescriptor::geoquery().formal_tokenizer,
            FormalTokenizer::FunQl
        );
    }
}
