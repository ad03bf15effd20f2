//! Prompt templates and rendering.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Example;
use crate::error::{Error, Result};

pub const DEFAULT_PAIR_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub prefix_text: String,
    pub input_prefix: String,
    pub output_prefix: String,
    #[serde(default = "default_separator")]
    pub pair_separator: String,
}

fn default_separator() -> String {
    DEFAULT_PAIR_SEPARATOR.to_owned()
}

impl PromptTemplate {
    pub fn new(
        prefix_text: impl Into<String>,
        input_prefix: impl Into<String>,
        output_prefix: impl Into<String>,
    ) -> Result<Self> {
        let t = PromptTemplate {
            prefix_text: prefix_text.into(),
            input_prefix: input_prefix.into(),
            output_prefix: output_prefix.into(),
            pair_separator: default_separator(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let well_formed = |p: &str| {
            p.strip_suffix(": ")
                .is_some_and(|head| !head.is_empty() && !head.contains(char::is_whitespace))
        };
        if !well_formed(&self.input_prefix) || !well_formed(&self.output_prefix) {
            return Err(Error::Config(format!(
                "prefixes must look like 'Word: ' (got {:?} and {:?})",
                self.input_prefix, self.output_prefix
            )));
        }
        if self.input_prefix == self.output_prefix {
            return Err(Error::Config("input and output prefixes must differ".into()));
        }
        if self.pair_separator.is_empty() {
            return Err(Error::Config("pair separator must not be empty".into()));
        }
        Ok(())
    }

    pub fn cfq() -> Self {
        PromptTemplate {
            prefix_text: "As a programmer, I can correctly translate any complicated question to a SPARQL query.".into(),
            input_prefix: "Question: ".into(),
            output_prefix: "Query: ".into(),
            pair_separator: default_separator(),
        }
    }

    pub fn scan() -> Self {
        PromptTemplate {
            prefix_text: "Here are some examples of converting complicated commands to correct navigation actions.".into(),
            input_prefix: "Command: ".into(),
            output_prefix: "Actions: ".into(),
            pair_separator: default_separator(),
        }
    }

    pub fn geoquery() -> Self {
        PromptTemplate {
            prefix_text: "As a programmer, I can correctly translate any complicated question to a meaning representation query.".into(),
            input_prefix: "Question: ".into(),
            output_prefix: "Query: ".into(),
            pair_separator: default_separator(),
        }
    }

    /// Built-in templates: `cfq`, `scan`, `geoquery`.
    pub fn builtin(id: &str) -> Option<Self> {
        match id {
            "cfq" => Some(Self::cfq()),
            "scan" => Some(Self::scan()),
            "geoquery" => Some(Self::geoquery()),
            _ => None,
        }
    }
}

/// Built-in templates overlaid with user templates from a TOML file.
///
/// ```toml
/// [templates.mytask]
/// prefix_text = "Translate the following."
/// input_prefix = "Input: "
/// output_prefix = "Output: "
/// ```
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    user: BTreeMap<String, PromptTemplate>,
}

#[derive(Deserialize)]
struct TemplateFile {
    #[serde(default)]
    templates: BTreeMap<String, PromptTemplate>,
}

impl TemplateRegistry {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TemplateFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("template file: {e}")))?;
        for (id, t) in &file.templates {
            t.validate()
                .map_err(|e| Error::Config(format!("template '{id}': {e}")))?;
        }
        Ok(TemplateRegistry {
            user: file.templates,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn insert(&mut self, id: impl Into<String>, template: PromptTemplate) -> Result<()> {
        template.validate()?;
        self.user.insert(id.into(), template);
        Ok(())
    }

    /// User templates shadow built-ins with the same id.
    pub fn get(&self, id: &str) -> Result<PromptTemplate> {
        self.user
            .get(id)
            .cloned()
            .or_else(|| PromptTemplate::builtin(id))
            .ok_or_else(|| Error::Config(format!("unknown template '{id}'")))
    }
}

/// Render a few-shot prompt ending at the generation point (`output_prefix`,
/// trailing space, no newline).
pub fn render_prompt(template: &PromptTemplate, exemplars: &[Example], query_input: &str) -> Result<String> {
    render_pairs(
        template,
        exemplars
            .iter()
            .map(|e| (e.input_text.as_str(), e.output_text.as_str())),
        query_input,
    )
}

pub fn render_pairs<'a>(
    template: &PromptTemplate,
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    query_input: &str,
) -> Result<String> {
    let sep = &template.pair_separator;
    let mut out = String::new();
    out.push_str(&template.prefix_text);
    let mut n = 0;
    for (input, output) in pairs {
        out.push_str(sep);
        out.push_str(&template.input_prefix);
        out.push_str(input);
        out.push('\n');
        out.push_str(&template.output_prefix);
        out.push_str(output);
        n += 1;
    }
    if n == 0 {
        return Err(Error::Argument("a prompt needs at least one exemplar".into()));
    }
    out.push_str(sep);
    out.push_str(&template.input_prefix);
    out.push_str(query_input);
    out.push('\n');
    out.push_str(&template.output_prefix);
    Ok(out)
}

/// Text after the last line starting with the input prefix, up to its end of line.
pub fn query_input_of<'a>(template: &PromptTemplate, prompt: &'a str) -> Option<&'a str> {
    let prefix = &template.input_prefix;
    let start = if let Some(pos) = prompt.rfind(&format!("\n{prefix}")) {
        pos + 1 + prefix.len()
    } else if prompt.starts_with(prefix.as_str()) {
        prefix.len()
    } else {
        return None;
    };
    let rest = &prompt[start..];
    Some(rest.split('\n').next().unwrap_or(rest))
}

/// Inverse of rendering: the exemplar pairs and the query input.
/// Returns `None` if the prompt does not have the rendered shape.
pub fn parse_prompt(template: &PromptTemplate, prompt: &str) -> Option<(Vec<(String, String)>, String)> {
    let body = prompt.strip_prefix(template.prefix_text.as_str())?;
    let body = body.strip_prefix(template.pair_separator.as_str())?;
    let mut blocks: Vec<&str> = body.split(template.pair_separator.as_str()).collect();
    let last = blocks.pop()?;
    let query = last
        .strip_prefix(template.input_prefix.as_str())?
        .strip_suffix(template.output_prefix.as_str())?
        .strip_suffix('\n')?;
    let mut pairs = Vec::with_capacity(blocks.len());
    for block in blocks {
        let (inp, out) = block.split_once('\n')?;
        pairs.push((
            inp.strip_prefix(template.input_prefix.as_str())?.to_owned(),
            out.strip_prefix(template.output_prefix.as_str())?.to_owned(),
        ));
    }
    Some((pairs, query.to_owned()))
}
