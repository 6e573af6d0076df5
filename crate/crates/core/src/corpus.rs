//! Tables, instances, tokenization and the JSONL dataset format.
//!
//! A dataset file holds one instance per line:
//!
//! ```json
//! {"table": [{"attribute": "name", "value": "ada lovelace"}], "references": [["ada", "lovelace", "."]]}
//! ```
//!
//! Record order in the file is authoritative: it fixes the order of the
//! linearized source sequence.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Tokens = Vec<String>;

/// Lowercases `text` and splits it into word and punctuation tokens.
///
/// Alphanumeric runs form words; every other non-whitespace character is a
/// token of its own.
pub fn tokenize(text: &str) -> Tokens {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in lowered.chars() {
        if ch.is_alphanumeric() {
            word.push(ch);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !ch.is_whitespace() {
            tokens.push(ch.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Tokens of an attribute name, with underscores treated as spaces.
pub fn attribute_tokens(attribute: &str) -> Tokens {
    tokenize(&attribute.replace('_', " "))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RecordRepr", into = "RecordRepr")]
pub struct Record {
    attribute: String,
    value: String,
    entity_index: Option<u32>,
    value_tokens: Tokens,
}

#[derive(Serialize, Deserialize)]
struct RecordRepr {
    attribute: String,
    value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entity: Option<u32>,
}

impl TryFrom<RecordRepr> for Record {
    type Error = Error;

    fn try_from(repr: RecordRepr) -> Result<Self> {
        Record::with_entity(repr.attribute, repr.value, repr.entity)
    }
}

impl From<Record> for RecordRepr {
    fn from(record: Record) -> Self {
        RecordRepr {
            attribute: record.attribute,
            value: record.value,
            entity: record.entity_index,
        }
    }
}

impl Record {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Result<Self> {
        Self::with_entity(attribute, value, None)
    }

    pub fn with_entity(
        attribute: impl Into<String>,
        value: impl Into<String>,
        entity_index: Option<u32>,
    ) -> Result<Self> {
        let attribute = attribute.into();
        let value = value.into();
        if attribute.trim().is_empty() {
            return Err(Error::InvalidRecord("empty attribute".into()));
        }
        let value_tokens = tokenize(&value);
        if value_tokens.is_empty() {
            return Err(Error::InvalidRecord(format!(
                "value of `{attribute}` has no tokens"
            )));
        }
        Ok(Record {
            attribute,
            value,
            entity_index,
            value_tokens,
        })
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn entity_index(&self) -> Option<u32> {
        self.entity_index
    }

    pub fn value_tokens(&self) -> &[String] {
        &self.value_tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Record>", into = "Vec<Record>")]
pub struct Table {
    records: Vec<Record>,
}

impl TryFrom<Vec<Record>> for Table {
    type Error = Error;

    fn try_from(records: Vec<Record>) -> Result<Self> {
        Table::new(records)
    }
}

impl From<Table> for Vec<Record> {
    fn from(table: Table) -> Self {
        table.records
    }
}

impl Table {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidInstance("table has no records".into()));
        }
        Ok(Table { records })
    }

    /// Builds a table from `(attribute, value)` pairs.
    pub fn from_pairs<A: AsRef<str>, V: AsRef<str>>(pairs: &[(A, V)]) -> Result<Self> {
        let records = pairs
            .iter()
            .map(|(a, v)| Record::new(a.as_ref(), v.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Table::new(records)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_entities(&self) -> bool {
        self.records.iter().any(|r| r.entity_index.is_some())
    }

    /// Every value token, in record order.
    pub fn value_tokens(&self) -> impl Iterator<Item = &str> {
        self.records
            .iter()
            .flat_map(|r| r.value_tokens.iter().map(String::as_str))
    }

    /// Value tokens plus tokenized attribute names.
    pub fn lexicon(&self) -> BTreeSet<String> {
        let mut lexicon: BTreeSet<String> = self.value_tokens().map(str::to_owned).collect();
        for record in &self.records {
            lexicon.extend(attribute_tokens(&record.attribute));
        }
        lexicon
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    table: Table,
    references: Vec<Tokens>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    table: Table,
    references: Vec<Tokens>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(repr: InstanceRepr) -> Result<Self> {
        Instance::new(repr.table, repr.references)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(instance: Instance) -> Self {
        InstanceRepr {
            table: instance.table,
            references: instance.references,
        }
    }
}

impl Instance {
    pub fn new(table: Table, references: Vec<Tokens>) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidInstance("no references".into()));
        }
        if references.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInstance("empty reference".into()));
        }
        Ok(Instance { table, references })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn references(&self) -> &[Tokens] {
        &self.references
    }

    /// The first reference, used as the teacher-forcing target.
    pub fn primary_reference(&self) -> &[String] {
        &self.references[0]
    }
}

/// One linearized table token: `(value, field, p+, p-)` plus an optional
/// entity index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceToken {
    pub value_token: String,
    pub attribute: String,
    pub pos_fwd: u32,
    pub pos_bwd: u32,
    pub entity_index: Option<u32>,
}

pub type SourceSequence = Vec<SourceToken>;

/// One source token per value token, in record order.
///
/// When any record carries an entity index, every token gets one (records
/// without an index default to 0); otherwise none do.
pub fn linearize_table(table: &Table) -> SourceSequence {
    let with_entities = table.has_entities();
    let mut out = Vec::with_capacity(table.value_tokens().count());
    for record in table.records() {
        let n = record.value_tokens.len() as u32;
        let entity = with_entities.then(|| record.entity_index.unwrap_or(0));
        for (i, token) in record.value_tokens.iter().enumerate() {
            let pos_fwd = i as u32 + 1;
            out.push(SourceToken {
                value_token: token.clone(),
                attribute: record.attribute.clone(),
                pos_fwd,
                pos_bwd: n - pos_fwd + 1,
                entity_index: entity,
            });
        }
    }
    out
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses JSONL instances; blank lines are skipped but still counted.
pub fn parse_dataset(content: &str) -> Result<Vec<Instance>> {
    let mut instances = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let instance = serde_json::from_str::<Instance>(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        instances.push(instance);
    }
    Ok(instances)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    parse_dataset(&read_to_string(path.as_ref())?)
}

pub fn save_dataset(instances: &[Instance], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(instances, path.as_ref())
}

pub(crate) fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("serializable item");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads candidates: one whitespace-tokenized sentence per line.
pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<Tokens>> {
    let content = read_to_string(path.as_ref())?;
    Ok(content
        .lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect())
        .collect())
}

pub fn save_candidates(candidates: &[Tokens], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for candidate in candidates {
        text.push_str(&candidate.join(" "));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
