//! Typed ingestion and views of binary-attribute case data.
//!
//! A [`Dataset`] couples an [`AttributeSchema`] (ordered attribute names with
//! one designated target) with a list of [`CaseRecord`]s. All attribute
//! domains are exactly `{false, true}`. Gold labels live in a separate
//! CSV keyed by `case_id` and are joined with [`attach_labels`].

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Gold-standard verdict attached to a case by an external labeling process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldLabel {
    Anomalous,
    Normal,
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldLabel::Anomalous => write!(f, "anomalous"),
            GoldLabel::Normal => write!(f, "normal"),
        }
    }
}

impl std::str::FromStr for GoldLabel {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        if s.eq_ignore_ascii_case("anomalous") {
            Ok(GoldLabel::Anomalous)
        } else if s.eq_ignore_ascii_case("normal") {
            Ok(GoldLabel::Normal)
        } else {
            Err(())
        }
    }
}

/// Ordered list of binary attribute names with one designated target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    names: Vec<String>,
    target_index: usize,
}

impl AttributeSchema {
    /// Builds a schema, checking that names are unique and nonempty and that
    /// the target index is in range.
    pub fn new(names: Vec<String>, target_index: usize) -> Result<Self> {
        if target_index >= names.len() {
            return Err(Error::TargetIndexOutOfRange {
                index: target_index,
                arity: names.len(),
            });
        }
        let mut seen = HashSet::new();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyHeaderName { column: i + 1 });
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateHeader {
                    name: name.clone(),
                    column: i + 1,
                });
            }
        }
        Ok(AttributeSchema {
            names,
            target_index,
        })
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn target_name(&self) -> &str {
        &self.names[self.target_index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Attribute indices excluding the target, in schema order.
    pub fn context_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.names.len()).filter(move |&i| i != self.target_index)
    }

    pub fn context_arity(&self) -> usize {
        self.names.len() - 1
    }

    pub fn context_names(&self) -> Vec<&str> {
        self.context_indices()
            .map(|i| self.names[i].as_str())
            .collect()
    }
}

/// One case: a boolean vector aligned with the schema, an optional opaque id,
/// and an optional gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRecord {
    pub values: Vec<bool>,
    pub case_id: Option<String>,
    pub gold_label: Option<GoldLabel>,
}

impl CaseRecord {
    pub fn new(values: Vec<bool>) -> Self {
        CaseRecord {
            values,
            case_id: None,
            gold_label: None,
        }
    }

    pub fn with_id(values: Vec<bool>, case_id: impl Into<String>) -> Self {
        CaseRecord {
            values,
            case_id: Some(case_id.into()),
            gold_label: None,
        }
    }

    pub fn target_value(&self, schema: &AttributeSchema) -> bool {
        self.values[schema.target_index()]
    }
}

/// The record's values with the target position removed; order preserved.
pub fn context_of(record: &CaseRecord, schema: &AttributeSchema) -> Vec<bool> {
    schema.context_indices().map(|i| record.values[i]).collect()
}

/// Immutable collection of case records conforming to one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: AttributeSchema,
    records: Vec<CaseRecord>,
}

impl Dataset {
    /// Builds a dataset, checking record arity and `case_id` uniqueness.
    pub fn new(schema: AttributeSchema, records: Vec<CaseRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        for record in &records {
            if record.values.len() != schema.arity() {
                return Err(Error::ArityMismatch {
                    expected: schema.arity(),
                    found: record.values.len(),
                });
            }
            if let Some(id) = &record.case_id {
                if !ids.insert(id.as_str()) {
                    return Err(Error::DuplicateCaseId { id: id.clone() });
                }
            }
        }
        Ok(Dataset { schema, records })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn records(&self) -> &[CaseRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn index_of_case_id(&self, case_id: &str) -> Option<usize> {
        self.records
            .iter()
            .position(|r| r.case_id.as_deref() == Some(case_id))
    }

    /// New dataset containing the records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }

    /// New dataset with the record carrying `case_id` removed.
    pub fn without_case_id(&self, case_id: &str) -> Dataset {
        let records = self
            .records
            .iter()
            .filter(|r| r.case_id.as_deref() != Some(case_id))
            .cloned()
            .collect();
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }

    /// New dataset with every record whose id is in `case_ids` removed.
    pub fn without_case_ids(&self, case_ids: &HashSet<&str>) -> Dataset {
        let records = self
            .records
            .iter()
            .filter(|r| match &r.case_id {
                Some(id) => !case_ids.contains(id.as_str()),
                None => true,
            })
            .cloned()
            .collect();
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }

    /// Context attributes of every record encoded as `{0.0, 1.0}` rows.
    pub fn context_rows(&self) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| {
                self.schema
                    .context_indices()
                    .map(|i| if r.values[i] { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Writes the dataset as CSV. The `case_id` column is included when every
    /// record carries an id; mixed presence is rejected.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let with_ids = !self.records.is_empty() && self.records.iter().all(|r| r.case_id.is_some());
        if !with_ids && self.records.iter().any(|r| r.case_id.is_some()) {
            return Err(Error::InvalidParameter {
                message: "cannot serialize a dataset where only some records have case_ids".into(),
            });
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = Vec::with_capacity(self.schema.arity() + 1);
        if with_ids {
            header.push("case_id");
        }
        header.extend(self.schema.names().iter().map(|s| s.as_str()));
        w.write_record(&header)?;
        for record in &self.records {
            let mut row: Vec<&str> = Vec::with_capacity(header.len());
            if with_ids {
                row.push(record.case_id.as_deref().unwrap());
            }
            row.extend(record.values.iter().map(|&v| if v { "1" } else { "0" }));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `case_id,label` rows for every record that carries a gold label.
    pub fn write_labels_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["case_id", "label"])?;
        for record in &self.records {
            if let Some(label) = record.gold_label {
                let id = record.case_id.as_deref().ok_or(Error::MissingCaseId)?;
                w.write_record([id, &label.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_cell(value: &str, line: u64, column: usize) -> Result<bool> {
    let v = value.trim();
    if v == "1" || v.eq_ignore_ascii_case("true") {
        Ok(true)
    } else if v == "0" || v.eq_ignore_ascii_case("false") {
        Ok(false)
    } else {
        Err(Error::NonBinaryValue {
            value: value.to_string(),
            line,
            column,
        })
    }
}

/// Parses a dataset from CSV text.
///
/// The header row is mandatory; an optional leading `case_id` column holds
/// opaque string ids. Every data cell must be one of `0`, `1`, `true`,
/// `false` (case-insensitive). `target_name` selects the target attribute.
pub fn parse_dataset<R: Read>(reader: R, target_name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();

    let header = match rows.next() {
        Some(row) => row?,
        None => return Err(Error::MissingHeader),
    };
    let has_id_column = header.get(0).map(str::trim) == Some("case_id");
    let name_offset = usize::from(has_id_column);
    let names: Vec<String> = header
        .iter()
        .skip(name_offset)
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() {
        return Err(Error::MissingHeader);
    }
    // Column numbers in errors are 1-based file columns.
    let mut seen = HashSet::new();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::EmptyHeaderName {
                column: name_offset + i + 1,
            });
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateHeader {
                name: name.clone(),
                column: name_offset + i + 1,
            });
        }
    }
    let target_index = names
        .iter()
        .position(|n| n == target_name)
        .ok_or_else(|| Error::UnknownTarget {
            name: target_name.to_string(),
        })?;
    let schema = AttributeSchema::new(names, target_index)?;

    let expected = schema.arity() + name_offset;
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (row_index, row) in rows.enumerate() {
        let row = row?;
        let line = row
            .position()
            .map(|p| p.line())
            .unwrap_or(row_index as u64 + 2);
        if row.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: row.len(),
            });
        }
        let case_id = if has_id_column {
            let id = row.get(0).unwrap().trim();
            if id.is_empty() {
                return Err(Error::EmptyCaseId { line });
            }
            if !ids.insert(id.to_string()) {
                return Err(Error::DuplicateCaseId { id: id.to_string() });
            }
            Some(id.to_string())
        } else {
            None
        };
        let mut values = Vec::with_capacity(schema.arity());
        for (i, cell) in row.iter().skip(name_offset).enumerate() {
            values.push(parse_cell(cell, line, name_offset + i + 1)?);
        }
        records.push(CaseRecord {
            values,
            case_id,
            gold_label: None,
        });
    }
    Dataset::new(schema, records)
}

/// Joins gold labels onto a dataset.
///
/// `labels` is CSV `case_id,label` with label in `{anomalous, normal}`; a
/// `case_id,label` header row is optional. Labels for unknown case ids are
/// returned as warnings rather than errors. Returns the labeled dataset and
/// the warning list.
pub fn attach_labels<R: Read>(dataset: &Dataset, labels: R) -> Result<(Dataset, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(labels);
    let mut out = dataset.clone();
    let mut warnings = Vec::new();
    for (row_index, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row
            .position()
            .map(|p| p.line())
            .unwrap_or(row_index as u64 + 1);
        if row_index == 0
            && row.len() == 2
            && row.get(0).map(str::trim) == Some("case_id")
            && row.get(1).map(|s| s.trim().eq_ignore_ascii_case("label")) == Some(true)
        {
            continue;
        }
        if row.len() != 2 {
            return Err(Error::RaggedRow {
                line,
                expected: 2,
                found: row.len(),
            });
        }
        let id = row.get(0).unwrap().trim();
        let raw = row.get(1).unwrap().trim();
        let label: GoldLabel = raw.parse().map_err(|()| Error::MalformedLabel {
            value: raw.to_string(),
            line,
        })?;
        match out.index_of_case_id(id) {
            Some(index) => {
                if out.records[index].gold_label.is_some() {
                    warnings.push(format!(
                        "duplicate label row for case_id `{id}` at line {line}"
                    ));
                }
                out.records[index].gold_label = Some(label);
            }
            None => warnings.push(format!("label for unknown case_id `{id}` at line {line}")),
        }
    }
    Ok((out, warnings))
}

/// The built-in 19-attribute pneumonia admission schema: the binary target
/// `Hospitalization` plus 18 binary context attributes (2 demographic,
/// 5 co-existing illnesses, 4 physical-examination, 7 lab/radiographic).
pub fn port_schema() -> AttributeSchema {
    let names = [
        "Hospitalization",
        // demographic factors
        "Age > 50",
        "Gender",
        // co-existing illnesses
        "Congestive heart failure",
        "Cerebrovascular disease",
        "Neoplastic disease",
        "Renal disease",
        "Liver disease",
        // physical examination
        "Pulse >= 125 per min",
        "Respiratory rate >= 30 per min",
        "Sys. blood pressure < 90 mm Hg",
        "Temperature < 35 C or > 40 C",
        // lab and radiographic findings
        "Blood urea nitrogen >= 30 mg/dl",
        "Glucose >= 250 mg/dl",
        "Hematocrit < 30 %",
        "Sodium < 130 mmol/l",
        "Art. O2 pressure < 60 mm Hg",
        "Arterial pH < 7.35",
        "Pleural effusion",
    ];
    AttributeSchema::new(names.iter().map(|s| s.to_string()).collect(), 0)
        .expect("built-in schema is valid")
}
