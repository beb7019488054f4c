//! Tabular datasets, ARFF and CSV interchange, and stratified fold plans.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::prng::Prng;
use crate::shapefeat::FeatureVector;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeKind {
    Numeric,
    /// Declared values, in declaration order.
    Nominal(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: AttributeKind::Numeric }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self, DataError> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        validate_nominal(&name, &values)?;
        Ok(Self { name, kind: AttributeKind::Nominal(values) })
    }

    pub fn values(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Nominal(v) => Some(v),
        }
    }
}

fn validate_nominal(name: &str, values: &[String]) -> Result<(), DataError> {
    if values.is_empty() {
        return Err(DataError::EmptyNominal { attribute: name.to_owned() });
    }
    for (i, v) in values.iter().enumerate() {
        if values[..i].contains(v) {
            return Err(DataError::DuplicateNominal {
                attribute: name.to_owned(),
                value: v.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("nominal attribute `{attribute}` declares no values")]
    EmptyNominal { attribute: String },
    #[error("nominal attribute `{attribute}` declares `{value}` twice")]
    DuplicateNominal { attribute: String, value: String },
    #[error("the class attribute `{attribute}` must be nominal")]
    ClassNotNominal { attribute: String },
    #[error("dataset needs at least one attribute besides the class")]
    NoAttributes,
    #[error("row has {found} feature value(s), expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("value {value} is not a valid index for nominal attribute `{attribute}`")]
    NominalIndex { attribute: String, value: f64 },
    #[error("class index {index} out of range ({count} classes)")]
    ClassIndex { index: usize, count: usize },
    #[error("class `{class}` is not one of the declared classes")]
    UnknownClass { class: String },
    #[error("value {value} of attribute `{attribute}` is not finite")]
    NotFinite { attribute: String, value: f64 },
    #[error("ids given for {ids} rows but the dataset has {rows}")]
    IdCount { ids: usize, rows: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArffError {
    #[error("line {line}: unknown attribute type `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: missing values ('?') are not supported")]
    MissingValue { line: usize },
    #[error("line {line}: row has {found} value(s), expected {expected}")]
    Arity { line: usize, expected: usize, found: usize },
    #[error("line {line}: `{value}` is not a declared value of `{attribute}`")]
    UnknownNominal { line: usize, attribute: String, value: String },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: no @data section")]
    NoData { line: usize },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: DataError },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsvError {
    #[error("CSV input has no header line")]
    NoHeader,
    #[error("CSV header needs at least one feature column and a class column")]
    TooFewColumns,
    #[error("line {line}: row has {found} field(s), expected {expected}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}, column `{column}`: `{token}` is not a number")]
    NonNumeric { line: usize, column: String, token: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FoldError {
    #[error("fold count {k} must be at least 2")]
    TooFewFolds { k: usize },
    #[error("fold count {k} exceeds the {n} available instances")]
    TooManyFolds { k: usize, n: usize },
}

/// Instances with numeric (or nominal-index) feature values and a nominal
/// class, which is always the last attribute.
///
/// Optional row ids are metadata: they travel through CSV but are not an
/// attribute and are not written to ARFF.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    relation: String,
    attributes: Vec<Attribute>,
    class_attribute: Attribute,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    ids: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        relation: impl Into<String>,
        attributes: Vec<Attribute>,
        class_attribute: Attribute,
    ) -> Result<Self, DataError> {
        if attributes.is_empty() {
            return Err(DataError::NoAttributes);
        }
        for a in attributes.iter().chain(std::iter::once(&class_attribute)) {
            if let AttributeKind::Nominal(values) = &a.kind {
                validate_nominal(&a.name, values)?;
            }
        }
        if class_attribute.values().is_none() {
            return Err(DataError::ClassNotNominal { attribute: class_attribute.name });
        }
        Ok(Self {
            relation: relation.into(),
            attributes,
            class_attribute,
            rows: Vec::new(),
            labels: Vec::new(),
            ids: None,
        })
    }

    /// An empty dataset over the eleven shape features with the given classes.
    pub fn for_features<S: Into<String>>(
        relation: impl Into<String>,
        classes: impl IntoIterator<Item = S>,
    ) -> Result<Self, DataError> {
        let attributes = FeatureVector::NAMES.iter().map(|&n| Attribute::numeric(n)).collect();
        Self::new(relation, attributes, Attribute::nominal("class", classes)?)
    }

    pub fn push(&mut self, row: Vec<f64>, label: usize) -> Result<(), DataError> {
        if row.len() != self.attributes.len() {
            return Err(DataError::Arity { expected: self.attributes.len(), found: row.len() });
        }
        for (a, &v) in self.attributes.iter().zip(&row) {
            if !v.is_finite() {
                return Err(DataError::NotFinite { attribute: a.name.clone(), value: v });
            }
            if let Some(values) = a.values() {
                if v < 0.0 || v.fract() != 0.0 || v >= values.len() as f64 {
                    return Err(DataError::NominalIndex { attribute: a.name.clone(), value: v });
                }
            }
        }
        let count = self.num_classes();
        if label >= count {
            return Err(DataError::ClassIndex { index: label, count });
        }
        self.rows.push(row);
        self.labels.push(label);
        if let Some(ids) = &mut self.ids {
            ids.push(String::new());
        }
        Ok(())
    }

    pub fn push_with_id(
        &mut self,
        id: impl Into<String>,
        row: Vec<f64>,
        label: usize,
    ) -> Result<(), DataError> {
        if self.ids.is_none() {
            self.ids = Some(vec![String::new(); self.rows.len()]);
        }
        self.push(row, label)?;
        if let Some(slot) = self.ids.as_mut().and_then(|ids| ids.last_mut()) {
            *slot = id.into();
        }
        Ok(())
    }

    pub fn set_ids(&mut self, ids: Option<Vec<String>>) -> Result<(), DataError> {
        if let Some(ids) = &ids {
            if ids.len() != self.rows.len() {
                return Err(DataError::IdCount { ids: ids.len(), rows: self.rows.len() });
            }
        }
        self.ids = ids;
        Ok(())
    }

    pub fn without_ids(mut self) -> Self {
        self.ids = None;
        self
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn set_relation(&mut self, relation: impl Into<String>) {
        self.relation = relation.into();
    }

    /// Feature attributes, excluding the class.
    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn class_attribute(&self) -> &Attribute {
        &self.class_attribute
    }

    pub fn class_names(&self) -> &[String] {
        self.class_attribute.values().expect("class attribute is nominal")
    }

    pub fn num_classes(&self) -> usize {
        self.class_names().len()
    }

    pub fn num_features(&self) -> usize {
        self.attributes.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Instance count per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        // Normalizes -0.
        return "0".to_owned();
    }
    format!("{v}")
}

// ---------------------------------------------------------------------------
// ARFF

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars().any(|c| {
            c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\')
        })
}

fn quote(s: &str) -> String {
    if !needs_quotes(s) {
        return s.to_owned();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Splits `text` on top-level commas, honoring single/double quotes and
/// backslash escapes. Each field is trimmed; `quoted` tells whether the field
/// was written in quotes.
fn split_fields(text: &str, line: usize) -> Result<Vec<(String, bool)>, ArffError> {
    let mut fields = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut field = String::new();
        let mut quoted = false;
        if let Some(&q) = chars.peek().filter(|&&c| c == '\'' || c == '"') {
            quoted = true;
            chars.next();
            loop {
                match chars.next() {
                    None => {
                        return Err(ArffError::Syntax {
                            line,
                            message: "unterminated quoted string".into(),
                        })
                    }
                    Some('\\') => match chars.next() {
                        Some('n') => field.push('\n'),
                        Some('r') => field.push('\r'),
                        Some('t') => field.push('\t'),
                        Some(c) => field.push(c),
                        None => {
                            return Err(ArffError::Syntax {
                                line,
                                message: "dangling escape".into(),
                            })
                        }
                    },
                    Some(c) if c == q => break,
                    Some(c) => field.push(c),
                }
            }
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            if chars.peek().is_some_and(|&c| c != ',') {
                return Err(ArffError::Syntax {
                    line,
                    message: "unexpected text after quoted value".into(),
                });
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ',' {
                    break;
                }
                field.push(c);
                chars.next();
            }
            field.truncate(field.trim_end().len());
        }
        fields.push((field, quoted));
        match chars.next() {
            Some(',') => continue,
            None => break,
            Some(_) => unreachable!("fields end at a comma or end of input"),
        }
    }
    Ok(fields)
}

/// Reads one possibly-quoted token from the start of `s`; returns it and the rest.
fn take_token(s: &str, line: usize) -> Result<(String, &str), ArffError> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        None => Err(ArffError::Syntax { line, message: "expected a name".into() }),
        Some((_, q)) if q == '\'' || q == '"' => {
            let mut out = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    out.push(match c {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        other => other,
                    });
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((out, &s[i + 1..]));
                } else {
                    out.push(c);
                }
            }
            Err(ArffError::Syntax { line, message: "unterminated quoted name".into() })
        }
        Some(_) => {
            let end = s
                .find(|c: char| c.is_whitespace() || c == '{')
                .unwrap_or(s.len());
            Ok((s[..end].to_owned(), &s[end..]))
        }
    }
}

fn keyword<'a>(line: &'a str, word: &str) -> Option<&'a str> {
    let head = line.get(..word.len())?;
    let rest = &line[word.len()..];
    (head.eq_ignore_ascii_case(word) && rest.chars().next().is_none_or(char::is_whitespace))
        .then_some(rest)
}

pub fn parse_arff(text: &str) -> Result<Dataset, ArffError> {
    let mut relation = String::new();
    let mut declared: Vec<(usize, Attribute)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut data_line = None;
    let mut last_line = 0;

    for (no, raw) in lines.by_ref() {
        last_line = no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = keyword(line, "@relation") {
            relation = take_token(rest, no)?.0;
        } else if let Some(rest) = keyword(line, "@attribute") {
            let (name, rest) = take_token(rest, no)?;
            let spec = rest.trim();
            let kind = if let Some(inner) = spec.strip_prefix('{') {
                let inner = inner.strip_suffix('}').ok_or_else(|| ArffError::Syntax {
                    line: no,
                    message: "nominal value list is missing `}`".into(),
                })?;
                let values = split_fields(inner, no)?
                    .into_iter()
                    .map(|(v, _)| v)
                    .collect::<Vec<_>>();
                let values = if values.len() == 1 && values[0].is_empty() { Vec::new() } else { values };
                validate_nominal(&name, &values)
                    .map_err(|source| ArffError::Invalid { line: no, source })?;
                AttributeKind::Nominal(values)
            } else {
                match spec.to_ascii_lowercase().as_str() {
                    "numeric" | "real" | "integer" => AttributeKind::Numeric,
                    _ => return Err(ArffError::UnknownKind { line: no, kind: spec.to_owned() }),
                }
            };
            declared.push((no, Attribute { name, kind }));
        } else if keyword(line, "@data").is_some() {
            data_line = Some(no);
            break;
        } else {
            return Err(ArffError::Syntax {
                line: no,
                message: format!("unexpected header line `{line}`"),
            });
        }
    }
    let data_line = data_line.ok_or(ArffError::NoData { line: last_line })?;

    let (class_line, class_attribute) = declared.pop().ok_or(ArffError::Syntax {
        line: data_line,
        message: "no attributes declared".into(),
    })?;
    let feature_count = declared.len();
    let attributes: Vec<Attribute> = declared.into_iter().map(|(_, a)| a).collect();
    let mut ds = Dataset::new(relation, attributes, class_attribute)
        .map_err(|source| ArffError::Invalid { line: class_line, source })?;

    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(ArffError::Syntax { line: no, message: "sparse rows are not supported".into() });
        }
        let fields = split_fields(line, no)?;
        if fields.len() != feature_count + 1 {
            return Err(ArffError::Arity { line: no, expected: feature_count + 1, found: fields.len() });
        }
        let mut row = Vec::with_capacity(feature_count);
        let mut label = 0;
        for (i, (token, quoted)) in fields.into_iter().enumerate() {
            if token == "?" && !quoted {
                return Err(ArffError::MissingValue { line: no });
            }
            let attr = if i < feature_count { &ds.attributes[i] } else { &ds.class_attribute };
            match &attr.kind {
                AttributeKind::Numeric => {
                    let v: f64 = token
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| ArffError::BadNumber { line: no, token: token.clone() })?;
                    row.push(v);
                }
                AttributeKind::Nominal(values) => {
                    let idx = values.iter().position(|v| *v == token).ok_or_else(|| {
                        ArffError::UnknownNominal {
                            line: no,
                            attribute: attr.name.clone(),
                            value: token.clone(),
                        }
                    })?;
                    if i < feature_count {
                        row.push(idx as f64);
                    } else {
                        label = idx;
                    }
                }
            }
        }
        ds.push(row, label).map_err(|source| ArffError::Invalid { line: no, source })?;
    }
    Ok(ds)
}

fn arff_kind(kind: &AttributeKind) -> String {
    match kind {
        AttributeKind::Numeric => "numeric".to_owned(),
        AttributeKind::Nominal(values) => {
            let list: Vec<String> = values.iter().map(|v| quote(v)).collect();
            format!("{{{}}}", list.join(","))
        }
    }
}

/// Writes the dataset as ARFF. Row ids are not part of the ARFF output.
pub fn write_arff(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", quote(&ds.relation));
    out.push('\n');
    for a in ds.attributes.iter().chain(std::iter::once(&ds.class_attribute)) {
        let _ = writeln!(out, "@attribute {} {}", quote(&a.name), arff_kind(&a.kind));
    }
    out.push_str("\n@data\n");
    for (row, &label) in ds.rows.iter().zip(&ds.labels) {
        for (a, &v) in ds.attributes.iter().zip(row) {
            match a.values() {
                None => out.push_str(&format_number(v)),
                Some(values) => out.push_str(&quote(&values[v as usize])),
            }
            out.push(',');
        }
        out.push_str(&quote(&ds.class_names()[label]));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// CSV

/// Name of the optional leading metadata column.
pub const ID_COLUMN: &str = "id";

/// Parses a CSV with a header row. A leading `id` column becomes row ids;
/// the last column is the nominal class (values in first-appearance order);
/// all other columns must be numeric.
pub fn parse_csv(text: &str) -> Result<Dataset, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let malformed = |e: csv::Error| CsvError::Malformed {
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    };
    let header = records.next().ok_or(CsvError::NoHeader)?.map_err(malformed)?;
    let header: Vec<String> = header.iter().map(str::to_owned).collect();
    let has_id = header.first().is_some_and(|h| h == ID_COLUMN);
    let first_feature = usize::from(has_id);
    if header.len() < first_feature + 2 {
        return Err(CsvError::TooFewColumns);
    }
    let class_col = header.len() - 1;

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut class_tokens = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for record in records {
        let record = record.map_err(malformed)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(CsvError::Ragged { line, expected: header.len(), found: record.len() });
        }
        let mut row = Vec::with_capacity(class_col - first_feature);
        for col in first_feature..class_col {
            let token = &record[col];
            let v: f64 = token.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                CsvError::NonNumeric { line, column: header[col].clone(), token: token.to_owned() }
            })?;
            row.push(v);
        }
        let class = record[class_col].to_owned();
        if !classes.contains(&class) {
            classes.push(class.clone());
        }
        if has_id {
            ids.push(record[0].to_owned());
        }
        class_tokens.push(class);
        rows.push(row);
    }

    let attributes = header[first_feature..class_col].iter().map(Attribute::numeric).collect();
    let class_attribute = if classes.is_empty() {
        // No rows: nothing to learn the value set from.
        Attribute { name: header[class_col].clone(), kind: AttributeKind::Nominal(Vec::new()) }
    } else {
        Attribute::nominal(header[class_col].clone(), classes.clone())
            .map_err(|e| CsvError::Malformed { line: 1, message: e.to_string() })?
    };
    let mut ds = Dataset {
        relation: "data".to_owned(),
        attributes,
        class_attribute,
        rows: Vec::with_capacity(rows.len()),
        labels: Vec::with_capacity(rows.len()),
        ids: None,
    };
    for (row, class) in rows.into_iter().zip(&class_tokens) {
        let label = classes.iter().position(|c| c == class).expect("class was recorded");
        ds.rows.push(row);
        ds.labels.push(label);
    }
    if has_id {
        ds.ids = Some(ids);
    }
    Ok(ds)
}

pub fn write_csv(ds: &Dataset) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = Vec::new();
    if ds.ids.is_some() {
        header.push(ID_COLUMN);
    }
    header.extend(ds.attributes.iter().map(|a| a.name.as_str()));
    header.push(&ds.class_attribute.name);
    writer.write_record(&header).expect("writing to memory");
    for i in 0..ds.len() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if let Some(ids) = &ds.ids {
            record.push(ids[i].clone());
        }
        record.extend(ds.rows[i].iter().map(|&v| format_number(v)));
        record.push(ds.class_names()[ds.labels[i]].clone());
        writer.write_record(&record).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("CSV output is UTF-8")
}

// ---------------------------------------------------------------------------
// Folds

/// Assignment of every instance to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Instance indices in fold `f`, ascending.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == f).collect()
    }

    /// Instance indices outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != f).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified fold plan.
///
/// For each class, its instance indices (in dataset order) are shuffled with
/// the `"folds"` stream indexed by class, then dealt round-robin starting at
/// fold `class mod k`.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, FoldError> {
    stratified_folds_for_labels(ds.labels(), ds.num_classes(), k, seed)
}

pub fn stratified_folds_for_labels(
    labels: &[usize],
    num_classes: usize,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, FoldError> {
    if k < 2 {
        return Err(FoldError::TooFewFolds { k });
    }
    if k > labels.len() {
        return Err(FoldError::TooManyFolds { k, n: labels.len() });
    }
    let mut assignment = vec![0; labels.len()];
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        Prng::stream(seed, "folds", class as u64).shuffle(&mut members);
        for (j, &i) in members.iter().enumerate() {
            assignment[i] = (class % k + j) % k;
        }
    }
    Ok(FoldPlan { k, assignment, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "@relation r\n@attribute area numeric\n@attribute class {a,b}\n@data\n24,a\n";

    #[test]
    fn arff_minimal() {
        let ds = parse_arff(SMALL).unwrap();
        assert_eq!(ds.relation(), "r");
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.row(0), &[24.0]);
        assert_eq!(ds.label(0), 0);
        assert_eq!(ds.class_names(), &["a".to_owned(), "b".to_owned()]);
    }

    #[test]
    fn arff_missing_value() {
        let err = parse_arff(&SMALL.replace("24,a", "24,?")).unwrap_err();
        assert_eq!(err, ArffError::MissingValue { line: 5 });
        let err = parse_arff(&SMALL.replace("24,a", "?,a")).unwrap_err();
        assert_eq!(err, ArffError::MissingValue { line: 5 });
    }

    #[test]
    fn arff_unknown_kind() {
        let text = "@relation r\n@attribute x string\n@attribute class {a}\n@data\n";
        assert_eq!(
            parse_arff(text).unwrap_err(),
            ArffError::UnknownKind { line: 2, kind: "string".into() }
        );
    }

    #[test]
    fn arff_row_errors() {
        let err = parse_arff(&SMALL.replace("24,a", "24,a,3")).unwrap_err();
        assert_eq!(err, ArffError::Arity { line: 5, expected: 2, found: 3 });
        let err = parse_arff(&SMALL.replace("24,a", "24,c")).unwrap_err();
        assert!(matches!(err, ArffError::UnknownNominal { line: 5, .. }));
        let err = parse_arff(&SMALL.replace("24,a", "x1,a")).unwrap_err();
        assert!(matches!(err, ArffError::BadNumber { line: 5, .. }));
        let err = parse_arff("@relation r\n@attribute a numeric\n@attribute c {x}\n").unwrap_err();
        assert_eq!(err, ArffError::NoData { line: 3 });
        let err = parse_arff("@relation r\n@attribute a numeric\n@attribute c numeric\n@data\n")
            .unwrap_err();
        assert!(matches!(
            err,
            ArffError::Invalid { line: 3, source: DataError::ClassNotNominal { .. } }
        ));
        let err = parse_arff("@relation r\n@attribute a numeric\n@attribute c {x,x}\n@data\n")
            .unwrap_err();
        assert!(matches!(err, ArffError::Invalid { line: 3, .. }));
    }

    #[test]
    fn arff_keywords_comments_and_quotes() {
        let text = "% header comment\n@RELATION 'my data'\n\n@Attribute 'major axis' REAL\n\
                    @attribute kind {'plain', \"with space\", x}\n@attribute class {'hand bag',shoe}\n\
                    @DATA\n% a comment row\n1.5, 'with space', 'hand bag'\n-2e3,x,shoe\n";
        let ds = parse_arff(text).unwrap();
        assert_eq!(ds.relation(), "my data");
        assert_eq!(ds.attributes()[0].name, "major axis");
        assert_eq!(ds.attributes()[0].kind, AttributeKind::Numeric);
        assert_eq!(ds.rows(), &[vec![1.5, 1.0], vec![-2000.0, 2.0]]);
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(parse_arff(&write_arff(&ds)).unwrap(), ds);
    }

    #[test]
    fn arff_writer_quotes_spaces_and_empty_data() {
        let mut ds = Dataset::for_features("feat", ["hand bag", "shoe"]).unwrap();
        let text = write_arff(&ds);
        assert!(text.contains("{'hand bag',shoe}"));
        assert!(text.ends_with("@data\n"));
        assert_eq!(parse_arff(&text).unwrap(), ds);
        ds.push(vec![0.1; 11], 0).unwrap();
        let text = write_arff(&ds);
        assert!(text.ends_with("0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,'hand bag'\n"));
        assert_eq!(parse_arff(&text).unwrap(), ds);
    }

    #[test]
    fn quoting_escapes_round_trip() {
        let attr = Attribute::nominal("c", ["it's", "back\\slash", "a,b", "?", ""]).unwrap();
        let mut ds = Dataset::new("q", vec![Attribute::numeric("x")], attr).unwrap();
        for label in 0..5 {
            ds.push(vec![label as f64], label).unwrap();
        }
        assert_eq!(parse_arff(&write_arff(&ds)).unwrap(), ds);
    }

    #[test]
    fn csv_first_appearance_classes() {
        let ds = parse_csv("area,class\n24,bag\n30,shoe\n").unwrap();
        assert_eq!(ds.class_names(), &["bag".to_owned(), "shoe".to_owned()]);
        assert_eq!(ds.labels(), &[0, 1]);
        assert!(ds.ids().is_none());
        let ds = parse_csv("area,class\n24,shoe\n30,bag\n1,shoe\n").unwrap();
        assert_eq!(ds.class_names(), &["shoe".to_owned(), "bag".to_owned()]);
    }

    #[test]
    fn csv_errors() {
        assert_eq!(
            parse_csv("area,class\nabc,bag\n").unwrap_err(),
            CsvError::NonNumeric { line: 2, column: "area".into(), token: "abc".into() }
        );
        assert_eq!(
            parse_csv("area,class\n1,bag\n2\n").unwrap_err(),
            CsvError::Ragged { line: 3, expected: 2, found: 1 }
        );
        assert_eq!(parse_csv("").unwrap_err(), CsvError::NoHeader);
        assert_eq!(parse_csv("class\nx\n").unwrap_err(), CsvError::TooFewColumns);
    }

    #[test]
    fn csv_feature_header_and_round_trip() {
        let mut ds = Dataset::for_features("f", ["disk", "ring"]).unwrap();
        ds.push_with_id("a.pgm", vec![24.0, 6.928203230275509, 0.5, 0.25, -45.0, 24.0, 24.0, 1.0, 5.5, 1.0, 1.0], 1)
            .unwrap();
        ds.push_with_id("b.pgm", vec![1e-7, 2.0, 3.0, 0.0, 90.0, 1.0, 1.0, -1.0, 1.1, 0.5, 0.3], 0)
            .unwrap();
        let text = write_csv(&ds);
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "id,area,major_axis_length,minor_axis_length,eccentricity,orientation,convex_area,\
             filled_area,euler_number,equiv_diameter,solidity,extent,class"
        );
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.ids().unwrap(), &["a.pgm".to_owned(), "b.pgm".to_owned()]);
        assert_eq!(back.rows(), ds.rows());
        assert_eq!(write_csv(&back), text);
    }

    #[test]
    fn numbers_render_shortest() {
        assert_eq!(format_number(24.0), "24");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1e-7), "0.0000001");
        let v = 6.928203230275509;
        assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
    }

    fn labels_dataset(labels: &[usize], classes: usize) -> Dataset {
        let names: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
        let attr = Attribute::nominal("class", names).unwrap();
        let mut ds = Dataset::new("l", vec![Attribute::numeric("x")], attr).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            ds.push(vec![i as f64], l).unwrap();
        }
        ds
    }

    #[test]
    fn folds_balanced_five_classes() {
        let labels: Vec<usize> = (0..100).map(|i| i % 5).collect();
        let ds = labels_dataset(&labels, 5);
        let plan = stratified_folds(&ds, 10, 42).unwrap();
        assert_eq!(plan.fold_sizes(), vec![10; 10]);
        for f in 0..10 {
            let mut per_class = [0; 5];
            for i in plan.test_indices(f) {
                per_class[ds.label(i)] += 1;
            }
            assert_eq!(per_class, [2; 5]);
        }
        assert_eq!(stratified_folds(&ds, 10, 42).unwrap(), plan);
        assert_ne!(stratified_folds(&ds, 10, 43).unwrap(), plan);
    }

    #[test]
    fn folds_seven_of_one_class() {
        let ds = labels_dataset(&[0; 7], 1);
        let mut sizes = stratified_folds(&ds, 3, 1).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);
    }

    #[test]
    fn folds_reject_bad_k() {
        let ds = labels_dataset(&[0, 1, 0], 2);
        assert_eq!(stratified_folds(&ds, 1, 0), Err(FoldError::TooFewFolds { k: 1 }));
        assert_eq!(stratified_folds(&ds, 4, 0), Err(FoldError::TooManyFolds { k: 4, n: 3 }));
    }
}
