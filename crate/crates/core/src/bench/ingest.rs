//! Cohort and ground-truth ingestion.
//!
//! A cohort document is one patient per line, `pseudonym,code1;code2;...`.
//! A ground-truth document is a square CSV with a pseudonym header row
//! and column, holding expert similarity scores on a 0-10 scale.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bench::BenchError;
use crate::taxonomy::{ConceptCode, Taxonomy, TaxonomyError};

/// What to do with cohort codes that are not in the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownCodePolicy {
    /// Abort, listing every offending code.
    #[default]
    Error,
    /// Drop unknown codes; a patient left without any codes is an error.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown code policy {0:?} (expected `error` or `skip`)")]
pub struct ParseUnknownCodePolicyError(pub String);

impl UnknownCodePolicy {
    pub fn name(self) -> &'static str {
        match self {
            UnknownCodePolicy::Error => "error",
            UnknownCodePolicy::Skip => "skip",
        }
    }
}

impl fmt::Display for UnknownCodePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UnknownCodePolicy {
    type Err = ParseUnknownCodePolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(UnknownCodePolicy::Error),
            "skip" => Ok(UnknownCodePolicy::Skip),
            other => Err(ParseUnknownCodePolicyError(other.to_owned())),
        }
    }
}

/// One patient: a pseudonym and their set of diagnosis codes, stored
/// sorted and de-duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientSet {
    pseudonym: String,
    codes: Vec<ConceptCode>,
}

impl PatientSet {
    pub fn new(pseudonym: &str, codes: Vec<ConceptCode>) -> Result<Self, BenchError> {
        let pseudonym = pseudonym.trim();
        if pseudonym.is_empty() {
            return Err(BenchError::MalformedLine {
                line: 0,
                reason: "empty pseudonym".to_owned(),
            });
        }
        let set: BTreeSet<ConceptCode> = codes.into_iter().collect();
        if set.is_empty() {
            return Err(BenchError::EmptyCodeList { pseudonym: pseudonym.to_owned() });
        }
        Ok(Self {
            pseudonym: pseudonym.to_owned(),
            codes: set.into_iter().collect(),
        })
    }

    pub fn pseudonym(&self) -> &str {
        &self.pseudonym
    }

    pub fn codes(&self) -> &[ConceptCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Parse a cohort document against a taxonomy. Patients keep document
/// order; that order defines the matrix layout downstream.
pub fn load_cohort(
    document: &str,
    tax: &Taxonomy,
    policy: UnknownCodePolicy,
) -> Result<Vec<PatientSet>, BenchError> {
    let mut patients = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut unknown: BTreeSet<String> = BTreeSet::new();

    for (idx, raw_line) in document.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (pseudonym, code_part) = line.split_once(',').ok_or_else(|| {
            BenchError::MalformedLine {
                line: line_no,
                reason: format!("expected `pseudonym,codes`, got {line:?}"),
            }
        })?;
        let pseudonym = pseudonym.trim();
        if pseudonym.is_empty() {
            return Err(BenchError::MalformedLine {
                line: line_no,
                reason: "empty pseudonym".to_owned(),
            });
        }
        if !seen.insert(pseudonym.to_owned()) {
            return Err(BenchError::DuplicatePseudonym { pseudonym: pseudonym.to_owned() });
        }

        let mut codes: BTreeSet<ConceptCode> = BTreeSet::new();
        for part in code_part.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            if tax.contains(part) {
                codes.insert(ConceptCode::new(part).expect("non-empty code"));
            } else {
                match policy {
                    UnknownCodePolicy::Error => {
                        unknown.insert(part.to_owned());
                    }
                    UnknownCodePolicy::Skip => {}
                }
            }
        }
        if codes.is_empty() && unknown.is_empty() {
            return Err(BenchError::EmptyCodeList { pseudonym: pseudonym.to_owned() });
        }
        patients.push(PatientSet {
            pseudonym: pseudonym.to_owned(),
            codes: codes.into_iter().collect(),
        });
    }

    if !unknown.is_empty() {
        return Err(TaxonomyError::UnknownCodes {
            codes: unknown.into_iter().collect(),
        }
        .into());
    }
    // Under the skip policy a patient may end up with nothing left.
    if let Some(p) = patients.iter().find(|p| p.codes.is_empty()) {
        return Err(BenchError::EmptyCodeList { pseudonym: p.pseudonym.clone() });
    }
    Ok(patients)
}

/// Serialize a cohort back into the document form `load_cohort` accepts.
pub fn cohort_csv(cohort: &[PatientSet]) -> String {
    let mut out = String::new();
    for p in cohort {
        out.push_str(&p.pseudonym);
        out.push(',');
        let joined: Vec<&str> = p.codes.iter().map(ConceptCode::as_str).collect();
        out.push_str(&joined.join(";"));
        out.push('\n');
    }
    out
}

/// Expert pairwise similarity on a 0-10 scale, aligned to a fixed
/// pseudonym order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMatrix {
    pseudonyms: Vec<String>,
    scores: Vec<f64>,
}

impl GroundTruthMatrix {
    /// Build from explicit rows, enforcing the range and symmetry rules.
    pub fn from_values(pseudonyms: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, BenchError> {
        let n = pseudonyms.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(BenchError::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=10.0).contains(&v) {
                    return Err(BenchError::OutOfRangeScore {
                        a: pseudonyms[i].clone(),
                        b: pseudonyms[j].clone(),
                        value: v,
                    });
                }
                if j > i && (v - rows[j][i]).abs() > 1e-9 {
                    return Err(BenchError::AsymmetricTruth {
                        a: pseudonyms[i].clone(),
                        b: pseudonyms[j].clone(),
                        lhs: v,
                        rhs: rows[j][i],
                    });
                }
            }
        }
        Ok(Self {
            pseudonyms,
            scores: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    pub fn pseudonyms(&self) -> &[String] {
        &self.pseudonyms
    }

    pub fn len(&self) -> usize {
        self.pseudonyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pseudonyms.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.pseudonyms.len() + j]
    }

    /// CSV form with pseudonym header row and column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pseudonym");
        for p in &self.pseudonyms {
            out.push(',');
            out.push_str(p);
        }
        out.push('\n');
        for (i, p) in self.pseudonyms.iter().enumerate() {
            out.push_str(p);
            for j in 0..self.pseudonyms.len() {
                out.push(',');
                out.push_str(&format!("{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Parse a ground-truth CSV and align it to the cohort's pseudonym
/// order. The document may contain extra patients; every cohort
/// pseudonym must be present as both a row and a column.
pub fn load_truth(document: &str, pseudonyms: &[String]) -> Result<GroundTruthMatrix, BenchError> {
    let mut lines = document
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines.next().ok_or(BenchError::MalformedLine {
        line: 1,
        reason: "missing header row".to_owned(),
    })?;
    let columns: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|c| c.trim().to_owned())
        .collect();
    if columns.is_empty() {
        return Err(BenchError::MalformedLine {
            line: 1,
            reason: "header has no pseudonym columns".to_owned(),
        });
    }
    let mut col_index: HashMap<&str, usize> = HashMap::new();
    for (i, c) in columns.iter().enumerate() {
        if col_index.insert(c.as_str(), i).is_some() {
            return Err(BenchError::DuplicatePseudonym { pseudonym: c.clone() });
        }
    }

    let mut rows: HashMap<String, Vec<f64>> = HashMap::new();
    for (line_no, line) in lines {
        let mut cells = line.split(',');
        let pseudonym = cells.next().unwrap_or("").trim().to_owned();
        if pseudonym.is_empty() {
            return Err(BenchError::MalformedLine {
                line: line_no,
                reason: "empty row pseudonym".to_owned(),
            });
        }
        let mut values = Vec::with_capacity(columns.len());
        for cell in cells {
            let v: f64 = cell.trim().parse().map_err(|_| BenchError::MalformedLine {
                line: line_no,
                reason: format!("non-numeric score {:?}", cell.trim()),
            })?;
            values.push(v);
        }
        if values.len() != columns.len() {
            return Err(BenchError::MalformedLine {
                line: line_no,
                reason: format!("expected {} scores, got {}", columns.len(), values.len()),
            });
        }
        for (j, &v) in values.iter().enumerate() {
            if !(0.0..=10.0).contains(&v) {
                return Err(BenchError::OutOfRangeScore {
                    a: pseudonym.clone(),
                    b: columns[j].clone(),
                    value: v,
                });
            }
        }
        if rows.insert(pseudonym.clone(), values).is_some() {
            return Err(BenchError::DuplicatePseudonym { pseudonym });
        }
    }

    // Align to the cohort order, then re-validate symmetry on the slice
    // that will actually be used.
    let mut aligned: Vec<Vec<f64>> = Vec::with_capacity(pseudonyms.len());
    for p in pseudonyms {
        let row = rows
            .get(p.as_str())
            .ok_or_else(|| BenchError::MissingPseudonym { pseudonym: p.clone() })?;
        let mut out_row = Vec::with_capacity(pseudonyms.len());
        for q in pseudonyms {
            let j = *col_index
                .get(q.as_str())
                .ok_or_else(|| BenchError::MissingPseudonym { pseudonym: q.clone() })?;
            out_row.push(row[j]);
        }
        aligned.push(out_row);
    }
    GroundTruthMatrix::from_values(pseudonyms.to_vec(), &aligned)
}
