//! `results.csv`: one row per (subject, combination, fold) plus a mean row.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::CombinationResult;
use crate::model::{CombinationSpec, Step};

pub const RESULTS_FILE: &str = "results.csv";
pub const RESULTS_HEADER: &str =
    "subject,filtering,deriv,T,red,wn,scale,clf,fold,f1,precision,recall,accuracy,seconds";

/// Fold index or the 15-fold mean. Orders folds before the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FoldId {
    Fold(usize),
    Mean,
}

impl fmt::Display for FoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoldId::Fold(i) => write!(f, "{i}"),
            FoldId::Mean => f.write_str("mean"),
        }
    }
}

impl FromStr for FoldId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "mean" {
            return Ok(FoldId::Mean);
        }
        s.parse()
            .map(FoldId::Fold)
            .map_err(|_| Error::InvalidArgument(format!("fold must be an index or 'mean', got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub subject_id: String,
    pub spec: CombinationSpec,
    pub fold: FoldId,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// Wall-clock seconds (excluded from determinism comparisons).
    pub seconds: f64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let mut out = self.subject_id.clone();
        for step in Step::ALL {
            out.push(',');
            out.push_str(self.spec.method(step));
        }
        out.push_str(&format!(
            ",{},{},{},{},{},{}",
            self.fold, self.f1, self.precision, self.recall, self.accuracy, self.seconds
        ));
        out
    }

    fn parse(line: &str) -> std::result::Result<Self, String> {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 14 {
            return Err(format!("expected 14 columns, found {}", cols.len()));
        }
        if cols[0].is_empty() {
            return Err("empty subject id".into());
        }
        let spec = CombinationSpec::from_pairs(Step::ALL.iter().copied().zip(cols[1..8].iter().copied()))
            .map_err(|e| e.to_string())?;
        let fold: FoldId = cols[8].parse().map_err(|e: Error| e.to_string())?;
        let num = |i: usize, name: &str| -> std::result::Result<f64, String> {
            cols[i]
                .parse::<f64>()
                .map_err(|_| format!("{name} {:?} is not a number", cols[i]))
        };
        let row = ResultRow {
            subject_id: cols[0].to_string(),
            spec,
            fold,
            f1: num(9, "f1")?,
            precision: num(10, "precision")?,
            recall: num(11, "recall")?,
            accuracy: num(12, "accuracy")?,
            seconds: num(13, "seconds")?,
        };
        for (name, v) in [
            ("f1", row.f1),
            ("precision", row.precision),
            ("recall", row.recall),
            ("accuracy", row.accuracy),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} {v} outside [0, 1]"));
            }
        }
        Ok(row)
    }
}

/// Rows for one evaluated combination: 15 fold rows then the mean row.
pub fn result_rows(subject_id: &str, result: &CombinationResult) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = result
        .folds
        .iter()
        .map(|f| ResultRow {
            subject_id: subject_id.to_string(),
            spec: result.spec,
            fold: FoldId::Fold(f.fold_index),
            f1: f.record.f1,
            precision: f.record.precision,
            recall: f.record.recall,
            accuracy: f.record.accuracy,
            seconds: f.seconds,
        })
        .collect();
    rows.push(ResultRow {
        subject_id: subject_id.to_string(),
        spec: result.spec,
        fold: FoldId::Mean,
        f1: result.mean.f1,
        precision: result.mean.precision,
        recall: result.mean.recall,
        accuracy: result.mean.accuracy,
        seconds: result.seconds(),
    });
    rows
}

/// In-memory results, kept in canonical (subject, spec, fold) order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsStore {
    rows: Vec<ResultRow>,
}

impl ResultsStore {
    /// Later rows replace earlier ones with the same key.
    pub fn from_rows(rows: impl IntoIterator<Item = ResultRow>) -> Self {
        let mut by_key: BTreeMap<(String, CombinationSpec, FoldId), ResultRow> = BTreeMap::new();
        for r in rows {
            by_key.insert((r.subject_id.clone(), r.spec, r.fold), r);
        }
        Self {
            rows: by_key.into_values().collect(),
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == RESULTS_HEADER => {}
            Some((_, h)) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    msg: format!("unexpected header {h:?}, expected {RESULTS_HEADER:?}"),
                })
            }
            None => return Ok(Self::default()),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            rows.push(ResultRow::parse(line).map_err(|msg| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            })?);
        }
        Ok(Self::from_rows(rows))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn read_or_empty(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::read(path)
        } else {
            Ok(Self::default())
        }
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ResultRow>) {
        let all = std::mem::take(&mut self.rows).into_iter().chain(rows);
        *self = Self::from_rows(all);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }

    /// Atomic rewrite via a temporary file in the same directory.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// (subject, spec) pairs that have their mean row.
    pub fn completed(&self) -> BTreeSet<(String, CombinationSpec)> {
        self.mean_rows()
            .map(|r| (r.subject_id.clone(), r.spec))
            .collect()
    }

    /// Removes fold rows of combinations whose mean row is missing
    /// (interrupted writes).
    pub fn drop_incomplete(&mut self) -> usize {
        let done = self.completed();
        let before = self.rows.len();
        self.rows
            .retain(|r| done.contains(&(r.subject_id.clone(), r.spec)));
        before - self.rows.len()
    }

    pub fn mean_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.fold == FoldId::Mean)
    }

    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.subject_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Mean F1 per spec and subject.
    pub fn spec_f1(&self) -> BTreeMap<CombinationSpec, BTreeMap<String, f64>> {
        let mut out: BTreeMap<CombinationSpec, BTreeMap<String, f64>> = BTreeMap::new();
        for r in self.mean_rows() {
            out.entry(r.spec).or_default().insert(r.subject_id.clone(), r.f1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_combinations;

    fn row(subject: &str, spec: CombinationSpec, fold: FoldId, f1: f64) -> ResultRow {
        ResultRow {
            subject_id: subject.into(),
            spec,
            fold,
            f1,
            precision: f1,
            recall: f1,
            accuracy: f1,
            seconds: 0.25,
        }
    }

    #[test]
    fn csv_round_trip_is_canonical() {
        let specs = enumerate_combinations(true);
        let rows = vec![
            row("S02", specs[3], FoldId::Mean, 0.5),
            row("S01", specs[7], FoldId::Fold(3), 1.0 / 3.0),
            row("S01", specs[7], FoldId::Mean, 0.1),
            row("S01", specs[7], FoldId::Fold(12), 0.0),
        ];
        let store = ResultsStore::from_rows(rows.clone());
        let text = store.to_csv();
        let back = ResultsStore::parse(&text, Path::new("r.csv")).unwrap();
        assert_eq!(back, store);
        let mut rev = rows;
        rev.reverse();
        assert_eq!(ResultsStore::from_rows(rev).to_csv(), text);
        let folds: Vec<FoldId> = store.rows().iter().map(|r| r.fold).collect();
        assert_eq!(folds, vec![FoldId::Fold(3), FoldId::Fold(12), FoldId::Mean, FoldId::Mean]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = format!(
            "{RESULTS_HEADER}\nS01,none,grf,11,tc,0,z_at_mm_at,svm,mean,1.5,1,1,1,0\n"
        );
        match ResultsStore::parse(&bad, Path::new("r.csv")).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("f1"), "{msg}");
            }
            e => panic!("{e}"),
        }
        assert!(ResultsStore::parse("a,b\n", Path::new("r.csv")).is_err());
        let short = format!("{RESULTS_HEADER}\nS01,none\n");
        assert!(ResultsStore::parse(&short, Path::new("r.csv")).is_err());
    }

    #[test]
    fn incomplete_combinations_are_dropped() {
        let specs = enumerate_combinations(true);
        let mut store = ResultsStore::from_rows(vec![
            row("S01", specs[0], FoldId::Fold(0), 0.5),
            row("S01", specs[0], FoldId::Mean, 0.5),
            row("S01", specs[1], FoldId::Fold(0), 0.5),
        ]);
        assert_eq!(store.drop_incomplete(), 1);
        assert_eq!(store.completed().len(), 1);
        assert_eq!(store.rows().len(), 2);
    }
}
