use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cell::CellValue;
use super::TableError;

/// Share of non-empty cells that must parse as numbers for a column to be
/// typed numeric.
pub const NUMERIC_COLUMN_SHARE: f64 = 0.8;

/// Default whitespace-token budget for table linearization.
pub const DEFAULT_BUDGET: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Text,
}

/// A rectangular in-memory table with unique (case-insensitive) column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableData {
    pub id: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
    pub column_types: Vec<ColumnType>,
}

impl TableData {
    /// Validates shape and header uniqueness and infers column types.
    pub fn new(
        id: impl Into<String>,
        header: Vec<String>,
        rows: Vec<Vec<CellValue>>,
    ) -> Result<Self, TableError> {
        let id = id.into();
        let header: Vec<String> = header.into_iter().map(|h| h.trim().to_string()).collect();
        let mut seen = HashSet::new();
        for name in &header {
            if !seen.insert(crate::text::normalize(name)) {
                return Err(TableError::DuplicateColumn {
                    table: id,
                    column: name.clone(),
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(TableError::MalformedTable {
                    table: id,
                    row: i + 1,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        let column_types = (0..header.len())
            .map(|j| infer_column_type(rows.iter().map(|r| &r[j])))
            .collect();
        Ok(TableData {
            id,
            header,
            rows,
            column_types,
        })
    }

    /// Builds a table from raw cell strings.
    pub fn from_strings<S: AsRef<str>>(
        id: impl Into<String>,
        header: &[S],
        rows: &[Vec<S>],
    ) -> Result<Self, TableError> {
        TableData::new(
            id,
            header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows.iter()
                .map(|r| r.iter().map(|c| CellValue::parse(c.as_ref())).collect())
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.header.len()
    }

    /// Index of the column whose normalized name equals the normalized `name`.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        let key = crate::text::normalize(name);
        self.header
            .iter()
            .position(|h| crate::text::normalize(h) == key)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &CellValue> {
        self.rows.iter().map(move |r| &r[j])
    }

    /// Loads a table from a CSV file; the id is the file stem.
    pub fn from_csv_path(path: &Path) -> Result<Self, TableError> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = fs::read_to_string(path).map_err(|e| TableError::io(path, e))?;
        Self::from_csv_str(&id, &text)
    }

    pub fn from_csv_str(id: &str, text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header: Vec<String> = match records.next() {
            Some(rec) => rec
                .map_err(|e| TableError::Csv(id.to_string(), e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect(),
            None => return Err(TableError::MissingHeader(id.to_string())),
        };
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| TableError::Csv(id.to_string(), e.to_string()))?;
            rows.push(rec.iter().map(CellValue::parse).collect());
        }
        TableData::new(id, header, rows)
    }

    pub fn to_csv_string(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        // writes to a Vec cannot fail
        writer.write_record(&self.header).unwrap();
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|c| c.to_string()))
                .unwrap();
        }
        String::from_utf8(writer.into_inner().unwrap()).unwrap()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TableError> {
        fs::write(path, self.to_csv_string()).map_err(|e| TableError::io(path, e))
    }

    /// Flattens the table to text: a header segment followed by one segment
    /// per row. `truncated` is true iff the full text has more whitespace
    /// tokens than `budget`; the returned text then keeps only the rows that
    /// fit.
    pub fn linearize(&self, budget: usize) -> (String, bool) {
        let budget = budget.max(1);
        let header = format!("col : {}", self.header.join(" | "));
        let segments: Vec<String> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                format!("row {} : {}", i + 1, cells.join(" | "))
            })
            .collect();
        let count = |s: &str| s.split_whitespace().count();
        let header_tokens = count(&header);
        let total: usize = header_tokens + segments.iter().map(|s| count(s)).sum::<usize>();
        if total <= budget {
            let mut out = header;
            for s in segments {
                out.push(' ');
                out.push_str(&s);
            }
            return (out, false);
        }
        if header_tokens > budget {
            let cut: Vec<&str> = header.split_whitespace().take(budget).collect();
            return (cut.join(" "), true);
        }
        let mut used = header_tokens;
        let mut out = header;
        for s in segments {
            let n = count(&s);
            if used + n > budget {
                break;
            }
            used += n;
            out.push(' ');
            out.push_str(&s);
        }
        (out, true)
    }
}

fn infer_column_type<'a>(cells: impl Iterator<Item = &'a CellValue>) -> ColumnType {
    let (mut numeric, mut non_empty) = (0usize, 0usize);
    for c in cells {
        match c {
            CellValue::Empty => {}
            CellValue::Number(_) => {
                numeric += 1;
                non_empty += 1;
            }
            CellValue::Text(_) => non_empty += 1,
        }
    }
    if non_empty > 0 && numeric as f64 >= NUMERIC_COLUMN_SHARE * non_empty as f64 {
        ColumnType::Numeric
    } else {
        ColumnType::Text
    }
}

/// Loads every `*.csv` file under `path` (or the single file at `path`),
/// keyed by table id.
pub fn load_tables(path: &Path) -> Result<BTreeMap<String, TableData>, TableError> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| TableError::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
            .collect();
        files.sort();
        files
    } else if path.exists() {
        vec![path.to_path_buf()]
    } else {
        return Err(TableError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    };
    let mut tables = BTreeMap::new();
    for file in files {
        let table = TableData::from_csv_path(&file)?;
        tables.insert(table.id.clone(), table);
    }
    Ok(tables)
}

/// Writes each table to `<dir>/<id>.csv`.
pub fn write_tables<'a>(
    dir: &Path,
    tables: impl IntoIterator<Item = &'a TableData>,
) -> Result<(), TableError> {
    fs::create_dir_all(dir).map_err(|e| TableError::io(dir, e))?;
    for t in tables {
        t.write_csv(&dir.join(format!("{}.csv", t.id)))?;
    }
    Ok(())
}
