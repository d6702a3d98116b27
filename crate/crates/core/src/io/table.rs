//! Shared reader for the whitespace-separated column formats: `# key = value`
//! header lines, one line of column names, then numeric rows.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Table {
    /// (key, value, 1-based line number).
    pub header: Vec<(String, String, usize)>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}` (have: {})", self.names.join(" "))))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub(crate) fn parse_table(text: &str) -> Result<Table> {
    let mut header = Vec::new();
    let mut names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.push((k.trim().to_string(), v.trim().to_string(), line_no));
            }
            continue;
        }
        let Some(cols) = &names else {
            names = Some(line.split_whitespace().map(str::to_string).collect());
            continue;
        };
        let mut row = Vec::with_capacity(cols.len());
        for (col, tok) in tokens(raw) {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                column: col,
                message: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    column: col,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            row.push(v);
        }
        if row.len() != cols.len() {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("expected {} fields, found {}", cols.len(), row.len()),
            });
        }
        rows.push(row);
    }
    let names = names.ok_or_else(|| Error::Schema("no column header line".into()))?;
    Ok(Table { header, names, rows })
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                out.push((line[..s].chars().count() + 1, &line[s..pos]));
                start = None;
            }
            _ => {}
        }
    }
    out.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_columns_are_one_based() {
        let t: Vec<_> = tokens("  1.0  abc x").collect();
        assert_eq!(t, vec![(3, "1.0"), (8, "abc"), (12, "x")]);
    }

    #[test]
    fn short_row_reports_line() {
        match parse_table("a b\n1 2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
