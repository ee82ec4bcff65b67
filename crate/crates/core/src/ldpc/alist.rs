//! Reader and writer for the alist sparse-matrix format.
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! col_degree_1 ... col_degree_N
//! row_degree_1 ... row_degree_M
//! N lines: 1-based row indices of each column, zero-padded
//! M lines: 1-based column indices of each row, zero-padded
//! ```
//!
//! The writer always zero-pads to the maximum degree. The reader accepts
//! lists with or without padding and cross-checks both halves.

use std::fs;
use std::path::Path;

use super::LdpcCode;
use crate::error::{Error, Result};

fn err(line: usize, reason: impl Into<String>) -> Error {
    Error::Alist {
        line,
        reason: reason.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as parsed integers, with its 1-based number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| err(i + 1, format!("`{t}` is not a non-negative integer")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

/// Parses alist text into the row adjacency lists `(n, rows)`.
pub fn parse_alist(text: &str) -> Result<(usize, Vec<Vec<usize>>)> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, dims) = lines.next_numbers("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(err(ln, "expected `N M`"));
    };
    if n == 0 || m == 0 {
        return Err(err(ln, "dimensions must be positive"));
    }
    let (ln, maxes) = lines.next_numbers("maximum degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(ln, "expected `max_col_degree max_row_degree`"));
    };
    let (ln, col_deg) = lines.next_numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(err(ln, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    if col_deg.iter().max() != Some(&max_col) {
        return Err(err(ln, format!("column degrees disagree with maximum {max_col}")));
    }
    let (ln, row_deg) = lines.next_numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(err(ln, format!("expected {m} row degrees, found {}", row_deg.len())));
    }
    if row_deg.iter().max() != Some(&max_row) {
        return Err(err(ln, format!("row degrees disagree with maximum {max_row}")));
    }

    let read_lists = |lines: &mut Lines<'_>, degrees: &[usize], bound: usize, max: usize, what: &str| {
        degrees
            .iter()
            .enumerate()
            .map(|(i, &deg)| {
                let (ln, nums) = lines.next_numbers(what)?;
                if nums.len() > max {
                    return Err(err(ln, format!("{what} {} has more than {max} entries", i + 1)));
                }
                let (entries, padding) = nums.split_at(deg.min(nums.len()));
                if entries.len() != deg || entries.contains(&0) || padding.iter().any(|&p| p != 0) {
                    return Err(err(ln, format!("{what} {} does not have degree {deg}", i + 1)));
                }
                if let Some(&bad) = entries.iter().find(|&&e| e > bound) {
                    return Err(err(ln, format!("index {bad} out of range 1..={bound}")));
                }
                let mut list: Vec<usize> = entries.iter().map(|e| e - 1).collect();
                list.sort_unstable();
                if list.windows(2).any(|w| w[0] == w[1]) {
                    return Err(err(ln, format!("{what} {} repeats an index", i + 1)));
                }
                Ok((ln, list))
            })
            .collect::<Result<Vec<_>>>()
    };

    let cols = read_lists(&mut lines, &col_deg, m, max_col, "column")?;
    let rows = read_lists(&mut lines, &row_deg, n, max_row, "row")?;

    // both halves must describe the same matrix
    let mut from_cols = vec![Vec::new(); m];
    for (c, (_, list)) in cols.iter().enumerate() {
        for &r in list {
            from_cols[r].push(c);
        }
    }
    for (r, (ln, list)) in rows.iter().enumerate() {
        if &from_cols[r] != list {
            return Err(err(*ln, format!("row {} disagrees with the column lists", r + 1)));
        }
    }
    Ok((n, rows.into_iter().map(|(_, l)| l).collect()))
}

/// Serialises `H` in alist format.
pub fn to_alist(code: &LdpcCode) -> String {
    use std::fmt::Write;
    let max_col = code.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = code.rows().iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{} {}", code.n(), code.m());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut code.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut code.rows().iter().map(Vec::len)));
    for (lists, width) in [(code.cols(), max_col), (code.rows(), max_row)] {
        for list in lists {
            let mut entries = list
                .iter()
                .map(|&v| v as usize + 1)
                .chain(std::iter::repeat(0))
                .take(width);
            let _ = writeln!(out, "{}", join(&mut entries));
        }
    }
    out
}

/// Loads a code from an alist file.
pub fn load_alist(path: impl AsRef<Path>) -> Result<LdpcCode> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let (n, rows) = parse_alist(&text)?;
    LdpcCode::from_rows(n, rows, format!("alist:{}", path.display()))
}

pub fn save_alist(code: &LdpcCode, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_alist(code))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "6 3\n3 4\n1 2 1 2 3 1\n3 4 3\n1 0 0\n1 2 0\n2 0 0\n2 3 0\n1 2 3\n3 0 0\n1 2 5 0\n2 3 4 5\n4 5 6 0\n";

    #[test]
    fn small_matrix_round_trips() {
        let (n, rows) = parse_alist(SMALL).unwrap();
        assert_eq!(n, 6);
        assert_eq!(rows, vec![vec![0, 1, 4], vec![1, 2, 3, 4], vec![3, 4, 5]]);
        let code = LdpcCode::from_rows(n, rows, "small").unwrap();
        let text = to_alist(&code);
        assert_eq!(text, SMALL);
        let (n2, rows2) = parse_alist(&text).unwrap();
        let again = LdpcCode::from_rows(n2, rows2, "again").unwrap();
        assert_eq!(again, code);
    }

    #[test]
    fn unpadded_lists_are_accepted() {
        let unpadded = "6 3\n3 4\n1 2 1 2 3 1\n3 4 3\n1\n1 2\n2\n2 3\n1 2 3\n3\n1 2 5\n2 3 4 5\n4 5 6\n";
        assert_eq!(parse_alist(unpadded).unwrap(), parse_alist(SMALL).unwrap());
    }

    #[test]
    fn inconsistent_degree_reports_line() {
        // column 2 claims degree 2 but lists three rows
        let bad = SMALL.replacen("1 2 0\n", "1 2 3\n", 1);
        match parse_alist(&bad) {
            Err(Error::Alist { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let bad = SMALL.replacen("1 2 1 2 3 1", "1 2 1 2 3", 1);
        assert!(matches!(parse_alist(&bad), Err(Error::Alist { line: 3, .. })));
    }

    #[test]
    fn halves_must_agree() {
        let bad = SMALL.replacen("4 5 6 0\n", "3 5 6 0\n", 1);
        assert!(matches!(parse_alist(&bad), Err(Error::Alist { line: 13, .. })));
    }

    #[test]
    fn truncated_and_garbage_input() {
        assert!(matches!(parse_alist("6 3\n3 4\n"), Err(Error::Alist { .. })));
        assert!(matches!(parse_alist("6 x\n"), Err(Error::Alist { line: 1, .. })));
        assert!(parse_alist("").is_err());
    }

    #[test]
    fn hamming_rate_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hamming.alist");
        let code = LdpcCode::from_dense(
            &[
                vec![1, 0, 1, 0, 1, 0, 1],
                vec![0, 1, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ],
            "hamming",
        )
        .unwrap();
        save_alist(&code, &path).unwrap();
        let loaded = load_alist(&path).unwrap();
        assert_eq!(loaded, code);
        assert!((loaded.rate() - 4.0 / 7.0).abs() < 1e-15);
    }
}
