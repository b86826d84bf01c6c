//! alist text format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based check indices of each column, optionally 0-padded>
//! <m lines: 1-based variable indices of each row, optionally 0-padded>
//! ```
//!
//! Blank lines are skipped. Both padded and unpadded adjacency lines parse;
//! [`to_alist`] writes the padded form.

use std::fmt::Write as _;

use thiserror::Error;

use super::ParityCheckMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("alist line {line}: {msg}")]
pub struct ParseError {
    /// 1-based line number; one past the last line for truncated input.
    pub line: usize,
    pub msg: String,
}

/// Writes `h` in padded alist form.
pub fn to_alist(h: &ParityCheckMatrix) -> String {
    let (n, m) = (h.n_cols(), h.n_rows());
    let (max_c, max_r) = (h.max_col_degree(), h.max_row_degree());
    let mut s = String::new();
    let _ = writeln!(s, "{n} {m}");
    let _ = writeln!(s, "{max_c} {max_r}");
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{}", join(&mut (0..n).map(|i| h.col_degree(i))));
    let _ = writeln!(s, "{}", join(&mut (0..m).map(|j| h.row_degree(j))));
    for i in 0..n {
        let col = h.col(i);
        let padded = col.iter().map(|&c| c as usize + 1).chain(std::iter::repeat_n(0, max_c - col.len()));
        let _ = writeln!(s, "{}", join(&mut padded.into_iter()));
    }
    for j in 0..m {
        let row = h.row(j);
        let padded = row.iter().map(|&v| v as usize + 1).chain(std::iter::repeat_n(0, max_r - row.len()));
        let _ = writeln!(s, "{}", join(&mut padded.into_iter()));
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line, msg: msg.into() }
    }

    /// Next non-blank line as parsed integers, with its line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>), ParseError> {
        loop {
            let Some((idx, raw)) = self.inner.next() else {
                return Err(self.err(self.last + 1, format!("unexpected end of input, expected {what}")));
            };
            self.last = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let nums = raw
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| self.err(idx + 1, format!("invalid integer {t:?} in {what}"))))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((idx + 1, nums));
        }
    }

    fn exactly(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>), ParseError> {
        let (line, nums) = self.next_numbers(what)?;
        if nums.len() != count {
            return Err(self.err(line, format!("{what}: expected {count} values, found {}", nums.len())));
        }
        Ok((line, nums))
    }
}

// Caps dimensions so hostile headers cannot force huge allocations before
// the body is validated.
const MAX_DIM: usize = 1 << 24;

/// Parses alist text into a matrix, mapping 1-based indices to 0-based.
pub fn from_alist(text: &str) -> Result<ParityCheckMatrix, ParseError> {
    let mut lines = Lines::new(text);
    let (l, dims) = lines.exactly("header", 2)?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 || n > MAX_DIM || m > MAX_DIM {
        return Err(lines.err(l, format!("unsupported dimensions n={n} m={m}")));
    }
    let (l_max, maxes) = lines.exactly("maximum degrees", 2)?;
    let (max_c, max_r) = (maxes[0], maxes[1]);
    if max_c > m || max_r > n {
        return Err(lines.err(l_max, "maximum degree exceeds matrix dimension"));
    }
    let (l_cd, col_deg) = lines.exactly("column degrees", n)?;
    let (l_rd, row_deg) = lines.exactly("row degrees", m)?;
    if col_deg.iter().max() != Some(&max_c) {
        return Err(lines.err(l_cd, "column degrees disagree with the declared maximum"));
    }
    if row_deg.iter().max() != Some(&max_r) {
        return Err(lines.err(l_rd, "row degrees disagree with the declared maximum"));
    }
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(lines.err(l_rd, "row and column degree totals differ"));
    }

    let read_lists = |lines: &mut Lines, count: usize, degs: &[usize], bound: usize, what: &str| {
        let mut out = Vec::with_capacity(count);
        for (k, &deg) in degs.iter().enumerate() {
            let (line, nums) = lines.next_numbers(what)?;
            let entries: Vec<usize> = nums.iter().copied().filter(|&x| x != 0).collect();
            // Zeros are padding and may only trail the real entries.
            if nums[..entries.len().min(nums.len())].contains(&0) {
                return Err(lines.err(line, format!("{what} {}: zero padding before entries", k + 1)));
            }
            if entries.len() != deg {
                return Err(lines.err(line, format!("{what} {}: expected {deg} entries, found {}", k + 1, entries.len())));
            }
            if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
                return Err(lines.err(line, format!("{what} {}: index {bad} out of range 1..={bound}", k + 1)));
            }
            out.push((line, entries.into_iter().map(|x| x - 1).collect::<Vec<_>>()));
        }
        Ok::<_, ParseError>(out)
    };
    let cols = read_lists(&mut lines, n, &col_deg, m, "column")?;
    let rows = read_lists(&mut lines, m, &row_deg, n, "row")?;

    let row_lines: Vec<usize> = rows.iter().map(|(l, _)| *l).collect();
    let rows: Vec<Vec<usize>> = rows.into_iter().map(|(_, r)| r).collect();
    let h = ParityCheckMatrix::from_rows(n, rows).map_err(|e| ParseError {
        line: row_lines.first().copied().unwrap_or(lines.last),
        msg: e.to_string(),
    })?;
    for (i, (line, mut col)) in cols.into_iter().enumerate() {
        col.sort_unstable();
        if !col.iter().map(|&c| c as u32).eq(h.col(i).iter().copied()) {
            return Err(lines.err(line, format!("column {} disagrees with the row lists", i + 1)));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn parses_one_based_fixture() {
        let h = from_alist(TOY).unwrap();
        assert_eq!((h.n_cols(), h.n_rows()), (3, 2));
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
        assert_eq!(h.col(1), &[0, 1]);
    }

    #[test]
    fn roundtrip_toy() {
        let h = ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let text = to_alist(&h);
        assert_eq!(text, TOY);
        assert_eq!(from_alist(&text).unwrap(), h);
    }

    #[test]
    fn unpadded_lines_accepted() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n\n1 2\n2 3\n";
        assert_eq!(from_alist(text).unwrap(), from_alist(TOY).unwrap());
    }

    #[test]
    fn truncated_reports_line() {
        let cut: String = TOY.lines().take(6).map(|l| format!("{l}\n")).collect();
        let err = from_alist(&cut).unwrap_err();
        assert_eq!(err.line, 7);
        assert!(err.msg.contains("end of input"));
    }

    #[test]
    fn inconsistent_lists_rejected() {
        // column 3 claims check 1, rows say check 2
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n1 0\n1 2\n2 3\n";
        let err = from_alist(bad).unwrap_err();
        assert_eq!(err.line, 7);
        let bad_int = "3 2\n2 x\n";
        assert_eq!(from_alist(bad_int).unwrap_err().line, 2);
        let out_of_range = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 4\n";
        assert_eq!(from_alist(out_of_range).unwrap_err().line, 9);
    }
}
