//! Coverage tables: rows, CSV and aligned text rendering.

use std::fmt::{self, Write as _};
use std::io;

/// Column key of a coverage row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QCell {
    /// Current observation fixed at the `q` quantile of the law.
    Quantile(f64),
    /// Current observation drawn at random ("real CI").
    Real,
    /// Unconditional interval, no conditioning.
    Marginal,
}

impl fmt::Display for QCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QCell::Quantile(q) => write!(f, "{q}"),
            QCell::Real => f.write_str("real"),
            QCell::Marginal => f.write_str("marginal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRow {
    pub sigma: f64,
    /// Sample size `n` or precision `d`, depending on the experiment.
    pub n_or_d: f64,
    /// Fixed first-stage size, when the experiment uses one.
    pub n0: Option<usize>,
    pub level: f64,
    pub q: QCell,
    pub coverage: f64,
    /// Binomial standard error `sqrt(c (1 - c) / runs)`.
    pub mc_se: f64,
    /// Mean final sample size (fixed-width experiments).
    pub mean_n: Option<f64>,
    /// Runs that produced an interval.
    pub runs: usize,
    /// Runs discarded as degenerate.
    pub dropped: usize,
}

impl CoverageRow {
    pub(crate) fn from_hits(
        sigma: f64,
        n_or_d: f64,
        n0: Option<usize>,
        level: f64,
        q: QCell,
        hits: usize,
        runs: usize,
        dropped: usize,
        mean_n: Option<f64>,
    ) -> Self {
        let coverage = if runs == 0 { 0.0 } else { hits as f64 / runs as f64 };
        let mc_se = if runs == 0 {
            0.0
        } else {
            (coverage * (1.0 - coverage) / runs as f64).sqrt()
        };
        Self {
            sigma,
            n_or_d,
            n0,
            level,
            q,
            coverage,
            mc_se,
            mean_n,
            runs,
            dropped,
        }
    }
}

/// Which parameter runs across the columns of the text table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableLayout {
    /// Rows `(sigma, n_or_d, n0, level)`, columns `q`.
    ByQuantile,
    /// Rows `(sigma, n_or_d)`, columns `level`.
    ByLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub title: String,
    /// Header lines: configuration, seed, assumptions.
    pub notes: Vec<String>,
    pub rows: Vec<CoverageRow>,
    pub layout: TableLayout,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

impl CoverageReport {
    pub fn new(title: impl Into<String>, layout: TableLayout) -> Self {
        Self {
            title: title.into(),
            notes: Vec::new(),
            rows: Vec::new(),
            layout,
        }
    }

    pub fn find(&self, pred: impl Fn(&CoverageRow) -> bool) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| pred(r))
    }

    /// CSV with `#` header lines. Design parameters are written in shortest
    /// round-trip form, estimates with 17 significant digits.
    pub fn write_csv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# {}", self.title)?;
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        writeln!(out, "sigma,n_or_d,n0,level,q,coverage,mc_se,mean_N,runs,dropped")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.sigma,
                r.n_or_d,
                r.n0.map(|v| v.to_string()).unwrap_or_default(),
                r.level,
                r.q,
                format_sig17(r.coverage),
                format_sig17(r.mc_se),
                r.mean_n.map(format_sig17).unwrap_or_default(),
                r.runs,
                r.dropped
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Aligned table: coverage to 3 decimals, mean sample size to 2 decimals
    /// on a second line when present.
    pub fn render_text(&self) -> String {
        let mut rows: Vec<(String, Vec<&CoverageRow>)> = Vec::new();
        let mut cols: Vec<String> = Vec::new();
        for r in &self.rows {
            let (row_key, col_key) = match self.layout {
                TableLayout::ByQuantile => {
                    let n0 = r.n0.map(|v| format!(" n0={v}")).unwrap_or_default();
                    (
                        format!("sigma={} n/d={}{} level={}", r.sigma, r.n_or_d, n0, r.level),
                        r.q.to_string(),
                    )
                }
                TableLayout::ByLevel => (
                    format!("sigma={} n={}", r.sigma, r.n_or_d),
                    r.level.to_string(),
                ),
            };
            if !cols.contains(&col_key) {
                cols.push(col_key);
            }
            match rows.iter_mut().find(|(k, _)| *k == row_key) {
                Some((_, v)) => v.push(r),
                None => rows.push((row_key, vec![r])),
            }
        }
        let col_of = |r: &CoverageRow| match self.layout {
            TableLayout::ByQuantile => r.q.to_string(),
            TableLayout::ByLevel => r.level.to_string(),
        };
        let label_w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(4);
        let cell_w = cols.iter().map(|c| c.len()).max().unwrap_or(0).max(8);
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.title);
        for note in &self.notes {
            let _ = writeln!(s, "  {note}");
        }
        let _ = write!(s, "{:label_w$}", "");
        for c in &cols {
            let _ = write!(s, " {c:>cell_w$}");
        }
        s.push('\n');
        for (key, members) in &rows {
            let cell = |c: &String| members.iter().find(|r| col_of(r) == *c).copied();
            let _ = write!(s, "{key:label_w$}");
            for c in &cols {
                let text = cell(c).map(|r| format!("{:.3}", r.coverage)).unwrap_or_default();
                let _ = write!(s, " {text:>cell_w$}");
            }
            s.push('\n');
            if members.iter().any(|r| r.mean_n.is_some()) {
                let _ = write!(s, "{:label_w$}", "");
                for c in &cols {
                    let text = cell(c)
                        .and_then(|r| r.mean_n)
                        .map(|m| format!("{m:.2}"))
                        .unwrap_or_default();
                    let _ = write!(s, " {text:>cell_w$}");
                }
                s.push('\n');
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> CoverageReport {
        let mut rep = CoverageReport::new("demo", TableLayout::ByQuantile);
        rep.notes.push("seed=1".into());
        for (q, hits) in [(QCell::Quantile(0.05), 90), (QCell::Quantile(0.5), 95), (QCell::Real, 93)] {
            rep.rows
                .push(CoverageRow::from_hits(0.6, 0.2, None, 0.9, q, hits, 100, 0, Some(17.5)));
        }
        rep
    }

    #[test]
    fn mc_se_is_binomial() {
        let r = CoverageRow::from_hits(0.4, 20.0, None, 0.95, QCell::Marginal, 930, 1000, 2, None);
        assert_eq!(r.coverage, 0.93);
        assert!((r.mc_se - (0.93f64 * 0.07 / 1000.0).sqrt()).abs() < 1e-15);
        let all = CoverageRow::from_hits(0.4, 20.0, None, 0.95, QCell::Marginal, 10, 10, 0, None);
        assert_eq!(all.mc_se, 0.0);
    }

    #[test]
    fn csv_round_trips_values() {
        let rep = report();
        let csv = rep.to_csv_string();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "sigma,n_or_d,n0,level,q,coverage,mc_se,mean_N,runs,dropped");
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "0.6");
        assert_eq!(fields[4], "0.05");
        assert_eq!(fields[5].parse::<f64>().unwrap(), rep.rows[0].coverage);
        assert_eq!(fields[6].parse::<f64>().unwrap(), rep.rows[0].mc_se);
        assert_eq!(lines[3].split(',').nth(4), Some("real"));
    }

    #[test]
    fn text_table_pivots() {
        let text = report().render_text();
        assert!(text.contains("0.900"));
        assert!(text.contains("0.950"));
        assert!(text.contains("17.50"));
        assert!(text.contains("real"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn sig17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 123456.789, 0.0, -2.5e-300] {
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
