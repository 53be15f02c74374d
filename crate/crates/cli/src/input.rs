//! Numeric column input.

use std::path::Path;

use crate::CliError;

/// Which column to read from a CSV file.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    /// Only valid for single-column files.
    Only,
    Index(usize),
    Name(String),
}

impl Column {
    pub fn from_flag(flag: Option<String>) -> Self {
        match flag {
            None => Column::Only,
            Some(s) => match s.parse::<usize>() {
                Ok(i) => Column::Index(i),
                Err(_) => Column::Name(s),
            },
        }
    }
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Reads one numeric column. A header row is detected when the selected
/// field of the first record does not parse as a number; a named column
/// requires one. Lines starting with `#` are comments.
pub fn read_column(path: &Path, column: &Column) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;

    let mut values = Vec::new();
    let mut index: Option<usize> = match column {
        Column::Only => None,
        Column::Index(i) => Some(*i),
        Column::Name(_) => None,
    };
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if first {
            first = false;
            match column {
                Column::Only if record.len() != 1 => {
                    return Err(CliError::Usage(format!(
                        "{}: {} columns found; choose one with --column",
                        path.display(),
                        record.len()
                    )))
                }
                Column::Only => index = Some(0),
                Column::Name(name) => {
                    let pos = record.iter().position(|f| f == name).ok_or_else(|| {
                        CliError::Usage(format!("{}: no column named '{name}' in header", path.display()))
                    })?;
                    index = Some(pos);
                    continue;
                }
                Column::Index(_) => {}
            }
            let i = index.expect("column index resolved above");
            match record.get(i) {
                Some(f) if !is_numeric(f) => continue,
                _ => {}
            }
        }
        let i = index.expect("column index resolved on the first record");
        let field = record.get(i).ok_or_else(|| {
            CliError::Usage(format!("{}: line {line}: no column {i}", path.display()))
        })?;
        let value: f64 = field.parse().map_err(|_| {
            CliError::Usage(format!("{}: line {line}: '{field}' is not a number", path.display()))
        })?;
        if !value.is_finite() {
            return Err(CliError::Usage(format!(
                "{}: line {line}: non-finite value '{field}'",
                path.display()
            )));
        }
        values.push(value);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_column_with_and_without_header() {
        let f = file("1.5\n-2\n3e-1\n");
        assert_eq!(read_column(f.path(), &Column::Only).unwrap(), vec![1.5, -2.0, 0.3]);
        let f = file("y\n1\n2\n");
        assert_eq!(read_column(f.path(), &Column::Only).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn selects_columns() {
        let f = file("# note\nindex,y,mu_hat,degenerate\n0,1.0,0.5,false\n1,2.0,1.5,true\n");
        assert_eq!(read_column(f.path(), &Column::Name("mu_hat".into())).unwrap(), vec![0.5, 1.5]);
        assert_eq!(read_column(f.path(), &Column::Index(1)).unwrap(), vec![1.0, 2.0]);
        assert!(read_column(f.path(), &Column::Only).is_err());
        assert!(read_column(f.path(), &Column::Name("z".into())).is_err());
    }

    #[test]
    fn rejects_nan_with_line() {
        let f = file("1\nNaN\n3\n");
        let err = read_column(f.path(), &Column::Only).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let f = file("1\nabc\n");
        let err = read_column(f.path(), &Column::Only).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }
}
