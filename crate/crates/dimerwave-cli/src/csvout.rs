//! CSV emission with a reproducibility header.
//!
//! Every file starts with `# dimerwave <version> <command>` and the full
//! resolved configuration as `# ` comment lines, then one plain header row,
//! then data. Floats use a fixed `%.12e` rendering so identical runs emit
//! identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct CsvFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl CsvFile {
    /// Create the file and write the comment header plus the column row.
    pub fn create(
        path: &Path,
        command: &str,
        config_echo: &str,
        columns: &[&str],
    ) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        let version = env!("CARGO_PKG_VERSION");
        write!(writer, "# dimerwave {version} {command}\n{config_echo}")
            .map_err(|e| write_error(path, e))?;
        writeln!(writer, "{}", columns.join(",")).map_err(|e| write_error(path, e))?;
        Ok(Self { path: path.to_path_buf(), writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.writer, "{}", fields.join(",")).map_err(|e| write_error(&self.path, e))
    }

    /// Trailing `# key = value` summary line.
    pub fn comment(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.writer, "# {text}").map_err(|e| write_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| write_error(&self.path, e))
    }
}

fn write_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Numeric(format!("write {}: {e}", path.display()))
}

/// Fixed-width float rendering shared by all emitters.
pub fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_columns_then_rows() {
        let dir = std::env::temp_dir().join("dimerwave-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut csv = CsvFile::create(&path, "capacitance", "# a = 1\n", &["x", "y"]).unwrap();
        csv.row(&[fmt(1.0), fmt(2.0)]).unwrap();
        csv.comment("slope = 1").unwrap();
        csv.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# dimerwave "));
        assert!(lines[0].ends_with(" capacitance"));
        assert_eq!(lines[1], "# a = 1");
        assert_eq!(lines[2], "x,y");
        assert_eq!(lines[3], "1.000000000000e0,2.000000000000e0");
        assert_eq!(lines[4], "# slope = 1");
    }
}
