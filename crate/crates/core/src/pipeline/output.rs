//! CSV and JSON writers; every file starts with the config hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV document assembled in memory and written in one go.
#[derive(Debug, Clone)]
pub struct CsvDoc {
    text: String,
    columns: usize,
}

/// One cell of a CSV row.
pub enum Cell<'a> {
    F(f64),
    I(i64),
    U(usize),
    S(&'a str),
}

impl CsvDoc {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# config {config_hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        CsvDoc {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&fmt_f64(*x)),
                Cell::I(x) => write!(self.text, "{x}").unwrap(),
                Cell::U(x) => write!(self.text, "{x}").unwrap(),
                Cell::S(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}
