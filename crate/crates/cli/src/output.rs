use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// 17 significant digits; parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Packed strain spread over the six component columns; 2-D leaves the
/// out-of-plane ones empty.
pub const XI_COLUMNS: [&str; 6] = ["xi_11", "xi_22", "xi_33", "xi_12", "xi_13", "xi_23"];

pub fn xi_cells(packed: &[f64]) -> Vec<String> {
    let slots: [Option<usize>; 6] = if packed.len() == 3 {
        [Some(0), Some(1), None, Some(2), None, None]
    } else {
        [Some(0), Some(1), Some(2), Some(3), Some(4), Some(5)]
    };
    slots.iter().map(|s| s.map(|i| num(packed[i])).unwrap_or_default()).collect()
}

pub struct Table {
    writer: csv::Writer<File>,
    width: usize,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let path: PathBuf = dir.join(name);
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(header)?;
        Ok(Self { writer, width: header.len() })
    }

    pub fn row(&mut self, cells: Vec<String>) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.width);
        self.writer.write_record(&cells)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

pub fn write_json<S: serde::Serialize>(dir: &Path, name: &str, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, f64::MAX, 6.999999999999999] {
            let s = num(x);
            assert_eq!(s.split('e').next().unwrap().trim_start_matches('-').replace('.', "").len(), 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn plane_strain_leaves_out_of_plane_empty() {
        let c = xi_cells(&[1.0, 2.0, 3.0]);
        assert_eq!(c[2], "");
        assert_eq!(c[3].parse::<f64>().unwrap(), 3.0);
    }
}
