//! Deterministic CSV result tables with a reproducibility header.

use std::io::Write;

/// Rectangular result table. Numeric cells are rendered with the shortest
/// round-trip decimal representation, so identical runs give byte-identical
/// files.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// `(key, value)` metadata echoed as `# key = value` lines.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "ragged row");
        self.rows.push(cells);
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("tables are ascii")
    }
}

/// Shortest round-trip decimal formatting.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// FNV-1a hash of the canonical config echo, recorded in the metadata so a
/// table can be matched to the exact configuration that produced it.
pub fn fnv1a(parts: impl Iterator<Item = String>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for byte in part.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
        hash ^= 0xff;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape_and_header() {
        let mut table = ResultTable::new(&["a", "b"]);
        table.metadata.push(("seed".into(), "7".into()));
        table.push_row(vec![num(0.1), num(2.0)]);
        let text = table.to_csv_string();
        assert_eq!(text, "# seed = 7\na,b\n0.1,2\n");
    }

    #[test]
    fn formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.3413509262643946] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "value {v} via {s}");
        }
    }

    #[test]
    fn hash_is_stable_and_separates() {
        let a = fnv1a(["x=1".to_string(), "y=2".to_string()].into_iter());
        let b = fnv1a(["x=1".to_string(), "y=2".to_string()].into_iter());
        let c = fnv1a(["x=12".to_string(), "y=".to_string()].into_iter());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
