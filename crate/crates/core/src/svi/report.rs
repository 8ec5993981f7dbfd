use std::fmt::Write as _;

/// Outcome of one estimate experiment: a pass flag, fitted constants, free-form
/// notes, and a table of per-checkpoint rows.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub passed: bool,
    /// Smallest CI-adjusted slack over the checkpoints; negative means failure.
    pub worst_margin: f64,
    pub constants: Vec<(String, f64)>,
    pub notes: Vec<String>,
    /// Column names; the first names the row label.
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        EstimateReport {
            name: name.into(),
            passed: false,
            worst_margin: f64::NAN,
            constants: Vec::new(),
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn set_constant(&mut self, key: &str, value: f64) {
        match self.constants.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.constants.push((key.to_string(), value)),
        }
    }

    pub fn push_row(&mut self, label: impl Into<String>, values: Vec<f64>) {
        debug_assert_eq!(values.len() + 1, self.columns.len());
        self.rows.push((label.into(), values));
    }

    /// Self-describing `key = value` document.
    pub fn to_document(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "report = {}", self.name);
        let _ = writeln!(s, "passed = {}", self.passed);
        let _ = writeln!(s, "worst_margin = {:.16e}", self.worst_margin);
        for (k, v) in &self.constants {
            let _ = writeln!(s, "constant.{k} = {v:.16e}");
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, "note.{i} = {n}");
        }
        let _ = writeln!(s, "columns = {}", self.columns.join(","));
        let _ = writeln!(s, "rows = {}", self.rows.len());
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for (label, values) in &self.rows {
            s.push_str(label);
            for v in values {
                let _ = write!(s, ",{v:.16e}");
            }
            s.push('\n');
        }
        s
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{verdict} {} (worst margin {:.3e})", self.name, self.worst_margin);
        for (k, v) in &self.constants {
            let _ = write!(s, " {k}={v:.4e}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_layout() {
        let mut r = EstimateReport::new("demo", &["time", "lhs", "rhs"]);
        r.passed = true;
        r.worst_margin = 0.5;
        r.set_constant("C", 2.0);
        r.set_constant("C", 3.0);
        r.push_row("0", vec![1.0, 2.0]);
        assert_eq!(r.constant("C"), Some(3.0));
        let doc = r.to_document();
        assert!(doc.contains("passed = true"));
        assert!(doc.contains("constant.C = 3.0000000000000000e0"));
        assert_eq!(r.to_csv(), "time,lhs,rhs\n0,1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
