//! Table rendering with provenance headers and atomic file emission.

use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Run provenance stamped at the top of every artifact. Contains no
/// timestamps: identical (config, seed) must give identical bytes.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config_hash: u64,
    pub seed: u64,
    pub version: String,
}

pub const SEED_RULE: &str = "per-task seed = hash64(master_seed, task_kind, task_index)";

/// One tabular artifact: comment lines, a header row, and data rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines rendered as comments (CSV) or a summary object (JSON).
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn add_summary(&mut self, key: &str, value: impl std::fmt::Display) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: Format, prov: &Provenance) -> String {
        match format {
            Format::Csv => self.render_csv(prov),
            Format::Json => self.render_json(prov),
        }
    }

    fn render_csv(&self, prov: &Provenance) -> String {
        let mut out = String::new();
        out.push_str(&format!("# kdqi {}\n", prov.version));
        out.push_str(&format!("# command={}\n", prov.command));
        out.push_str(&format!("# config_hash={:016x}\n", prov.config_hash));
        out.push_str(&format!("# seed={}\n", prov.seed));
        out.push_str(&format!("# seed_rule={SEED_RULE}\n"));
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self, prov: &Provenance) -> String {
        let summary: serde_json::Map<String, serde_json::Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "provenance": {
                "tool": "kdqi",
                "version": prov.version,
                "command": prov.command,
                "config_hash": format!("{:016x}", prov.config_hash),
                "seed": prov.seed,
                "seed_rule": SEED_RULE,
            },
            "summary": summary,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json rendering");
        text.push('\n');
        text
    }
}

/// Write an artifact: stdout for `-`, otherwise an atomic
/// write-to-temp-then-rename so failures never leave partial files.
pub fn emit(out: &str, content: &str) -> Result<(), CliError> {
    if out == "-" {
        print!("{content}");
        return Ok(());
    }
    let path = Path::new(out);
    let tmp = path.with_extension("tmp");
    let write_result = std::fs::write(&tmp, content)
        .and_then(|()| std::fs::rename(&tmp, path));
    if let Err(e) = write_result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::Runtime(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

/// Uniform float cell formatting: shortest round-trip decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> (Table, Provenance) {
        let mut table = Table::new(&["x", "y"]);
        table.push_row(vec!["1".into(), fmt_f64(0.1 + 0.2)]);
        table.push_row(vec!["2".into(), fmt_f64(1.0)]);
        table.add_summary("points", 2);
        let prov = Provenance {
            command: "scan".to_string(),
            config_hash: 0xabcd_0123_4567_89ef,
            seed: 7,
            version: "0.1.0".to_string(),
        };
        (table, prov)
    }

    #[test]
    fn csv_layout_is_comments_then_header_then_rows() {
        let (table, prov) = sample_table();
        let text = table.render(Format::Csv, &prov);
        let lines: Vec<&str> = text.lines().collect();
        let comments = lines.iter().take_while(|l| l.starts_with('#')).count();
        assert_eq!(comments, 6);
        assert!(lines.contains(&"# config_hash=abcd0123456789ef"));
        assert!(lines.contains(&"# points=2"));
        assert_eq!(lines[comments], "x,y");
        assert_eq!(lines[comments + 1], "1,0.30000000000000004");
        assert_eq!(lines.len(), comments + 3);
    }

    #[test]
    fn json_rendering_parses_back_with_provenance() {
        let (table, prov) = sample_table();
        let text = table.render(Format::Json, &prov);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["provenance"]["command"], "scan");
        assert_eq!(doc["provenance"]["seed"], 7);
        assert_eq!(doc["summary"]["points"], "2");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
        assert_eq!(doc["rows"][1]["y"], "1");
    }

    #[test]
    fn format_parsing_round_trips_and_rejects_unknown() {
        for f in [Format::Csv, Format::Json] {
            assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
        }
        assert!("tsv".parse::<Format>().is_err());
    }

    #[test]
    fn emit_writes_whole_files_without_leftover_temps() {
        let dir = std::env::temp_dir().join(format!("kdqi-emit-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let target = dir.join("table.csv");
        emit(target.to_str().unwrap(), "x,y\n1,2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "x,y\n1,2\n");
        assert!(!dir.join("table.tmp").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
