use serde::Serialize;
use serde_json::Value;
use superloops::check::Check;

/// Outcome of one script. Object keys serialize in sorted order, so equal
/// inputs give byte-identical output.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn verdict(&self) -> String {
        format!(
            "{} ({}/{} checks)",
            if self.passed() { "pass" } else { "fail" },
            self.passed_count(),
            self.checks.len()
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for (label, v) in [("inputs", &self.inputs), ("results", &self.results)] {
            if is_empty(v) {
                out += &format!("{label}: none\n");
            } else {
                out += &format!("{label}:\n");
                render(v, 2, &mut out);
            }
        }
        out += "checks:\n";
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            if c.details.is_empty() {
                out += &format!("  [{mark}] {}\n", c.name);
            } else {
                out += &format!("  [{mark}] {} ({})\n", c.name, c.details);
            }
        }
        out += &format!("verdict: {}\n", self.verdict());
        if let Some(ms) = self.timing_ms {
            out += &format!("timing: {ms} ms\n");
        }
        out
    }
}

fn is_empty(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(a) => a.is_empty(),
        Value::Null => true,
        _ => false,
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Array(a) => {
            let parts: Option<Vec<String>> = a.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        Value::Object(_) => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, val) in m {
                match scalar(val) {
                    Some(s) => *out += &format!("{pad}{k}: {s}\n"),
                    None => {
                        *out += &format!("{pad}{k}:\n");
                        render(val, indent + 2, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => *out += &format!("{pad}- {s}\n"),
                    None => {
                        *out += &format!("{pad}-\n");
                        render(item, indent + 2, out);
                    }
                }
            }
        }
        other => *out += &format!("{pad}{}\n", scalar(other).unwrap_or_default()),
    }
}
