//! Output documents and the run manifest embedded in each of them.
//!
//! CSV and text outputs start with one `# manifest: {...}` line; a CSV
//! reader skips lines beginning with `#`. JSON outputs wrap the result as
//! `{"manifest": ..., "result": ...}`; JSON-lines streams put the manifest
//! object on the first line. Wall-clock time goes to stderr only, so equal
//! manifests give equal bytes.

use serde::Serialize;
use serde_json::{json, Value};

use crate::Format;

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    pub version: String,
    #[serde(skip)]
    pub format: Format,
}

impl Manifest {
    pub fn new<P: Serialize>(subcommand: &str, params: &P, seed: u64, format: Format) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params).expect("parameters serialize"),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            format,
        }
    }

    fn json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v["format"] = json!(self.format);
        v
    }
}

enum Body {
    Csv { header: String, rows: Vec<String> },
    Json(Value),
    JsonLines(Vec<Value>),
    Text(String),
}

pub struct Doc {
    manifest: Manifest,
    body: Body,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Doc {
    pub fn csv(manifest: Manifest, header: &str, rows: Vec<String>) -> Self {
        Doc { manifest, body: Body::Csv { header: header.to_string(), rows }, notes: Vec::new() }
    }

    pub fn json(manifest: Manifest, v: Value) -> Self {
        Doc { manifest, body: Body::Json(v), notes: Vec::new() }
    }

    pub fn json_lines(manifest: Manifest, lines: Vec<Value>) -> Self {
        Doc { manifest, body: Body::JsonLines(lines), notes: Vec::new() }
    }

    pub fn text(manifest: Manifest, text: String) -> Self {
        Doc { manifest, body: Body::Text(text), notes: Vec::new() }
    }

    pub fn render(&self) -> String {
        let m = self.manifest.json();
        match &self.body {
            Body::Csv { header, rows } => {
                let mut s = format!("# manifest: {m}\n{header}\n");
                for r in rows {
                    s.push_str(r);
                    s.push('\n');
                }
                s
            }
            Body::Text(t) => format!("# manifest: {m}\n{t}"),
            Body::Json(v) => {
                let doc = json!({ "manifest": m, "result": v });
                let mut s = serde_json::to_string_pretty(&doc).expect("json renders");
                s.push('\n');
                s
            }
            Body::JsonLines(lines) => {
                let mut s = json!({ "manifest": m }).to_string();
                s.push('\n');
                for l in lines {
                    s.push_str(&l.to_string());
                    s.push('\n');
                }
                s
            }
        }
    }
}
