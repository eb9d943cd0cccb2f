//! Run manifests: every output carries the command, inputs, and tool version
//! so a run can be reproduced byte-for-byte.

use std::collections::BTreeMap;

use serde::Serialize;

/// Provenance record serialized alongside every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuple_source: Option<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    pub fn begin(command: &str, tuple_source: Option<&str>) -> Self {
        Self {
            command: command.to_string(),
            tuple_source: tuple_source.map(str::to_string),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            started: now(),
            finished: String::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
    }

    pub fn finish(&mut self) {
        self.finished = now();
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
