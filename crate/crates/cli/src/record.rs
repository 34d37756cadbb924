use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// One persisted run: the canonical command, a hash of the instance it
/// solved and the embedded result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub instance_hash: String,
    pub result: Value,
    pub versions: String,
    pub seed: u64,
    /// Zero unless timings were requested.
    pub wall_ms: u64,
}

pub fn versions() -> String {
    format!(
        "carpet-core {} carpet-cli {}",
        carpet_core::VERSION,
        env!("CARGO_PKG_VERSION")
    )
}

/// SHA-256 of the canonical instance encoding. `serde_json` maps keep their
/// keys sorted, so equal instances encode to equal bytes.
pub fn instance_hash(instance: &Value) -> String {
    let canonical = json!({ "instance": instance, "versions": versions() });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}
